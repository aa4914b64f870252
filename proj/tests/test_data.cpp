#include "dscn/data.hpp"
#include "dscn/glyphs.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

using dscn::Matrix;

namespace {

std::string write_file(const std::string& name, const std::string& body)
{
    const auto path = (std::filesystem::temp_directory_path() / ("dscn_data_" + name)).string();
    std::ofstream(path, std::ios::binary) << body;
    return path;
}

std::vector<double> sorted_rows(const dscn::dataset& d)
{
    std::vector<double> v;
    for (Eigen::Index i = 0; i < d.size(); ++i)
        v.push_back(d.inputs(i, 0) * 1e3 + d.targets(i, 0));
    std::sort(v.begin(), v.end());
    return v;
}

} // namespace

TEST(Benchmark, ValuesByHand)
{
    EXPECT_NEAR(dscn::benchmark_function(0.5), 0.2 * std::exp(-1.0) + 0.5, 1e-15);
    EXPECT_NEAR(dscn::benchmark_function(0.5), 0.5735759, 1e-7);
    EXPECT_NEAR(dscn::benchmark_function(0.4), 0.2, 1e-20);
    EXPECT_NEAR(dscn::benchmark_function(0.25), 0.2 * std::exp(-2.25) + 0.3, 1e-15);
    EXPECT_NEAR(dscn::benchmark_function(0.25), 0.3210797, 2e-7);
}

TEST(Benchmark, GeneratorMatchesIndependentFormula)
{
    const auto d = dscn::gen_benchmark(1000, 3);
    ASSERT_EQ(d.size(), 1000);
    ASSERT_EQ(d.input_dim(), 1);
    ASSERT_EQ(d.output_dim(), 1);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
        const double x = d.inputs(i, 0);
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 1.0);
        const double want = oracle::benchmark(x);
        EXPECT_LE(std::abs(d.targets(i, 0) - want), 1e-15 * std::max(std::abs(want), 1e-300));
    }
    const auto e = dscn::gen_benchmark(1000, 3);
    EXPECT_EQ(d.inputs, e.inputs);
    EXPECT_NE(d.inputs, dscn::gen_benchmark(1000, 4).inputs);

    const auto ranged = dscn::gen_benchmark(50, 1, -2.0, -1.0);
    EXPECT_GE(ranged.inputs.minCoeff(), -2.0);
    EXPECT_LE(ranged.inputs.maxCoeff(), -1.0);
    EXPECT_THROW(dscn::gen_benchmark(10, 1, 1.0, 1.0), dscn::invalid_input);
    EXPECT_THROW(dscn::gen_benchmark(0, 1), dscn::invalid_input);
}

TEST(RotateImage, ZeroAngleIsBitExact)
{
    const auto img = dscn::render_glyph(3);
    EXPECT_EQ(dscn::rotate_image(img, 0.0), img);
}

TEST(RotateImage, TwoByTwoHalfTurn)
{
    Matrix img(2, 2);
    img << 1, 0, 0, 0;
    Matrix want(2, 2);
    want << 0, 0, 0, 1;
    EXPECT_EQ(dscn::rotate_image(img, 180.0), want);
}

TEST(RotateImage, QuarterTurnIsCounterClockwise)
{
    Matrix img = Matrix::Zero(3, 3);
    img(0, 1) = 1.0; // top middle
    const Matrix out = dscn::rotate_image(img, 90.0);
    EXPECT_EQ(out(1, 0), 1.0); // left middle
    EXPECT_EQ(out.sum(), 1.0);
}

TEST(RotateImage, ForwardAndBackRecoversInterior)
{
    for (int cls = 0; cls < dscn::glyph_classes; ++cls) {
        const auto img = dscn::render_glyph(cls);
        for (const double angle : {-40.0, -17.5, 12.0, 33.0}) {
            const Matrix back = dscn::rotate_image(dscn::rotate_image(img, angle), -angle);
            const auto inner = dscn::glyph_side - 6;
            EXPECT_LE((back.block(3, 3, inner, inner) - img.block(3, 3, inner, inner)).cwiseAbs().mean(),
                      0.05)
                << "class " << cls << " angle " << angle;
        }
    }
}

TEST(RotateImage, ConservesMass)
{
    for (int cls = 0; cls < dscn::glyph_classes; ++cls) {
        const auto img = dscn::render_glyph(cls);
        for (const double angle : {-45.0, -20.0, 7.0, 45.0}) {
            const double ratio = dscn::rotate_image(img, angle).sum() / img.sum();
            EXPECT_GT(ratio, 0.8);
            EXPECT_LT(ratio, 1.2);
        }
    }
    EXPECT_THROW(dscn::rotate_image(Matrix::Ones(2, 2), std::nan("")), dscn::invalid_input);
}

TEST(Glyphs, ShapesSupportAndDeterminism)
{
    const auto g = dscn::gen_rotated_glyphs(60, 5);
    EXPECT_EQ(g.data.inputs.rows(), 60);
    EXPECT_EQ(g.data.inputs.cols(), 784);
    EXPECT_EQ(g.data.targets.rows(), 60);
    EXPECT_EQ(g.data.targets.cols(), 1);
    EXPECT_EQ(g.classes.size(), 60u);
    EXPECT_GE(g.data.targets.minCoeff(), -45.0);
    EXPECT_LE(g.data.targets.maxCoeff(), 45.0);
    EXPECT_GE(g.data.inputs.minCoeff(), 0.0);
    EXPECT_LE(g.data.inputs.maxCoeff(), 1.0);
    EXPECT_TRUE(dscn::all_finite(g.data.inputs));
    for (const int c : g.classes) {
        EXPECT_GE(c, 0);
        EXPECT_LT(c, 10);
    }

    const auto again = dscn::gen_rotated_glyphs(60, 5);
    EXPECT_EQ(g.data.inputs, again.data.inputs);
    EXPECT_EQ(g.data.targets, again.data.targets);
    EXPECT_EQ(g.classes, again.classes);
    EXPECT_NE(g.data.targets, dscn::gen_rotated_glyphs(60, 6).data.targets);
}

TEST(Glyphs, TemplatesAreDistinctAndCentred)
{
    std::vector<Matrix> imgs;
    for (int c = 0; c < dscn::glyph_classes; ++c) {
        imgs.push_back(dscn::render_glyph(c));
        const auto& img = imgs.back();
        EXPECT_EQ(img.rows(), 28);
        EXPECT_GT(img.sum(), 20.0);
        EXPECT_EQ(img.row(0).sum() + img.row(27).sum() + img.col(0).sum() + img.col(27).sum(), 0.0);
    }
    for (int a = 0; a < dscn::glyph_classes; ++a)
        for (int b = a + 1; b < dscn::glyph_classes; ++b)
            EXPECT_GT((imgs[static_cast<std::size_t>(a)] - imgs[static_cast<std::size_t>(b)]).norm(), 3.0);
    EXPECT_THROW(dscn::render_glyph(10), dscn::invalid_input);
}

TEST(Glyphs, FlattenIsRowMajor)
{
    Matrix img = Matrix::Zero(28, 28);
    img(1, 2) = 0.75;
    const auto row = dscn::flatten_image(img);
    EXPECT_EQ(row(28 + 2), 0.75);
    EXPECT_EQ(dscn::unflatten_image(row), img);
    EXPECT_THROW(dscn::unflatten_image(Eigen::RowVectorXd::Zero(10)), dscn::dimension_error);
}

TEST(Csv, RoundTripKeepsFullPrecision)
{
    auto d = dscn::gen_benchmark(40, 7);
    d.inputs(0, 0) = 0.1 + 0.2;
    d.targets(1, 0) = 1e-300;
    const auto path = (std::filesystem::temp_directory_path() / "dscn_data_roundtrip.csv").string();
    dscn::save_csv(d, path);
    const auto back = dscn::load_csv(path);
    EXPECT_EQ(back.inputs, d.inputs);
    EXPECT_EQ(back.targets, d.targets);
    EXPECT_EQ(back.feature_names, std::vector<std::string>{"x1"});
    EXPECT_EQ(back.target_names, std::vector<std::string>{"y1"});

    const auto g = dscn::gen_rotated_glyphs(3, 1);
    dscn::save_csv(g.data, path);
    const auto gb = dscn::load_csv(path);
    EXPECT_EQ(gb.inputs, g.data.inputs);
    EXPECT_EQ(gb.input_dim(), 784);
}

TEST(Csv, MultiColumnSchema)
{
    const auto path = write_file("multi.csv", "x1,x2,y1,y2\n1,2,3,4\n-0.5,+6e-1,7,8\n");
    const auto d = dscn::load_csv(path);
    EXPECT_EQ(d.input_dim(), 2);
    EXPECT_EQ(d.output_dim(), 2);
    EXPECT_EQ(d.inputs(1, 1), 0.6);
    EXPECT_EQ(d.targets(1, 1), 8.0);
}

TEST(Csv, Errors)
{
    try {
        dscn::load_csv("/nonexistent/data.csv");
        FAIL();
    } catch (const dscn::io_error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/data.csv"), std::string::npos);
    }
    try {
        dscn::load_csv(write_file("header.csv", "x1,y1\n"));
        FAIL();
    } catch (const dscn::parse_error& e) {
        EXPECT_NE(std::string(e.what()).find("empty dataset"), std::string::npos);
    }
    try {
        dscn::load_csv(write_file("short.csv", "x1,x2,y1\n1,2,3\n4,5\n"));
        FAIL();
    } catch (const dscn::parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(std::string(e.what()).find("malformed row"), std::string::npos);
    }
    try {
        dscn::load_csv(write_file("text.csv", "x1,y1\n1,2\n3,abc\n"));
        FAIL();
    } catch (const dscn::parse_error& e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(dscn::load_csv(write_file("nan.csv", "x1,y1\nnan,1\n")), dscn::parse_error);
    EXPECT_THROW(dscn::load_csv(write_file("noy.csv", "x1,x2\n1,2\n")), dscn::parse_error);
    EXPECT_THROW(dscn::load_csv(write_file("bad_header.csv", "a,y1\n1,2\n")), dscn::parse_error);
    EXPECT_THROW(dscn::load_csv(write_file("long.csv", "x1,y1\n1,2,3\n")), dscn::parse_error);
}

TEST(Split, SizesPartitionDeterminism)
{
    const auto d = dscn::gen_benchmark(1000, 8);
    const auto [a, b] = dscn::split(d, 0.5, 3);
    EXPECT_EQ(a.size(), 500);
    EXPECT_EQ(b.size(), 500);

    dscn::dataset merged;
    merged.inputs.resize(1000, 1);
    merged.targets.resize(1000, 1);
    merged.inputs << a.inputs, b.inputs;
    merged.targets << a.targets, b.targets;
    EXPECT_EQ(sorted_rows(merged), sorted_rows(d));

    const auto [a2, b2] = dscn::split(d, 0.5, 3);
    EXPECT_EQ(a.inputs, a2.inputs);
    EXPECT_NE(a.inputs, dscn::split(d, 0.5, 4).first.inputs);

    const auto [c, e] = dscn::split(dscn::gen_benchmark(7, 1), 0.3, 1);
    EXPECT_EQ(c.size(), 3);
    EXPECT_EQ(e.size(), 4);

    EXPECT_THROW(dscn::split(d, 0.0, 1), dscn::invalid_input);
    EXPECT_THROW(dscn::split(d, 1.0, 1), dscn::invalid_input);
}
