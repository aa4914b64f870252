#pragma once

// Datasets, CSV ingestion/export, splitting and the 1-D benchmark generator.

#include "dscn/errors.hpp"
#include "dscn/linalg.hpp"
#include "dscn/random.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dscn {

struct dataset {
    Matrix inputs;  // N x d
    Matrix targets; // N x m
    std::vector<std::string> feature_names;
    std::vector<std::string> target_names;

    Eigen::Index size() const noexcept { return inputs.rows(); }
    Eigen::Index input_dim() const noexcept { return inputs.cols(); }
    Eigen::Index output_dim() const noexcept { return targets.cols(); }
};

inline void validate(const dataset& data)
{
    if (data.inputs.rows() != data.targets.rows())
        throw dimension_error("dataset: " + std::to_string(data.inputs.rows()) + " input rows but " +
                              std::to_string(data.targets.rows()) + " target rows");
    require_finite(data.inputs, "dataset inputs");
    require_finite(data.targets, "dataset targets");
}

/// Rows of `data` in the order given by `index`.
inline dataset select_rows(const dataset& data, const std::vector<Eigen::Index>& index)
{
    dataset out;
    out.inputs.resize(static_cast<Eigen::Index>(index.size()), data.input_dim());
    out.targets.resize(static_cast<Eigen::Index>(index.size()), data.output_dim());
    for (std::size_t i = 0; i < index.size(); ++i) {
        out.inputs.row(static_cast<Eigen::Index>(i)) = data.inputs.row(index[i]);
        out.targets.row(static_cast<Eigen::Index>(i)) = data.targets.row(index[i]);
    }
    out.feature_names = data.feature_names;
    out.target_names = data.target_names;
    return out;
}

inline std::vector<Eigen::Index> shuffled_indices(Eigen::Index n, std::uint64_t seed)
{
    std::vector<Eigen::Index> index(static_cast<std::size_t>(n));
    std::iota(index.begin(), index.end(), Eigen::Index{0});
    random_stream rng(seed, {0x5b11});
    for (std::size_t i = index.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(index[i - 1], index[j]);
    }
    return index;
}

/// Deterministic shuffled partition: first part holds ceil(N * fraction) rows.
inline std::pair<dataset, dataset> split(const dataset& data, double fraction, std::uint64_t seed)
{
    if (!(fraction > 0.0 && fraction < 1.0))
        throw invalid_input("split: fraction must lie in (0, 1)");
    const auto index = shuffled_indices(data.size(), seed);
    const auto head = static_cast<std::size_t>(std::ceil(static_cast<double>(data.size()) * fraction));
    std::vector<Eigen::Index> first(index.begin(), index.begin() + static_cast<std::ptrdiff_t>(head));
    std::vector<Eigen::Index> second(index.begin() + static_cast<std::ptrdiff_t>(head), index.end());
    return {select_rows(data, first), select_rows(data, second)};
}

// ---------------------------------------------------------------------------
// Benchmark: f(x) = 0.2 e^{-(10x-4)^2} + 0.5 e^{-(80x-40)^2} + 0.3 e^{-(80x-20)^2}
// ---------------------------------------------------------------------------

inline double benchmark_function(double x) noexcept
{
    const double a = 10.0 * x - 4.0;
    const double b = 80.0 * x - 40.0;
    const double c = 80.0 * x - 20.0;
    return 0.2 * std::exp(-a * a) + 0.5 * std::exp(-b * b) + 0.3 * std::exp(-c * c);
}

inline dataset gen_benchmark(Eigen::Index n, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
    if (n < 1)
        throw invalid_input("gen_benchmark: n must be >= 1");
    if (!(lo < hi))
        throw invalid_input("gen_benchmark: lo must be < hi");

    dataset data;
    data.inputs.resize(n, 1);
    data.targets.resize(n, 1);
    random_stream rng(seed, {0xbe9c});
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = rng.uniform(lo, hi);
        data.inputs(i, 0) = x;
        data.targets(i, 0) = benchmark_function(x);
    }
    data.feature_names = {"x1"};
    data.target_names = {"y1"};
    return data;
}

// ---------------------------------------------------------------------------
// CSV: header x1,...,xd,y1,...,ym then one sample per line.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_cells(std::string_view line)
{
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return cells;
}

inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline dataset load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line))
        throw parse_error("empty dataset: missing header", 1);
    ++line_no;
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0)
        line.erase(0, 3);

    dataset data;
    for (const auto cell : detail::split_cells(line)) {
        if (cell.empty())
            throw parse_error("empty header cell", line_no);
        if (cell.front() == 'x') {
            if (!data.target_names.empty())
                throw parse_error("feature column '" + std::string(cell) + "' after target columns",
                                  line_no);
            data.feature_names.emplace_back(cell);
        } else if (cell.front() == 'y') {
            data.target_names.emplace_back(cell);
        } else {
            throw parse_error("header cell '" + std::string(cell) + "' must start with x or y", line_no);
        }
    }
    const auto d = data.feature_names.size();
    const auto m = data.target_names.size();
    if (d == 0 || m == 0)
        throw parse_error("header needs at least one x and one y column", line_no);
    const auto width = d + m;

    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty())
            continue;
        const auto cells = detail::split_cells(line);
        if (cells.size() != width)
            throw parse_error("malformed row: expected " + std::to_string(width) + " cells, found " +
                                  std::to_string(cells.size()),
                              line_no);
        for (const auto cell : cells) {
            double v = 0.0;
            const auto* first = cell.data();
            const auto* last = cell.data() + cell.size();
            if (!cell.empty() && *first == '+')
                ++first;
            const auto res = std::from_chars(first, last, v);
            if (cell.empty() || res.ec != std::errc{} || res.ptr != last || !std::isfinite(v))
                throw parse_error("non-numeric cell '" + std::string(cell) + "'", line_no);
            values.push_back(v);
        }
        ++rows;
    }
    if (rows == 0)
        throw parse_error("empty dataset", line_no);

    const auto n = static_cast<Eigen::Index>(rows);
    data.inputs.resize(n, static_cast<Eigen::Index>(d));
    data.targets.resize(n, static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto* row = values.data() + static_cast<std::size_t>(i) * width;
        for (std::size_t j = 0; j < d; ++j)
            data.inputs(i, static_cast<Eigen::Index>(j)) = row[j];
        for (std::size_t j = 0; j < m; ++j)
            data.targets(i, static_cast<Eigen::Index>(j)) = row[d + j];
    }
    return data;
}

inline void write_csv(const dataset& data, std::ostream& out)
{
    validate(data);
    const auto d = data.input_dim();
    const auto m = data.output_dim();
    for (Eigen::Index j = 0; j < d; ++j) {
        const bool named = static_cast<Eigen::Index>(data.feature_names.size()) == d;
        out << (j ? "," : "") << (named ? data.feature_names[static_cast<std::size_t>(j)]
                                        : "x" + std::to_string(j + 1));
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const bool named = static_cast<Eigen::Index>(data.target_names.size()) == m;
        out << "," << (named ? data.target_names[static_cast<std::size_t>(j)]
                             : "y" + std::to_string(j + 1));
    }
    out << '\n';
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j)
            out << (j ? "," : "") << detail::format_double(data.inputs(i, j));
        for (Eigen::Index j = 0; j < m; ++j)
            out << ',' << detail::format_double(data.targets(i, j));
        out << '\n';
    }
}

inline void save_csv(const dataset& data, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    write_csv(data, out);
    if (!out)
        throw io_error("failed writing '" + path + "'");
}

} // namespace dscn
