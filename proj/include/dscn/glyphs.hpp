#pragma once

// Synthetic rotated-glyph regression set: ten stroke templates shaped like
// the digits 0-9, rendered into 28x28 grayscale images, rotated by a random
// angle in [-45, 45] degrees. The regression target is the angle.

#include "dscn/data.hpp"
#include "dscn/errors.hpp"
#include "dscn/linalg.hpp"
#include "dscn/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

namespace dscn {

inline constexpr Eigen::Index glyph_side = 28;
inline constexpr Eigen::Index glyph_pixels = glyph_side * glyph_side;
inline constexpr int glyph_classes = 10;
inline constexpr double glyph_max_angle = 45.0;

/// Rotates counter-clockwise (as displayed, row 0 on top) by `degrees` about
/// the image center using inverse-mapped bilinear sampling. Samples falling
/// outside the source read as 0.
inline Matrix rotate_image(const Matrix& img, double degrees)
{
    if (!std::isfinite(degrees))
        throw invalid_input("rotate_image: angle must be finite");

    double c = 0.0;
    double s = 0.0;
    const double quarter = degrees / 90.0;
    if (quarter == std::floor(quarter)) {
        static constexpr std::array<std::pair<double, double>, 4> exact{
            {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}}};
        const auto k = static_cast<long long>(quarter);
        const auto idx = static_cast<std::size_t>(((k % 4) + 4) % 4);
        c = exact[idx].first;
        s = exact[idx].second;
    } else {
        const double rad = degrees * std::numbers::pi / 180.0;
        c = std::cos(rad);
        s = std::sin(rad);
    }

    const Eigen::Index rows = img.rows();
    const Eigen::Index cols = img.cols();
    const double cx = 0.5 * static_cast<double>(cols - 1);
    const double cy = 0.5 * static_cast<double>(rows - 1);

    auto at = [&](Eigen::Index r, Eigen::Index col) {
        return (r < 0 || r >= rows || col < 0 || col >= cols) ? 0.0 : img(r, col);
    };

    Matrix out(rows, cols);
    for (Eigen::Index y = 0; y < rows; ++y) {
        for (Eigen::Index x = 0; x < cols; ++x) {
            const double dx = static_cast<double>(x) - cx;
            const double dy = static_cast<double>(y) - cy;
            const double sx = cx + c * dx - s * dy;
            const double sy = cy + s * dx + c * dy;
            const double fx = std::floor(sx);
            const double fy = std::floor(sy);
            const double ax = sx - fx;
            const double ay = sy - fy;
            const auto x0 = static_cast<Eigen::Index>(fx);
            const auto y0 = static_cast<Eigen::Index>(fy);
            double v = (1.0 - ax) * (1.0 - ay) * at(y0, x0);
            if (ax != 0.0)
                v += ax * (1.0 - ay) * at(y0, x0 + 1);
            if (ay != 0.0)
                v += (1.0 - ax) * ay * at(y0 + 1, x0);
            if (ax != 0.0 && ay != 0.0)
                v += ax * ay * at(y0 + 1, x0 + 1);
            out(y, x) = v;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

/// A polyline in template coordinates: u to the right, v downwards, both
/// roughly in [-1, 1].
using stroke = std::vector<std::array<double, 2>>;

namespace detail {

inline stroke arc(double cu, double cv, double ru, double rv, double from_deg, double to_deg,
                  int steps = 16)
{
    stroke s;
    for (int i = 0; i <= steps; ++i) {
        const double t = (from_deg + (to_deg - from_deg) * i / steps) * std::numbers::pi / 180.0;
        s.push_back({cu + ru * std::cos(t), cv + rv * std::sin(t)});
    }
    return s;
}

inline stroke join(stroke a, const stroke& b)
{
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace detail

inline const std::vector<std::vector<stroke>>& glyph_templates()
{
    using detail::arc;
    using detail::join;
    static const std::vector<std::vector<stroke>> templates{
        // 0
        {arc(0.0, 0.0, 0.75, 1.0, 0, 360, 28)},
        // 1
        {{{-0.4, -0.6}, {0.1, -1.0}, {0.1, 1.0}}, {{-0.35, 1.0}, {0.55, 1.0}}},
        // 2
        {join(arc(0.0, -0.45, 0.7, 0.55, 180, 385), {{-0.8, 1.0}, {0.8, 1.0}})},
        // 3
        {arc(0.0, -0.5, 0.6, 0.5, 200, 450), arc(0.0, 0.5, 0.65, 0.5, 270, 520)},
        // 4
        {{{0.35, 1.0}, {0.35, -1.0}, {-0.8, 0.35}, {0.8, 0.35}}},
        // 5
        {join({{0.7, -1.0}, {-0.55, -1.0}, {-0.6, -0.1}}, arc(0.0, 0.4, 0.65, 0.6, -130, 150))},
        // 6
        {join({{0.55, -1.0}, {-0.2, -0.6}, {-0.6, 0.3}}, arc(0.0, 0.45, 0.6, 0.55, 180, 540, 24))},
        // 7
        {{{-0.8, -1.0}, {0.8, -1.0}, {-0.2, 1.0}}, {{-0.3, 0.05}, {0.45, 0.05}}},
        // 8
        {arc(0.0, -0.52, 0.5, 0.46, 0, 360, 20), arc(0.0, 0.5, 0.62, 0.5, 0, 360, 20)},
        // 9
        {arc(0.0, -0.45, 0.6, 0.55, 0, 360, 20), {{0.6, -0.45}, {0.45, 1.0}}},
    };
    return templates;
}

/// Per-sample rendering variation.
struct glyph_style {
    double scale = 1.0;      // overall size multiplier
    double half_width = 1.1; // stroke half width, pixels
    double shift_x = 0.0;    // pixels
    double shift_y = 0.0;
    double slant = 0.0;      // horizontal shear, u += slant * v
    double wobble = 0.0;     // amplitude of the smooth elastic warp, template units
    double phase_u = 0.0;
    double phase_v = 0.0;
};

namespace detail {

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by)
{
    const double vx = bx - ax;
    const double vy = by - ay;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (ax + t * vx);
    const double dy = py - (ay + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace detail

/// Renders template `cls` upright. Intensity is 1 within the stroke and
/// falls off as a Gaussian of the distance beyond it.
inline Matrix render_glyph(int cls, const glyph_style& style = {})
{
    const auto& templates = glyph_templates();
    if (cls < 0 || cls >= static_cast<int>(templates.size()))
        throw invalid_input("render_glyph: unknown class " + std::to_string(cls));

    const double center = 0.5 * static_cast<double>(glyph_side - 1);
    const double su = 5.6 * style.scale;
    const double sv = 8.0 * style.scale;
    auto place = [&](const std::array<double, 2>& p) {
        const double u = p[0] + style.slant * p[1] +
                         style.wobble * std::sin(std::numbers::pi * p[1] + style.phase_u);
        const double v = p[1] + style.wobble * std::sin(std::numbers::pi * p[0] + style.phase_v);
        return std::array<double, 2>{center + style.shift_x + su * u, center + style.shift_y + sv * v};
    };
    std::vector<std::array<double, 4>> segments;
    for (const auto& s : templates[static_cast<std::size_t>(cls)]) {
        for (std::size_t i = 0; i + 1 < s.size(); ++i) {
            const auto a = place(s[i]);
            const auto b = place(s[i + 1]);
            segments.push_back({a[0], a[1], b[0], b[1]});
        }
    }

    constexpr double falloff = 0.75;
    Matrix img(glyph_side, glyph_side);
    for (Eigen::Index y = 0; y < glyph_side; ++y) {
        for (Eigen::Index x = 0; x < glyph_side; ++x) {
            double d = std::numeric_limits<double>::infinity();
            for (const auto& seg : segments)
                d = std::min(d, detail::segment_distance(static_cast<double>(x),
                                                         static_cast<double>(y), seg[0], seg[1],
                                                         seg[2], seg[3]));
            const double excess = std::max(0.0, d - style.half_width);
            img(y, x) = std::exp(-0.5 * excess * excess / (falloff * falloff));
            if (img(y, x) < 1e-3)
                img(y, x) = 0.0;
        }
    }
    return img;
}

/// Row-major flattening to a 1 x (rows*cols) feature row.
inline Eigen::RowVectorXd flatten_image(const Matrix& img)
{
    Eigen::RowVectorXd row(img.size());
    for (Eigen::Index y = 0; y < img.rows(); ++y)
        for (Eigen::Index x = 0; x < img.cols(); ++x)
            row(y * img.cols() + x) = img(y, x);
    return row;
}

inline Matrix unflatten_image(const Eigen::RowVectorXd& row, Eigen::Index side = glyph_side)
{
    if (row.size() != side * side)
        throw dimension_error("unflatten_image: expected " + std::to_string(side * side) + " pixels");
    Matrix img(side, side);
    for (Eigen::Index y = 0; y < side; ++y)
        for (Eigen::Index x = 0; x < side; ++x)
            img(y, x) = row(y * side + x);
    return img;
}

struct glyph_dataset {
    dataset data;             // n x 784 pixels, n x 1 angle in degrees
    std::vector<int> classes; // template index per sample
};

/// `distortion` scales the handwriting-like slant and elastic warp; 0 keeps
/// the templates rigid apart from size, width and position jitter.
inline glyph_dataset gen_rotated_glyphs(Eigen::Index n, std::uint64_t seed,
                                        double distortion = 1.5)
{
    if (n < 1)
        throw invalid_input("gen_rotated_glyphs: n must be >= 1");
    if (!(distortion >= 0.0) || !std::isfinite(distortion))
        throw invalid_input("gen_rotated_glyphs: distortion must be finite and >= 0");

    glyph_dataset out;
    out.data.inputs.resize(n, glyph_pixels);
    out.data.targets.resize(n, 1);
    out.classes.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        random_stream rng(seed, {0x9175, static_cast<std::uint64_t>(i)});
        const int cls = static_cast<int>(rng.below(glyph_classes));
        glyph_style style;
        style.scale = rng.uniform(0.88, 1.05);
        style.half_width = rng.uniform(0.8, 1.4);
        style.shift_x = rng.uniform(-1.0, 1.0);
        style.shift_y = rng.uniform(-1.0, 1.0);
        style.slant = distortion * rng.uniform(-0.25, 0.25);
        style.wobble = distortion * rng.uniform(0.0, 0.12);
        style.phase_u = rng.uniform(0.0, 2.0 * std::numbers::pi);
        style.phase_v = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double angle = rng.uniform(-glyph_max_angle, glyph_max_angle);

        out.data.inputs.row(i) = flatten_image(rotate_image(render_glyph(cls, style), angle));
        out.data.targets(i, 0) = angle;
        out.classes.push_back(cls);
    }
    for (Eigen::Index j = 0; j < glyph_pixels; ++j)
        out.data.feature_names.push_back("x" + std::to_string(j + 1));
    out.data.target_names = {"y1"};
    return out;
}

} // namespace dscn
