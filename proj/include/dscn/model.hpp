#pragma once

// A built network: cascaded hidden layers whose outputs all feed the
// linear readout directly.

#include "dscn/errors.hpp"
#include "dscn/linalg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dscn {

enum class activation_kind { sigmoid };

inline std::string_view to_string(activation_kind kind)
{
    switch (kind) {
    case activation_kind::sigmoid:
        return "sigmoid";
    }
    return "unknown";
}

inline activation_kind activation_from_string(std::string_view name)
{
    if (name == "sigmoid")
        return activation_kind::sigmoid;
    throw invalid_input("unknown activation '" + std::string(name) + "'");
}

// Clamped so the result stays strictly inside (0, 1) even where the exact
// value rounds to an endpoint.
inline double sigmoid(double z) noexcept
{
    constexpr double lo = std::numeric_limits<double>::denorm_min();
    static const double hi = std::nextafter(1.0, 0.0);
    double y;
    if (z >= 0.0) {
        y = 1.0 / (1.0 + std::exp(-z));
    } else {
        const double e = std::exp(z);
        y = e / (1.0 + e);
    }
    return std::clamp(y, lo, hi);
}

inline double activate(activation_kind kind, double z) noexcept
{
    switch (kind) {
    case activation_kind::sigmoid:
        return sigmoid(z);
    }
    return z;
}

struct hidden_node {
    Vector weights;
    double bias = 0.0;

    friend bool operator==(const hidden_node& a, const hidden_node& b)
    {
        return a.bias == b.bias && a.weights.size() == b.weights.size() &&
               a.weights == b.weights;
    }
};

struct layer {
    std::vector<hidden_node> nodes;
    activation_kind activation = activation_kind::sigmoid;
    Eigen::Index input_dim = 0;

    Eigen::Index size() const noexcept { return static_cast<Eigen::Index>(nodes.size()); }

    friend bool operator==(const layer&, const layer&) = default;
};

struct model_metadata {
    std::uint64_t seed = 0;
    nlohmann::json config = nlohmann::json::object();
    /// ||E||_F after each accepted node (or batch round), in build order.
    std::vector<double> residual_trace;

    friend bool operator==(const model_metadata&, const model_metadata&) = default;
};

struct deep_scn_model {
    std::vector<layer> layers;
    Matrix readout; // (sum of layer sizes) x output_dim
    Eigen::Index input_dim = 0;
    Eigen::Index output_dim = 0;
    model_metadata metadata;

    Eigen::Index node_count() const noexcept
    {
        Eigen::Index total = 0;
        for (const auto& l : layers)
            total += l.size();
        return total;
    }

    friend bool operator==(const deep_scn_model& a, const deep_scn_model& b)
    {
        return a.layers == b.layers && a.input_dim == b.input_dim &&
               a.output_dim == b.output_dim && a.metadata == b.metadata &&
               a.readout.rows() == b.readout.rows() && a.readout.cols() == b.readout.cols() &&
               a.readout == b.readout;
    }
};

/// Entry (i, j) = g(w_j . x_i + b_j).
inline Matrix layer_forward(const Matrix& inputs, const layer& l)
{
    if (inputs.cols() != l.input_dim)
        throw dimension_error("layer_forward: inputs have " + std::to_string(inputs.cols()) +
                              " columns, layer expects " + std::to_string(l.input_dim));

    Matrix weights(l.input_dim, l.size());
    Eigen::RowVectorXd bias(l.size());
    for (Eigen::Index j = 0; j < l.size(); ++j) {
        const auto& node = l.nodes[static_cast<std::size_t>(j)];
        if (node.weights.size() != l.input_dim)
            throw dimension_error("layer_forward: node weight length mismatch");
        weights.col(j) = node.weights;
        bias(j) = node.bias;
    }

    Matrix out = inputs * weights;
    out.rowwise() += bias;
    const auto kind = l.activation;
    return out.unaryExpr([kind](double z) { return activate(kind, z); });
}

/// Runs `layers` in cascade starting from `inputs` (the input of the first
/// layer in the span) and concatenates every layer's output column-wise.
inline Matrix cascade_hidden(std::span<const layer> layers, const Matrix& inputs)
{
    Eigen::Index total = 0;
    for (const auto& l : layers)
        total += l.size();

    Matrix joint(inputs.rows(), total);
    Matrix current = inputs;
    Eigen::Index offset = 0;
    for (const auto& l : layers) {
        Matrix out = layer_forward(current, l);
        joint.middleCols(offset, l.size()) = out;
        offset += l.size();
        current = std::move(out);
    }
    return joint;
}

inline Matrix full_hidden_matrix(const deep_scn_model& model, const Matrix& X)
{
    if (X.cols() != model.input_dim)
        throw dimension_error("full_hidden_matrix: inputs have " + std::to_string(X.cols()) +
                              " columns, model expects " + std::to_string(model.input_dim));
    return cascade_hidden(model.layers, X);
}

inline Matrix predict(const deep_scn_model& model, const Matrix& X)
{
    const Matrix hidden = full_hidden_matrix(model, X);
    if (hidden.cols() == 0)
        return Matrix::Zero(X.rows(), model.output_dim);
    if (model.readout.rows() != hidden.cols() || model.readout.cols() != model.output_dim)
        throw dimension_error("predict: readout shape does not match the layer stack");
    return hidden * model.readout;
}

} // namespace dscn
