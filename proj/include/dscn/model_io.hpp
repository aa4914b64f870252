#pragma once

// JSON model document:
//   {format_version: 1, input_dim, output_dim, activation,
//    layers: [[{weights: [...], bias}, ...], ...],
//    readout: [[...], ...]   (row-major, one row per hidden node),
//    metadata: {seed, config, residual_trace}}

#include "dscn/errors.hpp"
#include "dscn/model.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

namespace dscn {

inline constexpr int model_format_version = 1;

inline nlohmann::json model_to_json(const deep_scn_model& model)
{
    using nlohmann::json;
    json layers = json::array();
    for (const auto& l : model.layers) {
        json nodes = json::array();
        for (const auto& node : l.nodes) {
            json weights = json::array();
            for (Eigen::Index i = 0; i < node.weights.size(); ++i)
                weights.push_back(node.weights(i));
            nodes.push_back({{"weights", std::move(weights)}, {"bias", node.bias}});
        }
        layers.push_back(std::move(nodes));
    }

    json readout = json::array();
    for (Eigen::Index i = 0; i < model.readout.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < model.readout.cols(); ++j)
            row.push_back(model.readout(i, j));
        readout.push_back(std::move(row));
    }

    const auto activation = model.layers.empty() ? activation_kind::sigmoid
                                                 : model.layers.front().activation;
    return {
        {"format_version", model_format_version},
        {"input_dim", model.input_dim},
        {"output_dim", model.output_dim},
        {"activation", std::string(to_string(activation))},
        {"layers", std::move(layers)},
        {"readout", std::move(readout)},
        {"metadata",
         {{"seed", model.metadata.seed},
          {"config", model.metadata.config},
          {"residual_trace", model.metadata.residual_trace}}},
    };
}

inline std::string serialize(const deep_scn_model& model)
{
    return model_to_json(model).dump(1) + "\n";
}

namespace detail {

inline const nlohmann::json& require_key(const nlohmann::json& obj, const char* key)
{
    if (!obj.is_object() || !obj.contains(key))
        throw parse_error(std::string("model document: missing field '") + key + "'");
    return obj.at(key);
}

inline double require_number(const nlohmann::json& v, const char* what)
{
    if (!v.is_number())
        throw parse_error(std::string("model document: ") + what + " must be a number");
    return v.get<double>();
}

inline Eigen::Index require_count(const nlohmann::json& v, const char* what)
{
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw parse_error(std::string("model document: ") + what +
                          " must be a nonnegative integer");
    return static_cast<Eigen::Index>(v.get<std::int64_t>());
}

inline std::size_t line_of_offset(const std::string& text, std::size_t offset)
{
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(
                   std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

} // namespace detail

inline deep_scn_model model_from_json(const nlohmann::json& doc)
{
    using detail::require_count;
    using detail::require_key;
    using detail::require_number;

    const auto& version = require_key(doc, "format_version");
    if (!version.is_number_integer())
        throw parse_error("model document: format_version must be an integer");
    if (version.get<int>() != model_format_version)
        throw version_error("model document: unsupported format_version " +
                            std::to_string(version.get<int>()) + " (expected " +
                            std::to_string(model_format_version) + ")");

    deep_scn_model model;
    model.input_dim = require_count(require_key(doc, "input_dim"), "input_dim");
    model.output_dim = require_count(require_key(doc, "output_dim"), "output_dim");

    const auto& act = require_key(doc, "activation");
    if (!act.is_string())
        throw parse_error("model document: activation must be a string");
    activation_kind kind;
    try {
        kind = activation_from_string(act.get<std::string>());
    } catch (const invalid_input& e) {
        throw parse_error(std::string("model document: ") + e.what());
    }

    const auto& layers = require_key(doc, "layers");
    if (!layers.is_array())
        throw parse_error("model document: layers must be an array");
    Eigen::Index input_dim = model.input_dim;
    for (const auto& jl : layers) {
        if (!jl.is_array() || jl.empty())
            throw parse_error("model document: each layer must be a non-empty array of nodes");
        layer l;
        l.activation = kind;
        l.input_dim = input_dim;
        for (const auto& jn : jl) {
            const auto& jw = require_key(jn, "weights");
            if (!jw.is_array() || static_cast<Eigen::Index>(jw.size()) != input_dim)
                throw parse_error("model document: node weight count must equal layer input_dim " +
                                  std::to_string(input_dim));
            hidden_node node;
            node.weights.resize(input_dim);
            for (Eigen::Index i = 0; i < input_dim; ++i)
                node.weights(i) = require_number(jw[static_cast<std::size_t>(i)], "weight");
            node.bias = require_number(require_key(jn, "bias"), "bias");
            l.nodes.push_back(std::move(node));
        }
        input_dim = l.size();
        model.layers.push_back(std::move(l));
    }

    const auto& jr = require_key(doc, "readout");
    if (!jr.is_array() || static_cast<Eigen::Index>(jr.size()) != model.node_count())
        throw parse_error("model document: readout must have one row per hidden node (" +
                          std::to_string(model.node_count()) + ")");
    model.readout.resize(model.node_count(), model.output_dim);
    for (Eigen::Index i = 0; i < model.readout.rows(); ++i) {
        const auto& row = jr[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != model.output_dim)
            throw parse_error("model document: readout row " + std::to_string(i) +
                              " must have output_dim entries");
        for (Eigen::Index j = 0; j < model.output_dim; ++j)
            model.readout(i, j) = require_number(row[static_cast<std::size_t>(j)], "readout entry");
    }

    const auto& meta = require_key(doc, "metadata");
    const auto& seed = require_key(meta, "seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
        throw parse_error("model document: metadata.seed must be an integer");
    model.metadata.seed = seed.get<std::uint64_t>();
    model.metadata.config = require_key(meta, "config");
    const auto& trace = require_key(meta, "residual_trace");
    if (!trace.is_array())
        throw parse_error("model document: metadata.residual_trace must be an array");
    for (const auto& v : trace)
        model.metadata.residual_trace.push_back(require_number(v, "residual_trace entry"));

    if (!all_finite(model.readout))
        throw parse_error("model document: non-finite readout entry");
    return model;
}

inline deep_scn_model deserialize(const std::string& text)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw parse_error(std::string("model document: ") + e.what(),
                          detail::line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1));
    }
    return model_from_json(doc);
}

inline void save_model(const deep_scn_model& model, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    out << serialize(model);
    if (!out)
        throw io_error("failed writing '" + path + "'");
}

inline deep_scn_model load_model(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize(buf.str());
}

} // namespace dscn
