#pragma once

// Builder configuration and its strict JSON document form.

#include "dscn/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dscn {

enum class constraint_mode {
    strict, ///< every per-output score must be nonnegative
    relaxed ///< only the summed score must be nonnegative
};

struct validation_config {
    double fraction = 0.2;
    std::size_t patience = 10;

    friend bool operator==(const validation_config&, const validation_config&) = default;
};

/// r_k = 1 - 10^-k for k = 1..count.
inline std::vector<double> default_r_set(int count = 7)
{
    std::vector<double> r;
    for (int k = 1; k <= count; ++k)
        r.push_back(1.0 - std::pow(10.0, -k));
    return r;
}

struct builder_config {
    std::size_t max_layers = 1;
    std::vector<std::size_t> max_nodes_per_layer{100};
    double epsilon = 0.0;
    std::size_t t_max = 100;
    std::vector<double> lambda_set{0.5, 1, 5, 10, 30, 50, 100, 150, 200, 250};
    std::vector<double> r_set = default_r_set();
    constraint_mode mode = constraint_mode::strict;
    std::size_t batch_size = 1;
    std::uint64_t seed = 0;
    std::optional<validation_config> validation;

    std::size_t total_capacity() const noexcept
    {
        std::size_t total = 0;
        for (const auto n : max_nodes_per_layer)
            total += n;
        return total;
    }

    friend bool operator==(const builder_config&, const builder_config&) = default;
};

inline void validate(const builder_config& c)
{
    if (c.max_layers < 1)
        throw config_error("max_layers must be >= 1");
    if (c.max_nodes_per_layer.size() != c.max_layers)
        throw config_error("max_nodes_per_layer must list one entry per layer (" +
                           std::to_string(c.max_layers) + ")");
    for (const auto n : c.max_nodes_per_layer)
        if (n < 1)
            throw config_error("max_nodes_per_layer entries must be >= 1");
    if (!(c.epsilon >= 0.0) || !std::isfinite(c.epsilon))
        throw config_error("epsilon must be a finite nonnegative number");
    if (c.t_max < 1)
        throw config_error("t_max must be >= 1");
    if (c.lambda_set.empty())
        throw config_error("lambda_set must not be empty");
    for (std::size_t i = 0; i < c.lambda_set.size(); ++i) {
        if (!(c.lambda_set[i] > 0.0) || !std::isfinite(c.lambda_set[i]))
            throw config_error("lambda_set entries must be finite and > 0");
        if (i > 0 && c.lambda_set[i] < c.lambda_set[i - 1])
            throw config_error("lambda_set must be ascending");
    }
    if (c.r_set.empty())
        throw config_error("r_set must not be empty");
    for (std::size_t i = 0; i < c.r_set.size(); ++i) {
        if (!(c.r_set[i] > 0.0 && c.r_set[i] < 1.0))
            throw config_error("r_set entries must lie in (0, 1)");
        if (i > 0 && c.r_set[i] < c.r_set[i - 1])
            throw config_error("r_set must be ascending");
    }
    if (c.batch_size < 1)
        throw config_error("batch_size must be >= 1");
    if (c.validation) {
        if (!(c.validation->fraction > 0.0 && c.validation->fraction < 1.0))
            throw config_error("validation.fraction must lie in (0, 1)");
        if (c.validation->patience < 1)
            throw config_error("validation.patience must be >= 1");
    }
}

namespace detail {

inline std::size_t config_count(const nlohmann::json& v, const char* key)
{
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw config_error(std::string(key) + " must be a nonnegative integer");
    return static_cast<std::size_t>(v.get<std::int64_t>());
}

inline double config_real(const nlohmann::json& v, const char* key)
{
    if (!v.is_number())
        throw config_error(std::string(key) + " must be a number");
    return v.get<double>();
}

inline std::vector<double> config_reals(const nlohmann::json& v, const char* key)
{
    if (!v.is_array())
        throw config_error(std::string(key) + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v)
        out.push_back(config_real(e, key));
    return out;
}

} // namespace detail

inline builder_config config_from_json(const nlohmann::json& doc)
{
    using detail::config_count;
    using detail::config_real;

    if (!doc.is_object())
        throw config_error("build configuration must be a JSON object");
    static const std::set<std::string> known{
        "max_layers", "max_nodes_per_layer", "epsilon",    "t_max", "lambda_set",
        "r_set",      "constraint_mode",     "batch_size", "seed",  "validation"};
    for (const auto& [key, _] : doc.items())
        if (!known.contains(key))
            throw config_error("unknown configuration key '" + key + "'");

    builder_config c;
    if (doc.contains("max_layers"))
        c.max_layers = config_count(doc["max_layers"], "max_layers");
    if (doc.contains("max_nodes_per_layer")) {
        const auto& v = doc["max_nodes_per_layer"];
        c.max_nodes_per_layer.clear();
        if (v.is_array()) {
            for (const auto& e : v)
                c.max_nodes_per_layer.push_back(config_count(e, "max_nodes_per_layer"));
        } else {
            c.max_nodes_per_layer.assign(c.max_layers, config_count(v, "max_nodes_per_layer"));
        }
    } else {
        c.max_nodes_per_layer.assign(c.max_layers, c.max_nodes_per_layer.front());
    }
    if (doc.contains("epsilon"))
        c.epsilon = config_real(doc["epsilon"], "epsilon");
    if (doc.contains("t_max"))
        c.t_max = config_count(doc["t_max"], "t_max");
    if (doc.contains("lambda_set"))
        c.lambda_set = detail::config_reals(doc["lambda_set"], "lambda_set");
    if (doc.contains("r_set"))
        c.r_set = detail::config_reals(doc["r_set"], "r_set");
    if (doc.contains("constraint_mode")) {
        const auto& v = doc["constraint_mode"];
        if (v == "strict")
            c.mode = constraint_mode::strict;
        else if (v == "relaxed")
            c.mode = constraint_mode::relaxed;
        else
            throw config_error("constraint_mode must be \"strict\" or \"relaxed\"");
    }
    if (doc.contains("batch_size"))
        c.batch_size = config_count(doc["batch_size"], "batch_size");
    if (doc.contains("seed")) {
        const auto& v = doc["seed"];
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw config_error("seed must be a nonnegative integer");
        c.seed = v.get<std::uint64_t>();
    }
    if (doc.contains("validation") && !doc["validation"].is_null()) {
        const auto& v = doc["validation"];
        if (!v.is_object())
            throw config_error("validation must be an object {fraction, patience}");
        for (const auto& [key, _] : v.items())
            if (key != "fraction" && key != "patience")
                throw config_error("unknown validation key '" + key + "'");
        validation_config val;
        if (v.contains("fraction"))
            val.fraction = config_real(v["fraction"], "validation.fraction");
        if (v.contains("patience"))
            val.patience = config_count(v["patience"], "validation.patience");
        c.validation = val;
    }
    validate(c);
    return c;
}

inline nlohmann::json config_to_json(const builder_config& c)
{
    nlohmann::json doc{
        {"max_layers", c.max_layers},
        {"max_nodes_per_layer", c.max_nodes_per_layer},
        {"epsilon", c.epsilon},
        {"t_max", c.t_max},
        {"lambda_set", c.lambda_set},
        {"r_set", c.r_set},
        {"constraint_mode", c.mode == constraint_mode::strict ? "strict" : "relaxed"},
        {"batch_size", c.batch_size},
        {"seed", c.seed},
    };
    if (c.validation)
        doc["validation"] = {{"fraction", c.validation->fraction},
                             {"patience", c.validation->patience}};
    return doc;
}

inline builder_config load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("'" + path + "': " + e.what());
    }
    return config_from_json(doc);
}

} // namespace dscn
