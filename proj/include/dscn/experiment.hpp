#pragma once

// Experiment protocols on the 1-D benchmark (learning curves, rank ratio,
// r-set robustness) and on the rotated-glyph set (angle regression).
//
// Every randomness source is derived from the spec's seed list. Output files
// are plain numeric CSV except the two-row case-study table.

#include "dscn/builder.hpp"
#include "dscn/config.hpp"
#include "dscn/data.hpp"
#include "dscn/errors.hpp"
#include "dscn/glyphs.hpp"
#include "dscn/metrics.hpp"
#include "dscn/model.hpp"
#include "dscn/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace dscn {

enum class experiment_kind { fig2, fig3, fig4, casestudy };

inline std::string_view to_string(experiment_kind k)
{
    switch (k) {
    case experiment_kind::fig2:
        return "fig2";
    case experiment_kind::fig3:
        return "fig3";
    case experiment_kind::fig4:
        return "fig4";
    case experiment_kind::casestudy:
        return "casestudy";
    }
    return "unknown";
}

struct experiment_spec {
    experiment_kind kind = experiment_kind::fig2;
    std::vector<std::uint64_t> seeds{1, 2, 3};
    Eigen::Index n_train = 1000;
    Eigen::Index n_test = 1000;
    nlohmann::json scn = nlohmann::json::object();     // merge-patch over the defaults
    nlohmann::json deepscn = nlohmann::json::object();
    refit_mode refit = refit_mode::full;
    unsigned threads = 1;
    std::optional<std::uint64_t> data_seed; // fig4
    double distortion = 1.5;                // casestudy
    std::size_t image_samples = 16;          // casestudy
    double ppa_threshold = 10.0;             // casestudy

    std::size_t trials() const noexcept { return seeds.size(); }
};

/// Builder defaults for each protocol. model is "scn" or "deepscn".
inline builder_config default_builder(experiment_kind kind, std::string_view model)
{
    builder_config c;
    const bool deep = model == "deepscn";
    switch (kind) {
    case experiment_kind::fig2:
        c.t_max = 50;
        c.max_layers = deep ? 4 : 1;
        c.max_nodes_per_layer.assign(c.max_layers, deep ? 50 : 200);
        break;
    case experiment_kind::fig3:
    case experiment_kind::fig4:
        c.t_max = 50;
        c.max_layers = deep ? 4 : 1;
        c.max_nodes_per_layer.assign(c.max_layers, deep ? 25 : 100);
        break;
    case experiment_kind::casestudy:
        c.t_max = 20;
        c.max_layers = deep ? 4 : 1;
        c.max_nodes_per_layer.assign(c.max_layers, deep ? 250 : 1000);
        break;
    }
    return c;
}

inline builder_config resolve_builder(const experiment_spec& spec, std::string_view model,
                                      std::uint64_t seed)
{
    builder_config c = default_builder(spec.kind, model);
    const auto& patch = model == "deepscn" ? spec.deepscn : spec.scn;
    if (!patch.empty()) {
        nlohmann::json doc = config_to_json(c);
        if (patch.contains("max_layers") && !patch.contains("max_nodes_per_layer"))
            doc["max_nodes_per_layer"] = c.max_nodes_per_layer.front();
        doc.merge_patch(patch);
        c = config_from_json(doc);
    }
    c.seed = seed;
    return c;
}

inline experiment_spec experiment_from_json(const nlohmann::json& doc)
{
    if (!doc.is_object())
        throw config_error("experiment spec must be a JSON object");
    static const std::set<std::string> known{
        "name",    "trials",    "seeds",      "n_train",       "n_test",
        "scn",     "deepscn",   "refit",      "threads",       "data_seed",
        "distortion", "image_samples", "ppa_threshold"};
    for (const auto& [key, _] : doc.items())
        if (!known.contains(key))
            throw config_error("unknown experiment key '" + key + "'");

    experiment_spec s;
    if (!doc.contains("name") || !doc["name"].is_string())
        throw config_error("experiment spec needs a string 'name'");
    const auto name = doc["name"].get<std::string>();
    if (name == "fig2")
        s.kind = experiment_kind::fig2;
    else if (name == "fig3")
        s.kind = experiment_kind::fig3;
    else if (name == "fig4")
        s.kind = experiment_kind::fig4;
    else if (name == "casestudy")
        s.kind = experiment_kind::casestudy;
    else
        throw config_error("unknown experiment name '" + name + "'");

    if (s.kind == experiment_kind::casestudy) {
        s.n_train = 2000;
        s.n_test = 2000;
        s.refit = refit_mode::incremental;
    }

    auto count = [](const nlohmann::json& v, const char* key) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
            throw config_error(std::string(key) + " must be a positive integer");
        return v.get<std::int64_t>();
    };
    auto seed_value = [](const nlohmann::json& v) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
            throw config_error("seeds must be nonnegative integers");
        return v.get<std::uint64_t>();
    };

    if (doc.contains("seeds")) {
        if (!doc["seeds"].is_array() || doc["seeds"].empty())
            throw config_error("seeds must be a non-empty array");
        s.seeds.clear();
        for (const auto& v : doc["seeds"])
            s.seeds.push_back(seed_value(v));
    } else if (doc.contains("trials")) {
        s.seeds.clear();
        const auto t = count(doc["trials"], "trials");
        for (std::int64_t i = 1; i <= t; ++i)
            s.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (doc.contains("trials") &&
        static_cast<std::size_t>(count(doc["trials"], "trials")) != s.seeds.size())
        throw config_error("trials must equal the number of seeds");

    if (doc.contains("n_train"))
        s.n_train = count(doc["n_train"], "n_train");
    if (doc.contains("n_test"))
        s.n_test = count(doc["n_test"], "n_test");
    for (const char* key : {"scn", "deepscn"}) {
        if (!doc.contains(key))
            continue;
        if (!doc[key].is_object())
            throw config_error(std::string(key) + " must be an object of builder settings");
        (key == std::string_view("scn") ? s.scn : s.deepscn) = doc[key];
    }
    if (doc.contains("refit")) {
        if (doc["refit"] == "full")
            s.refit = refit_mode::full;
        else if (doc["refit"] == "incremental")
            s.refit = refit_mode::incremental;
        else
            throw config_error("refit must be \"full\" or \"incremental\"");
    }
    if (doc.contains("threads"))
        s.threads = static_cast<unsigned>(count(doc["threads"], "threads"));
    if (doc.contains("data_seed"))
        s.data_seed = seed_value(doc["data_seed"]);
    if (doc.contains("distortion")) {
        if (!doc["distortion"].is_number() || doc["distortion"].get<double>() < 0.0)
            throw config_error("distortion must be a nonnegative number");
        s.distortion = doc["distortion"].get<double>();
    }
    if (doc.contains("image_samples")) {
        const auto& v = doc["image_samples"];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw config_error("image_samples must be a nonnegative integer");
        s.image_samples = static_cast<std::size_t>(v.get<std::int64_t>());
    }
    if (doc.contains("ppa_threshold")) {
        if (!doc["ppa_threshold"].is_number() || !(doc["ppa_threshold"].get<double>() > 0.0))
            throw config_error("ppa_threshold must be a positive number");
        s.ppa_threshold = doc["ppa_threshold"].get<double>();
    }

    for (const char* model : {"scn", "deepscn"})
        resolve_builder(s, model, 0);
    return s;
}

inline experiment_spec load_experiment(const std::string& path)
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
    return experiment_from_json(doc);
}

// ---------------------------------------------------------------------------
// Output helpers
// ---------------------------------------------------------------------------

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

namespace detail {

inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& name,
                                         const table& t, std::vector<std::string>& written)
{
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path.string() + "' for writing");
    for (std::size_t j = 0; j < t.header.size(); ++j)
        out << (j ? "," : "") << t.header[j];
    out << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j)
            out << (j ? "," : "") << format_double(row[j]);
        out << '\n';
    }
    if (!out)
        throw io_error("failed writing '" + path.string() + "'");
    written.push_back(name);
    return path;
}

inline std::pair<dataset, dataset> benchmark_pair(const experiment_spec& spec, std::uint64_t seed)
{
    return {gen_benchmark(spec.n_train, derive_seed(seed, {1})),
            gen_benchmark(spec.n_test, derive_seed(seed, {2}))};
}

inline double model_rmse(const deep_scn_model& m, const dataset& d)
{
    return rmse(predict(m, d.inputs), d.targets);
}

inline std::vector<curve_point> learning_curve(const build_result& r)
{
    std::vector<curve_point> curve;
    for (std::size_t i = 0; i < r.trace.size(); ++i)
        curve.push_back({i + 1, r.trace[i].train_rmse.value_or(0.0),
                         r.trace[i].monitor_rmse.value_or(0.0)});
    return curve;
}

inline table curve_table(const std::vector<curve_point>& curve)
{
    table t{{"node_count", "train_rmse", "test_rmse"}, {}};
    for (const auto& p : curve)
        t.rows.push_back({static_cast<double>(p.node_count), p.train_rmse, p.test_rmse});
    return t;
}

inline void ensure_dir(const std::filesystem::path& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw io_error("cannot create output directory '" + dir.string() + "'");
}

} // namespace detail

// ---------------------------------------------------------------------------
// Learning curves
// ---------------------------------------------------------------------------

/// Runtime invariant tallies summed over the builds of one trial.
struct build_checks {
    std::size_t events = 0;
    std::size_t monotone_violations = 0;
    std::size_t decay_violations = 0;

    void add(const build_result& r)
    {
        events += r.trace.size();
        monotone_violations += r.monotone_violations;
        decay_violations += r.decay_violations;
    }
};

struct curve_trial {
    std::uint64_t seed = 0;
    std::vector<curve_point> scn;
    std::vector<curve_point> deepscn;
    double scn_final_train = 0.0;
    double scn_final_test = 0.0;
    double deepscn_final_train = 0.0;
    double deepscn_final_test = 0.0;
    std::size_t transition_node = 0; // nodes in DeepSCN's first layer; 0 if no second layer
    double transition_rmse = std::numeric_limits<double>::quiet_NaN();
    double transition_plus10_rmse = std::numeric_limits<double>::quiet_NaN();
    build_checks checks;
};

struct fig2_result {
    std::vector<curve_trial> trials;
    std::vector<std::string> files;
};

namespace detail {

inline void fill_transition(curve_trial& t, const build_result& deep)
{
    for (std::size_t i = 0; i < deep.trace.size(); ++i) {
        if (deep.trace[i].layer_index == 0)
            continue;
        if (i == 0)
            break;
        t.transition_node = i;
        t.transition_rmse = t.deepscn[i - 1].train_rmse;
        if (i + 9 < t.deepscn.size())
            t.transition_plus10_rmse = t.deepscn[i + 9].train_rmse;
        break;
    }
}

inline curve_trial run_curve_trial(const experiment_spec& spec, const dataset& train,
                                   const dataset& test, const builder_config& scn_cfg,
                                   const builder_config& deep_cfg, std::uint64_t seed)
{
    build_options opt;
    opt.refit = spec.refit;
    opt.threads = spec.threads;
    opt.monitor = &test;

    curve_trial t;
    t.seed = seed;
    const auto scn = build(train, scn_cfg, opt);
    const auto deep = build(train, deep_cfg, opt);
    t.scn = learning_curve(scn);
    t.deepscn = learning_curve(deep);
    t.scn_final_train = model_rmse(scn.model, train);
    t.scn_final_test = model_rmse(scn.model, test);
    t.deepscn_final_train = model_rmse(deep.model, train);
    t.deepscn_final_test = model_rmse(deep.model, test);
    fill_transition(t, deep);
    t.checks.add(scn);
    t.checks.add(deep);
    return t;
}

inline std::vector<double> summary_row(std::size_t index, const curve_trial& t)
{
    return {static_cast<double>(index),
            static_cast<double>(t.seed),
            static_cast<double>(t.scn.size()),
            t.scn_final_train,
            t.scn_final_test,
            static_cast<double>(t.deepscn.size()),
            t.deepscn_final_train,
            t.deepscn_final_test,
            static_cast<double>(t.transition_node),
            t.transition_rmse,
            t.transition_plus10_rmse};
}

inline const std::vector<std::string> curve_summary_header{
    "trial",          "seed",           "scn_nodes",
    "scn_train_rmse", "scn_test_rmse",  "deepscn_nodes",
    "deepscn_train_rmse", "deepscn_test_rmse", "transition_node",
    "transition_rmse", "transition_plus10_rmse"};

} // namespace detail

inline fig2_result run_fig2(const experiment_spec& spec, const std::filesystem::path& out_dir)
{
    detail::ensure_dir(out_dir);
    fig2_result res;
    table summary{detail::curve_summary_header, {}};
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const auto seed = spec.seeds[i];
        const auto [train, test] = detail::benchmark_pair(spec, seed);
        auto t = detail::run_curve_trial(spec, train, test, resolve_builder(spec, "scn", seed),
                                         resolve_builder(spec, "deepscn", seed), seed);
        const auto idx = std::to_string(i + 1);
        detail::write_table(out_dir, "fig2_scn_trial" + idx + ".csv", detail::curve_table(t.scn),
                            res.files);
        detail::write_table(out_dir, "fig2_deepscn_trial" + idx + ".csv",
                            detail::curve_table(t.deepscn), res.files);
        summary.rows.push_back(detail::summary_row(i + 1, t));
        res.trials.push_back(std::move(t));
    }
    detail::write_table(out_dir, "fig2_summary.csv", summary, res.files);
    return res;
}

// ---------------------------------------------------------------------------
// Rank-deficiency ratio
// ---------------------------------------------------------------------------

struct rank_trial {
    std::uint64_t seed = 0;
    std::vector<rank_point> scn;
    std::vector<rank_point> deepscn;
    build_checks checks;
};

struct fig3_result {
    std::vector<rank_trial> trials;
    std::vector<std::string> files;
};

/// p(K) after every acceptance of a build.
inline std::vector<rank_point> rank_curve(const dataset& train, const builder_config& cfg,
                                          const build_options& base, build_checks* checks = nullptr)
{
    std::vector<rank_point> curve;
    build_options opt = base;
    opt.on_accept = [&curve](const builder_state& s) {
        curve.push_back({static_cast<std::size_t>(s.hidden_cols),
                         rank_deficiency_ratio(s.joint_hidden(), s.hidden_cols)});
    };
    const auto result = build(train, cfg, opt);
    if (checks)
        checks->add(result);
    return curve;
}

/// p at node count k, or at the last point when the build stopped short.
inline rank_point rank_at(const std::vector<rank_point>& curve, std::size_t k)
{
    if (curve.empty())
        throw invalid_input("rank_at: empty curve");
    for (const auto& p : curve)
        if (p.node_count == k)
            return p;
    return curve.back().node_count < k ? curve.back() : curve.front();
}

inline fig3_result run_fig3(const experiment_spec& spec, const std::filesystem::path& out_dir)
{
    detail::ensure_dir(out_dir);
    fig3_result res;
    table summary{{"trial", "seed", "scn_nodes", "scn_p", "deepscn_nodes", "deepscn_p"}, {}};
    build_options opt;
    opt.refit = spec.refit;
    opt.threads = spec.threads;
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const auto seed = spec.seeds[i];
        const auto train = detail::benchmark_pair(spec, seed).first;
        rank_trial t;
        t.seed = seed;
        const auto scn_cfg = resolve_builder(spec, "scn", seed);
        const auto deep_cfg = resolve_builder(spec, "deepscn", seed);
        t.scn = rank_curve(train, scn_cfg, opt, &t.checks);
        t.deepscn = rank_curve(train, deep_cfg, opt, &t.checks);

        const auto idx = std::to_string(i + 1);
        for (const auto& [name, curve] : {std::pair{"scn", &t.scn}, std::pair{"deepscn", &t.deepscn}}) {
            table tab{{"node_count", "p"}, {}};
            for (const auto& p : *curve)
                tab.rows.push_back({static_cast<double>(p.node_count), p.p});
            detail::write_table(out_dir, std::string("fig3_") + name + "_trial" + idx + ".csv", tab,
                                res.files);
        }
        const auto target = std::min(scn_cfg.total_capacity(), deep_cfg.total_capacity());
        const auto ps = t.scn.empty() ? rank_point{} : rank_at(t.scn, target);
        const auto pd = t.deepscn.empty() ? rank_point{} : rank_at(t.deepscn, target);
        summary.rows.push_back({static_cast<double>(i + 1), static_cast<double>(seed),
                                static_cast<double>(ps.node_count), ps.p,
                                static_cast<double>(pd.node_count), pd.p});
        res.trials.push_back(std::move(t));
    }
    detail::write_table(out_dir, "fig3_summary.csv", summary, res.files);
    return res;
}

// ---------------------------------------------------------------------------
// Robustness to the r schedule
// ---------------------------------------------------------------------------

/// Ten ascending draws from the open interval (0.9, 0.99), then 1 - 1e-6.
inline std::vector<double> draw_r_set(std::uint64_t seed)
{
    random_stream rng(seed, {0x4e57});
    std::vector<double> r;
    while (r.size() < 10) {
        const double v = rng.uniform(0.9, 0.99);
        if (v > 0.9)
            r.push_back(v);
    }
    std::sort(r.begin(), r.end());
    r.push_back(1.0 - 1e-6);
    return r;
}

struct fig4_result {
    std::vector<std::vector<double>> r_sets;
    std::vector<curve_trial> draws;
    std::vector<std::string> files;
};

inline fig4_result run_fig4(const experiment_spec& spec, const std::filesystem::path& out_dir)
{
    detail::ensure_dir(out_dir);
    fig4_result res;
    const auto data_seed = spec.data_seed.value_or(spec.seeds.front());
    const auto [train, test] = detail::benchmark_pair(spec, data_seed);

    table rsets{{"draw", "seed"}, {}};
    for (int k = 1; k <= 11; ++k)
        rsets.header.push_back("r" + std::to_string(k));
    table summary{detail::curve_summary_header, {}};
    summary.header[0] = "draw";

    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const auto r_set = draw_r_set(spec.seeds[i]);
        auto scn_cfg = resolve_builder(spec, "scn", spec.seeds[i]);
        auto deep_cfg = resolve_builder(spec, "deepscn", spec.seeds[i]);
        scn_cfg.r_set = r_set;
        deep_cfg.r_set = r_set;
        auto t = detail::run_curve_trial(spec, train, test, scn_cfg, deep_cfg, spec.seeds[i]);

        const auto idx = std::to_string(i + 1);
        detail::write_table(out_dir, "fig4_scn_draw" + idx + ".csv", detail::curve_table(t.scn),
                            res.files);
        detail::write_table(out_dir, "fig4_deepscn_draw" + idx + ".csv",
                            detail::curve_table(t.deepscn), res.files);
        std::vector<double> row{static_cast<double>(i + 1), static_cast<double>(spec.seeds[i])};
        row.insert(row.end(), r_set.begin(), r_set.end());
        rsets.rows.push_back(std::move(row));
        summary.rows.push_back(detail::summary_row(i + 1, t));
        res.r_sets.push_back(r_set);
        res.draws.push_back(std::move(t));
    }
    detail::write_table(out_dir, "fig4_rsets.csv", rsets, res.files);
    detail::write_table(out_dir, "fig4_summary.csv", summary, res.files);
    return res;
}

// ---------------------------------------------------------------------------
// Glyph rotation case study
// ---------------------------------------------------------------------------

struct case_metrics {
    double ppa_train = 0.0;
    double ppa_test = 0.0;
    double rmse_train = 0.0;
    double rmse_test = 0.0;
};

struct box_summary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// Five-number summary; quartiles by linear interpolation between order
/// statistics.
inline box_summary summarize(std::vector<double> values)
{
    if (values.empty())
        return {};
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, values.size() - 1);
        return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
    };
    return {values.front(), quantile(0.25), quantile(0.5), quantile(0.75), values.back(),
            values.size()};
}

struct case_trial {
    std::uint64_t seed = 0;
    case_metrics scn;
    case_metrics deepscn;
    std::vector<box_summary> scn_residuals;     // per class, test set
    std::vector<box_summary> deepscn_residuals;
    build_checks checks;
};

struct casestudy_result {
    std::vector<case_trial> trials;
    std::vector<std::string> files;
};

namespace detail {

inline case_metrics score_angles(const Matrix& pred_train, const dataset& train,
                                 const Matrix& pred_test, const dataset& test, double threshold)
{
    return {ppa(Vector(pred_train.col(0)), Vector(train.targets.col(0)), threshold),
            ppa(Vector(pred_test.col(0)), Vector(test.targets.col(0)), threshold),
            rmse(pred_train, train.targets), rmse(pred_test, test.targets)};
}

inline std::vector<box_summary> class_residuals(const Matrix& pred, const glyph_dataset& test)
{
    std::vector<std::vector<double>> by_class(glyph_classes);
    for (Eigen::Index i = 0; i < test.data.size(); ++i)
        by_class[static_cast<std::size_t>(test.classes[static_cast<std::size_t>(i)])].push_back(
            pred(i, 0) - test.data.targets(i, 0));
    std::vector<box_summary> out;
    for (auto& v : by_class)
        out.push_back(summarize(std::move(v)));
    return out;
}

inline table image_table(const glyph_dataset& test, const Matrix* pred, std::size_t samples)
{
    table t{{"sample", "class", "angle"}, {}};
    if (pred)
        t.header.push_back("predicted");
    for (Eigen::Index j = 0; j < glyph_pixels; ++j)
        t.header.push_back("p" + std::to_string(j + 1));
    const auto n = std::min<std::size_t>(samples, static_cast<std::size_t>(test.data.size()));
    for (std::size_t s = 0; s < n; ++s) {
        const auto i = static_cast<Eigen::Index>(s);
        std::vector<double> row{static_cast<double>(s + 1),
                                static_cast<double>(test.classes[s]), test.data.targets(i, 0)};
        Eigen::RowVectorXd pixels = test.data.inputs.row(i);
        if (pred) {
            row.push_back((*pred)(i, 0));
            pixels = flatten_image(rotate_image(unflatten_image(pixels), -(*pred)(i, 0)));
        }
        row.insert(row.end(), pixels.data(), pixels.data() + pixels.size());
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace detail

inline casestudy_result run_casestudy(const experiment_spec& spec,
                                      const std::filesystem::path& out_dir)
{
    detail::ensure_dir(out_dir);
    casestudy_result res;
    build_options opt;
    opt.refit = spec.refit;
    opt.threads = spec.threads;

    const std::vector<std::string> metric_header{"trial",      "seed",      "ppa_train",
                                                 "ppa_test",   "rmse_train", "rmse_test"};
    const std::vector<std::string> box_header{"trial", "class", "min", "q1",
                                              "median", "q3",   "max", "count"};
    table metrics[2]{{metric_header, {}}, {metric_header, {}}};
    table boxes[2]{{box_header, {}}, {box_header, {}}};
    const char* names[2]{"scn", "deepscn"};

    for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
        const auto seed = spec.seeds[i];
        const auto train = gen_rotated_glyphs(spec.n_train, derive_seed(seed, {1}), spec.distortion);
        const auto test = gen_rotated_glyphs(spec.n_test, derive_seed(seed, {2}), spec.distortion);
        case_trial t;
        t.seed = seed;
        for (int k = 0; k < 2; ++k) {
            const auto r = build(train.data, resolve_builder(spec, names[k], seed), opt);
            t.checks.add(r);
            const Matrix pred_train = predict(r.model, train.data.inputs);
            const Matrix pred_test = predict(r.model, test.data.inputs);
            const auto m = detail::score_angles(pred_train, train.data, pred_test, test.data,
                                                spec.ppa_threshold);
            const auto box = detail::class_residuals(pred_test, test);
            (k == 0 ? t.scn : t.deepscn) = m;
            (k == 0 ? t.scn_residuals : t.deepscn_residuals) = box;

            metrics[k].rows.push_back({static_cast<double>(i + 1), static_cast<double>(seed),
                                       m.ppa_train, m.ppa_test, m.rmse_train, m.rmse_test});
            for (std::size_t c = 0; c < box.size(); ++c)
                boxes[k].rows.push_back({static_cast<double>(i + 1), static_cast<double>(c),
                                         box[c].min, box[c].q1, box[c].median, box[c].q3,
                                         box[c].max, static_cast<double>(box[c].count)});
            if (i == 0 && spec.image_samples > 0) {
                if (k == 0)
                    detail::write_table(out_dir, "casestudy_images_original.csv",
                                        detail::image_table(test, nullptr, spec.image_samples),
                                        res.files);
                detail::write_table(out_dir, std::string("casestudy_images_") + names[k] + ".csv",
                                    detail::image_table(test, &pred_test, spec.image_samples),
                                    res.files);
            }
        }
        res.trials.push_back(std::move(t));
    }

    for (int k = 0; k < 2; ++k) {
        detail::write_table(out_dir, std::string("casestudy_metrics_") + names[k] + ".csv",
                            metrics[k], res.files);
        detail::write_table(out_dir, std::string("casestudy_residuals_") + names[k] + ".csv",
                            boxes[k], res.files);
    }

    // Trial averages, one row per model: 0 = SCN, 1 = DeepSCN.
    table summary{{"model", "ppa_train", "ppa_test", "rmse_train", "rmse_test"}, {}};
    for (int k = 0; k < 2; ++k) {
        case_metrics mean;
        for (const auto& t : res.trials) {
            const auto& m = k == 0 ? t.scn : t.deepscn;
            mean.ppa_train += m.ppa_train;
            mean.ppa_test += m.ppa_test;
            mean.rmse_train += m.rmse_train;
            mean.rmse_test += m.rmse_test;
        }
        const auto n = static_cast<double>(res.trials.size());
        summary.rows.push_back({static_cast<double>(k), mean.ppa_train / n, mean.ppa_test / n,
                                mean.rmse_train / n, mean.rmse_test / n});
    }
    detail::write_table(out_dir, "casestudy_summary.csv", summary, res.files);
    return res;
}

/// Runs the protocol named by the spec; returns the file names written.
inline std::vector<std::string> run_experiment(const experiment_spec& spec,
                                               const std::filesystem::path& out_dir)
{
    switch (spec.kind) {
    case experiment_kind::fig2:
        return run_fig2(spec, out_dir).files;
    case experiment_kind::fig3:
        return run_fig3(spec, out_dir).files;
    case experiment_kind::fig4:
        return run_fig4(spec, out_dir).files;
    case experiment_kind::casestudy:
        return run_casestudy(spec, out_dir).files;
    }
    throw config_error("unknown experiment");
}

} // namespace dscn
