#pragma once

// Subcommands behind the dscn executable. Each returns a process exit code
// and writes human-facing messages to `err`, machine-readable output to `out`.

#include "dscn/builder.hpp"
#include "dscn/config.hpp"
#include "dscn/data.hpp"
#include "dscn/errors.hpp"
#include "dscn/experiment.hpp"
#include "dscn/glyphs.hpp"
#include "dscn/metrics.hpp"
#include "dscn/model_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

namespace dscn::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failure = 1;
inline constexpr int exit_io = 2;
inline constexpr int exit_dimension = 3;
inline constexpr int exit_usage = 4;

namespace detail {

template <class F>
int guarded(std::ostream& err, F&& body)
{
    try {
        return body();
    } catch (const io_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const parse_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const version_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_io;
    } catch (const dimension_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_dimension;
    } catch (const config_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const invalid_input& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failure;
    }
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw io_error("cannot open '" + path + "' for writing");
    out << text;
    if (!out)
        throw io_error("failed writing '" + path + "'");
}

} // namespace detail

struct train_options {
    std::optional<std::uint64_t> seed; // overrides the config's seed
    refit_mode refit = refit_mode::full;
    unsigned threads = 1;
};

/// Build report written next to the model as `<out>.report.json`.
inline nlohmann::json build_report(const build_result& r, double final_train_rmse)
{
    nlohmann::json doc;
    doc["final_train_rmse"] = final_train_rmse;
    doc["node_count"] = r.model.node_count();
    auto& per_layer = doc["nodes_per_layer"] = nlohmann::json::array();
    for (const auto& l : r.model.layers)
        per_layer.push_back(l.size());
    doc["stop_reason"] = std::string(to_string(r.stopped));
    doc["warnings"] = r.warnings;
    if (r.model.node_count() == 0)
        doc["note"] = "0 nodes";
    auto& trace = doc["residual_trace"] = nlohmann::json::array();
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const auto& rec = r.trace[i];
        nlohmann::json row{{"node_count", i + 1},       {"layer", rec.layer_index + 1},
                           {"lambda", rec.lambda},      {"r", rec.r},
                           {"trials", rec.trials},      {"residual_norm", rec.residual_after}};
        if (rec.train_rmse)
            row["train_rmse"] = *rec.train_rmse;
        if (rec.validation_rmse)
            row["validation_rmse"] = *rec.validation_rmse;
        trace.push_back(std::move(row));
    }
    return doc;
}

inline int cmd_train(const std::string& config_path, const std::string& data_path,
                     const std::string& out_path, const train_options& opts, std::ostream& out,
                     std::ostream& err)
{
    return detail::guarded(err, [&] {
        auto config = load_config(config_path);
        if (opts.seed)
            config.seed = *opts.seed;
        const auto data = load_csv(data_path);
        build_options bo;
        bo.refit = opts.refit;
        bo.threads = opts.threads;
        const auto result = build(data, config, bo);
        const double final_rmse = rmse(predict(result.model, data.inputs), data.targets);

        save_model(result.model, out_path);
        const auto report = build_report(result, final_rmse);
        detail::write_text(out_path + ".report.json", report.dump(1) + "\n");
        for (const auto& w : result.warnings)
            err << "warning: " << w << '\n';
        out << nlohmann::json{{"model", out_path},
                              {"node_count", result.model.node_count()},
                              {"final_train_rmse", final_rmse},
                              {"stop_reason", std::string(to_string(result.stopped))}}
                   .dump()
            << '\n';
        return exit_ok;
    });
}

inline int cmd_eval(const std::string& model_path, const std::string& data_path,
                    std::optional<double> ppa_threshold, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        const auto model = load_model(model_path);
        const auto data = load_csv(data_path);
        if (ppa_threshold && model.output_dim != 1) {
            err << "error: ppa requires scalar target\n";
            return exit_usage;
        }
        if (data.input_dim() != model.input_dim || data.output_dim() != model.output_dim)
            throw dimension_error("model expects d=" + std::to_string(model.input_dim) +
                                  ", m=" + std::to_string(model.output_dim) + " but '" +
                                  data_path + "' has d=" + std::to_string(data.input_dim()) +
                                  ", m=" + std::to_string(data.output_dim()));
        const Matrix pred = predict(model, data.inputs);
        nlohmann::json doc{{"samples", data.size()}, {"rmse", rmse(pred, data.targets)}};
        if (ppa_threshold) {
            doc["ppa_threshold"] = *ppa_threshold;
            doc["ppa"] = ppa(Vector(pred.col(0)), Vector(data.targets.col(0)), *ppa_threshold);
        }
        out << doc.dump() << '\n';
        return exit_ok;
    });
}

inline int cmd_experiment(const std::string& spec_path, const std::string& out_dir,
                          std::optional<unsigned> threads, std::ostream& out, std::ostream& err)
{
    return detail::guarded(err, [&] {
        auto spec = load_experiment(spec_path);
        if (threads)
            spec.threads = *threads;
        const auto files = run_experiment(spec, out_dir);
        for (const auto& f : files)
            out << f << '\n';
        return exit_ok;
    });
}

struct gen_options {
    std::string kind = "benchmark"; // benchmark | glyphs
    Eigen::Index n = 1000;
    std::uint64_t seed = 0;
    double lo = 0.0;
    double hi = 1.0;
    double distortion = 1.5;
};

inline int cmd_gen_data(const gen_options& g, const std::string& out_path, std::ostream& err)
{
    return detail::guarded(err, [&] {
        if (g.kind == "benchmark")
            save_csv(gen_benchmark(g.n, g.seed, g.lo, g.hi), out_path);
        else if (g.kind == "glyphs")
            save_csv(gen_rotated_glyphs(g.n, g.seed, g.distortion).data, out_path);
        else
            throw invalid_input("gen-data: unknown generator '" + g.kind +
                                "' (expected benchmark or glyphs)");
        return exit_ok;
    });
}

/// Parses the command line and dispatches to a subcommand.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deep stochastic configuration networks: build, evaluate, run experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_path;
    std::string out_path;
    std::string model_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> ppa_threshold;
    std::string refit = "full";
    std::optional<unsigned> threads;
    gen_options gen;

    auto* train = app.add_subcommand("train", "build a model from a config and a CSV dataset");
    train->add_option("--config", config_path, "build configuration (JSON)")->required();
    train->add_option("--data", data_path, "training data (CSV)")->required();
    train->add_option("--out", out_path, "model output path")->required();
    train->add_option("--seed", seed, "override the configuration seed");
    train->add_option("--refit", refit, "readout refit strategy")
        ->check(CLI::IsMember({"full", "incremental"}));
    train->add_option("--threads", threads, "candidate evaluation threads")
        ->check(CLI::PositiveNumber);

    auto* eval = app.add_subcommand("eval", "score a saved model on a CSV dataset");
    eval->add_option("--model", model_path, "saved model")->required();
    eval->add_option("--data", data_path, "evaluation data (CSV)")->required();
    eval->add_option("--ppa-threshold", ppa_threshold, "report PPA at this error margin")
        ->check(CLI::PositiveNumber);

    auto* experiment = app.add_subcommand("experiment", "run an experiment protocol");
    experiment->add_option("--config", config_path, "experiment spec (JSON)")->required();
    experiment->add_option("--out", out_path, "output directory")->required();
    experiment->add_option("--threads", threads, "candidate evaluation threads")
        ->check(CLI::PositiveNumber);

    auto* gen_data = app.add_subcommand("gen-data", "write a synthetic dataset as CSV");
    gen_data->add_option("kind", gen.kind, "benchmark or glyphs")
        ->required()
        ->check(CLI::IsMember({"benchmark", "glyphs"}));
    gen_data->add_option("--out", out_path, "CSV output path")->required();
    gen_data->add_option("--n", gen.n, "number of samples")->check(CLI::PositiveNumber);
    gen_data->add_option("--seed", gen.seed, "generator seed");
    gen_data->add_option("--lo", gen.lo, "benchmark: lower end of the input range");
    gen_data->add_option("--hi", gen.hi, "benchmark: upper end of the input range");
    gen_data->add_option("--distortion", gen.distortion, "glyphs: handwriting distortion scale")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? exit_ok : exit_usage;
    }

    if (*train) {
        train_options opts;
        opts.seed = seed;
        opts.refit = refit == "incremental" ? refit_mode::incremental : refit_mode::full;
        opts.threads = threads.value_or(1);
        return cmd_train(config_path, data_path, out_path, opts, out, err);
    }
    if (*eval)
        return cmd_eval(model_path, data_path, ppa_threshold, out, err);
    if (*experiment)
        return cmd_experiment(config_path, out_path, threads, out, err);
    if (*gen_data)
        return cmd_gen_data(gen, out_path, err);
    return exit_usage;
}

} // namespace dscn::cli
