#pragma once

// Stochastic configuration engine.
//
// Hidden nodes are added one at a time (or in batches). Each new node is
// drawn at random from [-lambda, lambda] and kept only if its output vector h
// passes the supervisory test against the current training residual E:
//
//     theta_q = <E_q, h>^2 / <h, h> - (1 - r) <E_q, E_q>     (q = 1..m)
//
// Strict mode requires min_q theta_q >= 0, relaxed mode sum_q theta_q >= 0.
// For each scope lambda (outer) and contraction r (middle) up to t_max
// candidates are drawn; the first (lambda, r) pair with a non-empty feasible
// pool supplies the candidate with the largest summed theta. After every
// acceptance the readout over all hidden nodes of all layers is refit by
// least squares. When a layer is full the next layer takes the previous
// layer's outputs as its inputs and the residual carries over unchanged.

#include "dscn/config.hpp"
#include "dscn/data.hpp"
#include "dscn/errors.hpp"
#include "dscn/linalg.hpp"
#include "dscn/model.hpp"
#include "dscn/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

namespace dscn {

enum class refit_mode {
    full,       ///< least-squares refactorization of H after every acceptance
    incremental ///< Gram-Schmidt deflation of E; readout solved once at the end
};

struct candidate_score {
    Vector theta_per_output;
    double theta_sum = 0.0;
    bool feasible = false;
};

struct node_record {
    std::size_t layer_index = 0; // 0-based
    std::size_t node_index = 0;  // 0-based position within the layer
    double lambda = 0.0;
    double r = 0.0;
    std::size_t trials = 0; // candidates drawn while configuring this node
    double theta_sum = 0.0;
    double residual_before = 0.0; // ||E||_F
    double residual_after = 0.0;
    std::size_t batch = 1; // nodes accepted in the same refit
    std::optional<double> train_rmse;
    std::optional<double> monitor_rmse;
    std::optional<double> validation_rmse;

    friend bool operator==(const node_record&, const node_record&) = default;
};

struct node_candidate {
    hidden_node node;
    Vector h; // node output over the current layer inputs
    candidate_score score;
    double lambda = 0.0;
    double r = 0.0;
    std::size_t trial = 0;
    std::size_t trials_used = 0;
};

struct stall_signal {
    std::size_t trials_used = 0;
};

struct builder_state {
    Matrix targets;  // T
    Matrix residual; // E = T - P_H T, the least-squares residual over span(H)
    Matrix hidden;   // first hidden_cols columns form H
    Eigen::Index hidden_cols = 0;
    Matrix readout;       // beta = H^+ T
    bool readout_current = true;
    std::vector<layer> layers; // back() is the layer being grown
    Matrix layer_inputs;       // inputs of layers.back()
    std::vector<node_record> trace;
    refit_mode refit = refit_mode::full;
    orthogonal_basis basis{0};

    auto joint_hidden() const { return hidden.leftCols(hidden_cols); }
    layer& current_layer() { return layers.back(); }
    const layer& current_layer() const { return layers.back(); }
    std::size_t layer_index() const noexcept { return layers.size() - 1; }
    double residual_norm() const { return residual.norm(); }
};

inline builder_state make_state(const dataset& train, refit_mode refit = refit_mode::full,
                                Eigen::Index capacity = 0)
{
    validate(train);
    if (train.size() < 1)
        throw invalid_input("builder: empty training set");
    builder_state s;
    s.targets = train.targets;
    s.residual = train.targets;
    s.hidden.resize(train.size(), std::max<Eigen::Index>(capacity, 1));
    s.readout.resize(0, train.output_dim());
    s.layers.push_back(layer{{}, activation_kind::sigmoid, train.input_dim()});
    s.layer_inputs = train.inputs;
    s.refit = refit;
    s.basis = orthogonal_basis(train.size(), capacity);
    return s;
}

// ---------------------------------------------------------------------------
// Candidate sampling and scoring
// ---------------------------------------------------------------------------

/// Weights then bias, each uniform on [-lambda, lambda].
inline hidden_node sample_candidate(random_stream& rng, double lambda, Eigen::Index input_dim)
{
    if (!(lambda > 0.0))
        throw config_error("sample_candidate: lambda must be > 0");
    if (input_dim < 1)
        throw config_error("sample_candidate: input_dim must be >= 1");
    hidden_node node;
    node.weights.resize(input_dim);
    for (Eigen::Index i = 0; i < input_dim; ++i)
        node.weights(i) = rng.uniform(-lambda, lambda);
    node.bias = rng.uniform(-lambda, lambda);
    return node;
}

template <typename ResidualT>
candidate_score score_candidate(const Eigen::MatrixBase<ResidualT>& E, const Vector& h, double r,
                                constraint_mode mode)
{
    if (E.rows() != h.size())
        throw dimension_error("score_candidate: residual and hidden vector lengths differ");
    const double hh = h.squaredNorm();
    if (!(hh > 0.0))
        throw degenerate_candidate("score_candidate: hidden vector has zero norm");

    candidate_score s;
    const Vector proj = E.transpose() * h;
    s.theta_per_output =
        proj.array().square() / hh - (1.0 - r) * E.colwise().squaredNorm().transpose().array();
    s.theta_sum = s.theta_per_output.sum();
    s.feasible = mode == constraint_mode::strict ? (s.theta_per_output.minCoeff() >= 0.0)
                                                 : (s.theta_sum >= 0.0);
    return s;
}

namespace detail {

// Candidates are evaluated in fixed-size chunks so the arithmetic for a
// given trial never depends on how trials are spread over threads.
inline constexpr std::size_t candidate_chunk = 16;

struct trial_result {
    hidden_node node;
    Vector h;
    candidate_score score;
    bool valid = false;
};

inline void evaluate_chunk(const builder_state& state, const builder_config& config,
                           std::size_t layer_index, std::size_t node_index,
                           std::size_t lambda_index, std::size_t r_index, std::size_t begin,
                           std::size_t end, std::vector<trial_result>& out)
{
    const double lambda = config.lambda_set[lambda_index];
    const double r = config.r_set[r_index];
    const auto d_in = state.layer_inputs.cols();
    const auto count = static_cast<Eigen::Index>(end - begin);

    Matrix weights(d_in, count);
    Eigen::RowVectorXd bias(count);
    std::vector<hidden_node> nodes;
    nodes.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
        random_stream rng(config.seed, {layer_index, node_index, lambda_index, r_index, k});
        nodes.push_back(sample_candidate(rng, lambda, d_in));
        weights.col(static_cast<Eigen::Index>(k - begin)) = nodes.back().weights;
        bias(static_cast<Eigen::Index>(k - begin)) = nodes.back().bias;
    }

    Matrix z = state.layer_inputs * weights;
    z.rowwise() += bias;
    const auto kind = state.current_layer().activation;
    z = z.unaryExpr([kind](double v) { return activate(kind, v); });

    for (std::size_t k = begin; k < end; ++k) {
        auto& res = out[k];
        Vector h = z.col(static_cast<Eigen::Index>(k - begin));
        try {
            res.score = score_candidate(state.residual, h, r, config.mode);
        } catch (const degenerate_candidate&) {
            continue;
        }
        res.valid = true;
        if (res.score.feasible) {
            res.node = std::move(nodes[k - begin]);
            res.h = std::move(h);
        }
    }
}

} // namespace detail

/// Descending theta_sum; equal scores keep ascending trial order.
inline void rank_candidates(std::vector<node_candidate>& pool)
{
    std::stable_sort(pool.begin(), pool.end(), [](const node_candidate& a, const node_candidate& b) {
        if (a.score.theta_sum != b.score.theta_sum)
            return a.score.theta_sum > b.score.theta_sum;
        return a.trial < b.trial;
    });
}

/// Feasible candidates of the first (lambda, r) pair that has any, ordered
/// by descending theta_sum then ascending trial index. Empty when every pair
/// was exhausted.
struct candidate_pool {
    std::vector<node_candidate> feasible;
    std::size_t trials_used = 0;
};

inline candidate_pool find_feasible_pool(const builder_state& state, const builder_config& config,
                                         std::size_t layer_index, std::size_t node_index,
                                         unsigned threads = 1)
{
    candidate_pool pool;
    const std::size_t t_max = config.t_max;
    const std::size_t chunks = (t_max + detail::candidate_chunk - 1) / detail::candidate_chunk;
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(chunks)));

    std::vector<detail::trial_result> results(t_max);
    for (std::size_t li = 0; li < config.lambda_set.size(); ++li) {
        for (std::size_t ri = 0; ri < config.r_set.size(); ++ri) {
            std::fill(results.begin(), results.end(), detail::trial_result{});
            auto run_chunks = [&](std::size_t first_chunk, std::size_t stride) {
                for (std::size_t c = first_chunk; c < chunks; c += stride) {
                    const std::size_t begin = c * detail::candidate_chunk;
                    const std::size_t end = std::min(t_max, begin + detail::candidate_chunk);
                    detail::evaluate_chunk(state, config, layer_index, node_index, li, ri, begin,
                                           end, results);
                }
            };
            if (workers == 1) {
                run_chunks(0, 1);
            } else {
                std::vector<std::jthread> pool_threads;
                for (unsigned w = 0; w < workers; ++w)
                    pool_threads.emplace_back(run_chunks, w, workers);
            }
            pool.trials_used += t_max;

            for (std::size_t k = 0; k < t_max; ++k) {
                auto& res = results[k];
                if (!res.valid || !res.score.feasible)
                    continue;
                node_candidate cand;
                cand.node = std::move(res.node);
                cand.h = std::move(res.h);
                cand.score = std::move(res.score);
                cand.lambda = config.lambda_set[li];
                cand.r = config.r_set[ri];
                cand.trial = k;
                pool.feasible.push_back(std::move(cand));
            }
            if (!pool.feasible.empty()) {
                rank_candidates(pool.feasible);
                for (auto& c : pool.feasible)
                    c.trials_used = pool.trials_used;
                return pool;
            }
        }
    }
    return pool;
}

inline std::variant<node_candidate, stall_signal>
configure_node(const builder_state& state, const builder_config& config, std::size_t layer_index,
               std::size_t node_index, unsigned threads = 1)
{
    auto pool = find_feasible_pool(state, config, layer_index, node_index, threads);
    if (pool.feasible.empty())
        return stall_signal{pool.trials_used};
    return std::move(pool.feasible.front());
}

inline std::variant<node_candidate, stall_signal>
configure_node(const builder_state& state, const builder_config& config, unsigned threads = 1)
{
    return configure_node(state, config, state.layer_index(),
                          static_cast<std::size_t>(state.current_layer().size()), threads);
}

// ---------------------------------------------------------------------------
// Acceptance and refit
// ---------------------------------------------------------------------------

namespace detail {

inline void deflate(Matrix& residual, const Vector& q)
{
    const Eigen::RowVectorXd coeff = q.transpose() * residual;
    residual.noalias() -= q * coeff;
}

} // namespace detail

inline void solve_readout(builder_state& state)
{
    if (state.hidden_cols == 0)
        state.readout.resize(0, state.targets.cols());
    else
        state.readout = least_squares(state.joint_hidden(), state.targets);
    state.readout_current = true;
}

/// Training RMSE achieved by the current readout.
inline double readout_rmse(const builder_state& state)
{
    if (state.hidden_cols == 0)
        return std::sqrt(state.targets.squaredNorm() / static_cast<double>(state.targets.size()));
    return std::sqrt((state.targets - state.joint_hidden() * state.readout).squaredNorm() /
                     static_cast<double>(state.targets.size()));
}

/// Rebuilds the orthonormal basis of span(H) and the residual from scratch,
/// then solves the readout.
inline void refit(builder_state& state)
{
    state.basis = orthogonal_basis(state.hidden.rows(), state.hidden.cols());
    state.residual = state.targets;
    for (Eigen::Index j = 0; j < state.hidden_cols; ++j)
        if (auto q = state.basis.append(state.hidden.col(j)))
            detail::deflate(state.residual, *q);
    solve_readout(state);
}

/// Appends every candidate to the current layer and H, then refits once.
inline void accept_nodes(builder_state& state, std::vector<node_candidate> candidates)
{
    if (candidates.empty())
        return;
    const double before = state.residual_norm();
    const auto first_col = state.hidden_cols;

    for (const auto& c : candidates) {
        if (c.h.size() != state.hidden.rows())
            throw dimension_error("accept_node: hidden vector length mismatch");
        if (c.node.weights.size() != state.current_layer().input_dim)
            throw dimension_error("accept_node: node input dimension mismatch");
        if (state.hidden_cols == state.hidden.cols())
            state.hidden.conservativeResize(Eigen::NoChange, 2 * state.hidden.cols());
        state.hidden.col(state.hidden_cols++) = c.h;
    }

    if (state.refit == refit_mode::full) {
        refit(state);
    } else {
        for (Eigen::Index j = first_col; j < state.hidden_cols; ++j)
            if (auto q = state.basis.append(state.hidden.col(j)))
                detail::deflate(state.residual, *q);
        state.readout_current = false;
    }

    const double after = state.residual_norm();
    const std::size_t layer_index = state.layer_index();
    std::optional<double> train_rmse;
    if (state.readout_current)
        train_rmse = readout_rmse(state);
    for (auto& c : candidates) {
        node_record rec;
        rec.layer_index = layer_index;
        rec.node_index = static_cast<std::size_t>(state.current_layer().size());
        rec.lambda = c.lambda;
        rec.r = c.r;
        rec.trials = c.trials_used;
        rec.theta_sum = c.score.theta_sum;
        rec.residual_before = before;
        rec.residual_after = after;
        rec.batch = candidates.size();
        rec.train_rmse = train_rmse;
        state.current_layer().nodes.push_back(std::move(c.node));
        state.trace.push_back(rec);
    }
}

inline void accept_node(builder_state& state, node_candidate candidate)
{
    std::vector<node_candidate> one;
    one.push_back(std::move(candidate));
    accept_nodes(state, std::move(one));
}

/// Freezes the current layer: its outputs become the next layer's inputs.
/// The residual is carried over untouched.
inline void advance_layer(builder_state& state)
{
    const auto size = state.current_layer().size();
    if (size == 0)
        throw invalid_input("advance_layer: current layer has no nodes");
    state.layer_inputs = state.hidden.middleCols(state.hidden_cols - size, size);
    state.layers.push_back(layer{{}, state.current_layer().activation, size});
}

/// One configuration round accepting up to `max_nodes` feasible candidates
/// (at most batch_size) followed by a single refit. Returns the number of
/// accepted nodes; 0 means the round stalled.
inline std::size_t build_batch_round(builder_state& state, const builder_config& config,
                                     std::size_t max_nodes, unsigned threads = 1)
{
    const std::size_t cap = std::min(config.batch_size, max_nodes);
    if (cap == 0)
        return 0;
    if (cap == 1) {
        auto result = configure_node(state, config, threads);
        if (std::holds_alternative<stall_signal>(result))
            return 0;
        accept_node(state, std::get<node_candidate>(std::move(result)));
        return 1;
    }
    auto pool = find_feasible_pool(state, config, state.layer_index(),
                                   static_cast<std::size_t>(state.current_layer().size()), threads);
    if (pool.feasible.empty())
        return 0;
    if (pool.feasible.size() > cap)
        pool.feasible.resize(cap);
    const std::size_t accepted = pool.feasible.size();
    accept_nodes(state, std::move(pool.feasible));
    return accepted;
}

inline std::size_t build_batch_round(builder_state& state, const builder_config& config)
{
    return build_batch_round(state, config, config.batch_size);
}

// ---------------------------------------------------------------------------
// Full build
// ---------------------------------------------------------------------------

enum class stop_reason { tolerance, max_layers, stall, validation_patience };

inline std::string_view to_string(stop_reason r)
{
    switch (r) {
    case stop_reason::tolerance:
        return "tolerance";
    case stop_reason::max_layers:
        return "max_layers";
    case stop_reason::stall:
        return "stall";
    case stop_reason::validation_patience:
        return "validation_patience";
    }
    return "unknown";
}

struct build_options {
    refit_mode refit = refit_mode::full;
    unsigned threads = 1;
    /// Held-out data scored after every acceptance (monitor_rmse in the trace).
    const dataset* monitor = nullptr;
    /// Called after every acceptance event with the updated state.
    std::function<void(const builder_state&)> on_accept;
};

struct build_result {
    deep_scn_model model;
    std::vector<node_record> trace;
    stop_reason stopped = stop_reason::max_layers;
    std::vector<std::string> warnings;
    std::size_t monotone_violations = 0;
    std::size_t decay_violations = 0;
};

inline constexpr double monotone_tolerance = 1e-10;
inline constexpr double decay_tolerance = 1e-9;

namespace detail {

// Hidden outputs of an auxiliary data set, grown alongside the build.
struct tracked_set {
    const dataset* data = nullptr;
    Matrix layer_inputs;
    Matrix hidden;
    Eigen::Index cols = 0;
    Eigen::Index layer_start = 0;

    tracked_set(const dataset& d, Eigen::Index capacity)
        : data(&d)
        , layer_inputs(d.inputs)
        , hidden(d.size(), std::max<Eigen::Index>(capacity, 1))
    {}

    void add(const hidden_node& node, activation_kind kind)
    {
        Vector z = layer_inputs * node.weights;
        z.array() += node.bias;
        if (cols == hidden.cols())
            hidden.conservativeResize(Eigen::NoChange, 2 * hidden.cols());
        hidden.col(cols++) = z.unaryExpr([kind](double v) { return activate(kind, v); });
    }

    void advance()
    {
        layer_inputs = hidden.middleCols(layer_start, cols - layer_start);
        layer_start = cols;
    }

    double rmse(const Matrix& readout) const
    {
        const Matrix err = hidden.leftCols(cols) * readout - data->targets;
        return std::sqrt(err.squaredNorm() / static_cast<double>(err.size()));
    }
};

} // namespace detail

inline deep_scn_model to_model(const builder_state& state, const builder_config& config)
{
    deep_scn_model model;
    for (const auto& l : state.layers)
        if (l.size() > 0)
            model.layers.push_back(l);
    model.input_dim = state.layers.front().input_dim;
    model.output_dim = state.targets.cols();
    model.readout = state.readout;
    model.metadata.seed = config.seed;
    model.metadata.config = config_to_json(config);
    for (const auto& rec : state.trace)
        model.metadata.residual_trace.push_back(rec.residual_after);
    return model;
}

inline build_result build(const dataset& data, const builder_config& config,
                          const build_options& options = {})
{
    validate(config);
    validate(data);
    if (data.size() < 1)
        throw invalid_input("build: empty dataset");

    dataset train_part;
    dataset validation_part;
    const dataset* train = &data;
    if (config.validation) {
        auto [val, tr] = split(data, config.validation->fraction, derive_seed(config.seed, {0x7a1d}));
        if (tr.size() < 1)
            throw invalid_input("build: validation split leaves no training rows");
        validation_part = std::move(val);
        train_part = std::move(tr);
        train = &train_part;
    }

    const auto capacity = static_cast<Eigen::Index>(config.total_capacity());
    builder_state state = make_state(*train, options.refit, capacity);
    build_result result;

    std::optional<detail::tracked_set> monitor;
    if (options.monitor) {
        validate(*options.monitor);
        if (options.monitor->input_dim() != data.input_dim() ||
            options.monitor->output_dim() != data.output_dim())
            throw dimension_error("build: monitor set shape differs from training set");
        monitor.emplace(*options.monitor, capacity);
    }
    std::optional<detail::tracked_set> held_out;
    if (config.validation)
        held_out.emplace(validation_part, capacity);

    const bool need_readout = monitor.has_value() || held_out.has_value();
    double best_validation = std::numeric_limits<double>::infinity();
    std::size_t since_improvement = 0;

    auto after_accept = [&](std::size_t first_record) {
        const auto& l = state.current_layer();
        for (std::size_t i = first_record; i < state.trace.size(); ++i) {
            const auto& node = l.nodes[state.trace[i].node_index];
            if (monitor)
                monitor->add(node, l.activation);
            if (held_out)
                held_out->add(node, l.activation);
        }
        if (need_readout && !state.readout_current) {
            solve_readout(state);
            const double train_rmse = readout_rmse(state);
            for (std::size_t i = first_record; i < state.trace.size(); ++i)
                state.trace[i].train_rmse = train_rmse;
        }

        const auto& last = state.trace.back();
        if (last.residual_after > last.residual_before + monotone_tolerance)
            ++result.monotone_violations;
        if (last.batch == 1 && last.residual_after * last.residual_after >
                                   last.r * last.residual_before * last.residual_before +
                                       decay_tolerance)
            ++result.decay_violations;

        bool improved = false;
        for (std::size_t i = first_record; i < state.trace.size(); ++i) {
            if (monitor)
                state.trace[i].monitor_rmse = monitor->rmse(state.readout);
            if (held_out) {
                const double v = held_out->rmse(state.readout);
                state.trace[i].validation_rmse = v;
                if (v < best_validation) {
                    best_validation = v;
                    improved = true;
                }
            }
        }
        if (held_out)
            since_improvement = improved ? 0 : since_improvement + 1;
        if (options.on_accept)
            options.on_accept(state);
    };

    bool done = false;
    if (!(state.residual_norm() > config.epsilon)) {
        result.stopped = stop_reason::tolerance;
        done = true;
    }

    for (std::size_t n = 0; n < config.max_layers && !done; ++n) {
        if (n > 0) {
            advance_layer(state);
            if (monitor)
                monitor->advance();
            if (held_out)
                held_out->advance();
        }
        const auto limit = config.max_nodes_per_layer[n];
        bool stalled = false;
        while (static_cast<std::size_t>(state.current_layer().size()) < limit &&
               state.residual_norm() > config.epsilon) {
            const std::size_t first_record = state.trace.size();
            const auto room = limit - static_cast<std::size_t>(state.current_layer().size());
            if (build_batch_round(state, config, room, options.threads) == 0) {
                stalled = true;
                break;
            }
            after_accept(first_record);
            if (held_out && since_improvement >= config.validation->patience) {
                result.stopped = stop_reason::validation_patience;
                done = true;
                break;
            }
        }
        if (done)
            break;
        if (!(state.residual_norm() > config.epsilon)) {
            result.stopped = stop_reason::tolerance;
            break;
        }
        if (stalled && state.current_layer().size() == 0) {
            result.stopped = stop_reason::stall;
            result.warnings.push_back("configuration stalled in layer " + std::to_string(n + 1) +
                                      " before any node was accepted");
            break;
        }
        if (stalled && n + 1 == config.max_layers)
            result.stopped = stop_reason::stall;
    }

    if (state.hidden_cols == 0)
        result.warnings.push_back("model has 0 nodes");
    if (!state.readout_current)
        solve_readout(state);

    result.model = to_model(state, config);
    result.trace = state.trace;
    return result;
}

} // namespace dscn
