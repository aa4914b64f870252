#pragma once

#include "dscn/errors.hpp"
#include "dscn/linalg.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dscn {

/// sqrt of the mean squared error pooled over all N x m entries.
inline double rmse(const Matrix& pred, const Matrix& actual)
{
    if (pred.rows() != actual.rows() || pred.cols() != actual.cols())
        throw dimension_error("rmse: shape mismatch");
    if (pred.size() == 0)
        throw invalid_input("rmse: empty operands");
    return std::sqrt((pred - actual).squaredNorm() / static_cast<double>(pred.size()));
}

/// Percentage of predictions whose absolute error is strictly below threshold.
inline double ppa(std::span<const double> pred, std::span<const double> actual,
                  double threshold = 10.0)
{
    if (pred.size() != actual.size())
        throw dimension_error("ppa: length mismatch");
    if (pred.empty())
        throw invalid_input("ppa: no samples");
    if (!(threshold > 0.0))
        throw invalid_input("ppa: threshold must be > 0");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (std::abs(pred[i] - actual[i]) < threshold)
            ++hits;
    return 100.0 * static_cast<double>(hits) / static_cast<double>(pred.size());
}

inline double ppa(const Vector& pred, const Vector& actual, double threshold = 10.0)
{
    return ppa(std::span<const double>(pred.data(), static_cast<std::size_t>(pred.size())),
               std::span<const double>(actual.data(), static_cast<std::size_t>(actual.size())),
               threshold);
}

/// rank(H) / node_count.
inline double rank_deficiency_ratio(const Matrix& H, Eigen::Index node_count,
                                    rank_tolerance tol = auto_tolerance)
{
    if (node_count < 1)
        throw invalid_input("rank_deficiency_ratio: node_count must be >= 1");
    if (H.cols() != node_count)
        throw dimension_error("rank_deficiency_ratio: H has " + std::to_string(H.cols()) +
                              " columns, expected " + std::to_string(node_count));
    return static_cast<double>(numerical_rank(H, tol)) / static_cast<double>(node_count);
}

struct curve_point {
    std::size_t node_count = 0;
    double train_rmse = 0.0;
    double test_rmse = 0.0;
};

struct rank_point {
    std::size_t node_count = 0;
    double p = 0.0;
};

/// max over the trace of (test_rmse - train_rmse).
inline double consistency_gap(std::span<const curve_point> trace)
{
    if (trace.empty())
        throw invalid_input("consistency_gap: empty trace");
    double gap = trace.front().test_rmse - trace.front().train_rmse;
    for (const auto& pt : trace)
        gap = std::max(gap, pt.test_rmse - pt.train_rmse);
    return gap;
}

struct eval_report {
    double rmse_train = 0.0;
    std::optional<double> rmse_test;
    std::optional<double> ppa_train;
    std::optional<double> ppa_test;
    std::vector<curve_point> residual_trace;
    std::vector<rank_point> rank_ratio_trace;
};

inline nlohmann::json to_json(const eval_report& r)
{
    nlohmann::json doc{{"rmse_train", r.rmse_train}};
    if (r.rmse_test)
        doc["rmse_test"] = *r.rmse_test;
    if (r.ppa_train)
        doc["ppa_train"] = *r.ppa_train;
    if (r.ppa_test)
        doc["ppa_test"] = *r.ppa_test;
    if (!r.residual_trace.empty()) {
        auto& arr = doc["residual_trace"] = nlohmann::json::array();
        for (const auto& pt : r.residual_trace)
            arr.push_back({{"node_count", pt.node_count},
                           {"train_rmse", pt.train_rmse},
                           {"test_rmse", pt.test_rmse}});
    }
    if (!r.rank_ratio_trace.empty()) {
        auto& arr = doc["rank_ratio_trace"] = nlohmann::json::array();
        for (const auto& pt : r.rank_ratio_trace)
            arr.push_back({{"node_count", pt.node_count}, {"p", pt.p}});
    }
    return doc;
}

} // namespace dscn
