#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "cobra/aggregation.hpp"
#include "cobra/dataset.hpp"
#include "cobra/machines.hpp"

namespace cobra {

/// One tunable parameter and its candidate values. Candidates are kept in
/// ascending order so ties resolve toward the smallest value. A data-driven
/// grid (epsilon over the prediction spread, alpha over 1..M) is resolved
/// when the search runs.
struct GridSpec {
    std::string parameter;           // lambda, epsilon, alpha, bandwidth, mix-alpha
    std::vector<double> candidates;  // empty when data_dependent
    bool data_dependent = false;
    std::size_t count = 100;         // resolution of a data-dependent grid

    /// Parses "lambda=log:1e-3:1e3:50", "epsilon=lin:0.1:2:100",
    /// "alpha=list:1,2,3" or "epsilon=auto:100" / "alpha=auto".
    static GridSpec parse(const std::string& text);
    static std::vector<double> log_range(double lo, double hi, std::size_t count);
    static std::vector<double> linear_range(double lo, double hi, std::size_t count);

    void validate() const;
};

std::vector<GridSpec> default_grids(EstimatorKind kind);

struct TuneCandidate {
    std::map<std::string, double> params;
    double mean_loss = 0.0;
    double std_loss = 0.0;
    bool feasible = true;
    std::size_t no_consensus = 0;  // validation points left unanswered
    std::size_t evaluated = 0;     // validation points attempted
};

struct TuneResult {
    std::map<std::string, double> best;
    double best_loss = 0.0;
    std::vector<TuneCandidate> table;
    int folds = 0;
    std::uint64_t seed = 0;
    std::string loss_name;  // "rmse" or "misclassification"
};

/// Seeded k-fold grid search. Every fold refits the machines on its own
/// training half, so one pass prices each candidate on data it never saw.
/// Candidates failing consensus on more than half their validation points
/// are marked infeasible and never selected.
TuneResult grid_search(EstimatorKind kind, const AggregatorConfig& base,
                       const std::vector<MachineSpec>& machine_specs,
                       const std::vector<GridSpec>& grids, const Dataset& data, int folds,
                       std::uint64_t seed);

/// Applies tuned parameter values onto a config copy.
AggregatorConfig apply_params(const AggregatorConfig& base,
                              const std::map<std::string, double>& params);

// --- estimator comparison ----------------------------------------------------

struct NamedPredictor {
    std::string name;
    std::function<double(std::span<const double>)> fn;
};

struct ModelErrorRow {
    std::string name;
    std::vector<double> abs_errors;
    std::vector<double> sq_errors;
    double rmse = 0.0;
    double mae = 0.0;
    double std_abs = 0.0;
};

struct ErrorReport {
    std::vector<ModelErrorRow> rows;
    std::size_t test_points = 0;
};

/// Per-point error vectors and summary statistics for each model on a common
/// test set; prediction errors propagate to the caller.
ErrorReport compare_estimators(const std::vector<NamedPredictor>& models, const Dataset& test);

}  // namespace cobra
