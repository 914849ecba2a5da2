#pragma once

#include <cstdint>
#include <vector>

#include "cobra/dataset.hpp"
#include "cobra/machines.hpp"
#include "cobra/rng.hpp"

namespace cobra::detail {

TrainedMachine fit_ridge(const MachineSpec& spec, const Dataset& train);
TrainedMachine fit_lasso(const MachineSpec& spec, const Dataset& train);
TrainedMachine fit_logistic(const MachineSpec& spec, const Dataset& train);
TrainedMachine fit_knn(const MachineSpec& spec, const Dataset& train, bool classify);
TrainedMachine fit_decision_tree(const MachineSpec& spec, const Dataset& train, bool classify);
TrainedMachine fit_random_forest(const MachineSpec& spec, const Dataset& train, bool classify);
TrainedMachine fit_naive_bayes(const MachineSpec& spec, const Dataset& train);

// --- shared CART machinery -------------------------------------------------

struct TreeNode {
    std::int32_t feature = -1;  // negative marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;
};

struct TreeParams {
    int max_depth = 10;
    std::size_t min_leaf = 1;
    std::size_t mtry = 0;  // 0 or >= d means all features
    bool classify = false;
};

// Grows a CART tree over the given rows: variance-reduction splits for
// regression, Gini for classification. `rng` drives the per-split feature
// subsample and may be null when all features are candidates.
std::vector<TreeNode> grow_tree(const Dataset& data, std::vector<std::size_t> rows,
                                const TreeParams& params, Rng* rng);

double tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> x);

// Majority label with ties broken toward the smallest label value.
double majority_label(std::vector<double> labels);

}  // namespace cobra::detail
