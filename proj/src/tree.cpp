#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "machine_impl.hpp"

namespace cobra::detail {

namespace {

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double score = std::numeric_limits<double>::infinity();
};

// Sorted (value, target) view of the current rows for one feature. Ties in
// feature value fall back to the row index so the scan order is fixed.
struct SortedColumn {
    std::vector<double> values;
    std::vector<double> targets;
};

void gather_sorted(const Dataset& data, const std::vector<std::size_t>& rows,
                   std::size_t feature, SortedColumn& out) {
    const std::size_t n = rows.size();
    static thread_local std::vector<std::size_t> order;
    order.assign(rows.begin(), rows.end());
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double va = data.feature(a, feature);
        const double vb = data.feature(b, feature);
        if (va != vb) return va < vb;
        return a < b;
    });
    out.values.resize(n);
    out.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = data.feature(order[i], feature);
        out.targets[i] = data.target(order[i]);
    }
}

// Midpoint threshold, nudged back to the left value when rounding would put
// it on top of the right one (keeps the realized partition equal to the
// scored one).
double cut_threshold(double left, double right) {
    double mid = 0.5 * (left + right);
    if (!(mid < right)) mid = left;
    return mid;
}

// Sum of within-child squared errors for every admissible cut, via prefix
// sums over the sorted column.
void best_variance_split(const SortedColumn& col, std::size_t feature, std::size_t min_leaf,
                         SplitChoice& best) {
    const std::size_t n = col.values.size();
    double total_sum = 0.0;
    double total_sq = 0.0;
    for (double y : col.targets) {
        total_sum += y;
        total_sq += y * y;
    }
    double left_sum = 0.0;
    double left_sq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double y = col.targets[i];
        left_sum += y;
        left_sq += y * y;
        if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
        if (!(col.values[i] < col.values[i + 1])) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        const double right_sum = total_sum - left_sum;
        const double right_sq = total_sq - left_sq;
        const double score = (left_sq - left_sum * left_sum / nl) +
                             (right_sq - right_sum * right_sum / nr);
        if (score < best.score) {
            best.found = true;
            best.feature = feature;
            best.threshold = cut_threshold(col.values[i], col.values[i + 1]);
            best.score = score;
        }
    }
}

// Weighted Gini impurity over every admissible cut; targets in the column
// are dense label ids in [0, classes). Minimizing weighted Gini is the same
// as maximizing sum over children of (sum of squared counts) / size.
void best_gini_split(const SortedColumn& col, std::size_t classes, std::size_t feature,
                     std::size_t min_leaf, SplitChoice& best) {
    const std::size_t n = col.values.size();
    static thread_local std::vector<double> left_counts;
    static thread_local std::vector<double> total_counts;
    left_counts.assign(classes, 0.0);
    total_counts.assign(classes, 0.0);
    for (double id : col.targets) total_counts[static_cast<std::size_t>(id)] += 1.0;

    double left_sumsq = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto cls = static_cast<std::size_t>(col.targets[i]);
        left_sumsq += 2.0 * left_counts[cls] + 1.0;
        left_counts[cls] += 1.0;
        if (i + 1 < min_leaf || n - i - 1 < min_leaf) continue;
        if (!(col.values[i] < col.values[i + 1])) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = static_cast<double>(n - i - 1);
        double right_sumsq = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double rc = total_counts[c] - left_counts[c];
            right_sumsq += rc * rc;
        }
        const double score = -(left_sumsq / nl + right_sumsq / nr);
        if (score < best.score) {
            best.found = true;
            best.feature = feature;
            best.threshold = cut_threshold(col.values[i], col.values[i + 1]);
            best.score = score;
        }
    }
}

struct TreeBuilder {
    const Dataset& data;
    const TreeParams& params;
    Rng* rng;
    std::size_t classes = 0;  // classification only
    std::vector<TreeNode> nodes{};
    std::vector<std::size_t> feature_scratch{};

    double node_value(const std::vector<std::size_t>& rows) const {
        if (!params.classify) {
            double s = 0.0;
            for (std::size_t r : rows) s += data.target(r);
            return s / static_cast<double>(rows.size());
        }
        std::vector<double> labels;
        labels.reserve(rows.size());
        for (std::size_t r : rows) labels.push_back(data.target(r));
        return majority_label(std::move(labels));
    }

    bool pure(const std::vector<std::size_t>& rows) const {
        const double first = data.target(rows.front());
        for (std::size_t r : rows) {
            if (data.target(r) != first) return false;
        }
        return true;
    }

    std::span<const std::size_t> candidate_features() {
        const std::size_t d = data.cols();
        feature_scratch.resize(d);
        for (std::size_t j = 0; j < d; ++j) feature_scratch[j] = j;
        if (rng != nullptr && params.mtry > 0 && params.mtry < d) {
            for (std::size_t j = 0; j < params.mtry; ++j) {
                const std::size_t pick = j + rng->bounded(d - j);
                std::swap(feature_scratch[j], feature_scratch[pick]);
            }
            std::sort(feature_scratch.begin(),
                      feature_scratch.begin() + static_cast<std::ptrdiff_t>(params.mtry));
            return {feature_scratch.data(), params.mtry};
        }
        return {feature_scratch.data(), d};
    }

    std::int32_t build(std::vector<std::size_t> rows, int depth) {
        const auto index = static_cast<std::int32_t>(nodes.size());
        nodes.emplace_back();

        const bool stop = depth >= params.max_depth || rows.size() < 2 * params.min_leaf ||
                          rows.size() < 2 || pure(rows);
        SplitChoice best;
        if (!stop) {
            SortedColumn col;
            for (std::size_t feature : candidate_features()) {
                gather_sorted(data, rows, feature, col);
                if (params.classify) {
                    best_gini_split(col, classes, feature, params.min_leaf, best);
                } else {
                    best_variance_split(col, feature, params.min_leaf, best);
                }
            }
        }

        if (!best.found) {
            nodes[index].value = node_value(rows);
            return index;
        }

        std::vector<std::size_t> left_rows;
        std::vector<std::size_t> right_rows;
        left_rows.reserve(rows.size());
        right_rows.reserve(rows.size());
        for (std::size_t r : rows) {
            if (data.feature(r, best.feature) <= best.threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes[index].feature = static_cast<std::int32_t>(best.feature);
        nodes[index].threshold = best.threshold;
        const std::int32_t left = build(std::move(left_rows), depth + 1);
        const std::int32_t right = build(std::move(right_rows), depth + 1);
        nodes[index].left = left;
        nodes[index].right = right;
        return index;
    }
};

}  // namespace

double majority_label(std::vector<double> labels) {
    std::map<double, std::size_t> counts;
    for (double l : labels) ++counts[l];
    double best_label = labels.front();
    std::size_t best_count = 0;
    for (const auto& [label, count] : counts) {
        if (count > best_count) {
            best_count = count;
            best_label = label;
        }
    }
    return best_label;
}

std::vector<TreeNode> grow_tree(const Dataset& data, std::vector<std::size_t> rows,
                                const TreeParams& params, Rng* rng) {
    if (!params.classify) {
        TreeBuilder builder{.data = data, .params = params, .rng = rng};
        builder.build(std::move(rows), 0);
        return std::move(builder.nodes);
    }

    // Classification: run the split search on dense label ids, then translate
    // leaf values back to the original labels.
    std::vector<double> table;
    table.reserve(rows.size());
    for (std::size_t r : rows) table.push_back(data.target(r));
    std::sort(table.begin(), table.end());
    table.erase(std::unique(table.begin(), table.end()), table.end());

    std::vector<double> encoded(data.rows(), 0.0);
    for (std::size_t r : rows) {
        const auto it = std::lower_bound(table.begin(), table.end(), data.target(r));
        encoded[r] = static_cast<double>(it - table.begin());
    }
    Dataset encoded_data(data.rows(), data.cols(), data.feature_data(), std::move(encoded));

    TreeBuilder builder{.data = encoded_data, .params = params, .rng = rng, .classes = table.size()};
    builder.build(std::move(rows), 0);
    for (TreeNode& node : builder.nodes) {
        if (node.feature < 0) node.value = table[static_cast<std::size_t>(node.value)];
    }
    return std::move(builder.nodes);
}

double tree_predict(const std::vector<TreeNode>& nodes, std::span<const double> x) {
    std::int32_t at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const TreeNode& node = nodes[static_cast<std::size_t>(at)];
        at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

namespace {

class TreeMachine final : public Machine {
public:
    TreeMachine(std::vector<TreeNode> nodes, std::size_t dimension)
        : nodes_(std::move(nodes)), dimension_(dimension) {}

    double predict(std::span<const double> x) const override { return tree_predict(nodes_, x); }
    std::size_t dimension() const override { return dimension_; }

private:
    std::vector<TreeNode> nodes_;
    std::size_t dimension_;
};

class ForestMachine final : public Machine {
public:
    ForestMachine(std::vector<std::vector<TreeNode>> trees, std::size_t dimension, bool classify)
        : trees_(std::move(trees)), dimension_(dimension), classify_(classify) {}

    double predict(std::span<const double> x) const override {
        if (!classify_) {
            double s = 0.0;
            for (const auto& t : trees_) s += tree_predict(t, x);
            return s / static_cast<double>(trees_.size());
        }
        std::vector<double> votes;
        votes.reserve(trees_.size());
        for (const auto& t : trees_) votes.push_back(tree_predict(t, x));
        return majority_label(std::move(votes));
    }
    std::size_t dimension() const override { return dimension_; }

private:
    std::vector<std::vector<TreeNode>> trees_;
    std::size_t dimension_;
    bool classify_;
};

}  // namespace

TrainedMachine fit_decision_tree(const MachineSpec& spec, const Dataset& train, bool classify) {
    TreeParams params;
    params.max_depth = static_cast<int>(spec.param("max_depth", 10));
    params.min_leaf = static_cast<std::size_t>(spec.param("min_leaf", 1));
    params.mtry = static_cast<std::size_t>(spec.param("features_per_split", 0));
    params.classify = classify;

    std::vector<std::size_t> rows(train.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;

    Rng rng(spec.seed);
    Rng* rng_ptr = params.mtry > 0 && params.mtry < train.cols() ? &rng : nullptr;
    auto nodes = grow_tree(train, std::move(rows), params, rng_ptr);
    return TrainedMachine{spec, std::make_shared<TreeMachine>(std::move(nodes), train.cols()), true, {}};
}

TrainedMachine fit_random_forest(const MachineSpec& spec, const Dataset& train, bool classify) {
    const auto tree_count = static_cast<std::size_t>(spec.param("trees", 100));
    const bool bootstrap = spec.param("bootstrap", 1.0) != 0.0;
    const std::size_t d = train.cols();

    TreeParams params;
    params.max_depth = static_cast<int>(spec.param("max_depth", 10));
    params.min_leaf = static_cast<std::size_t>(spec.param("min_leaf", 1));
    params.classify = classify;
    const auto requested_mtry = static_cast<std::size_t>(spec.param("features_per_split", 0));
    if (requested_mtry > 0) {
        params.mtry = requested_mtry;
    } else {
        params.mtry = classify
                          ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))))
                          : (d + 2) / 3;
    }

    const std::size_t n = train.rows();
    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(tree_count);
    for (std::size_t t = 0; t < tree_count; ++t) {
        Rng rng(mix_seed(spec.seed, t));
        std::vector<std::size_t> rows(n);
        if (bootstrap) {
            for (std::size_t i = 0; i < n; ++i) rows[i] = rng.bounded(n);
        } else {
            for (std::size_t i = 0; i < n; ++i) rows[i] = i;
        }
        Rng* rng_ptr = params.mtry < d ? &rng : nullptr;
        trees.push_back(grow_tree(train, std::move(rows), params, rng_ptr));
    }
    return TrainedMachine{spec, std::make_shared<ForestMachine>(std::move(trees), d, classify), true, {}};
}

}  // namespace cobra::detail
