#include "cobra/dataset.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "cobra/rng.hpp"

namespace cobra {

Dataset::Dataset(std::size_t n, std::size_t d, std::vector<double> features,
                 std::optional<std::vector<double>> targets)
    : n_(n), d_(d), features_(std::move(features)), targets_(std::move(targets)) {
    if (n_ == 0 || d_ == 0) {
        fail(ErrorCode::invalid_argument, "dataset must have at least one row and one column");
    }
    if (features_.size() != n_ * d_) {
        fail(ErrorCode::shape, "feature buffer has " + std::to_string(features_.size()) +
                                   " entries, expected " + std::to_string(n_ * d_));
    }
    for (std::size_t i = 0; i < features_.size(); ++i) {
        if (!std::isfinite(features_[i])) {
            fail(ErrorCode::invalid_argument,
                 "non-finite feature at row " + std::to_string(i / d_) + " column " +
                     std::to_string(i % d_));
        }
    }
    if (targets_) {
        if (targets_->size() != n_) {
            fail(ErrorCode::shape, "target vector has " + std::to_string(targets_->size()) +
                                       " entries, expected " + std::to_string(n_));
        }
        for (std::size_t i = 0; i < targets_->size(); ++i) {
            if (!std::isfinite((*targets_)[i])) {
                fail(ErrorCode::invalid_argument,
                     "non-finite target at row " + std::to_string(i));
            }
        }
    }
}

const std::vector<double>& Dataset::targets() const {
    if (!targets_) fail(ErrorCode::invalid_argument, "dataset has no targets");
    return *targets_;
}

double Dataset::target(std::size_t i) const { return targets()[i]; }

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    if (indices.empty()) fail(ErrorCode::invalid_argument, "empty row subset");
    std::vector<double> feats;
    feats.reserve(indices.size() * d_);
    for (std::size_t idx : indices) {
        auto r = row(idx);
        feats.insert(feats.end(), r.begin(), r.end());
    }
    std::optional<std::vector<double>> targs;
    if (targets_) {
        targs.emplace();
        targs->reserve(indices.size());
        for (std::size_t idx : indices) targs->push_back((*targets_)[idx]);
    }
    return Dataset(indices.size(), d_, std::move(feats), std::move(targs));
}

SplitPair split_dataset(const Dataset& data, std::size_t k, std::uint64_t seed,
                        bool shuffle) {
    const std::size_t n = data.rows();
    if (k == 0 || k >= n) {
        fail(ErrorCode::invalid_split,
             "invalid split: k=" + std::to_string(k) + " with n=" + std::to_string(n) +
                 " leaves no retained half (need 1 <= k <= n-1)");
    }
    if (!data.has_targets()) {
        fail(ErrorCode::invalid_argument, "split requires a dataset with targets");
    }
    std::vector<std::size_t> order;
    if (shuffle) {
        Rng rng(seed);
        order = shuffled_indices(n, rng);
    } else {
        order.resize(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
    }
    std::span<const std::size_t> all(order);
    Dataset train = data.subset(all.subspan(0, k));
    Dataset retained = data.subset(all.subspan(k));
    return SplitPair{std::move(train), std::move(retained), k, n - k};
}

}  // namespace cobra
