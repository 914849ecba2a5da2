#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cobra/error.hpp"

namespace cobra {

/// Dense row-major sample container. Targets are optional: real-valued for
/// regression, integer-valued doubles for classification labels. All entries
/// are validated finite at construction.
class Dataset {
public:
    Dataset(std::size_t n, std::size_t d, std::vector<double> features,
            std::optional<std::vector<double>> targets = std::nullopt);

    std::size_t rows() const noexcept { return n_; }
    std::size_t cols() const noexcept { return d_; }

    double feature(std::size_t i, std::size_t j) const { return features_[i * d_ + j]; }
    std::span<const double> row(std::size_t i) const {
        return {features_.data() + i * d_, d_};
    }
    const std::vector<double>& feature_data() const noexcept { return features_; }

    bool has_targets() const noexcept { return targets_.has_value(); }
    const std::vector<double>& targets() const;
    double target(std::size_t i) const;

    /// New dataset made of the given rows (targets carried along when present).
    Dataset subset(std::span<const std::size_t> indices) const;

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<double> features_;
    std::optional<std::vector<double>> targets_;
};

/// The two halves of a split sample: machines are fitted on `train_half`,
/// while `retained_half` supplies the points and outputs being aggregated.
struct SplitPair {
    Dataset train_half;
    Dataset retained_half;
    std::size_t k = 0;
    std::size_t ell = 0;
};

/// Default split size when the caller does not choose one: ceil(n / 2).
inline std::size_t default_split_size(std::size_t n) { return (n + 1) / 2; }

/// Shuffles rows with the seeded generator (unless told not to) and cuts the
/// sample after the first k rows. Requires 1 <= k <= n - 1 and targets.
SplitPair split_dataset(const Dataset& data, std::size_t k, std::uint64_t seed,
                        bool shuffle = true);

}  // namespace cobra
