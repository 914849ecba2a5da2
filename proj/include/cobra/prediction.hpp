#pragma once

#include <span>
#include <vector>

#include "cobra/dataset.hpp"
#include "cobra/machines.hpp"

namespace cobra {

/// M x ell cache of machine predictions over the retained half. Entry (m, i)
/// is machine m's prediction at retained point i; computed once and reused by
/// every query so aggregation stays O(M * ell) per prediction.
class PredictionMatrix {
public:
    PredictionMatrix(std::size_t machines, std::size_t points, std::vector<double> values);

    std::size_t machine_count() const noexcept { return machines_; }
    std::size_t point_count() const noexcept { return points_; }

    double at(std::size_t m, std::size_t i) const { return values_[m * points_ + i]; }
    std::span<const double> machine_row(std::size_t m) const {
        return {values_.data() + m * points_, points_};
    }

    double value_min() const noexcept { return min_; }
    double value_max() const noexcept { return max_; }
    double value_range() const noexcept { return max_ - min_; }

private:
    std::size_t machines_;
    std::size_t points_;
    std::vector<double> values_;
    double min_;
    double max_;
};

PredictionMatrix build_prediction_matrix(std::span<const TrainedMachine> machines,
                                         const Dataset& points);

}  // namespace cobra
