#include "cobra/prediction.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace cobra {

PredictionMatrix::PredictionMatrix(std::size_t machines, std::size_t points,
                                   std::vector<double> values)
    : machines_(machines), points_(points), values_(std::move(values)) {
    if (machines_ == 0) fail(ErrorCode::empty_ensemble, "prediction matrix needs at least one machine");
    if (points_ == 0) fail(ErrorCode::invalid_argument, "prediction matrix needs at least one point");
    if (values_.size() != machines_ * points_) {
        fail(ErrorCode::shape, "prediction matrix buffer size mismatch");
    }
    min_ = std::numeric_limits<double>::infinity();
    max_ = -std::numeric_limits<double>::infinity();
    for (double v : values_) {
        if (!std::isfinite(v)) fail(ErrorCode::machine_output, "non-finite prediction matrix entry");
        if (v < min_) min_ = v;
        if (v > max_) max_ = v;
    }
}

PredictionMatrix build_prediction_matrix(std::span<const TrainedMachine> machines,
                                         const Dataset& points) {
    if (machines.empty()) {
        fail(ErrorCode::empty_ensemble, "cannot build a prediction matrix from an empty ensemble");
    }
    const std::size_t m_count = machines.size();
    const std::size_t n = points.rows();
    std::vector<double> values(m_count * n);
    for (std::size_t m = 0; m < m_count; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = machines[m].predict(points.row(i));
            if (!std::isfinite(p)) {
                fail(ErrorCode::machine_output,
                     "machine '" + machines[m].name() + "' (index " + std::to_string(m) +
                         ") returned a non-finite prediction at point " + std::to_string(i));
            }
            values[m * n + i] = p;
        }
    }
    return PredictionMatrix(m_count, n, std::move(values));
}

}  // namespace cobra
