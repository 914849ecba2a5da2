#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cobra/aggregation.hpp"
#include "cobra/tuning.hpp"

namespace cobra {

struct TuneDirective {
    std::vector<GridSpec> grids;
    int folds = 5;
};

struct ModelOptions {
    EstimatorKind kind = EstimatorKind::kernelcobra;
    AggregatorConfig config;
    std::vector<MachineSpec> machines;  // empty = default roster for the kind
    std::size_t k = 0;                  // split size; 0 = ceil(n / 2)
    std::uint64_t seed = 42;
    std::optional<TuneDirective> tune;
};

/// A trained aggregation estimator bundling the data, the fitted machines and
/// the resolved config. Persisting stores the options plus the training data;
/// loading refits deterministically, so a round trip reproduces the exact
/// same predictor.
class Model {
public:
    static Model train(Dataset data, ModelOptions options,
                       std::vector<TrainedMachine> external = {});

    double predict(std::span<const double> x) const;

    const Aggregator& aggregator() const noexcept { return aggregator_; }
    const ModelOptions& options() const noexcept { return options_; }
    const std::optional<TuneResult>& tuning() const noexcept { return tune_result_; }
    const Dataset& data() const noexcept { return data_; }

    /// Writes model.json and train.csv into the directory. Models holding
    /// externally supplied machines cannot be persisted.
    void save(const std::string& dir) const;
    static Model load(const std::string& dir);

private:
    Model(Dataset data, ModelOptions options, std::optional<TuneResult> tuned,
          Aggregator aggregator, bool has_external);

    Dataset data_;
    ModelOptions options_;
    std::optional<TuneResult> tune_result_;
    Aggregator aggregator_;
    bool has_external_;
};

}  // namespace cobra
