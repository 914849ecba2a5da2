#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cobra/aggregation.hpp"
#include "cobra/datagen.hpp"
#include "cobra/json_io.hpp"
#include "cobra/tuning.hpp"

namespace cobra {

struct DatasetEntry {
    std::string name;
    std::optional<GeneratorSpec> generator;
    std::string csv_path;  // used when no generator is given
    std::string csv_target = "y";
    bool csv_has_header = true;
};

struct EstimatorEntry {
    std::string name;
    EstimatorKind kind = EstimatorKind::kernelcobra;
    AggregatorConfig config;
    std::vector<GridSpec> tune_grids;  // empty = use the config as-is
    int tune_folds = 5;
};

struct TimingDefaults {
    std::size_t queries = 128;
    std::size_t reps = 15;
    std::size_t d = 10;
    std::size_t ell = 1000;
    std::size_t k = 200;
    std::size_t machines = 4;
};

/// Everything one experiment needs: data sources, the estimator roster with
/// optional tune directives, machines, run count and seed. The COBRA_SEED
/// environment variable overrides the configured seed at load time.
struct BenchConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<EstimatorEntry> estimators;
    std::vector<MachineSpec> machines;
    int runs = 20;
    double split_fraction = 0.75;  // share of each run's sample used for training
    int folds = 5;
    std::uint64_t seed = 42;
    std::string out_dir = "bench_out";
    std::size_t threads = 0;  // 0 = hardware concurrency
    TimingDefaults timing;

    static BenchConfig from_json(const Json& j);
    void validate() const;
};

struct FailedRun {
    int run = 0;
    std::string error;
};

struct ModelStats {
    std::string model;
    double mean_rmse = 0.0;
    double std_rmse = 0.0;
    std::vector<double> per_run;  // aligned with run_indices
    bool best = false;
};

struct PhaseTimings {
    double fit_seconds = 0.0;
    double matrix_seconds = 0.0;
    double tune_seconds = 0.0;
    double predict_seconds = 0.0;
};

struct DatasetBenchReport {
    std::string dataset;
    std::vector<int> run_indices;  // runs that completed
    std::vector<ModelStats> models;
    std::vector<FailedRun> failures;
    PhaseTimings timings;
};

struct BenchReport {
    std::uint64_t seed = 0;
    int runs = 0;
    std::vector<DatasetBenchReport> datasets;

    /// Deterministic given the config; wall-clock timings stay out of this
    /// payload and are serialized separately.
    Json to_json() const;
    Json timings_to_json() const;
};

/// Repeated-run evaluation: per run, draw or load the data, shuffle-split
/// train/test, split the training part in half, fit machines on the first
/// half, tune where directed, then score every estimator and every machine
/// on the test points. Failed runs are recorded, never dropped.
BenchReport run_rmse_benchmark(const BenchConfig& config);

/// Writes report.json, timings.json, rmse.csv, errors.csv and (when runs
/// failed) failed_runs.json under out_dir.
void write_rmse_outputs(const BenchReport& report, const std::string& out_dir);

struct TimingSweep {
    enum class Axis { dimension, retained, machines };
    Axis axis = Axis::dimension;
    std::vector<std::size_t> values;

    /// "d=10,100,1000", "ell=500,1000", "m=2,4,8".
    static TimingSweep parse(const std::string& text);
};

std::string_view timing_axis_name(TimingSweep::Axis axis);

struct TimingRow {
    std::string estimator;
    std::size_t value = 0;
    double aggregate_median_us = 0.0;  // per query, prediction matrix cached
    double aggregate_std_us = 0.0;
    double end_to_end_median_us = 0.0;  // per query, machine predictions included
    double end_to_end_std_us = 0.0;
};

struct TimingTable {
    std::string axis;
    std::vector<TimingRow> rows;

    Json to_json() const;
};

/// Sweeps one variable while holding data and machines fixed, timing the
/// cobra / kernelcobra / mixcobra aggregation step per query with a cached
/// prediction matrix, plus the end-to-end predict path. Runs serially.
TimingTable run_timing_benchmark(const BenchConfig& config, const TimingSweep& sweep);

void write_timing_outputs(const TimingTable& table, const std::string& out_dir);

struct Bounds2D {
    double x1_min = 0.0;
    double x1_max = 1.0;
    double x2_min = 0.0;
    double x2_max = 1.0;
};

/// Bounding box of a two-dimensional dataset, widened by the given margin.
Bounds2D data_bounds(const Dataset& data, double margin);

/// Writes a (x1, x2, label) grid over the rectangle, one row per cell, for
/// external plotting. The classifier must have been trained on d = 2.
void export_decision_boundary(const std::function<double(std::span<const double>)>& classifier,
                              std::size_t dimension, const Bounds2D& bounds,
                              std::size_t resolution, const std::string& out_path);
void export_decision_boundary(const Aggregator& aggregator, const AggregatorConfig& config,
                              const Bounds2D& bounds, std::size_t resolution,
                              const std::string& out_path);
void export_decision_boundary(const TrainedMachine& machine, const Bounds2D& bounds,
                              std::size_t resolution, const std::string& out_path);

}  // namespace cobra
