#include "cobra/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <thread>
#include <utility>

#include "cobra/csv.hpp"
#include "cobra/rng.hpp"

namespace cobra {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void run_parallel(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::thread::hardware_concurrency();
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

std::vector<std::string> unique_model_names(const BenchConfig& config) {
    std::vector<std::string> names;
    for (const auto& e : config.estimators) {
        names.push_back(e.name.empty() ? std::string(estimator_kind_name(e.kind)) : e.name);
    }
    for (const auto& m : config.machines) names.push_back(m.display_name());
    for (std::size_t i = 0; i < names.size(); ++i) {
        std::size_t copy = 1;
        for (std::size_t j = 0; j < i; ++j) {
            if (names[j] == names[i]) ++copy;
        }
        if (copy > 1) names[i] += "-" + std::to_string(copy);
    }
    return names;
}

struct RunOutcome {
    bool failed = false;
    std::string error;
    std::vector<double> rmse;  // one per model
    PhaseTimings timings;
};

RunOutcome execute_run(const BenchConfig& config, const DatasetEntry& entry,
                       const Dataset* csv_data, std::uint64_t run_seed) {
    RunOutcome outcome;
    try {
        std::optional<Dataset> generated;
        const Dataset* source = csv_data;
        if (entry.generator) {
            GeneratorSpec spec = *entry.generator;
            spec.seed = mix_seed(run_seed, 1);
            generated = generate(spec);
            source = &*generated;
        }

        const std::size_t n = source->rows();
        if (n < 4) fail(ErrorCode::invalid_argument, "dataset too small to split for a run");
        const auto train_n = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(config.split_fraction * static_cast<double>(n))),
            2, n - 1);
        Rng shuffle_rng(mix_seed(run_seed, 2));
        const auto order = shuffled_indices(n, shuffle_rng);
        std::span<const std::size_t> all(order);
        const Dataset train = source->subset(all.subspan(0, train_n));
        const Dataset test = source->subset(all.subspan(train_n));

        auto t0 = Clock::now();
        const SplitPair split =
            split_dataset(train, default_split_size(train.rows()), mix_seed(run_seed, 3));
        std::vector<TrainedMachine> machines;
        machines.reserve(config.machines.size());
        for (const auto& spec : config.machines) {
            machines.push_back(fit_machine(spec, split.train_half));
        }
        outcome.timings.fit_seconds = seconds_since(t0);

        t0 = Clock::now();
        Aggregator aggregator(machines, split);
        outcome.timings.matrix_seconds = seconds_since(t0);

        std::vector<NamedPredictor> models;
        std::vector<AggregatorConfig> tuned_configs(config.estimators.size());
        for (std::size_t e = 0; e < config.estimators.size(); ++e) {
            const EstimatorEntry& est = config.estimators[e];
            tuned_configs[e] = est.config;
            if (!est.tune_grids.empty()) {
                t0 = Clock::now();
                const TuneResult tuned =
                    grid_search(est.kind, est.config, config.machines, est.tune_grids, train,
                                est.tune_folds, mix_seed(run_seed, 16 + e));
                tuned_configs[e] = apply_params(est.config, tuned.best);
                outcome.timings.tune_seconds += seconds_since(t0);
            }
            const AggregatorConfig* cfg = &tuned_configs[e];
            const Aggregator* agg = &aggregator;
            const EstimatorKind kind = est.kind;
            models.push_back(NamedPredictor{
                est.name, [cfg, agg, kind](std::span<const double> x) {
                    return agg->predict(kind, *cfg, x);
                }});
        }
        for (const TrainedMachine& machine : machines) {
            const TrainedMachine* m = &machine;
            models.push_back(NamedPredictor{
                machine.name(), [m](std::span<const double> x) { return m->predict(x); }});
        }

        t0 = Clock::now();
        const ErrorReport report = compare_estimators(models, test);
        outcome.timings.predict_seconds = seconds_since(t0);

        outcome.rmse.reserve(report.rows.size());
        for (const auto& row : report.rows) outcome.rmse.push_back(row.rmse);
    } catch (const std::exception& e) {
        outcome.failed = true;
        outcome.error = e.what();
    }
    return outcome;
}

}  // namespace

void BenchConfig::validate() const {
    if (runs < 1) fail(ErrorCode::config, "bench config needs runs >= 1");
    if (!(split_fraction > 0.0) || !(split_fraction < 1.0)) {
        fail(ErrorCode::config, "split fraction must lie in (0, 1)");
    }
    if (folds < 2) fail(ErrorCode::config, "bench config needs folds >= 2");
    for (const auto& entry : datasets) {
        if (!entry.generator) {
            if (entry.csv_path.empty()) {
                fail(ErrorCode::config, "dataset '" + entry.name + "' has neither generator nor csv");
            }
            if (!std::filesystem::exists(entry.csv_path)) {
                fail(ErrorCode::config, "dataset file '" + entry.csv_path + "' does not exist");
            }
        }
    }
    for (const auto& est : estimators) {
        est.config.validate(machines.size());
        for (const auto& g : est.tune_grids) g.validate();
        if (!est.tune_grids.empty() && est.tune_folds < 2) {
            fail(ErrorCode::config, "tuned estimator '" + est.name + "' needs folds >= 2");
        }
    }
    for (const auto& m : machines) m.validate();
}

BenchConfig BenchConfig::from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorCode::config, "bench config must be a JSON object");
    BenchConfig config;
    if (j.contains("seed")) config.seed = j.at("seed").get<std::uint64_t>();
    if (const char* env = std::getenv("COBRA_SEED")) {
        config.seed = std::strtoull(env, nullptr, 10);
    }
    if (j.contains("runs")) config.runs = j.at("runs").get<int>();
    if (j.contains("split_fraction")) config.split_fraction = j.at("split_fraction").get<double>();
    if (j.contains("folds")) config.folds = j.at("folds").get<int>();
    if (j.contains("out_dir")) config.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("threads")) config.threads = j.at("threads").get<std::size_t>();

    if (j.contains("datasets")) {
        for (const auto& dj : j.at("datasets")) {
            DatasetEntry entry;
            if (dj.contains("name")) entry.name = dj.at("name").get<std::string>();
            if (dj.contains("generator")) {
                entry.generator = generator_spec_from_json(dj.at("generator"));
                if (entry.name.empty()) {
                    entry.name = std::string(generator_kind_name(entry.generator->kind));
                }
            }
            if (dj.contains("csv")) entry.csv_path = dj.at("csv").get<std::string>();
            if (dj.contains("target")) entry.csv_target = dj.at("target").get<std::string>();
            if (dj.contains("has_header")) entry.csv_has_header = dj.at("has_header").get<bool>();
            if (entry.name.empty()) entry.name = entry.csv_path;
            config.datasets.push_back(std::move(entry));
        }
    }
    if (j.contains("machines")) {
        for (const auto& mj : j.at("machines")) {
            config.machines.push_back(machine_spec_from_json(mj));
        }
    } else {
        config.machines = default_regression_machines();
    }
    if (j.contains("estimators")) {
        for (const auto& ej : j.at("estimators")) {
            EstimatorEntry entry;
            if (ej.is_string()) {
                entry.kind = parse_estimator_kind(ej.get<std::string>());
            } else {
                if (!ej.contains("kind")) fail(ErrorCode::config, "estimator entry needs a 'kind'");
                entry.kind = parse_estimator_kind(ej.at("kind").get<std::string>());
                if (ej.contains("name")) entry.name = ej.at("name").get<std::string>();
                if (ej.contains("config")) {
                    entry.config = aggregator_config_from_json(ej.at("config"));
                }
                if (ej.contains("tune")) {
                    const auto& tj = ej.at("tune");
                    if (tj.contains("grids")) {
                        for (const auto& gj : tj.at("grids")) {
                            entry.tune_grids.push_back(GridSpec::parse(gj.get<std::string>()));
                        }
                    } else {
                        entry.tune_grids = default_grids(entry.kind);
                    }
                    if (tj.contains("folds")) entry.tune_folds = tj.at("folds").get<int>();
                    else entry.tune_folds = config.folds;
                }
            }
            if (entry.name.empty()) entry.name = std::string(estimator_kind_name(entry.kind));
            config.estimators.push_back(std::move(entry));
        }
    }
    if (j.contains("timing")) {
        const auto& tj = j.at("timing");
        if (tj.contains("queries")) config.timing.queries = tj.at("queries").get<std::size_t>();
        if (tj.contains("reps")) config.timing.reps = tj.at("reps").get<std::size_t>();
        if (tj.contains("d")) config.timing.d = tj.at("d").get<std::size_t>();
        if (tj.contains("ell")) config.timing.ell = tj.at("ell").get<std::size_t>();
        if (tj.contains("k")) config.timing.k = tj.at("k").get<std::size_t>();
        if (tj.contains("machines")) config.timing.machines = tj.at("machines").get<std::size_t>();
    }
    config.validate();
    return config;
}

BenchReport run_rmse_benchmark(const BenchConfig& config) {
    config.validate();
    if (config.datasets.empty()) fail(ErrorCode::config, "rmse benchmark needs a dataset");
    if (config.machines.empty()) fail(ErrorCode::config, "rmse benchmark needs machines");
    if (config.estimators.empty()) {
        fail(ErrorCode::config, "rmse benchmark needs at least one estimator");
    }
    const std::vector<std::string> model_names = unique_model_names(config);

    BenchReport report;
    report.seed = config.seed;
    report.runs = config.runs;

    for (std::size_t ds = 0; ds < config.datasets.size(); ++ds) {
        const DatasetEntry& entry = config.datasets[ds];
        std::optional<Dataset> csv_data;
        if (!entry.generator) {
            csv_data = load_csv(entry.csv_path, entry.csv_target, entry.csv_has_header);
        }

        std::vector<RunOutcome> outcomes(static_cast<std::size_t>(config.runs));
        const std::uint64_t dataset_seed = mix_seed(config.seed, 0xD5 + ds);
        run_parallel(outcomes.size(), config.threads, [&](std::size_t r) {
            outcomes[r] = execute_run(config, entry, csv_data ? &*csv_data : nullptr,
                                      mix_seed(dataset_seed, r));
        });

        DatasetBenchReport ds_report;
        ds_report.dataset = entry.name;
        ds_report.models.resize(model_names.size());
        for (std::size_t m = 0; m < model_names.size(); ++m) {
            ds_report.models[m].model = model_names[m];
        }
        for (std::size_t r = 0; r < outcomes.size(); ++r) {
            const RunOutcome& outcome = outcomes[r];
            ds_report.timings.fit_seconds += outcome.timings.fit_seconds;
            ds_report.timings.matrix_seconds += outcome.timings.matrix_seconds;
            ds_report.timings.tune_seconds += outcome.timings.tune_seconds;
            ds_report.timings.predict_seconds += outcome.timings.predict_seconds;
            if (outcome.failed) {
                ds_report.failures.push_back({static_cast<int>(r), outcome.error});
                continue;
            }
            ds_report.run_indices.push_back(static_cast<int>(r));
            for (std::size_t m = 0; m < model_names.size(); ++m) {
                ds_report.models[m].per_run.push_back(outcome.rmse[m]);
            }
        }

        double best_mean = std::numeric_limits<double>::infinity();
        for (auto& stats : ds_report.models) {
            const std::size_t count = stats.per_run.size();
            if (count == 0) continue;
            double mean = 0.0;
            for (double v : stats.per_run) mean += v;
            mean /= static_cast<double>(count);
            double var = 0.0;
            for (double v : stats.per_run) var += (v - mean) * (v - mean);
            var /= static_cast<double>(count);
            stats.mean_rmse = mean;
            stats.std_rmse = std::sqrt(var);
            best_mean = std::min(best_mean, mean);
        }
        for (auto& stats : ds_report.models) {
            stats.best = !stats.per_run.empty() && stats.mean_rmse == best_mean;
        }
        report.datasets.push_back(std::move(ds_report));
    }
    return report;
}

Json BenchReport::to_json() const {
    Json j;
    j["seed"] = seed;
    j["runs"] = runs;
    Json ds_array = Json::array();
    for (const auto& ds : datasets) {
        Json dj;
        dj["dataset"] = ds.dataset;
        dj["runs_succeeded"] = ds.run_indices.size();
        dj["runs_failed"] = ds.failures.size();
        dj["run_indices"] = ds.run_indices;
        Json models = Json::array();
        for (const auto& m : ds.models) {
            Json mj;
            mj["model"] = m.model;
            mj["mean_rmse"] = m.mean_rmse;
            mj["std_rmse"] = m.std_rmse;
            mj["best"] = m.best;
            mj["per_run"] = m.per_run;
            models.push_back(std::move(mj));
        }
        dj["models"] = std::move(models);
        Json failures = Json::array();
        for (const auto& f : ds.failures) {
            Json fj;
            fj["run"] = f.run;
            fj["error"] = f.error;
            failures.push_back(std::move(fj));
        }
        dj["failures"] = std::move(failures);
        ds_array.push_back(std::move(dj));
    }
    j["datasets"] = std::move(ds_array);
    return j;
}

Json BenchReport::timings_to_json() const {
    Json j = Json::array();
    for (const auto& ds : datasets) {
        Json dj;
        dj["dataset"] = ds.dataset;
        dj["fit_seconds"] = ds.timings.fit_seconds;
        dj["matrix_seconds"] = ds.timings.matrix_seconds;
        dj["tune_seconds"] = ds.timings.tune_seconds;
        dj["predict_seconds"] = ds.timings.predict_seconds;
        j.push_back(std::move(dj));
    }
    return j;
}

void write_rmse_outputs(const BenchReport& report, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* file) { return out_dir + "/" + file; };

    std::ofstream(path("report.json")) << report.to_json().dump(2) << '\n';
    std::ofstream(path("timings.json")) << report.timings_to_json().dump(2) << '\n';

    std::ofstream rmse(path("rmse.csv"));
    rmse << "dataset,model,mean_rmse,std_rmse,best\n";
    for (const auto& ds : report.datasets) {
        for (const auto& m : ds.models) {
            rmse << ds.dataset << ',' << m.model << ',' << m.mean_rmse << ',' << m.std_rmse << ','
                 << (m.best ? 1 : 0) << '\n';
        }
    }

    std::ofstream errors(path("errors.csv"));
    errors << "dataset,model,run,rmse\n";
    for (const auto& ds : report.datasets) {
        for (const auto& m : ds.models) {
            for (std::size_t i = 0; i < m.per_run.size(); ++i) {
                errors << ds.dataset << ',' << m.model << ',' << ds.run_indices[i] << ','
                       << m.per_run[i] << '\n';
            }
        }
    }

    bool any_failures = false;
    for (const auto& ds : report.datasets) any_failures |= !ds.failures.empty();
    if (any_failures) {
        Json j = Json::array();
        for (const auto& ds : report.datasets) {
            for (const auto& f : ds.failures) {
                Json fj;
                fj["dataset"] = ds.dataset;
                fj["run"] = f.run;
                fj["error"] = f.error;
                j.push_back(std::move(fj));
            }
        }
        std::ofstream(path("failed_runs.json")) << j.dump(2) << '\n';
    }
}

std::string_view timing_axis_name(TimingSweep::Axis axis) {
    switch (axis) {
        case TimingSweep::Axis::dimension: return "d";
        case TimingSweep::Axis::retained: return "ell";
        case TimingSweep::Axis::machines: return "m";
    }
    return "?";
}

TimingSweep TimingSweep::parse(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        fail(ErrorCode::config, "sweep '" + text + "' must look like axis=v1,v2,...");
    }
    TimingSweep sweep;
    const std::string axis = text.substr(0, eq);
    if (axis == "d") sweep.axis = Axis::dimension;
    else if (axis == "ell") sweep.axis = Axis::retained;
    else if (axis == "m") sweep.axis = Axis::machines;
    else fail(ErrorCode::config, "unknown sweep axis '" + axis + "' (use d, ell or m)");

    std::string body = text.substr(eq + 1);
    std::size_t start = 0;
    while (start <= body.size()) {
        const auto comma = body.find(',', start);
        const std::string token =
            body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (token.empty()) fail(ErrorCode::config, "empty sweep value");
        sweep.values.push_back(static_cast<std::size_t>(std::strtoull(token.c_str(), nullptr, 10)));
        if (sweep.values.back() == 0) fail(ErrorCode::config, "sweep values must be positive");
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (sweep.values.empty()) fail(ErrorCode::config, "sweep has no values");
    return sweep;
}

namespace {

MachineSpec timing_pool_machine(std::size_t index) {
    MachineSpec spec;
    if (index % 2 == 0) {
        spec.kind = MachineKind::knn;
        spec.params["neighbors"] = static_cast<double>(3 + index);
    } else {
        spec.kind = MachineKind::decision_tree;
        spec.params["max_depth"] = static_cast<double>(4 + index / 2);
    }
    spec.seed = index;
    spec.name = std::string(machine_kind_name(spec.kind)) + "-" + std::to_string(index);
    return spec;
}

struct TimingStats {
    double median = 0.0;
    double stddev = 0.0;
};

TimingStats summarize(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    TimingStats stats;
    const std::size_t n = values.size();
    stats.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    stats.stddev = std::sqrt(var / static_cast<double>(n));
    return stats;
}

}  // namespace

TimingTable run_timing_benchmark(const BenchConfig& config, const TimingSweep& sweep) {
    if (sweep.values.empty()) fail(ErrorCode::config, "timing sweep is empty");
    const TimingDefaults& defs = config.timing;

    TimingTable table;
    table.axis = std::string(timing_axis_name(sweep.axis));

    volatile double sink = 0.0;  // keeps the timed loops observable

    for (std::size_t value : sweep.values) {
        std::size_t d = defs.d;
        std::size_t ell = defs.ell;
        std::size_t m_count = defs.machines;
        switch (sweep.axis) {
            case TimingSweep::Axis::dimension: d = value; break;
            case TimingSweep::Axis::retained: ell = value; break;
            case TimingSweep::Axis::machines: m_count = value; break;
        }

        GeneratorSpec gen;
        gen.kind = GeneratorKind::linear_gaussian;
        gen.n = defs.k + ell + defs.queries;
        gen.d = d;
        gen.noise = 1.0;
        gen.seed = mix_seed(config.seed, value);
        const Dataset data = generate(gen);

        std::vector<std::size_t> idx(data.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::span<const std::size_t> all(idx);
        Dataset train_half = data.subset(all.subspan(0, defs.k));
        Dataset retained_half = data.subset(all.subspan(defs.k, ell));
        const Dataset queries = data.subset(all.subspan(defs.k + ell));

        std::vector<TrainedMachine> machines;
        machines.reserve(m_count);
        for (std::size_t m = 0; m < m_count; ++m) {
            machines.push_back(fit_machine(timing_pool_machine(m), train_half));
        }
        Aggregator aggregator(std::move(machines),
                              SplitPair{std::move(train_half), std::move(retained_half), defs.k,
                                        ell});

        // query predictions are precomputed; the timed region is weights +
        // weighted average only
        std::vector<std::vector<double>> query_preds(queries.rows());
        for (std::size_t q = 0; q < queries.rows(); ++q) {
            query_preds[q] = aggregator.query_predictions(queries.row(q));
        }

        const EstimatorKind kinds[] = {EstimatorKind::cobra, EstimatorKind::kernelcobra,
                                       EstimatorKind::mixcobra};
        for (EstimatorKind kind : kinds) {
            AggregatorConfig cfg;
            // Coefficients are scaled to the data so the exponent magnitudes
            // stay in the normal floating-point range for every sweep value;
            // subnormal exp() results would distort the per-element cost.
            cfg.lambda = 1.0 / std::max(1e-12, aggregator.predictions().value_range());
            cfg.mix_alpha = 1.0 / static_cast<double>(d);
            cfg.uniform_fallback = true;  // keep the timed loop free of throws

            std::vector<double> weights(ell);
            const auto& retained_targets = aggregator.split().retained_half.targets();
            const auto query_count = static_cast<double>(queries.rows());

            auto aggregation_batch = [&] {
                double acc = 0.0;
                for (std::size_t q = 0; q < queries.rows(); ++q) {
                    aggregator.weights_for_query_into(kind, cfg, query_preds[q], queries.row(q),
                                                      weights);
                    acc += aggregate_regression(weights, retained_targets);
                }
                return acc;
            };
            auto end_to_end_batch = [&] {
                double acc = 0.0;
                for (std::size_t q = 0; q < queries.rows(); ++q) {
                    acc += aggregator.predict(kind, cfg, queries.row(q));
                }
                return acc;
            };

            // the two phases are timed separately, each after an untimed warm
            // batch, so the heavy end-to-end loop cannot skew the cached
            // aggregation numbers
            const std::size_t agg_reps = std::max<std::size_t>(defs.reps, 25);
            std::vector<double> agg_times;
            agg_times.reserve(agg_reps);
            sink = sink + aggregation_batch();
            for (std::size_t rep = 0; rep < agg_reps; ++rep) {
                const auto start = Clock::now();
                sink = sink + aggregation_batch();
                agg_times.push_back(seconds_since(start) * 1e6 / query_count);
            }

            std::vector<double> e2e_times;
            e2e_times.reserve(defs.reps);
            sink = sink + end_to_end_batch();
            for (std::size_t rep = 0; rep < defs.reps; ++rep) {
                const auto start = Clock::now();
                sink = sink + end_to_end_batch();
                e2e_times.push_back(seconds_since(start) * 1e6 / query_count);
            }

            const TimingStats agg = summarize(std::move(agg_times));
            const TimingStats e2e = summarize(std::move(e2e_times));
            table.rows.push_back(TimingRow{std::string(estimator_kind_name(kind)), value,
                                           agg.median, agg.stddev, e2e.median, e2e.stddev});
        }
    }
    return table;
}

Json TimingTable::to_json() const {
    Json j;
    j["axis"] = axis;
    Json rows_json = Json::array();
    for (const auto& row : rows) {
        Json rj;
        rj["estimator"] = row.estimator;
        rj["value"] = row.value;
        rj["aggregate_median_us"] = row.aggregate_median_us;
        rj["aggregate_std_us"] = row.aggregate_std_us;
        rj["end_to_end_median_us"] = row.end_to_end_median_us;
        rj["end_to_end_std_us"] = row.end_to_end_std_us;
        rows_json.push_back(std::move(rj));
    }
    j["rows"] = std::move(rows_json);
    return j;
}

void write_timing_outputs(const TimingTable& table, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::ofstream(out_dir + "/timing.json") << table.to_json().dump(2) << '\n';
    std::ofstream csv(out_dir + "/timing.csv");
    csv << "estimator," << table.axis
        << ",aggregate_median_us,aggregate_std_us,end_to_end_median_us,end_to_end_std_us\n";
    for (const auto& row : table.rows) {
        csv << row.estimator << ',' << row.value << ',' << row.aggregate_median_us << ','
            << row.aggregate_std_us << ',' << row.end_to_end_median_us << ','
            << row.end_to_end_std_us << '\n';
    }
}

Bounds2D data_bounds(const Dataset& data, double margin) {
    if (data.cols() != 2) fail(ErrorCode::shape, "bounds need a two-dimensional dataset");
    Bounds2D b{data.feature(0, 0), data.feature(0, 0), data.feature(0, 1), data.feature(0, 1)};
    for (std::size_t i = 0; i < data.rows(); ++i) {
        b.x1_min = std::min(b.x1_min, data.feature(i, 0));
        b.x1_max = std::max(b.x1_max, data.feature(i, 0));
        b.x2_min = std::min(b.x2_min, data.feature(i, 1));
        b.x2_max = std::max(b.x2_max, data.feature(i, 1));
    }
    b.x1_min -= margin;
    b.x1_max += margin;
    b.x2_min -= margin;
    b.x2_max += margin;
    return b;
}

void export_decision_boundary(const std::function<double(std::span<const double>)>& classifier,
                              std::size_t dimension, const Bounds2D& bounds,
                              std::size_t resolution, const std::string& out_path) {
    if (dimension != 2) {
        fail(ErrorCode::shape, "decision boundaries need a classifier trained on 2-d inputs; got " +
                                   std::to_string(dimension));
    }
    if (resolution < 2) fail(ErrorCode::invalid_argument, "grid resolution must be at least 2");
    if (!(bounds.x1_max > bounds.x1_min) || !(bounds.x2_max > bounds.x2_min)) {
        fail(ErrorCode::invalid_argument, "degenerate boundary rectangle");
    }
    std::ofstream out(out_path);
    if (!out) fail(ErrorCode::io, "cannot open '" + out_path + "' for writing");
    out << "x1,x2,label\n";
    char buf[96];
    const double step1 = (bounds.x1_max - bounds.x1_min) / static_cast<double>(resolution - 1);
    const double step2 = (bounds.x2_max - bounds.x2_min) / static_cast<double>(resolution - 1);
    for (std::size_t i = 0; i < resolution; ++i) {
        const double x1 = bounds.x1_min + step1 * static_cast<double>(i);
        for (std::size_t jj = 0; jj < resolution; ++jj) {
            const double x2 = bounds.x2_min + step2 * static_cast<double>(jj);
            const double point[2] = {x1, x2};
            const double label = classifier(std::span<const double>(point, 2));
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", x1, x2, label);
            out << buf;
        }
    }
}

void export_decision_boundary(const Aggregator& aggregator, const AggregatorConfig& config,
                              const Bounds2D& bounds, std::size_t resolution,
                              const std::string& out_path) {
    export_decision_boundary(
        [&](std::span<const double> x) {
            return aggregator.predict(EstimatorKind::classifier, config, x);
        },
        aggregator.dimension(), bounds, resolution, out_path);
}

void export_decision_boundary(const TrainedMachine& machine, const Bounds2D& bounds,
                              std::size_t resolution, const std::string& out_path) {
    export_decision_boundary([&](std::span<const double> x) { return machine.predict(x); },
                             machine.model->dimension(), bounds, resolution, out_path);
}

}  // namespace cobra
