#include <doctest.h>

#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "cobra/bench.hpp"
#include "cobra/csv.hpp"

using namespace cobra;

namespace {

BenchConfig linear_config(int runs, std::uint64_t seed) {
    BenchConfig config;
    config.runs = runs;
    config.seed = seed;
    config.split_fraction = 0.75;
    config.threads = 2;

    DatasetEntry entry;
    entry.name = "linear";
    GeneratorSpec gen;
    gen.kind = GeneratorKind::linear_gaussian;
    gen.n = 120;
    gen.d = 4;
    gen.noise = 0.0;
    entry.generator = gen;
    config.datasets.push_back(entry);

    MachineSpec ridge;
    ridge.kind = MachineKind::ridge;
    ridge.params["regularization"] = 1e-8;
    config.machines.push_back(ridge);
    MachineSpec knn;
    knn.kind = MachineKind::knn;
    knn.params["neighbors"] = 5;
    config.machines.push_back(knn);

    EstimatorEntry kc;
    kc.name = "kernelcobra";
    kc.kind = EstimatorKind::kernelcobra;
    kc.config.lambda = 0.5;
    config.estimators.push_back(kc);
    EstimatorEntry cb;
    cb.name = "cobra";
    cb.kind = EstimatorKind::cobra;
    cb.config.uniform_fallback = true;
    config.estimators.push_back(cb);
    return config;
}

std::filesystem::path temp_dir(const char* name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("noise-free linear data: ridge is near-exact and aggregates stay finite") {
    const BenchConfig config = linear_config(1, 91);
    const BenchReport report = run_rmse_benchmark(config);
    REQUIRE(report.datasets.size() == 1);
    const auto& ds = report.datasets[0];
    CHECK(ds.failures.empty());
    REQUIRE(ds.models.size() == 4);  // 2 estimators + 2 machines

    double ridge_rmse = -1.0;
    for (const auto& m : ds.models) {
        CHECK(std::isfinite(m.mean_rmse));
        if (m.model == "ridge") ridge_rmse = m.mean_rmse;
    }
    CHECK(ridge_rmse >= 0.0);
    CHECK(ridge_rmse <= 1e-6);
}

TEST_CASE("identical seeds reproduce identical raw errors") {
    const BenchReport a = run_rmse_benchmark(linear_config(2, 17));
    const BenchReport b = run_rmse_benchmark(linear_config(2, 17));
    REQUIRE(a.datasets.size() == 1);
    for (std::size_t m = 0; m < a.datasets[0].models.size(); ++m) {
        CHECK(a.datasets[0].models[m].per_run == b.datasets[0].models[m].per_run);
    }
    CHECK(a.to_json() == b.to_json());
}

TEST_CASE("report means equal the mean of their own raw values") {
    const BenchReport report = run_rmse_benchmark(linear_config(3, 29));
    for (const auto& ds : report.datasets) {
        CHECK(ds.run_indices.size() + ds.failures.size() ==
              static_cast<std::size_t>(report.runs));
        for (const auto& m : ds.models) {
            double mean = 0.0;
            for (double v : m.per_run) mean += v;
            mean /= static_cast<double>(m.per_run.size());
            CHECK(m.mean_rmse == doctest::Approx(mean).epsilon(1e-9));
        }
        bool any_best = false;
        for (const auto& m : ds.models) any_best |= m.best;
        CHECK(any_best);
    }
}

TEST_CASE("rmse outputs land on disk and reload consistently") {
    const auto dir = temp_dir("cobra_bench_out");
    const BenchReport report = run_rmse_benchmark(linear_config(2, 37));
    write_rmse_outputs(report, dir.string());
    CHECK(std::filesystem::exists(dir / "report.json"));
    CHECK(std::filesystem::exists(dir / "timings.json"));
    CHECK(std::filesystem::exists(dir / "rmse.csv"));
    CHECK(std::filesystem::exists(dir / "errors.csv"));
    CHECK_FALSE(std::filesystem::exists(dir / "failed_runs.json"));

    std::ifstream in(dir / "report.json");
    std::stringstream buffer;
    buffer << in.rdbuf();
    CHECK(Json::parse(buffer.str()) == Json::parse(report.to_json().dump(2)));
    std::filesystem::remove_all(dir);
}

TEST_CASE("failing runs are enumerated, never dropped") {
    BenchConfig config = linear_config(2, 43);
    config.estimators[1].config.uniform_fallback = false;
    config.estimators[1].config.epsilon = 1e-12;  // guarantees empty consensus sets
    const BenchReport report = run_rmse_benchmark(config);
    const auto& ds = report.datasets[0];
    CHECK(ds.failures.size() == 2);
    CHECK(ds.run_indices.empty());
    for (const auto& f : ds.failures) CHECK_FALSE(f.error.empty());

    const auto dir = temp_dir("cobra_bench_failed");
    write_rmse_outputs(report, dir.string());
    CHECK(std::filesystem::exists(dir / "failed_runs.json"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("timing sweep parser") {
    const TimingSweep d = TimingSweep::parse("d=10,100,1000");
    CHECK(d.axis == TimingSweep::Axis::dimension);
    CHECK(d.values == std::vector<std::size_t>{10, 100, 1000});
    const TimingSweep ell = TimingSweep::parse("ell=500,1000");
    CHECK(ell.axis == TimingSweep::Axis::retained);
    const TimingSweep m = TimingSweep::parse("m=2,4");
    CHECK(m.axis == TimingSweep::Axis::machines);
    CHECK_THROWS_AS(TimingSweep::parse("q=1"), Error);
    CHECK_THROWS_AS(TimingSweep::parse("d=0"), Error);
}

TEST_CASE("timing benchmark produces one row per estimator and sweep value") {
    BenchConfig config;
    config.seed = 3;
    config.timing.queries = 16;
    config.timing.reps = 3;
    config.timing.ell = 200;
    config.timing.k = 40;
    config.timing.d = 4;
    config.timing.machines = 2;
    TimingSweep sweep;
    sweep.axis = TimingSweep::Axis::retained;
    sweep.values = {100, 200};
    const TimingTable table = run_timing_benchmark(config, sweep);
    CHECK(table.axis == "ell");
    REQUIRE(table.rows.size() == 6);
    std::set<std::string> names;
    for (const auto& row : table.rows) {
        names.insert(row.estimator);
        CHECK(row.aggregate_median_us > 0.0);
        CHECK(row.end_to_end_median_us > 0.0);
    }
    CHECK(names == std::set<std::string>{"cobra", "kernelcobra", "mixcobra"});

    const auto dir = temp_dir("cobra_timing_out");
    write_timing_outputs(table, dir.string());
    CHECK(std::filesystem::exists(dir / "timing.json"));
    CHECK(std::filesystem::exists(dir / "timing.csv"));
    std::filesystem::remove_all(dir);
}

TEST_CASE("constant classifier paints a constant grid") {
    const auto path = temp_dir("cobra_boundary") / "constant.csv";
    export_decision_boundary([](std::span<const double>) { return 1.0; }, 2,
                             Bounds2D{0.0, 1.0, 0.0, 1.0}, 4, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "x1,x2,label");
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        CHECK(line.substr(line.rfind(',') + 1) == "1");
        ++rows;
    }
    CHECK(rows == 16);
    std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("resolution-3 grid covers the unit square corners and midpoints") {
    const auto path = temp_dir("cobra_boundary3") / "grid.csv";
    export_decision_boundary([](std::span<const double> x) { return x[0] > 0.5 ? 1.0 : 0.0; }, 2,
                             Bounds2D{0.0, 1.0, 0.0, 1.0}, 3, path.string());
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::set<std::pair<double, double>> seen;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        seen.insert({std::stod(line.substr(0, c1)), std::stod(line.substr(c1 + 1, c2 - c1 - 1))});
    }
    CHECK(seen.size() == 9);
    for (double a : {0.0, 0.5, 1.0}) {
        for (double b : {0.0, 0.5, 1.0}) CHECK(seen.count({a, b}) == 1);
    }
    std::filesystem::remove_all(path.parent_path());
}

TEST_CASE("moons boundary grid matches the noise-free class regions") {
    GeneratorSpec gen;
    gen.kind = GeneratorKind::moons;
    gen.n = 400;
    gen.d = 2;
    gen.noise = 0.2;
    gen.seed = 61;
    const Dataset data = generate(gen);

    const auto roster = default_classification_machines();
    AggregatorConfig base;
    const TuneResult tuned = grid_search(EstimatorKind::classifier, base, roster,
                                         {GridSpec::parse("lambda=list:0.5,2,8")}, data, 3, 62);
    const AggregatorConfig config = apply_params(base, tuned.best);

    SplitPair split = split_dataset(data, default_split_size(data.rows()), 63);
    std::vector<TrainedMachine> machines;
    for (const auto& spec : roster) machines.push_back(fit_machine(spec, split.train_half));
    const Aggregator aggregator(machines, std::move(split));

    const auto dir = temp_dir("cobra_moons_grid");
    const auto path = (dir / "grid.csv").string();
    export_decision_boundary(aggregator, config, data_bounds(data, 0.25), 40, path);

    // ground truth by proximity to the two ideal arcs
    std::vector<std::array<double, 2>> outer;
    std::vector<std::array<double, 2>> inner;
    for (int i = 0; i < 512; ++i) {
        const double t = std::numbers::pi * i / 511.0;
        outer.push_back({std::cos(t), std::sin(t)});
        inner.push_back({1.0 - std::cos(t), 1.0 - std::sin(t) - 0.5});
    }
    auto arc_distance = [](const std::vector<std::array<double, 2>>& arc, double x, double y) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& p : arc) {
            const double dx = p[0] - x;
            const double dy = p[1] - y;
            best = std::min(best, dx * dx + dy * dy);
        }
        return best;
    };

    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    std::size_t cells = 0;
    std::size_t hits = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = line.find(',', c1 + 1);
        const double x = std::stod(line.substr(0, c1));
        const double y = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
        const double label = std::stod(line.substr(c2 + 1));
        const double truth = arc_distance(outer, x, y) <= arc_distance(inner, x, y) ? 0.0 : 1.0;
        if (label == truth) ++hits;
        ++cells;
    }
    REQUIRE(cells == 1600);
    CHECK(static_cast<double>(hits) / static_cast<double>(cells) >= 0.85);
    std::filesystem::remove_all(dir);
}

TEST_CASE("boundary export rejects non-2d classifiers and tiny grids") {
    try {
        export_decision_boundary([](std::span<const double>) { return 0.0; }, 3,
                                 Bounds2D{0.0, 1.0, 0.0, 1.0}, 3, "/tmp/never.csv");
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::shape);
    }
    CHECK_THROWS_AS(export_decision_boundary([](std::span<const double>) { return 0.0; }, 2,
                                             Bounds2D{0.0, 1.0, 0.0, 1.0}, 1, "/tmp/never.csv"),
                    Error);
}

TEST_CASE("bench config json round trip and env seed override") {
    const Json j = Json::parse(R"({
        "seed": 7,
        "runs": 3,
        "split_fraction": 0.8,
        "datasets": [{"name": "f1", "generator": {"kind": "friedman1", "n": 100, "d": 5}}],
        "machines": [{"kind": "ridge"}, "lasso"],
        "estimators": [
            {"kind": "kernelcobra", "config": {"lambda": 2.0}},
            {"kind": "cobra", "tune": {"grids": ["epsilon=auto:10"], "folds": 3}}
        ]
    })");
    const BenchConfig config = BenchConfig::from_json(j);
    CHECK(config.seed == 7);
    CHECK(config.runs == 3);
    CHECK(config.machines.size() == 2);
    CHECK(config.machines[1].kind == MachineKind::lasso);
    CHECK(config.estimators[0].config.lambda == 2.0);
    CHECK(config.estimators[1].tune_grids.size() == 1);
    CHECK(config.estimators[1].tune_folds == 3);

    setenv("COBRA_SEED", "1234", 1);
    const BenchConfig overridden = BenchConfig::from_json(j);
    unsetenv("COBRA_SEED");
    CHECK(overridden.seed == 1234);
}
