#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "cobra/datagen.hpp"
#include "cobra/tuning.hpp"

using namespace cobra;

namespace {

Dataset friedman(std::size_t n, std::uint64_t seed) {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::friedman1;
    spec.n = n;
    spec.d = 5;
    spec.noise = 1.0;
    spec.seed = seed;
    return generate(spec);
}

std::vector<MachineSpec> small_roster() {
    std::vector<MachineSpec> roster(2);
    roster[0].kind = MachineKind::ridge;
    roster[1].kind = MachineKind::knn;
    roster[1].params["neighbors"] = 5;
    return roster;
}

GridSpec list_grid(const std::string& name, std::vector<double> values) {
    GridSpec g;
    g.parameter = name;
    g.candidates = std::move(values);
    return g;
}

}  // namespace

TEST_CASE("grid parsing covers the documented forms") {
    const GridSpec log = GridSpec::parse("lambda=log:1e-3:1e3:50");
    CHECK(log.parameter == "lambda");
    CHECK(log.candidates.size() == 50);
    CHECK(log.candidates.front() == doctest::Approx(1e-3));
    CHECK(log.candidates.back() == doctest::Approx(1e3));

    const GridSpec lin = GridSpec::parse("epsilon=lin:0.5:2.5:5");
    CHECK(lin.candidates == std::vector<double>{0.5, 1.0, 1.5, 2.0, 2.5});

    const GridSpec list = GridSpec::parse("alpha=list:2,1,3");
    CHECK(list.candidates == std::vector<double>{1.0, 2.0, 3.0});

    const GridSpec aut = GridSpec::parse("epsilon=auto:25");
    CHECK(aut.data_dependent);
    CHECK(aut.count == 25);

    CHECK_THROWS_AS(GridSpec::parse("rho=list:1"), Error);
    CHECK_THROWS_AS(GridSpec::parse("lambda=log:1e-3:1e3"), Error);
    CHECK_THROWS_AS(GridSpec::parse("alpha=list:0.5"), Error);
}

TEST_CASE("a single candidate is returned as best") {
    const Dataset data = friedman(80, 3);
    const AggregatorConfig base;
    const auto result = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                    {list_grid("lambda", {0.7})}, data, 3, 9);
    CHECK(result.best.at("lambda") == 0.7);
    CHECK(result.table.size() == 1);
    CHECK(result.best_loss == result.table[0].mean_loss);
}

TEST_CASE("argmin picks the candidate with the lowest mean loss") {
    const Dataset data = friedman(120, 5);
    const AggregatorConfig base;
    const auto result = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                    {list_grid("lambda", {0.0, 0.1, 1.0, 10.0})}, data, 4, 11);
    double best_seen = std::numeric_limits<double>::infinity();
    for (const auto& candidate : result.table) {
        if (candidate.feasible) best_seen = std::min(best_seen, candidate.mean_loss);
    }
    CHECK(result.best_loss == best_seen);
    // the selected parameters' row matches the reported best loss
    for (const auto& candidate : result.table) {
        if (candidate.params == result.best) CHECK(candidate.mean_loss == result.best_loss);
    }
}

TEST_CASE("grid search is deterministic under the seed") {
    const Dataset data = friedman(100, 7);
    const AggregatorConfig base;
    const std::vector<GridSpec> grids = {list_grid("lambda", {0.01, 0.1, 1.0})};
    const auto a = grid_search(EstimatorKind::kernelcobra, base, small_roster(), grids, data, 3, 5);
    const auto b = grid_search(EstimatorKind::kernelcobra, base, small_roster(), grids, data, 3, 5);
    CHECK(a.best == b.best);
    REQUIRE(a.table.size() == b.table.size());
    for (std::size_t i = 0; i < a.table.size(); ++i) {
        CHECK(a.table[i].mean_loss == b.table[i].mean_loss);
        CHECK(a.table[i].std_loss == b.table[i].std_loss);
    }
}

TEST_CASE("reported best loss equals a fresh evaluation of the best parameters") {
    const Dataset data = friedman(150, 59);
    const AggregatorConfig base;
    const auto full = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                  {list_grid("lambda", {0.05, 0.5, 5.0, 50.0})}, data, 4, 61);
    // rerunning with only the winner and the same seed must reproduce the loss
    const auto single = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                    {list_grid("lambda", {full.best.at("lambda")})}, data, 4, 61);
    CHECK(single.best_loss == full.best_loss);
}

TEST_CASE("adding a dominated candidate never changes the selection") {
    const Dataset data = friedman(100, 13);
    const AggregatorConfig base;
    const auto narrow = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                    {list_grid("lambda", {0.1, 1.0})}, data, 3, 6);
    // lambda so large that weights collapse onto single points: dominated here
    const auto wide = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                  {list_grid("lambda", {0.1, 1.0, 1e9})}, data, 3, 6);
    const double dominated_loss = wide.table.back().mean_loss;
    if (dominated_loss > narrow.best_loss) {
        CHECK(wide.best == narrow.best);
        CHECK(wide.best_loss == narrow.best_loss);
    }
}

TEST_CASE("selected lambda is never worse than the lambda-zero global mean") {
    const Dataset data = friedman(400, 17);
    const AggregatorConfig base;
    std::vector<double> lambdas = GridSpec::log_range(1e-3, 1e3, 25);
    lambdas.insert(lambdas.begin(), 0.0);
    const auto result = grid_search(EstimatorKind::kernelcobra, base, small_roster(),
                                    {list_grid("lambda", lambdas)}, data, 5, 19);
    const TuneCandidate* zero_row = nullptr;
    for (const auto& candidate : result.table) {
        if (candidate.params.at("lambda") == 0.0) zero_row = &candidate;
    }
    REQUIRE(zero_row != nullptr);
    CHECK(result.best_loss <= zero_row->mean_loss);
    CHECK(result.best.at("lambda") > 0.0);  // uniform weights lose on this data
}

TEST_CASE("epsilon auto-grid comes from the prediction spread") {
    const Dataset data = friedman(120, 23);
    AggregatorConfig base;
    base.uniform_fallback = false;
    GridSpec eps;
    eps.parameter = "epsilon";
    eps.data_dependent = true;
    eps.count = 20;
    const auto result =
        grid_search(EstimatorKind::cobra, base, small_roster(), {eps}, data, 3, 29);
    CHECK(result.table.size() == 20);
    CHECK(result.best.count("epsilon") == 1);
    CHECK(result.best.at("epsilon") > 0.0);
}

TEST_CASE("cross-product grids tune alpha alongside epsilon") {
    const Dataset data = friedman(100, 31);
    const AggregatorConfig base;
    GridSpec eps = list_grid("epsilon", {0.5, 1.0, 2.0, 4.0});
    GridSpec alpha;
    alpha.parameter = "alpha";
    alpha.data_dependent = true;
    const auto result =
        grid_search(EstimatorKind::cobra, base, small_roster(), {eps, alpha}, data, 3, 37);
    CHECK(result.table.size() == 8);  // 4 epsilons x 2 machines
    CHECK(result.best.count("alpha") == 1);
}

TEST_CASE("classifier tuning uses the misclassification loss") {
    GeneratorSpec spec;
    spec.kind = GeneratorKind::moons;
    spec.n = 150;
    spec.d = 2;
    spec.noise = 0.2;
    spec.seed = 41;
    const Dataset data = generate(spec);

    std::vector<MachineSpec> roster(2);
    roster[0].kind = MachineKind::knn_classifier;
    roster[0].params["neighbors"] = 5;
    roster[1].kind = MachineKind::decision_tree_classifier;
    roster[1].params["max_depth"] = 6;

    const AggregatorConfig base;
    const auto result = grid_search(EstimatorKind::classifier, base, roster,
                                    {list_grid("lambda", {0.1, 1.0, 10.0})}, data, 3, 43);
    CHECK(result.loss_name == "misclassification");
    CHECK(result.best_loss >= 0.0);
    CHECK(result.best_loss <= 0.5);
}

TEST_CASE("comparison report is self-consistent") {
    const Dataset data = friedman(60, 47);
    std::vector<NamedPredictor> models;
    models.push_back({"truth", [&](std::span<const double> x) {
                          return friedman1_response(x);
                      }});
    models.push_back({"truth-again", [&](std::span<const double> x) {
                          return friedman1_response(x);
                      }});
    models.push_back({"mean-zero", [](std::span<const double>) { return 0.0; }});

    const ErrorReport report = compare_estimators(models, data);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].abs_errors == report.rows[1].abs_errors);
    CHECK(report.rows[0].rmse == report.rows[1].rmse);

    for (const auto& row : report.rows) {
        double sq = 0.0;
        for (double v : row.sq_errors) sq += v;
        const double recomputed = std::sqrt(sq / static_cast<double>(row.sq_errors.size()));
        CHECK(row.rmse == doctest::Approx(recomputed).epsilon(1e-12));
    }
}

TEST_CASE("a perfect predictor scores zero error on its own targets") {
    const Dataset data = friedman(50, 53);
    std::vector<NamedPredictor> models;
    models.push_back({"oracle", [&](std::span<const double> x) {
                          return friedman1_response(x) == 0.0 ? 0.0 : friedman1_response(x);
                      }});
    // friedman targets carry noise 1.0, so compare against a noise-free copy
    GeneratorSpec spec;
    spec.kind = GeneratorKind::friedman1;
    spec.n = 50;
    spec.d = 5;
    spec.noise = 0.0;
    spec.seed = 53;
    const Dataset clean = generate(spec);
    const ErrorReport report = compare_estimators(models, clean);
    for (double v : report.rows[0].abs_errors) CHECK(v == 0.0);
    CHECK(report.rows[0].rmse == 0.0);
}
