#include <doctest.h>

#include <cmath>
#include <vector>

#include "cobra/aggregation.hpp"
#include "cobra/rng.hpp"

using namespace cobra;

namespace {

PredictionMatrix matrix_of(std::size_t machines, std::size_t points, std::vector<double> values) {
    return PredictionMatrix(machines, points, std::move(values));
}

// Small seeded problem shared by the predict-path checks.
struct Fixture {
    Aggregator aggregator;

    static Fixture make(std::uint64_t seed, std::size_t n = 50) {
        Rng rng(seed);
        std::vector<double> features(n);
        std::vector<double> targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            features[i] = rng.uniform(-2.0, 2.0);
            targets[i] = std::sin(features[i]) + 0.1 * rng.normal();
        }
        Dataset data(n, 1, std::move(features), std::move(targets));
        SplitPair split = split_dataset(data, n / 2, seed + 1);
        std::vector<TrainedMachine> machines;
        MachineSpec ridge;
        ridge.kind = MachineKind::ridge;
        machines.push_back(fit_machine(ridge, split.train_half));
        MachineSpec knn;
        knn.kind = MachineKind::knn;
        knn.params["neighbors"] = 3;
        machines.push_back(fit_machine(knn, split.train_half));
        MachineSpec tree;
        tree.kind = MachineKind::decision_tree;
        tree.params["max_depth"] = 4;
        machines.push_back(fit_machine(tree, split.train_half));
        return Fixture{Aggregator(std::move(machines), std::move(split))};
    }
};

}  // namespace

TEST_CASE("exponential weights: frozen two-point example") {
    const auto preds = matrix_of(1, 2, {0.0, 1.0});
    const double query[1] = {0.0};

    SUBCASE("lambda zero equalizes") {
        const auto w = kernelcobra_weights(preds, query, 0.0);
        CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("lambda one reproduces the closed form") {
        // 1/(1+e^-1) and e^-1/(1+e^-1)
        const auto w = kernelcobra_weights(preds, query, 1.0);
        CHECK(w[0] == doctest::Approx(0.7310585786300049).epsilon(1e-13));
        CHECK(w[1] == doctest::Approx(0.2689414213699951).epsilon(1e-13));
    }
}

TEST_CASE("exponential weights: identical predictions give uniform weights") {
    const auto preds = matrix_of(2, 3, {4.0, 4.0, 4.0, -1.0, -1.0, -1.0});
    const double query[2] = {4.0, -1.0};
    const auto w = kernelcobra_weights(preds, query, 3.5);
    for (double v : w) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("exponential weights survive huge temperatures") {
    const auto preds = matrix_of(1, 3, {0.0, 5.0, 9.0});
    const double query[1] = {0.1};
    const auto w = kernelcobra_weights(preds, query, 1e6);
    CHECK(w[0] == doctest::Approx(1.0));
    CHECK(w[1] == 0.0);
    CHECK(w[2] == 0.0);
    double total = 0.0;
    for (double v : w) total += v;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("general kernel weights: uniform when every pair is inside the radius") {
    const auto preds = matrix_of(2, 4, {0.0, 0.1, 0.2, 0.3, 1.0, 1.1, 1.2, 1.3});
    const double query[2] = {0.15, 1.15};
    const auto w = general_kernel_weights(preds, query, KernelSpec{KernelKind::threshold, 0.5});
    for (double v : w) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("general kernel weights: symmetric pair shares the mass") {
    const auto preds = matrix_of(1, 2, {1.0, 3.0});
    const double query[1] = {2.0};
    const auto w = general_kernel_weights(preds, query, KernelSpec{KernelKind::gaussian, 0.8});
    CHECK(w[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("general kernel weights coincide with exponential weights for one machine") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t ell = 2 + rng.bounded(6);
        std::vector<double> row(ell);
        for (auto& v : row) v = rng.uniform(-2.0, 2.0);
        const auto preds = matrix_of(1, ell, row);
        const double lambda = rng.uniform(0.01, 4.0);
        const double query[1] = {rng.uniform(-2.0, 2.0)};

        const auto via_exp = kernelcobra_weights(preds, query, lambda);
        const auto via_kernel =
            general_kernel_weights(preds, query, KernelSpec{KernelKind::exponential, lambda});
        for (std::size_t i = 0; i < ell; ++i) {
            CHECK(std::abs(via_exp[i] - via_kernel[i]) <= 1e-12);
        }
    }
}

TEST_CASE("general kernel weights report no consensus on all-zero scores") {
    const auto preds = matrix_of(1, 2, {0.0, 10.0});
    const double query[1] = {5.0};
    const KernelSpec narrow{KernelKind::threshold, 0.5};
    try {
        general_kernel_weights(preds, query, narrow);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_consensus);
    }
    const auto w = general_kernel_weights(preds, query, narrow, true);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
}

TEST_CASE("indicator weights: intersection keeps only full agreement") {
    // point 0 close under both machines, point 1 off under the second
    const auto preds = matrix_of(2, 2, {0.1, 0.2, 1.0, 2.0});
    const double query[2] = {0.0, 1.0};
    const auto w = cobra_weights(preds, query, 0.5, 2);
    CHECK(w[0] == 1.0);
    CHECK(w[1] == 0.0);

    SUBCASE("relaxed agreement count brings the point back") {
        const auto relaxed = cobra_weights(preds, query, 0.5, 1);
        CHECK(relaxed[0] == 0.5);
        CHECK(relaxed[1] == 0.5);
    }
}

TEST_CASE("indicator weights: two selected points split the mass") {
    const auto preds = matrix_of(1, 2, {0.1, -0.1});
    const double query[1] = {0.0};
    const auto w = cobra_weights(preds, query, 0.2, 1);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
}

TEST_CASE("indicator weights: empty selection raises no-consensus") {
    const auto preds = matrix_of(1, 2, {5.0, -5.0});
    const double query[1] = {0.0};
    try {
        cobra_weights(preds, query, 0.5, 1);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::no_consensus);
    }
    const auto w = cobra_weights(preds, query, 0.5, 1, true);
    CHECK(w[0] == 0.5);
    CHECK(w[1] == 0.5);
}

TEST_CASE("indicator weights take values only in {0, 1/s}") {
    Rng rng(33);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m_count = 1 + rng.bounded(4);
        const std::size_t ell = 1 + rng.bounded(8);
        std::vector<double> values(m_count * ell);
        for (auto& v : values) v = rng.uniform(-1.0, 1.0);
        const auto preds = matrix_of(m_count, ell, values);
        std::vector<double> query(m_count);
        for (auto& q : query) q = rng.uniform(-1.0, 1.0);
        const double epsilon = rng.uniform(0.05, 2.0);
        const auto alpha = static_cast<int>(1 + rng.bounded(m_count));
        std::vector<double> w;
        try {
            w = cobra_weights(preds, query, epsilon, alpha);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::no_consensus);
            continue;
        }
        std::size_t selected = 0;
        for (double v : w) {
            if (v > 0.0) ++selected;
        }
        const double share = 1.0 / static_cast<double>(selected);
        for (double v : w) CHECK((v == 0.0 || v == share));
    }
}

TEST_CASE("mixcobra weights reduce to the exponential weights when the input term is off") {
    Rng rng(35);
    const std::size_t ell = 6;
    std::vector<double> features(ell * 2);
    for (auto& f : features) f = rng.normal();
    const Dataset inputs(ell, 2, features, std::vector<double>(ell, 0.0));
    std::vector<double> values(2 * ell);
    for (auto& v : values) v = rng.uniform(-1.0, 1.0);
    const auto preds = matrix_of(2, ell, values);
    const double query_preds[2] = {0.2, -0.3};
    const double query_input[2] = {0.5, 0.5};

    const auto mix = mixcobra_weights(inputs, query_input, preds, query_preds, 0.0, 1.3);
    const auto plain = kernelcobra_weights(preds, query_preds, 1.3);
    for (std::size_t i = 0; i < ell; ++i) CHECK(std::abs(mix[i] - plain[i]) <= 1e-12);

    SUBCASE("both terms off gives uniform") {
        const auto uniform = mixcobra_weights(inputs, query_input, preds, query_preds, 0.0, 0.0);
        for (double v : uniform) {
            CHECK(v == doctest::Approx(1.0 / static_cast<double>(ell)).epsilon(1e-15));
        }
    }
}

TEST_CASE("mixcobra puts the peak on a coincident input when predictions tie") {
    const std::size_t ell = 3;
    const std::vector<double> features = {0.0, 0.0, 1.0, 1.0, 2.0, 2.0};
    const Dataset inputs(ell, 2, features, std::vector<double>(ell, 0.0));
    const auto preds = matrix_of(1, ell, {1.0, 1.0, 1.0});
    const double query_preds[1] = {1.0};
    const double query_input[2] = {0.0, 0.0};
    const auto w = mixcobra_weights(inputs, query_input, preds, query_preds, 2.0, 1.0);
    CHECK(w[0] > w[1]);
    CHECK(w[1] > w[2]);
}

TEST_CASE("regression aggregation is the weighted target average") {
    const std::vector<double> y = {2.0, 4.0};
    CHECK(aggregate_regression(std::vector<double>{0.5, 0.5}, y) == 3.0);
    CHECK(aggregate_regression(std::vector<double>{1.0, 0.0}, y) == 2.0);
    const std::vector<double> y2 = {0.0, 8.0};
    CHECK(aggregate_regression(std::vector<double>{0.25, 0.75}, y2) == 6.0);
    CHECK_THROWS_AS(static_cast<void>(aggregate_regression(std::vector<double>{1.0}, y)), Error);
}

TEST_CASE("unsupervised aggregation blends machine predictions") {
    const auto preds = matrix_of(2, 2, {1.0, 3.0, 3.0, 5.0});
    const std::vector<double> machine_weights = {0.5, 0.5};
    const std::vector<double> point_weights = {0.25, 0.75};
    CHECK(aggregate_unsupervised(point_weights, machine_weights, preds) ==
          doctest::Approx(3.5).epsilon(1e-15));

    SUBCASE("constant machines collapse to the constant") {
        const auto constant = matrix_of(2, 3, {7.0, 7.0, 7.0, 7.0, 7.0, 7.0});
        const std::vector<double> pw = {0.2, 0.3, 0.5};
        CHECK(aggregate_unsupervised(pw, machine_weights, constant) ==
              doctest::Approx(7.0).epsilon(1e-12));
    }
    SUBCASE("single point carries all the mass") {
        const auto single = matrix_of(2, 1, {2.0, 6.0});
        CHECK(aggregate_unsupervised(std::vector<double>{1.0}, machine_weights, single) == 4.0);
    }
    SUBCASE("machine weights must sum to one") {
        try {
            aggregate_unsupervised(point_weights, std::vector<double>{0.5, 0.6}, preds);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::invalid_weights);
        }
    }
}

TEST_CASE("binary vote sends an exact tie to class 1") {
    const std::vector<double> tie_weights = {0.5, 0.5};
    const std::vector<double> labels = {1.0, 0.0};
    CHECK(classify_binary(tie_weights, labels) == 1);
    CHECK(classify_binary(std::vector<double>{0.7, 0.3}, labels) == 1);
    CHECK(classify_binary(std::vector<double>{0.3, 0.7}, labels) == 0);
    CHECK(classify_binary(std::vector<double>{0.5, 0.5}, std::vector<double>{0.0, 0.0}) == 0);
    try {
        classify_binary(tie_weights, std::vector<double>{2.0, 0.0});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::label);
    }
}

TEST_CASE("multiclass vote breaks ties toward the smallest label") {
    const std::vector<double> w = {0.2, 0.3, 0.5};
    const std::vector<double> labels = {1.0, 1.0, 2.0};
    CHECK(classify_multiclass(w, labels) == 1.0);  // 0.5 vs 0.5
    CHECK(classify_multiclass(std::vector<double>{0.1, 0.2, 0.7},
                              std::vector<double>{0.0, 1.0, 2.0}) == 2.0);
    CHECK(classify_multiclass(std::vector<double>{1.0}, std::vector<double>{5.0}) == 5.0);
}

TEST_CASE("predict with lambda zero returns the retained target mean") {
    const Fixture fx = Fixture::make(41);
    AggregatorConfig config;
    config.lambda = 0.0;
    const auto& targets = fx.aggregator.split().retained_half.targets();
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    const double q[1] = {0.3};
    CHECK(fx.aggregator.predict(EstimatorKind::kernelcobra, config, q) ==
          doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("predict with a huge consensus radius returns the retained target mean") {
    const Fixture fx = Fixture::make(43);
    AggregatorConfig config;
    config.epsilon = 1e9;
    const auto& targets = fx.aggregator.split().retained_half.targets();
    double mean = 0.0;
    for (double t : targets) mean += t;
    mean /= static_cast<double>(targets.size());
    const double q[1] = {-0.8};
    CHECK(fx.aggregator.predict(EstimatorKind::cobra, config, q) ==
          doctest::Approx(mean).epsilon(1e-12));
}

TEST_CASE("predict matches a direct transliteration of the exponential-weight loop") {
    const Fixture fx = Fixture::make(47);
    AggregatorConfig config;
    config.lambda = 1.0;
    Rng rng(48);
    for (int trial = 0; trial < 10; ++trial) {
        const double q[1] = {rng.uniform(-2.0, 2.0)};
        const double via_predict = fx.aggregator.predict(EstimatorKind::kernelcobra, config, q);

        // straight-line re-implementation over machines and retained points
        const auto& machines = fx.aggregator.machines();
        const auto& retained = fx.aggregator.split().retained_half;
        std::vector<double> weights(retained.rows());
        double denom = 0.0;
        for (std::size_t i = 0; i < retained.rows(); ++i) {
            double sum = 0.0;
            for (const auto& machine : machines) {
                sum += std::abs(machine.predict(retained.row(i)) - machine.predict(q));
            }
            weights[i] = std::exp(-config.lambda * sum);
            denom += weights[i];
        }
        double expected = 0.0;
        for (std::size_t i = 0; i < retained.rows(); ++i) {
            expected += weights[i] / denom * retained.target(i);
        }
        CHECK(via_predict == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("weights are normalized, nonnegative and permutation-equivariant") {
    Rng rng(49);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t m_count = 1 + rng.bounded(3);
        const std::size_t ell = 2 + rng.bounded(6);
        std::vector<double> values(m_count * ell);
        for (auto& v : values) v = rng.uniform(-1.0, 1.0);
        const auto preds = matrix_of(m_count, ell, values);
        std::vector<double> query(m_count);
        for (auto& q : query) q = rng.uniform(-1.0, 1.0);
        const double lambda = rng.uniform(0.0, 5.0);
        const auto w = kernelcobra_weights(preds, query, lambda);

        double total = 0.0;
        for (double v : w) {
            CHECK(v >= 0.0);
            total += v;
        }
        CHECK(std::abs(total - 1.0) <= 1e-9);

        // rotate the retained points by one position
        std::vector<double> rotated(m_count * ell);
        for (std::size_t m = 0; m < m_count; ++m) {
            for (std::size_t i = 0; i < ell; ++i) {
                rotated[m * ell + (i + 1) % ell] = values[m * ell + i];
            }
        }
        const auto w_rot = kernelcobra_weights(matrix_of(m_count, ell, rotated), query, lambda);
        for (std::size_t i = 0; i < ell; ++i) {
            CHECK(std::abs(w_rot[(i + 1) % ell] - w[i]) <= 1e-12);
        }
    }
}

TEST_CASE("unsupervised prediction ignores retained targets bitwise") {
    const Fixture fx = Fixture::make(51);
    AggregatorConfig config;
    config.lambda = 0.7;

    const SplitPair& split = fx.aggregator.split();
    std::vector<double> scrambled = split.retained_half.targets();
    for (auto& t : scrambled) t = -t * 13.0 + 5.0;
    Dataset altered(split.retained_half.rows(), split.retained_half.cols(),
                    split.retained_half.feature_data(), std::move(scrambled));
    SplitPair altered_split{split.train_half, std::move(altered), split.k, split.ell};
    Aggregator other(fx.aggregator.machines(), std::move(altered_split));

    Rng rng(52);
    for (int trial = 0; trial < 10; ++trial) {
        const double q[1] = {rng.uniform(-2.0, 2.0)};
        const double a = fx.aggregator.predict(EstimatorKind::unsupervised, config, q);
        const double b = other.predict(EstimatorKind::unsupervised, config, q);
        CHECK(a == b);  // bitwise
    }
}

TEST_CASE("classifier predict uses the binary rule on 0/1 labels") {
    Rng rng(53);
    const std::size_t n = 60;
    std::vector<double> features(n);
    std::vector<double> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        features[i] = rng.uniform(-1.0, 1.0);
        labels[i] = features[i] > 0.0 ? 1.0 : 0.0;
    }
    Dataset data(n, 1, std::move(features), std::move(labels));
    SplitPair split = split_dataset(data, n / 2, 54);
    std::vector<TrainedMachine> machines;
    MachineSpec knn;
    knn.kind = MachineKind::knn_classifier;
    knn.params["neighbors"] = 3;
    machines.push_back(fit_machine(knn, split.train_half));
    MachineSpec tree;
    tree.kind = MachineKind::decision_tree_classifier;
    machines.push_back(fit_machine(tree, split.train_half));
    Aggregator aggregator(std::move(machines), std::move(split));

    AggregatorConfig config;
    config.lambda = 2.0;
    const double far_right[1] = {0.9};
    const double far_left[1] = {-0.9};
    CHECK(aggregator.predict(EstimatorKind::classifier, config, far_right) == 1.0);
    CHECK(aggregator.predict(EstimatorKind::classifier, config, far_left) == 0.0);
}

TEST_CASE("config validation catches bad machine weights and alpha") {
    AggregatorConfig config;
    config.machine_weights = {0.5, 0.4};
    try {
        config.validate(2);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_weights);
    }
    config.machine_weights.clear();
    config.alpha = 5;
    CHECK_THROWS_AS(config.validate(2), Error);
    config.alpha = 0;
    config.lambda = -1.0;
    CHECK_THROWS_AS(config.validate(2), Error);
}
