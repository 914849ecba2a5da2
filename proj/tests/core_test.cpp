#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cobra/dataset.hpp"
#include "cobra/machines.hpp"
#include "cobra/prediction.hpp"
#include "cobra/rng.hpp"

using namespace cobra;

namespace {

Dataset toy_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> features(n * d);
    std::vector<double> targets(n);
    for (auto& f : features) f = rng.normal();
    for (auto& t : targets) t = rng.normal();
    return Dataset(n, d, std::move(features), std::move(targets));
}

std::vector<double> sorted_rows_key(const Dataset& data) {
    std::vector<double> keys;
    for (std::size_t i = 0; i < data.rows(); ++i) {
        double key = data.target(i);
        for (std::size_t j = 0; j < data.cols(); ++j) key += 1000.0 * data.feature(i, j);
        keys.push_back(key);
    }
    std::sort(keys.begin(), keys.end());
    return keys;
}

}  // namespace

TEST_CASE("dataset validates shape and finiteness") {
    CHECK_THROWS_AS(Dataset(0, 1, {}), Error);
    CHECK_THROWS_AS(Dataset(1, 2, {1.0}), Error);
    CHECK_THROWS_AS(Dataset(1, 1, {std::numeric_limits<double>::quiet_NaN()}), Error);
    CHECK_THROWS_AS(Dataset(1, 1, {1.0}, std::vector<double>{1.0, 2.0}), Error);
    CHECK_THROWS_AS(Dataset(1, 1, {1.0}, std::vector<double>{
                                             std::numeric_limits<double>::infinity()}),
                    Error);
    const Dataset ok(2, 1, {1.0, 2.0}, std::vector<double>{3.0, 4.0});
    CHECK(ok.rows() == 2);
    CHECK(ok.cols() == 1);
    CHECK(ok.target(1) == 4.0);
}

TEST_CASE("split produces the requested sizes") {
    const Dataset data = toy_dataset(10, 3, 1);
    const SplitPair split = split_dataset(data, 5, 7);
    CHECK(split.k == 5);
    CHECK(split.ell == 5);
    CHECK(split.train_half.rows() == 5);
    CHECK(split.retained_half.rows() == 5);
}

TEST_CASE("split rejects degenerate sizes") {
    const Dataset data = toy_dataset(10, 2, 2);
    CHECK_THROWS_AS(split_dataset(data, 10, 1), Error);
    CHECK_THROWS_AS(split_dataset(data, 0, 1), Error);
    try {
        split_dataset(data, 10, 1);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::invalid_split);
    }
}

TEST_CASE("split is deterministic under the seed") {
    const Dataset data = toy_dataset(30, 2, 3);
    const SplitPair a = split_dataset(data, 11, 99);
    const SplitPair b = split_dataset(data, 11, 99);
    CHECK(a.train_half.feature_data() == b.train_half.feature_data());
    CHECK(a.retained_half.feature_data() == b.retained_half.feature_data());
    CHECK(a.train_half.targets() == b.train_half.targets());

    const SplitPair c = split_dataset(data, 11, 100);
    CHECK(a.train_half.feature_data() != c.train_half.feature_data());
}

TEST_CASE("split partitions the source rows") {
    const Dataset data = toy_dataset(23, 2, 4);
    const SplitPair split = split_dataset(data, 9, 5);

    std::vector<double> combined_keys;
    for (const Dataset* half : {&split.train_half, &split.retained_half}) {
        for (std::size_t i = 0; i < half->rows(); ++i) {
            double key = half->target(i);
            for (std::size_t j = 0; j < half->cols(); ++j) key += 1000.0 * half->feature(i, j);
            combined_keys.push_back(key);
        }
    }
    std::sort(combined_keys.begin(), combined_keys.end());
    CHECK(combined_keys == sorted_rows_key(data));
}

TEST_CASE("default split size is the ceiling half") {
    CHECK(default_split_size(10) == 5);
    CHECK(default_split_size(11) == 6);
    CHECK(default_split_size(1) == 1);
}

TEST_CASE("prediction matrix matches per-point machine calls") {
    const Dataset train = toy_dataset(20, 2, 5);
    const Dataset points = toy_dataset(3, 2, 6);
    std::vector<TrainedMachine> machines;
    MachineSpec ridge;
    ridge.kind = MachineKind::ridge;
    machines.push_back(fit_machine(ridge, train));
    MachineSpec knn;
    knn.kind = MachineKind::knn;
    knn.params["neighbors"] = 3;
    machines.push_back(fit_machine(knn, train));

    const PredictionMatrix matrix = build_prediction_matrix(machines, points);
    REQUIRE(matrix.machine_count() == 2);
    REQUIRE(matrix.point_count() == 3);
    for (std::size_t m = 0; m < 2; ++m) {
        for (std::size_t i = 0; i < 3; ++i) {
            CHECK(matrix.at(m, i) == machine_predict(machines[m], points.row(i)));
        }
    }
}

TEST_CASE("constant machine fills the matrix with its value") {
    const Dataset points = toy_dataset(4, 2, 7);
    std::vector<TrainedMachine> machines;
    machines.push_back(external_machine("constant", 2, [](std::span<const double>) {
        return 3.0;
    }));
    const PredictionMatrix matrix = build_prediction_matrix(machines, points);
    for (std::size_t i = 0; i < 4; ++i) CHECK(matrix.at(0, i) == 3.0);
}

TEST_CASE("empty ensemble is rejected") {
    const Dataset points = toy_dataset(4, 2, 8);
    std::vector<TrainedMachine> machines;
    try {
        build_prediction_matrix(machines, points);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::empty_ensemble);
    }
}

TEST_CASE("non-finite machine output names the machine") {
    const Dataset points = toy_dataset(4, 2, 9);
    std::vector<TrainedMachine> machines;
    machines.push_back(external_machine("bad-machine", 2, [](std::span<const double>) {
        return std::numeric_limits<double>::quiet_NaN();
    }));
    try {
        build_prediction_matrix(machines, points);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::machine_output);
        CHECK(std::string(e.what()).find("bad-machine") != std::string::npos);
    }
}
