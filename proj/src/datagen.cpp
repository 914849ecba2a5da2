#include "cobra/datagen.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "cobra/rng.hpp"

namespace cobra {

GeneratorKind parse_generator_kind(std::string_view name) {
    if (name == "linear-gaussian") return GeneratorKind::linear_gaussian;
    if (name == "friedman1") return GeneratorKind::friedman1;
    if (name == "sparse-uncorrelated") return GeneratorKind::sparse_uncorrelated;
    if (name == "moons") return GeneratorKind::moons;
    if (name == "circles") return GeneratorKind::circles;
    if (name == "linearly-separable") return GeneratorKind::linearly_separable;
    fail(ErrorCode::config, "unknown generator kind '" + std::string(name) + "'");
}

std::string_view generator_kind_name(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::linear_gaussian: return "linear-gaussian";
        case GeneratorKind::friedman1: return "friedman1";
        case GeneratorKind::sparse_uncorrelated: return "sparse-uncorrelated";
        case GeneratorKind::moons: return "moons";
        case GeneratorKind::circles: return "circles";
        case GeneratorKind::linearly_separable: return "linearly-separable";
    }
    return "?";
}

void GeneratorSpec::validate() const {
    if (n == 0) fail(ErrorCode::invalid_argument, "generator needs n >= 1");
    if (!(noise >= 0.0) || !std::isfinite(noise)) {
        fail(ErrorCode::invalid_argument, "generator noise must be finite and nonnegative");
    }
    switch (kind) {
        case GeneratorKind::friedman1:
            if (d < 5) fail(ErrorCode::invalid_argument, "friedman1 needs d >= 5");
            break;
        case GeneratorKind::sparse_uncorrelated:
            if (d < 4) fail(ErrorCode::invalid_argument, "sparse-uncorrelated needs d >= 4");
            break;
        case GeneratorKind::moons:
        case GeneratorKind::circles:
            if (d != 2) fail(ErrorCode::invalid_argument, "moons/circles are two-dimensional");
            break;
        default:
            if (d == 0) fail(ErrorCode::invalid_argument, "generator needs d >= 1");
            break;
    }
}

double friedman1_response(std::span<const double> x) {
    return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * (x[2] - 0.5) * (x[2] - 0.5) +
           10.0 * x[3] + 5.0 * x[4];
}

double sparse_uncorrelated_response(std::span<const double> x) {
    return x[0] + 2.0 * x[1] - 2.0 * x[2] - 1.5 * x[3];
}

std::vector<double> linear_gaussian_coefficients(const GeneratorSpec& spec) {
    Rng rng(spec.seed);
    const std::size_t informative = (spec.d + 1) / 2;
    std::vector<double> coef(spec.d, 0.0);
    for (std::size_t j = 0; j < informative; ++j) coef[j] = rng.uniform(0.0, 100.0);
    return coef;
}

namespace {

Dataset generate_regression(const GeneratorSpec& spec) {
    Rng rng(spec.seed);
    std::vector<double> coef;
    if (spec.kind == GeneratorKind::linear_gaussian) {
        // consume the same leading draws as linear_gaussian_coefficients
        const std::size_t informative = (spec.d + 1) / 2;
        coef.assign(spec.d, 0.0);
        for (std::size_t j = 0; j < informative; ++j) coef[j] = rng.uniform(0.0, 100.0);
    }

    std::vector<double> features(spec.n * spec.d);
    std::vector<double> targets(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
        double* row = features.data() + i * spec.d;
        for (std::size_t j = 0; j < spec.d; ++j) {
            row[j] = spec.kind == GeneratorKind::friedman1 ? rng.uniform() : rng.normal();
        }
        std::span<const double> x(row, spec.d);
        double y = 0.0;
        switch (spec.kind) {
            case GeneratorKind::linear_gaussian:
                for (std::size_t j = 0; j < spec.d; ++j) y += coef[j] * x[j];
                break;
            case GeneratorKind::friedman1:
                y = friedman1_response(x);
                break;
            case GeneratorKind::sparse_uncorrelated:
                y = sparse_uncorrelated_response(x);
                break;
            default:
                break;
        }
        targets[i] = y + spec.noise * rng.normal();
    }
    return Dataset(spec.n, spec.d, std::move(features), std::move(targets));
}

Dataset generate_classification(const GeneratorSpec& spec) {
    Rng rng(spec.seed);
    const std::size_t n1 = spec.n / 2;       // class 1
    const std::size_t n0 = spec.n - n1;      // class 0
    const std::size_t d = spec.kind == GeneratorKind::linearly_separable ? spec.d : 2;

    std::vector<double> features(spec.n * d);
    std::vector<double> targets(spec.n);

    auto emit = [&](std::size_t i, std::span<const double> base, double label) {
        double* row = features.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) row[j] = base[j] + spec.noise * rng.normal();
        targets[i] = label;
    };

    switch (spec.kind) {
        case GeneratorKind::moons: {
            // outer arc for class 0, shifted inverted arc for class 1
            for (std::size_t i = 0; i < n0; ++i) {
                const double t = n0 > 1 ? std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(n0 - 1)
                                        : 0.0;
                const double base[2] = {std::cos(t), std::sin(t)};
                emit(i, base, 0.0);
            }
            for (std::size_t i = 0; i < n1; ++i) {
                const double t = n1 > 1 ? std::numbers::pi * static_cast<double>(i) /
                                              static_cast<double>(n1 - 1)
                                        : 0.0;
                const double base[2] = {1.0 - std::cos(t), 1.0 - std::sin(t) - 0.5};
                emit(n0 + i, base, 1.0);
            }
            break;
        }
        case GeneratorKind::circles: {
            // concentric circles, inner radius factor 0.5
            for (std::size_t i = 0; i < n0; ++i) {
                const double t = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n0);
                const double base[2] = {std::cos(t), std::sin(t)};
                emit(i, base, 0.0);
            }
            for (std::size_t i = 0; i < n1; ++i) {
                const double t = 2.0 * std::numbers::pi * static_cast<double>(i) /
                                 static_cast<double>(n1);
                const double base[2] = {0.5 * std::cos(t), 0.5 * std::sin(t)};
                emit(n0 + i, base, 1.0);
            }
            break;
        }
        case GeneratorKind::linearly_separable: {
            // two blobs at +-2/sqrt(d) per coordinate, centers 4 apart
            const double offset = 2.0 / std::sqrt(static_cast<double>(d));
            std::vector<double> center(d, -offset);
            for (std::size_t i = 0; i < n0; ++i) emit(i, center, 0.0);
            for (double& c : center) c = offset;
            for (std::size_t i = 0; i < n1; ++i) emit(n0 + i, center, 1.0);
            break;
        }
        default:
            fail(ErrorCode::runtime, "not a classification generator");
    }
    return Dataset(spec.n, d, std::move(features), std::move(targets));
}

}  // namespace

Dataset generate(const GeneratorSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case GeneratorKind::linear_gaussian:
        case GeneratorKind::friedman1:
        case GeneratorKind::sparse_uncorrelated:
            return generate_regression(spec);
        case GeneratorKind::moons:
        case GeneratorKind::circles:
        case GeneratorKind::linearly_separable:
            return generate_classification(spec);
    }
    fail(ErrorCode::runtime, "unreachable generator kind");
}

}  // namespace cobra
