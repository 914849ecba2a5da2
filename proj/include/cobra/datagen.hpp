#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cobra/dataset.hpp"

namespace cobra {

enum class GeneratorKind {
    linear_gaussian,
    friedman1,
    sparse_uncorrelated,
    moons,
    circles,
    linearly_separable,
};

GeneratorKind parse_generator_kind(std::string_view name);
std::string_view generator_kind_name(GeneratorKind kind);

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::friedman1;
    std::size_t n = 100;
    std::size_t d = 10;      // forced to 2 for moons/circles
    double noise = 0.0;      // response noise sd, or coordinate jitter sd
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seeded synthetic sample. With noise 0 every row satisfies the generator's
/// response formula exactly.
Dataset generate(const GeneratorSpec& spec);

// Noise-free response surfaces, exposed so emitted rows can be re-checked.
double friedman1_response(std::span<const double> x);
double sparse_uncorrelated_response(std::span<const double> x);
/// The coefficient vector a linear-gaussian spec draws before sampling rows.
std::vector<double> linear_gaussian_coefficients(const GeneratorSpec& spec);

}  // namespace cobra
