#pragma once

#include <string_view>

namespace cobra {

enum class KernelKind { exponential, gaussian, threshold, triangular };

KernelKind parse_kernel_kind(std::string_view name);
std::string_view kernel_kind_name(KernelKind kind);

/// Scalar proximity kernel over machine predictions. The bandwidth plays the
/// role of the temperature for the exponential/gaussian kinds and of the
/// acceptance radius for the threshold/triangular kinds.
struct KernelSpec {
    KernelKind kind = KernelKind::exponential;
    double bandwidth = 1.0;

    void validate() const;
};

/// |a - b|; the distance between two scalar predictions.
double scalar_distance(double a, double b);

/// Evaluates the kernel at a pair of scalar predictions. Always in [0, 1],
/// symmetric, and equal to 1 when a == b.
double kernel_eval(const KernelSpec& spec, double a, double b);

}  // namespace cobra
