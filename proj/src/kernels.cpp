#include "cobra/kernels.hpp"

#include <cmath>
#include <string>

#include "cobra/error.hpp"

namespace cobra {

KernelKind parse_kernel_kind(std::string_view name) {
    if (name == "exponential") return KernelKind::exponential;
    if (name == "gaussian") return KernelKind::gaussian;
    if (name == "threshold") return KernelKind::threshold;
    if (name == "triangular") return KernelKind::triangular;
    fail(ErrorCode::config, "unknown kernel kind '" + std::string(name) + "'");
}

std::string_view kernel_kind_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::exponential: return "exponential";
        case KernelKind::gaussian: return "gaussian";
        case KernelKind::threshold: return "threshold";
        case KernelKind::triangular: return "triangular";
    }
    return "?";
}

void KernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
        fail(ErrorCode::config, "kernel bandwidth must be positive and finite");
    }
}

double scalar_distance(double a, double b) { return std::abs(a - b); }

double kernel_eval(const KernelSpec& spec, double a, double b) {
    const double dist = scalar_distance(a, b);
    switch (spec.kind) {
        case KernelKind::exponential:
            return std::exp(-spec.bandwidth * dist);
        case KernelKind::gaussian:
            return std::exp(-spec.bandwidth * dist * dist);
        case KernelKind::threshold:
            return dist <= spec.bandwidth ? 1.0 : 0.0;
        case KernelKind::triangular:
            return std::max(0.0, 1.0 - dist / spec.bandwidth);
    }
    return 0.0;
}

}  // namespace cobra
