#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace cobra::detail {

// Cholesky solve for a symmetric positive definite system. A is d*d
// row-major and is destroyed; returns false when a pivot degenerates.
inline bool cholesky_solve(std::vector<double>& a, std::vector<double>& b, std::size_t d) {
    double max_diag = 0.0;
    for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, std::abs(a[i * d + i]));
    const double tiny = 1e-12 * std::max(max_diag, 1.0);
    for (std::size_t j = 0; j < d; ++j) {
        double diag = a[j * d + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
        if (!(diag > tiny)) return false;
        const double root = std::sqrt(diag);
        a[j * d + j] = root;
        for (std::size_t i = j + 1; i < d; ++i) {
            double v = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * d + k] * a[j * d + k];
            a[i * d + j] = v / root;
        }
    }
    // forward then backward substitution using the lower factor
    for (std::size_t i = 0; i < d; ++i) {
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= a[i * d + k] * b[k];
        b[i] = v / a[i * d + i];
    }
    for (std::size_t ii = d; ii > 0; --ii) {
        const std::size_t i = ii - 1;
        double v = b[i];
        for (std::size_t k = i + 1; k < d; ++k) v -= a[k * d + i] * b[k];
        b[i] = v / a[i * d + i];
    }
    return true;
}

// Minimum-norm solve of a symmetric system via cyclic Jacobi
// eigendecomposition; eigenvalues below the relative cutoff are dropped.
// Intended for the small dense systems that show up in ridge fits.
inline std::vector<double> symmetric_pinv_solve(std::vector<double> a, const std::vector<double>& b,
                                                std::size_t d) {
    std::vector<double> v(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) v[i * d + i] = 1.0;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < d; ++p)
            for (std::size_t q = p + 1; q < d; ++q) off += a[p * d + q] * a[p * d + q];
        if (off < 1e-26) break;
        for (std::size_t p = 0; p < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = a[p * d + q];
                if (apq == 0.0) continue;
                const double app = a[p * d + p];
                const double aqq = a[q * d + q];
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < d; ++k) {
                    const double akp = a[k * d + p];
                    const double akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double apk = a[p * d + k];
                    const double aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < d; ++k) {
                    const double vkp = v[k * d + p];
                    const double vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    double max_eig = 0.0;
    for (std::size_t i = 0; i < d; ++i) max_eig = std::max(max_eig, std::abs(a[i * d + i]));
    const double cutoff = 1e-10 * std::max(max_eig, 1.0);

    // x = V diag(1/lambda) V^T b, skipping near-zero eigenvalues
    std::vector<double> vtb(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += v[k * d + i] * b[k];
        const double eig = a[i * d + i];
        vtb[i] = std::abs(eig) > cutoff ? s / eig : 0.0;
    }
    std::vector<double> x(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t i = 0; i < d; ++i) s += v[k * d + i] * vtb[i];
        x[k] = s;
    }
    return x;
}

}  // namespace cobra::detail
