#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "cobra/machines.hpp"
#include "machine_impl.hpp"
#include "linalg.hpp"

namespace cobra::detail {

namespace {

// Column-major centered copy of the features plus the moments needed to
// recover the unpenalized intercept.
struct CenteredDesign {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<double> columns;       // d columns of length n
    std::vector<double> feature_means;
    std::vector<double> centered_targets;
    double target_mean = 0.0;

    std::span<const double> col(std::size_t j) const {
        return {columns.data() + j * n, n};
    }
};

CenteredDesign center(const Dataset& train) {
    CenteredDesign out;
    out.n = train.rows();
    out.d = train.cols();
    out.feature_means.assign(out.d, 0.0);
    for (std::size_t i = 0; i < out.n; ++i)
        for (std::size_t j = 0; j < out.d; ++j) out.feature_means[j] += train.feature(i, j);
    for (double& m : out.feature_means) m /= static_cast<double>(out.n);

    out.columns.assign(out.d * out.n, 0.0);
    for (std::size_t j = 0; j < out.d; ++j)
        for (std::size_t i = 0; i < out.n; ++i)
            out.columns[j * out.n + i] = train.feature(i, j) - out.feature_means[j];

    const auto& y = train.targets();
    for (double v : y) out.target_mean += v;
    out.target_mean /= static_cast<double>(out.n);
    out.centered_targets.resize(out.n);
    for (std::size_t i = 0; i < out.n; ++i) out.centered_targets[i] = y[i] - out.target_mean;
    return out;
}

double intercept_from(const CenteredDesign& design, const std::vector<double>& coef) {
    double b = design.target_mean;
    for (std::size_t j = 0; j < design.d; ++j) b -= design.feature_means[j] * coef[j];
    return b;
}

class LinearModel final : public Machine {
public:
    LinearModel(std::vector<double> coef, double intercept)
        : coef_(std::move(coef)), intercept_(intercept) {}

    double predict(std::span<const double> x) const override {
        double v = intercept_;
        for (std::size_t j = 0; j < coef_.size(); ++j) v += coef_[j] * x[j];
        return v;
    }
    std::size_t dimension() const override { return coef_.size(); }

private:
    std::vector<double> coef_;
    double intercept_;
};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Binary logistic model mapping back to the original pair of label values.
class LogisticModel final : public Machine {
public:
    LogisticModel(std::vector<double> coef, double intercept, double lo_label, double hi_label)
        : coef_(std::move(coef)), intercept_(intercept), lo_(lo_label), hi_(hi_label) {}

    double predict(std::span<const double> x) const override {
        double z = intercept_;
        for (std::size_t j = 0; j < coef_.size(); ++j) z += coef_[j] * x[j];
        return sigmoid(z) >= 0.5 ? hi_ : lo_;
    }
    std::size_t dimension() const override { return coef_.size(); }

private:
    std::vector<double> coef_;
    double intercept_;
    double lo_;
    double hi_;
};

}  // namespace

TrainedMachine fit_ridge(const MachineSpec& spec, const Dataset& train) {
    const double reg = spec.param("regularization", 1.0);
    const auto design = center(train);
    const std::size_t d = design.d;

    // normal equations with the penalty on the centered coefficients only
    std::vector<double> gram(d * d, 0.0);
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            double s = 0.0;
            auto ca = design.col(a);
            auto cb = design.col(b);
            for (std::size_t i = 0; i < design.n; ++i) s += ca[i] * cb[i];
            gram[a * d + b] = s;
            gram[b * d + a] = s;
        }
    }
    for (std::size_t j = 0; j < d; ++j) gram[j * d + j] += reg;

    std::vector<double> rhs(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        auto cj = design.col(j);
        for (std::size_t i = 0; i < design.n; ++i) s += cj[i] * design.centered_targets[i];
        rhs[j] = s;
    }

    std::vector<double> coef = rhs;
    std::vector<double> chol = gram;
    if (!cholesky_solve(chol, coef, d)) {
        coef = symmetric_pinv_solve(gram, rhs, d);
    }
    const double intercept = intercept_from(design, coef);
    return TrainedMachine{spec, std::make_shared<LinearModel>(std::move(coef), intercept), true, {}};
}

TrainedMachine fit_lasso(const MachineSpec& spec, const Dataset& train) {
    const double reg = spec.param("regularization", 0.1);
    const double tol = spec.param("tolerance", 1e-6);
    const int max_sweeps = static_cast<int>(spec.param("max_sweeps", 1000));
    const auto design = center(train);
    const std::size_t n = design.n;
    const std::size_t d = design.d;
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<double> col_scale(d, 0.0);  // (1/n) * x_j . x_j
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (double v : design.col(j)) s += v * v;
        col_scale[j] = s * inv_n;
    }

    std::vector<double> coef(d, 0.0);
    std::vector<double> residual = design.centered_targets;
    bool converged = false;
    int sweeps = 0;
    while (sweeps < max_sweeps) {
        ++sweeps;
        double max_delta = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (col_scale[j] == 0.0) continue;
            auto cj = design.col(j);
            double rho = 0.0;
            for (std::size_t i = 0; i < n; ++i) rho += cj[i] * residual[i];
            rho = rho * inv_n + col_scale[j] * coef[j];
            // soft threshold
            double updated = 0.0;
            if (rho > reg) updated = (rho - reg) / col_scale[j];
            else if (rho < -reg) updated = (rho + reg) / col_scale[j];
            const double delta = updated - coef[j];
            if (delta != 0.0) {
                for (std::size_t i = 0; i < n; ++i) residual[i] -= cj[i] * delta;
                coef[j] = updated;
            }
            max_delta = std::max(max_delta, std::abs(delta));
        }
        if (max_delta < tol) {
            converged = true;
            break;
        }
    }

    const double intercept = intercept_from(design, coef);
    TrainedMachine out{spec, std::make_shared<LinearModel>(std::move(coef), intercept), true, {}};
    out.converged = converged;
    if (!converged) {
        out.warning = "lasso coordinate descent stopped after " + std::to_string(sweeps) +
                      " sweeps without reaching tolerance";
    }
    return out;
}

TrainedMachine fit_logistic(const MachineSpec& spec, const Dataset& train) {
    const double step = spec.param("step", 0.1);
    const int iterations = static_cast<int>(spec.param("iterations", 500));
    const double l2 = spec.param("l2", 1e-3);
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();

    std::vector<double> labels = train.targets();
    std::vector<double> distinct = labels;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() > 2) {
        fail(ErrorCode::label, "logistic regression supports at most two classes, got " +
                                   std::to_string(distinct.size()));
    }
    const double lo = distinct.front();
    const double hi = distinct.back();

    std::vector<double> y01(n);
    for (std::size_t i = 0; i < n; ++i) y01[i] = labels[i] == hi && distinct.size() == 2 ? 1.0 : 0.0;

    std::vector<double> coef(d, 0.0);
    double intercept = 0.0;
    std::vector<double> grad(d);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (int it = 0; it < iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            auto x = train.row(i);
            double z = intercept;
            for (std::size_t j = 0; j < d; ++j) z += coef[j] * x[j];
            const double err = sigmoid(z) - y01[i];
            for (std::size_t j = 0; j < d; ++j) grad[j] += err * x[j];
            grad_b += err;
        }
        for (std::size_t j = 0; j < d; ++j) coef[j] -= step * (grad[j] * inv_n + l2 * coef[j]);
        intercept -= step * grad_b * inv_n;
    }
    return TrainedMachine{spec,
                          std::make_shared<LogisticModel>(std::move(coef), intercept, lo, hi),
                          true,
                          {}};
}

}  // namespace cobra::detail
