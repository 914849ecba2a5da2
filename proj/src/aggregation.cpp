#include "cobra/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>

namespace cobra {

EstimatorKind parse_estimator_kind(std::string_view name) {
    if (name == "cobra") return EstimatorKind::cobra;
    if (name == "kernelcobra") return EstimatorKind::kernelcobra;
    if (name == "general-kernel") return EstimatorKind::general_kernel;
    if (name == "mixcobra") return EstimatorKind::mixcobra;
    if (name == "unsupervised") return EstimatorKind::unsupervised;
    if (name == "classifier") return EstimatorKind::classifier;
    fail(ErrorCode::config, "unknown estimator kind '" + std::string(name) + "'");
}

std::string_view estimator_kind_name(EstimatorKind kind) {
    switch (kind) {
        case EstimatorKind::cobra: return "cobra";
        case EstimatorKind::kernelcobra: return "kernelcobra";
        case EstimatorKind::general_kernel: return "general-kernel";
        case EstimatorKind::mixcobra: return "mixcobra";
        case EstimatorKind::unsupervised: return "unsupervised";
        case EstimatorKind::classifier: return "classifier";
    }
    return "?";
}

void AggregatorConfig::validate(std::size_t machine_count) const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::config, "lambda must be finite and nonnegative");
    }
    if (!std::isfinite(epsilon)) fail(ErrorCode::config, "epsilon must be finite");
    if (!(mix_alpha >= 0.0) || !std::isfinite(mix_alpha)) {
        fail(ErrorCode::config, "mix_alpha must be finite and nonnegative");
    }
    if (alpha != 0 && (alpha < 1 || static_cast<std::size_t>(alpha) > machine_count)) {
        fail(ErrorCode::config, "alpha must lie in [1, M]; got " + std::to_string(alpha) +
                                    " with M=" + std::to_string(machine_count));
    }
    kernel.validate();
    if (!machine_weights.empty()) {
        if (machine_weights.size() != machine_count) {
            fail(ErrorCode::invalid_weights, "machine weights have length " +
                                                 std::to_string(machine_weights.size()) +
                                                 ", expected " + std::to_string(machine_count));
        }
        double total = 0.0;
        for (double w : machine_weights) {
            if (!(w >= 0.0) || !std::isfinite(w)) {
                fail(ErrorCode::invalid_weights, "machine weights must be nonnegative");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            fail(ErrorCode::invalid_weights,
                 "machine weights sum to " + std::to_string(total) + ", expected 1");
        }
    }
}

namespace {

void check_query(const PredictionMatrix& preds, std::span<const double> query_preds) {
    if (query_preds.size() != preds.machine_count()) {
        fail(ErrorCode::shape, "query prediction vector has length " +
                                   std::to_string(query_preds.size()) + ", expected " +
                                   std::to_string(preds.machine_count()));
    }
}

void check_out(const PredictionMatrix& preds, std::span<double> out) {
    if (out.size() != preds.point_count()) {
        fail(ErrorCode::shape, "weight buffer has length " + std::to_string(out.size()) +
                                   ", expected " + std::to_string(preds.point_count()));
    }
}

// Exponent vector -> normalized weights, shifting by the max exponent so the
// denominator is at least 1.
void shifted_exp_normalize(std::span<double> exponents) {
    double peak = exponents[0];
    for (double e : exponents) peak = std::max(peak, e);
    double total = 0.0;
    for (double& e : exponents) {
        e = std::exp(e - peak);
        total += e;
    }
    for (double& e : exponents) e /= total;
}

void summed_distances_into(const PredictionMatrix& preds, std::span<const double> query_preds,
                           std::span<double> out) {
    const std::size_t ell = preds.point_count();
    const std::size_t m_count = preds.machine_count();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double q = query_preds[m];
        auto row = preds.machine_row(m);
        for (std::size_t i = 0; i < ell; ++i) out[i] += std::abs(row[i] - q);
    }
}

void uniform_into(std::span<double> out) {
    const double w = 1.0 / static_cast<double>(out.size());
    std::fill(out.begin(), out.end(), w);
}

}  // namespace

void kernelcobra_weights_from_sums_into(std::span<const double> distance_sums, double lambda,
                                        std::span<double> out) {
    if (distance_sums.size() != out.size()) fail(ErrorCode::shape, "weight buffer size mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = -lambda * distance_sums[i];
    shifted_exp_normalize(out);
}

void kernelcobra_weights_into(const PredictionMatrix& train_preds,
                              std::span<const double> query_preds, double lambda,
                              std::span<double> out) {
    check_query(train_preds, query_preds);
    check_out(train_preds, out);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail(ErrorCode::invalid_argument, "lambda must be finite and nonnegative");
    }
    summed_distances_into(train_preds, query_preds, out);
    for (double& s : out) s *= -lambda;
    shifted_exp_normalize(out);
}

std::vector<double> kernelcobra_weights(const PredictionMatrix& train_preds,
                                        std::span<const double> query_preds, double lambda) {
    std::vector<double> out(train_preds.point_count());
    kernelcobra_weights_into(train_preds, query_preds, lambda, out);
    return out;
}

void general_kernel_weights_into(const PredictionMatrix& train_preds,
                                 std::span<const double> query_preds, const KernelSpec& kernel,
                                 std::span<double> out, bool uniform_fallback) {
    check_query(train_preds, query_preds);
    check_out(train_preds, out);
    kernel.validate();
    const std::size_t ell = train_preds.point_count();
    const std::size_t m_count = train_preds.machine_count();
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double q = query_preds[m];
        auto row = train_preds.machine_row(m);
        for (std::size_t i = 0; i < ell; ++i) out[i] += kernel_eval(kernel, row[i], q);
    }
    double total = 0.0;
    for (double v : out) total += v;
    if (total <= 0.0) {
        if (uniform_fallback) {
            uniform_into(out);
            return;
        }
        fail(ErrorCode::no_consensus,
             "no retained point received a positive kernel score; widen the bandwidth or "
             "enable the uniform fallback");
    }
    for (double& v : out) v /= total;
}

std::vector<double> general_kernel_weights(const PredictionMatrix& train_preds,
                                           std::span<const double> query_preds,
                                           const KernelSpec& kernel, bool uniform_fallback) {
    std::vector<double> out(train_preds.point_count());
    general_kernel_weights_into(train_preds, query_preds, kernel, out, uniform_fallback);
    return out;
}

void cobra_weights_into(const PredictionMatrix& train_preds, std::span<const double> query_preds,
                        double epsilon, int alpha, std::span<double> out, bool uniform_fallback) {
    check_query(train_preds, query_preds);
    check_out(train_preds, out);
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
        fail(ErrorCode::invalid_argument, "epsilon must be positive and finite");
    }
    const std::size_t ell = train_preds.point_count();
    const std::size_t m_count = train_preds.machine_count();
    if (alpha < 1 || static_cast<std::size_t>(alpha) > m_count) {
        fail(ErrorCode::invalid_argument, "alpha must lie in [1, M]");
    }

    static thread_local std::vector<int> agreement;
    agreement.assign(ell, 0);
    for (std::size_t m = 0; m < m_count; ++m) {
        const double q = query_preds[m];
        auto row = train_preds.machine_row(m);
        for (std::size_t i = 0; i < ell; ++i) {
            if (std::abs(row[i] - q) <= epsilon) ++agreement[i];
        }
    }

    std::size_t selected = 0;
    for (std::size_t i = 0; i < ell; ++i) {
        if (agreement[i] >= alpha) ++selected;
    }
    if (selected == 0) {
        if (uniform_fallback) {
            uniform_into(out);
            return;
        }
        fail(ErrorCode::no_consensus,
             "no retained point is within epsilon of the query under " +
                 std::to_string(alpha) + " machines");
    }
    const double w = 1.0 / static_cast<double>(selected);
    for (std::size_t i = 0; i < ell; ++i) out[i] = agreement[i] >= alpha ? w : 0.0;
}

std::vector<double> cobra_weights(const PredictionMatrix& train_preds,
                                  std::span<const double> query_preds, double epsilon, int alpha,
                                  bool uniform_fallback) {
    std::vector<double> out(train_preds.point_count());
    cobra_weights_into(train_preds, query_preds, epsilon, alpha, out, uniform_fallback);
    return out;
}

void mixcobra_weights_from_sums_into(std::span<const double> input_sq_dists,
                                     std::span<const double> distance_sums, double alpha_in,
                                     double lambda, std::span<double> out) {
    if (input_sq_dists.size() != out.size() || distance_sums.size() != out.size()) {
        fail(ErrorCode::shape, "weight buffer size mismatch");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = -alpha_in * input_sq_dists[i] - lambda * distance_sums[i];
    }
    shifted_exp_normalize(out);
}

void mixcobra_weights_into(const Dataset& train_inputs, std::span<const double> query_input,
                           const PredictionMatrix& train_preds,
                           std::span<const double> query_preds, double alpha_in, double lambda,
                           std::span<double> out) {
    check_query(train_preds, query_preds);
    check_out(train_preds, out);
    if (train_inputs.rows() != train_preds.point_count()) {
        fail(ErrorCode::shape, "input matrix rows do not match the prediction matrix");
    }
    if (query_input.size() != train_inputs.cols()) {
        fail(ErrorCode::shape, "query input has dimension " + std::to_string(query_input.size()) +
                                   ", expected " + std::to_string(train_inputs.cols()));
    }
    if (!(alpha_in >= 0.0) || !(lambda >= 0.0)) {
        fail(ErrorCode::invalid_argument, "mixcobra coefficients must be nonnegative");
    }

    const std::size_t ell = train_preds.point_count();
    const std::size_t d = train_inputs.cols();
    summed_distances_into(train_preds, query_preds, out);
    for (std::size_t i = 0; i < ell; ++i) {
        auto row = train_inputs.row(i);
        double sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = query_input[j] - row[j];
            sq += diff * diff;
        }
        out[i] = -alpha_in * sq - lambda * out[i];
    }
    shifted_exp_normalize(out);
}

std::vector<double> mixcobra_weights(const Dataset& train_inputs,
                                     std::span<const double> query_input,
                                     const PredictionMatrix& train_preds,
                                     std::span<const double> query_preds, double alpha_in,
                                     double lambda) {
    std::vector<double> out(train_preds.point_count());
    mixcobra_weights_into(train_inputs, query_input, train_preds, query_preds, alpha_in, lambda,
                          out);
    return out;
}

double aggregate_regression(std::span<const double> weights,
                            std::span<const double> retained_targets) {
    if (weights.size() != retained_targets.size()) {
        fail(ErrorCode::shape, "weight vector has length " + std::to_string(weights.size()) +
                                   " but there are " + std::to_string(retained_targets.size()) +
                                   " retained targets");
    }
    double s = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * retained_targets[i];
    return s;
}

double aggregate_unsupervised(std::span<const double> point_weights,
                              std::span<const double> machine_weights,
                              const PredictionMatrix& train_preds) {
    if (point_weights.size() != train_preds.point_count()) {
        fail(ErrorCode::shape, "point weight length does not match the prediction matrix");
    }
    if (machine_weights.size() != train_preds.machine_count()) {
        fail(ErrorCode::shape, "machine weight length does not match the prediction matrix");
    }
    double total = 0.0;
    for (double w : machine_weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            fail(ErrorCode::invalid_weights, "machine weights must be nonnegative");
        }
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        fail(ErrorCode::invalid_weights,
             "machine weights sum to " + std::to_string(total) + ", expected 1");
    }

    double result = 0.0;
    for (std::size_t i = 0; i < point_weights.size(); ++i) {
        double blended = 0.0;
        for (std::size_t m = 0; m < machine_weights.size(); ++m) {
            blended += machine_weights[m] * train_preds.at(m, i);
        }
        result += point_weights[i] * blended;
    }
    return result;
}

int classify_binary(std::span<const double> weights, std::span<const double> retained_labels) {
    if (weights.size() != retained_labels.size()) {
        fail(ErrorCode::shape, "weight/label length mismatch");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        const double label = retained_labels[i];
        if (label != 0.0 && label != 1.0) {
            fail(ErrorCode::label,
                 "binary classification requires labels in {0, 1}; got " + std::to_string(label));
        }
        mass += weights[i] * label;
    }
    return mass >= 0.5 ? 1 : 0;
}

double classify_multiclass(std::span<const double> weights,
                           std::span<const double> retained_labels) {
    if (weights.size() != retained_labels.size()) {
        fail(ErrorCode::shape, "weight/label length mismatch");
    }
    if (retained_labels.empty()) fail(ErrorCode::label, "empty label set");
    std::map<double, double> mass;
    for (std::size_t i = 0; i < weights.size(); ++i) mass[retained_labels[i]] += weights[i];
    double best_label = mass.begin()->first;
    double best_mass = mass.begin()->second;
    for (const auto& [label, m] : mass) {
        if (m > best_mass) {  // map iterates in ascending label order; ties keep the smaller
            best_mass = m;
            best_label = label;
        }
    }
    return best_label;
}

Aggregator::Aggregator(std::vector<TrainedMachine> machines, SplitPair split)
    : machines_(std::move(machines)),
      split_(std::move(split)),
      matrix_(build_prediction_matrix(machines_, split_.retained_half)) {
    if (split_.retained_half.has_targets()) {
        binary_labels_ = true;
        for (double t : split_.retained_half.targets()) {
            if (t != 0.0 && t != 1.0) {
                binary_labels_ = false;
                break;
            }
        }
    }
}

double Aggregator::auto_epsilon() const noexcept {
    const double range = matrix_.value_range();
    return range > 0.0 ? range / 2.0 : 1.0;
}

void Aggregator::query_predictions_into(std::span<const double> x, std::span<double> out) const {
    if (out.size() != machines_.size()) fail(ErrorCode::shape, "query prediction buffer mismatch");
    for (std::size_t m = 0; m < machines_.size(); ++m) {
        const double p = machines_[m].predict(x);
        if (!std::isfinite(p)) {
            fail(ErrorCode::machine_output, "machine '" + machines_[m].name() +
                                                "' returned a non-finite prediction at the query");
        }
        out[m] = p;
    }
}

std::vector<double> Aggregator::query_predictions(std::span<const double> x) const {
    std::vector<double> out(machines_.size());
    query_predictions_into(x, out);
    return out;
}

void Aggregator::weights_for_query_into(EstimatorKind kind, const AggregatorConfig& config,
                                        std::span<const double> query_preds,
                                        std::span<const double> query_input,
                                        std::span<double> out) const {
    const double epsilon = config.epsilon > 0.0 ? config.epsilon : auto_epsilon();
    const int alpha = config.alpha > 0 ? config.alpha : static_cast<int>(machines_.size());
    switch (kind) {
        case EstimatorKind::cobra:
            cobra_weights_into(matrix_, query_preds, epsilon, alpha, out,
                               config.uniform_fallback);
            return;
        case EstimatorKind::kernelcobra:
            kernelcobra_weights_into(matrix_, query_preds, config.lambda, out);
            return;
        case EstimatorKind::general_kernel:
            general_kernel_weights_into(matrix_, query_preds, config.kernel, out,
                                        config.uniform_fallback);
            return;
        case EstimatorKind::mixcobra:
            mixcobra_weights_into(split_.retained_half, query_input, matrix_, query_preds,
                                  config.mix_alpha, config.lambda, out);
            return;
        case EstimatorKind::unsupervised:
        case EstimatorKind::classifier:
            if (config.point_weighting == PointWeighting::kernel) {
                general_kernel_weights_into(matrix_, query_preds, config.kernel, out,
                                            config.uniform_fallback);
            } else {
                kernelcobra_weights_into(matrix_, query_preds, config.lambda, out);
            }
            return;
    }
    fail(ErrorCode::runtime, "unreachable estimator kind");
}

std::vector<double> Aggregator::weights(EstimatorKind kind, const AggregatorConfig& config,
                                        std::span<const double> x) const {
    config.validate(machines_.size());
    std::vector<double> query_preds = query_predictions(x);
    std::vector<double> out(matrix_.point_count());
    weights_for_query_into(kind, config, query_preds, x, out);
    return out;
}

double Aggregator::predict(EstimatorKind kind, const AggregatorConfig& config,
                           std::span<const double> x) const {
    config.validate(machines_.size());
    static thread_local std::vector<double> query_preds;
    static thread_local std::vector<double> w;
    query_preds.resize(machines_.size());
    w.resize(matrix_.point_count());
    query_predictions_into(x, query_preds);
    weights_for_query_into(kind, config, query_preds, x, w);

    switch (kind) {
        case EstimatorKind::cobra:
        case EstimatorKind::kernelcobra:
        case EstimatorKind::general_kernel:
        case EstimatorKind::mixcobra:
            return aggregate_regression(w, split_.retained_half.targets());
        case EstimatorKind::unsupervised: {
            if (!config.machine_weights.empty()) {
                return aggregate_unsupervised(w, config.machine_weights, matrix_);
            }
            std::vector<double> uniform(machines_.size(),
                                        1.0 / static_cast<double>(machines_.size()));
            return aggregate_unsupervised(w, uniform, matrix_);
        }
        case EstimatorKind::classifier: {
            const auto& labels = split_.retained_half.targets();
            if (binary_labels_) return static_cast<double>(classify_binary(w, labels));
            return classify_multiclass(w, labels);
        }
    }
    fail(ErrorCode::runtime, "unreachable estimator kind");
}

}  // namespace cobra
