#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "cobra/dataset.hpp"
#include "cobra/kernels.hpp"
#include "cobra/machines.hpp"
#include "cobra/prediction.hpp"

namespace cobra {

enum class EstimatorKind {
    cobra,           // indicator weights, uniform over consenting points
    kernelcobra,     // exponential weights on summed prediction distances
    general_kernel,  // kernel scores summed across machines
    mixcobra,        // adds an input-proximity factor to the exponential weights
    unsupervised,    // machine-weighted average of retained predictions
    classifier,      // weighted vote over retained labels
};

EstimatorKind parse_estimator_kind(std::string_view name);
std::string_view estimator_kind_name(EstimatorKind kind);

/// Which point-weight formula the classifier / unsupervised variants use:
/// the exponential weights or the generic kernel-score weights.
enum class PointWeighting { exponential, kernel };

struct AggregatorConfig {
    double lambda = 1.0;    // temperature for the exponential weights; 0 = uniform
    double epsilon = 0.0;   // consensus radius; <= 0 means half the prediction range
    int alpha = 0;          // machines that must agree; 0 means all of them
    KernelSpec kernel{KernelKind::exponential, 1.0};
    std::vector<double> machine_weights;  // empty = uniform 1/M
    double mix_alpha = 1.0;               // input-proximity coefficient (mixcobra)
    bool uniform_fallback = false;        // uniform weights instead of a no-consensus error
    PointWeighting point_weighting = PointWeighting::exponential;

    void validate(std::size_t machine_count) const;
};

// --- weight computations -----------------------------------------------------
//
// All of them fill a length-ell vector of nonnegative weights summing to 1.
// The *_into variants write into a caller-provided buffer; the value-returning
// wrappers allocate. Exponential weights are normalized in shifted log space
// so large temperatures cannot underflow the denominator.

void kernelcobra_weights_into(const PredictionMatrix& train_preds,
                              std::span<const double> query_preds, double lambda,
                              std::span<double> out);
std::vector<double> kernelcobra_weights(const PredictionMatrix& train_preds,
                                        std::span<const double> query_preds, double lambda);

/// Same formula, starting from precomputed per-point summed distances.
void kernelcobra_weights_from_sums_into(std::span<const double> distance_sums, double lambda,
                                        std::span<double> out);

void general_kernel_weights_into(const PredictionMatrix& train_preds,
                                 std::span<const double> query_preds, const KernelSpec& kernel,
                                 std::span<double> out, bool uniform_fallback = false);
std::vector<double> general_kernel_weights(const PredictionMatrix& train_preds,
                                           std::span<const double> query_preds,
                                           const KernelSpec& kernel,
                                           bool uniform_fallback = false);

void cobra_weights_into(const PredictionMatrix& train_preds, std::span<const double> query_preds,
                        double epsilon, int alpha, std::span<double> out,
                        bool uniform_fallback = false);
std::vector<double> cobra_weights(const PredictionMatrix& train_preds,
                                  std::span<const double> query_preds, double epsilon, int alpha,
                                  bool uniform_fallback = false);

void mixcobra_weights_into(const Dataset& train_inputs, std::span<const double> query_input,
                           const PredictionMatrix& train_preds,
                           std::span<const double> query_preds, double alpha_in, double lambda,
                           std::span<double> out);
std::vector<double> mixcobra_weights(const Dataset& train_inputs,
                                     std::span<const double> query_input,
                                     const PredictionMatrix& train_preds,
                                     std::span<const double> query_preds, double alpha_in,
                                     double lambda);

/// Mixcobra from precomputed squared input distances and prediction sums.
void mixcobra_weights_from_sums_into(std::span<const double> input_sq_dists,
                                     std::span<const double> distance_sums, double alpha_in,
                                     double lambda, std::span<double> out);

// --- final predictors --------------------------------------------------------

/// Weighted average of retained targets; the convex combination keeps the
/// output inside [min, max] of the targets.
double aggregate_regression(std::span<const double> weights,
                            std::span<const double> retained_targets);

/// Machine-weighted average of retained predictions; never reads targets.
double aggregate_unsupervised(std::span<const double> point_weights,
                              std::span<const double> machine_weights,
                              const PredictionMatrix& train_preds);

/// Weighted-vote classifiers; the binary rule sends a mass of exactly 1/2 to
/// class 1, multiclass ties go to the smallest label.
int classify_binary(std::span<const double> weights, std::span<const double> retained_labels);
double classify_multiclass(std::span<const double> weights,
                           std::span<const double> retained_labels);

/// Machines fitted on the training half plus the cached prediction matrix
/// over the retained half; one instance answers queries for every estimator
/// kind. Immutable after construction and safe to share across threads.
class Aggregator {
public:
    Aggregator(std::vector<TrainedMachine> machines, SplitPair split);

    std::size_t machine_count() const noexcept { return machines_.size(); }
    std::size_t retained_count() const noexcept { return split_.ell; }
    std::size_t dimension() const noexcept { return split_.retained_half.cols(); }

    const std::vector<TrainedMachine>& machines() const noexcept { return machines_; }
    const SplitPair& split() const noexcept { return split_; }
    const PredictionMatrix& predictions() const noexcept { return matrix_; }

    /// Half the spread of the cached prediction matrix; the consensus radius
    /// used when a config does not set one.
    double auto_epsilon() const noexcept;

    void query_predictions_into(std::span<const double> x, std::span<double> out) const;
    std::vector<double> query_predictions(std::span<const double> x) const;

    std::vector<double> weights(EstimatorKind kind, const AggregatorConfig& config,
                                std::span<const double> x) const;

    /// Weight computation given already-computed query predictions; the query
    /// input itself is only read by the mixcobra scheme.
    void weights_for_query_into(EstimatorKind kind, const AggregatorConfig& config,
                                std::span<const double> query_preds,
                                std::span<const double> query_input, std::span<double> out) const;

    double predict(EstimatorKind kind, const AggregatorConfig& config,
                   std::span<const double> x) const;

private:
    std::vector<TrainedMachine> machines_;
    SplitPair split_;
    PredictionMatrix matrix_;
    bool binary_labels_ = false;
};

}  // namespace cobra
