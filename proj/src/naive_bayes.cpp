#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <utility>
#include <vector>

#include "machine_impl.hpp"

namespace cobra::detail {

namespace {

// Gaussian naive Bayes over continuous features.
class NaiveBayesMachine final : public Machine {
public:
    NaiveBayesMachine(std::vector<double> classes, std::vector<double> log_priors,
                      std::vector<double> means, std::vector<double> variances, std::size_t d)
        : classes_(std::move(classes)),
          log_priors_(std::move(log_priors)),
          means_(std::move(means)),
          variances_(std::move(variances)),
          d_(d) {}

    double predict(std::span<const double> x) const override {
        double best_score = -std::numeric_limits<double>::infinity();
        double best_label = classes_.front();
        for (std::size_t c = 0; c < classes_.size(); ++c) {
            double score = log_priors_[c];
            const double* mu = means_.data() + c * d_;
            const double* var = variances_.data() + c * d_;
            for (std::size_t j = 0; j < d_; ++j) {
                const double diff = x[j] - mu[j];
                score -= 0.5 * std::log(2.0 * std::numbers::pi * var[j]);
                score -= diff * diff / (2.0 * var[j]);
            }
            if (score > best_score) {  // classes ascend, so ties keep the smaller label
                best_score = score;
                best_label = classes_[c];
            }
        }
        return best_label;
    }

    std::size_t dimension() const override { return d_; }

private:
    std::vector<double> classes_;
    std::vector<double> log_priors_;
    std::vector<double> means_;
    std::vector<double> variances_;
    std::size_t d_;
};

}  // namespace

TrainedMachine fit_naive_bayes(const MachineSpec& spec, const Dataset& train) {
    const double smoothing = spec.param("var_smoothing", 1e-9);
    const std::size_t n = train.rows();
    const std::size_t d = train.cols();

    std::vector<double> classes = train.targets();
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    const std::size_t c_count = classes.size();

    std::vector<double> counts(c_count, 0.0);
    std::vector<double> means(c_count * d, 0.0);
    std::vector<double> variances(c_count * d, 0.0);

    auto class_index = [&](double label) {
        return static_cast<std::size_t>(
            std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
    };

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = class_index(train.target(i));
        counts[c] += 1.0;
        for (std::size_t j = 0; j < d; ++j) means[c * d + j] += train.feature(i, j);
    }
    for (std::size_t c = 0; c < c_count; ++c)
        for (std::size_t j = 0; j < d; ++j) means[c * d + j] /= counts[c];

    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = class_index(train.target(i));
        for (std::size_t j = 0; j < d; ++j) {
            const double diff = train.feature(i, j) - means[c * d + j];
            variances[c * d + j] += diff * diff;
        }
    }
    for (std::size_t c = 0; c < c_count; ++c)
        for (std::size_t j = 0; j < d; ++j)
            variances[c * d + j] = variances[c * d + j] / counts[c] + smoothing;

    std::vector<double> log_priors(c_count);
    for (std::size_t c = 0; c < c_count; ++c)
        log_priors[c] = std::log(counts[c] / static_cast<double>(n));

    return TrainedMachine{spec,
                          std::make_shared<NaiveBayesMachine>(std::move(classes),
                                                              std::move(log_priors),
                                                              std::move(means),
                                                              std::move(variances), d),
                          true,
                          {}};
}

}  // namespace cobra::detail
