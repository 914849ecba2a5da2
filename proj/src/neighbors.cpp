#include <algorithm>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "machine_impl.hpp"

namespace cobra::detail {

namespace {

class KnnMachine final : public Machine {
public:
    KnnMachine(std::vector<double> features, std::vector<double> targets, std::size_t n,
               std::size_t d, std::size_t k, bool classify)
        : features_(std::move(features)),
          targets_(std::move(targets)),
          n_(n),
          d_(d),
          k_(k),
          classify_(classify) {}

    double predict(std::span<const double> x) const override {
        static thread_local std::vector<std::pair<double, std::size_t>> dist;
        dist.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double* row = features_.data() + i * d_;
            double s = 0.0;
            for (std::size_t j = 0; j < d_; ++j) {
                const double diff = row[j] - x[j];
                s += diff * diff;
            }
            dist[i] = {s, i};
        }
        std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_ - 1),
                         dist.end());
        // fixed accumulation order regardless of nth_element internals
        static thread_local std::vector<std::size_t> picked;
        picked.resize(k_);
        for (std::size_t i = 0; i < k_; ++i) picked[i] = dist[i].second;
        std::sort(picked.begin(), picked.end());

        if (!classify_) {
            double s = 0.0;
            for (std::size_t idx : picked) s += targets_[idx];
            return s / static_cast<double>(k_);
        }
        std::vector<double> votes;
        votes.reserve(k_);
        for (std::size_t idx : picked) votes.push_back(targets_[idx]);
        return majority_label(std::move(votes));
    }

    std::size_t dimension() const override { return d_; }

private:
    std::vector<double> features_;
    std::vector<double> targets_;
    std::size_t n_;
    std::size_t d_;
    std::size_t k_;
    bool classify_;
};

}  // namespace

TrainedMachine fit_knn(const MachineSpec& spec, const Dataset& train, bool classify) {
    const auto k = static_cast<std::size_t>(spec.param("neighbors", 5));
    if (k > train.rows()) {
        fail(ErrorCode::config, "knn neighbor count " + std::to_string(k) +
                                    " exceeds training size " + std::to_string(train.rows()));
    }
    return TrainedMachine{spec,
                          std::make_shared<KnnMachine>(train.feature_data(), train.targets(),
                                                       train.rows(), train.cols(), k, classify),
                          true,
                          {}};
}

}  // namespace cobra::detail
