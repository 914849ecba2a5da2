#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cobra/dataset.hpp"

namespace cobra {

enum class MachineKind {
    ridge,
    lasso,
    knn,
    decision_tree,
    random_forest,
    knn_classifier,
    decision_tree_classifier,
    logistic_regression,
    naive_bayes,
    external,
};

MachineKind parse_machine_kind(std::string_view name);
std::string_view machine_kind_name(MachineKind kind);
bool is_classifier_kind(MachineKind kind);

/// Base-learner description: kind, per-kind hyperparameters, and the seed
/// driving any stochastic part of the fit.
struct MachineSpec {
    MachineKind kind = MachineKind::ridge;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
    std::string name;  // defaults to the kind name when empty

    double param(const std::string& key, double fallback) const;
    const std::string& display_name() const;
    void validate() const;
};

/// Fitted state with a pointwise prediction function.
class Machine {
public:
    virtual ~Machine() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t dimension() const = 0;
};

/// A fitted base learner. `converged` / `warning` surface soft fit issues
/// (e.g. an iterative solver stopping at its sweep limit) without failing.
struct TrainedMachine {
    MachineSpec spec;
    std::shared_ptr<const Machine> model;
    bool converged = true;
    std::string warning;

    const std::string& name() const { return spec.display_name(); }
    double predict(std::span<const double> x) const;
};

/// Fits a machine on the training half. Deterministic given (spec, train).
TrainedMachine fit_machine(const MachineSpec& spec, const Dataset& train);

double machine_predict(const TrainedMachine& machine, std::span<const double> x);

/// Wraps an externally fitted predictor so it can join an ensemble. The
/// callable must be pure and defined for vectors of the given dimension.
TrainedMachine external_machine(std::string name, std::size_t dimension,
                                std::function<double(std::span<const double>)> fn);

/// Default rosters: ridge, lasso, decision tree and random forest for
/// regression; k-NN, decision tree, logistic regression and naive Bayes for
/// classification.
std::vector<MachineSpec> default_regression_machines();
std::vector<MachineSpec> default_classification_machines();

}  // namespace cobra
