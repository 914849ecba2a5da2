#include "cobra/machines.hpp"

#include <cmath>
#include <memory>
#include <set>
#include <utility>

#include "machine_impl.hpp"

namespace cobra {

MachineKind parse_machine_kind(std::string_view name) {
    if (name == "ridge") return MachineKind::ridge;
    if (name == "lasso") return MachineKind::lasso;
    if (name == "knn") return MachineKind::knn;
    if (name == "decision-tree") return MachineKind::decision_tree;
    if (name == "random-forest") return MachineKind::random_forest;
    if (name == "knn-classifier") return MachineKind::knn_classifier;
    if (name == "decision-tree-classifier") return MachineKind::decision_tree_classifier;
    if (name == "logistic-regression") return MachineKind::logistic_regression;
    if (name == "naive-bayes") return MachineKind::naive_bayes;
    if (name == "external") return MachineKind::external;
    fail(ErrorCode::config, "unknown machine kind '" + std::string(name) + "'");
}

std::string_view machine_kind_name(MachineKind kind) {
    switch (kind) {
        case MachineKind::ridge: return "ridge";
        case MachineKind::lasso: return "lasso";
        case MachineKind::knn: return "knn";
        case MachineKind::decision_tree: return "decision-tree";
        case MachineKind::random_forest: return "random-forest";
        case MachineKind::knn_classifier: return "knn-classifier";
        case MachineKind::decision_tree_classifier: return "decision-tree-classifier";
        case MachineKind::logistic_regression: return "logistic-regression";
        case MachineKind::naive_bayes: return "naive-bayes";
        case MachineKind::external: return "external";
    }
    return "?";
}

bool is_classifier_kind(MachineKind kind) {
    switch (kind) {
        case MachineKind::knn_classifier:
        case MachineKind::decision_tree_classifier:
        case MachineKind::logistic_regression:
        case MachineKind::naive_bayes:
            return true;
        default:
            return false;
    }
}

double MachineSpec::param(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

const std::string& MachineSpec::display_name() const {
    static const std::string kind_names[] = {
        "ridge", "lasso", "knn", "decision-tree", "random-forest", "knn-classifier",
        "decision-tree-classifier", "logistic-regression", "naive-bayes", "external"};
    if (!name.empty()) return name;
    return kind_names[static_cast<std::size_t>(kind)];
}

namespace {

struct ParamRule {
    const char* key;
    double min;
    bool integer;
};

const std::vector<ParamRule>& rules_for(MachineKind kind) {
    static const std::vector<ParamRule> ridge_rules = {{"regularization", 0.0, false}};
    static const std::vector<ParamRule> lasso_rules = {{"regularization", 0.0, false},
                                                       {"tolerance", 0.0, false},
                                                       {"max_sweeps", 1.0, true}};
    static const std::vector<ParamRule> knn_rules = {{"neighbors", 1.0, true}};
    static const std::vector<ParamRule> tree_rules = {{"max_depth", 0.0, true},
                                                      {"min_leaf", 1.0, true},
                                                      {"features_per_split", 0.0, true}};
    static const std::vector<ParamRule> forest_rules = {{"trees", 1.0, true},
                                                        {"max_depth", 0.0, true},
                                                        {"min_leaf", 1.0, true},
                                                        {"features_per_split", 0.0, true},
                                                        {"bootstrap", 0.0, true}};
    static const std::vector<ParamRule> logistic_rules = {{"step", 0.0, false},
                                                          {"iterations", 1.0, true},
                                                          {"l2", 0.0, false}};
    static const std::vector<ParamRule> bayes_rules = {{"var_smoothing", 0.0, false}};
    static const std::vector<ParamRule> none = {};
    switch (kind) {
        case MachineKind::ridge: return ridge_rules;
        case MachineKind::lasso: return lasso_rules;
        case MachineKind::knn:
        case MachineKind::knn_classifier: return knn_rules;
        case MachineKind::decision_tree:
        case MachineKind::decision_tree_classifier: return tree_rules;
        case MachineKind::random_forest: return forest_rules;
        case MachineKind::logistic_regression: return logistic_rules;
        case MachineKind::naive_bayes: return bayes_rules;
        case MachineKind::external: return none;
    }
    return none;
}

class ExternalMachine final : public Machine {
public:
    ExternalMachine(std::size_t dimension, std::function<double(std::span<const double>)> fn)
        : dimension_(dimension), fn_(std::move(fn)) {}

    double predict(std::span<const double> x) const override { return fn_(x); }
    std::size_t dimension() const override { return dimension_; }

private:
    std::size_t dimension_;
    std::function<double(std::span<const double>)> fn_;
};

void require_integer_labels(const Dataset& train) {
    for (std::size_t i = 0; i < train.rows(); ++i) {
        const double t = train.target(i);
        if (std::floor(t) != t) {
            fail(ErrorCode::label, "classification requires integer labels; row " +
                                       std::to_string(i) + " has target " + std::to_string(t));
        }
    }
}

}  // namespace

void MachineSpec::validate() const {
    const auto& rules = rules_for(kind);
    for (const auto& [key, value] : params) {
        bool known = false;
        for (const ParamRule& rule : rules) {
            if (key != rule.key) continue;
            known = true;
            if (!std::isfinite(value) || value < rule.min) {
                fail(ErrorCode::config, "machine parameter '" + key + "' out of range");
            }
            if (rule.integer && std::floor(value) != value) {
                fail(ErrorCode::config, "machine parameter '" + key + "' must be an integer");
            }
        }
        if (!known) {
            fail(ErrorCode::config, "machine parameter '" + key + "' is not valid for kind '" +
                                        std::string(machine_kind_name(kind)) + "'");
        }
    }
    if (param("tolerance", 1e-6) <= 0.0) {
        fail(ErrorCode::config, "lasso tolerance must be positive");
    }
    if (kind == MachineKind::logistic_regression && param("step", 0.1) <= 0.0) {
        fail(ErrorCode::config, "logistic step must be positive");
    }
}

TrainedMachine fit_machine(const MachineSpec& spec, const Dataset& train) {
    spec.validate();
    if (!train.has_targets()) {
        fail(ErrorCode::invalid_argument, "machines require a training set with targets");
    }
    if (is_classifier_kind(spec.kind)) require_integer_labels(train);

    switch (spec.kind) {
        case MachineKind::ridge: return detail::fit_ridge(spec, train);
        case MachineKind::lasso: return detail::fit_lasso(spec, train);
        case MachineKind::knn: return detail::fit_knn(spec, train, false);
        case MachineKind::decision_tree: return detail::fit_decision_tree(spec, train, false);
        case MachineKind::random_forest: return detail::fit_random_forest(spec, train, false);
        case MachineKind::knn_classifier: return detail::fit_knn(spec, train, true);
        case MachineKind::decision_tree_classifier:
            return detail::fit_decision_tree(spec, train, true);
        case MachineKind::logistic_regression: return detail::fit_logistic(spec, train);
        case MachineKind::naive_bayes: return detail::fit_naive_bayes(spec, train);
        case MachineKind::external:
            fail(ErrorCode::config, "external machines are supplied fitted, not trained here");
    }
    fail(ErrorCode::runtime, "unreachable machine kind");
}

double TrainedMachine::predict(std::span<const double> x) const {
    if (x.size() != model->dimension()) {
        fail(ErrorCode::shape, "query has dimension " + std::to_string(x.size()) +
                                   " but machine '" + name() + "' was trained with " +
                                   std::to_string(model->dimension()));
    }
    return model->predict(x);
}

double machine_predict(const TrainedMachine& machine, std::span<const double> x) {
    return machine.predict(x);
}

TrainedMachine external_machine(std::string name, std::size_t dimension,
                                std::function<double(std::span<const double>)> fn) {
    MachineSpec spec;
    spec.kind = MachineKind::external;
    spec.name = std::move(name);
    return TrainedMachine{std::move(spec),
                          std::make_shared<ExternalMachine>(dimension, std::move(fn)), true, {}};
}

std::vector<MachineSpec> default_regression_machines() {
    std::vector<MachineSpec> roster(4);
    roster[0].kind = MachineKind::ridge;
    roster[1].kind = MachineKind::lasso;
    roster[2].kind = MachineKind::decision_tree;
    roster[3].kind = MachineKind::random_forest;
    return roster;
}

std::vector<MachineSpec> default_classification_machines() {
    std::vector<MachineSpec> roster(4);
    roster[0].kind = MachineKind::knn_classifier;
    roster[1].kind = MachineKind::decision_tree_classifier;
    roster[2].kind = MachineKind::logistic_regression;
    roster[3].kind = MachineKind::naive_bayes;
    return roster;
}

}  // namespace cobra
