#include "cobra/model.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "cobra/csv.hpp"
#include "cobra/json_io.hpp"
#include "cobra/rng.hpp"

namespace cobra {

Model::Model(Dataset data, ModelOptions options, std::optional<TuneResult> tuned,
             Aggregator aggregator, bool has_external)
    : data_(std::move(data)),
      options_(std::move(options)),
      tune_result_(std::move(tuned)),
      aggregator_(std::move(aggregator)),
      has_external_(has_external) {}

Model Model::train(Dataset data, ModelOptions options, std::vector<TrainedMachine> external) {
    if (!data.has_targets()) fail(ErrorCode::invalid_argument, "model training needs targets");
    if (options.machines.empty()) {
        options.machines = options.kind == EstimatorKind::classifier
                               ? default_classification_machines()
                               : default_regression_machines();
    }
    for (const auto& spec : options.machines) spec.validate();

    std::optional<TuneResult> tuned;
    if (options.tune) {
        const auto& directive = *options.tune;
        const auto grids = directive.grids.empty() ? default_grids(options.kind) : directive.grids;
        tuned = grid_search(options.kind, options.config, options.machines, grids, data,
                            directive.folds, mix_seed(options.seed, 0x7E));
        options.config = apply_params(options.config, tuned->best);
        options.tune.reset();  // the resolved config carries the tuned values
    }

    const std::size_t k = options.k > 0 ? options.k : default_split_size(data.rows());
    options.k = k;
    SplitPair split = split_dataset(data, k, options.seed);

    std::vector<TrainedMachine> machines;
    machines.reserve(options.machines.size() + external.size());
    for (const auto& spec : options.machines) {
        machines.push_back(fit_machine(spec, split.train_half));
    }
    const bool has_external = !external.empty();
    for (auto& m : external) machines.push_back(std::move(m));

    options.config.validate(machines.size());
    Aggregator aggregator(std::move(machines), std::move(split));
    return Model(std::move(data), std::move(options), std::move(tuned), std::move(aggregator),
                 has_external);
}

double Model::predict(std::span<const double> x) const {
    return aggregator_.predict(options_.kind, options_.config, x);
}

void Model::save(const std::string& dir) const {
    if (has_external_) {
        fail(ErrorCode::io, "models holding externally supplied machines cannot be persisted");
    }
    std::filesystem::create_directories(dir);

    Json j;
    j["format"] = 1;
    j["estimator"] = std::string(estimator_kind_name(options_.kind));
    j["config"] = to_json(options_.config);
    Json machines = Json::array();
    for (const auto& spec : options_.machines) machines.push_back(to_json(spec));
    j["machines"] = std::move(machines);
    j["k"] = options_.k;
    j["seed"] = options_.seed;
    if (tune_result_) j["tuning"] = to_json(*tune_result_);

    std::ofstream out(dir + "/model.json");
    if (!out) fail(ErrorCode::io, "cannot write '" + dir + "/model.json'");
    out << j.dump(2) << '\n';
    save_csv(data_, dir + "/train.csv");
}

Model Model::load(const std::string& dir) {
    std::ifstream in(dir + "/model.json");
    if (!in) fail(ErrorCode::io, "cannot open '" + dir + "/model.json'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const Json j = parse_json(buffer.str(), "model.json");

    ModelOptions options;
    options.kind = parse_estimator_kind(j.at("estimator").get<std::string>());
    options.config = aggregator_config_from_json(j.at("config"));
    for (const auto& mj : j.at("machines")) {
        options.machines.push_back(machine_spec_from_json(mj));
    }
    options.k = j.at("k").get<std::size_t>();
    options.seed = j.at("seed").get<std::uint64_t>();

    Dataset data = load_csv(dir + "/train.csv", "y", true);
    return train(std::move(data), std::move(options));
}

}  // namespace cobra
