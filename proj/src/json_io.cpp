#include "cobra/json_io.hpp"

#include <string>

namespace cobra {

namespace {

void expect_object(const Json& j, const std::string& what) {
    if (!j.is_object()) fail(ErrorCode::config, what + " must be a JSON object");
}

}  // namespace

Json parse_json(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::parse, what + " is not valid JSON");
    return j;
}

Json to_json(const MachineSpec& spec) {
    Json j;
    j["kind"] = std::string(machine_kind_name(spec.kind));
    if (!spec.params.empty()) j["params"] = spec.params;
    if (spec.seed != 0) j["seed"] = spec.seed;
    if (!spec.name.empty()) j["name"] = spec.name;
    return j;
}

MachineSpec machine_spec_from_json(const Json& j) {
    MachineSpec spec;
    if (j.is_string()) {
        spec.kind = parse_machine_kind(j.get<std::string>());
        return spec;
    }
    expect_object(j, "machine spec");
    if (!j.contains("kind")) fail(ErrorCode::config, "machine spec needs a 'kind'");
    spec.kind = parse_machine_kind(j.at("kind").get<std::string>());
    if (j.contains("params")) {
        for (const auto& [key, value] : j.at("params").items()) {
            if (!value.is_number()) {
                fail(ErrorCode::config, "machine parameter '" + key + "' must be numeric");
            }
            spec.params[key] = value.get<double>();
        }
    }
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("name")) spec.name = j.at("name").get<std::string>();
    spec.validate();
    return spec;
}

Json to_json(const KernelSpec& spec) {
    Json j;
    j["kind"] = std::string(kernel_kind_name(spec.kind));
    j["bandwidth"] = spec.bandwidth;
    return j;
}

KernelSpec kernel_spec_from_json(const Json& j) {
    KernelSpec spec;
    expect_object(j, "kernel spec");
    if (j.contains("kind")) spec.kind = parse_kernel_kind(j.at("kind").get<std::string>());
    if (j.contains("bandwidth")) spec.bandwidth = j.at("bandwidth").get<double>();
    spec.validate();
    return spec;
}

Json to_json(const AggregatorConfig& config) {
    Json j;
    j["lambda"] = config.lambda;
    j["epsilon"] = config.epsilon;
    j["alpha"] = config.alpha;
    j["kernel"] = to_json(config.kernel);
    if (!config.machine_weights.empty()) j["machine_weights"] = config.machine_weights;
    j["mix_alpha"] = config.mix_alpha;
    j["uniform_fallback"] = config.uniform_fallback;
    j["point_weighting"] =
        config.point_weighting == PointWeighting::kernel ? "kernel" : "exponential";
    return j;
}

AggregatorConfig aggregator_config_from_json(const Json& j) {
    AggregatorConfig config;
    expect_object(j, "aggregator config");
    if (j.contains("lambda")) config.lambda = j.at("lambda").get<double>();
    if (j.contains("epsilon")) config.epsilon = j.at("epsilon").get<double>();
    if (j.contains("alpha")) config.alpha = j.at("alpha").get<int>();
    if (j.contains("kernel")) config.kernel = kernel_spec_from_json(j.at("kernel"));
    if (j.contains("machine_weights")) {
        config.machine_weights = j.at("machine_weights").get<std::vector<double>>();
    }
    if (j.contains("mix_alpha")) config.mix_alpha = j.at("mix_alpha").get<double>();
    if (j.contains("uniform_fallback")) {
        config.uniform_fallback = j.at("uniform_fallback").get<bool>();
    }
    if (j.contains("point_weighting")) {
        const auto name = j.at("point_weighting").get<std::string>();
        if (name == "kernel") config.point_weighting = PointWeighting::kernel;
        else if (name == "exponential") config.point_weighting = PointWeighting::exponential;
        else fail(ErrorCode::config, "unknown point weighting '" + name + "'");
    }
    return config;
}

Json to_json(const GeneratorSpec& spec) {
    Json j;
    j["kind"] = std::string(generator_kind_name(spec.kind));
    j["n"] = spec.n;
    j["d"] = spec.d;
    j["noise"] = spec.noise;
    j["seed"] = spec.seed;
    return j;
}

GeneratorSpec generator_spec_from_json(const Json& j) {
    GeneratorSpec spec;
    expect_object(j, "generator spec");
    if (!j.contains("kind")) fail(ErrorCode::config, "generator spec needs a 'kind'");
    spec.kind = parse_generator_kind(j.at("kind").get<std::string>());
    if (spec.kind == GeneratorKind::moons || spec.kind == GeneratorKind::circles) spec.d = 2;
    if (j.contains("n")) spec.n = j.at("n").get<std::size_t>();
    if (j.contains("d")) spec.d = j.at("d").get<std::size_t>();
    if (j.contains("noise")) spec.noise = j.at("noise").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    spec.validate();
    return spec;
}

Json to_json(const TuneResult& result) {
    Json j;
    j["best"] = result.best;
    j["best_loss"] = result.best_loss;
    j["loss"] = result.loss_name;
    j["folds"] = result.folds;
    j["seed"] = result.seed;
    Json table = Json::array();
    for (const TuneCandidate& c : result.table) {
        Json row;
        row["params"] = c.params;
        row["mean_loss"] = c.mean_loss;
        row["std_loss"] = c.std_loss;
        row["feasible"] = c.feasible;
        row["no_consensus"] = c.no_consensus;
        row["evaluated"] = c.evaluated;
        table.push_back(std::move(row));
    }
    j["candidates"] = std::move(table);
    return j;
}

}  // namespace cobra
