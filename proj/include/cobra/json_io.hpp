#pragma once

#include <json.hpp>

#include "cobra/aggregation.hpp"
#include "cobra/datagen.hpp"
#include "cobra/machines.hpp"
#include "cobra/tuning.hpp"

namespace cobra {

// Key order is preserved everywhere so identical inputs serialize to
// identical bytes.
using Json = nlohmann::ordered_json;

Json to_json(const MachineSpec& spec);
MachineSpec machine_spec_from_json(const Json& j);

Json to_json(const KernelSpec& spec);
KernelSpec kernel_spec_from_json(const Json& j);

Json to_json(const AggregatorConfig& config);
AggregatorConfig aggregator_config_from_json(const Json& j);

Json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const Json& j);

Json to_json(const TuneResult& result);

/// Wraps nlohmann parse errors into the library error type.
Json parse_json(const std::string& text, const std::string& what);

}  // namespace cobra
