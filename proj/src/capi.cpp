#include "cobra.h"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "cobra/bench.hpp"
#include "cobra/csv.hpp"
#include "cobra/json_io.hpp"
#include "cobra/model.hpp"

struct cobra_dataset {
    cobra::Dataset impl;
};

struct cobra_model {
    cobra::Model impl;
};

struct cobra_machine {
    cobra::TrainedMachine impl;
};

namespace {

thread_local std::string g_last_error;

cobra_status map_code(cobra::ErrorCode code) {
    switch (code) {
        case cobra::ErrorCode::invalid_argument: return COBRA_ERR_INVALID_ARGUMENT;
        case cobra::ErrorCode::invalid_split: return COBRA_ERR_INVALID_SPLIT;
        case cobra::ErrorCode::shape: return COBRA_ERR_SHAPE;
        case cobra::ErrorCode::no_consensus: return COBRA_ERR_NO_CONSENSUS;
        case cobra::ErrorCode::empty_ensemble: return COBRA_ERR_EMPTY_ENSEMBLE;
        case cobra::ErrorCode::machine_output: return COBRA_ERR_MACHINE_OUTPUT;
        case cobra::ErrorCode::label: return COBRA_ERR_LABEL;
        case cobra::ErrorCode::invalid_weights: return COBRA_ERR_INVALID_WEIGHTS;
        case cobra::ErrorCode::parse: return COBRA_ERR_PARSE;
        case cobra::ErrorCode::config: return COBRA_ERR_CONFIG;
        case cobra::ErrorCode::io: return COBRA_ERR_IO;
        case cobra::ErrorCode::runtime: return COBRA_ERR_RUNTIME;
    }
    return COBRA_ERR_RUNTIME;
}

template <typename Fn>
cobra_status guarded(Fn&& fn) {
    try {
        fn();
        return COBRA_OK;
    } catch (const cobra::Error& e) {
        g_last_error = e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return COBRA_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return COBRA_ERR_RUNTIME;
    }
}

cobra_status invalid(const char* message) {
    g_last_error = message;
    return COBRA_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& text) {
    char* out = new char[text.size() + 1];
    std::memcpy(out, text.c_str(), text.size() + 1);
    return out;
}

cobra::ModelOptions model_options_from_json(const cobra::Json& j) {
    cobra::ModelOptions options;
    if (j.contains("estimator")) {
        options.kind = cobra::parse_estimator_kind(j.at("estimator").get<std::string>());
    }
    if (j.contains("config")) {
        options.config = cobra::aggregator_config_from_json(j.at("config"));
    }
    if (j.contains("machines")) {
        for (const auto& mj : j.at("machines")) {
            options.machines.push_back(cobra::machine_spec_from_json(mj));
        }
    }
    if (j.contains("k")) options.k = j.at("k").get<std::size_t>();
    if (j.contains("seed")) options.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("tune")) {
        cobra::TuneDirective directive;
        const auto& tj = j.at("tune");
        if (tj.contains("grids")) {
            for (const auto& gj : tj.at("grids")) {
                directive.grids.push_back(cobra::GridSpec::parse(gj.get<std::string>()));
            }
        }
        if (tj.contains("folds")) directive.folds = tj.at("folds").get<int>();
        options.tune = std::move(directive);
    }
    return options;
}

cobra_status train_impl(const cobra_dataset* data, const char* options_json,
                        cobra_machine* const* extra, size_t extra_count, cobra_model** out) {
    if (data == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        cobra::Json j = cobra::Json::object();
        if (options_json != nullptr && options_json[0] != '\0') {
            j = cobra::parse_json(options_json, "model options");
        }
        cobra::ModelOptions options = model_options_from_json(j);
        std::vector<cobra::TrainedMachine> external;
        external.reserve(extra_count);
        for (size_t i = 0; i < extra_count; ++i) {
            if (extra[i] == nullptr) cobra::fail(cobra::ErrorCode::invalid_argument, "null machine");
            external.push_back(extra[i]->impl);
        }
        *out = new cobra_model{
            cobra::Model::train(data->impl, std::move(options), std::move(external))};
    });
}

}  // namespace

extern "C" {

const char* cobra_version(void) { return "0.1.0"; }

const char* cobra_last_error(void) { return g_last_error.c_str(); }

void cobra_string_free(char* text) { delete[] text; }

cobra_status cobra_dataset_create(const double* features, const double* targets, size_t n,
                                  size_t d, cobra_dataset** out) {
    if (features == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        std::vector<double> feats(features, features + n * d);
        std::optional<std::vector<double>> targs;
        if (targets != nullptr) targs.emplace(targets, targets + n);
        *out = new cobra_dataset{cobra::Dataset(n, d, std::move(feats), std::move(targs))};
    });
}

cobra_status cobra_dataset_generate(const char* spec_json, cobra_dataset** out) {
    if (spec_json == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        const cobra::Json j = cobra::parse_json(spec_json, "generator spec");
        *out = new cobra_dataset{cobra::generate(cobra::generator_spec_from_json(j))};
    });
}

cobra_status cobra_dataset_load_csv(const char* path, const char* target_column, int has_header,
                                    cobra_dataset** out) {
    if (path == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        const std::string target = target_column == nullptr ? "" : target_column;
        *out = new cobra_dataset{cobra::load_csv(path, target, has_header != 0)};
    });
}

cobra_status cobra_dataset_save_csv(const cobra_dataset* data, const char* path) {
    if (data == nullptr || path == nullptr) return invalid("null argument");
    return guarded([&] { cobra::save_csv(data->impl, path); });
}

size_t cobra_dataset_rows(const cobra_dataset* data) {
    return data == nullptr ? 0 : data->impl.rows();
}

size_t cobra_dataset_cols(const cobra_dataset* data) {
    return data == nullptr ? 0 : data->impl.cols();
}

int cobra_dataset_has_targets(const cobra_dataset* data) {
    return data != nullptr && data->impl.has_targets() ? 1 : 0;
}

cobra_status cobra_dataset_row(const cobra_dataset* data, size_t i, double* out, size_t out_len) {
    if (data == nullptr || out == nullptr) return invalid("null argument");
    return guarded([&] {
        if (i >= data->impl.rows()) {
            cobra::fail(cobra::ErrorCode::invalid_argument, "row index out of range");
        }
        if (out_len != data->impl.cols()) {
            cobra::fail(cobra::ErrorCode::shape, "row buffer must have length " +
                                                     std::to_string(data->impl.cols()));
        }
        const auto row = data->impl.row(i);
        std::memcpy(out, row.data(), row.size() * sizeof(double));
    });
}

cobra_status cobra_dataset_split(const cobra_dataset* data, size_t k, unsigned long long seed,
                                 cobra_dataset** train_half, cobra_dataset** retained_half) {
    if (data == nullptr || train_half == nullptr || retained_half == nullptr) {
        return invalid("null argument");
    }
    *train_half = nullptr;
    *retained_half = nullptr;
    return guarded([&] {
        cobra::SplitPair split = cobra::split_dataset(data->impl, k, seed);
        *train_half = new cobra_dataset{std::move(split.train_half)};
        *retained_half = new cobra_dataset{std::move(split.retained_half)};
    });
}

void cobra_dataset_free(cobra_dataset* data) { delete data; }

cobra_status cobra_machine_callback_create(cobra_machine_fn fn, void* user_data, const char* name,
                                           size_t dimension, cobra_machine** out) {
    if (fn == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] {
        const std::string display = name == nullptr ? "external" : name;
        *out = new cobra_machine{cobra::external_machine(
            display, dimension, [fn, user_data](std::span<const double> x) {
                return fn(x.data(), x.size(), user_data);
            })};
    });
}

void cobra_machine_free(cobra_machine* machine) { delete machine; }

cobra_status cobra_model_train(const cobra_dataset* data, const char* options_json,
                               cobra_model** out) {
    return train_impl(data, options_json, nullptr, 0, out);
}

cobra_status cobra_model_train_ex(const cobra_dataset* data, const char* options_json,
                                  cobra_machine* const* extra, size_t extra_count,
                                  cobra_model** out) {
    if (extra_count > 0 && extra == nullptr) return invalid("null machine array");
    return train_impl(data, options_json, extra, extra_count, out);
}

cobra_status cobra_model_predict(const cobra_model* model, const double* x, size_t d,
                                 double* out) {
    if (model == nullptr || x == nullptr || out == nullptr) return invalid("null argument");
    return guarded([&] { *out = model->impl.predict(std::span<const double>(x, d)); });
}

cobra_status cobra_model_weights(const cobra_model* model, const double* x, size_t d, double* out,
                                 size_t out_len) {
    if (model == nullptr || x == nullptr || out == nullptr) return invalid("null argument");
    return guarded([&] {
        const auto& agg = model->impl.aggregator();
        if (out_len != agg.retained_count()) {
            cobra::fail(cobra::ErrorCode::shape,
                        "weight buffer must have length " + std::to_string(agg.retained_count()));
        }
        const auto w = agg.weights(model->impl.options().kind, model->impl.options().config,
                                   std::span<const double>(x, d));
        std::memcpy(out, w.data(), w.size() * sizeof(double));
    });
}

size_t cobra_model_retained_count(const cobra_model* model) {
    return model == nullptr ? 0 : model->impl.aggregator().retained_count();
}

size_t cobra_model_machine_count(const cobra_model* model) {
    return model == nullptr ? 0 : model->impl.aggregator().machine_count();
}

cobra_status cobra_model_tuning(const cobra_model* model, char** json_out) {
    if (model == nullptr || json_out == nullptr) return invalid("null argument");
    *json_out = nullptr;
    return guarded([&] {
        if (model->impl.tuning()) {
            *json_out = dup_string(cobra::to_json(*model->impl.tuning()).dump(2));
        }
    });
}

cobra_status cobra_model_save(const cobra_model* model, const char* dir) {
    if (model == nullptr || dir == nullptr) return invalid("null argument");
    return guarded([&] { model->impl.save(dir); });
}

cobra_status cobra_model_load(const char* dir, cobra_model** out) {
    if (dir == nullptr || out == nullptr) return invalid("null argument");
    *out = nullptr;
    return guarded([&] { *out = new cobra_model{cobra::Model::load(dir)}; });
}

cobra_status cobra_model_export_boundary(const cobra_model* model, double x1_min, double x1_max,
                                         double x2_min, double x2_max, size_t resolution,
                                         const char* out_csv) {
    if (model == nullptr || out_csv == nullptr) return invalid("null argument");
    return guarded([&] {
        cobra::Bounds2D bounds{x1_min, x1_max, x2_min, x2_max};
        if (std::isnan(x1_min) || std::isnan(x1_max) || std::isnan(x2_min) || std::isnan(x2_max)) {
            bounds = cobra::data_bounds(model->impl.data(), 0.0);
            const double margin = 0.05 * std::max(bounds.x1_max - bounds.x1_min,
                                                  bounds.x2_max - bounds.x2_min);
            bounds.x1_min -= margin;
            bounds.x1_max += margin;
            bounds.x2_min -= margin;
            bounds.x2_max += margin;
        }
        cobra::export_decision_boundary(model->impl.aggregator(), model->impl.options().config,
                                        bounds, resolution, out_csv);
    });
}

void cobra_model_free(cobra_model* model) { delete model; }

cobra_status cobra_tune(const cobra_dataset* data, const char* options_json, char** result_json) {
    if (data == nullptr || options_json == nullptr || result_json == nullptr) {
        return invalid("null argument");
    }
    *result_json = nullptr;
    return guarded([&] {
        const cobra::Json j = cobra::parse_json(options_json, "tune options");
        cobra::EstimatorKind kind = cobra::EstimatorKind::kernelcobra;
        if (j.contains("estimator")) {
            kind = cobra::parse_estimator_kind(j.at("estimator").get<std::string>());
        }
        cobra::AggregatorConfig config;
        if (j.contains("config")) config = cobra::aggregator_config_from_json(j.at("config"));
        std::vector<cobra::MachineSpec> machines;
        if (j.contains("machines")) {
            for (const auto& mj : j.at("machines")) {
                machines.push_back(cobra::machine_spec_from_json(mj));
            }
        } else {
            machines = kind == cobra::EstimatorKind::classifier
                           ? cobra::default_classification_machines()
                           : cobra::default_regression_machines();
        }
        std::vector<cobra::GridSpec> grids;
        if (j.contains("grids")) {
            for (const auto& gj : j.at("grids")) {
                grids.push_back(cobra::GridSpec::parse(gj.get<std::string>()));
            }
        } else {
            grids = cobra::default_grids(kind);
        }
        int folds = 5;
        if (j.contains("folds")) folds = j.at("folds").get<int>();
        std::uint64_t seed = 42;
        if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();

        const cobra::TuneResult result =
            cobra::grid_search(kind, config, machines, grids, data->impl, folds, seed);
        *result_json = dup_string(cobra::to_json(result).dump(2));
    });
}

cobra_status cobra_bench_rmse(const char* config_json, const char* out_dir, char** report_json) {
    if (config_json == nullptr) return invalid("null config");
    if (report_json != nullptr) *report_json = nullptr;
    return guarded([&] {
        const cobra::Json j = cobra::parse_json(config_json, "bench config");
        const cobra::BenchConfig config = cobra::BenchConfig::from_json(j);
        const cobra::BenchReport report = cobra::run_rmse_benchmark(config);
        const std::string dir =
            out_dir != nullptr && out_dir[0] != '\0' ? out_dir : config.out_dir;
        cobra::write_rmse_outputs(report, dir);
        if (report_json != nullptr) *report_json = dup_string(report.to_json().dump(2));
    });
}

cobra_status cobra_bench_timing(const char* config_json, const char* sweep, const char* out_dir,
                                char** table_json) {
    if (config_json == nullptr || sweep == nullptr) return invalid("null argument");
    if (table_json != nullptr) *table_json = nullptr;
    return guarded([&] {
        const cobra::Json j = cobra::parse_json(config_json, "bench config");
        const cobra::BenchConfig config = cobra::BenchConfig::from_json(j);
        const cobra::TimingSweep parsed = cobra::TimingSweep::parse(sweep);
        const cobra::TimingTable table = cobra::run_timing_benchmark(config, parsed);
        const std::string dir =
            out_dir != nullptr && out_dir[0] != '\0' ? out_dir : config.out_dir;
        cobra::write_timing_outputs(table, dir);
        if (table_json != nullptr) *table_json = dup_string(table.to_json().dump(2));
    });
}

}  // extern "C"
