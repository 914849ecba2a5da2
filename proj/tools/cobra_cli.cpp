// Command-line front end; everything goes through the C API in cobra.h.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cobra.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitRuntimeError = 2;

int exit_code_for(cobra_status status) {
    switch (status) {
        case COBRA_OK:
            return kExitOk;
        case COBRA_ERR_INVALID_ARGUMENT:
        case COBRA_ERR_INVALID_SPLIT:
        case COBRA_ERR_PARSE:
        case COBRA_ERR_CONFIG:
            return kExitConfigError;
        default:
            return kExitRuntimeError;
    }
}

int report_failure(const char* what, cobra_status status) {
    std::cerr << what << ": " << cobra_last_error() << "\n";
    return exit_code_for(status);
}

// load-phase failures (unreadable data, model or config inputs) are usage
// problems, not runtime ones
int report_load_failure(const char* what) {
    std::cerr << what << ": " << cobra_last_error() << "\n";
    return kExitConfigError;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return {};
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

struct ModelFlags {
    std::string estimator = "kernelcobra";
    double lambda = 1.0;
    double epsilon = 0.0;
    int alpha = 0;
    std::string kernel = "exponential";
    double bandwidth = 1.0;
    double mix_alpha = 1.0;
    bool uniform_fallback = false;
    std::string machine_weights;
    std::vector<std::string> machines;
    std::vector<std::string> tune_grids;
    bool tune = false;
    int folds = 5;
    std::size_t k = 0;
    unsigned long long seed = 42;

    void attach(CLI::App* cmd) {
        cmd->add_option("--estimator", estimator,
                        "cobra | kernelcobra | general-kernel | mixcobra | unsupervised | "
                        "classifier");
        cmd->add_option("--lambda", lambda, "temperature for the exponential weights");
        cmd->add_option("--epsilon", epsilon, "consensus radius (0 = half prediction range)");
        cmd->add_option("--alpha", alpha, "machines that must agree (0 = all)");
        cmd->add_option("--kernel", kernel, "exponential | gaussian | threshold | triangular");
        cmd->add_option("--bandwidth", bandwidth, "kernel bandwidth");
        cmd->add_option("--mix-alpha", mix_alpha, "input-proximity coefficient (mixcobra)");
        cmd->add_flag("--uniform-fallback", uniform_fallback,
                      "fall back to uniform weights instead of failing on no consensus");
        cmd->add_option("--machine-weights", machine_weights,
                        "comma-separated per-machine weights summing to 1 (unsupervised)");
        cmd->add_option("--machine", machines,
                        "machine kind, repeatable (default roster when omitted)");
        cmd->add_flag("--tune", tune, "grid-search hyperparameters before fitting");
        cmd->add_option("--tune-grid", tune_grids,
                        "grid such as lambda=log:1e-3:1e3:50, repeatable (implies --tune)");
        cmd->add_option("--folds", folds, "cross-validation folds");
        cmd->add_option("--k", k, "training-half size (0 = half the data)");
        cmd->add_option("--seed", seed, "split / tuning seed");
    }

    Json to_options() const {
        Json j;
        j["estimator"] = estimator;
        Json config;
        config["lambda"] = lambda;
        config["epsilon"] = epsilon;
        config["alpha"] = alpha;
        config["kernel"] = Json{{"kind", kernel}, {"bandwidth", bandwidth}};
        config["mix_alpha"] = mix_alpha;
        config["uniform_fallback"] = uniform_fallback;
        if (!machine_weights.empty()) {
            Json weights = Json::array();
            std::stringstream ss(machine_weights);
            std::string cell;
            while (std::getline(ss, cell, ',')) weights.push_back(std::atof(cell.c_str()));
            config["machine_weights"] = std::move(weights);
        }
        j["config"] = std::move(config);
        if (!machines.empty()) {
            Json roster = Json::array();
            for (const auto& m : machines) roster.push_back(Json{{"kind", m}});
            j["machines"] = std::move(roster);
        }
        if (tune || !tune_grids.empty()) {
            Json tj;
            if (!tune_grids.empty()) tj["grids"] = tune_grids;
            tj["folds"] = folds;
            j["tune"] = std::move(tj);
        }
        j["k"] = k;
        j["seed"] = seed;
        return j;
    }
};

unsigned long long effective_seed(unsigned long long flag_seed) {
    if (const char* env = std::getenv("COBRA_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return flag_seed;
}

int run_gen(const std::string& kind, std::size_t n, std::size_t d, double noise,
            unsigned long long seed, const std::string& out) {
    Json spec;
    spec["kind"] = kind;
    spec["n"] = n;
    if (kind == "moons" || kind == "circles") spec["d"] = 2;
    else spec["d"] = d;
    spec["noise"] = noise;
    spec["seed"] = effective_seed(seed);

    cobra_dataset* data = nullptr;
    cobra_status status = cobra_dataset_generate(spec.dump().c_str(), &data);
    if (status != COBRA_OK) return report_failure("generation failed", status);
    status = cobra_dataset_save_csv(data, out.c_str());
    cobra_dataset_free(data);
    if (status != COBRA_OK) return report_failure("write failed", status);
    std::cout << "wrote " << out << " (" << n << " rows)\n";
    return kExitOk;
}

int run_train(const std::string& data_path, const std::string& target, bool no_header,
              ModelFlags& flags, const std::string& out_dir) {
    cobra_dataset* data = nullptr;
    cobra_status status =
        cobra_dataset_load_csv(data_path.c_str(), target.c_str(), no_header ? 0 : 1, &data);
    if (status != COBRA_OK) return report_load_failure("cannot load data");

    flags.seed = effective_seed(flags.seed);
    cobra_model* model = nullptr;
    status = cobra_model_train(data, flags.to_options().dump().c_str(), &model);
    cobra_dataset_free(data);
    if (status != COBRA_OK) return report_failure("training failed", status);

    status = cobra_model_save(model, out_dir.c_str());
    if (status == COBRA_OK) {
        char* tuning = nullptr;
        if (cobra_model_tuning(model, &tuning) == COBRA_OK && tuning != nullptr) {
            const Json tj = Json::parse(tuning);
            std::cout << "tuned parameters: " << tj["best"].dump()
                      << " (validation " << tj["loss"].get<std::string>() << " "
                      << tj["best_loss"].get<double>() << ")\n";
            cobra_string_free(tuning);
        }
        std::cout << "model written to " << out_dir << "\n";
    }
    cobra_model_free(model);
    if (status != COBRA_OK) return report_failure("cannot save model", status);
    return kExitOk;
}

int run_predict(const std::string& model_dir, const std::string& input, bool no_header,
                const std::string& out_path) {
    cobra_model* model = nullptr;
    cobra_status status = cobra_model_load(model_dir.c_str(), &model);
    if (status != COBRA_OK) return report_load_failure("cannot load model");

    cobra_dataset* points = nullptr;
    status = cobra_dataset_load_csv(input.c_str(), "", no_header ? 0 : 1, &points);
    if (status != COBRA_OK) {
        cobra_model_free(model);
        return report_load_failure("cannot load input");
    }

    const size_t rows = cobra_dataset_rows(points);
    const size_t cols = cobra_dataset_cols(points);
    std::vector<double> row(cols);
    std::vector<double> predictions(rows);
    for (size_t r = 0; r < rows; ++r) {
        status = cobra_dataset_row(points, r, row.data(), cols);
        if (status == COBRA_OK) {
            status = cobra_model_predict(model, row.data(), cols, &predictions[r]);
        }
        if (status != COBRA_OK) {
            cobra_dataset_free(points);
            cobra_model_free(model);
            return report_failure("prediction failed", status);
        }
    }
    cobra_dataset_free(points);
    cobra_model_free(model);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "cannot open " << out_path << "\n";
            return kExitRuntimeError;
        }
        out = &file;
    }
    *out << "prediction\n";
    char buf[40];
    for (size_t i = 0; i < rows; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", predictions[i]);
        *out << buf;
    }
    return kExitOk;
}

int run_tune(const std::string& data_path, const std::string& target, bool no_header,
             const std::string& estimator, const std::vector<std::string>& grids, int folds,
             unsigned long long seed, const std::vector<std::string>& machines,
             const std::string& out_json, const std::string& out_csv) {
    cobra_dataset* data = nullptr;
    cobra_status status =
        cobra_dataset_load_csv(data_path.c_str(), target.c_str(), no_header ? 0 : 1, &data);
    if (status != COBRA_OK) return report_load_failure("cannot load data");

    Json options;
    options["estimator"] = estimator;
    if (!grids.empty()) options["grids"] = grids;
    options["folds"] = folds;
    options["seed"] = effective_seed(seed);
    if (!machines.empty()) {
        Json roster = Json::array();
        for (const auto& m : machines) roster.push_back(Json{{"kind", m}});
        options["machines"] = std::move(roster);
    }

    char* result = nullptr;
    status = cobra_tune(data, options.dump().c_str(), &result);
    cobra_dataset_free(data);
    if (status != COBRA_OK) return report_failure("tuning failed", status);

    const Json rj = Json::parse(result);
    std::cout << "best: " << rj["best"].dump() << "  (" << rj["loss"].get<std::string>() << " "
              << rj["best_loss"].get<double>() << ", " << rj["folds"].get<int>() << " folds)\n";
    if (!out_json.empty()) {
        std::ofstream(out_json) << result << "\n";
        std::cout << "wrote " << out_json << "\n";
    }
    if (!out_csv.empty()) {
        std::ofstream csv(out_csv);
        csv << "candidate";
        std::vector<std::string> param_names;
        if (!rj["candidates"].empty()) {
            for (const auto& item : rj["candidates"][0]["params"].items()) {
                param_names.push_back(item.key());
                csv << ',' << item.key();
            }
        }
        csv << ",mean_loss,std_loss,feasible,no_consensus\n";
        size_t index = 0;
        for (const auto& c : rj["candidates"]) {
            csv << index++;
            for (const auto& p : param_names) csv << ',' << c["params"][p].get<double>();
            csv << ',' << c["mean_loss"].get<double>() << ',' << c["std_loss"].get<double>() << ','
                << (c["feasible"].get<bool>() ? 1 : 0) << ',' << c["no_consensus"].get<size_t>()
                << '\n';
        }
        std::cout << "wrote " << out_csv << "\n";
    }
    cobra_string_free(result);
    return kExitOk;
}

int run_bench_rmse(const std::string& config_path, const std::string& out_dir) {
    const std::string config = read_file(config_path);
    if (config.empty()) {
        std::cerr << "cannot read config " << config_path << "\n";
        return kExitConfigError;
    }
    char* report = nullptr;
    const cobra_status status =
        cobra_bench_rmse(config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &report);
    if (status != COBRA_OK) return report_failure("benchmark failed", status);

    const Json rj = Json::parse(report);
    cobra_string_free(report);
    bool any_failed = false;
    for (const auto& ds : rj["datasets"]) {
        std::cout << "dataset " << ds["dataset"].get<std::string>() << " ("
                  << ds["runs_succeeded"].get<size_t>() << "/" << rj["runs"].get<int>()
                  << " runs)\n";
        for (const auto& m : ds["models"]) {
            std::printf("  %-28s %10.4f  (+/- %.4f)%s\n", m["model"].get<std::string>().c_str(),
                        m["mean_rmse"].get<double>(), m["std_rmse"].get<double>(),
                        m["best"].get<bool>() ? "  <- best" : "");
        }
        if (ds["runs_failed"].get<size_t>() > 0) any_failed = true;
    }
    if (any_failed) {
        std::cerr << "some runs failed; see failed_runs.json in the output directory\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

int run_bench_timing(const std::string& config_path, const std::string& sweep,
                     const std::string& out_dir) {
    std::string config = read_file(config_path);
    if (config.empty()) config = "{}";
    char* table = nullptr;
    const cobra_status status = cobra_bench_timing(
        config.c_str(), sweep.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &table);
    if (status != COBRA_OK) return report_failure("timing benchmark failed", status);

    const Json tj = Json::parse(table);
    cobra_string_free(table);
    std::printf("%-14s %8s %20s %20s\n", "estimator", tj["axis"].get<std::string>().c_str(),
                "aggregation us/query", "end-to-end us/query");
    for (const auto& row : tj["rows"]) {
        std::printf("%-14s %8zu %20.3f %20.3f\n", row["estimator"].get<std::string>().c_str(),
                    row["value"].get<size_t>(), row["aggregate_median_us"].get<double>(),
                    row["end_to_end_median_us"].get<double>());
    }
    return kExitOk;
}

int run_bench_boundary(const std::string& data_path, const std::string& target, bool no_header,
                       ModelFlags& flags, std::size_t resolution, const std::string& bounds,
                       const std::string& out_path) {
    cobra_dataset* data = nullptr;
    cobra_status status =
        cobra_dataset_load_csv(data_path.c_str(), target.c_str(), no_header ? 0 : 1, &data);
    if (status != COBRA_OK) return report_load_failure("cannot load data");

    flags.estimator = "classifier";
    flags.seed = effective_seed(flags.seed);
    cobra_model* model = nullptr;
    status = cobra_model_train(data, flags.to_options().dump().c_str(), &model);
    cobra_dataset_free(data);
    if (status != COBRA_OK) return report_failure("training failed", status);

    double b[4] = {std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN(),
                   std::numeric_limits<double>::quiet_NaN()};
    if (!bounds.empty()) {
        std::stringstream ss(bounds);
        std::string cell;
        for (double& v : b) {
            if (!std::getline(ss, cell, ':')) {
                std::cerr << "bounds must look like x1min:x1max:x2min:x2max\n";
                cobra_model_free(model);
                return kExitConfigError;
            }
            v = std::atof(cell.c_str());
        }
    }
    status = cobra_model_export_boundary(model, b[0], b[1], b[2], b[3], resolution,
                                         out_path.c_str());
    cobra_model_free(model);
    if (status != COBRA_OK) return report_failure("boundary export failed", status);
    std::cout << "wrote " << out_path << " (" << resolution << "x" << resolution << " grid)\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"consensus-based ensemble aggregation toolkit"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    std::string gen_kind;
    std::size_t gen_n = 600;
    std::size_t gen_d = 10;
    double gen_noise = 1.0;
    unsigned long long gen_seed = 42;
    std::string gen_out = "data.csv";
    gen->add_option("kind", gen_kind,
                    "linear-gaussian | friedman1 | sparse-uncorrelated | moons | circles | "
                    "linearly-separable")
        ->required();
    gen->add_option("--n", gen_n, "sample count");
    gen->add_option("--d", gen_d, "dimension (ignored for moons/circles)");
    gen->add_option("--noise", gen_noise, "noise standard deviation");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output CSV path");

    // train
    auto* train = app.add_subcommand("train", "fit an aggregation model and save it");
    std::string train_data;
    std::string train_target = "y";
    bool train_no_header = false;
    std::string train_out = "model";
    ModelFlags train_flags;
    train->add_option("--data", train_data, "training CSV")->required();
    train->add_option("--target", train_target, "target column name or index");
    train->add_flag("--no-header", train_no_header, "CSV has no header row");
    train->add_option("--out", train_out, "model directory")->required();
    train_flags.attach(train);

    // predict
    auto* predict = app.add_subcommand("predict", "predict with a saved model");
    std::string predict_model;
    std::string predict_input;
    bool predict_no_header = false;
    std::string predict_out;
    predict->add_option("--model-dir", predict_model, "saved model directory")->required();
    predict->add_option("--input", predict_input, "CSV of query points (features only)")
        ->required();
    predict->add_flag("--no-header", predict_no_header, "input CSV has no header row");
    predict->add_option("--out", predict_out, "write predictions to this CSV instead of stdout");

    // tune
    auto* tune = app.add_subcommand("tune", "grid-search hyperparameters");
    std::string tune_data;
    std::string tune_target = "y";
    bool tune_no_header = false;
    std::string tune_estimator = "kernelcobra";
    std::vector<std::string> tune_grids;
    std::vector<std::string> tune_machines;
    int tune_folds = 5;
    unsigned long long tune_seed = 42;
    std::string tune_out_json = "tune.json";
    std::string tune_out_csv = "tune.csv";
    tune->add_option("--data", tune_data, "training CSV")->required();
    tune->add_option("--target", tune_target, "target column name or index");
    tune->add_flag("--no-header", tune_no_header, "CSV has no header row");
    tune->add_option("--estimator", tune_estimator, "estimator kind");
    tune->add_option("--grid", tune_grids,
                     "grid spec such as lambda=log:1e-3:1e3:50 or epsilon=auto:100, repeatable");
    tune->add_option("--machine", tune_machines, "machine kind, repeatable");
    tune->add_option("--folds", tune_folds, "cross-validation folds");
    tune->add_option("--seed", tune_seed, "seed");
    tune->add_option("--out-json", tune_out_json, "result JSON path");
    tune->add_option("--out-csv", tune_out_csv, "per-candidate CSV path");

    // bench with rmse / timing / boundary
    auto* bench = app.add_subcommand("bench", "experiment harness");
    bench->require_subcommand(1);

    auto* rmse = bench->add_subcommand("rmse", "repeated-run RMSE comparison");
    std::string rmse_config;
    std::string rmse_out;
    rmse->add_option("--config", rmse_config, "bench config JSON")->required();
    rmse->add_option("--out-dir", rmse_out, "output directory (overrides config)");

    auto* timing = bench->add_subcommand("timing", "aggregation timing sweep");
    std::string timing_config;
    std::string timing_sweep = "d=10,100,1000";
    std::string timing_out;
    timing->add_option("--config", timing_config, "bench config JSON (optional)");
    timing->add_option("--sweep", timing_sweep, "axis=v1,v2,... with axis one of d, ell, m");
    timing->add_option("--out-dir", timing_out, "output directory (overrides config)");

    auto* boundary = bench->add_subcommand("boundary", "decision-boundary grid export");
    std::string boundary_data;
    std::string boundary_target = "y";
    bool boundary_no_header = false;
    std::size_t boundary_resolution = 200;
    std::string boundary_bounds;
    std::string boundary_out = "grid.csv";
    ModelFlags boundary_flags;
    boundary->add_option("--data", boundary_data, "labeled 2-d CSV")->required();
    boundary->add_option("--target", boundary_target, "target column name or index");
    boundary->add_flag("--no-header", boundary_no_header, "CSV has no header row");
    boundary->add_option("--resolution", boundary_resolution, "grid cells per side");
    boundary->add_option("--bounds", boundary_bounds,
                         "x1min:x1max:x2min:x2max (data bounding box when omitted)");
    boundary->add_option("--out", boundary_out, "output CSV path");
    boundary_flags.attach(boundary);

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) return run_gen(gen_kind, gen_n, gen_d, gen_noise, gen_seed, gen_out);
    if (train->parsed()) {
        return run_train(train_data, train_target, train_no_header, train_flags, train_out);
    }
    if (predict->parsed()) {
        return run_predict(predict_model, predict_input, predict_no_header, predict_out);
    }
    if (tune->parsed()) {
        return run_tune(tune_data, tune_target, tune_no_header, tune_estimator, tune_grids,
                        tune_folds, tune_seed, tune_machines, tune_out_json, tune_out_csv);
    }
    if (bench->parsed()) {
        if (rmse->parsed()) return run_bench_rmse(rmse_config, rmse_out);
        if (timing->parsed()) return run_bench_timing(timing_config, timing_sweep, timing_out);
        if (boundary->parsed()) {
            return run_bench_boundary(boundary_data, boundary_target, boundary_no_header,
                                      boundary_flags, boundary_resolution, boundary_bounds,
                                      boundary_out);
        }
    }
    return kExitOk;
}
