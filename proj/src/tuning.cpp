#include "cobra/tuning.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "cobra/rng.hpp"

namespace cobra {

namespace {

double parse_number(const std::string& text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
        fail(ErrorCode::config, "cannot parse '" + text + "' as a number");
    }
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string part;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(std::move(part));
            part.clear();
        } else {
            part += c;
        }
    }
    parts.push_back(std::move(part));
    return parts;
}

bool known_parameter(const std::string& name) {
    return name == "lambda" || name == "epsilon" || name == "alpha" || name == "bandwidth" ||
           name == "mix-alpha";
}

}  // namespace

std::vector<double> GridSpec::log_range(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2) {
        fail(ErrorCode::config, "log grid needs 0 < lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    const double step = (std::log(hi) - std::log(lo)) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = std::exp(std::log(lo) + step * i);
    out.front() = lo;
    out.back() = hi;
    return out;
}

std::vector<double> GridSpec::linear_range(double lo, double hi, std::size_t count) {
    if (!(hi > lo) || count < 2) fail(ErrorCode::config, "linear grid needs lo < hi, count >= 2");
    std::vector<double> out(count);
    const double step = (hi - lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * i;
    out.back() = hi;
    return out;
}

GridSpec GridSpec::parse(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        fail(ErrorCode::config, "grid '" + text + "' must look like name=form");
    }
    GridSpec spec;
    spec.parameter = text.substr(0, eq);
    if (!known_parameter(spec.parameter)) {
        fail(ErrorCode::config, "unknown tunable parameter '" + spec.parameter + "'");
    }
    const std::string body = text.substr(eq + 1);
    const auto parts = split(body, ':');
    const std::string& form = parts[0];
    if (form == "auto") {
        spec.data_dependent = true;
        if (parts.size() > 1) spec.count = static_cast<std::size_t>(parse_number(parts[1]));
        if (parts.size() > 2) fail(ErrorCode::config, "auto grid takes at most a count");
    } else if (form == "log" || form == "lin") {
        if (parts.size() != 4) {
            fail(ErrorCode::config, "range grid must look like name=" + form + ":lo:hi:count");
        }
        const double lo = parse_number(parts[1]);
        const double hi = parse_number(parts[2]);
        const auto count = static_cast<std::size_t>(parse_number(parts[3]));
        spec.candidates = form == "log" ? log_range(lo, hi, count) : linear_range(lo, hi, count);
    } else if (form == "list") {
        if (parts.size() != 2) fail(ErrorCode::config, "list grid must look like name=list:v1,v2");
        for (const auto& v : split(parts[1], ',')) spec.candidates.push_back(parse_number(v));
        std::sort(spec.candidates.begin(), spec.candidates.end());
        spec.candidates.erase(std::unique(spec.candidates.begin(), spec.candidates.end()),
                              spec.candidates.end());
    } else {
        fail(ErrorCode::config, "unknown grid form '" + form + "'");
    }
    spec.validate();
    return spec;
}

void GridSpec::validate() const {
    if (!known_parameter(parameter)) {
        fail(ErrorCode::config, "unknown tunable parameter '" + parameter + "'");
    }
    if (!data_dependent && candidates.empty()) {
        fail(ErrorCode::config, "grid for '" + parameter + "' has no candidates");
    }
    if (data_dependent && count < 1) fail(ErrorCode::config, "auto grid count must be >= 1");
    for (double v : candidates) {
        if (!std::isfinite(v)) fail(ErrorCode::config, "grid candidates must be finite");
        if ((parameter == "lambda" || parameter == "mix-alpha") && v < 0.0) {
            fail(ErrorCode::config, parameter + " candidates must be >= 0");
        }
        if ((parameter == "epsilon" || parameter == "bandwidth") && v <= 0.0) {
            fail(ErrorCode::config, parameter + " candidates must be > 0");
        }
        if (parameter == "alpha" && (v < 1.0 || std::floor(v) != v)) {
            fail(ErrorCode::config, "alpha candidates must be integers >= 1");
        }
    }
}

std::vector<GridSpec> default_grids(EstimatorKind kind) {
    auto lambda_grid = [] {
        GridSpec g;
        g.parameter = "lambda";
        g.candidates = GridSpec::log_range(1e-3, 1e3, 50);
        return g;
    };
    switch (kind) {
        case EstimatorKind::cobra: {
            GridSpec eps;
            eps.parameter = "epsilon";
            eps.data_dependent = true;
            eps.count = 100;
            return {eps};
        }
        case EstimatorKind::general_kernel: {
            GridSpec bw;
            bw.parameter = "bandwidth";
            bw.candidates = GridSpec::log_range(1e-3, 1e3, 50);
            return {bw};
        }
        case EstimatorKind::mixcobra: {
            GridSpec ma;
            ma.parameter = "mix-alpha";
            ma.candidates = GridSpec::log_range(1e-3, 1e3, 10);
            return {ma, lambda_grid()};
        }
        default:
            return {lambda_grid()};
    }
}

AggregatorConfig apply_params(const AggregatorConfig& base,
                              const std::map<std::string, double>& params) {
    AggregatorConfig config = base;
    for (const auto& [name, value] : params) {
        if (name == "lambda") config.lambda = value;
        else if (name == "epsilon") config.epsilon = value;
        else if (name == "alpha") config.alpha = static_cast<int>(value);
        else if (name == "bandwidth") config.kernel.bandwidth = value;
        else if (name == "mix-alpha") config.mix_alpha = value;
        else fail(ErrorCode::config, "unknown tunable parameter '" + name + "'");
    }
    return config;
}

namespace {

struct FoldContext {
    Aggregator aggregator;
    Dataset validation;
    // per validation point: machine predictions, summed prediction distances,
    // squared input distances (mixcobra only)
    std::vector<std::vector<double>> query_preds;
    std::vector<std::vector<double>> distance_sums;
    std::vector<std::vector<double>> input_sq;
};

double candidate_loss_on_fold(EstimatorKind kind, const AggregatorConfig& config,
                              const FoldContext& fold, bool classification,
                              std::size_t* no_consensus) {
    const std::size_t ell = fold.aggregator.retained_count();
    static thread_local std::vector<double> w;
    w.resize(ell);

    double sq_sum = 0.0;
    double miss = 0.0;
    std::size_t answered = 0;
    for (std::size_t v = 0; v < fold.validation.rows(); ++v) {
        bool ok = true;
        try {
            switch (kind) {
                case EstimatorKind::kernelcobra:
                    kernelcobra_weights_from_sums_into(fold.distance_sums[v], config.lambda, w);
                    break;
                case EstimatorKind::mixcobra:
                    mixcobra_weights_from_sums_into(fold.input_sq[v], fold.distance_sums[v],
                                                    config.mix_alpha, config.lambda, w);
                    break;
                case EstimatorKind::unsupervised:
                case EstimatorKind::classifier:
                    if (config.point_weighting == PointWeighting::kernel) {
                        fold.aggregator.weights_for_query_into(kind, config, fold.query_preds[v],
                                                               fold.validation.row(v), w);
                    } else {
                        kernelcobra_weights_from_sums_into(fold.distance_sums[v], config.lambda,
                                                           w);
                    }
                    break;
                default:
                    fold.aggregator.weights_for_query_into(kind, config, fold.query_preds[v],
                                                           fold.validation.row(v), w);
                    break;
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::no_consensus) throw;
            ok = false;
        }
        if (!ok) {
            ++*no_consensus;
            continue;
        }
        ++answered;
        const double truth = fold.validation.target(v);
        const auto& retained = fold.aggregator.split().retained_half;
        switch (kind) {
            case EstimatorKind::classifier: {
                double predicted;
                const auto& labels = retained.targets();
                bool binary = true;
                for (double t : labels) {
                    if (t != 0.0 && t != 1.0) {
                        binary = false;
                        break;
                    }
                }
                predicted = binary ? static_cast<double>(classify_binary(w, labels))
                                   : classify_multiclass(w, labels);
                if (predicted != truth) miss += 1.0;
                break;
            }
            case EstimatorKind::unsupervised: {
                const std::size_t m_count = fold.aggregator.machine_count();
                std::vector<double> mw = config.machine_weights;
                if (mw.empty()) mw.assign(m_count, 1.0 / static_cast<double>(m_count));
                const double predicted =
                    aggregate_unsupervised(w, mw, fold.aggregator.predictions());
                sq_sum += (predicted - truth) * (predicted - truth);
                break;
            }
            default: {
                const double predicted = aggregate_regression(w, retained.targets());
                sq_sum += (predicted - truth) * (predicted - truth);
                break;
            }
        }
    }
    if (answered == 0) return std::numeric_limits<double>::quiet_NaN();
    if (classification) return miss / static_cast<double>(answered);
    return std::sqrt(sq_sum / static_cast<double>(answered));
}

}  // namespace

TuneResult grid_search(EstimatorKind kind, const AggregatorConfig& base,
                       const std::vector<MachineSpec>& machine_specs,
                       const std::vector<GridSpec>& grids, const Dataset& data, int folds,
                       std::uint64_t seed) {
    if (folds < 2) fail(ErrorCode::config, "grid search needs at least 2 folds");
    if (!data.has_targets()) fail(ErrorCode::invalid_argument, "grid search needs targets");
    if (machine_specs.empty()) fail(ErrorCode::empty_ensemble, "grid search needs machines");
    if (grids.empty()) fail(ErrorCode::config, "grid search needs at least one grid");
    if (static_cast<std::size_t>(folds) * 2 > data.rows()) {
        fail(ErrorCode::config, "dataset too small for " + std::to_string(folds) + " folds");
    }
    const bool classification = kind == EstimatorKind::classifier;

    // Resolve data-dependent grids from a preliminary split of the full data.
    std::vector<GridSpec> resolved = grids;
    for (GridSpec& g : resolved) {
        g.validate();
        if (!g.data_dependent) {
            std::sort(g.candidates.begin(), g.candidates.end());
            continue;
        }
        if (g.parameter == "alpha") {
            g.candidates.clear();
            for (std::size_t i = 0; i < machine_specs.size(); ++i)
                g.candidates.push_back(static_cast<double>(i + 1));
        } else if (g.parameter == "epsilon") {
            const SplitPair prelim =
                split_dataset(data, default_split_size(data.rows()), mix_seed(seed, 0xA0));
            std::vector<TrainedMachine> machines;
            machines.reserve(machine_specs.size());
            for (const auto& spec : machine_specs) machines.push_back(fit_machine(spec, prelim.train_half));
            const PredictionMatrix matrix = build_prediction_matrix(machines, prelim.retained_half);
            double range = matrix.value_range();
            if (!(range > 0.0)) range = 1.0;
            g.candidates = g.count > 1 ? GridSpec::linear_range(1e-3 * range, range, g.count)
                                       : std::vector<double>{range};
        } else {
            fail(ErrorCode::config, "no data-dependent grid for '" + g.parameter + "'");
        }
        g.data_dependent = false;
    }

    // Cartesian product in grid order; candidate lists ascend, so the first
    // minimum found is also the smallest parameter choice.
    std::vector<std::map<std::string, double>> combos;
    combos.emplace_back();
    for (const GridSpec& g : resolved) {
        std::vector<std::map<std::string, double>> expanded;
        expanded.reserve(combos.size() * g.candidates.size());
        for (const auto& combo : combos) {
            for (double v : g.candidates) {
                auto next = combo;
                next[g.parameter] = v;
                expanded.push_back(std::move(next));
            }
        }
        combos = std::move(expanded);
    }

    // Fold assembly: one shuffled pass, contiguous chunks.
    Rng fold_rng(mix_seed(seed, 0xF1));
    const std::vector<std::size_t> order = shuffled_indices(data.rows(), fold_rng);
    const std::size_t n = data.rows();

    std::vector<FoldContext> contexts;
    contexts.reserve(static_cast<std::size_t>(folds));
    for (int f = 0; f < folds; ++f) {
        const std::size_t begin = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
        const std::size_t end =
            n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
        std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                         order.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<std::size_t> train_idx;
        train_idx.reserve(n - val_idx.size());
        train_idx.insert(train_idx.end(), order.begin(),
                         order.begin() + static_cast<std::ptrdiff_t>(begin));
        train_idx.insert(train_idx.end(), order.begin() + static_cast<std::ptrdiff_t>(end),
                         order.end());

        Dataset fold_train = data.subset(train_idx);
        Dataset fold_val = data.subset(val_idx);
        const SplitPair split = split_dataset(fold_train, default_split_size(fold_train.rows()),
                                              mix_seed(seed, 0xB0 + static_cast<std::uint64_t>(f)));
        std::vector<TrainedMachine> machines;
        machines.reserve(machine_specs.size());
        for (const auto& spec : machine_specs) machines.push_back(fit_machine(spec, split.train_half));

        FoldContext ctx{Aggregator(std::move(machines), split), std::move(fold_val), {}, {}, {}};
        const std::size_t m_count = ctx.aggregator.machine_count();
        const std::size_t ell = ctx.aggregator.retained_count();
        const auto& matrix = ctx.aggregator.predictions();
        ctx.query_preds.resize(ctx.validation.rows());
        ctx.distance_sums.resize(ctx.validation.rows());
        if (kind == EstimatorKind::mixcobra) ctx.input_sq.resize(ctx.validation.rows());
        for (std::size_t v = 0; v < ctx.validation.rows(); ++v) {
            ctx.query_preds[v] = ctx.aggregator.query_predictions(ctx.validation.row(v));
            auto& sums = ctx.distance_sums[v];
            sums.assign(ell, 0.0);
            for (std::size_t m = 0; m < m_count; ++m) {
                const double q = ctx.query_preds[v][m];
                auto row = matrix.machine_row(m);
                for (std::size_t i = 0; i < ell; ++i) sums[i] += std::abs(row[i] - q);
            }
            if (kind == EstimatorKind::mixcobra) {
                auto& sq = ctx.input_sq[v];
                sq.assign(ell, 0.0);
                const auto& retained = ctx.aggregator.split().retained_half;
                for (std::size_t i = 0; i < ell; ++i) {
                    auto row = retained.row(i);
                    auto q = ctx.validation.row(v);
                    double s = 0.0;
                    for (std::size_t j = 0; j < row.size(); ++j) {
                        const double diff = q[j] - row[j];
                        s += diff * diff;
                    }
                    sq[i] = s;
                }
            }
        }
        contexts.push_back(std::move(ctx));
    }

    TuneResult result;
    result.folds = folds;
    result.seed = seed;
    result.loss_name = classification ? "misclassification" : "rmse";
    result.table.reserve(combos.size());

    std::size_t best_index = combos.size();
    for (const auto& combo : combos) {
        const AggregatorConfig config = apply_params(base, combo);
        config.validate(machine_specs.size());

        TuneCandidate candidate;
        candidate.params = combo;
        std::vector<double> fold_losses;
        fold_losses.reserve(contexts.size());
        bool fold_failed = false;
        for (const FoldContext& ctx : contexts) {
            std::size_t nc = 0;
            const double loss = candidate_loss_on_fold(kind, config, ctx, classification, &nc);
            candidate.no_consensus += nc;
            candidate.evaluated += ctx.validation.rows();
            if (std::isnan(loss)) {
                fold_failed = true;
                continue;
            }
            fold_losses.push_back(loss);
        }
        if (fold_failed || fold_losses.empty() ||
            candidate.no_consensus * 2 > candidate.evaluated) {
            candidate.feasible = false;
        }
        if (!fold_losses.empty()) {
            double mean = 0.0;
            for (double l : fold_losses) mean += l;
            mean /= static_cast<double>(fold_losses.size());
            double var = 0.0;
            for (double l : fold_losses) var += (l - mean) * (l - mean);
            var /= static_cast<double>(fold_losses.size());
            candidate.mean_loss = mean;
            candidate.std_loss = std::sqrt(var);
        }
        if (candidate.feasible &&
            (best_index == combos.size() || candidate.mean_loss < result.best_loss)) {
            best_index = result.table.size();
            result.best_loss = candidate.mean_loss;
            result.best = combo;
        }
        result.table.push_back(std::move(candidate));
    }

    if (best_index == combos.size()) {
        fail(ErrorCode::no_consensus, "every grid candidate was infeasible");
    }
    return result;
}

ErrorReport compare_estimators(const std::vector<NamedPredictor>& models, const Dataset& test) {
    if (!test.has_targets()) fail(ErrorCode::invalid_argument, "comparison needs test targets");
    ErrorReport report;
    report.test_points = test.rows();
    report.rows.reserve(models.size());
    for (const auto& model : models) {
        ModelErrorRow row;
        row.name = model.name;
        row.abs_errors.reserve(test.rows());
        row.sq_errors.reserve(test.rows());
        double sq_sum = 0.0;
        double abs_sum = 0.0;
        for (std::size_t i = 0; i < test.rows(); ++i) {
            const double predicted = model.fn(test.row(i));
            const double err = predicted - test.target(i);
            row.abs_errors.push_back(std::abs(err));
            row.sq_errors.push_back(err * err);
            sq_sum += err * err;
            abs_sum += std::abs(err);
        }
        const double inv_n = 1.0 / static_cast<double>(test.rows());
        row.rmse = std::sqrt(sq_sum * inv_n);
        row.mae = abs_sum * inv_n;
        double var = 0.0;
        for (double a : row.abs_errors) var += (a - row.mae) * (a - row.mae);
        row.std_abs = std::sqrt(var * inv_n);
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace cobra
