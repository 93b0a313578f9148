// reshape: monotone reshaping of forests and black-box prediction rules.
//
//   reshape   rewrite a forest's leaf values (exact or over-constrained)
//   blackbox  reshape the predictions of any rule at the observed points
//   audit     count monotonicity violations (exit 1 if any)
//   eval      mse / mape / accuracy, optionally over k folds
//   predict   batch predictions or a one-variable sweep
//
// Exit codes: 0 ok, 1 audit found violations, 2 invalid arguments,
// 3 unreadable input, 4 solver failure.

#include "reshape/audit.hpp"
#include "reshape/blackbox.hpp"
#include "reshape/errors.hpp"
#include "reshape/forest.hpp"
#include "reshape/io.hpp"
#include "reshape/metrics.hpp"
#include "reshape/parallel.hpp"
#include "reshape/reshape_forest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

using namespace reshape;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kViolations = 1, kBadArgs = 2, kBadInput = 3, kSolver = 4 };

bool verbose = false;

void log(const std::string& msg) {
    if (verbose) std::cerr << "[reshape] " << msg << '\n';
}

void warn(const std::string& msg) { std::cerr << "[reshape] warning: " << msg << '\n'; }

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) {
        const auto b = tok.find_first_not_of(" \t");
        const auto e = tok.find_last_not_of(" \t");
        out.push_back(b == std::string::npos ? "" : tok.substr(b, e - b + 1));
    }
    return out;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& tok : split_commas(text)) {
        try {
            out.push_back(parse_double(tok, what));
        } catch (const ParseError& e) {
            throw InvalidInput(e.what());  // malformed flag, not a malformed file
        }
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out.precision(std::numeric_limits<double>::max_digits10);
    return out;
}

// JSON to --out when given, else stdout.
void emit(const json& j, const std::string& path) {
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        open_out(path) << j.dump(2) << '\n';
    }
}

ShapeSpec load_spec(const std::string& text, const std::string& names, std::size_t n_features) {
    auto spec = ShapeSpec::parse(text, names.empty() ? std::vector<std::string>{} : split_commas(names));
    spec.validate(n_features);
    return spec;
}

Predictor forest_predictor(const ForestModel& model) {
    return [&model](std::span<const double> x) { return model.predict_unchecked(x); };
}

void require_width(const DataMatrix& data, const ForestModel& model) {
    if (data.cols() != model.n_features) {
        throw InvalidInput("data has " + std::to_string(data.cols()) + " columns, model expects " +
                           std::to_string(model.n_features));
    }
}

// ---------------------------------------------------------------- reshape

struct ReshapeArgs {
    std::string model, shape, method = "exact", out, report, names;
    unsigned threads = 0;
};

int run_reshape(const ReshapeArgs& a) {
    const auto model = load_forest(a.model);
    const auto spec = load_spec(a.shape, a.names, model.n_features);
    const auto method = parse_method(a.method);
    log("reshaping " + std::to_string(model.trees.size()) + " trees, shape " + spec.to_string() + ", method " +
        to_string(method));
    const auto result = reshape_forest(model, spec, method, resolve_threads(a.threads));
    save_forest(result.model, a.out);
    log("wrote " + a.out);
    emit(json::parse(result.report.to_json()), a.report);
    return kOk;
}

// --------------------------------------------------------------- blackbox

struct BlackboxArgs {
    std::string data, model, tensor, shape, out, tensor_out, names;
    bool header = false;
    double budget = 2e8;
    unsigned threads = 0;
};

int run_blackbox(const BlackboxArgs& a) {
    std::vector<std::string> header_names;
    const auto data = read_matrix(a.data, a.header, &header_names);
    // header names work in --shape unless --feature-names overrides them
    std::string names = a.names;
    if (names.empty()) {
        for (const auto& h : header_names) names += (names.empty() ? "" : ",") + h;
    }
    const auto spec = load_spec(a.shape, names, data.cols());
    const auto threads = resolve_threads(a.threads);

    std::vector<double> predictions, objectives;
    const double entries = static_cast<double>(data.rows()) * static_cast<double>(data.rows()) *
                           static_cast<double>(spec.size());
    if (!a.tensor.empty()) {
        const auto raw = read_tensor(a.tensor);
        const auto grid = grid_from_tensor(data, raw, spec);
        const auto rg = reshape_grid(grid, spec, threads);
        predictions = reshaped_predictions(rg);
        objectives = rg.objectives;
        if (!a.tensor_out.empty()) write_tensor(a.tensor_out, rg.grid);
    } else {
        const auto model = load_forest(a.model);
        require_width(data, model);
        if (entries > a.budget) {
            warn("grid has " + std::to_string(static_cast<long long>(entries)) +
                 " entries, above the budget; streaming one observation at a time");
            if (!a.tensor_out.empty()) throw InvalidInput("--tensor-out needs the full grid; raise --budget");
            for (const auto& p : reshape_blackbox_streaming(data, forest_predictor(model), spec, threads)) {
                predictions.push_back(p.prediction);
                objectives.push_back(p.objective);
            }
        } else {
            const auto grid = build_grid(data, forest_predictor(model), spec, threads);
            const auto rg = reshape_grid(grid, spec, threads);
            predictions = reshaped_predictions(rg);
            objectives = rg.objectives;
            if (!a.tensor_out.empty()) write_tensor(a.tensor_out, rg.grid);
        }
    }
    log("reshaped " + std::to_string(data.rows()) + " observations");

    double total = 0.0;
    for (double o : objectives) total += o;
    if (!a.out.empty()) {
        auto out = open_out(a.out);
        out << "prediction,objective\n";
        for (std::size_t i = 0; i < predictions.size(); ++i) out << predictions[i] << ',' << objectives[i] << '\n';
        emit(json{{"n", predictions.size()}, {"objective", total}, {"out", a.out}}, "");
    } else {
        emit(json{{"n", predictions.size()}, {"objective", total}, {"predictions", predictions},
                  {"objectives", objectives}},
             "");
    }
    return kOk;
}

// ------------------------------------------------------------------ audit

struct AuditArgs {
    std::string model, tensor, data, ranges, shape, out, names;
    bool header = false, off_grid = false;
    std::size_t probes = 1000, grid = 32;
    std::uint64_t seed = 0;
    double tolerance = 1e-12;
    unsigned threads = 0;
};

std::vector<std::pair<double, double>> parse_ranges(const std::string& text, std::size_t d) {
    std::vector<std::pair<double, double>> out;
    for (const auto& tok : split_commas(text)) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw InvalidInput("range '" + tok + "' is not lo:hi");
        const auto lo = parse_list(tok.substr(0, colon), "--ranges");
        const auto hi = parse_list(tok.substr(colon + 1), "--ranges");
        out.emplace_back(lo.at(0), hi.at(0));
    }
    if (out.size() != d) {
        throw InvalidInput("--ranges has " + std::to_string(out.size()) + " entries, expected " + std::to_string(d));
    }
    return out;
}

int run_audit(const AuditArgs& a) {
    std::optional<ForestModel> model;
    if (!a.model.empty()) model = load_forest(a.model);
    std::optional<DataMatrix> data;
    if (!a.data.empty()) data = read_matrix(a.data, a.header);

    if (!a.tensor.empty()) {
        // grid audit: the certified set
        if (!data) throw InvalidInput("--tensor needs --data");
        const auto spec = load_spec(a.shape, a.names, data->cols());
        const auto grid = grid_from_tensor(*data, read_tensor(a.tensor), spec);
        const auto res = audit_grid(grid, spec, a.tolerance);
        json j = json::parse(res.to_json());
        j["mode"] = "grid";
        if (a.off_grid) {
            if (!model) throw InvalidInput("--off-grid needs --model");
            require_width(*data, *model);
            AuditConfig cfg{spec, a.probes, a.grid, a.seed, data_ranges(*data), forest_breakpoints(*model, spec),
                            a.tolerance};
            const auto off = audit_monotonicity(forest_predictor(*model), cfg, resolve_threads(a.threads));
            j["off_grid"] = json::parse(off.to_json());  // informational only
        }
        emit(j, a.out);
        return res.violations > 0 ? kViolations : kOk;
    }

    if (!model) throw InvalidInput("audit needs --model or --tensor");
    if (a.off_grid) throw InvalidInput("--off-grid applies to tensor audits");
    const auto spec = load_spec(a.shape, a.names, model->n_features);
    AuditConfig cfg;
    cfg.spec = spec;
    cfg.probes = a.probes;
    cfg.grid_size = a.grid;
    cfg.seed = a.seed;
    cfg.tolerance = a.tolerance;
    if (data) {
        require_width(*data, *model);
        cfg.feature_ranges = data_ranges(*data);
    } else if (!a.ranges.empty()) {
        cfg.feature_ranges = parse_ranges(a.ranges, model->n_features);
    } else {
        throw InvalidInput("audit needs --data or --ranges for the probe box");
    }
    cfg.breakpoints = forest_breakpoints(*model, spec);
    const auto res = audit_monotonicity(forest_predictor(*model), cfg, resolve_threads(a.threads));
    log(std::to_string(res.violations) + " violations in " + std::to_string(res.total_checks) + " checks");
    json j = json::parse(res.to_json());
    j["mode"] = "model";
    emit(j, a.out);
    return res.violations > 0 ? kViolations : kOk;
}

// ------------------------------------------------------------------- eval

struct EvalArgs {
    std::string pred, truth, metric = "mse", out;
    bool header = false;
    double threshold = 0.5;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
};

int run_eval(const EvalArgs& a) {
    const auto pred = read_column(a.pred, a.header);
    const auto truth = read_column(a.truth, a.header);
    auto metric = [&](std::span<const double> p, std::span<const double> t) {
        if (a.metric == "mse") return mse(p, t);
        if (a.metric == "mape") return mape(p, t);
        return accuracy(p, t, a.threshold);
    };
    json j{{"metric", a.metric}, {"n", pred.size()}, {"value", metric(pred, truth)}};
    if (a.folds > 0) {
        if (pred.size() != truth.size()) throw InvalidInput("prediction and truth lengths differ");
        std::vector<double> values;
        for (const auto& fold : kfold_indices(pred.size(), a.folds, a.seed)) {
            std::vector<double> p, t;
            for (auto i : fold) {
                p.push_back(pred[i]);
                t.push_back(truth[i]);
            }
            values.push_back(metric(p, t));
        }
        const auto s = summarize_folds(values);
        j["folds"] = values;
        j["fold_mean"] = s.mean;
        j["fold_stddev"] = s.stddev;
        j["fold_stddev_over_sqrt_k"] = s.standard_error;
    }
    emit(j, a.out);
    return kOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string model, data, sweep, point, out;
    bool header = false;
    long row = -1;
};

int run_predict(const PredictArgs& a) {
    const auto model = load_forest(a.model);
    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!a.out.empty()) {
        file = open_out(a.out);
        os = &file;
    }
    os->precision(std::numeric_limits<double>::max_digits10);

    if (a.sweep.empty()) {
        if (a.data.empty()) throw InvalidInput("predict needs --data or --sweep");
        const auto data = read_matrix(a.data, a.header);
        require_width(data, model);
        for (std::size_t i = 0; i < data.rows(); ++i) *os << model.predict(data.row(i)) << '\n';
        return kOk;
    }

    const auto parts = split_commas(a.sweep);
    if (parts.size() != 4) throw InvalidInput("--sweep expects var,lo,hi,steps");
    std::size_t var = 0;
    try {
        var = std::stoul(parts[0]);
    } catch (const std::exception&) {
        throw InvalidInput("--sweep variable '" + parts[0] + "' is not an index");
    }
    const auto bounds = parse_list(parts[1] + "," + parts[2], "--sweep");
    const auto steps = static_cast<std::size_t>(parse_list(parts[3], "--sweep").at(0));
    if (var >= model.n_features) throw InvalidInput("--sweep variable out of range");
    if (steps < 2 || !(bounds[0] < bounds[1])) throw InvalidInput("--sweep needs lo < hi and steps >= 2");

    std::vector<double> base;
    if (!a.point.empty()) {
        base = parse_list(a.point, "--point");
    } else if (a.row >= 0 && !a.data.empty()) {
        const auto data = read_matrix(a.data, a.header);
        if (static_cast<std::size_t>(a.row) >= data.rows()) throw InvalidInput("--row out of range");
        const auto r = data.row(static_cast<std::size_t>(a.row));
        base.assign(r.begin(), r.end());
    } else {
        throw InvalidInput("--sweep needs --point or --data with --row");
    }
    if (base.size() != model.n_features) throw InvalidInput("base point has the wrong number of features");

    *os << "x,prediction\n";
    for (std::size_t s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / static_cast<double>(steps - 1);
        base[var] = s + 1 == steps ? bounds[1] : bounds[0] + t * (bounds[1] - bounds[0]);
        *os << base[var] << ',' << model.predict(base) << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone reshaping of tree ensembles and black-box prediction rules"};
    app.require_subcommand(1);
    app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

    ReshapeArgs ra;
    auto* reshape_cmd = app.add_subcommand("reshape", "Rewrite forest leaf values to be monotone");
    reshape_cmd->add_option("--model", ra.model, "Forest model file")->required();
    reshape_cmd->add_option("--shape", ra.shape, "Constraints, e.g. \"0:inc,3:dec\"")->required();
    reshape_cmd->add_option("--method", ra.method, "exact | oc")->capture_default_str();
    reshape_cmd->add_option("--out", ra.out, "Reshaped model file")->required();
    reshape_cmd->add_option("--report", ra.report, "Report file (default stdout)");
    reshape_cmd->add_option("--feature-names", ra.names, "Comma-separated names usable in --shape");
    reshape_cmd->add_option("--threads", ra.threads, "Worker threads, 0 = all");

    BlackboxArgs ba;
    auto* bb_cmd = app.add_subcommand("blackbox", "Reshape a rule's predictions at the observed points");
    bb_cmd->add_option("--data", ba.data, "Observed features")->required();
    bb_cmd->add_flag("--header", ba.header, "Data file has a header row");
    auto* bb_model = bb_cmd->add_option("--model", ba.model, "Forest model file");
    auto* bb_tensor = bb_cmd->add_option("--tensor", ba.tensor, "Precomputed i,k,v,value predictions");
    bb_model->excludes(bb_tensor);
    bb_cmd->add_option("--shape", ba.shape, "Constraints")->required();
    bb_cmd->add_option("--out", ba.out, "Write prediction,objective rows here");
    bb_cmd->add_option("--tensor-out", ba.tensor_out, "Write the reshaped grid");
    bb_cmd->add_option("--feature-names", ba.names, "Comma-separated names usable in --shape");
    bb_cmd->add_option("--budget", ba.budget, "Grid entries before streaming")->capture_default_str();
    bb_cmd->add_option("--threads", ba.threads, "Worker threads, 0 = all");

    AuditArgs aa;
    auto* audit_cmd = app.add_subcommand("audit", "Count monotonicity violations; exit 1 if any");
    audit_cmd->add_option("--model", aa.model, "Forest model file");
    audit_cmd->add_option("--tensor", aa.tensor, "Audit this grid (e.g. from blackbox --tensor-out)");
    audit_cmd->add_option("--data", aa.data, "Observed features; sets the probe box");
    audit_cmd->add_flag("--header", aa.header, "Data file has a header row");
    audit_cmd->add_option("--ranges", aa.ranges, "Probe box as lo:hi per feature, comma-separated");
    audit_cmd->add_option("--shape", aa.shape, "Constraints")->required();
    audit_cmd->add_option("--feature-names", aa.names, "Comma-separated names usable in --shape");
    audit_cmd->add_option("--probes", aa.probes, "Random base points")->capture_default_str();
    audit_cmd->add_option("--grid", aa.grid, "Sweep positions per variable")->capture_default_str();
    audit_cmd->add_option("--seed", aa.seed, "Random seed")->capture_default_str();
    audit_cmd->add_option("--tolerance", aa.tolerance, "Allowed decrease")->capture_default_str();
    audit_cmd->add_flag("--off-grid", aa.off_grid, "Also probe the model off the grid (report only)");
    audit_cmd->add_option("--out", aa.out, "Report file (default stdout)");
    audit_cmd->add_option("--threads", aa.threads, "Worker threads, 0 = all");

    EvalArgs ea;
    auto* eval_cmd = app.add_subcommand("eval", "Score predictions against the truth");
    eval_cmd->add_option("--pred", ea.pred, "Predictions, one per row")->required();
    eval_cmd->add_option("--truth", ea.truth, "True values, one per row")->required();
    eval_cmd->add_flag("--header", ea.header, "Files have a header row");
    eval_cmd->add_option("--metric", ea.metric, "mse | mape | accuracy")
        ->check(CLI::IsMember({"mse", "mape", "accuracy"}))
        ->capture_default_str();
    eval_cmd->add_option("--threshold", ea.threshold, "Accuracy cut-off")->capture_default_str();
    eval_cmd->add_option("--folds", ea.folds, "Also report per-fold values over k random folds");
    eval_cmd->add_option("--seed", ea.seed, "Fold seed")->capture_default_str();
    eval_cmd->add_option("--out", ea.out, "Report file (default stdout)");

    PredictArgs pa;
    auto* predict_cmd = app.add_subcommand("predict", "Forest predictions or a one-variable sweep");
    predict_cmd->add_option("--model", pa.model, "Forest model file")->required();
    predict_cmd->add_option("--data", pa.data, "Feature rows");
    predict_cmd->add_flag("--header", pa.header, "Data file has a header row");
    predict_cmd->add_option("--sweep", pa.sweep, "var,lo,hi,steps");
    predict_cmd->add_option("--point", pa.point, "Base point for --sweep, comma-separated");
    predict_cmd->add_option("--row", pa.row, "Use this data row (0-based) as the base point");
    predict_cmd->add_option("--out", pa.out, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kBadArgs;
    }

    try {
        if (*reshape_cmd) return run_reshape(ra);
        if (*bb_cmd) {
            if (ba.model.empty() == ba.tensor.empty()) throw InvalidInput("blackbox needs exactly one of --model, --tensor");
            return run_blackbox(ba);
        }
        if (*audit_cmd) return run_audit(aa);
        if (*eval_cmd) return run_eval(ea);
        if (*predict_cmd) return run_predict(pa);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadArgs;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const InvalidModel& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kSolver;
    }
    return kBadArgs;
}
