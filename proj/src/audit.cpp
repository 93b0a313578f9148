#include "reshape/audit.hpp"

#include "reshape/errors.hpp"
#include "reshape/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

namespace reshape {

namespace {

constexpr std::size_t kMaxWitnesses = 10;

struct SweepCheck {
    std::size_t violations = 0;
    std::size_t checks = 0;
    double worst = 0.0;
    std::vector<AuditWitness> witnesses;
};

// Counts adjacent drops along `values` against `dir`.
void check_sequence(const std::vector<double>& values, Direction dir, double tol, SweepCheck& acc,
                    const std::vector<double>& base, std::size_t variable) {
    for (std::size_t j = 0; j + 1 < values.size(); ++j) {
        ++acc.checks;
        const double step = values[j + 1] - values[j];
        const double drop = dir == Direction::Increasing ? -step : step;
        if (drop > tol) {
            ++acc.violations;
            acc.worst = std::max(acc.worst, drop);
            if (acc.witnesses.size() < kMaxWitnesses) acc.witnesses.push_back({base, variable, j, j + 1, drop});
        }
    }
}

void merge(AuditResult& out, SweepCheck&& part) {
    out.violations += part.violations;
    out.total_checks += part.checks;
    out.worst_violation = std::max(out.worst_violation, part.worst);
    for (auto& w : part.witnesses) {
        if (out.witnesses.size() >= kMaxWitnesses) break;
        out.witnesses.push_back(std::move(w));
    }
}

}  // namespace

void AuditConfig::validate() const {
    if (spec.empty()) throw InvalidInput("audit: shape spec is empty");
    if (probes < 1) throw InvalidInput("audit: probes must be at least 1");
    if (grid_size < 2) throw InvalidInput("audit: grid_size must be at least 2");
    spec.validate(feature_ranges.size());
    for (std::size_t j = 0; j < feature_ranges.size(); ++j) {
        const auto [lo, hi] = feature_ranges[j];
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
            throw InvalidInput("audit: feature range " + std::to_string(j) + " must satisfy lo < hi");
        }
    }
}

std::vector<double> sweep_positions(double lo, double hi, std::size_t grid_size, const std::vector<double>& breakpoints) {
    std::vector<double> xs;
    xs.reserve(grid_size + 2 * breakpoints.size());
    for (std::size_t g = 0; g < grid_size; ++g) {
        const double frac = static_cast<double>(g) / static_cast<double>(grid_size - 1);
        xs.push_back(g + 1 == grid_size ? hi : lo + frac * (hi - lo));
    }
    for (double t : breakpoints) {
        const double off = std::max(std::abs(t), 1.0) * std::ldexp(1.0, -40);
        for (double x : {t - off, t + off}) {
            if (x >= lo && x <= hi) xs.push_back(x);
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

AuditResult audit_monotonicity(const Predictor& predict, const AuditConfig& config, unsigned threads) {
    config.validate();
    const std::size_t d = config.feature_ranges.size();
    const auto variables = config.spec.features();

    std::vector<std::vector<double>> sweeps;
    for (auto v : variables) {
        auto it = config.breakpoints.find(v);
        static const std::vector<double> none;
        sweeps.push_back(sweep_positions(config.feature_ranges[v].first, config.feature_ranges[v].second,
                                         config.grid_size, it == config.breakpoints.end() ? none : it->second));
    }

    // Base points are drawn up front so results do not depend on scheduling.
    std::mt19937_64 rng(config.seed);
    std::vector<std::vector<double>> bases(config.probes, std::vector<double>(d));
    for (auto& base : bases) {
        for (std::size_t j = 0; j < d; ++j) {
            std::uniform_real_distribution<double> u(config.feature_ranges[j].first, config.feature_ranges[j].second);
            base[j] = u(rng);
        }
    }

    std::vector<SweepCheck> parts(config.probes);
    parallel_for(config.probes, threads, [&](std::size_t p) {
        auto x = bases[p];
        std::vector<double> values;
        for (std::size_t r = 0; r < variables.size(); ++r) {
            const auto v = variables[r];
            values.clear();
            for (double xv : sweeps[r]) {
                x[v] = xv;
                const double y = predict(x);
                if (!std::isfinite(y)) {
                    throw InvalidModel("audit: non-finite prediction at probe " + std::to_string(p) + ", feature " +
                                       std::to_string(v) + " = " + std::to_string(xv));
                }
                values.push_back(y);
            }
            x[v] = bases[p][v];
            check_sequence(values, config.spec.direction(v), config.tolerance, parts[p], bases[p], v);
        }
    });

    AuditResult out;
    out.sweeps = config.probes * variables.size();
    for (auto& part : parts) merge(out, std::move(part));
    return out;
}

AuditResult audit_grid(const BlackBoxGrid& grid, const ShapeSpec& spec, double tolerance) {
    if (grid.variables != spec.features()) throw InvalidInput("audit: grid variables do not match the shape spec");
    AuditResult out;
    std::vector<double> values(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        SweepCheck acc;
        for (std::size_t r = 0; r < grid.num_variables(); ++r) {
            const auto& order = grid.orderings[r];
            for (std::size_t pos = 0; pos < grid.n; ++pos) values[pos] = grid.at(i, order[pos], r);
            std::vector<double> base(1, static_cast<double>(i));
            check_sequence(values, spec.direction(grid.variables[r]), tolerance, acc, base, grid.variables[r]);
        }
        out.sweeps += grid.num_variables();
        merge(out, std::move(acc));
    }
    return out;
}

std::map<std::size_t, std::vector<double>> forest_breakpoints(const ForestModel& model, const ShapeSpec& spec) {
    std::map<std::size_t, std::set<double>> found;
    for (const auto& tree : model.trees) {
        for (const auto& node : tree.nodes()) {
            if (!node.leaf && spec.constrains(node.feature)) found[node.feature].insert(node.threshold);
        }
    }
    std::map<std::size_t, std::vector<double>> out;
    for (auto& [v, ts] : found) out[v].assign(ts.begin(), ts.end());
    return out;
}

std::vector<std::pair<double, double>> data_ranges(const DataMatrix& data) {
    if (data.rows() == 0) throw InvalidInput("data_ranges: no observations");
    std::vector<std::pair<double, double>> out;
    for (std::size_t j = 0; j < data.cols(); ++j) {
        const auto col = data.column(j);
        auto [lo, hi] = std::minmax_element(col.begin(), col.end());
        out.emplace_back(*lo, *hi);
        if (!(out.back().first < out.back().second)) out.back() = {*lo - 1.0, *hi + 1.0};
    }
    return out;
}

std::string AuditResult::to_json() const {
    nlohmann::json j;
    j["violations"] = violations;
    j["total_checks"] = total_checks;
    j["sweeps"] = sweeps;
    j["worst_violation"] = worst_violation;
    auto ws = nlohmann::json::array();
    for (const auto& w : witnesses) {
        ws.push_back({{"point", w.point},
                      {"variable", w.variable},
                      {"lower_position", w.lower_position},
                      {"upper_position", w.upper_position},
                      {"drop", w.drop}});
    }
    j["witnesses"] = std::move(ws);
    return j.dump();
}

}  // namespace reshape
