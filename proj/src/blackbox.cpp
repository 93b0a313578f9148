#include "reshape/blackbox.hpp"

#include "reshape/errors.hpp"
#include "reshape/iiso.hpp"
#include "reshape/isotonic.hpp"
#include "reshape/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace reshape {

namespace {

struct PointSolve {
    std::vector<std::vector<double>> fitted;  // [r][k]
    double value = 0.0;
    double objective = 0.0;
};

// Tied coordinates are the same synthetic point, so they share one fitted
// value: non-pivot tie runs are replaced by their mean (which makes the
// chain fit equal across the run) and the run holding observation i is
// pinned to the common value as a whole.
PointSolve solve_point(std::size_t i, const std::vector<std::vector<double>>& fibers,
                       const std::vector<std::vector<std::size_t>>& orderings,
                       const std::vector<std::vector<double>>& coords, const std::vector<Direction>& dirs) {
    const std::size_t R = fibers.size();
    // With every direction decreasing, solve the negated increasing problem
    // so the two cases mirror each other bit for bit.
    const bool mirrored = std::all_of(dirs.begin(), dirs.end(), [](Direction d) { return d == Direction::Decreasing; });
    IisoProblem problem;
    problem.vectors.reserve(R);
    std::vector<std::vector<std::size_t>> orders(R);

    for (std::size_t r = 0; r < R; ++r) {
        auto& order = orders[r];
        order = orderings[r];
        if (dirs[r] == Direction::Decreasing && !mirrored) std::reverse(order.begin(), order.end());
        const auto& x = coords[r];
        const std::size_t n = order.size();

        std::vector<double> seq(n);
        for (std::size_t pos = 0; pos < n; ++pos) seq[pos] = mirrored ? -fibers[r][order[pos]] : fibers[r][order[pos]];

        std::size_t pivot_first = n;
        std::size_t pivot_width = 0;
        for (std::size_t start = 0; start < n;) {
            std::size_t end = start + 1;
            while (end < n && x[order[end]] == x[order[start]]) ++end;
            bool holds_pivot = false;
            for (std::size_t pos = start; pos < end; ++pos) holds_pivot |= order[pos] == i;
            if (holds_pivot) {
                pivot_first = start;
                pivot_width = end - start;
            } else if (end - start > 1) {
                const auto [mn, mx] = std::minmax_element(seq.begin() + start, seq.begin() + end);
                if (*mn != *mx) {
                    double sum = 0.0;
                    for (std::size_t pos = start; pos < end; ++pos) sum += seq[pos];
                    const double mean = std::clamp(sum / static_cast<double>(end - start), *mn, *mx);
                    std::fill(seq.begin() + start, seq.begin() + end, mean);
                }
            }
            start = end;
        }
        if (pivot_width == 0) throw InternalError("blackbox: observation missing from its own ordering");
        problem.vectors.push_back(std::move(seq));
        problem.pivots.push_back(pivot_first);
        problem.pivot_widths.push_back(pivot_width);
    }

    auto sol = solve_iiso(problem);
    if (mirrored) {
        sol.intersection_value = -sol.intersection_value;
        for (auto& f : sol.fitted) {
            for (auto& x : f) x = -x;
        }
    }
    PointSolve out;
    out.value = sol.intersection_value;
    out.fitted.resize(R);
    for (std::size_t r = 0; r < R; ++r) {
        const auto& order = orders[r];
        auto& f = out.fitted[r];
        f.resize(order.size());
        for (std::size_t pos = 0; pos < order.size(); ++pos) f[order[pos]] = sol.fitted[r][pos];
        for (std::size_t k = 0; k < f.size(); ++k) {
            const double d = f[k] - fibers[r][k];
            out.objective += d * d;
        }
    }
    return out;
}

std::vector<Direction> directions(const ShapeSpec& spec) {
    std::vector<Direction> dirs;
    for (auto v : spec.features()) dirs.push_back(spec.direction(v));
    return dirs;
}

void check_spec_matches(const BlackBoxGrid& grid, const ShapeSpec& spec) {
    if (grid.variables != spec.features()) {
        throw InvalidInput("blackbox: grid variables do not match the shape spec");
    }
}

BlackBoxGrid empty_grid(const DataMatrix& data, const ShapeSpec& spec) {
    if (data.rows() == 0) throw InvalidInput("blackbox: no observations");
    spec.validate(data.cols());
    require_finite(data.raw(), "blackbox data");
    BlackBoxGrid grid;
    grid.n = data.rows();
    grid.variables = spec.features();
    for (auto v : grid.variables) {
        grid.coordinates.push_back(data.column(v));
        grid.orderings.push_back(coordinate_ordering(grid.coordinates.back()));
    }
    grid.values.assign(grid.n * grid.n * grid.variables.size(), 0.0);
    return grid;
}

std::string position(std::size_t i, std::size_t k, std::size_t v) {
    return "(i=" + std::to_string(i + 1) + ", k=" + std::to_string(k + 1) + ", v=" + std::to_string(v + 1) + ")";
}

// fibers[r][k] = f(x^{i,k,v_r})
std::vector<std::vector<double>> evaluate_fibers(const DataMatrix& data, const Predictor& predictor,
                                                 const std::vector<std::size_t>& variables, std::size_t i) {
    const std::size_t n = data.rows();
    std::vector<double> x(data.row(i).begin(), data.row(i).end());
    std::vector<std::vector<double>> fibers(variables.size(), std::vector<double>(n));
    for (std::size_t r = 0; r < variables.size(); ++r) {
        const auto v = variables[r];
        for (std::size_t k = 0; k < n; ++k) {
            x[v] = data(k, v);
            const double y = predictor(x);
            if (!std::isfinite(y)) throw InvalidModel("blackbox: non-finite prediction at " + position(i, k, v));
            fibers[r][k] = y;
        }
        x[v] = data(i, v);
    }
    return fibers;
}

}  // namespace

std::vector<std::size_t> coordinate_ordering(std::span<const double> coords) {
    std::vector<std::size_t> order(coords.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return coords[a] < coords[b]; });
    return order;
}

BlackBoxGrid build_grid(const DataMatrix& data, const Predictor& predictor, const ShapeSpec& spec,
                        unsigned threads) {
    auto grid = empty_grid(data, spec);
    const std::size_t R = grid.variables.size();
    parallel_for(grid.n, threads, [&](std::size_t i) {
        auto fibers = evaluate_fibers(data, predictor, grid.variables, i);
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t k = 0; k < grid.n; ++k) grid.at(i, k, r) = fibers[r][k];
        }
    });
    return grid;
}

BlackBoxGrid grid_from_tensor(const DataMatrix& data, std::span<const TensorEntry> entries, const ShapeSpec& spec) {
    auto grid = empty_grid(data, spec);
    const std::size_t n = grid.n;
    const std::size_t R = grid.variables.size();
    std::vector<char> seen(grid.values.size(), 0);
    for (const auto& e : entries) {
        auto it = std::find(grid.variables.begin(), grid.variables.end(), e.v);
        if (e.i >= n || e.k >= n || it == grid.variables.end()) {
            throw InvalidInput("tensor: entry " + position(e.i, e.k, e.v) + " outside the grid");
        }
        if (!std::isfinite(e.value)) throw InvalidModel("tensor: non-finite value at " + position(e.i, e.k, e.v));
        const auto r = static_cast<std::size_t>(it - grid.variables.begin());
        const std::size_t idx = (e.i * n + e.k) * R + r;
        if (seen[idx]) throw InvalidInput("tensor: duplicate entry " + position(e.i, e.k, e.v));
        seen[idx] = 1;
        grid.values[idx] = e.value;
    }
    for (std::size_t idx = 0; idx < seen.size(); ++idx) {
        if (!seen[idx]) {
            const std::size_t r = idx % R;
            const std::size_t k = (idx / R) % n;
            const std::size_t i = idx / R / n;
            throw InvalidInput("tensor: missing entry " + position(i, k, grid.variables[r]));
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double base = grid.at(i, i, 0);
        for (std::size_t r = 1; r < R; ++r) {
            if (std::abs(grid.at(i, i, r) - base) > 1e-12 * std::max(1.0, std::abs(base))) {
                throw InvalidInput("tensor: F[i,i,v] differs across variables for i=" + std::to_string(i + 1));
            }
        }
    }
    return grid;
}

ReshapedGrid reshape_grid(const BlackBoxGrid& grid, const ShapeSpec& spec, unsigned threads) {
    check_spec_matches(grid, spec);
    require_finite(grid.values, "blackbox grid");
    const std::size_t n = grid.n;
    const std::size_t R = grid.num_variables();
    const auto dirs = directions(spec);

    ReshapedGrid out;
    out.grid = grid;
    out.predictions.assign(n, 0.0);
    out.objectives.assign(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        std::vector<std::vector<double>> fibers(R, std::vector<double>(n));
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t k = 0; k < n; ++k) fibers[r][k] = grid.at(i, k, r);
        }
        auto sol = solve_point(i, fibers, grid.orderings, grid.coordinates, dirs);
        for (std::size_t r = 0; r < R; ++r) {
            for (std::size_t k = 0; k < n; ++k) out.grid.at(i, k, r) = sol.fitted[r][k];
        }
        out.predictions[i] = sol.value;
        out.objectives[i] = sol.objective;
    });
    for (double o : out.objectives) out.objective += o;
    return out;
}

std::vector<double> reshaped_predictions(const ReshapedGrid& rg) {
    const auto& g = rg.grid;
    std::vector<double> out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) {
        const double base = g.at(i, i, 0);
        for (std::size_t r = 1; r < g.num_variables(); ++r) {
            if (std::abs(g.at(i, i, r) - base) > 1e-9) {
                throw InternalError("blackbox: reshaped values at observation " + std::to_string(i + 1) +
                                    " are inconsistent across variables");
            }
        }
        out[i] = base;
    }
    return out;
}

std::vector<PointReshape> reshape_blackbox_streaming(const DataMatrix& data, const Predictor& predictor,
                                                     const ShapeSpec& spec, unsigned threads) {
    if (data.rows() == 0) throw InvalidInput("blackbox: no observations");
    spec.validate(data.cols());
    require_finite(data.raw(), "blackbox data");
    const auto variables = spec.features();
    const auto dirs = directions(spec);
    std::vector<std::vector<double>> coords;
    std::vector<std::vector<std::size_t>> orderings;
    for (auto v : variables) {
        coords.push_back(data.column(v));
        orderings.push_back(coordinate_ordering(coords.back()));
    }
    std::vector<PointReshape> out(data.rows());
    parallel_for(data.rows(), threads, [&](std::size_t i) {
        auto fibers = evaluate_fibers(data, predictor, variables, i);
        auto sol = solve_point(i, fibers, orderings, coords, dirs);
        out[i] = {sol.value, sol.objective};
    });
    return out;
}

}  // namespace reshape
