#include "reshape/reshape_forest.hpp"

#include "reshape/breakpoint_scan.hpp"
#include "reshape/errors.hpp"
#include "reshape/interval_index.hpp"
#include "reshape/isotonic.hpp"
#include "reshape/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <set>
#include <unordered_map>

namespace reshape {

std::string to_string(Method m) { return m == Method::Exact ? "exact" : "overconstrained"; }

Method parse_method(const std::string& text) {
    if (text == "exact" || text == "ex") return Method::Exact;
    if (text == "oc" || text == "overconstrained" || text == "over-constrained") return Method::OverConstrained;
    throw InvalidInput("unknown reshape method '" + text + "' (expected exact or oc)");
}

ConstraintGraph build_constraint_graph(const Tree& tree, const ShapeSpec& spec, std::size_t n_features) {
    std::set<std::pair<std::size_t, std::size_t>> edges;  // leaf positions
    for (const auto& [pos, depth] : tree.level_order()) {
        const auto& node = tree.node(pos);
        if (!spec.constrains(node.feature)) continue;
        const auto left = leaf_cells_under(tree, node.left, n_features);
        const auto right = leaf_cells_under(tree, node.right, n_features);
        const bool increasing = spec.direction(node.feature) == Direction::Increasing;
        for (const auto& [l, r] : overlapping_pairs(left, right, node.feature)) {
            edges.insert(increasing ? std::pair{l, r} : std::pair{r, l});
        }
    }

    ConstraintGraph graph;
    std::unordered_map<std::size_t, std::size_t> index;
    std::set<std::size_t> used;
    for (const auto& [a, b] : edges) {
        used.insert(a);
        used.insert(b);
    }
    for (auto leaf : tree.leaves()) {
        if (!used.count(leaf)) continue;
        index.emplace(leaf, graph.vertices.size());
        graph.vertices.push_back(leaf);
        graph.values.push_back(tree.node(leaf).value);
    }
    graph.edges.reserve(edges.size());
    for (const auto& [a, b] : edges) graph.edges.emplace_back(index.at(a), index.at(b));
    return graph;
}

NodeSolve solve_node_overconstrained(std::span<const double> left, std::span<const double> right) {
    if (left.empty() || right.empty()) throw InvalidInput("solve_node_overconstrained: both sides need a leaf");
    require_finite(left, "solve_node_overconstrained");
    require_finite(right, "solve_node_overconstrained");

    auto sorted_knots = [](std::span<const double> values) {
        std::vector<Knot> knots;
        knots.reserve(values.size());
        for (double v : values) knots.push_back({v, 1.0});
        std::stable_sort(knots.begin(), knots.end(), [](const Knot& a, const Knot& b) { return a.value < b.value; });
        return knots;
    };
    const auto upper = sorted_knots(left);
    const auto lower = sorted_knots(right);

    NodeSolve out;
    const double lo = std::min(upper.front().value, lower.front().value);
    const double hi = std::max(upper.back().value, lower.back().value);
    out.cut = std::clamp(minimize_clipped_quadratic(0.0, 0.0, upper, lower), lo, hi);
    out.left.reserve(left.size());
    out.right.reserve(right.size());
    for (double v : left) {
        out.left.push_back(std::min(out.cut, v));
        out.objective += (out.left.back() - v) * (out.left.back() - v);
    }
    for (double v : right) {
        out.right.push_back(std::max(out.cut, v));
        out.objective += (out.right.back() - v) * (out.right.back() - v);
    }
    return out;
}

TreeReshape reshape_tree(const Tree& tree, const ShapeSpec& spec, Method method, std::size_t n_features) {
    TreeReshape out{tree, 0, 0, 0.0};
    auto& result = out.tree;

    if (method == Method::Exact) {
        const auto graph = build_constraint_graph(tree, spec, n_features);
        for (const auto& [pos, depth] : tree.level_order()) out.nodes_solved += spec.constrains(tree.node(pos).feature);
        out.edges = graph.edges.size();
        const auto fit = dag_isotonic_exact(graph);
        for (std::size_t a = 0; a < fit.size(); ++a) result.set_leaf_value(graph.vertices[a], fit[a]);
    } else {
        auto order = tree.level_order();
        // deepest level first; stable keeps left-to-right within a level
        std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (const auto& [pos, depth] : order) {
            const auto& node = tree.node(pos);
            if (!spec.constrains(node.feature)) continue;
            auto low = result.leaves_under(node.left);
            auto high = result.leaves_under(node.right);
            if (spec.direction(node.feature) == Direction::Decreasing) std::swap(low, high);

            std::vector<double> lv, hv;
            for (auto p : low) lv.push_back(result.node(p).value);
            for (auto p : high) hv.push_back(result.node(p).value);
            const auto sol = solve_node_overconstrained(lv, hv);
            for (std::size_t a = 0; a < low.size(); ++a) result.set_leaf_value(low[a], sol.left[a]);
            for (std::size_t a = 0; a < high.size(); ++a) result.set_leaf_value(high[a], sol.right[a]);
            out.edges += low.size() * high.size();
            ++out.nodes_solved;
        }
    }

    for (auto leaf : tree.leaves()) {
        const double d = result.node(leaf).value - tree.node(leaf).value;
        out.objective += d * d;
    }
    return out;
}

std::string ReshapeReport::to_json() const {
    nlohmann::json j;
    j["method"] = to_string(method);
    j["edges"] = edges;
    j["objective"] = objective;
    j["nodes_solved"] = nodes_solved;
    j["wall_ms"] = wall_ms;
    return j.dump();
}

ForestReshape reshape_forest(const ForestModel& model, const ShapeSpec& spec, Method method, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    model.validate();
    spec.validate(model.n_features);

    std::vector<TreeReshape> parts(model.trees.size());
    parallel_for(model.trees.size(), threads, [&](std::size_t t) {
        parts[t] = reshape_tree(model.trees[t], spec, method, model.n_features);
    });

    ForestReshape out;
    out.model.n_features = model.n_features;
    out.model.task = model.task;
    out.report.method = method;
    for (auto& p : parts) {
        out.report.edges += p.edges;
        out.report.nodes_solved += p.nodes_solved;
        out.report.objective += p.objective;
        out.model.trees.push_back(std::move(p.tree));
    }
    out.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace reshape
