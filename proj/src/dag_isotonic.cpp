#include "reshape/dag_isotonic.hpp"

#include "reshape/errors.hpp"
#include "reshape/isotonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace reshape {

namespace {

// Dinic max-flow on real capacities.
class MaxFlow {
public:
    explicit MaxFlow(std::size_t n, double eps) : adj_(n), level_(n), iter_(n), eps_(eps) {}

    void add_edge(std::size_t u, std::size_t v, double cap) {
        adj_[u].push_back({v, adj_[v].size(), cap});
        adj_[v].push_back({u, adj_[u].size() - 1, 0.0});
    }

    double run(std::size_t s, std::size_t t) {
        double flow = 0.0;
        while (bfs(s, t)) {
            std::fill(iter_.begin(), iter_.end(), 0);
            while (true) {
                const double f = dfs(s, t, std::numeric_limits<double>::infinity());
                if (f <= eps_) break;
                flow += f;
            }
        }
        return flow;
    }

    /// Vertices reachable from s in the residual graph (the minimal source side).
    std::vector<char> source_side(std::size_t s) const {
        std::vector<char> seen(adj_.size(), 0);
        std::vector<std::size_t> stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            const auto u = stack.back();
            stack.pop_back();
            for (const auto& e : adj_[u]) {
                if (e.cap > eps_ && !seen[e.to]) {
                    seen[e.to] = 1;
                    stack.push_back(e.to);
                }
            }
        }
        return seen;
    }

private:
    struct Arc {
        std::size_t to;
        std::size_t rev;
        double cap;
    };

    bool bfs(std::size_t s, std::size_t t) {
        std::fill(level_.begin(), level_.end(), -1);
        std::vector<std::size_t> queue{s};
        level_[s] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto u = queue[head];
            for (const auto& e : adj_[u]) {
                if (e.cap > eps_ && level_[e.to] < 0) {
                    level_[e.to] = level_[u] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        return level_[t] >= 0;
    }

    double dfs(std::size_t u, std::size_t t, double pushed) {
        if (u == t) return pushed;
        for (auto& i = iter_[u]; i < adj_[u].size(); ++i) {
            auto& e = adj_[u][i];
            if (e.cap > eps_ && level_[e.to] == level_[u] + 1) {
                const double f = dfs(e.to, t, std::min(pushed, e.cap));
                if (f > eps_) {
                    e.cap -= f;
                    adj_[e.to][e.rev].cap += f;
                    return f;
                }
            }
        }
        return 0.0;
    }

    std::vector<std::vector<Arc>> adj_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
    double eps_;
};

}  // namespace

std::vector<std::size_t> topological_order(std::size_t n,
                                           const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::vector<std::size_t>> out(n);
    std::vector<std::size_t> indegree(n, 0);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) throw InvalidInput("constraint graph: edge endpoint out of range");
        if (u == v) throw InvalidInput("constraint graph: self-loop on vertex " + std::to_string(u));
        out[u].push_back(v);
        ++indegree[v];
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
        if (indegree[u] == 0) order.push_back(u);
    }
    for (std::size_t head = 0; head < order.size(); ++head) {
        for (auto v : out[order[head]]) {
            if (--indegree[v] == 0) order.push_back(v);
        }
    }
    if (order.size() != n) throw InvalidInput("constraint graph has a cycle");
    return order;
}

std::vector<double> dag_isotonic_exact(const ConstraintGraph& graph) {
    const std::size_t n = graph.values.size();
    require_finite(graph.values, "dag_isotonic_exact");
    const auto topo = topological_order(n, graph.edges);

    std::vector<std::vector<std::size_t>> succ(n);
    for (const auto& [u, v] : graph.edges) succ[u].push_back(v);

    std::vector<double> fit(n, 0.0);
    std::vector<std::size_t> local(n, 0);
    std::vector<char> member(n, 0);
    std::vector<std::vector<std::size_t>> pending;
    if (n > 0) {
        pending.emplace_back(n);
        for (std::size_t i = 0; i < n; ++i) pending.back()[i] = i;
    }

    while (!pending.empty()) {
        auto block = std::move(pending.back());
        pending.pop_back();
        const std::size_t m = block.size();

        double sum = 0.0;
        for (auto i : block) sum += graph.values[i];
        const double mean = sum / static_cast<double>(m);
        auto settle = [&] {
            for (auto i : block) fit[i] = mean;
        };
        if (m == 1) {
            settle();
            continue;
        }

        double positive = 0.0;
        double scale = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            local[block[a]] = a;
            member[block[a]] = 1;
            const double w = graph.values[block[a]] - mean;
            positive += std::max(w, 0.0);
            scale += std::abs(w);
        }
        const double tol = 1e-12 * (scale + 1.0);

        // Source side of a min cut = the maximum-weight set closed under
        // successors, i.e. the vertices whose fit lies above `mean`.
        const std::size_t s = m;
        const std::size_t t = m + 1;
        MaxFlow flow(m + 2, 1e-15 * (scale + 1.0));
        for (std::size_t a = 0; a < m; ++a) {
            const auto i = block[a];
            const double w = graph.values[i] - mean;
            if (w > 0.0) flow.add_edge(s, a, w);
            if (w < 0.0) flow.add_edge(a, t, -w);
            for (auto j : succ[i]) {
                if (member[j]) flow.add_edge(a, local[j], std::numeric_limits<double>::infinity());
            }
        }
        const double cut = flow.run(s, t);
        for (auto i : block) member[i] = 0;

        if (positive - cut <= tol) {
            settle();
            continue;
        }
        const auto side = flow.source_side(s);
        std::vector<std::size_t> lower, upper;
        for (std::size_t a = 0; a < m; ++a) (side[a] ? upper : lower).push_back(block[a]);
        if (lower.empty() || upper.empty()) {
            settle();
            continue;
        }
        pending.push_back(std::move(lower));
        pending.push_back(std::move(upper));
    }

    // Block means can disagree with the order by an ulp; lift them along
    // the topological order so every edge holds exactly.
    for (auto u : topo) {
        for (auto v : succ[u]) fit[v] = std::max(fit[v], fit[u]);
    }
    return fit;
}

}  // namespace reshape
