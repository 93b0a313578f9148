#include "reshape/errors.hpp"
#include "reshape/forest.hpp"
#include "reshape/interval_index.hpp"
#include "support/fixtures.hpp"
#include "support/random_models.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

using namespace reshape;
using namespace reshape::testing;

namespace {

// Evaluates the conjunction of split predicates on the path to each leaf.
std::size_t brute_route(const Tree& tree, std::span<const double> x) {
    for (auto leaf_pos : tree.leaves()) {
        bool ok = true;
        for (std::size_t child = leaf_pos; child != tree.root();) {
            const auto parent = tree.parent(child);
            const auto& n = tree.node(parent);
            const bool goes_left = x[n.feature] <= n.threshold;
            ok &= goes_left == (n.left == child);
            child = parent;
        }
        if (ok) return leaf_pos;
    }
    return static_cast<std::size_t>(-1);
}

std::vector<double> random_point(std::mt19937_64& rng, std::size_t d) {
    std::uniform_real_distribution<double> u(-0.1, 1.1);
    std::vector<double> x(d);
    for (auto& v : x) v = std::round(u(rng) * 64.0) / 64.0;  // lands on thresholds often
    return x;
}

std::string minimal_model(const std::string& nodes, const std::string& extra = "") {
    return R"({"format_version": 1, "task": "regression", "n_features": 2, "routing": "le_left", "trees": [{"nodes": )" +
           nodes + R"(, "root": 0}])" + extra + "}";
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

}  // namespace

TEST_CASE("single-leaf tree predicts a constant") {
    const auto m = forest_from_json(minimal_model(R"([{"id": 0, "value": 7}])"));
    CHECK(m.predict(std::vector<double>{0.0, 0.0}) == 7.0);
    CHECK(m.predict(std::vector<double>{-5.0, 1e9}) == 7.0);
    CHECK_THROWS_AS(m.predict(std::vector<double>{1.0}), InvalidInput);
}

TEST_CASE("forest prediction averages trees") {
    ForestModel m;
    m.n_features = 1;
    m.trees.push_back(Tree({leaf(0, 0.0)}, 0));
    m.trees.push_back(Tree({leaf(0, 1.0)}, 0));
    CHECK(m.predict(std::vector<double>{3.0}) == 0.5);
}

TEST_CASE("routing matches a brute-force path evaluator") {
    std::mt19937_64 rng(12);
    RandomTreeOptions opt;
    opt.max_leaves = 5;
    opt.split_probability = 1.0;
    for (int t = 0; t < 20; ++t) {
        const auto tree = random_tree(rng, opt);
        CHECK(tree.leaves().size() == 5);
        for (int i = 0; i < 1000; ++i) {
            const auto x = random_point(rng, opt.n_features);
            CHECK(tree.route(x) == brute_route(tree, x));
        }
    }
}

TEST_CASE("ties route left") {
    const auto tree = nested_split_tree(0, 1, 2, 3);
    CHECK(tree.predict(std::vector<double>{1.0}) == 1.0);
    CHECK(tree.predict(std::vector<double>{std::nextafter(1.0, 2.0)}) == 2.0);
    CHECK(tree.predict(std::vector<double>{2.0}) == 2.0);
    CHECK(tree.predict(std::vector<double>{2.5}) == 3.0);
}

TEST_CASE("leaf cells") {
    const auto single = leaf_cells(Tree({leaf(5, 1.0)}, 0), 3);
    REQUIRE(single.size() == 1);
    for (const auto& iv : single[0].intervals) {
        CHECK(iv.lower == -INFINITY);
        CHECK(iv.upper == INFINITY);
    }

    const auto split_cells = leaf_cells(Tree({split(0, 0, 0.0, 1, 2), leaf(1, 0), leaf(2, 1)}, 0), 2);
    REQUIRE(split_cells.size() == 2);
    CHECK(split_cells[0].intervals[0].lower == -INFINITY);
    CHECK(split_cells[0].intervals[0].upper == 0.0);
    CHECK(split_cells[1].intervals[0].lower == 0.0);
    CHECK(split_cells[1].intervals[0].upper == INFINITY);
    CHECK(split_cells[1].intervals[1].empty() == false);

    // left and right subtree rectangles of the two-subtree example
    const auto ex = two_subtree_tree();
    const auto left = leaf_cells_under(ex.tree, 1, 3);
    const auto right = leaf_cells_under(ex.tree, 2, 3);
    REQUIRE(left.size() == 3);
    REQUIRE(right.size() == 3);
    CHECK(left[0].leaf == ex.l1);
    CHECK(left[0].intervals[0].upper == 2.0);
    CHECK(left[0].intervals[1].upper == 1.0);
    CHECK(left[1].leaf == ex.l2);
    CHECK(left[1].intervals[0].lower == 2.0);
    CHECK(left[2].leaf == ex.l3);
    CHECK(left[2].intervals[1].lower == 1.0);
    CHECK(left[2].intervals[0].lower == -INFINITY);
    CHECK(right[0].leaf == ex.r1);
    CHECK(right[0].intervals[0].upper == 1.0);
    CHECK(right[1].leaf == ex.r2);
    CHECK(right[1].intervals[0].lower == 1.0);
    CHECK(right[1].intervals[1].upper == 3.0);
    CHECK(right[2].intervals[1].lower == 3.0);
    for (const auto& c : left) CHECK(c.intervals[2].upper == 0.0);
    for (const auto& c : right) CHECK(c.intervals[2].lower == 0.0);
}

TEST_CASE("leaf cells partition space consistently with routing") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
        const auto tree = random_tree(rng);
        const auto cells = leaf_cells(tree, 5);
        for (int i = 0; i < 1000; ++i) {
            const auto x = random_point(rng, 5);
            std::size_t hits = 0;
            std::size_t hit_leaf = 0;
            for (const auto& c : cells) {
                if (c.contains(x)) {
                    ++hits;
                    hit_leaf = c.leaf;
                }
            }
            CHECK(hits == 1);
            CHECK(hit_leaf == tree.route(x));
        }
    }
}

TEST_CASE("overlapping pairs: examples") {
    const Tree two({split(0, 0, 0.5, 1, 2), leaf(1, 0), leaf(2, 1)}, 0);
    const auto pairs = overlapping_pairs(leaf_cells_under(two, 1, 2), leaf_cells_under(two, 2, 2), 0);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0] == std::pair<std::size_t, std::size_t>{1, 2});

    const auto ex = two_subtree_tree();
    const auto got = overlapping_pairs(leaf_cells_under(ex.tree, 1, 3), leaf_cells_under(ex.tree, 2, 3), 2);
    const std::set<std::pair<std::size_t, std::size_t>> expected{
        {ex.l2, ex.r2}, {ex.l1, ex.r1}, {ex.l1, ex.r2}, {ex.l3, ex.r1}, {ex.l3, ex.r2}, {ex.l3, ex.r3}};
    CHECK(got.size() == 6);
    CHECK(std::set(got.begin(), got.end()) == expected);
}

TEST_CASE("half-open intervals that only touch do not overlap") {
    const Interval a{-INFINITY, 1.0};
    const Interval b{1.0, INFINITY};
    CHECK_FALSE(overlaps(a, b));
    CHECK(overlaps(a, Interval{0.5, 2.0}));
    CHECK_FALSE(overlaps(Interval{2.0, 1.0}, Interval{-INFINITY, INFINITY}));  // empty

    // cells meeting only on x_1 = 1 have no common point off the dropped axis
    LeafCell l{0, {Interval{-INFINITY, 1.0}, Interval{}}};
    LeafCell r{1, {Interval{1.0, INFINITY}, Interval{}}};
    CHECK(overlapping_pairs({l}, {r}, 1).empty());
    CHECK(overlapping_pairs({l}, {r}, 0).size() == 1);
}

TEST_CASE("overlapping pairs equal the all-pairs oracle on random trees") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 40; ++t) {
        const auto tree = random_tree(rng);
        for (const auto& [pos, depth] : tree.level_order()) {
            const auto& node = tree.node(pos);
            const auto left = leaf_cells_under(tree, node.left, 5);
            const auto right = leaf_cells_under(tree, node.right, 5);
            std::set<std::pair<std::size_t, std::size_t>> brute;
            for (const auto& l : left) {
                for (const auto& r : right) {
                    if (l.empty() || r.empty()) continue;
                    bool ok = true;
                    for (std::size_t j = 0; j < 5; ++j) {
                        if (j == node.feature) continue;
                        ok &= std::max(l.intervals[j].lower, r.intervals[j].lower) <
                              std::min(l.intervals[j].upper, r.intervals[j].upper);
                    }
                    if (ok) brute.emplace(l.leaf, r.leaf);
                }
            }
            const auto got = overlapping_pairs(left, right, node.feature);
            CHECK(got.size() == brute.size());
            CHECK(std::set(got.begin(), got.end()) == brute);
        }
    }
}

TEST_CASE("interval index ignores insertion order") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    std::vector<std::pair<Interval, std::size_t>> items;
    for (std::size_t i = 0; i < 200; ++i) {
        double a = std::round(u(rng)), b = std::round(u(rng));
        if (i % 17 == 0) a = -INFINITY;
        if (i % 23 == 0) b = INFINITY;
        items.push_back({Interval{a, b}, i});
    }
    const IntervalIndex forward(items);
    std::shuffle(items.begin(), items.end(), rng);
    const IntervalIndex shuffled(items);
    for (int q = 0; q < 200; ++q) {
        const Interval query{std::round(u(rng)) - 0.5, std::round(u(rng))};
        std::vector<std::size_t> brute;
        for (const auto& [iv, id] : items) {
            if (!iv.empty() && !query.empty() && overlaps(iv, query)) brute.push_back(id);
        }
        std::sort(brute.begin(), brute.end());
        CHECK(forward.overlapping(query) == brute);
        CHECK(shuffled.overlapping(query) == brute);
    }
}

TEST_CASE("model files round-trip bit for bit") {
    std::mt19937_64 rng(16);
    for (int t = 0; t < 20; ++t) {
        auto m = random_forest(rng, 3);
        const auto back = forest_from_json(forest_to_json(m));
        REQUIRE(back.trees.size() == m.trees.size());
        for (std::size_t i = 0; i < m.trees.size(); ++i) {
            const auto& a = m.trees[i].nodes();
            const auto& b = back.trees[i].nodes();
            REQUIRE(a.size() == b.size());
            CHECK(m.trees[i].root() == back.trees[i].root());
            for (std::size_t p = 0; p < a.size(); ++p) {
                CHECK(a[p].id == b[p].id);
                CHECK(a[p].leaf == b[p].leaf);
                CHECK(same_bits(a[p].value, b[p].value));
                CHECK(same_bits(a[p].threshold, b[p].threshold));
                CHECK(a[p].left == b[p].left);
                CHECK(a[p].feature == b[p].feature);
            }
        }
    }

    const auto path = std::filesystem::temp_directory_path() / "reshape_nested.json";
    const auto nested = single_tree_forest(nested_split_tree(1, 0.1, 0.7, 0.3), 2);
    save_forest(nested, path);
    const auto loaded = load_forest(path);
    CHECK(forest_to_json(loaded) == forest_to_json(nested));
    std::filesystem::remove(path);
}

TEST_CASE("malformed model files are parse errors") {
    CHECK_THROWS_AS(forest_from_json("{"), ParseError);
    CHECK_THROWS_AS(forest_from_json(R"({"format_version": 1, "task": "regression", "n_features": 2, "routing": "le_left", "trees": []})"),
                    ParseError);
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0, "feature": 0, "threshold": 1, "left": 1, "right": 9}, {"id": 1, "value": 0}])")),
                    ParseError);  // dangling
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0, "feature": 0, "threshold": 1, "left": 1, "right": 2}, {"id": 1, "value": 0}, {"id": 2, "feature": 1, "threshold": 0, "left": 1, "right": 0}])")),
                    ParseError);  // cycle / shared child
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0, "value": 1}, {"id": 0, "value": 2}])")), ParseError);
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0, "value": 1}, {"id": 1, "value": 2}])")),
                    ParseError);  // orphan node
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0, "feature": 5, "threshold": 1, "left": 1, "right": 2}, {"id": 1, "value": 0}, {"id": 2, "value": 1}])")),
                    ParseError);  // feature out of range
    CHECK_THROWS_AS(forest_from_json(minimal_model(R"([{"id": 0}])")), ParseError);

    std::string gt_left = minimal_model(R"([{"id": 0, "value": 1}])");
    gt_left.replace(gt_left.find("le_left"), 7, "gt_left");
    CHECK_THROWS_AS(forest_from_json(gt_left), ParseError);

    std::string prob = minimal_model(R"([{"id": 0, "value": 1.5}])");
    prob.replace(prob.find("regression"), 10, "probability");
    CHECK_THROWS_AS(forest_from_json(prob), ParseError);

    CHECK_THROWS_AS(load_forest("/nonexistent/model.json"), ParseError);
    try {
        forest_from_json(minimal_model(R"([{"id": 0, "feature": 0, "threshold": 1, "left": 1, "right": 9}, {"id": 1, "value": 0}])"));
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("trees[0].nodes[0]") != std::string::npos);
    }
}
