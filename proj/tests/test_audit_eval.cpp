#include "reshape/audit.hpp"
#include "reshape/errors.hpp"
#include "reshape/metrics.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numeric>
#include <set>

using namespace reshape;

namespace {

AuditConfig unit_box(std::map<std::size_t, Direction> dirs, std::size_t d) {
    AuditConfig cfg;
    cfg.spec = ShapeSpec(std::move(dirs));
    cfg.probes = 50;
    cfg.grid_size = 16;
    cfg.seed = 3;
    cfg.feature_ranges.assign(d, {0.0, 1.0});
    return cfg;
}

}  // namespace

TEST_CASE("sweep positions") {
    const auto plain = sweep_positions(0.0, 1.0, 5, {});
    CHECK(plain == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    const auto with_t = sweep_positions(0.0, 1.0, 2, {0.5, 7.0});
    REQUIRE(with_t.size() == 4);
    CHECK(with_t[1] < 0.5);
    CHECK(with_t[2] > 0.5);
    CHECK(std::is_sorted(with_t.begin(), with_t.end()));
}

TEST_CASE("audit counts") {
    const auto constant = [](std::span<const double>) { return 1.0; };
    auto cfg = unit_box({{0, Direction::Increasing}}, 2);
    auto res = audit_monotonicity(constant, cfg);
    CHECK(res.violations == 0);
    CHECK(res.sweeps == 50);
    CHECK(res.total_checks == 50 * 15);

    const auto falling = [](std::span<const double> x) { return -x[1]; };
    cfg = unit_box({{1, Direction::Increasing}}, 2);
    res = audit_monotonicity(falling, cfg);
    CHECK(res.violations == res.total_checks);
    CHECK(res.witnesses.size() == 10);
    CHECK(res.worst_violation == doctest::Approx(1.0 / 15.0));

    cfg = unit_box({{1, Direction::Decreasing}}, 2);
    CHECK(audit_monotonicity(falling, cfg).violations == 0);

    const auto nan_rule = [](std::span<const double>) { return std::nan(""); };
    CHECK_THROWS_AS(audit_monotonicity(nan_rule, cfg), InvalidModel);
}

TEST_CASE("audit is deterministic across threads") {
    const auto bumpy = [](std::span<const double> x) { return std::sin(9.0 * x[0]) + x[1]; };
    auto cfg = unit_box({{0, Direction::Increasing}, {1, Direction::Increasing}}, 3);
    cfg.probes = 300;
    const auto a = audit_monotonicity(bumpy, cfg, 1);
    const auto b = audit_monotonicity(bumpy, cfg, 4);
    CHECK(a.violations > 0);
    CHECK(a.to_json() == b.to_json());
    const auto j = nlohmann::json::parse(a.to_json());
    CHECK(j.at("violations") == a.violations);
    CHECK(j.at("total_checks") == a.total_checks);
    CHECK(j.at("witnesses").size() == a.witnesses.size());
}

TEST_CASE("threshold-aware sweeps catch a step between grid points") {
    // unreshaped two-leaf tree stepping down at 0.3
    const auto tree = testing::single_tree_forest(
        Tree({testing::split(0, 0, 0.3, 1, 2), testing::leaf(1, 1.0), testing::leaf(2, 0.0)}, 0), 1);
    auto cfg = unit_box({{0, Direction::Increasing}}, 1);
    cfg.grid_size = 2;  // only 0 and 1 on the plain grid
    cfg.breakpoints = forest_breakpoints(tree, cfg.spec);
    CHECK(cfg.breakpoints.at(0) == std::vector<double>{0.3});
    const auto res = audit_monotonicity([&](std::span<const double> x) { return tree.predict_unchecked(x); }, cfg);
    CHECK(res.violations == 50);
}

TEST_CASE("audit config validation") {
    auto cfg = unit_box({{0, Direction::Increasing}}, 2);
    cfg.grid_size = 1;
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = unit_box({{4, Direction::Increasing}}, 2);
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
    cfg = unit_box({{0, Direction::Increasing}}, 2);
    cfg.feature_ranges[0] = {1.0, 0.0};
    CHECK_THROWS_AS(cfg.validate(), InvalidInput);
}

TEST_CASE("data ranges widen constant columns") {
    DataMatrix m(3, 2, {1, 5, 2, 5, 3, 5});
    const auto r = data_ranges(m);
    CHECK(r[0] == std::pair<double, double>{1, 3});
    CHECK(r[1] == std::pair<double, double>{4, 6});
}

TEST_CASE("metrics") {
    const std::vector<double> truth(4, 2.0);
    const std::vector<double> pred(4, 3.0);
    CHECK(mse(pred, truth) == 1.0);
    CHECK(mape(pred, truth) == 0.5);

    const std::vector<double> p{0.5, 1.5, -2.0, 4.0};
    const std::vector<double> y{1.0, 1.0, -1.0, 2.0};
    double sq = 0.0, rel = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        sq += (p[i] - y[i]) * (p[i] - y[i]);
        rel += std::abs(p[i] - y[i]) / std::abs(y[i]);
    }
    CHECK(mse(p, y) == doctest::Approx(sq / 4));
    CHECK(mse(y, p) == mse(p, y));
    CHECK(mape(p, y) == doctest::Approx(rel / 4));

    const std::vector<double> zero{1.0, 0.0};
    try {
        mape(std::vector<double>{1.0, 1.0}, zero);
        FAIL("expected an error");
    } catch (const InvalidInput& e) {
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
    CHECK_THROWS_AS(mse(std::vector<double>{1.0}, zero), InvalidInput);
    CHECK_THROWS_AS(mse(std::vector<double>{}, std::vector<double>{}), InvalidInput);

    CHECK(accuracy(std::vector<double>{0.2, 0.5, 0.9, 0.4}, std::vector<double>{0, 1, 1, 1}) == 0.75);
    CHECK(accuracy(std::vector<double>{0.2, 0.5}, std::vector<double>{0, 1}, 0.6) == 0.5);
}

TEST_CASE("k-fold indices") {
    const auto five = kfold_indices(5, 5, 1);
    REQUIRE(five.size() == 5);
    std::set<std::size_t> seen;
    for (const auto& f : five) {
        CHECK(f.size() == 1);
        seen.insert(f.begin(), f.end());
    }
    CHECK(seen.size() == 5);

    const auto ten = kfold_indices(10, 5, 1);
    for (const auto& f : ten) CHECK(f.size() == 2);

    const auto odd = kfold_indices(23, 5, 9);
    std::vector<std::size_t> all;
    for (const auto& f : odd) {
        CHECK(f.size() >= 4);
        CHECK(f.size() <= 5);
        all.insert(all.end(), f.begin(), f.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> iota(23);
    std::iota(iota.begin(), iota.end(), 0);
    CHECK(all == iota);

    CHECK(kfold_indices(100, 5, 4) == kfold_indices(100, 5, 4));
    CHECK(kfold_indices(100, 5, 4) != kfold_indices(100, 5, 5));
    CHECK_THROWS_AS(kfold_indices(3, 5, 0), InvalidInput);
    CHECK_THROWS_AS(kfold_indices(3, 1, 0), InvalidInput);
}

TEST_CASE("fold summary") {
    const auto s = summarize_folds(std::vector<double>{1, 2, 3, 4});
    CHECK(s.mean == 2.5);
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
}
