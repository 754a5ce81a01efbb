#include "doctest.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "spreadlab/paths.hpp"
#include "spreadlab/portfolio.hpp"

using namespace spreadlab;

namespace {

BidAskPath path_from_spread(const std::vector<double>& spread, double mid = 0.5) {
    BidAskPath path;
    path.bid.resize(spread.size());
    path.ask.resize(spread.size());
    std::vector<double> s(spread.size(), mid);
    for (std::size_t k = 0; k < spread.size(); ++k) {
        path.bid[k] = mid - spread[k] / 2.0;
        path.ask[k] = mid + spread[k] / 2.0;
    }
    path.price_system = std::move(s);
    return path;
}

BidAskPath random_path(std::uint64_t seed, std::size_t samples, double zero_prob = 0.3) {
    CounterRng rng(seed, 61);
    BidAskPath path;
    path.bid.resize(samples);
    path.ask.resize(samples);
    std::vector<double> s(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double mid = 0.2 + 0.6 * rng.next_uniform();
        const double half =
            rng.next_uniform() < zero_prob ? 0.0 : 0.4 * rng.next_uniform() * std::min(mid, 1.0 - mid);
        path.bid[k] = mid - half;
        path.ask[k] = mid + half;
        const double u = rng.next_uniform();
        s[k] = path.bid[k] + u * (path.ask[k] - path.bid[k]);
    }
    path.price_system = std::move(s);
    return path;
}

AlmostSimpleStrategy random_almost_simple(std::uint64_t seed, std::size_t samples) {
    CounterRng rng(seed, 67);
    AlmostSimpleStrategy phi;
    double ruling = 0.0;
    std::size_t t = 0;
    while (true) {
        t += 1 + static_cast<std::size_t>(rng.next_bits() % 3);
        if (t >= samples) break;
        AsJump jump;
        jump.time = t;
        jump.at = rng.next_uniform() < 0.4 ? ruling : 2.0 * rng.next_uniform() - 1.0;
        jump.after = rng.next_uniform() < 0.3 ? jump.at : 2.0 * rng.next_uniform() - 1.0;
        ruling = jump.after;
        phi.jumps.push_back(jump);
    }
    return phi;
}

StrategyPath random_grid_strategy(std::uint64_t seed, std::size_t samples) {
    CounterRng rng(seed, 71);
    std::vector<double> values(samples, 0.0);
    for (std::size_t k = 1; k < samples; ++k)
        values[k] = rng.next_uniform() < 0.5 ? values[k - 1] : 2.0 * rng.next_uniform() - 1.0;
    return make_strategy(std::move(values));
}

}  // namespace

TEST_CASE("bond position: no trades, the two-trade ledger, frictionless round trip") {
    BidAskPath path;
    path.bid = {0.4, 0.4, 0.4};
    path.ask = {0.5, 0.6, 0.6};
    path.price_system = std::vector<double>{0.45, 0.5, 0.5};

    const AlmostSimpleStrategy none;
    for (double v : bond_position(none, path)) CHECK(v == 0.0);

    // Buy 1 at the ask at t = 0+, sell at the bid at t = 1+.
    AlmostSimpleStrategy two_trades;
    two_trades.jumps.push_back(AsJump{0, 0.0, 1.0});
    two_trades.jumps.push_back(AsJump{1, 1.0, 0.0});
    const std::vector<double> bond = bond_position(two_trades, path);
    CHECK(bond[0] == 0.0);
    CHECK(bond[1] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(bond[2] == doctest::Approx(-0.1).epsilon(1e-15));

    // V^liq on (0, 1): -0.5 + bid.
    const std::vector<double> liq = liquidation_value(two_trades, path);
    CHECK(liq[1] == doctest::Approx(-0.5 + 0.4).epsilon(1e-15));

    // Frictionless round trip returns the bond to zero.
    BidAskPath flat = path_from_spread({0.0, 0.0, 0.0});
    const std::vector<double> flat_bond = bond_position(two_trades, flat);
    CHECK(flat_bond[2] == 0.0);
}

TEST_CASE("liquidation value of a short position marks at the ask") {
    BidAskPath path;
    path.bid = {0.5, 0.5};
    path.ask = {0.6, 0.6};
    path.price_system = std::vector<double>{0.55, 0.55};
    AlmostSimpleStrategy shorting;
    shorting.jumps.push_back(AsJump{0, 0.0, -1.0});
    const std::vector<double> bond = bond_position(shorting, path);
    const std::vector<double> liq = liquidation_value(shorting, path);
    CHECK(bond[1] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(liq[1] == doctest::Approx(bond[1] - 0.6).epsilon(1e-15));
}

TEST_CASE("stochastic integral: telescoping, zero strategy, second-half holding") {
    std::vector<double> s{0.5, 0.52, 0.49, 0.55, 0.6};
    const StrategyPath ones = make_strategy({1.0, 1.0, 1.0, 1.0, 1.0});
    const std::vector<double> full = stochastic_integral(ones, s);
    CHECK(full.back() == doctest::Approx(s.back() - s.front()).epsilon(1e-15));

    const StrategyPath zero = make_strategy(std::vector<double>(5, 0.0));
    for (double v : stochastic_integral(zero, s)) CHECK(v == 0.0);

    const StrategyPath half = make_strategy({0.0, 0.0, 0.0, 1.0, 1.0});
    CHECK(stochastic_integral(half, s).back() ==
          doctest::Approx(s[4] - s[2]).epsilon(1e-15));
}

TEST_CASE("riskless position: zero strategy, mid-price two-trade consistency") {
    BidAskPath path;
    path.bid = {0.4, 0.4, 0.4};
    path.ask = {0.5, 0.6, 0.6};
    path.price_system = std::vector<double>{0.45, 0.5, 0.5};

    const StrategyPath zero = make_strategy({0.0, 0.0, 0.0});
    for (const ExtReal& pi : riskless_position(zero, path).riskless) {
        CHECK_FALSE(pi.infinite);
        CHECK(pi.value == 0.0);
    }

    // Grid rendering of the two-trade strategy: hold on (0, 1].
    const StrategyPath phi = make_strategy({0.0, 1.0, 0.0});
    const LedgerProcess ledger = riskless_position(phi, path);
    AlmostSimpleStrategy as;
    as.jumps.push_back(AsJump{0, 0.0, 1.0});
    as.jumps.push_back(AsJump{1, 1.0, 0.0});
    const std::vector<double> bond = bond_position(as, path);
    for (std::size_t k = 0; k < path.size(); ++k)
        CHECK(ledger.riskless[k].value == doctest::Approx(bond[k]).epsilon(1e-14));
    CHECK(ledger.riskless[2].value == doctest::Approx(-0.1).epsilon(1e-14));
}

TEST_CASE("ledger consistency: Pi equals the trade-price ledger for almost simple strategies") {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const BidAskPath path = random_path(seed, 15);
        const AlmostSimpleStrategy phi = random_almost_simple(seed + 7, 15);
        const std::vector<double> bond = bond_position(phi, path);
        const std::vector<double> integral = stochastic_integral(phi, *path.price_system);
        const CostProcess cost = almost_simple_cost(phi, path);
        for (std::size_t k = 0; k < path.size(); ++k) {
            const double pi = integral[k] - phi.value_at(k) * (*path.price_system)[k] -
                              cost.values[k].value;
            CHECK(std::abs(pi - bond[k]) <= 1e-12);
        }
    }
}

TEST_CASE("trades only at zero spread cost nothing: Pi = integral - phi S") {
    const BidAskPath path = path_from_spread({0.0, 0.2, 0.2, 0.0, 0.0});
    const StrategyPath phi = make_strategy({0.0, 1.0, 1.0, 1.0, 0.0});
    const LedgerProcess ledger = riskless_position(phi, path);
    CHECK(ledger.cost.total() == 0.0);
    for (std::size_t k = 0; k < path.size(); ++k)
        CHECK(ledger.riskless[k].value ==
              doctest::Approx(ledger.integral[k] - phi.values[k] * 0.5).epsilon(1e-14));
}

TEST_CASE("invariance: identical systems, dynkin-vs-midpoint, exactness for grid strategies") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        BidAskPath path = random_path(seed + 31, 17);
        path.price_system.reset();
        const std::vector<double> s1 = dynkin_value_on_path(path);
        const std::vector<double> s2 = midpoint_price(path);

        const AlmostSimpleStrategy as = random_almost_simple(seed + 3, 17);
        const InvarianceReport as_report = invariance_check(as, path, s1, s2);
        CHECK(as_report.exact);

        const StrategyPath phi = random_grid_strategy(seed + 5, 17);
        const InvarianceReport report = invariance_check(phi, path, s1, s2);
        CHECK(report.exact);

        const InvarianceReport same = invariance_check(phi, path, s1, s1);
        CHECK(same.max_abs_diff == 0.0);
    }
}

TEST_CASE("invariance refinement sweep stays at the numerical floor") {
    BidAskPath path = random_path(123, 33);
    path.price_system.reset();
    const StrategyPath phi = random_grid_strategy(9, 33);
    const InvarianceReport report = invariance_refinement_sweep(phi, path, {2, 4, 8});
    REQUIRE(report.per_level.size() == 3);
    for (double err : report.per_level) CHECK(err <= 1e-12);
}

TEST_CASE("invariance rejects price systems outside the spread") {
    const BidAskPath path = path_from_spread({0.2, 0.2, 0.2});
    const StrategyPath phi = make_strategy({0.0, 1.0, 0.0});
    std::vector<double> outside{0.7, 0.5, 0.5};
    CHECK_THROWS_AS(invariance_check(phi, path, outside, midpoint_price(path)),
                    std::invalid_argument);
}

TEST_CASE("dynkin value on a path lies in the spread and is idempotent under refinement") {
    BidAskPath path = random_path(55, 21);
    path.price_system.reset();
    const std::vector<double> s = dynkin_value_on_path(path);
    for (std::size_t k = 0; k < path.size(); ++k) {
        CHECK(s[k] >= path.bid[k]);
        CHECK(s[k] <= path.ask[k]);
    }
    const BidAskPath fine = refine(path, 3);
    const std::vector<double> fine_s = dynkin_value_on_path(fine);
    for (std::size_t k = 0; k < path.size(); ++k)
        CHECK(fine_s[3 * k] == doctest::Approx(s[k]).epsilon(1e-15));
}

TEST_CASE("counterexample single path: deterministic zig-zag ledger") {
    // W = (0, 1, 0, -1, 0): visits to zero on [0, T) at k = 0, 2; sqrt(N) = 2.
    const std::vector<int> walk{0, 1, 0, -1, 0};
    for (double alpha : {1.0, 0.5, 0.0, -1.0}) {
        const CounterexamplePathLedger ledger = counterexample_single_path(walk, alpha);
        CHECK(ledger.visits == 2);
        CHECK(ledger.pi_terminal == doctest::Approx(alpha * 2.0 / 2.0).epsilon(1e-15));
        CHECK(ledger.local_time == doctest::Approx(1.0).epsilon(1e-15));
        // The caglad booking pays (1 + alpha)|B| on each exit instead.
        CHECK(ledger.caglad_cost == doctest::Approx((1.0 + alpha) * 1.0).epsilon(1e-15));
    }
}

TEST_CASE("counterexample ensemble: alpha = 0 is flat, means track alpha, estimator sane") {
    const CounterexampleReport report =
        local_time_counterexample(400, 2000, {1.0, 0.0, -1.0}, 99, 2);
    REQUIRE(report.per_alpha.size() == 3);
    CHECK(report.per_alpha[1].mean_pi == 0.0);
    CHECK(report.per_alpha[0].mean_pi > 0.5);
    CHECK(report.per_alpha[2].mean_pi < -0.5);
    // Pi(alpha = 1) = local time up to the terminal-holding correction.
    CHECK(std::abs(report.per_alpha[0].mean_pi - report.mean_local_time) <= 0.05);
    const double target = std::sqrt(2.0 / std::numbers::pi);
    CHECK(std::abs(report.mean_abs_b1 - target) <= 0.1);
    // Thread count must not change the result (per-path streams).
    const CounterexampleReport serial =
        local_time_counterexample(400, 2000, {1.0, 0.0, -1.0}, 99, 1);
    CHECK(serial.per_alpha[0].mean_pi == doctest::Approx(report.per_alpha[0].mean_pi).epsilon(1e-15));
}

TEST_CASE("counterexample ensemble matches the per-path ledger on simple_walk streams") {
    const std::uint64_t steps = 64, paths = 50, seed = 1234;
    const CounterexampleReport report = local_time_counterexample(steps, paths, {0.7}, seed, 1);
    double mean_pi = 0.0;
    for (std::uint64_t p = 0; p < paths; ++p)
        mean_pi += counterexample_single_path(simple_walk(steps, seed, p), 0.7).pi_terminal;
    mean_pi /= static_cast<double>(paths);
    CHECK(report.per_alpha[0].mean_pi == doctest::Approx(mean_pi).epsilon(1e-13));
}

TEST_CASE("upbr tail statistics: zeros, admissibility flag, sup tails") {
    std::vector<StrategyOutcomes> family;
    StrategyOutcomes flat;
    flat.terminal = {0.0, 0.0};
    flat.running_min = {0.0, 0.0};
    flat.prob = {0.5, 0.5};
    family.push_back(flat);

    StrategyOutcomes good;
    good.terminal = {2.0, 0.5};
    good.running_min = {-0.5, -0.9};
    good.prob = {0.4, 0.6};
    family.push_back(good);

    StrategyOutcomes inadmissible;
    inadmissible.terminal = {5.0};
    inadmissible.running_min = {-1.5};
    inadmissible.prob = {1.0};
    family.push_back(inadmissible);

    const TailTable table = upbr_tail_statistic(family, {0.25, 1.0, 4.0});
    CHECK(table.tail[0] == std::vector<double>{0.0, 0.0, 0.0});
    CHECK(table.tail[1][0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(table.tail[1][1] == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(table.sup_tail[2] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(table.inadmissible == std::vector<std::size_t>{2});
}

TEST_CASE("approximation experiment: almost simple strategies reproduce at coarse levels") {
    // Jumps of at least 1/2: every level >= 2 tracks them exactly.
    const BidAskPath path = path_from_spread({0.0, 0.2, 0.2, 0.2, 0.0, 0.2, 0.2}, 2.0);
    std::vector<double> values{0.0, 0.0, 0.5, 0.5, 1.5, 1.5, 0.5};
    const StrategyPath phi = make_strategy(std::move(values));
    const ApproximationReport report = approximation_experiment(phi, path, {2, 4, 8});
    CHECK(report.ok);
    for (const ApproximationLevelResult& level : report.levels) {
        CHECK(level.sup_value_error <= 1e-12);
        CHECK(level.sup_phi_error <= 1e-12);
    }
}

TEST_CASE("approximation experiment: sampled ramp error decreases in the level") {
    std::vector<double> spread(65, 0.0);
    for (std::size_t k = 8; k < 56; ++k) spread[k] = 0.25;
    const BidAskPath path = path_from_spread(spread, 2.0);
    std::vector<double> values(65, 0.0);
    for (std::size_t k = 8; k < 56; ++k) values[k] = static_cast<double>(k - 8) / 47.0;
    for (std::size_t k = 56; k < 65; ++k) values[k] = 0.0;
    const StrategyPath phi = make_strategy(std::move(values));
    const ApproximationReport report = approximation_experiment(phi, path, {2, 4, 8, 16});
    CHECK(report.ok);
    for (std::size_t i = 0; i < report.levels.size(); ++i) {
        CHECK(report.levels[i].sup_phi_error <= 1.0 / report.levels[i].level + 1e-12);
        if (i > 0)
            CHECK(report.levels[i].sup_value_error <=
                  report.levels[i - 1].sup_value_error + 1e-12);
    }
}

TEST_CASE("approximation experiment: zero-spread-supported strategies reproduce exactly") {
    const BidAskPath path = path_from_spread({0.0, 0.0, 0.3, 0.3, 0.0, 0.0}, 2.0);
    // Positions only where both the holding cell and its trade prices sit at
    // zero spread.
    const StrategyPath phi = make_strategy({0.0, 0.7, 0.0, 0.0, 0.0, 0.4});
    const ApproximationReport report = approximation_experiment(phi, path, {2, 4});
    CHECK(report.ok);
    for (const ApproximationLevelResult& level : report.levels)
        CHECK(level.sup_value_error <= 1e-12);
}

TEST_CASE("approximation experiment rejects chattering spreads") {
    GeneratorConfig config;
    config.kind = GeneratorKind::ReflectedWalk;
    config.steps = 256;
    config.seed = 5;
    const BidAskPath path = generate(config);
    const StrategyPath phi = make_strategy(std::vector<double>(path.size(), 0.0));
    CHECK_THROWS_AS(approximation_experiment(phi, path, {2}), std::invalid_argument);
}

TEST_CASE("pointwise-convergent spikes can only lower the limiting wealth") {
    // Constant S: the integral vanishes and V = -C, so liminf C >= C turns
    // into limsup V <= V; a spike added inside a constant stretch of phi is a
    // pure extra round trip and keeps the inequality strict.
    const BidAskPath path = path_from_spread(std::vector<double>(17, 0.2));
    std::vector<double> base_values(17, 0.0);
    for (std::size_t k = 1; k < 17; ++k)
        base_values[k] = (k % 3 == 0) ? 0.4 * static_cast<double>(k % 5) : base_values[k - 1];
    const StrategyPath phi = make_strategy(std::move(base_values));
    const LedgerProcess base = riskless_position(phi, path);
    double limsup_terminal = -1e300;
    for (std::size_t i = 1; i <= 5; ++i) {
        std::vector<double> values = phi.values;
        values[3 * i + 1] += 1.0;
        const LedgerProcess spiked = riskless_position(make_strategy(std::move(values)), path);
        if (i > 2) limsup_terminal = std::max(limsup_terminal, spiked.wealth.back().value);
    }
    CHECK(limsup_terminal <= base.wealth.back().value + 1e-12);
    CHECK(limsup_terminal < base.wealth.back().value - 0.05);  // cost lost in the limit
}

TEST_CASE("Pi coincides with its left-limit variant on step paths") {
    // integral_t - phi_t S_t equals integral_{t-} - phi_t S_{t-} cell by cell:
    // the jump phi_t dS_t cancels.
    const BidAskPath path = random_path(222, 19);
    const StrategyPath phi = random_grid_strategy(223, 19);
    const LedgerProcess ledger = riskless_position(phi, path);
    const std::vector<double>& s = *path.price_system;
    for (std::size_t k = 1; k < path.size(); ++k) {
        const double left_variant = ledger.integral[k - 1] - phi.values[k] * s[k - 1] -
                                    ledger.cost.values[k].value;
        CHECK(std::abs(left_variant - ledger.riskless[k].value) <= 1e-12);
    }
}
