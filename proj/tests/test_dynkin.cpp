#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spreadlab/dynkin.hpp"
#include "spreadlab/paths.hpp"

using namespace spreadlab;

namespace {

// Root with two equally likely children; bid_0 = 0.1, ask_0 = 0.4, terminal
// bid values 0.2 / 0.8. Hand values: E = 0.5, value_0 = median(0.1,0.4,0.5)
// = 0.4 = ask_0; drift step +0.1, martingale steps -/+ 0.3.
struct DepthOneFixture {
    ScenarioTree tree = ScenarioTree::build({2}, {{0.5, 0.5}});
    AdaptedProcess bid{0.1, 0.2, 0.8};
    AdaptedProcess ask{0.4, 0.2, 0.8};
};

GeneratedScenario random_scenario(std::uint64_t seed, int depth, int max_branch = 3) {
    GeneratorConfig config;
    config.kind = GeneratorKind::TreeRandom;
    config.tree_depth = depth;
    config.tree_max_branch = max_branch;
    config.seed = seed;
    return generate_tree(config);
}

TreeStoppingTime random_stopping_time(const ScenarioTree& tree, std::uint64_t seed,
                                      double stop_prob, double never_tail = 0.3) {
    CounterRng rng(seed, 51);
    TreeStoppingTime tau;
    tau.flag.assign(static_cast<std::size_t>(tree.node_count()), StopFlag::Continue);
    for (int id = 0; id < tree.node_count(); ++id) {
        const double u = rng.next_uniform();
        if (u < stop_prob)
            tau.flag[static_cast<std::size_t>(id)] = StopFlag::Stop;
        else if (u > 1.0 - never_tail && tree.is_terminal(id))
            tau.flag[static_cast<std::size_t>(id)] = StopFlag::Infinite;
    }
    return tau;
}

}  // namespace

namespace {

// Martingale closure of the terminal values of x: E[x_depth | F_t] at every
// node. With bid = ask the median pins the game value to the quoted price,
// so the frictionless value equals the conditional expectation of the
// terminal exactly when the price is a martingale.
AdaptedProcess martingale_closure(const ScenarioTree& tree, const AdaptedProcess& x) {
    AdaptedProcess out = x;
    for (int t = tree.depth(); t >= 1; --t) {
        const AdaptedProcess averaged = conditional_expectation(tree, out, t);
        for (int v : tree.layer(t - 1))
            out[static_cast<std::size_t>(v)] = averaged[static_cast<std::size_t>(v)];
    }
    return out;
}

}  // namespace

TEST_CASE("frictionless martingale price: value is the conditional expectation chain") {
    const GeneratedScenario scenario = random_scenario(4, 3);
    const ScenarioTree& tree = scenario.tree;
    const AdaptedProcess price = martingale_closure(tree, scenario.bid);
    const GameValue game = dynkin_value(tree, price, price);
    for (std::size_t i = 0; i < game.value.size(); ++i)
        CHECK(std::abs(game.value[i] - price[i]) <= 1e-12);
    for (std::size_t i = 0; i < game.drift.size(); ++i) CHECK(std::abs(game.drift[i]) <= 1e-12);
}

TEST_CASE("depth-1 fixture: value, Doob parts, drift sign, mean variation") {
    DepthOneFixture f;
    const GameValue game = dynkin_value(f.tree, f.bid, f.ask);
    CHECK(game.value0 == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(game.value[0] == f.ask[0]);  // value touches the ask exactly

    CHECK(game.drift[1] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(game.drift[2] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(game.martingale[1] == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(game.martingale[2] == doctest::Approx(0.3).epsilon(1e-15));

    const DriftSignReport signs = drift_sign_check(f.tree, game, f.bid, f.ask);
    CHECK(signs.ok);

    CHECK(mean_variation(f.tree, game.value, {0, 1}) == doctest::Approx(0.1).epsilon(1e-15));

    // sigma* at time 0 stops immediately (value = ask at the root).
    CHECK(game.sigma_star[0].flag[0] == StopFlag::Stop);
    CHECK(game.tau_star[0].flag[0] == StopFlag::Continue);
}

TEST_CASE("terminal payoff is a parameter validated against the spread") {
    DepthOneFixture f;
    AdaptedProcess terminal{0.0, 0.2, 0.8};
    CHECK_NOTHROW(dynkin_value(f.tree, f.bid, f.ask, terminal));
    terminal[1] = 0.1;  // below the bid at that leaf
    CHECK_THROWS_AS(dynkin_value(f.tree, f.bid, f.ask, terminal), std::invalid_argument);
}

TEST_CASE("brute force on the depth-1 fixture reproduces the recursion") {
    DepthOneFixture f;
    AdaptedProcess terminal{0.0, 0.2, 0.8};
    const BruteForceValue bf = brute_force_game_value(f.tree, f.bid, f.ask, terminal, 0);
    CHECK(bf.maxmin == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(bf.minmax == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(bf.pairs == 4);  // two stopping times each
}

TEST_CASE("oracle equivalence and saddle point on random trees") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed, 1 + static_cast<int>(seed % 3), 2);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);
        AdaptedProcess terminal(game.value.size(), 0.0);
        for (int v : tree.layer(tree.depth()))
            terminal[static_cast<std::size_t>(v)] = scenario.bid[static_cast<std::size_t>(v)];
        for (int id = 0; id < tree.node_count(); ++id) {
            const BruteForceValue bf =
                brute_force_game_value(tree, scenario.bid, scenario.ask, terminal, id);
            CHECK(std::abs(bf.maxmin - bf.minmax) <= 1e-12);
            CHECK(std::abs(bf.maxmin - game.value[static_cast<std::size_t>(id)]) <= 1e-12);
        }
    }
}

TEST_CASE("equilibrium times form a Nash pair against every deviation") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 100, 2, 2);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);
        AdaptedProcess terminal(game.value.size(), 0.0);
        for (int v : tree.layer(tree.depth()))
            terminal[static_cast<std::size_t>(v)] = scenario.bid[static_cast<std::size_t>(v)];
        const std::vector<TreeStoppingTime> all = enumerate_stopping_times(tree, 0);
        const double value0 = game.value0;
        for (const TreeStoppingTime& deviation : all) {
            const double maximizer_dev = game_payoff(tree, scenario.bid, scenario.ask, terminal, 0,
                                                     deviation, game.sigma_star[0]);
            const double minimizer_dev = game_payoff(tree, scenario.bid, scenario.ask, terminal, 0,
                                                     game.tau_star[0], deviation);
            CHECK(maximizer_dev <= value0 + 1e-12);
            CHECK(minimizer_dev >= value0 - 1e-12);
        }
    }
}

TEST_CASE("Doob decomposition: exactness, martingale input, deterministic drift") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 40, 3);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);

        for (int id = 0; id < tree.node_count(); ++id) {
            const std::size_t i = static_cast<std::size_t>(id);
            CHECK(std::abs(game.value[i] -
                           (game.value0 + game.martingale[i] + game.drift[i])) <= 1e-12);
        }
        // Martingale increments have zero conditional mean.
        for (int id = 0; id < tree.node_count(); ++id) {
            const TreeNode& n = tree.node(id);
            if (n.children.empty()) continue;
            double mean = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                mean += n.probs[c] * (game.martingale[static_cast<std::size_t>(n.children[c])] -
                                      game.martingale[static_cast<std::size_t>(id)]);
            CHECK(std::abs(mean) <= 1e-12);
        }
    }

    // Deterministic increasing process: martingale part vanishes.
    const ScenarioTree tree = ScenarioTree::build_uniform({2, 2});
    AdaptedProcess x(7, 0.0);
    for (int id = 0; id < 7; ++id)
        x[static_cast<std::size_t>(id)] = 0.1 * tree.node(id).time;
    const DoobParts parts = doob_decomposition(tree, x);
    for (std::size_t i = 0; i < x.size(); ++i) {
        CHECK(std::abs(parts.martingale[i]) <= 1e-15);
        CHECK(std::abs(parts.drift[i] - (x[i] - x[0])) <= 1e-15);
    }
}

TEST_CASE("mean variation: martingale zero, deterministic telescoping, Doob identity") {
    const GeneratedScenario scenario = random_scenario(7, 3);
    const ScenarioTree& tree = scenario.tree;

    AdaptedProcess martingale = scenario.bid;
    for (int t = tree.depth(); t >= 1; --t) {
        const AdaptedProcess averaged = conditional_expectation(tree, martingale, t);
        for (int v : tree.layer(t - 1))
            martingale[static_cast<std::size_t>(v)] = averaged[static_cast<std::size_t>(v)];
    }
    CHECK(mean_variation(tree, martingale, {0, 1, 2, 3}) <= 1e-12);

    AdaptedProcess deterministic(martingale.size(), 0.0);
    for (int id = 0; id < tree.node_count(); ++id)
        deterministic[static_cast<std::size_t>(id)] = 0.2 * tree.node(id).time;
    CHECK(mean_variation(tree, deterministic, {0, 1, 2, 3}) ==
          doctest::Approx(0.6).epsilon(1e-13));

    // MV along the full grid equals E sum |drift increments|.
    const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);
    double drift_abs = 0.0;
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        if (n.children.empty()) continue;
        drift_abs += tree.reach_probability(id) *
                     std::abs(drift_increment(tree, game.value, id));
    }
    CHECK(mean_variation(tree, game.value, {0, 1, 2, 3}) ==
          doctest::Approx(drift_abs).epsilon(1e-13));
}

TEST_CASE("stopped mean variation matches the not-yet-stopped indicator form") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 60, 3);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);
        const std::vector<int> grid{0, 1, 2, 3};
        const TreeStoppingTime raw = random_stopping_time(tree, seed, 0.2);
        const TreeStoppingTime tau = round_up_to_grid(tree, raw, grid);
        const double direct = mean_variation_stopped(tree, game.value, grid, tau);
        const double indicator = mean_variation_indicator(tree, game.value, grid, tau);
        CHECK(std::abs(direct - indicator) <= 1e-12);
    }
}

TEST_CASE("drift sign inclusions hold on randomized trees") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 200, 1 + static_cast<int>(seed % 4));
        const GameValue game = dynkin_value(scenario.tree, scenario.bid, scenario.ask);
        const DriftSignReport report =
            drift_sign_check(scenario.tree, game, scenario.bid, scenario.ask);
        CHECK(report.ok);
        // Sandwich is exact at every node.
        for (int id = 0; id < scenario.tree.node_count(); ++id) {
            const std::size_t i = static_cast<std::size_t>(id);
            CHECK(scenario.bid[i] <= game.value[i]);
            CHECK(game.value[i] <= scenario.ask[i]);
        }
    }
}

TEST_CASE("drift harvest on the depth-1 fixture: buy the drift, liquidate at the bid") {
    DepthOneFixture f;
    const GameValue game = dynkin_value(f.tree, f.bid, f.ask);
    const HarvestStrategy h = drift_harvest_strategy(f.tree, game, f.bid, f.ask, 1.0);
    CHECK_FALSE(h.empty);
    CHECK(h.position[1] == 1.0);
    CHECK(h.position[2] == 1.0);
    CHECK(h.harvested_drift[1] == doctest::Approx(0.1).epsilon(1e-15));
    // Terminal liquidation at the bid = terminal value of the game: the
    // ledger identity V^liq = harvested + martingale holds with no slippage.
    for (int leaf : {1, 2}) {
        const std::size_t i = static_cast<std::size_t>(leaf);
        CHECK(h.liquidation[i] ==
              doctest::Approx(h.harvested_drift[i] + h.martingale_part[i]).epsilon(1e-15));
    }
    const HarvestCheckReport check = harvest_inequality_check(f.tree, h, game, f.bid, f.ask);
    CHECK(check.ok);
}

TEST_CASE("martingale price system yields an empty harvest strategy") {
    const GeneratedScenario scenario = random_scenario(3, 3);
    const AdaptedProcess price = martingale_closure(scenario.tree, scenario.bid);
    const GameValue game = dynkin_value(scenario.tree, price, price);
    const HarvestStrategy h = drift_harvest_strategy(scenario.tree, game, price, price, 1.0);
    CHECK(h.empty);
    for (double pos : h.position) CHECK(pos == 0.0);
}

TEST_CASE("harvest inequality replay on random trees with truncation stops") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 500, 4, 2);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);
        const TreeStoppingTime stop = random_stopping_time(tree, seed + 1, 0.15);
        const HarvestStrategy h =
            drift_harvest_strategy(tree, game, scenario.bid, scenario.ask, 0.5, &stop);
        const HarvestCheckReport report =
            harvest_inequality_check(tree, h, game, scenario.bid, scenario.ask);
        CHECK(report.ok);
        CHECK(report.harvested_terminal_min >= -1e-12);
        CHECK(report.sharp_constant <= report.loose_constant + 1e-15);
    }
}

TEST_CASE("grid monotonicity inequalities on the depth-2 spread-0.1 fixture") {
    const ScenarioTree tree = ScenarioTree::build_uniform({2, 2});
    AdaptedProcess mid{0.5, 0.45, 0.55, 0.4, 0.5, 0.5, 0.6};
    AdaptedProcess bid(7, 0.0), ask(7, 0.0);
    for (std::size_t i = 0; i < 7; ++i) {
        bid[i] = mid[i] - 0.05;
        ask[i] = mid[i] + 0.05;
    }
    TreeStoppingTime never;
    never.flag.assign(7, StopFlag::Continue);
    const GridMonotonicityReport report =
        grid_monotonicity_check(tree, bid, ask, {0, 2}, {0, 1, 2}, never);
    CHECK(report.ok);
    CHECK(report.coarse_mv <= report.fine_mv + 2.0 + 1e-12);
}

TEST_CASE("grid monotonicity property: random trees, stopping times, level pairs") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 900, 4, 2);
        const ScenarioTree& tree = scenario.tree;
        const TreeStoppingTime tau = random_stopping_time(tree, seed + 2, 0.2);
        const std::vector<int> coarse =
            (seed % 2 == 0) ? std::vector<int>{0, 2, 4} : std::vector<int>{0, 4};
        const std::vector<int> fine =
            (seed % 3 == 0) ? std::vector<int>{0, 1, 2, 3, 4} : std::vector<int>{0, 2, 3, 4};
        // Ensure subset relation for the pair actually used.
        std::vector<int> coarse_used = coarse;
        if (seed % 3 != 0 && seed % 2 == 0) coarse_used = std::vector<int>{0, 2, 4};
        const GridMonotonicityReport report = grid_monotonicity_check(
            tree, scenario.bid, scenario.ask, coarse_used, fine, tau);
        CHECK(report.ok);
    }
}

TEST_CASE("frictionless martingale satisfies the monotonicity bound trivially") {
    const GeneratedScenario scenario = random_scenario(11, 4, 2);
    const AdaptedProcess price = martingale_closure(scenario.tree, scenario.bid);
    TreeStoppingTime never;
    never.flag.assign(static_cast<std::size_t>(scenario.tree.node_count()), StopFlag::Continue);
    const GridMonotonicityReport report = grid_monotonicity_check(
        scenario.tree, price, price, {0, 4}, {0, 1, 2, 3, 4}, never);
    CHECK(report.coarse_mv <= 1e-12);
    CHECK(report.fine_mv <= 1e-12);
    CHECK(report.ok);
}

TEST_CASE("grid convergence diagnostic reaches zero at the finest level") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GeneratedScenario scenario = random_scenario(seed + 1300, 4, 2);
        const std::vector<std::vector<int>> chain{
            {0, 4}, {0, 2, 4}, {0, 1, 2, 3, 4}};
        const std::vector<double> errors =
            grid_convergence_diagnostic(scenario.tree, scenario.bid, scenario.ask, chain);
        REQUIRE(errors.size() == 3);
        CHECK(errors.back() == 0.0);
        CHECK(errors.front() >= errors.back());
    }
}

TEST_CASE("dynkin_value_on_grid with the full grid matches dynkin_value") {
    const GeneratedScenario scenario = random_scenario(21, 3);
    const GameValue full = dynkin_value(scenario.tree, scenario.bid, scenario.ask);
    const GameValue gridded =
        dynkin_value_on_grid(scenario.tree, scenario.bid, scenario.ask, {0, 1, 2, 3});
    for (std::size_t i = 0; i < full.value.size(); ++i)
        CHECK(std::abs(full.value[i] - gridded.value[i]) <= 1e-12);
}

TEST_CASE("brute force on a frictionless martingale returns the price itself") {
    const GeneratedScenario scenario = random_scenario(33, 3, 2);
    const ScenarioTree& tree = scenario.tree;
    const AdaptedProcess price = martingale_closure(tree, scenario.bid);
    AdaptedProcess terminal(price.size(), 0.0);
    for (int v : tree.layer(tree.depth()))
        terminal[static_cast<std::size_t>(v)] = price[static_cast<std::size_t>(v)];
    for (int id = 0; id < tree.node_count(); ++id) {
        const BruteForceValue bf = brute_force_game_value(tree, price, price, terminal, id);
        CHECK(std::abs(bf.maxmin - price[static_cast<std::size_t>(id)]) <= 1e-12);
        CHECK(std::abs(bf.minmax - bf.maxmin) <= 1e-12);
    }
}
