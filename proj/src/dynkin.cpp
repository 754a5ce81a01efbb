#include "spreadlab/dynkin.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spreadlab/cost.hpp"

namespace spreadlab {

namespace {

void check_sizes(const ScenarioTree& tree, const AdaptedProcess& x, const char* what) {
    if (static_cast<int>(x.size()) != tree.node_count())
        throw std::invalid_argument(std::string(what) + ": process size mismatch");
}

void check_bid_ask(const ScenarioTree& tree, const AdaptedProcess& bid, const AdaptedProcess& ask) {
    check_sizes(tree, bid, "dynkin");
    check_sizes(tree, ask, "dynkin");
    for (int id = 0; id < tree.node_count(); ++id)
        if (bid[static_cast<std::size_t>(id)] > ask[static_cast<std::size_t>(id)])
            throw std::invalid_argument("dynkin: bid above ask");
}

TreeStoppingTime first_touch_time(const ScenarioTree& tree, const AdaptedProcess& value,
                                  const AdaptedProcess& barrier, int from_time) {
    TreeStoppingTime st;
    st.flag.assign(static_cast<std::size_t>(tree.node_count()), StopFlag::Continue);
    for (int id = 0; id < tree.node_count(); ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        const int t = tree.node(id).time;
        if (t < from_time) continue;
        // The first-hit semantics is handled by the path walk; marking every
        // touch (and the horizon) keeps the flags canonical.
        if (value[i] == barrier[i] || t == tree.depth()) st.flag[i] = StopFlag::Stop;
    }
    return st;
}

}  // namespace

GameValue dynkin_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                       const AdaptedProcess& ask, const AdaptedProcess& terminal) {
    check_bid_ask(tree, bid, ask);
    check_sizes(tree, terminal, "dynkin terminal");
    GameValue game;
    game.value.assign(static_cast<std::size_t>(tree.node_count()), 0.0);
    for (int id : tree.layer(tree.depth())) {
        const std::size_t i = static_cast<std::size_t>(id);
        if (terminal[i] < bid[i] || terminal[i] > ask[i])
            throw std::invalid_argument("dynkin: terminal outside [bid, ask]");
        game.value[i] = terminal[i];
    }
    for (int t = tree.depth() - 1; t >= 0; --t) {
        for (int id : tree.layer(t)) {
            const TreeNode& n = tree.node(id);
            double expectation = 0.0;
            for (std::size_t c = 0; c < n.children.size(); ++c)
                expectation += n.probs[c] * game.value[static_cast<std::size_t>(n.children[c])];
            game.value[static_cast<std::size_t>(id)] =
                median3(bid[static_cast<std::size_t>(id)], ask[static_cast<std::size_t>(id)],
                        expectation);
        }
    }
    game.value0 = game.value[0];
    DoobParts parts = doob_decomposition(tree, game.value);
    game.drift = std::move(parts.drift);
    game.martingale = std::move(parts.martingale);
    game.tau_star.reserve(static_cast<std::size_t>(tree.depth()) + 1);
    game.sigma_star.reserve(static_cast<std::size_t>(tree.depth()) + 1);
    for (int t = 0; t <= tree.depth(); ++t) {
        game.tau_star.push_back(first_touch_time(tree, game.value, bid, t));
        game.sigma_star.push_back(first_touch_time(tree, game.value, ask, t));
    }
    return game;
}

GameValue dynkin_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                       const AdaptedProcess& ask) {
    AdaptedProcess terminal(bid.size(), 0.0);
    for (int id : tree.layer(tree.depth()))
        terminal[static_cast<std::size_t>(id)] = bid[static_cast<std::size_t>(id)];
    return dynkin_value(tree, bid, ask, terminal);
}

namespace {

double payoff_walk(const ScenarioTree& tree, const AdaptedProcess& bid, const AdaptedProcess& ask,
                   const AdaptedProcess& terminal, int node, const TreeStoppingTime& tau,
                   const TreeStoppingTime& sigma) {
    const std::size_t i = static_cast<std::size_t>(node);
    const bool tau_stops = tau.flag[i] == StopFlag::Stop;
    const bool sigma_stops = sigma.flag[i] == StopFlag::Stop;
    if (tau_stops && sigma_stops && tree.is_terminal(node)) {
        // Both run to the horizon: the game settles at the terminal payoff.
        return terminal[i];
    }
    if (tau_stops) return bid[i];    // tau <= sigma pays the bid
    if (sigma_stops) return ask[i];  // sigma < tau pays the ask
    const TreeNode& n = tree.node(node);
    if (n.children.empty())
        throw std::invalid_argument("game_payoff: stopping time does not stop by the horizon");
    double acc = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c)
        acc += n.probs[c] * payoff_walk(tree, bid, ask, terminal, n.children[c], tau, sigma);
    return acc;
}

}  // namespace

double game_payoff(const ScenarioTree& tree, const AdaptedProcess& bid, const AdaptedProcess& ask,
                   const AdaptedProcess& terminal, int node, const TreeStoppingTime& tau,
                   const TreeStoppingTime& sigma) {
    return payoff_walk(tree, bid, ask, terminal, node, tau, sigma);
}

BruteForceValue brute_force_game_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                                       const AdaptedProcess& ask, const AdaptedProcess& terminal,
                                       int node, std::uint64_t pair_cap) {
    const std::uint64_t count = count_subtree_stopping_times(tree, node);
    if (count > pair_cap / std::max<std::uint64_t>(count, 1))
        throw std::runtime_error("brute_force_game_value: pair cap exceeded");
    const std::vector<TreeStoppingTime> times = enumerate_subtree_stopping_times(tree, node);

    std::vector<std::vector<double>> payoff(times.size(), std::vector<double>(times.size(), 0.0));
    for (std::size_t ti = 0; ti < times.size(); ++ti)
        for (std::size_t si = 0; si < times.size(); ++si)
            payoff[ti][si] =
                game_payoff(tree, bid, ask, terminal, node, times[ti], times[si]);

    BruteForceValue result;
    result.pairs = static_cast<std::uint64_t>(times.size()) * times.size();
    double maxmin = -1e300;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        double worst = 1e300;
        for (std::size_t si = 0; si < times.size(); ++si) worst = std::min(worst, payoff[ti][si]);
        maxmin = std::max(maxmin, worst);
    }
    double minmax = 1e300;
    for (std::size_t si = 0; si < times.size(); ++si) {
        double best = -1e300;
        for (std::size_t ti = 0; ti < times.size(); ++ti) best = std::max(best, payoff[ti][si]);
        minmax = std::min(minmax, best);
    }
    result.maxmin = maxmin;
    result.minmax = minmax;
    return result;
}

DoobParts doob_decomposition(const ScenarioTree& tree, const AdaptedProcess& x) {
    check_sizes(tree, x, "doob_decomposition");
    DoobParts parts;
    parts.drift.assign(x.size(), 0.0);
    parts.martingale.assign(x.size(), 0.0);
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        if (n.children.empty()) continue;
        const double delta = drift_increment(tree, x, id);
        for (int c : n.children) {
            const std::size_t ci = static_cast<std::size_t>(c);
            parts.drift[ci] = parts.drift[static_cast<std::size_t>(id)] + delta;
            parts.martingale[ci] = x[ci] - x[0] - parts.drift[ci];
        }
    }
    return parts;
}

double drift_increment(const ScenarioTree& tree, const AdaptedProcess& x, int node) {
    const TreeNode& n = tree.node(node);
    if (n.children.empty()) throw std::invalid_argument("drift_increment: terminal node");
    double expectation = 0.0;
    for (std::size_t c = 0; c < n.children.size(); ++c)
        expectation += n.probs[c] * x[static_cast<std::size_t>(n.children[c])];
    return expectation - x[static_cast<std::size_t>(node)];
}

namespace {

void check_partition(const ScenarioTree& tree, const std::vector<int>& partition) {
    if (partition.size() < 2 || partition.front() != 0 || partition.back() != tree.depth())
        throw std::invalid_argument("mean_variation: partition must contain 0 and depth");
    for (std::size_t i = 1; i < partition.size(); ++i)
        if (partition[i] <= partition[i - 1])
            throw std::invalid_argument("mean_variation: partition not increasing");
}

}  // namespace

double mean_variation(const ScenarioTree& tree, const AdaptedProcess& x,
                      const std::vector<int>& partition) {
    check_sizes(tree, x, "mean_variation");
    check_partition(tree, partition);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        for (int v : tree.layer(partition[i])) {
            const double one_step =
                conditional_expectation_at(tree, x, v, partition[i + 1]) -
                x[static_cast<std::size_t>(v)];
            acc += tree.reach_probability(v) * std::abs(one_step);
        }
    }
    return acc;
}

double mean_variation_stopped(const ScenarioTree& tree, const AdaptedProcess& x,
                              const std::vector<int>& partition, const TreeStoppingTime& tau) {
    return mean_variation(tree, stop_process(tree, x, tau), partition);
}

double mean_variation_indicator(const ScenarioTree& tree, const AdaptedProcess& x,
                                const std::vector<int>& partition, const TreeStoppingTime& tau) {
    check_sizes(tree, x, "mean_variation");
    check_partition(tree, partition);
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        for (int v : tree.layer(partition[i])) {
            if (!tau.not_stopped_by(tree, v)) continue;  // 1{t_i < tau}
            const double one_step =
                conditional_expectation_at(tree, x, v, partition[i + 1]) -
                x[static_cast<std::size_t>(v)];
            acc += tree.reach_probability(v) * std::abs(one_step);
        }
    }
    return acc;
}

DriftSignReport drift_sign_check(const ScenarioTree& tree, const GameValue& game,
                                 const AdaptedProcess& bid, const AdaptedProcess& ask) {
    DriftSignReport report;
    for (int id = 0; id < tree.node_count(); ++id) {
        if (tree.is_terminal(id)) continue;
        const std::size_t i = static_cast<std::size_t>(id);
        const double delta = drift_increment(tree, game.value, id);
        // The median returns one of its arguments, so these comparisons are
        // exact: delta != 0 forces the value onto the touched barrier.
        if (delta > 0.0 && game.value[i] != ask[i]) report.violations.push_back(id);
        if (delta < 0.0 && game.value[i] != bid[i]) report.violations.push_back(id);
    }
    report.ok = report.violations.empty();
    return report;
}

HarvestStrategy drift_harvest_strategy(const ScenarioTree& tree, const GameValue& game,
                                       const AdaptedProcess& bid, const AdaptedProcess& ask,
                                       double scale, const TreeStoppingTime* stop_at) {
    check_bid_ask(tree, bid, ask);
    if (scale < 0.0) throw std::invalid_argument("drift_harvest_strategy: negative scale");
    const std::size_t count = static_cast<std::size_t>(tree.node_count());
    HarvestStrategy h;
    h.scale = scale;
    h.position.assign(count, 0.0);
    h.bond.assign(count, 0.0);
    h.liquidation.assign(count, 0.0);
    h.harvested_drift.assign(count, 0.0);
    h.martingale_part.assign(count, 0.0);

    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& n = tree.node(id);
        const std::size_t i = static_cast<std::size_t>(id);
        h.liquidation[i] = h.bond[i] + std::max(h.position[i], 0.0) * bid[i] -
                           std::max(-h.position[i], 0.0) * ask[i];
        if (n.children.empty()) continue;

        const double delta = drift_increment(tree, game.value, id);
        double next_position;
        const bool stopped = stop_at != nullptr && !stop_at->not_stopped_by(tree, id);
        if (stopped) {
            next_position = 0.0;  // forced liquidation at the truncation time
        } else if (delta > 0.0) {
            next_position = scale;
            h.empty = false;
        } else if (delta < 0.0) {
            next_position = 0.0;
        } else {
            next_position = h.position[i];
        }
        const double increment = next_position - h.position[i];
        const double cash = increment > 0.0 ? -ask[i] * increment
                           : increment < 0.0 ? bid[i] * (-increment)
                                             : 0.0;
        for (int c : n.children) {
            const std::size_t ci = static_cast<std::size_t>(c);
            h.position[ci] = next_position;
            h.bond[ci] = h.bond[i] + cash;
            h.harvested_drift[ci] = h.harvested_drift[i] + next_position * delta;
            h.martingale_part[ci] =
                h.martingale_part[i] +
                next_position * (game.martingale[ci] - game.martingale[i]);
        }
    }
    return h;
}

HarvestCheckReport harvest_inequality_check(const ScenarioTree& tree, const HarvestStrategy& h,
                                            const GameValue& game, const AdaptedProcess& bid,
                                            const AdaptedProcess& ask) {
    HarvestCheckReport report;
    double max_gap = 0.0;
    double max_ask = 0.0;
    for (int id = 0; id < tree.node_count(); ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        max_gap = std::max(max_gap, game.value[i] - bid[i]);
        max_ask = std::max(max_ask, ask[i]);
    }
    report.sharp_constant = h.scale * max_gap;
    report.loose_constant = h.scale * max_ask;
    double min_slack = 1e300;
    double min_harvested = 1e300;
    for (int id = 0; id < tree.node_count(); ++id) {
        const std::size_t i = static_cast<std::size_t>(id);
        min_slack = std::min(min_slack, h.liquidation[i] - h.harvested_drift[i] -
                                            h.martingale_part[i] + report.sharp_constant);
        min_harvested = std::min(min_harvested, h.harvested_drift[i]);
    }
    report.min_slack = min_slack;
    report.harvested_terminal_min = min_harvested;
    report.ok = min_slack >= -1e-12 && min_harvested >= -1e-12;
    return report;
}

GameValue dynkin_value_on_grid(const ScenarioTree& tree, const AdaptedProcess& bid,
                               const AdaptedProcess& ask, const std::vector<int>& grid) {
    check_bid_ask(tree, bid, ask);
    check_partition(tree, grid);
    GameValue game;
    game.value.assign(static_cast<std::size_t>(tree.node_count()), 0.0);
    for (int id : tree.layer(tree.depth()))
        game.value[static_cast<std::size_t>(id)] = bid[static_cast<std::size_t>(id)];
    // Backward across grid steps; in-between times carry the conditional
    // expectation of the next grid value so the process is defined everywhere.
    for (std::size_t gi = grid.size() - 1; gi-- > 0;) {
        const int from = grid[gi];
        const int to = grid[gi + 1];
        for (int t = to - 1; t >= from; --t) {
            for (int id : tree.layer(t)) {
                const TreeNode& n = tree.node(id);
                double expectation = 0.0;
                for (std::size_t c = 0; c < n.children.size(); ++c)
                    expectation += n.probs[c] * game.value[static_cast<std::size_t>(n.children[c])];
                const std::size_t i = static_cast<std::size_t>(id);
                game.value[i] = (t == from) ? median3(bid[i], ask[i], expectation) : expectation;
            }
        }
    }
    game.value0 = game.value[0];
    DoobParts parts = doob_decomposition(tree, game.value);
    game.drift = std::move(parts.drift);
    game.martingale = std::move(parts.martingale);
    return game;
}

GridMonotonicityReport grid_monotonicity_check(const ScenarioTree& tree, const AdaptedProcess& bid,
                                               const AdaptedProcess& ask,
                                               const std::vector<int>& grid_n,
                                               const std::vector<int>& grid_m,
                                               const TreeStoppingTime& tau) {
    for (int t : grid_n)
        if (std::find(grid_m.begin(), grid_m.end(), t) == grid_m.end())
            throw std::invalid_argument("grid_monotonicity_check: grid_n not a subset of grid_m");

    const GameValue coarse = dynkin_value_on_grid(tree, bid, ask, grid_n);
    const GameValue fine = dynkin_value_on_grid(tree, bid, ask, grid_m);
    const TreeStoppingTime tau_m = round_up_to_grid(tree, tau, grid_m);
    const TreeStoppingTime tau_n = round_up_to_grid(tree, tau, grid_n);
    const TreeStoppingTime tau_m_on_n = round_up_to_grid(tree, tau_m, grid_n);

    GridMonotonicityReport report;
    report.coarse_mv = mean_variation_stopped(tree, coarse.value, grid_n, tau_m_on_n);
    report.fine_mv = mean_variation_stopped(tree, fine.value, grid_m, tau_m);
    report.variant_lhs = mean_variation_stopped(tree, fine.value, grid_n, tau_n);
    report.variant_rhs = mean_variation_stopped(tree, fine.value, grid_m, tau_m);
    report.ok = report.coarse_mv <= report.fine_mv + 2.0 + 1e-12 &&
                report.variant_lhs <= report.variant_rhs + 1.0 + 1e-12;
    return report;
}

std::vector<double> grid_convergence_diagnostic(const ScenarioTree& tree,
                                                const AdaptedProcess& bid,
                                                const AdaptedProcess& ask,
                                                const std::vector<std::vector<int>>& chain) {
    if (chain.empty()) throw std::invalid_argument("grid_convergence_diagnostic: empty chain");
    const GameValue finest = dynkin_value_on_grid(tree, bid, ask, chain.back());
    std::vector<double> errors;
    for (const std::vector<int>& grid : chain) {
        const GameValue level = dynkin_value_on_grid(tree, bid, ask, grid);
        double err = 0.0;
        for (int t : grid)
            for (int v : tree.layer(t))
                err = std::max(err, std::abs(level.value[static_cast<std::size_t>(v)] -
                                             finest.value[static_cast<std::size_t>(v)]));
        errors.push_back(err);
    }
    return errors;
}

}  // namespace spreadlab
