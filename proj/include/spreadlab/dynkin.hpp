#pragma once

// Discrete Dynkin game solver on scenario trees: the median backward
// recursion producing the candidate price system, its Doob decomposition,
// mean-variation diagnostics, the drift-sign lemma check, the drift-harvest
// strategy construction, and the cross-grid mean-variation inequalities.

#include <cstdint>
#include <vector>

#include "spreadlab/scenario.hpp"

namespace spreadlab {

struct GameValue {
    AdaptedProcess value;       // S^n
    AdaptedProcess drift;       // A^n, drift[root] = 0
    AdaptedProcess martingale;  // M^n, value = value0 + M + A nodewise
    double value0 = 0.0;
    // Equilibrium times per start time t: first time >= t the value touches
    // the bid (tau) / the ask (sigma); both stop at the horizon.
    std::vector<TreeStoppingTime> tau_star;
    std::vector<TreeStoppingTime> sigma_star;
};

// Backward induction value(v) = median(bid(v), ask(v), E[value_next | v])
// from the given terminal payoff (bid at the horizon by default). Requires
// bid <= ask nodewise and bid <= terminal <= ask at the horizon.
GameValue dynkin_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                       const AdaptedProcess& ask, const AdaptedProcess& terminal);
GameValue dynkin_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                       const AdaptedProcess& ask);

// E[ R(tau, sigma) | node ] where R pays bid at tau on {tau <= sigma}, ask at
// sigma on {sigma < tau}, and the terminal payoff when both run to the
// horizon. Stopping times must be finite-valued on the subtree.
double game_payoff(const ScenarioTree& tree, const AdaptedProcess& bid,
                   const AdaptedProcess& ask, const AdaptedProcess& terminal, int node,
                   const TreeStoppingTime& tau, const TreeStoppingTime& sigma);

struct BruteForceValue {
    double maxmin = 0.0;
    double minmax = 0.0;
    std::uint64_t pairs = 0;
};

// Exhaustive maxmin/minmax over all finite-valued stopping times on the
// subtree of `node`. Throws when the pair count exceeds `pair_cap`.
BruteForceValue brute_force_game_value(const ScenarioTree& tree, const AdaptedProcess& bid,
                                       const AdaptedProcess& ask, const AdaptedProcess& terminal,
                                       int node, std::uint64_t pair_cap = 1000000);

struct DoobParts {
    AdaptedProcess martingale;
    AdaptedProcess drift;
};

// Discrete Doob decomposition x = x(root) + M + A with predictable drift
// increments: A(child) - A(parent) = E[x_child | parent] - x(parent).
DoobParts doob_decomposition(const ScenarioTree& tree, const AdaptedProcess& x);

// Predictable one-step drift at a non-terminal node: E[x_next | v] - x(v).
double drift_increment(const ScenarioTree& tree, const AdaptedProcess& x, int node);

// Mean variation of x along a partition (sorted times containing 0 and depth):
// E[ sum_i |E[x_{t_{i+1}} - x_{t_i} | F_{t_i}]| ].
double mean_variation(const ScenarioTree& tree, const AdaptedProcess& x,
                      const std::vector<int>& partition);

// Mean variation of x stopped at tau along a partition, and the indicator
// form E[ sum 1{t_i < tau} |E[x_{t_{i+1}} - x_{t_i} | F_{t_i}]| ].
double mean_variation_stopped(const ScenarioTree& tree, const AdaptedProcess& x,
                              const std::vector<int>& partition, const TreeStoppingTime& tau);
double mean_variation_indicator(const ScenarioTree& tree, const AdaptedProcess& x,
                                const std::vector<int>& partition, const TreeStoppingTime& tau);

struct DriftSignReport {
    std::vector<int> violations;  // non-terminal nodes breaking either inclusion
    bool ok = false;
};

// Positive one-step drift forces value = ask, negative forces value = bid.
// Comparisons are exact: the median returns one of its arguments.
DriftSignReport drift_sign_check(const ScenarioTree& tree, const GameValue& game,
                                 const AdaptedProcess& bid, const AdaptedProcess& ask);

struct HarvestStrategy {
    AdaptedProcess position;         // holding on the cell ending at each node
    AdaptedProcess bond;             // cash ledger from trading at bid/ask
    AdaptedProcess liquidation;      // V^liq = bond + pos^+ bid - pos^- ask
    AdaptedProcess harvested_drift;  // running sum of position * drift increment
    AdaptedProcess martingale_part;  // running sum of position * martingale increment
    double scale = 0.0;
    bool empty = true;  // no positive drift anywhere
};

// Long-only strategy holding `scale` shares from each positive-drift time to
// the next negative-drift time, truncated at stop_at (may be null). By the
// drift-sign lemma it buys only where value = ask and sells only where
// value = bid, except for a forced liquidation at stop_at.
HarvestStrategy drift_harvest_strategy(const ScenarioTree& tree, const GameValue& game,
                                       const AdaptedProcess& bid, const AdaptedProcess& ask,
                                       double scale, const TreeStoppingTime* stop_at = nullptr);

struct HarvestCheckReport {
    double min_slack = 0.0;        // min over nodes of V^liq - harvested - martingale + bound
    double sharp_constant = 0.0;   // scale * max over nodes of (value - bid)
    double loose_constant = 0.0;   // scale * max ask
    double harvested_terminal_min = 0.0;
    bool ok = false;
};

// Pathwise replay of the harvest lower bound: at every node
//   V^liq >= harvested + martingale_part - scale * max(value - bid),
// and the harvested drift is nonnegative.
HarvestCheckReport harvest_inequality_check(const ScenarioTree& tree, const HarvestStrategy& h,
                                            const GameValue& game, const AdaptedProcess& bid,
                                            const AdaptedProcess& ask);

// Dynkin value restricted to a sub-grid of {0..depth} (containing 0 and
// depth): the recursion steps only across sub-grid times.
GameValue dynkin_value_on_grid(const ScenarioTree& tree, const AdaptedProcess& bid,
                               const AdaptedProcess& ask, const std::vector<int>& grid);

struct GridMonotonicityReport {
    double coarse_mv = 0.0;    // MV(S^n stopped at D_n(tau_m), D_n)
    double fine_mv = 0.0;      // MV(S^m stopped at tau_m, D_m)
    double variant_lhs = 0.0;  // MV(S^m stopped at D_n(tau), D_n)
    double variant_rhs = 0.0;  // MV(S^m stopped at D_m(tau), D_m)
    bool ok = false;           // coarse <= fine + 2 and variant_lhs <= variant_rhs + 1
};

// Cross-grid mean-variation inequalities for sub-grids grid_n subset of
// grid_m and a stopping time tau (any {0..depth} u {never} valued time).
GridMonotonicityReport grid_monotonicity_check(const ScenarioTree& tree, const AdaptedProcess& bid,
                                               const AdaptedProcess& ask,
                                               const std::vector<int>& grid_n,
                                               const std::vector<int>& grid_m,
                                               const TreeStoppingTime& tau);

// Max nodewise gap |S^(level) - S^(finest)| per level of a refining chain of
// sub-grids, evaluated at the level's own grid times.
std::vector<double> grid_convergence_diagnostic(const ScenarioTree& tree,
                                                const AdaptedProcess& bid,
                                                const AdaptedProcess& ask,
                                                const std::vector<std::vector<int>>& chain);

}  // namespace spreadlab
