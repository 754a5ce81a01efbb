#pragma once

// Self-financing accounting on grid paths: trade ledgers and liquidation
// values for (almost) simple strategies, the discrete stochastic integral,
// the risk-less position Pi(phi) = phi . S - phi S - C(phi), semimartingale
// invariance checks, the reflected-walk counterexample, and UPBR tail
// statistics.

#include <cstdint>
#include <vector>

#include "spreadlab/cost.hpp"
#include "spreadlab/market.hpp"

namespace spreadlab {

// Cumulative cash from trading at bid (sales) and ask (purchases); left jumps
// are booked at the previous sample's prices, right jumps at the jump time's
// prices. bond[k] includes left-jump trades at time <= t_k and right-jump
// trades at time < t_k.
std::vector<double> bond_position(const AlmostSimpleStrategy& phi, const BidAskPath& path);

// V^liq_t = bond_t + phi_t^+ bid_t - phi_t^- ask_t.
std::vector<double> liquidation_value(const AlmostSimpleStrategy& phi, const BidAskPath& path);

// Cumulative sum of phi_k (S_k - S_{k-1}); zero at t = 0.
std::vector<double> stochastic_integral(const StrategyPath& phi, const std::vector<double>& s);

// Integral of an almost simple strategy: the integrand at a jump time is the
// at-value (the position capturing the price move into that time).
std::vector<double> stochastic_integral(const AlmostSimpleStrategy& phi,
                                        const std::vector<double>& s);

struct LedgerProcess {
    std::vector<double> risky;        // phi
    std::vector<double> integral;     // phi . S
    CostProcess cost;                 // C(phi)
    std::vector<ExtReal> riskless;    // Pi = phi.S - phi S - C, -inf when cost infinite
    std::vector<ExtReal> wealth;      // V = phi.S - C
    std::vector<double> liquidation;  // Pi + phi^+ bid - phi^- ask (finite part)
};

// Requires a price system on the path and phi_0 = 0.
LedgerProcess riskless_position(const StrategyPath& phi, const BidAskPath& path);

struct InvarianceReport {
    double max_abs_diff = 0.0;
    std::vector<double> per_level;  // filled by the refinement sweep
    bool exact = false;             // max_abs_diff <= 1e-12
};

// |Pi under s1 - Pi under s2| over the grid. Both price systems must lie in
// the spread. For grid strategies the difference is an exact algebraic zero
// (Abel summation), which the refinement sweep documents level by level.
InvarianceReport invariance_check(const StrategyPath& phi, const BidAskPath& path,
                                  const std::vector<double>& s1, const std::vector<double>& s2);
InvarianceReport invariance_check(const AlmostSimpleStrategy& phi, const BidAskPath& path,
                                  const std::vector<double>& s1, const std::vector<double>& s2);
InvarianceReport invariance_refinement_sweep(const StrategyPath& phi, const BidAskPath& path,
                                             const std::vector<int>& factors);

// Deterministic single-path median recursion: S_t = median(bid_t, ask_t,
// S_{t+1}) backward from the bid at the horizon. Lies in the spread.
std::vector<double> dynkin_value_on_path(const BidAskPath& path);
std::vector<double> midpoint_price(const BidAskPath& path);

// --- reflected-walk counterexample -----------------------------------------

struct CounterexamplePathLedger {
    double pi_terminal = 0.0;    // alpha * (visits net of a terminal holding) / sqrt(N)
    double caglad_cost = 0.0;    // cost of the same holdings when exits pay the spread
    std::uint64_t visits = 0;    // # of k in [0, N) with W_k = 0
    double local_time = 0.0;     // visits / sqrt(N)
    double abs_b1 = 0.0;         // |W_N| / sqrt(N)
};

// Ledger of the zero-set indicator strategy on bid = -|B|, ask = |B|,
// S = alpha |B| along one walk. Entries and exits are booked at the zeros of
// the walk (zero spread), the continuum-faithful ledger; caglad_cost reports
// what the grid cost process charges when each exit trades one sample later.
CounterexamplePathLedger counterexample_single_path(const std::vector<int>& walk, double alpha);

struct CounterexampleAlphaStats {
    double alpha = 0.0;
    double mean_pi = 0.0;
    double stderr_pi = 0.0;
    double mean_caglad_cost = 0.0;
};

struct CounterexampleReport {
    std::uint64_t steps = 0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
    std::vector<CounterexampleAlphaStats> per_alpha;
    double mean_local_time = 0.0;
    double mean_abs_b1 = 0.0;  // estimator of E|B_1| = sqrt(2/pi), validated first
};

CounterexampleReport local_time_counterexample(std::uint64_t steps, std::uint64_t paths,
                                               const std::vector<double>& alphas,
                                               std::uint64_t seed, int threads = 0);

// --- UPBR tail statistics ----------------------------------------------------

struct StrategyOutcomes {
    std::vector<double> terminal;     // terminal liquidation values
    std::vector<double> running_min;  // pathwise min of V^liq, for admissibility
    std::vector<double> prob;         // weights, sum 1
};

struct TailTable {
    std::vector<double> thresholds;
    std::vector<std::vector<double>> tail;  // tail[n][m] = P(V_T(phi^n) >= m)
    std::vector<double> sup_tail;           // sup over n per threshold
    std::vector<std::size_t> inadmissible;  // strategies with running V^liq < -1
};

TailTable upbr_tail_statistic(const std::vector<StrategyOutcomes>& family,
                              const std::vector<double>& thresholds);

// --- almost-simple approximation experiment ----------------------------------

struct ApproximationLevelResult {
    int level = 0;
    double sup_value_error = 0.0;  // sup_t |V_t(phi^n) - V_t(phi)|
    double sup_phi_error = 0.0;    // sup_k |phi^n_k - phi_k|
};

struct ApproximationReport {
    std::vector<ApproximationLevelResult> levels;
    bool ok = false;  // errors trend to zero: last <= first and phi errors <= 1/n
};

// Per-excursion 1/n approximations of phi composed with phi itself on the
// zero-spread regime; reports the wealth-process error per level.
ApproximationReport approximation_experiment(const StrategyPath& phi, const BidAskPath& path,
                                             const std::vector<int>& levels);

// The composed strategy of the experiment at one level.
StrategyPath excursion_almost_simple_composition(const StrategyPath& phi, const BidAskPath& path,
                                                 int level);

}  // namespace spreadlab
