#include "spreadlab/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spreadlab/paths.hpp"

namespace spreadlab {

namespace {

const std::vector<double>& require_price_system(const BidAskPath& path) {
    if (!path.price_system) throw std::invalid_argument("portfolio: price system required");
    return *path.price_system;
}

// Cash change of a single trade: sales earn the bid, purchases pay the ask.
inline double trade_cash(double bid, double ask, double increment) {
    if (increment > 0.0) return -ask * increment;
    if (increment < 0.0) return bid * (-increment);
    return 0.0;
}

}  // namespace

std::vector<double> bond_position(const AlmostSimpleStrategy& phi, const BidAskPath& path) {
    phi.validate(path.size());
    const std::size_t last = path.size() - 1;
    std::vector<double> left_cash(path.size(), 0.0);
    std::vector<double> right_cash(path.size(), 0.0);
    for (const AsJump& j : phi.jumps) {
        if (j.time > 0) {
            const double inc = j.at - phi.value_left(j.time);
            left_cash[j.time] += trade_cash(path.bid[j.time - 1], path.ask[j.time - 1], inc);
        }
        right_cash[j.time] += trade_cash(path.bid[j.time], path.ask[j.time], j.after - j.at);
    }
    std::vector<double> bond(path.size(), 0.0);
    double running = 0.0;
    for (std::size_t k = 0; k <= last; ++k) {
        running += left_cash[k];  // a left jump at t_k settles at t_k
        bond[k] = running;
        running += right_cash[k];  // a right jump at t_k settles just after
    }
    return bond;
}

std::vector<double> liquidation_value(const AlmostSimpleStrategy& phi, const BidAskPath& path) {
    std::vector<double> bond = bond_position(phi, path);
    std::vector<double> v(path.size(), 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const double pos = phi.value_at(k);
        v[k] = bond[k] + std::max(pos, 0.0) * path.bid[k] - std::max(-pos, 0.0) * path.ask[k];
    }
    return v;
}

std::vector<double> stochastic_integral(const StrategyPath& phi, const std::vector<double>& s) {
    if (phi.values.size() != s.size())
        throw std::invalid_argument("stochastic_integral: size mismatch");
    std::vector<double> out(s.size(), 0.0);
    double running = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        running += phi.values[k] * (s[k] - s[k - 1]);
        out[k] = running;
    }
    return out;
}

std::vector<double> stochastic_integral(const AlmostSimpleStrategy& phi,
                                        const std::vector<double>& s) {
    std::vector<double> out(s.size(), 0.0);
    double running = 0.0;
    for (std::size_t k = 1; k < s.size(); ++k) {
        running += phi.value_at(k) * (s[k] - s[k - 1]);
        out[k] = running;
    }
    return out;
}

LedgerProcess riskless_position(const StrategyPath& phi, const BidAskPath& path) {
    const std::vector<double>& s = require_price_system(path);
    if (phi.values.size() != path.size())
        throw std::invalid_argument("riskless_position: strategy/path size mismatch");
    LedgerProcess ledger;
    ledger.risky = phi.values;
    ledger.integral = stochastic_integral(phi, s);
    ledger.cost = cost_process(phi, path);
    ledger.riskless.assign(path.size(), ExtReal{});
    ledger.wealth.assign(path.size(), ExtReal{});
    ledger.liquidation.assign(path.size(), 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) {
        const ExtReal c = ledger.cost.values[k];
        if (c.infinite) {
            // Infinite costs cannot be compensated: ruin, propagated as a marker.
            ledger.riskless[k] = ExtReal{0.0, true};
            ledger.wealth[k] = ExtReal{0.0, true};
            ledger.liquidation[k] = 0.0;
            continue;
        }
        const double pi = ledger.integral[k] - phi.values[k] * s[k] - c.value;
        ledger.riskless[k] = ExtReal{pi, false};
        ledger.wealth[k] = ExtReal{ledger.integral[k] - c.value, false};
        const double pos = phi.values[k];
        ledger.liquidation[k] =
            pi + std::max(pos, 0.0) * path.bid[k] - std::max(-pos, 0.0) * path.ask[k];
    }
    return ledger;
}

namespace {

void check_price_in_spread(const BidAskPath& path, const std::vector<double>& s,
                           const char* which) {
    if (s.size() != path.size()) throw std::invalid_argument("invariance_check: size mismatch");
    for (std::size_t k = 0; k < path.size(); ++k)
        if (s[k] < path.bid[k] - 1e-15 || s[k] > path.ask[k] + 1e-15)
            throw std::invalid_argument(std::string("invariance_check: ") + which +
                                        " outside the spread");
}

std::vector<ExtReal> riskless_under(const StrategyPath& phi, const BidAskPath& path,
                                    const std::vector<double>& s) {
    BidAskPath priced = path;
    priced.price_system = s;
    return riskless_position(phi, priced).riskless;
}

}  // namespace

InvarianceReport invariance_check(const StrategyPath& phi, const BidAskPath& path,
                                  const std::vector<double>& s1, const std::vector<double>& s2) {
    check_price_in_spread(path, s1, "s1");
    check_price_in_spread(path, s2, "s2");
    if (phi.values.front() != 0.0)
        throw std::invalid_argument("invariance_check: strategies start from a zero position");
    std::vector<ExtReal> pi1 = riskless_under(phi, path, s1);
    std::vector<ExtReal> pi2 = riskless_under(phi, path, s2);
    InvarianceReport r;
    for (std::size_t k = 0; k < pi1.size(); ++k)
        r.max_abs_diff = std::max(r.max_abs_diff, std::abs(pi1[k].value - pi2[k].value));
    r.exact = r.max_abs_diff <= 1e-12;
    return r;
}

InvarianceReport invariance_check(const AlmostSimpleStrategy& phi, const BidAskPath& path,
                                  const std::vector<double>& s1, const std::vector<double>& s2) {
    check_price_in_spread(path, s1, "s1");
    check_price_in_spread(path, s2, "s2");
    phi.validate(path.size());
    auto riskless = [&](const std::vector<double>& s) {
        BidAskPath priced = path;
        priced.price_system = s;
        const std::vector<double> integral = stochastic_integral(phi, s);
        const CostProcess cost = almost_simple_cost(phi, priced);
        std::vector<double> pi(path.size(), 0.0);
        for (std::size_t k = 0; k < path.size(); ++k)
            pi[k] = integral[k] - phi.value_at(k) * s[k] - cost.values[k].value;
        return pi;
    };
    const std::vector<double> pi1 = riskless(s1);
    const std::vector<double> pi2 = riskless(s2);
    InvarianceReport r;
    for (std::size_t k = 0; k < path.size(); ++k)
        r.max_abs_diff = std::max(r.max_abs_diff, std::abs(pi1[k] - pi2[k]));
    r.exact = r.max_abs_diff <= 1e-12;
    return r;
}

InvarianceReport invariance_refinement_sweep(const StrategyPath& phi, const BidAskPath& path,
                                             const std::vector<int>& factors) {
    InvarianceReport r;
    for (int f : factors) {
        BidAskPath fine = refine(path, f);
        fine.price_system.reset();
        StrategyPath fine_phi = refine_strategy(phi, f);
        const std::vector<double> s1 = dynkin_value_on_path(fine);
        const std::vector<double> s2 = midpoint_price(fine);
        InvarianceReport level = invariance_check(fine_phi, fine, s1, s2);
        r.per_level.push_back(level.max_abs_diff);
        r.max_abs_diff = std::max(r.max_abs_diff, level.max_abs_diff);
    }
    r.exact = r.max_abs_diff <= 1e-12;
    return r;
}

std::vector<double> dynkin_value_on_path(const BidAskPath& path) {
    const std::size_t last = path.size() - 1;
    std::vector<double> s(path.size(), 0.0);
    s[last] = path.bid[last];
    for (std::size_t k = last; k-- > 0;) {
        const double m = std::max(std::min(path.bid[k], path.ask[k]),
                                  std::min(std::max(path.bid[k], path.ask[k]), s[k + 1]));
        s[k] = m;
    }
    return s;
}

std::vector<double> midpoint_price(const BidAskPath& path) {
    std::vector<double> s(path.size(), 0.0);
    for (std::size_t k = 0; k < path.size(); ++k) s[k] = 0.5 * (path.bid[k] + path.ask[k]);
    return s;
}

// --- reflected-walk counterexample -------------------------------------------

CounterexamplePathLedger counterexample_single_path(const std::vector<int>& walk, double alpha) {
    if (walk.size() < 2 || walk.front() != 0)
        throw std::invalid_argument("counterexample: walk must start at 0");
    const std::size_t n = walk.size() - 1;
    const double root_n = std::sqrt(static_cast<double>(n));
    CounterexamplePathLedger ledger;

    // phi_k = 1{W_{k-1} = 0}: enter at each zero of the walk (zero spread,
    // free), earn the move alpha(|B_k| - |B_{k-1}|) = alpha |B_k|, and close
    // the position at the zero it was opened at: the exit is a left jump
    // priced at the left limit, again at zero spread. caglad_cost records the
    // alternative grid booking in which the exit pays the spread one sample
    // later.
    double gains = 0.0;
    double caglad = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (walk[k - 1] == 0) {
            ++ledger.visits;
            const double abs_bk = std::abs(static_cast<double>(walk[k])) / root_n;
            gains += alpha * abs_bk;                  // |B_{k-1}| = 0
            caglad += (1.0 + alpha) * abs_bk;         // sell at S_k - bid_k = (alpha+1)|B_k|
        }
    }
    const double terminal_position = (walk[n - 1] == 0) ? 1.0 : 0.0;
    const double terminal_s = alpha * std::abs(static_cast<double>(walk[n])) / root_n;
    ledger.pi_terminal = gains - terminal_position * terminal_s;
    ledger.caglad_cost = caglad;
    ledger.local_time = static_cast<double>(ledger.visits) / root_n;
    ledger.abs_b1 = std::abs(static_cast<double>(walk[n])) / root_n;
    return ledger;
}

CounterexampleReport local_time_counterexample(std::uint64_t steps, std::uint64_t paths,
                                               const std::vector<double>& alphas,
                                               std::uint64_t seed, int threads) {
    if (steps < 1 || paths < 1)
        throw std::invalid_argument("counterexample: steps and paths must be >= 1");
    for (double a : alphas)
        if (a < -1.0 || a > 1.0)
            throw std::invalid_argument("counterexample: alpha outside [-1, 1]");

    CounterexampleReport report;
    report.steps = steps;
    report.paths = paths;
    report.seed = seed;

    const std::size_t n_alpha = alphas.size();
    int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads < 1) n_threads = 1;

    struct Accumulator {
        std::vector<double> pi_sum, pi_sq_sum, caglad_sum;
        double local_time_sum = 0.0;
        double abs_b1_sum = 0.0;
    };
    std::vector<Accumulator> acc(static_cast<std::size_t>(n_threads));
    for (Accumulator& a : acc) {
        a.pi_sum.assign(n_alpha, 0.0);
        a.pi_sq_sum.assign(n_alpha, 0.0);
        a.caglad_sum.assign(n_alpha, 0.0);
    }

    auto worker = [&](int tid) {
        Accumulator& a = acc[static_cast<std::size_t>(tid)];
        const double root_n = std::sqrt(static_cast<double>(steps));
        for (std::uint64_t p = static_cast<std::uint64_t>(tid); p < paths;
             p += static_cast<std::uint64_t>(n_threads)) {
            CounterRng rng(seed, p);
            // Walk the path once; the per-alpha ledgers share the visit data.
            std::uint64_t visits = 0;
            double gains_unit = 0.0;  // sum over entries of |B_k|, the alpha = 1 gain
            int w_prev = 0;
            int w = 0;
            for (std::uint64_t k = 1; k <= steps; ++k) {
                w_prev = w;
                w += rng.coin(k) ? 1 : -1;
                if (w_prev == 0) {
                    ++visits;
                    gains_unit += std::abs(static_cast<double>(w)) / root_n;
                }
            }
            const double terminal_position = (w_prev == 0) ? 1.0 : 0.0;
            const double abs_b1 = std::abs(static_cast<double>(w)) / root_n;
            for (std::size_t ai = 0; ai < n_alpha; ++ai) {
                const double alpha = alphas[ai];
                const double pi = alpha * gains_unit - terminal_position * alpha * abs_b1;
                a.pi_sum[ai] += pi;
                a.pi_sq_sum[ai] += pi * pi;
                a.caglad_sum[ai] += (1.0 + alpha) * gains_unit;
            }
            a.local_time_sum += static_cast<double>(visits) / root_n;
            a.abs_b1_sum += abs_b1;
        }
    };
    if (n_threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker, t);
        for (std::thread& t : pool) t.join();
    }

    const double m = static_cast<double>(paths);
    for (std::size_t ai = 0; ai < n_alpha; ++ai) {
        CounterexampleAlphaStats stats;
        stats.alpha = alphas[ai];
        double sum = 0.0, sq = 0.0, caglad = 0.0;
        for (const Accumulator& a : acc) {
            sum += a.pi_sum[ai];
            sq += a.pi_sq_sum[ai];
            caglad += a.caglad_sum[ai];
        }
        stats.mean_pi = sum / m;
        const double var = std::max(0.0, sq / m - stats.mean_pi * stats.mean_pi);
        stats.stderr_pi = std::sqrt(var / m);
        stats.mean_caglad_cost = caglad / m;
        report.per_alpha.push_back(stats);
    }
    for (const Accumulator& a : acc) {
        report.mean_local_time += a.local_time_sum;
        report.mean_abs_b1 += a.abs_b1_sum;
    }
    report.mean_local_time /= m;
    report.mean_abs_b1 /= m;
    return report;
}

// --- UPBR tail statistics ------------------------------------------------------

TailTable upbr_tail_statistic(const std::vector<StrategyOutcomes>& family,
                              const std::vector<double>& thresholds) {
    TailTable table;
    table.thresholds = thresholds;
    table.sup_tail.assign(thresholds.size(), 0.0);
    for (std::size_t n = 0; n < family.size(); ++n) {
        const StrategyOutcomes& outcomes = family[n];
        if (outcomes.terminal.size() != outcomes.prob.size() ||
            outcomes.terminal.size() != outcomes.running_min.size())
            throw std::invalid_argument("upbr_tail_statistic: ragged outcomes");
        bool admissible = true;
        for (double rm : outcomes.running_min)
            if (rm < -1.0) admissible = false;
        if (!admissible) table.inadmissible.push_back(n);
        std::vector<double> row(thresholds.size(), 0.0);
        for (std::size_t i = 0; i < outcomes.terminal.size(); ++i)
            for (std::size_t mi = 0; mi < thresholds.size(); ++mi)
                if (outcomes.terminal[i] >= thresholds[mi]) row[mi] += outcomes.prob[i];
        for (std::size_t mi = 0; mi < thresholds.size(); ++mi)
            table.sup_tail[mi] = std::max(table.sup_tail[mi], row[mi]);
        table.tail.push_back(std::move(row));
    }
    return table;
}

// --- almost-simple approximation experiment -------------------------------------

StrategyPath excursion_almost_simple_composition(const StrategyPath& phi, const BidAskPath& path,
                                                 int level) {
    // Keep phi on the zero-spread regime (trades there are free) and replace
    // it inside each maximal positive run [p, q] by the 1/n tracker on the
    // index interval [p, q+1]; the closing trade at q+1 settles at zero spread.
    std::vector<double> composed = phi.values;
    const std::size_t last = path.size() - 1;
    std::size_t k = 0;
    while (k <= last) {
        if (path.spread(k) <= 0.0) {
            ++k;
            continue;
        }
        std::size_t q = k;
        while (q + 1 <= last && path.spread(q + 1) > 0.0) ++q;
        const std::size_t b = std::min(q + 1, last);
        if (b > k) {
            AlmostSimpleApproximation approx =
                approximate_by_almost_simple(phi, path, level, k, b);
            // Collapse to right-jump holdings: at-values at hits, tracked
            // values in between.
            std::size_t jump_index = 0;
            double tracked = 0.0;
            for (std::size_t j = k; j <= b; ++j) {
                while (jump_index < approx.strategy.jumps.size() &&
                       approx.strategy.jumps[jump_index].time < j)
                    tracked = approx.strategy.jumps[jump_index++].after;
                if (jump_index < approx.strategy.jumps.size() &&
                    approx.strategy.jumps[jump_index].time == j)
                    composed[j] = approx.strategy.jumps[jump_index].at;
                else
                    composed[j] = tracked;
            }
        }
        k = q + 1;
    }
    return make_strategy(std::move(composed));
}

ApproximationReport approximation_experiment(const StrategyPath& phi, const BidAskPath& path,
                                             const std::vector<int>& levels) {
    require_price_system(path);
    SpreadStructure structure = check_spread_assumption(path);
    if (!structure.assumption_ok)
        throw std::invalid_argument("approximation_experiment: spread assumption violated");

    LedgerProcess base = riskless_position(phi, path);
    ApproximationReport report;
    for (int n : levels) {
        StrategyPath approx = excursion_almost_simple_composition(phi, path, n);
        LedgerProcess ledger = riskless_position(approx, path);
        ApproximationLevelResult result;
        result.level = n;
        for (std::size_t k = 0; k < path.size(); ++k) {
            result.sup_value_error = std::max(
                result.sup_value_error, std::abs(ledger.wealth[k].value - base.wealth[k].value));
            result.sup_phi_error =
                std::max(result.sup_phi_error, std::abs(approx.values[k] - phi.values[k]));
        }
        report.levels.push_back(result);
    }
    report.ok = !report.levels.empty();
    for (const ApproximationLevelResult& r : report.levels)
        if (r.sup_phi_error > 1.0 / r.level + 1e-12) report.ok = false;
    if (report.levels.size() >= 2 &&
        report.levels.back().sup_value_error > report.levels.front().sup_value_error + 1e-12)
        report.ok = false;
    return report;
}

}  // namespace spreadlab
