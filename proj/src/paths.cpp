#include "spreadlab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace spreadlab {

namespace {

inline std::uint64_t splitmix_round(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

inline double clamp_unit(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
    const std::uint64_t key = splitmix_round(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_ + 1)));
    return splitmix_round(key ^ (counter + 0x9e3779b97f4a7c15ULL));
}

double CounterRng::uniform(std::uint64_t counter) const {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
}

double CounterRng::gaussian(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

bool CounterRng::coin(std::uint64_t counter) const { return (bits(counter) >> 63) != 0; }

namespace {

// In-place iterative radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wn(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wn;
            }
        }
    }
    if (inverse)
        for (std::complex<double>& x : a) x /= static_cast<double>(n);
}

double fgn_autocovariance(std::size_t k, double hurst) {
    const double h2 = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    return 0.5 * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                  std::pow(std::abs(kk - 1.0), h2));
}

std::vector<double> fgn_cholesky(std::size_t n, double hurst, CounterRng& rng) {
    // O(n^3) fallback; fine for the moderate sizes it is used at.
    std::vector<double> gamma(n);
    for (std::size_t k = 0; k < n; ++k) gamma[k] = fgn_autocovariance(k, hurst);
    std::vector<std::vector<double>> chol(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double acc = gamma[i - j];
            for (std::size_t k = 0; k < j; ++k) acc -= chol[i][k] * chol[j][k];
            if (i == j) {
                if (acc <= 0.0) throw std::runtime_error("fgn: covariance not positive definite");
                chol[i][j] = std::sqrt(acc);
            } else {
                chol[i][j] = acc / chol[j][j];
            }
        }
    }
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = rng.next_gaussian();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) out[i] += chol[i][j] * g[j];
    return out;
}

}  // namespace

std::vector<double> fractional_gaussian_noise(std::size_t n, double hurst, CounterRng& rng) {
    if (n == 0) return {};
    if (!(hurst > 0.0 && hurst < 1.0))
        throw std::invalid_argument("fgn: hurst must lie in (0, 1)");
    std::size_t m = 1;
    while (m < n) m <<= 1;
    const std::size_t size = 2 * m;

    // Circulant embedding of the autocovariance; eigenvalues via FFT.
    std::vector<std::complex<double>> eig(size);
    for (std::size_t k = 0; k <= m; ++k) eig[k] = fgn_autocovariance(k, hurst);
    for (std::size_t k = m + 1; k < size; ++k) eig[k] = eig[size - k];
    fft(eig, false);

    double min_eig = 0.0;
    for (const std::complex<double>& e : eig) min_eig = std::min(min_eig, e.real());
    if (min_eig < -1e-8) return fgn_cholesky(n, hurst, rng);

    std::vector<std::complex<double>> v(size);
    v[0] = std::sqrt(std::max(0.0, eig[0].real())) * rng.next_gaussian();
    v[m] = std::sqrt(std::max(0.0, eig[m].real())) * rng.next_gaussian();
    for (std::size_t j = 1; j < m; ++j) {
        const double lambda = std::max(0.0, eig[j].real());
        const double scale = std::sqrt(lambda / 2.0);
        const double a = rng.next_gaussian();
        const double b = rng.next_gaussian();
        v[j] = std::complex<double>(scale * a, scale * b);
        v[size - j] = std::conj(v[j]);
    }
    fft(v, false);
    std::vector<double> out(n);
    const double norm = 1.0 / std::sqrt(static_cast<double>(size));
    for (std::size_t k = 0; k < n; ++k) out[k] = v[k].real() * norm;
    return out;
}

std::vector<int> simple_walk(std::size_t steps, std::uint64_t seed, std::uint64_t path_index) {
    CounterRng rng(seed, path_index);
    std::vector<int> w(steps + 1, 0);
    for (std::size_t k = 1; k <= steps; ++k) w[k] = w[k - 1] + (rng.coin(k) ? 1 : -1);
    return w;
}

namespace {

BidAskPath from_mid(const std::vector<double>& mid, double half_spread, double horizon,
                    bool clip) {
    BidAskPath path;
    path.horizon = horizon;
    path.bid.resize(mid.size());
    path.ask.resize(mid.size());
    std::vector<double> s(mid.size());
    for (std::size_t k = 0; k < mid.size(); ++k) {
        double lo = mid[k] - half_spread;
        double hi = mid[k] + half_spread;
        double m = mid[k];
        if (clip) {
            lo = clamp_unit(lo);
            hi = clamp_unit(hi);
            m = clamp_unit(m);
        }
        path.bid[k] = lo;
        path.ask[k] = hi;
        s[k] = m;
    }
    path.price_system = std::move(s);
    return path;
}

}  // namespace

BidAskPath generate(const GeneratorConfig& config) {
    if (config.steps < 1) throw std::invalid_argument("generate: steps must be >= 1");
    const std::size_t n = config.steps;
    CounterRng rng(config.seed, 0);

    switch (config.kind) {
        case GeneratorKind::RandomWalk: {
            const double step_sd = config.volatility * std::sqrt(config.horizon / static_cast<double>(n));
            std::vector<double> mid(n + 1, config.mid0);
            for (std::size_t k = 1; k <= n; ++k) mid[k] = mid[k - 1] + step_sd * rng.next_gaussian();
            return from_mid(mid, config.spread_level / 2.0, config.horizon, config.clip_to_unit);
        }
        case GeneratorKind::ReflectedWalk: {
            const std::vector<int> w = simple_walk(n, config.seed, 0);
            const double scale = std::sqrt(config.horizon / static_cast<double>(n));
            BidAskPath path;
            path.horizon = config.horizon;
            path.bid.resize(n + 1);
            path.ask.resize(n + 1);
            std::vector<double> s(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                const double abs_b = std::abs(static_cast<double>(w[k])) * scale;
                path.bid[k] = -abs_b;
                path.ask[k] = abs_b;
                s[k] = config.alpha * abs_b;
            }
            path.price_system = std::move(s);
            return path;
        }
        case GeneratorKind::Fbm: {
            std::vector<double> noise = fractional_gaussian_noise(n, config.hurst, rng);
            const double scale =
                config.volatility *
                std::pow(config.horizon / static_cast<double>(n), config.hurst);
            std::vector<double> mid(n + 1, config.mid0);
            for (std::size_t k = 1; k <= n; ++k) mid[k] = mid[k - 1] + scale * noise[k - 1];
            return from_mid(mid, config.spread_level / 2.0, config.horizon, config.clip_to_unit);
        }
        case GeneratorKind::SpreadExcursion: {
            if (config.pattern.size() != n + 1)
                throw std::invalid_argument("generate: pattern needs steps+1 symbols of {0,+}");
            BidAskPath path;
            path.horizon = config.horizon;
            path.bid.resize(n + 1);
            path.ask.resize(n + 1);
            std::vector<double> s(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                const char c = config.pattern[k];
                if (c != '0' && c != '+')
                    throw std::invalid_argument("generate: pattern symbols must be 0 or +");
                const double half = (c == '+') ? config.spread_level / 2.0 : 0.0;
                path.bid[k] = config.mid0 - half;
                path.ask[k] = config.mid0 + half;
                s[k] = config.mid0;
            }
            path.price_system = std::move(s);
            return path;
        }
        case GeneratorKind::TreeRandom:
            throw std::invalid_argument("generate: tree_random produces a tree, use generate_tree");
    }
    throw std::invalid_argument("generate: unknown kind");
}

GeneratedScenario generate_tree(const GeneratorConfig& config) {
    if (config.tree_depth < 1) throw std::invalid_argument("generate_tree: depth must be >= 1");
    if (config.tree_max_branch < 2)
        throw std::invalid_argument("generate_tree: max branch must be >= 2");
    CounterRng rng(config.seed, 1);

    std::vector<int> branching(static_cast<std::size_t>(config.tree_depth));
    for (int t = 0; t < config.tree_depth; ++t)
        branching[static_cast<std::size_t>(t)] =
            2 + static_cast<int>(rng.next_bits() % static_cast<std::uint64_t>(
                                                       config.tree_max_branch - 1));

    std::vector<std::vector<double>> probs;
    std::size_t layer_width = 1;
    for (int t = 0; t < config.tree_depth; ++t) {
        const int b = branching[static_cast<std::size_t>(t)];
        for (std::size_t i = 0; i < layer_width; ++i) {
            std::vector<double> p(static_cast<std::size_t>(b));
            double sum = 0.0;
            for (double& q : p) {
                q = 0.2 + 0.8 * rng.next_uniform();
                sum += q;
            }
            double acc = 0.0;
            for (std::size_t c = 0; c + 1 < p.size(); ++c) {
                p[c] /= sum;
                acc += p[c];
            }
            p.back() = 1.0 - acc;  // exact normalization
            probs.push_back(std::move(p));
        }
        layer_width *= static_cast<std::size_t>(b);
    }

    GeneratedScenario scenario{ScenarioTree::build(branching, probs), {}, {}};
    const int count = scenario.tree.node_count();
    std::vector<double> mid(static_cast<std::size_t>(count), 0.5);
    scenario.bid.assign(static_cast<std::size_t>(count), 0.0);
    scenario.ask.assign(static_cast<std::size_t>(count), 0.0);
    for (int id = 0; id < count; ++id) {
        const TreeNode& node = scenario.tree.node(id);
        const std::size_t i = static_cast<std::size_t>(id);
        if (node.parent >= 0) {
            const double drift = 0.3 * (rng.next_uniform() - 0.5);
            mid[i] = std::min(0.95, std::max(0.05, mid[static_cast<std::size_t>(node.parent)] + drift));
        }
        double half = 0.0;
        if (rng.next_uniform() >= config.tree_zero_spread_prob)
            half = rng.next_uniform() * 0.8 * std::min(mid[i], 1.0 - mid[i]);
        scenario.bid[i] = mid[i] - half;
        scenario.ask[i] = mid[i] + half;
    }
    return scenario;
}

BidAskPath refine(const BidAskPath& path, int factor) {
    if (factor < 2) throw std::invalid_argument("refine: factor must be >= 2");
    const std::size_t n = path.steps();
    const std::size_t fine_n = n * static_cast<std::size_t>(factor);
    BidAskPath out;
    out.horizon = path.horizon;
    out.bid.resize(fine_n + 1);
    out.ask.resize(fine_n + 1);
    std::vector<double> s;
    if (path.price_system) s.resize(fine_n + 1);
    for (std::size_t j = 0; j <= fine_n; ++j) {
        const std::size_t k = std::min(n, j / static_cast<std::size_t>(factor));
        out.bid[j] = path.bid[k];
        out.ask[j] = path.ask[k];
        if (path.price_system) s[j] = (*path.price_system)[k];
    }
    if (path.price_system) out.price_system = std::move(s);
    return out;
}

StrategyPath refine_strategy(const StrategyPath& phi, int factor) {
    if (factor < 2) throw std::invalid_argument("refine_strategy: factor must be >= 2");
    const std::size_t n = phi.values.size() - 1;
    const std::size_t fine_n = n * static_cast<std::size_t>(factor);
    std::vector<double> values(fine_n + 1);
    for (std::size_t j = 0; j <= fine_n; ++j) {
        // Holdings live on left-open cells, so the fine cell (j-1, j] belongs
        // to the coarse cell whose right endpoint is ceil(j / factor).
        const std::size_t k = (j + static_cast<std::size_t>(factor) - 1) /
                              static_cast<std::size_t>(factor);
        values[j] = phi.values[std::min(k, n)];
    }
    return make_strategy(std::move(values));
}

}  // namespace spreadlab
