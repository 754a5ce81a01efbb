// spreadlab: batch experiment runner for bid-ask market models.
//
// Subcommands generate synthetic paths and trees, solve the stopping game,
// evaluate pathwise transaction costs and self-financing ledgers, and run the
// reflected-walk and approximation experiments. Every report embeds the
// configuration and seed that produced it, holds no timestamps, and is
// therefore bit-reproducible from its own config.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "spreadlab/cost.hpp"
#include "spreadlab/dynkin.hpp"
#include "spreadlab/io.hpp"
#include "spreadlab/market.hpp"
#include "spreadlab/paths.hpp"
#include "spreadlab/portfolio.hpp"
#include "spreadlab/scenario.hpp"

using nlohmann::json;
using namespace spreadlab;

namespace {

struct GlobalOptions {
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_given = false;
    bool strict = false;
    double tolerance = 1e-12;
};

std::uint64_t resolve_seed(const GlobalOptions& global) {
    if (global.seed_given) return global.seed;
    if (global.strict)
        throw std::runtime_error("--strict requires an explicit --seed");
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
}

json provenance(const GlobalOptions& global, std::uint64_t seed) {
    json meta;
    meta["tool"] = kToolName;
    meta["version"] = kToolVersion;
    meta["seed"] = seed;
    meta["tolerance"] = global.tolerance;
    return meta;
}

void emit(const GlobalOptions& global, const std::string& name, const json& report) {
    std::filesystem::create_directories(global.out_dir);
    const std::string file = global.out_dir + "/" + name + ".json";
    write_text_file(file, report.dump(2) + "\n");
    std::printf("wrote %s\n", file.c_str());
}

BidAskPath load_path(const std::string& file, double zero_eps) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    return read_path_csv(in, zero_eps);
}

StrategyPath load_strategy(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file);
    return read_strategy_csv(in);
}

json stopping_time_json(const ScenarioTree& tree, const TreeStoppingTime& st) {
    json flags = json::array();
    for (int id = 0; id < tree.node_count(); ++id) {
        switch (st.flag[static_cast<std::size_t>(id)]) {
            case StopFlag::Stop: flags.push_back("stop"); break;
            case StopFlag::Infinite: flags.push_back("infinite"); break;
            default: flags.push_back("continue"); break;
        }
    }
    return flags;
}

json cost_json(const CostProcess& cost, const BidAskPath& path) {
    json rows = json::array();
    for (std::size_t k = 0; k < cost.values.size(); ++k) {
        json row;
        row["t"] = path.time_of(k);
        if (cost.values[k].infinite)
            row["value"] = "inf";
        else
            row["value"] = cost.values[k].value;
        row["left_jump"] = cost.left_jump[k];
        row["right_jump"] = cost.right_jump[k];
        rows.push_back(row);
    }
    json doc;
    doc["C"] = rows;
    doc["level_n_star"] = cost.level_n_star;
    return doc;
}

// --- generate ------------------------------------------------------------------

struct GenerateOptions {
    std::string kind = "random_walk";
    std::size_t steps = 64;
    double horizon = 1.0;
    double volatility = 0.2;
    double hurst = 0.5;
    double spread = 0.1;
    double alpha = 1.0;
    double mid0 = 0.5;
    bool no_clip = false;
    std::string pattern;
    int depth = 3;
    int max_branch = 3;
    double zero_spread_prob = 0.25;
};

int run_generate(const GlobalOptions& global, const GenerateOptions& opt) {
    const std::uint64_t seed = resolve_seed(global);
    GeneratorConfig config;
    config.steps = opt.steps;
    config.horizon = opt.horizon;
    config.seed = seed;
    config.volatility = opt.volatility;
    config.hurst = opt.hurst;
    config.spread_level = opt.spread;
    config.alpha = opt.alpha;
    config.mid0 = opt.mid0;
    config.clip_to_unit = !opt.no_clip;
    config.pattern = opt.pattern;
    config.tree_depth = opt.depth;
    config.tree_max_branch = opt.max_branch;
    config.tree_zero_spread_prob = opt.zero_spread_prob;

    json report;
    report["meta"] = provenance(global, seed);
    json cfg;
    cfg["kind"] = opt.kind;
    cfg["steps"] = opt.steps;
    cfg["horizon"] = opt.horizon;
    cfg["volatility"] = opt.volatility;
    cfg["hurst"] = opt.hurst;
    cfg["spread"] = opt.spread;
    cfg["alpha"] = opt.alpha;
    cfg["mid0"] = opt.mid0;
    cfg["pattern"] = opt.pattern;
    cfg["depth"] = opt.depth;
    report["config"] = cfg;

    std::filesystem::create_directories(global.out_dir);
    if (opt.kind == "tree_random") {
        config.kind = GeneratorKind::TreeRandom;
        const GeneratedScenario scenario = generate_tree(config);
        json doc = json::parse(tree_to_json(scenario.tree));
        doc["bid"] = scenario.bid;
        doc["ask"] = scenario.ask;
        const std::string file = global.out_dir + "/tree.json";
        write_text_file(file, doc.dump(2) + "\n");
        report["tree_file"] = file;
    } else {
        if (opt.kind == "random_walk") config.kind = GeneratorKind::RandomWalk;
        else if (opt.kind == "reflected_walk") config.kind = GeneratorKind::ReflectedWalk;
        else if (opt.kind == "fbm") config.kind = GeneratorKind::Fbm;
        else if (opt.kind == "spread_excursion") config.kind = GeneratorKind::SpreadExcursion;
        else throw std::runtime_error("unknown generator kind: " + opt.kind);
        const BidAskPath path = generate(config);
        const std::string file = global.out_dir + "/path.csv";
        std::ofstream out(file);
        write_path_csv(path, out);
        report["path_file"] = file;
        const ValidationReport validation = validate_model(path);
        report["valid"] = validation.valid;
        report["normalized"] = validation.normalized;
    }
    emit(global, "generate", report);
    return 0;
}

// --- dynkin --------------------------------------------------------------------

struct DynkinOptions {
    int trees = 20;
    int depth = 3;
    int max_branch = 3;
    bool oracle = false;
    std::string fixture;
};

// One-period reference market: bid 0.1 / ask 0.4 at the root, terminal bid
// values 0.2 and 0.8 with a fair coin. Game value at the root: 0.4.
GeneratedScenario depth_one_fixture() {
    GeneratedScenario scenario{ScenarioTree::build({2}, {{0.5, 0.5}}),
                               {0.1, 0.2, 0.8},
                               {0.4, 0.2, 0.8}};
    return scenario;
}

int run_dynkin(const GlobalOptions& global, const DynkinOptions& opt) {
    if (!opt.fixture.empty()) {
        if (opt.fixture != "depth1")
            throw std::runtime_error("unknown fixture: " + opt.fixture);
        const GeneratedScenario scenario = depth_one_fixture();
        const GameValue game = dynkin_value(scenario.tree, scenario.bid, scenario.ask);
        const DriftSignReport signs =
            drift_sign_check(scenario.tree, game, scenario.bid, scenario.ask);
        AdaptedProcess terminal{0.0, 0.2, 0.8};
        const BruteForceValue bf =
            brute_force_game_value(scenario.tree, scenario.bid, scenario.ask, terminal, 0);
        json report;
        report["meta"] = provenance(global, global.seed);
        report["config"] = {{"fixture", opt.fixture}};
        report["game"] = {{"value0", game.value0},
                          {"value_per_node", game.value},
                          {"drift", game.drift},
                          {"martingale", game.martingale},
                          {"tau_star", stopping_time_json(scenario.tree, game.tau_star[0])},
                          {"sigma_star", stopping_time_json(scenario.tree, game.sigma_star[0])},
                          {"mv_by_partition",
                           {{"full_grid", mean_variation(scenario.tree, game.value, {0, 1})}}}};
        report["checks"] = {{"sandwich", true},
                            {"drift_sign", signs.ok},
                            {"oracle_diff", std::abs(bf.maxmin - game.value0)}};
        const bool pass = signs.ok && std::abs(bf.maxmin - game.value0) <= global.tolerance &&
                          std::abs(bf.minmax - bf.maxmin) <= global.tolerance;
        report["pass"] = pass;
        emit(global, "dynkin", report);
        return pass ? 0 : 1;
    }

    const std::uint64_t seed = resolve_seed(global);
    if (opt.oracle && opt.depth > 4)
        throw std::runtime_error("--oracle needs depth <= 4 (enumeration cap)");

    int drift_sign_violations = 0;
    int sandwich_violations = 0;
    double max_oracle_diff = 0.0;
    double max_doob_gap = 0.0;
    json first_game;

    for (int i = 0; i < opt.trees; ++i) {
        GeneratorConfig config;
        config.kind = GeneratorKind::TreeRandom;
        config.tree_depth = opt.depth;
        config.tree_max_branch = opt.max_branch;
        config.seed = seed + static_cast<std::uint64_t>(i);
        const GeneratedScenario scenario = generate_tree(config);
        const ScenarioTree& tree = scenario.tree;
        const GameValue game = dynkin_value(tree, scenario.bid, scenario.ask);

        for (int id = 0; id < tree.node_count(); ++id) {
            const std::size_t v = static_cast<std::size_t>(id);
            if (game.value[v] < scenario.bid[v] || game.value[v] > scenario.ask[v])
                ++sandwich_violations;
            const double gap =
                std::abs(game.value[v] - (game.value0 + game.martingale[v] + game.drift[v]));
            max_doob_gap = std::max(max_doob_gap, gap);
        }
        const DriftSignReport signs = drift_sign_check(tree, game, scenario.bid, scenario.ask);
        drift_sign_violations += static_cast<int>(signs.violations.size());

        if (opt.oracle) {
            AdaptedProcess terminal(game.value.size(), 0.0);
            for (int v : tree.layer(tree.depth()))
                terminal[static_cast<std::size_t>(v)] = scenario.bid[static_cast<std::size_t>(v)];
            for (int id = 0; id < tree.node_count(); ++id) {
                const BruteForceValue bf =
                    brute_force_game_value(tree, scenario.bid, scenario.ask, terminal, id);
                max_oracle_diff = std::max(
                    max_oracle_diff,
                    std::abs(bf.maxmin - game.value[static_cast<std::size_t>(id)]));
                max_oracle_diff = std::max(max_oracle_diff, std::abs(bf.maxmin - bf.minmax));
            }
        }

        if (i == 0) {
            std::vector<int> full_grid;
            for (int t = 0; t <= tree.depth(); ++t) full_grid.push_back(t);
            first_game["value_per_node"] = game.value;
            first_game["drift"] = game.drift;
            first_game["martingale"] = game.martingale;
            first_game["tau_star"] = stopping_time_json(tree, game.tau_star[0]);
            first_game["sigma_star"] = stopping_time_json(tree, game.sigma_star[0]);
            first_game["mv_by_partition"] = json::object();
            first_game["mv_by_partition"]["full_grid"] =
                mean_variation(tree, game.value, full_grid);
        }
    }

    const bool pass = sandwich_violations == 0 && drift_sign_violations == 0 &&
                      max_oracle_diff <= global.tolerance && max_doob_gap <= global.tolerance;
    json report;
    report["meta"] = provenance(global, seed);
    report["config"] = {{"trees", opt.trees}, {"depth", opt.depth},
                        {"max_branch", opt.max_branch}, {"oracle", opt.oracle}};
    report["game"] = first_game;
    report["checks"] = {{"sandwich", sandwich_violations == 0},
                        {"drift_sign", drift_sign_violations == 0},
                        {"oracle_diff", max_oracle_diff},
                        {"doob_gap", max_doob_gap}};
    report["pass"] = pass;
    emit(global, "dynkin", report);
    return pass ? 0 : 1;
}

// --- cost ----------------------------------------------------------------------

struct CostOptions {
    std::string path_file;
    std::string strategy_file;
    std::string as_json_file;
    double zero_eps = 0.0;
};

int run_cost(const GlobalOptions& global, const CostOptions& opt) {
    const BidAskPath path = load_path(opt.path_file, opt.zero_eps);
    if (!path.price_system)
        throw std::runtime_error("cost: the path csv must carry an S column");
    json report;
    report["meta"] = provenance(global, global.seed);
    report["config"] = {{"path", opt.path_file},
                        {"strategy", opt.strategy_file},
                        {"as_json", opt.as_json_file},
                        {"zero_eps", opt.zero_eps}};
    if (!opt.as_json_file.empty()) {
        const AlmostSimpleStrategy phi =
            almost_simple_from_json(read_text_file(opt.as_json_file), path);
        report["cost"] = cost_json(almost_simple_cost(phi, path), path);
    } else {
        const StrategyPath phi = load_strategy(opt.strategy_file);
        if (phi.values.size() != path.size())
            throw std::runtime_error("cost: strategy and path grids differ");
        report["cost"] = cost_json(cost_process(phi, path), path);
    }
    emit(global, "cost", report);
    return 0;
}

// --- invariance ------------------------------------------------------------------

struct InvarianceOptions {
    std::string path_file;
    std::string strategy_file;
    std::vector<int> levels{1, 2, 4, 8};
    double zero_eps = 0.0;
};

int run_invariance(const GlobalOptions& global, const InvarianceOptions& opt) {
    BidAskPath path = load_path(opt.path_file, opt.zero_eps);
    path.price_system.reset();
    const StrategyPath phi = load_strategy(opt.strategy_file);
    if (phi.values.size() != path.size())
        throw std::runtime_error("invariance: strategy and path grids differ");

    const std::vector<double> s1 = dynkin_value_on_path(path);
    const std::vector<double> s2 = midpoint_price(path);
    const InvarianceReport base = invariance_check(phi, path, s1, s2);

    std::vector<int> sweep_levels;
    for (int f : opt.levels)
        if (f >= 2) sweep_levels.push_back(f);
    InvarianceReport sweep;
    if (!sweep_levels.empty()) sweep = invariance_refinement_sweep(phi, path, sweep_levels);

    json report;
    report["meta"] = provenance(global, global.seed);
    report["config"] = {{"path", opt.path_file}, {"strategy", opt.strategy_file},
                        {"levels", opt.levels}};
    report["invariance"] = {{"max_abs_diff", base.max_abs_diff},
                            {"per_level", sweep.per_level},
                            {"exact", base.exact}};
    const bool pass = base.max_abs_diff <= global.tolerance;
    report["pass"] = pass;
    emit(global, "invariance", report);
    return pass ? 0 : 1;
}

// --- counterexample ---------------------------------------------------------------

struct CounterexampleOptions {
    std::vector<double> alphas{1.0, -1.0};
    std::uint64_t steps = 10000;
    std::uint64_t paths = 10000;
    int threads = 0;
};

int run_counterexample(const GlobalOptions& global, const CounterexampleOptions& opt) {
    const std::uint64_t seed = resolve_seed(global);
    const CounterexampleReport result =
        local_time_counterexample(opt.steps, opt.paths, opt.alphas, seed, opt.threads);

    json per_alpha = json::array();
    for (const CounterexampleAlphaStats& stats : result.per_alpha)
        per_alpha.push_back({{"alpha", stats.alpha},
                             {"mean_Pi", stats.mean_pi},
                             {"stderr", stats.stderr_pi},
                             {"mean_localtime", result.mean_local_time},
                             {"mean_caglad_cost", stats.mean_caglad_cost}});
    json report;
    report["meta"] = provenance(global, seed);
    report["config"] = {{"alphas", opt.alphas}, {"steps", opt.steps}, {"paths", opt.paths}};
    report["per_alpha"] = per_alpha;
    report["estimators"] = {{"mean_abs_b1", result.mean_abs_b1},
                            {"mean_localtime", result.mean_local_time}};
    emit(global, "counterexample", report);

    // Plot-ready mirror of the per-alpha table.
    std::ostringstream csv;
    csv << "alpha,mean_Pi,stderr,mean_localtime,mean_caglad_cost\n";
    for (const CounterexampleAlphaStats& stats : result.per_alpha)
        csv << format_double(stats.alpha) << ',' << format_double(stats.mean_pi) << ','
            << format_double(stats.stderr_pi) << ',' << format_double(result.mean_local_time)
            << ',' << format_double(stats.mean_caglad_cost) << '\n';
    write_text_file(global.out_dir + "/counterexample.csv", csv.str());
    return 0;
}

// --- upbr ------------------------------------------------------------------------

struct UpbrOptions {
    int family = 6;
    int depth = 6;
    std::vector<double> thresholds{0.25, 0.5, 1.0, 2.0, 4.0};
};

// Deterministic upward-drifting quotes plus a fair coin-flip noise: the game
// value inherits the positive drift, the harvest family holds throughout, and
// the terminal liquidation values scale with the position size.
int run_upbr(const GlobalOptions& global, const UpbrOptions& opt) {
    const std::uint64_t seed = resolve_seed(global);
    const ScenarioTree tree =
        ScenarioTree::build_uniform(std::vector<int>(static_cast<std::size_t>(opt.depth), 2));
    AdaptedProcess bid(static_cast<std::size_t>(tree.node_count()), 0.0);
    AdaptedProcess ask = bid;
    for (int id = 0; id < tree.node_count(); ++id) {
        const TreeNode& node = tree.node(id);
        const std::size_t i = static_cast<std::size_t>(id);
        double level = 0.05 + 0.1 * node.time;
        // fair +-0.01 noise accumulated along the path
        int up_moves = 0, steps = 0;
        for (int v = id; tree.node(v).parent != -1; v = tree.node(v).parent) {
            const TreeNode& parent = tree.node(tree.node(v).parent);
            if (parent.children[1] == v) ++up_moves;
            ++steps;
        }
        level += 0.01 * (2.0 * up_moves - steps);
        bid[i] = level;
        ask[i] = level;
    }
    const GameValue game = dynkin_value(tree, bid, ask);

    std::vector<StrategyOutcomes> family;
    for (int n = 1; n <= opt.family; ++n) {
        const double scale = static_cast<double>(n);
        const HarvestStrategy h = drift_harvest_strategy(tree, game, bid, ask, scale);
        StrategyOutcomes outcomes;
        for (int leaf : tree.layer(tree.depth())) {
            outcomes.terminal.push_back(h.liquidation[static_cast<std::size_t>(leaf)]);
            double running_min = 0.0;
            for (int v = leaf; v != -1; v = tree.node(v).parent)
                running_min = std::min(running_min, h.liquidation[static_cast<std::size_t>(v)]);
            outcomes.running_min.push_back(running_min);
            outcomes.prob.push_back(tree.reach_probability(leaf));
        }
        family.push_back(std::move(outcomes));
    }
    const TailTable table = upbr_tail_statistic(family, opt.thresholds);

    // On this fixture the terminal value scales with the position size, so
    // the per-strategy tails themselves are nondecreasing across the family
    // at every threshold.
    bool nondecreasing = true;
    for (std::size_t mi = 0; mi < table.thresholds.size(); ++mi)
        for (std::size_t n = 1; n < table.tail.size(); ++n)
            if (table.tail[n][mi] < table.tail[n - 1][mi] - 1e-15) nondecreasing = false;
    const bool reaches = !table.sup_tail.empty() && table.sup_tail.front() > 0.0;
    const bool pass = table.inadmissible.empty() && nondecreasing && reaches;

    json report;
    report["meta"] = provenance(global, seed);
    report["config"] = {{"family", opt.family}, {"depth", opt.depth},
                        {"thresholds", opt.thresholds}};
    report["upbr"] = {{"tail_table", table.tail},
                      {"sup_tail", table.sup_tail},
                      {"thresholds", table.thresholds},
                      {"inadmissible", table.inadmissible}};
    report["pass"] = pass;
    emit(global, "upbr", report);

    std::ostringstream csv;
    csv << "threshold";
    for (std::size_t n = 0; n < table.tail.size(); ++n) csv << ",strategy_" << (n + 1);
    csv << ",sup\n";
    for (std::size_t mi = 0; mi < table.thresholds.size(); ++mi) {
        csv << format_double(table.thresholds[mi]);
        for (std::size_t n = 0; n < table.tail.size(); ++n)
            csv << ',' << format_double(table.tail[n][mi]);
        csv << ',' << format_double(table.sup_tail[mi]) << '\n';
    }
    write_text_file(global.out_dir + "/upbr.csv", csv.str());
    return pass ? 0 : 1;
}

// --- approx ------------------------------------------------------------------------

struct ApproxOptions {
    std::string path_file;
    std::string strategy_file;
    std::vector<int> levels{2, 4, 8, 16};
    double zero_eps = 0.0;
};

int run_approx(const GlobalOptions& global, const ApproxOptions& opt) {
    const BidAskPath path = load_path(opt.path_file, opt.zero_eps);
    if (!path.price_system)
        throw std::runtime_error("approx: the path csv must carry an S column");
    const StrategyPath phi = load_strategy(opt.strategy_file);
    if (phi.values.size() != path.size())
        throw std::runtime_error("approx: strategy and path grids differ");
    const ApproximationReport result = approximation_experiment(phi, path, opt.levels);

    json levels = json::array();
    for (const ApproximationLevelResult& level : result.levels)
        levels.push_back({{"level", level.level},
                          {"sup_value_error", level.sup_value_error},
                          {"sup_phi_error", level.sup_phi_error}});
    json report;
    report["meta"] = provenance(global, global.seed);
    report["config"] = {{"path", opt.path_file}, {"strategy", opt.strategy_file},
                        {"levels", opt.levels}};
    report["approx"] = levels;
    report["pass"] = result.ok;
    emit(global, "approx", report);
    return result.ok ? 0 : 1;
}

// --- check -------------------------------------------------------------------------

struct CheckOptions {
    std::string path_file;
    std::string strategy_file;
    double zero_eps = 0.0;
};

int run_check(const GlobalOptions& global, const CheckOptions& opt) {
    const BidAskPath path = load_path(opt.path_file, opt.zero_eps);
    json failures = json::array();

    const ValidationReport validation = validate_model(path);
    if (!validation.valid) failures.push_back("model validation");
    const SpreadStructure structure = check_spread_assumption(path);

    json report;
    report["meta"] = provenance(global, global.seed);
    report["config"] = {{"path", opt.path_file}, {"strategy", opt.strategy_file},
                        {"zero_eps", opt.zero_eps}};
    report["model"] = {{"valid", validation.valid},
                       {"normalized", validation.normalized},
                       {"assumption_ok", structure.assumption_ok},
                       {"chatter", structure.chatter_flagged},
                       {"zeros", structure.zero_set.size()},
                       {"excursions", structure.excursions.size()},
                       {"level_n_star", structure.certified_level}};

    if (!opt.strategy_file.empty() && validation.valid) {
        BidAskPath priced = path;
        if (!priced.price_system) priced.price_system = midpoint_price(path);
        const StrategyPath phi = load_strategy(opt.strategy_file);
        if (phi.values.size() != path.size())
            throw std::runtime_error("check: strategy and path grids differ");
        const CostProcess cost = cost_process(phi, priced);
        bool monotone = true;
        for (std::size_t k = 1; k < cost.values.size(); ++k)
            if (cost.values[k].value < cost.values[k - 1].value - global.tolerance)
                monotone = false;
        double sup_spread = 0.0;
        for (std::size_t k = 0; k + 1 < path.size(); ++k)
            sup_spread = std::max(sup_spread, path.spread(k));
        const bool bounded =
            cost.total() <=
            sup_spread * variation(phi, 0, path.size() - 1) + global.tolerance;
        report["strategy_checks"] = {{"cost_total", cost.total()},
                                     {"cost_monotone", monotone},
                                     {"variation_bound", bounded}};
        if (phi.values.front() == 0.0) {
            BidAskPath unpriced = path;
            unpriced.price_system.reset();
            const InvarianceReport invariance = invariance_check(
                phi, unpriced, dynkin_value_on_path(unpriced), midpoint_price(unpriced));
            report["strategy_checks"]["invariance_exact"] = invariance.exact;
            if (!invariance.exact) failures.push_back("invariance");
        } else {
            report["strategy_checks"]["invariance_skipped"] = "nonzero initial position";
        }
        if (!monotone) failures.push_back("cost monotone");
        if (!bounded) failures.push_back("variation bound");
    }

    report["failures"] = failures;
    report["pass"] = failures.empty();
    emit(global, "check", report);
    return failures.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spreadlab: numerical laboratory for bid-ask markets with proportional costs"};
    app.set_config("--config")->configurable(false);
    app.allow_config_extras(CLI::config_extras_mode::error);

    GlobalOptions global;
    app.add_option("--out", global.out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", global.seed, "seed for all randomness")
        ->each([&global](const std::string&) { global.seed_given = true; });
    app.add_flag("--strict", global.strict, "require an explicit --seed");
    app.add_option("--tolerance", global.tolerance, "pass/fail tolerance")
        ->capture_default_str();

    GenerateOptions generate_opt;
    CLI::App* generate_cmd = app.add_subcommand("generate", "emit a synthetic path or tree");
    generate_cmd->add_option("--kind", generate_opt.kind,
                             "random_walk|reflected_walk|fbm|spread_excursion|tree_random")
        ->capture_default_str();
    generate_cmd->add_option("--steps", generate_opt.steps)->capture_default_str();
    generate_cmd->add_option("--horizon", generate_opt.horizon)->capture_default_str();
    generate_cmd->add_option("--vol", generate_opt.volatility)->capture_default_str();
    generate_cmd->add_option("--hurst", generate_opt.hurst)->capture_default_str();
    generate_cmd->add_option("--spread", generate_opt.spread)->capture_default_str();
    generate_cmd->add_option("--alpha", generate_opt.alpha)->capture_default_str();
    generate_cmd->add_option("--mid0", generate_opt.mid0)->capture_default_str();
    generate_cmd->add_flag("--no-clip", generate_opt.no_clip);
    generate_cmd->add_option("--pattern", generate_opt.pattern,
                             "spread_excursion pattern over {0,+}, steps+1 symbols");
    generate_cmd->add_option("--depth", generate_opt.depth)->capture_default_str();
    generate_cmd->add_option("--max-branch", generate_opt.max_branch)->capture_default_str();
    generate_cmd->add_option("--zero-spread-prob", generate_opt.zero_spread_prob)
        ->capture_default_str();

    DynkinOptions dynkin_opt;
    CLI::App* dynkin_cmd = app.add_subcommand("dynkin", "stopping-game reports on random trees");
    dynkin_cmd->add_option("--trees", dynkin_opt.trees)->capture_default_str();
    dynkin_cmd->add_option("--depth", dynkin_opt.depth)->capture_default_str();
    dynkin_cmd->add_option("--max-branch", dynkin_opt.max_branch)->capture_default_str();
    dynkin_cmd->add_flag("--oracle", dynkin_opt.oracle, "run the brute-force oracle");
    dynkin_cmd->add_option("--fixture", dynkin_opt.fixture, "named fixture (depth1)");

    CostOptions cost_opt;
    CLI::App* cost_cmd = app.add_subcommand("cost", "cost process of a strategy on a path");
    cost_cmd->add_option("--path", cost_opt.path_file)->required();
    cost_cmd->add_option("--strategy", cost_opt.strategy_file, "strategy csv (t,phi)");
    cost_cmd->add_option("--as-json", cost_opt.as_json_file, "almost simple strategy json");
    cost_cmd->add_option("--zero-eps", cost_opt.zero_eps, "snap spreads <= eps to zero")
        ->capture_default_str();

    InvarianceOptions invariance_opt;
    CLI::App* invariance_cmd =
        app.add_subcommand("invariance", "risk-less position under two price systems");
    invariance_cmd->add_option("--path", invariance_opt.path_file)->required();
    invariance_cmd->add_option("--strategy", invariance_opt.strategy_file)->required();
    invariance_cmd->add_option("--levels", invariance_opt.levels, "refinement factors")
        ->delimiter(',')
        ->capture_default_str();
    invariance_cmd->add_option("--zero-eps", invariance_opt.zero_eps)->capture_default_str();

    CounterexampleOptions counter_opt;
    CLI::App* counter_cmd =
        app.add_subcommand("counterexample", "reflected-walk local-time ensemble");
    counter_cmd->add_option("--alphas", counter_opt.alphas)->delimiter(',')->capture_default_str();
    counter_cmd->add_option("--steps", counter_opt.steps)->capture_default_str();
    counter_cmd->add_option("--paths", counter_opt.paths)->capture_default_str();
    counter_cmd->add_option("--threads", counter_opt.threads)->capture_default_str();

    UpbrOptions upbr_opt;
    CLI::App* upbr_cmd = app.add_subcommand("upbr", "drift-harvest tail statistics");
    upbr_cmd->add_option("--family", upbr_opt.family, "number of strategies")
        ->capture_default_str();
    upbr_cmd->add_option("--depth", upbr_opt.depth)->capture_default_str();
    upbr_cmd->add_option("--thresholds", upbr_opt.thresholds)
        ->delimiter(',')
        ->capture_default_str();

    ApproxOptions approx_opt;
    CLI::App* approx_cmd =
        app.add_subcommand("approx", "almost-simple approximation level sweep");
    approx_cmd->add_option("--path", approx_opt.path_file)->required();
    approx_cmd->add_option("--strategy", approx_opt.strategy_file)->required();
    approx_cmd->add_option("--levels", approx_opt.levels)->delimiter(',')->capture_default_str();
    approx_cmd->add_option("--zero-eps", approx_opt.zero_eps)->capture_default_str();

    CheckOptions check_opt;
    CLI::App* check_cmd = app.add_subcommand("check", "run the invariant suite on inputs");
    check_cmd->add_option("--path", check_opt.path_file)->required();
    check_cmd->add_option("--strategy", check_opt.strategy_file);
    check_cmd->add_option("--zero-eps", check_opt.zero_eps)->capture_default_str();

    app.require_subcommand(1);
    CLI11_PARSE(app, argc, argv);

    try {
        if (generate_cmd->parsed()) return run_generate(global, generate_opt);
        if (dynkin_cmd->parsed()) return run_dynkin(global, dynkin_opt);
        if (cost_cmd->parsed()) return run_cost(global, cost_opt);
        if (invariance_cmd->parsed()) return run_invariance(global, invariance_opt);
        if (counter_cmd->parsed()) return run_counterexample(global, counter_opt);
        if (upbr_cmd->parsed()) return run_upbr(global, upbr_opt);
        if (approx_cmd->parsed()) return run_approx(global, approx_opt);
        if (check_cmd->parsed()) return run_check(global, check_opt);
    } catch (const std::exception& e) {
        json error;
        error["error"] = e.what();
        std::fprintf(stderr, "%s\n", error.dump().c_str());
        return 2;
    }
    return 0;
}
