#include "cli.hpp"

#include "rxva/config.hpp"
#include "rxva/generators.hpp"
#include "rxva/io.hpp"
#include "rxva/market.hpp"
#include "rxva/parallel.hpp"
#include "rxva/regime.hpp"
#include "rxva/regime_estimation.hpp"
#include "rxva/xva.hpp"

#include "CLI11.hpp"
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace rxva::cli {

namespace {

using nlohmann::json;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config_path;
    std::optional<std::string> out_dir;
    std::vector<std::string> overrides;
    std::optional<unsigned> threads;
};

struct EstimateOptions {
    std::optional<std::string> input;
    std::string rule = "single";
    double lower = 48.0;
    double upper = 80.0;
    bool percent = false;
    std::string initial = "normal";
};

struct SimulateOptions {
    std::size_t paths = 10;
    std::optional<double> horizon;
    bool with_stock = false;
};

struct SweepOptions {
    std::optional<std::string> axis;
    std::vector<double> grid;
    std::vector<std::string> modes;
    bool gnuplot = false;
};

class Context {
public:
    Context(const GlobalOptions& g, std::ostream& out, std::ostream& err) : out_(out), err_(err) {
        config_ = resolve_config(g.config_path, g.overrides);
        if (g.seed) config_.solver.seed = *g.seed;
        if (g.threads) config_.solver.threads = *g.threads;
        set_default_threads(config_.solver.threads);
        if (g.out_dir)
            out_dir_ = *g.out_dir;
        else if (!config_.io.output_dir.empty())
            out_dir_ = config_.io.output_dir;
        else if (const char* env = std::getenv(kOutputDirEnv); env && *env)
            out_dir_ = env;
        else
            out_dir_ = ".";
    }

    RunConfig& config() { return config_; }
    std::ostream& out() { return out_; }
    std::ostream& err() { return err_; }

    std::string path(const std::string& name) const {
        return (std::filesystem::path(out_dir_) / name).string();
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& writer) {
        const std::string p = path(name);
        write_file_atomic(p, writer);
        out_ << "wrote " << p << '\n';
    }

    void write_json(const std::string& name, const json& doc) {
        write(name, [&](std::ostream& o) { o << doc.dump(2) << '\n'; });
    }

    // Saved before any work so the run can be reproduced from it.
    void echo_config() {
        config_.validate();
        write_json("effective_config.json", to_json(config_));
        out_ << "seed " << config_.solver.seed << '\n';
    }

private:
    RunConfig config_;
    std::string out_dir_;
    std::ostream& out_;
    std::ostream& err_;
};

std::string fmt_opt(const std::optional<double>& v, int digits) {
    return v ? fmt::format("{:.{}f}", *v, digits) : std::string("n/a");
}

int cmd_estimate(Context& ctx, const EstimateOptions& o) {
    ctx.echo_config();
    const std::string input = o.input ? *o.input : ctx.config().io.input;
    if (input.empty()) throw std::invalid_argument("estimate-regimes: no input CSV (use --input)");

    ThresholdRule rule;
    if (o.rule == "single")
        rule = ThresholdRule::single(o.lower);
    else if (o.rule == "hysteresis")
        rule = ThresholdRule::hysteresis(o.lower, o.upper);
    else
        throw std::invalid_argument("estimate-regimes: --rule must be single or hysteresis");
    if (o.initial == "normal")
        rule.initial = InitialLabel::kNormal;
    else if (o.initial == "crisis")
        rule.initial = InitialLabel::kCrisis;
    else if (o.initial == "first")
        rule.initial = InitialLabel::kFromFirstObservation;
    else
        throw std::invalid_argument("estimate-regimes: --initial must be normal, crisis or first");

    const StressSeries series =
        load_series_file(input, o.percent ? ValueUnit::kPercent : ValueUnit::kBasisPoints);
    if (series.was_unsorted) ctx.err() << "warning: input rows were not in date order; sorted\n";
    if (series.dropped_missing > 0)
        ctx.err() << "warning: dropped " << series.dropped_missing << " rows with missing values\n";

    const RegimeSegments segments = segment(series, rule);
    const EstimationResult est = estimate_means(segments);
    ctx.write("segments.csv", [&](std::ostream& s) { write_segments_csv(s, segments); });
    ctx.write("estimates.csv", [&](std::ostream& s) { write_estimates_csv(s, est); });
    ctx.out() << fmt::format("normal segments {}  mean {} days  ({} years)\n", est.count_normal,
                             fmt_opt(est.mean_normal_days, 1), fmt_opt(est.mean_normal_years, 2))
              << fmt::format("crisis segments {}  mean {} days  ({} years)\n", est.count_crisis,
                             fmt_opt(est.mean_crisis_days, 1), fmt_opt(est.mean_crisis_years, 2));
    return kExitOk;
}

int cmd_simulate_regime(Context& ctx, const SimulateOptions& o) {
    ctx.echo_config();
    const RunConfig& c = ctx.config();
    const RegimeSpec regime = c.regime.spec();
    const double horizon = o.horizon.value_or(c.claim.maturity);
    if (!(horizon > 0.0)) throw std::invalid_argument("simulate-regime: horizon must be positive");
    if (o.paths < 1) throw std::invalid_argument("simulate-regime: --paths must be >= 1");

    std::vector<RegimePath> paths;
    paths.reserve(o.paths);
    for (std::size_t p = 0; p < o.paths; ++p)
        paths.push_back(simulate_regime_path(regime.params, horizon, c.solver.seed, p));
    ctx.write("regime_paths.csv", [&](std::ostream& s) { write_regime_paths_csv(s, paths); });

    if (o.with_stock) {
        SimulationOptions sim;
        sim.n_steps = c.solver.n_steps;
        sim.n_paths = o.paths;
        sim.seed = c.solver.seed;
        sim.threads = c.solver.threads;
        ClaimSpec claim = c.claim;
        claim.maturity = horizon;
        const PathBundle bundle = simulate_paths_q(c.market, claim, RegimeSpec{RegimeMode::kDynamic, regime.params}, sim);
        ctx.write("paths.csv", [&](std::ostream& s) { write_paths_csv(s, bundle, o.paths); });
    }
    std::size_t jumps = 0;
    for (const auto& p : paths) jumps += p.jump_times.size();
    ctx.out() << fmt::format("{} paths over {} years, {} regime switches\n", o.paths, horizon, jumps);
    return kExitOk;
}

int cmd_check(Context& ctx) {
    ctx.echo_config();
    const RunConfig& c = ctx.config();
    const CheckReport report = check_assumptions(c.market, c.claim.maturity);
    const LipschitzConstant k = lipschitz_constant(c.market);
    for (const auto& i : report.items)
        ctx.out() << fmt::format("{:<6} {:<4} {:<11} {:<58} lhs={:.6g} rhs={:.6g}\n", i.id,
                                 i.passed ? "ok" : "FAIL", i.necessary ? "necessary" : "sufficient",
                                 i.description, i.lhs, i.rhs);
    ctx.out() << fmt::format("K = {:.6g}\n", k.k);
    json doc = checks_to_json(report);
    doc["lipschitz_k"] = k.k;
    doc["maturity"] = c.claim.maturity;
    ctx.write_json("checks.json", doc);
    if (!report.necessary_passed()) {
        ctx.err() << "necessary no-arbitrage conditions fail\n";
        return kExitDomainError;
    }
    return kExitOk;
}

int cmd_bs_price(Context& ctx) {
    ctx.echo_config();
    const RunConfig& c = ctx.config();
    const BsValue v = bs_price_delta(c.market, c.claim, 0.0, c.claim.spot);
    ctx.out() << fmt::format("V_hat0 = {:.6f}\ndelta = {:.6f}\n", v.value, v.delta);
    ctx.write_json("bs_price.json", {{"v_hat0", v.value}, {"delta", v.delta}, {"z_hat", v.z_hat}});
    return kExitOk;
}

int cmd_price_xva(Context& ctx) {
    ctx.echo_config();
    const RunConfig& c = ctx.config();
    const PricingRun run = price_xva_run(c.market, c.claim, c.regime.spec(), c.solver);
    const XVAReport& r = run.report;
    for (const auto& w : r.warnings) ctx.err() << "warning: " << w << '\n';
    ctx.write_json("xva_report.json", report_to_json(r));
    ctx.write("solver_steps_plus.csv",
              [&](std::ostream& s) { write_solver_steps_csv(s, run.plus, c.claim.maturity); });
    ctx.write("solver_steps_minus.csv",
              [&](std::ostream& s) { write_solver_steps_csv(s, run.minus, c.claim.maturity); });
    ctx.out() << fmt::format("regime {}\nV_hat0 = {:.6f}\nXVA+ = {:.6f} (se {:.2g})\nXVA- = {:.6f} (se {:.2g})\n",
                             to_string(r.regime.mode), r.v_hat0, r.xva_plus, r.se_plus, r.xva_minus,
                             r.se_minus);
    return kExitOk;
}

int cmd_sweep(Context& ctx, const SweepOptions& o) {
    RunConfig& c = ctx.config();
    SweepSection section = c.sweep.value_or(SweepSection{});
    if (o.axis) section.spec.axis = sweep_axis_from_string(*o.axis);
    if (!o.grid.empty()) section.spec.grid = o.grid;
    if (!o.modes.empty()) {
        section.spec.modes.clear();
        for (const auto& m : o.modes) section.spec.modes.push_back(regime_mode_from_string(m));
    }
    if (o.gnuplot) section.gnuplot = true;
    c.sweep = section;
    ctx.echo_config();

    const auto rows = sweep(section.spec, c.market, c.claim, c.regime.spec().params, c.solver);
    ctx.write("sweep.csv", [&](std::ostream& s) { write_sweep_csv(s, rows); });
    if (section.gnuplot)
        ctx.write("sweep.gp", [&](std::ostream& s) {
            write_sweep_gnuplot(s, ctx.path("sweep.csv"), section.spec.axis, section.spec.modes);
        });
    std::size_t failed = 0;
    for (const auto& r : rows) {
        if (!r.ok()) {
            ++failed;
            ctx.err() << fmt::format("{}={} {}: {}\n", to_string(section.spec.axis), r.axis_value,
                                     to_string(r.mode), r.status);
            continue;
        }
        ctx.out() << fmt::format("{}={:<8g} {:<14} XVA+ {:.6f} (se {:.2g})  XVA- {:.6f} (se {:.2g})\n",
                                 to_string(section.spec.axis), r.axis_value, to_string(r.mode),
                                 r.xva_plus, r.se_plus, r.xva_minus, r.se_minus);
    }
    return failed == 0 ? kExitOk : kExitDomainError;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Regime-switching XVA pricer", "rxva"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Root seed for all randomness");
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir,
                   std::string("Output directory (default: io.output_dir, $") + kOutputDirEnv + ", .)");
    app.add_option("--set", g.overrides, "Override a config value, section.key=value")
        ->allow_extra_args(false);
    app.add_option("--threads", g.threads, "Worker threads; results do not depend on it")
        ->check(CLI::NonNegativeNumber);

    EstimateOptions est;
    auto* estimate = app.add_subcommand("estimate-regimes", "Segment a stress index into regimes");
    estimate->add_option("--input", est.input, "CSV with date,value columns");
    estimate->add_option("--rule", est.rule, "single or hysteresis")
        ->check(CLI::IsMember({"single", "hysteresis"}));
    estimate->add_option("--lower", est.lower, "Threshold (single) or exit level (hysteresis), bp");
    estimate->add_option("--upper", est.upper, "Entry level (hysteresis), bp");
    estimate->add_flag("--percent", est.percent, "Input values are in percent");
    estimate->add_option("--initial", est.initial, "Hysteresis start label: normal, crisis or first")
        ->check(CLI::IsMember({"normal", "crisis", "first"}));

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate-regime", "Simulate regime paths");
    simulate->add_option("--paths", sim.paths, "Number of paths");
    simulate->add_option("--horizon", sim.horizon, "Horizon in years (default: claim maturity)");
    simulate->add_flag("--with-stock", sim.with_stock, "Also write the stock paths");

    auto* check = app.add_subcommand("check-assumptions", "Evaluate no-arbitrage and well-posedness conditions");
    auto* bs = app.add_subcommand("bs-price", "Black-Scholes reference value and delta");
    auto* price = app.add_subcommand("price-xva", "Price XVA+ and XVA-");

    SweepOptions sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "Price XVA over a parameter grid");
    sweep_cmd->add_option("--axis", sw.axis, "alpha, funding_borrow or mean_normal_regime");
    sweep_cmd->add_option("--grid", sw.grid, "Grid values")->delimiter(',');
    sweep_cmd->add_option("--modes", sw.modes, "Regime modes")->delimiter(',');
    sweep_cmd->add_flag("--gnuplot", sw.gnuplot, "Also write a gnuplot script");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        Context ctx(g, out, err);
        if (estimate->parsed()) return cmd_estimate(ctx, est);
        if (simulate->parsed()) return cmd_simulate_regime(ctx, sim);
        if (check->parsed()) return cmd_check(ctx);
        if (bs->parsed()) return cmd_bs_price(ctx);
        if (price->parsed()) return cmd_price_xva(ctx);
        if (sweep_cmd->parsed()) return cmd_sweep(ctx, sw);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomainError;
    }
    err << app.help();
    return kExitUsage;
}

}  // namespace rxva::cli
