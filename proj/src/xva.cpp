#include "rxva/xva.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace rxva {

namespace {

int initial_regime_of(const RegimeSpec& regime) {
    switch (regime.mode) {
        case RegimeMode::kFrozenNormal: return 0;
        case RegimeMode::kFrozenCrisis: return 1;
        case RegimeMode::kDynamic: return regime.params.initial_state;
    }
    return 0;
}

// Shortest round-trip decimal, so CSV output is exact and stable.
std::string format_number(double v) { return fmt::format("{}", v); }

}  // namespace

PricingRun price_xva_unchecked(const MarketParams& market, const ClaimSpec& claim,
                               const RegimeSpec& regime, const SolverConfig& solver) {
    market.validate();
    claim.validate();
    solver.validate();
    if (regime.mode == RegimeMode::kDynamic) regime.params.validate();

    PricingRun run;
    XVAReport& report = run.report;
    report.market = market;
    report.claim = claim;
    report.regime = regime;
    report.solver = solver;
    report.initial_regime = initial_regime_of(regime);
    report.checks = check_assumptions(market, claim.maturity);
    for (const auto& item : report.checks.items)
        if (!item.passed)
            report.warnings.push_back("condition " + item.id + " not met: " + item.description);

    SimulationOptions sim;
    sim.n_steps = solver.n_steps;
    sim.n_paths = solver.n_paths;
    sim.seed = solver.seed;
    sim.threads = solver.threads;
    run.paths = simulate_paths_q(market, claim, regime, sim);
    run.reference = compute_reference(market, claim, run.paths, solver.threads);
    report.v_hat0 = bs_price_delta(market, claim, 0.0, claim.spot).value;

    ReducedProblem problem;
    problem.terminal = zero_terminal();
    problem.paths = &run.paths;
    problem.reference = &run.reference;
    problem.strike = claim.strike;

    problem.driver = std::make_shared<XvaDriver>(market, Side::kPlus);
    run.plus = solve(problem, solver);
    problem.driver = std::make_shared<XvaDriver>(market, Side::kMinus);
    run.minus = solve(problem, solver);

    const auto g = static_cast<std::size_t>(report.initial_regime);
    if (!run.plus.u0[g] || !run.minus.u0[g])
        throw std::runtime_error("solver produced no value for the initial regime");
    report.xva_plus = *run.plus.u0[g];
    report.se_plus = run.plus.u0_std_error[g].value_or(0.0);
    report.xva_minus = *run.minus.u0[g];
    report.se_minus = run.minus.u0_std_error[g].value_or(0.0);
    report.diagnostics_plus = run.plus.diagnostics;
    report.diagnostics_minus = run.minus.diagnostics;
    return run;
}

PricingRun price_xva_run(const MarketParams& market, const ClaimSpec& claim,
                         const RegimeSpec& regime, const SolverConfig& solver) {
    market.validate();
    claim.validate();
    for (const auto& item : check_assumptions(market, claim.maturity).items)
        if (item.necessary && !item.passed)
            throw std::invalid_argument("necessary no-arbitrage condition (" + item.id +
                                        ") fails: " + item.description);
    return price_xva_unchecked(market, claim, regime, solver);
}

XVAReport price_xva(const MarketParams& market, const ClaimSpec& claim, const RegimeSpec& regime,
                    const SolverConfig& solver) {
    return price_xva_run(market, claim, regime, solver).report;
}

const char* to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::kAlpha: return "alpha";
        case SweepAxis::kFundingBorrow: return "funding_borrow";
        case SweepAxis::kMeanNormalRegime: return "mean_normal_regime";
    }
    return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& text) {
    if (text == "alpha") return SweepAxis::kAlpha;
    if (text == "funding_borrow") return SweepAxis::kFundingBorrow;
    if (text == "mean_normal_regime") return SweepAxis::kMeanNormalRegime;
    throw std::invalid_argument("unknown sweep axis '" + text +
                                "' (expected alpha, funding_borrow or mean_normal_regime)");
}

void SweepSpec::validate() const {
    if (grid.empty()) throw std::invalid_argument("sweep: grid is empty");
    if (modes.empty()) throw std::invalid_argument("sweep: no regime modes");
    for (double v : grid) {
        if (!std::isfinite(v)) throw std::invalid_argument("sweep: grid values must be finite");
        if (axis == SweepAxis::kAlpha && !(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("sweep: alpha grid values must lie in [0, 1]");
        if (axis != SweepAxis::kAlpha && !(v > 0.0))
            throw std::invalid_argument(std::string("sweep: ") + to_string(axis) +
                                        " grid values must be positive");
    }
}

std::vector<SweepRow> sweep(const SweepSpec& spec, const MarketParams& market,
                            const ClaimSpec& claim, const RegimeParams& regime,
                            const SolverConfig& solver) {
    spec.validate();
    std::vector<SweepRow> rows;
    for (double value : spec.grid) {
        for (RegimeMode mode : spec.modes) {
            SweepRow row;
            row.axis_value = value;
            row.mode = mode;
            try {
                MarketParams m = market;
                RegimeSpec r{mode, regime};
                switch (spec.axis) {
                    case SweepAxis::kAlpha: m.collateralization = value; break;
                    case SweepAxis::kFundingBorrow: m.funding_rate_borrow = value; break;
                    case SweepAxis::kMeanNormalRegime: r.params.rate_normal = 1.0 / value; break;
                }
                const XVAReport report = price_xva(m, claim, r, solver);
                row.xva_plus = report.xva_plus;
                row.se_plus = report.se_plus;
                row.xva_minus = report.xva_minus;
                row.se_minus = report.se_minus;
                row.v_hat0 = report.v_hat0;
            } catch (const std::exception& e) {
                constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
                row.xva_plus = row.se_plus = row.xva_minus = row.se_minus = row.v_hat0 = kNan;
                row.status = std::string("failed: ") + e.what();
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "axis_value,regime_mode,xva_plus,se_plus,xva_minus,se_minus,v_hat0,status\n";
    for (const auto& r : rows) {
        std::string status = r.status;
        for (char& c : status)
            if (c == ',' || c == '\n' || c == '"') c = ' ';
        out << format_number(r.axis_value) << ',' << to_string(r.mode) << ','
            << format_number(r.xva_plus) << ',' << format_number(r.se_plus) << ','
            << format_number(r.xva_minus) << ',' << format_number(r.se_minus) << ','
            << format_number(r.v_hat0) << ',' << status << '\n';
    }
}

void write_sweep_gnuplot(std::ostream& out, const std::string& csv_path, SweepAxis axis,
                         const std::vector<RegimeMode>& modes) {
    out << "set datafile separator ','\n"
        << "set key autotitle columnhead\n"
        << "set xlabel '" << to_string(axis) << "'\n"
        << "set ylabel 'XVA+'\n"
        << "set grid\n"
        << "plot ";
    for (std::size_t k = 0; k < modes.size(); ++k) {
        if (k > 0) out << ", \\\n     ";
        out << "'" << csv_path << "' using 1:(strcol(2) eq '" << to_string(modes[k])
            << "' ? $3 : NaN) with linespoints title '" << to_string(modes[k]) << "'";
    }
    out << '\n';
}

StockHedge stock_hedge_from_z(double z, double stock, double sigma, int beta) {
    if (!(stock > 0.0)) throw std::invalid_argument("stock_hedge_from_z: stock must be positive");
    if (!(sigma > 0.0)) throw std::invalid_argument("stock_hedge_from_z: sigma must be positive");
    if (z == 0.0) return {0.0, false};
    if (beta == 1 && z < 0.0) return {0.0, true};
    return {z / (sigma * stock), false};
}

BondHedges bond_hedges_from_z(double z_investor, double z_counterparty, double price_investor,
                              double price_counterparty) {
    if (!(price_investor > 0.0) || !(price_counterparty > 0.0))
        throw std::invalid_argument("bond_hedges_from_z: bond prices must be positive");
    // -0.0 from negating a zero loading reads oddly in output.
    auto share = [](double z, double p) { return z == 0.0 ? 0.0 : -z / p; };
    return {share(z_investor, price_investor), share(z_counterparty, price_counterparty)};
}

}  // namespace rxva
