#pragma once

#include "rxva/bsde_solver.hpp"
#include "rxva/generators.hpp"
#include "rxva/market.hpp"
#include "rxva/regime.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rxva {

struct XVAReport {
    double xva_plus = 0.0;
    double se_plus = 0.0;
    double xva_minus = 0.0;
    double se_minus = 0.0;
    double v_hat0 = 0.0;  // Black-Scholes reference value at t = 0
    int initial_regime = 0;

    // Inputs, echoed as given.
    MarketParams market;
    ClaimSpec claim;
    RegimeSpec regime;
    SolverConfig solver;

    SolverDiagnostics diagnostics_plus;
    SolverDiagnostics diagnostics_minus;
    CheckReport checks;
    std::vector<std::string> warnings;
};

/// Everything price_xva computes, for callers that want the paths.
struct PricingRun {
    XVAReport report;
    PathBundle paths;
    ReferenceGrid reference;
    SolverOutput plus;
    SolverOutput minus;
};

/// Solves the seller and buyer problems on one path bundle. Throws
/// std::invalid_argument if a necessary no-arbitrage condition fails.
/// Same computation without refusing on failed necessary conditions; every
/// failed item becomes a warning. For degenerate test markets on the
/// boundary of the admissible set.
[[nodiscard]] PricingRun price_xva_unchecked(const MarketParams& market, const ClaimSpec& claim,
                                             const RegimeSpec& regime, const SolverConfig& solver);
[[nodiscard]] PricingRun price_xva_run(const MarketParams& market, const ClaimSpec& claim,
                                       const RegimeSpec& regime, const SolverConfig& solver);
[[nodiscard]] XVAReport price_xva(const MarketParams& market, const ClaimSpec& claim,
                                  const RegimeSpec& regime, const SolverConfig& solver);

enum class SweepAxis { kAlpha, kFundingBorrow, kMeanNormalRegime };
[[nodiscard]] const char* to_string(SweepAxis axis);
[[nodiscard]] SweepAxis sweep_axis_from_string(const std::string& text);

struct SweepSpec {
    SweepAxis axis = SweepAxis::kAlpha;
    std::vector<double> grid;
    std::vector<RegimeMode> modes{RegimeMode::kFrozenNormal};

    void validate() const;
};

struct SweepRow {
    double axis_value = 0.0;
    RegimeMode mode = RegimeMode::kFrozenNormal;
    double xva_plus = 0.0;
    double se_plus = 0.0;
    double xva_minus = 0.0;
    double se_minus = 0.0;
    double v_hat0 = 0.0;
    std::string status = "ok";  // "ok" or "failed: <reason>"

    [[nodiscard]] bool ok() const { return status == "ok"; }
};

/// One pricing per (grid value, mode), rows ordered by grid value then mode.
/// Every row uses the solver seed, so the rows share random numbers.
[[nodiscard]] std::vector<SweepRow> sweep(const SweepSpec& spec, const MarketParams& market,
                                          const ClaimSpec& claim, const RegimeParams& regime,
                                          const SolverConfig& solver);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// gnuplot script plotting xva_plus against the axis, one curve per mode.
void write_sweep_gnuplot(std::ostream& out, const std::string& csv_path, SweepAxis axis,
                         const std::vector<RegimeMode>& modes);

struct StockHedge {
    double shares = 0.0;
    bool frozen = false;  // crisis with z < 0: no admissible stock position
};

[[nodiscard]] StockHedge stock_hedge_from_z(double z, double stock, double sigma, int beta);

struct BondHedges {
    double investor = 0.0;
    double counterparty = 0.0;
};

[[nodiscard]] BondHedges bond_hedges_from_z(double z_investor, double z_counterparty,
                                            double price_investor, double price_counterparty);

}  // namespace rxva
