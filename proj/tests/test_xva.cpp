#include "doctest.h"

#include "rxva/xva.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

using namespace rxva;

namespace {

SolverConfig small_solver() {
    SolverConfig s;
    s.n_paths = 5000;
    s.n_steps = 10;
    s.seed = 99;
    return s;
}

// Equal rates with full collateral: both reduced problems have the zero solution.
MarketParams degenerate_market() {
    MarketParams m;
    m.repo_rate_lend = m.repo_rate_borrow = 0.02;
    m.funding_rate_lend = m.funding_rate_borrow = 0.02;
    m.collateral_rate_receive = m.collateral_rate_pay = 0.02;
    m.discount_rate = 0.02;
    m.collateralization = 1.0;
    return m;
}

const RegimeParams kRegimes = RegimeParams::from_means(1.39, 0.99);

}  // namespace

TEST_SUITE("xva") {

TEST_CASE("degenerate market prices to zero in every regime mode") {
    // Zero up to cancellation in the rate terms.
    for (RegimeMode mode : {RegimeMode::kFrozenNormal, RegimeMode::kFrozenCrisis, RegimeMode::kDynamic}) {
        const auto r = price_xva(degenerate_market(), ClaimSpec{}, RegimeSpec{mode, kRegimes}, small_solver());
        CHECK(std::abs(r.xva_plus) <= 1e-15);
        CHECK(std::abs(r.xva_minus) <= 1e-15);
    }
}

TEST_CASE("unchecked pricing reports boundary markets as warnings") {
    MarketParams m = degenerate_market();
    m.collateralization = 0.0;
    m.bond_return_investor = m.bond_return_counterparty = m.discount_rate;
    m.loss_investor = m.loss_counterparty = 0.0;
    CHECK_THROWS_AS((void)price_xva(m, ClaimSpec{}, RegimeSpec{}, small_solver()), std::invalid_argument);
    const auto run = price_xva_unchecked(m, ClaimSpec{}, RegimeSpec{}, small_solver());
    bool saw_b = false;
    for (const auto& w : run.report.warnings) saw_b = saw_b || w.find("condition b") == 0;
    CHECK(saw_b);
    CHECK(std::abs(run.report.xva_plus) <= 1e-15);
    CHECK(std::abs(run.report.xva_minus) <= 1e-15);
}

TEST_CASE("benchmark XVA is positive and ordered") {
    const auto r = price_xva(MarketParams{}, ClaimSpec{}, RegimeSpec{}, small_solver());
    CHECK(r.xva_plus > 0.0);
    CHECK(r.xva_minus > 0.0);
    CHECK(r.se_plus > 0.0);
    CHECK(r.v_hat0 == doctest::Approx(0.0609673660444689739).epsilon(1e-12));
    CHECK(r.warnings.empty());
    CHECK(r.checks.passed);
}

TEST_CASE("necessary condition failure refuses to price") {
    MarketParams m;
    m.funding_rate_lend = 0.06;
    CHECK_THROWS_WITH_AS((void)price_xva(m, ClaimSpec{}, RegimeSpec{}, small_solver()),
                         doctest::Contains("necessary no-arbitrage condition (a)"), std::invalid_argument);
}

TEST_CASE("sufficient condition failure prices with a warning") {
    MarketParams m;
    m.repo_rate_lend = 0.06;
    m.funding_rate_borrow = 0.07;
    const auto r = price_xva(m, ClaimSpec{}, RegimeSpec{}, small_solver());
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("d.1") != std::string::npos);
    CHECK(std::isfinite(r.xva_plus));
}

TEST_CASE("report echoes its inputs and the initial regime") {
    MarketParams m;
    m.collateralization = 0.25;
    ClaimSpec c;
    c.strike = 1.1;
    RegimeSpec reg{RegimeMode::kDynamic, RegimeParams{0.8, 1.2, 1}};
    const auto r = price_xva(m, c, reg, small_solver());
    CHECK(r.market.collateralization == 0.25);
    CHECK(r.claim.strike == 1.1);
    CHECK(r.regime.params.rate_normal == 0.8);
    CHECK(r.initial_regime == 1);
    CHECK(r.solver.n_paths == 5000);
    CHECK(r.diagnostics_plus.r2_u.size() == 10);
    CHECK(price_xva(m, c, RegimeSpec{RegimeMode::kFrozenCrisis, {}}, small_solver()).initial_regime == 1);
}

TEST_CASE("full collateral makes the XVA independent of the loss rates") {
    MarketParams a;
    a.collateralization = 1.0;
    MarketParams b = a;
    b.loss_investor = 0.9;
    b.loss_counterparty = 0.1;
    const RegimeSpec reg{RegimeMode::kDynamic, kRegimes};
    const auto ra = price_xva(a, ClaimSpec{}, reg, small_solver());
    const auto rb = price_xva(b, ClaimSpec{}, reg, small_solver());
    CHECK(ra.xva_plus == rb.xva_plus);
    CHECK(ra.xva_minus == rb.xva_minus);
}

TEST_CASE("sweep axis names and spec validation") {
    for (auto a : {SweepAxis::kAlpha, SweepAxis::kFundingBorrow, SweepAxis::kMeanNormalRegime})
        CHECK(sweep_axis_from_string(to_string(a)) == a);
    CHECK_THROWS_AS((void)sweep_axis_from_string("beta"), std::invalid_argument);
    SweepSpec s;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.grid = {0.0, 1.5};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.axis = SweepAxis::kMeanNormalRegime;
    s.grid = {0.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
}

TEST_CASE("sweep rows are ordered and a failing row does not stop the sweep") {
    SweepSpec s;
    s.axis = SweepAxis::kFundingBorrow;
    s.grid = {0.05, 0.04, 0.06};
    s.modes = {RegimeMode::kFrozenNormal, RegimeMode::kDynamic};
    const auto rows = sweep(s, MarketParams{}, ClaimSpec{}, kRegimes, small_solver());
    REQUIRE(rows.size() == 6);
    CHECK(rows[0].axis_value == 0.05);
    CHECK(rows[0].mode == RegimeMode::kFrozenNormal);
    CHECK(rows[1].mode == RegimeMode::kDynamic);
    CHECK(rows[2].axis_value == 0.04);
    CHECK_FALSE(rows[2].ok());
    CHECK_FALSE(rows[3].ok());
    CHECK(rows[2].status.rfind("failed: ", 0) == 0);
    CHECK(std::isnan(rows[2].xva_plus));
    CHECK(rows[4].ok());
    CHECK(rows[4].xva_plus > rows[0].xva_plus);

    const auto single = price_xva(MarketParams{}, ClaimSpec{}, RegimeSpec{}, small_solver());
    CHECK(rows[0].xva_plus == single.xva_plus);
}

TEST_CASE("sweep csv is byte identical on rerun") {
    SweepSpec s;
    s.grid = {0.0, 0.5, 1.0};
    const auto a = sweep(s, MarketParams{}, ClaimSpec{}, kRegimes, small_solver());
    const auto b = sweep(s, MarketParams{}, ClaimSpec{}, kRegimes, small_solver());
    std::ostringstream ca, cb;
    write_sweep_csv(ca, a);
    write_sweep_csv(cb, b);
    CHECK(ca.str() == cb.str());
    CHECK(ca.str().rfind("axis_value,regime_mode,xva_plus,se_plus,xva_minus,se_minus,v_hat0,status\n", 0) == 0);
    CHECK(ca.str().find("\n0.5,frozen-normal,") != std::string::npos);
}

TEST_CASE("failed status text cannot break the csv") {
    SweepRow r;
    r.status = "failed: a, \"b\"";
    std::ostringstream out;
    write_sweep_csv(out, {r});
    const std::string line = out.str().substr(out.str().find('\n') + 1);
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
}

TEST_CASE("gnuplot script names every mode") {
    std::ostringstream out;
    write_sweep_gnuplot(out, "sweep.csv", SweepAxis::kAlpha, {RegimeMode::kFrozenNormal, RegimeMode::kDynamic});
    CHECK(out.str().find("set xlabel 'alpha'") != std::string::npos);
    CHECK(out.str().find("title 'dynamic'") != std::string::npos);
}

TEST_CASE("stock hedge from the Brownian loading") {
    CHECK(stock_hedge_from_z(0.3, 1.0, 0.3, 0).shares == doctest::Approx(1.0));
    CHECK(stock_hedge_from_z(-0.6, 2.0, 0.3, 0).shares == doctest::Approx(-1.0));
    const auto frozen = stock_hedge_from_z(-0.6, 2.0, 0.3, 1);
    CHECK(frozen.frozen);
    CHECK(frozen.shares == 0.0);
    CHECK_FALSE(stock_hedge_from_z(0.0, 1.0, 0.3, 1).frozen);
    CHECK(stock_hedge_from_z(0.3, 1.0, 0.3, 1).shares == doctest::Approx(1.0));
    CHECK_THROWS_AS((void)stock_hedge_from_z(0.1, 0.0, 0.3, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)stock_hedge_from_z(0.1, 1.0, 0.0, 0), std::invalid_argument);
}

TEST_CASE("bond hedges from the jump loadings") {
    const auto h = bond_hedges_from_z(0.2, -0.1, 0.5, 0.8);
    CHECK(h.investor == doctest::Approx(-0.4));
    CHECK(h.counterparty == doctest::Approx(0.125));
    const auto zero = bond_hedges_from_z(0.0, 0.0, 1.0, 1.0);
    CHECK_FALSE(std::signbit(zero.investor));
    CHECK_THROWS_AS((void)bond_hedges_from_z(0.1, 0.1, 0.0, 1.0), std::invalid_argument);
}

}
