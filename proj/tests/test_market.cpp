#include "doctest.h"

#include "rxva/market.hpp"
#include "rxva/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

using namespace rxva;

TEST_SUITE("market") {

TEST_CASE("parameter validation") {
    MarketParams m;
    CHECK_NOTHROW(m.validate());
    m.volatility = 0.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m = MarketParams{};
    m.collateralization = 1.5;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    ClaimSpec c;
    c.strike = -1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("regime mode names round-trip") {
    for (auto m : {RegimeMode::kFrozenNormal, RegimeMode::kFrozenCrisis, RegimeMode::kDynamic})
        CHECK(regime_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS((void)regime_mode_from_string("calm"), std::invalid_argument);
}

TEST_CASE("Black-Scholes closed form") {
    const MarketParams m;
    const ClaimSpec c;
    // Reference values computed with mpmath at 30 digits.
    const auto v = bs_price_delta(m, c, 0.0, 1.0);
    CHECK(v.value == doctest::Approx(0.06096736604446897).epsilon(1e-12));
    CHECK(v.delta == doctest::Approx(0.5365185590008438).epsilon(1e-12));
    CHECK(v.z_hat == doctest::Approx(0.3 * v.delta));
    ClaimSpec put = c;
    put.kind = OptionKind::kPut;
    CHECK(bs_price_delta(m, put, 0.0, 1.0).value == doctest::Approx(0.0584704884419291).epsilon(1e-12));
}

TEST_CASE("Black-Scholes at maturity and in the zero-strike limit") {
    const MarketParams m;
    const ClaimSpec c;
    const auto end = bs_price_delta(m, c, c.maturity, 1.2);
    CHECK(end.value == doctest::Approx(0.2));
    CHECK(end.delta == 1.0);
    ClaimSpec tiny = c;
    tiny.strike = 1e-12;
    CHECK(bs_price_delta(m, tiny, 0.0, 1.3).value == doctest::Approx(1.3).epsilon(1e-10));
    CHECK_THROWS_AS((void)bs_price_delta(m, c, 0.3, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)bs_price_delta(m, c, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("put-call parity") {
    PathRng rng(3, Stream::kStock, 0);
    for (int i = 0; i < 1000; ++i) {
        MarketParams m;
        m.volatility = 0.05 + rng.uniform();
        m.discount_rate = 0.1 * rng.uniform();
        ClaimSpec call;
        call.strike = 0.5 + rng.uniform();
        call.maturity = 0.1 + 2.0 * rng.uniform();
        ClaimSpec put = call;
        put.kind = OptionKind::kPut;
        const double t = call.maturity * rng.uniform();
        const double s = 0.5 + rng.uniform();
        const double lhs = bs_price_delta(m, call, t, s).value - bs_price_delta(m, put, t, s).value;
        const double rhs = s - call.strike * std::exp(-m.discount_rate * (call.maturity - t));
        REQUIRE(std::abs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("normal cdf accuracy") {
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-14));
    CHECK(normal_cdf(-8.0) == doctest::Approx(6.220960574271785e-16).epsilon(1e-10));
}

TEST_CASE("valuation-measure default intensities") {
    const auto h = default_intensities_q(MarketParams{});
    CHECK(h.investor == doctest::Approx(0.20));
    CHECK(h.counterparty == doctest::Approx(0.15));
    MarketParams m;
    m.bond_return_investor = m.discount_rate;
    CHECK(default_intensities_q(m).investor == 0.0);
    m.bond_return_counterparty = 0.0;
    CHECK_THROWS_AS((void)default_intensities_q(m), std::invalid_argument);
}

TEST_CASE("default times") {
    MarketParams none;
    none.bond_return_investor = none.bond_return_counterparty = none.discount_rate;
    for (const auto& d : sample_default_times(none, 100, 1)) {
        CHECK(std::isinf(d.investor));
        CHECK(std::isinf(d.counterparty));
    }
    const auto a = sample_default_times(MarketParams{}, 100000, 9);
    const auto b = sample_default_times(MarketParams{}, 100000, 9);
    double s = 0.0, ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].investor == b[i].investor);
        s += a[i].investor;
        ss += a[i].investor * a[i].investor;
    }
    const double n = static_cast<double>(a.size());
    const double mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(mean - 5.0) <= 3.0 * se);
}

TEST_CASE("simulated stock is a discounted martingale") {
    const MarketParams m;
    const ClaimSpec c;
    SimulationOptions o;
    o.n_steps = 1;
    o.n_paths = 100000;
    const auto b = simulate_paths_q(m, c, RegimeSpec{}, o);
    double s = 0.0, ss = 0.0, w = 0.0;
    for (std::size_t p = 0; p < b.n_paths; ++p) {
        const double x = b.stock_at(p, 1);
        s += x;
        ss += x * x;
        w += b.dw(p, 0) * b.dw(p, 0);
    }
    const double n = static_cast<double>(b.n_paths);
    const double mean = s / n;
    const double se = std::sqrt((ss / n - mean * mean) / n);
    CHECK(std::abs(mean - std::exp(m.discount_rate * c.maturity)) <= 3.0 * se);
    // Var of dW^2 is 2 dt^2.
    CHECK(std::abs(w / n - b.dt()) <= 3.0 * std::sqrt(2.0 / n) * b.dt());
}

TEST_CASE("path bundle regimes and determinism") {
    const MarketParams m;
    const ClaimSpec c;
    SimulationOptions o;
    o.n_steps = 20;
    o.n_paths = 3000;
    const auto normal = simulate_paths_q(m, c, RegimeSpec{RegimeMode::kFrozenNormal, {}}, o);
    const auto crisis = simulate_paths_q(m, c, RegimeSpec{RegimeMode::kFrozenCrisis, {}}, o);
    for (auto v : normal.regime) REQUIRE(v == 0);
    for (auto v : crisis.regime) REQUIRE(v == 1);
    CHECK(normal.stock == crisis.stock);
    for (double s : normal.stock) REQUIRE(s > 0.0);

    RegimeSpec dyn{RegimeMode::kDynamic, RegimeParams{4.0, 4.0, 0}};
    const auto d1 = simulate_paths_q(m, c, dyn, o);
    o.threads = 3;
    const auto d2 = simulate_paths_q(m, c, dyn, o);
    CHECK(d1.stock == d2.stock);
    CHECK(d1.regime == d2.regime);
    CHECK(d1.brownian_increments == d2.brownian_increments);
    for (std::size_t p = 0; p < 50; ++p) {
        const auto path = simulate_regime_path(dyn.params, c.maturity, o.seed, p);
        for (std::size_t i = 0; i < o.n_steps; ++i)
            REQUIRE(d1.beta(p, i) == state_at(path, d1.time(i)));
    }
    o.n_steps = 0;
    CHECK_THROWS_AS((void)simulate_paths_q(m, c, dyn, o), std::invalid_argument);
}

TEST_CASE("closeout values") {
    MarketParams m;
    CHECK(closeout_value(m, 2.0, DefaultEvent::kInvestor) == doctest::Approx(1.0));
    CHECK(closeout_value(m, -2.0, DefaultEvent::kCounterparty) == doctest::Approx(-1.0));
    m.collateralization = 1.0;
    CHECK(closeout_value(m, 2.0, DefaultEvent::kInvestor) == 2.0);
    CHECK(closeout_value(m, -2.0, DefaultEvent::kCounterparty) == -2.0);
    const auto t = theta_tilde(m, 3.0);
    CHECK(t.investor == 0.0);
    CHECK(t.counterparty == 0.0);
    m.collateralization = 0.0;
    CHECK(theta_tilde(m, 2.0).investor == doctest::Approx(-1.0));
    CHECK(theta_tilde(m, 2.0).counterparty == 0.0);
    CHECK(theta_tilde(m, -2.0).investor == 0.0);
    CHECK(theta_tilde(m, -2.0).counterparty == doctest::Approx(1.0));
    m.loss_investor = m.loss_counterparty = 0.0;
    CHECK(closeout_value(m, 0.7, DefaultEvent::kInvestor) == 0.7);
    CHECK(closeout_value(m, -0.7, DefaultEvent::kCounterparty) == -0.7);
}

TEST_CASE("closeout equals reference plus theta tilde") {
    PathRng rng(21, Stream::kStock, 0);
    for (int i = 0; i < 10000; ++i) {
        MarketParams m;
        m.collateralization = rng.uniform();
        m.loss_investor = rng.uniform();
        m.loss_counterparty = rng.uniform();
        const double v = 4.0 * rng.uniform() - 2.0;
        const auto t = theta_tilde(m, v);
        REQUIRE(std::abs(closeout_value(m, v, DefaultEvent::kInvestor) - (v + t.investor)) <= 1e-12);
        REQUIRE(std::abs(closeout_value(m, v, DefaultEvent::kCounterparty) - (v + t.counterparty)) <= 1e-12);
    }
}

TEST_CASE("portfolio value") {
    const AccountPrices prices;
    CHECK(portfolio_value(PortfolioShares{}, prices, 0) == 0.0);
    PortfolioShares short_stock;
    short_stock.stock = -2.0;
    CHECK(portfolio_value(short_stock, prices, 1) == 0.0);
    CHECK(portfolio_value(short_stock, prices, 0) == -2.0);
    PortfolioShares repo_financed;
    repo_financed.stock = 1.0;
    repo_financed.repo = -1.0;
    CHECK(portfolio_value(repo_financed, prices, 0) == 0.0);
}

}
