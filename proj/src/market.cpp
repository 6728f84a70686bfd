#include "rxva/market.hpp"

#include "rxva/parallel.hpp"
#include "rxva/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rxva {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v))
        throw std::invalid_argument(std::string("market: ") + name + " must be finite");
}

void require_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument(std::string("market: ") + name + " must lie in [0, 1]");
}

inline double pos(double x) { return x > 0.0 ? x : 0.0; }
inline double neg(double x) { return x < 0.0 ? -x : 0.0; }

}  // namespace

void MarketParams::validate() const {
    require_finite(repo_rate_lend, "repo_rate_lend");
    require_finite(repo_rate_borrow, "repo_rate_borrow");
    require_finite(funding_rate_lend, "funding_rate_lend");
    require_finite(funding_rate_borrow, "funding_rate_borrow");
    require_finite(collateral_rate_receive, "collateral_rate_receive");
    require_finite(collateral_rate_pay, "collateral_rate_pay");
    require_finite(discount_rate, "discount_rate");
    require_finite(bond_return_investor, "bond_return_investor");
    require_finite(bond_return_counterparty, "bond_return_counterparty");
    if (!(volatility > 0.0) || !std::isfinite(volatility))
        throw std::invalid_argument("market: volatility must be positive");
    require_unit(loss_investor, "loss_investor");
    require_unit(loss_counterparty, "loss_counterparty");
    require_unit(collateralization, "collateralization");
}

void ClaimSpec::validate() const {
    if (!(strike > 0.0)) throw std::invalid_argument("claim: strike must be positive");
    if (!(maturity > 0.0)) throw std::invalid_argument("claim: maturity must be positive");
    if (!(spot > 0.0)) throw std::invalid_argument("claim: spot must be positive");
}

double ClaimSpec::payoff(double stock) const {
    return kind == OptionKind::kCall ? pos(stock - strike) : pos(strike - stock);
}

const char* to_string(RegimeMode mode) {
    switch (mode) {
        case RegimeMode::kFrozenNormal: return "frozen-normal";
        case RegimeMode::kFrozenCrisis: return "frozen-crisis";
        case RegimeMode::kDynamic: return "dynamic";
    }
    return "unknown";
}

RegimeMode regime_mode_from_string(const std::string& text) {
    if (text == "frozen-normal") return RegimeMode::kFrozenNormal;
    if (text == "frozen-crisis") return RegimeMode::kFrozenCrisis;
    if (text == "dynamic") return RegimeMode::kDynamic;
    throw std::invalid_argument("unknown regime mode '" + text +
                                "' (expected frozen-normal, frozen-crisis or dynamic)");
}

DefaultIntensities default_intensities_q(const MarketParams& params) {
    const double h_i = params.bond_return_investor - params.discount_rate;
    const double h_c = params.bond_return_counterparty - params.discount_rate;
    if (h_i < 0.0 || h_c < 0.0)
        throw std::invalid_argument(
            "default intensities under Q are negative: bond returns must be at least r_D "
            "(necessary no-arbitrage condition r_D < mu_I ^ mu_C)");
    return {h_i, h_c};
}

std::vector<DefaultTimes> sample_default_times(const MarketParams& params, std::size_t n_paths,
                                               std::uint64_t seed, std::uint64_t path_offset) {
    const auto h = default_intensities_q(params);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<DefaultTimes> out(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) {
        PathRng rng(seed, Stream::kDefault, path_offset + p);
        const double u_i = rng.uniform();
        const double u_c = rng.uniform();
        out[p].investor = h.investor > 0.0 ? -std::log(u_i) / h.investor : kInf;
        out[p].counterparty = h.counterparty > 0.0 ? -std::log(u_c) / h.counterparty : kInf;
    }
    return out;
}

PathBundle simulate_paths_q(const MarketParams& params, const ClaimSpec& claim,
                            const RegimeSpec& regime, const SimulationOptions& options) {
    params.validate();
    claim.validate();
    if (options.n_steps < 1) throw std::invalid_argument("simulate_paths_q: n_steps must be >= 1");
    if (options.n_paths < 1) throw std::invalid_argument("simulate_paths_q: n_paths must be >= 1");
    if (regime.mode == RegimeMode::kDynamic) regime.params.validate();

    PathBundle b;
    b.n_paths = options.n_paths;
    b.n_steps = options.n_steps;
    b.maturity = claim.maturity;
    b.stock.resize(b.n_paths * (b.n_steps + 1));
    b.brownian_increments.resize(b.n_paths * b.n_steps);
    b.regime.resize(b.n_paths * b.n_steps);

    const double dt = b.dt();
    const double sqrt_dt = std::sqrt(dt);
    const double sigma = params.volatility;
    const double drift = (params.discount_rate - 0.5 * sigma * sigma) * dt;
    const std::size_t n = b.n_steps;

    parallel_chunks(b.n_paths, options.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            const std::uint64_t index = options.path_offset + p;
            PathRng rng(options.seed, Stream::kStock, index);
            double* s = &b.stock[p * (n + 1)];
            double* dw = &b.brownian_increments[p * n];
            s[0] = claim.spot;
            for (std::size_t i = 0; i < n; ++i) {
                dw[i] = sqrt_dt * rng.normal();
                s[i + 1] = s[i] * std::exp(drift + sigma * dw[i]);
            }
            std::uint8_t* beta = &b.regime[p * n];
            switch (regime.mode) {
                case RegimeMode::kFrozenNormal: std::fill(beta, beta + n, 0); break;
                case RegimeMode::kFrozenCrisis: std::fill(beta, beta + n, 1); break;
                case RegimeMode::kDynamic: {
                    const auto path =
                        simulate_regime_path(regime.params, claim.maturity, options.seed, index);
                    for (std::size_t i = 0; i < n; ++i)
                        beta[i] = static_cast<std::uint8_t>(state_at(path, dt * static_cast<double>(i)));
                    break;
                }
            }
        }
    });
    b.default_times = sample_default_times(params, b.n_paths, options.seed, options.path_offset);
    return b;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

BsValue bs_price_delta(const MarketParams& params, const ClaimSpec& claim, double t, double stock) {
    claim.validate();
    if (!(stock > 0.0)) throw std::invalid_argument("bs_price_delta: stock must be positive");
    if (t > claim.maturity) throw std::invalid_argument("bs_price_delta: t is past maturity");
    if (t < 0.0) throw std::invalid_argument("bs_price_delta: t must be >= 0");

    const double sigma = params.volatility;
    const double tau = claim.maturity - t;
    const bool call = claim.kind == OptionKind::kCall;
    BsValue out;
    if (tau <= 0.0) {
        out.value = claim.payoff(stock);
        if (call)
            out.delta = stock > claim.strike ? 1.0 : 0.0;
        else
            out.delta = stock < claim.strike ? -1.0 : 0.0;
    } else {
        const double vol_sqrt = sigma * std::sqrt(tau);
        const double d1 = (std::log(stock / claim.strike) +
                           (params.discount_rate + 0.5 * sigma * sigma) * tau) / vol_sqrt;
        const double d2 = d1 - vol_sqrt;
        const double discount = std::exp(-params.discount_rate * tau);
        if (call) {
            out.value = stock * normal_cdf(d1) - claim.strike * discount * normal_cdf(d2);
            out.delta = normal_cdf(d1);
        } else {
            out.value = claim.strike * discount * normal_cdf(-d2) - stock * normal_cdf(-d1);
            out.delta = normal_cdf(d1) - 1.0;
        }
    }
    out.z_hat = sigma * stock * out.delta;
    return out;
}

double closeout_value(const MarketParams& params, double v_hat, DefaultEvent event) {
    const double exposure = (1.0 - params.collateralization) * v_hat;
    if (event == DefaultEvent::kInvestor) return v_hat - params.loss_investor * pos(exposure);
    return v_hat + params.loss_counterparty * neg(exposure);
}

ThetaTilde theta_tilde(const MarketParams& params, double v_hat) {
    const double exposure = (1.0 - params.collateralization) * v_hat;
    return {-params.loss_investor * pos(exposure), params.loss_counterparty * neg(exposure)};
}

double portfolio_value(const PortfolioShares& s, const AccountPrices& p, int beta) {
    const double stock_weight = (beta == 1 && s.stock < 0.0) ? 0.0 : 1.0;
    return stock_weight * s.stock * p.stock + s.bond_investor * p.bond_investor +
           s.bond_counterparty * p.bond_counterparty + s.funding * p.funding +
           (1.0 - beta) * s.repo * p.repo - s.collateral * p.collateral;
}

}  // namespace rxva
