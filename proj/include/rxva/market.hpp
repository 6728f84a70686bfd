#pragma once

#include "rxva/regime.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rxva {

/// Every rate of the model in one place. Defaults are the benchmark market
/// (three-month at-the-money call, sigma = 0.3).
struct MarketParams {
    double repo_rate_lend = 0.05;       // r_r+
    double repo_rate_borrow = 0.05;     // r_r-
    double funding_rate_lend = 0.05;    // r_f+
    double funding_rate_borrow = 0.05;  // r_f-
    double collateral_rate_receive = 0.01;  // r_c+
    double collateral_rate_pay = 0.01;      // r_c-
    double discount_rate = 0.01;        // r_D
    double bond_return_investor = 0.21;      // mu_I
    double bond_return_counterparty = 0.16;  // mu_C
    double volatility = 0.3;
    double loss_investor = 0.5;
    double loss_counterparty = 0.5;
    double collateralization = 0.0;  // alpha
    // Physical-measure context; carried for reporting, never used in pricing.
    std::optional<double> physical_drift;
    std::optional<double> physical_intensity_investor;
    std::optional<double> physical_intensity_counterparty;

    void validate() const;
};

enum class OptionKind { kCall, kPut };

struct ClaimSpec {
    OptionKind kind = OptionKind::kCall;
    double strike = 1.0;
    double maturity = 0.25;
    double spot = 1.0;

    void validate() const;
    [[nodiscard]] double payoff(double stock) const;
};

enum class RegimeMode { kFrozenNormal, kFrozenCrisis, kDynamic };
[[nodiscard]] const char* to_string(RegimeMode mode);
[[nodiscard]] RegimeMode regime_mode_from_string(const std::string& text);

struct RegimeSpec {
    RegimeMode mode = RegimeMode::kFrozenNormal;
    RegimeParams params;  // used when mode == kDynamic
};

struct DefaultTimes {
    double investor = 0.0;
    double counterparty = 0.0;
    [[nodiscard]] double first() const { return investor < counterparty ? investor : counterparty; }
};

/// Paths on a uniform grid, stored path-major: stock(p, i) for i in [0, n_steps].
struct PathBundle {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    double maturity = 0.0;
    std::vector<double> stock;               // n_paths * (n_steps + 1)
    std::vector<double> brownian_increments; // n_paths * n_steps
    std::vector<std::uint8_t> regime;        // n_paths * n_steps, beta at the left grid point
    std::vector<DefaultTimes> default_times; // n_paths

    [[nodiscard]] double dt() const { return maturity / static_cast<double>(n_steps); }
    [[nodiscard]] double time(std::size_t step) const { return dt() * static_cast<double>(step); }
    [[nodiscard]] double stock_at(std::size_t path, std::size_t step) const {
        return stock[path * (n_steps + 1) + step];
    }
    [[nodiscard]] double dw(std::size_t path, std::size_t step) const {
        return brownian_increments[path * n_steps + step];
    }
    [[nodiscard]] int beta(std::size_t path, std::size_t step) const {
        return regime[path * n_steps + step];
    }
};

struct SimulationOptions {
    std::size_t n_steps = 50;
    std::size_t n_paths = 100000;
    std::uint64_t seed = 20240101;
    unsigned threads = 0;
    std::uint64_t path_offset = 0;  // first path index in the counter space
};

/// Exact log-normal stepping of the stock under the valuation measure,
/// regime read at grid times, default times sampled per path.
[[nodiscard]] PathBundle simulate_paths_q(const MarketParams& params, const ClaimSpec& claim,
                                          const RegimeSpec& regime, const SimulationOptions& options);

struct BsValue {
    double value = 0.0;
    double delta = 0.0;
    double z_hat = 0.0;  // sigma * S * delta
};

[[nodiscard]] double normal_cdf(double x);

/// Black-Scholes price and delta at (t, S) with rate r_D and volatility sigma.
[[nodiscard]] BsValue bs_price_delta(const MarketParams& params, const ClaimSpec& claim, double t,
                                     double stock);

struct DefaultIntensities {
    double investor = 0.0;
    double counterparty = 0.0;
};

/// h_i = mu_i - r_D under the valuation measure.
[[nodiscard]] DefaultIntensities default_intensities_q(const MarketParams& params);

[[nodiscard]] std::vector<DefaultTimes> sample_default_times(const MarketParams& params,
                                                             std::size_t n_paths,
                                                             std::uint64_t seed,
                                                             std::uint64_t path_offset = 0);

enum class DefaultEvent { kInvestor, kCounterparty };

[[nodiscard]] double closeout_value(const MarketParams& params, double v_hat, DefaultEvent event);

struct ThetaTilde {
    double investor = 0.0;
    double counterparty = 0.0;
};

/// Closeout minus reference value: (-L_I((1-a)v)^+, L_C((1-a)v)^-).
[[nodiscard]] ThetaTilde theta_tilde(const MarketParams& params, double v_hat);

struct PortfolioShares {
    double stock = 0.0;
    double bond_investor = 0.0;
    double bond_counterparty = 0.0;
    double funding = 0.0;
    double repo = 0.0;
    double collateral = 0.0;
};

struct AccountPrices {
    double stock = 1.0;
    double bond_investor = 1.0;
    double bond_counterparty = 1.0;
    double funding = 1.0;
    double repo = 1.0;
    double collateral = 1.0;
};

/// Replicating-portfolio value; in crisis a short stock leg and the repo
/// account drop out.
[[nodiscard]] double portfolio_value(const PortfolioShares& shares, const AccountPrices& prices,
                                     int beta);

}  // namespace rxva
