#pragma once

#include "rxva/market.hpp"

#include <string>
#include <vector>

namespace rxva {

enum class Side { kPlus, kMinus };  // seller (+) / buyer (-)

/// Arguments of the drivers. `level` is v for f, xva for f-tilde and u for
/// g-breve; z_investor / z_counterparty are ignored by g-breve.
struct GeneratorPoint {
    double t = 0.0;
    double level = 0.0;
    double z = 0.0;
    double z_investor = 0.0;
    double z_counterparty = 0.0;
    int beta = 0;
    double v_hat = 0.0;
    double z_hat = 0.0;
};

[[nodiscard]] double eval_f(const MarketParams& params, const GeneratorPoint& point, Side side);
[[nodiscard]] double eval_f_tilde(const MarketParams& params, const GeneratorPoint& point, Side side);
[[nodiscard]] double eval_g_breve(const MarketParams& params, double t, double u, double z, int beta,
                                  double v_hat, double z_hat, Side side);

struct DriverPartials {
    double value = 0.0;
    double d_u = 0.0;
    double d_z = 0.0;
};

/// g-breve with its one-sided partial derivatives in (u, z); at a kink the
/// branch selected by the value is differentiated.
[[nodiscard]] DriverPartials eval_g_breve_partials(const MarketParams& params, double t, double u,
                                                   double z, int beta, double v_hat, double z_hat,
                                                   Side side);

struct LipschitzConstant {
    double k = 0.0;
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
};

[[nodiscard]] LipschitzConstant lipschitz_constant(const MarketParams& params);

struct CheckItem {
    std::string id;
    std::string description;
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
    bool necessary = false;  // necessary no-arbitrage condition vs. sufficient/well-posedness
};

struct CheckReport {
    std::vector<CheckItem> items;
    bool passed = false;

    [[nodiscard]] bool necessary_passed() const;
};

/// Evaluates the no-arbitrage conditions and the well-posedness bounds for
/// maturity T. Failures are report items, never exceptions.
[[nodiscard]] CheckReport check_assumptions(const MarketParams& params, double maturity);

}  // namespace rxva
