#include "rxva/generators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace rxva {

namespace {

// Forward-mode number carrying derivatives with respect to (u, z).
struct Dual {
    double v = 0.0;
    double du = 0.0;
    double dz = 0.0;

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit from constants
    Dual(double value, double d_u, double d_z) : v(value), du(d_u), dz(d_z) {}

    friend Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.du + b.du, a.dz + b.dz}; }
    friend Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.du - b.du, a.dz - b.dz}; }
    friend Dual operator-(Dual a) { return {-a.v, -a.du, -a.dz}; }
    friend Dual operator*(double s, Dual a) { return {s * a.v, s * a.du, s * a.dz}; }
};

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

template <class T>
T pos(const T& x) {
    return value_of(x) > 0.0 ? x : T(0.0);
}
template <class T>
T neg(const T& x) {
    return value_of(x) < 0.0 ? -x : T(0.0);
}

// f+ with the funding / repo / collateral rate selection done through
// positive and negative parts.
template <class T>
T f_plus(const MarketParams& p, const T& v, const T& z, const T& z_i, const T& z_c, int beta,
         double v_hat) {
    const double sigma = p.volatility;
    const double alpha = p.collateralization;
    const double frozen = (value_of(z) > 0.0 && beta == 1) ? 1.0 : 0.0;
    const T funding = v - (frozen / sigma) * z + z_i + z_c - T(alpha * v_hat);
    const T inner = p.funding_rate_lend * pos(funding) - p.funding_rate_borrow * neg(funding) +
                    ((p.discount_rate - p.repo_rate_borrow * (1.0 - frozen)) / sigma) * pos(z) -
                    ((p.discount_rate - p.repo_rate_lend * (1.0 - frozen)) / sigma) * neg(z) +
                    T(p.collateral_rate_receive * pos(alpha * v_hat) -
                      p.collateral_rate_pay * neg(alpha * v_hat)) -
                    p.discount_rate * z_i - p.discount_rate * z_c;
    return -inner;
}

// f-tilde+ as displayed: repo and indicator terms act on z + z_hat and the
// funding bracket carries (1 - alpha) v_hat.
template <class T>
T f_tilde_plus(const MarketParams& p, const T& xva, const T& z, const T& z_i, const T& z_c,
               int beta, double v_hat, double z_hat) {
    const double sigma = p.volatility;
    const double alpha = p.collateralization;
    const T z_total = z + T(z_hat);
    const double frozen = (value_of(z_total) > 0.0 && beta == 1) ? 1.0 : 0.0;
    const T funding = xva - (frozen / sigma) * z_total + z_i + z_c + T((1.0 - alpha) * v_hat);
    const T inner = p.funding_rate_lend * pos(funding) +
                    ((p.discount_rate - p.repo_rate_borrow * (1.0 - frozen)) / sigma) * pos(z_total) -
                    p.funding_rate_borrow * neg(funding) -
                    ((p.discount_rate - p.repo_rate_lend * (1.0 - frozen)) / sigma) * neg(z_total) +
                    T(p.collateral_rate_receive * pos(alpha * v_hat) -
                      p.collateral_rate_pay * neg(alpha * v_hat)) -
                    p.discount_rate * z_i - p.discount_rate * z_c;
    return -inner + T(p.discount_rate * v_hat);
}

template <class T>
T g_breve_plus(const MarketParams& p, const T& u, const T& z, int beta, double v_hat,
               double z_hat) {
    const auto h = default_intensities_q(p);
    const auto theta = theta_tilde(p, v_hat);
    const T jump_i = T(theta.investor) - u;
    const T jump_c = T(theta.counterparty) - u;
    return h.investor * jump_i + h.counterparty * jump_c +
           f_tilde_plus(p, u, z, jump_i, jump_c, beta, v_hat, z_hat);
}

template <class T>
T g_breve(const MarketParams& p, const T& u, const T& z, int beta, double v_hat, double z_hat,
          Side side) {
    if (side == Side::kPlus) return g_breve_plus(p, u, z, beta, v_hat, z_hat);
    return -g_breve_plus(p, -u, -z, beta, -v_hat, -z_hat);
}

}  // namespace

double eval_f(const MarketParams& params, const GeneratorPoint& x, Side side) {
    if (side == Side::kPlus)
        return f_plus<double>(params, x.level, x.z, x.z_investor, x.z_counterparty, x.beta, x.v_hat);
    return -f_plus<double>(params, -x.level, -x.z, -x.z_investor, -x.z_counterparty, x.beta,
                           -x.v_hat);
}

double eval_f_tilde(const MarketParams& params, const GeneratorPoint& x, Side side) {
    if (side == Side::kPlus)
        return f_tilde_plus<double>(params, x.level, x.z, x.z_investor, x.z_counterparty, x.beta,
                                    x.v_hat, x.z_hat);
    return -f_tilde_plus<double>(params, -x.level, -x.z, -x.z_investor, -x.z_counterparty, x.beta,
                                 -x.v_hat, -x.z_hat);
}

double eval_g_breve(const MarketParams& params, double, double u, double z, int beta, double v_hat,
                    double z_hat, Side side) {
    return g_breve<double>(params, u, z, beta, v_hat, z_hat, side);
}

DriverPartials eval_g_breve_partials(const MarketParams& params, double, double u, double z,
                                     int beta, double v_hat, double z_hat, Side side) {
    const Dual out = g_breve<Dual>(params, Dual(u, 1.0, 0.0), Dual(z, 0.0, 1.0), beta, v_hat,
                                   z_hat, side);
    return {out.v, out.du, out.dz};
}

LipschitzConstant lipschitz_constant(const MarketParams& p) {
    const double rd = p.discount_rate;
    const double rf = p.funding_rate_borrow;
    const double scale = std::min(p.volatility, 1.0);
    const double gap_borrow = std::abs(rd - p.repo_rate_borrow);
    const double gap_lend = std::abs(rd - p.repo_rate_lend);

    LipschitzConstant out;
    out.a1 = (rf + rd) / scale;
    out.a2 = std::max(rf + rd, gap_lend / scale);
    out.a3 = std::max((rf + std::max(rd, gap_borrow)) / scale, rf + rd);
    out.k = std::max(rf + std::max(rd, gap_borrow), gap_lend) / scale;
    return out;
}

bool CheckReport::necessary_passed() const {
    return std::all_of(items.begin(), items.end(),
                       [](const CheckItem& i) { return !i.necessary || i.passed; });
}

CheckReport check_assumptions(const MarketParams& p, double maturity) {
    CheckReport report;
    auto add = [&](std::string id, std::string description, double lhs, double rhs, bool passed,
                   bool necessary) {
        report.items.push_back({std::move(id), std::move(description), lhs, rhs, passed, necessary});
    };

    const double rf_lend = p.funding_rate_lend;
    const double rf_borrow = p.funding_rate_borrow;
    const double rd = p.discount_rate;

    add("a", "r_f+ <= r_f-", rf_lend, rf_borrow, rf_lend <= rf_borrow, true);
    const double lhs_b = std::max(rf_lend, rd);
    const double rhs_b = std::min(p.bond_return_investor, p.bond_return_counterparty);
    add("b", "max(r_f+, r_D) < min(mu_I, mu_C)", lhs_b, rhs_b, lhs_b < rhs_b, true);
    add("c", "r_r+ <= r_f- (normal regime)", p.repo_rate_lend, rf_borrow,
        p.repo_rate_lend <= rf_borrow, true);

    const bool d_low = p.repo_rate_lend <= rf_lend;
    const bool d_high = rf_lend <= p.repo_rate_borrow;
    add("d.1", "r_r+ <= r_f+ (sufficient, normal regime)", p.repo_rate_lend, rf_lend, d_low, false);
    add("d.2", "r_f+ <= r_r- (sufficient, normal regime)", rf_lend, p.repo_rate_borrow, d_high, false);

    const double t = maturity;
    if (!(t > 0.0)) {
        add("e.i", "maturity must be positive", t, 0.0, false, false);
        report.passed = false;
        return report;
    }
    const double rhs_i = 1.0 / (5.0 * std::sqrt(t * t * t));
    add("e.i", "r_f- < 1/(5 sqrt(T^3))", rf_borrow, rhs_i, rf_borrow < rhs_i, false);
    const double k = lipschitz_constant(p).k;
    const double rhs_ii = 1.0 / (5.0 * t);
    add("e.ii", "K < 1/(5T)", k, rhs_ii, k < rhs_ii, false);

    // lambda^I, lambda^C taken as the valuation-measure default intensities.
    const double h_i = std::max(0.0, p.bond_return_investor - rd);
    const double h_c = std::max(0.0, p.bond_return_counterparty - rd);
    const double rhs_iii = std::min(std::sqrt(h_i), std::sqrt(h_c)) / (5.0 * t);
    add("e.iii", "r_f- - r_D < min(sqrt(h_I^Q), sqrt(h_C^Q))/(5T)", rf_borrow - rd, rhs_iii,
        rf_borrow - rd < rhs_iii, false);

    report.passed = std::all_of(report.items.begin(), report.items.end(),
                                [](const CheckItem& i) { return i.passed; });
    return report;
}

}  // namespace rxva
