#include "rxva/regime.hpp"

#include "rxva/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rxva {

void RegimeParams::validate() const {
    if (!(rate_normal > 0.0) || !std::isfinite(rate_normal))
        throw std::invalid_argument("regime: rate_normal must be positive, got " +
                                    std::to_string(rate_normal));
    if (!(rate_crisis > 0.0) || !std::isfinite(rate_crisis))
        throw std::invalid_argument("regime: rate_crisis must be positive, got " +
                                    std::to_string(rate_crisis));
    if (initial_state != 0 && initial_state != 1)
        throw std::invalid_argument("regime: initial_state must be 0 or 1");
}

RegimeParams RegimeParams::from_means(double mean_normal_years, double mean_crisis_years,
                                      int initial_state) {
    if (!(mean_normal_years > 0.0) || !(mean_crisis_years > 0.0))
        throw std::invalid_argument("regime: mean holding times must be positive");
    RegimeParams p{1.0 / mean_normal_years, 1.0 / mean_crisis_years, initial_state};
    p.validate();
    return p;
}

RegimePath simulate_regime_path(const RegimeParams& params, double horizon, std::uint64_t seed,
                                std::uint64_t path_index) {
    params.validate();
    if (!(horizon >= 0.0)) throw std::invalid_argument("regime: horizon must be >= 0");

    RegimePath path;
    path.horizon = horizon;
    path.initial_state = params.initial_state;
    if (horizon == 0.0) return path;

    PathRng rng(seed, Stream::kRegime, path_index);
    int state = params.initial_state;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(state == 0 ? params.rate_normal : params.rate_crisis);
        if (t > horizon) break;
        path.jump_times.push_back(t);
        state ^= 1;
    }
    return path;
}

namespace {
void check_time(const RegimePath& path, double t) {
    if (!(t >= 0.0 && t <= path.horizon))
        throw std::out_of_range("regime: t = " + std::to_string(t) + " outside [0, " +
                                std::to_string(path.horizon) + "]");
}
}  // namespace

std::size_t jump_count_at(const RegimePath& path, double t) {
    check_time(path, t);
    return static_cast<std::size_t>(
        std::upper_bound(path.jump_times.begin(), path.jump_times.end(), t) -
        path.jump_times.begin());
}

int state_at(const RegimePath& path, double t) {
    return path.initial_state ^ static_cast<int>(jump_count_at(path, t) & 1u);
}

std::size_t upward_jump_count_at(const RegimePath& path, double t) {
    const std::size_t jumps = jump_count_at(path, t);
    // From state 0 the odd-numbered jumps go up; from state 1 the even ones.
    return path.initial_state == 0 ? (jumps + 1) / 2 : jumps / 2;
}

double merged_rate(const RegimeParams& params) {
    params.validate();
    return params.rate_normal * params.rate_crisis / (params.rate_normal + params.rate_crisis);
}

PmfValue upward_jump_pmf(const RegimeParams& params, double t, unsigned n) {
    params.validate();
    if (params.initial_state != 0)
        throw std::invalid_argument("upward_jump_pmf: formulas assume a start in the normal state");
    if (!(t >= 0.0)) throw std::invalid_argument("upward_jump_pmf: t must be >= 0");

    const double lu = params.rate_normal;
    const double lam = merged_rate(params);
    const double gap = lam - lu;
    if (std::abs(gap) <= 1e-14 * lu)
        throw std::domain_error(
            "upward_jump_pmf: merged rate equals rate_normal (formula singular); use the "
            "Monte-Carlo estimate from validate_upward_jump_pmf instead");

    double raw = 0.0;
    if (n == 0) {
        raw = std::exp(-lu * t);
    } else if (n == 1) {
        raw = lu / gap * (std::exp(-lu * t) - std::exp(-lam * t));
    } else {
        // P(n = m + 1) for m >= 1. Powers of (lam - lu) alternate in sign since
        // lam < lu; magnitudes and factorials are carried in logs.
        const unsigned m = n - 1;
        const double log_abs_gap = std::log(std::abs(gap));
        const double gap_sign = gap < 0.0 ? -1.0 : 1.0;
        auto signed_pow_gap = [&](int k) {  // sign of gap^k
            return (k % 2 == 0) ? 1.0 : gap_sign;
        };
        const double log_t = t > 0.0 ? std::log(t) : -INFINITY;
        const double log_lam = std::log(lam);
        const double log_lu = std::log(lu);

        const double first = signed_pow_gap(static_cast<int>(m) + 1) *
                             std::exp(log_lu + m * log_lam - lu * t -
                                      (m + 1) * log_abs_gap);
        double middle = 0.0;
        for (unsigned k = 0; k < m; ++k) {
            double inner = 0.0;
            for (unsigned j = 0; j <= k; ++j) {
                const double log_tj = j == 0 ? 0.0 : j * log_t;
                inner += std::exp(log_tj - std::lgamma(j + 1.0) - (k - j + 1.0) * log_lam);
            }
            const int power = static_cast<int>(m - k + 1);
            middle += signed_pow_gap(power) *
                      std::exp(2.0 * log_lu + m * log_lam - lam * t - power * log_abs_gap) * inner;
        }
        double poisson_tail = 0.0;
        for (unsigned k = 0; k <= m; ++k) {
            const double log_term = k == 0 ? 0.0 : k * (log_t + log_lam);
            poisson_tail += std::exp(log_term - std::lgamma(k + 1.0));
        }
        const double last = lu * std::exp(-lam * t) / gap * poisson_tail;
        raw = first - middle - last;
    }

    PmfValue out;
    out.raw = raw;
    out.probability = std::clamp(raw, 0.0, 1.0);
    out.clamped = out.probability != raw;
    return out;
}

double compensator_at(const RegimeParams& params, const RegimePath& path, double t,
                      CompensatorForm form) {
    params.validate();
    check_time(path, t);
    if (form == CompensatorForm::kMarkov) {
        double total = 0.0;
        double prev = 0.0;
        int state = path.initial_state;
        for (double jump : path.jump_times) {
            if (jump > t) break;
            total += (state == 0 ? params.rate_normal : -params.rate_crisis) * (jump - prev);
            prev = jump;
            state ^= 1;
        }
        total += (state == 0 ? params.rate_normal : -params.rate_crisis) * (t - prev);
        return total;
    }

    if (path.initial_state != 0)
        throw std::invalid_argument("compensator_at: intensity form assumes a start in state 0");
    const double lam = merged_rate(params);
    const double first_jump = path.jump_times.empty() ? INFINITY : path.jump_times.front();
    const double before = std::min(t, first_jump);
    const double after = std::max(0.0, t - first_jump);
    return params.rate_normal * before + lam * after + lam * t;
}

double PmfValidationRow::z_score() const {
    const double diff = empirical - formula;
    if (std_error > 0.0) return diff / std_error;
    return diff == 0.0 ? 0.0 : INFINITY;
}

std::vector<PmfValidationRow> validate_upward_jump_pmf(const RegimeParams& params, double t,
                                                       unsigned n_max, std::size_t n_paths,
                                                       std::uint64_t seed) {
    if (n_paths == 0) throw std::invalid_argument("validate_upward_jump_pmf: n_paths must be > 0");
    std::vector<std::size_t> counts(n_max + 1, 0);
    for (std::size_t p = 0; p < n_paths; ++p) {
        const auto path = simulate_regime_path(params, t, seed, p);
        const std::size_t ups = upward_jump_count_at(path, t);
        if (ups <= n_max) ++counts[ups];
    }
    std::vector<PmfValidationRow> rows;
    for (unsigned n = 0; n <= n_max; ++n) {
        const double freq = static_cast<double>(counts[n]) / static_cast<double>(n_paths);
        PmfValidationRow row;
        row.n = n;
        row.formula = upward_jump_pmf(params, t, n).probability;
        row.empirical = freq;
        // Binomial standard error at the formula value.
        row.std_error = std::sqrt(row.formula * (1.0 - row.formula) / static_cast<double>(n_paths));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace rxva
