#pragma once

#include <cstdint>
#include <vector>

namespace rxva {

/// Two-state alternating renewal process: 0 = normal market, 1 = crisis.
/// Holding times are exponential with the given per-year RATES; a mean
/// holding time in years converts via rate = 1/mean.
struct RegimeParams {
    double rate_normal = 1.0 / 1.39;
    double rate_crisis = 1.0 / 0.99;
    int initial_state = 0;

    void validate() const;
    [[nodiscard]] static RegimeParams from_means(double mean_normal_years, double mean_crisis_years,
                                                 int initial_state = 0);
};

/// One realized trajectory: the jump times T_1 < T_2 < ... within [0, horizon].
struct RegimePath {
    std::vector<double> jump_times;
    double horizon = 0.0;
    int initial_state = 0;
};

[[nodiscard]] RegimePath simulate_regime_path(const RegimeParams& params, double horizon,
                                              std::uint64_t seed, std::uint64_t path_index = 0);

// Both evaluators are right-continuous: the state flips AT a jump time.
[[nodiscard]] int state_at(const RegimePath& path, double t);
[[nodiscard]] std::size_t jump_count_at(const RegimePath& path, double t);

/// Rate of the merged inter-arrival law, rate_normal*rate_crisis/(rate_normal+rate_crisis).
[[nodiscard]] double merged_rate(const RegimeParams& params);

struct PmfValue {
    double probability = 0.0;
    bool clamped = false;  // raw formula value fell outside [0, 1]
    double raw = 0.0;
};

/// Closed-form law of the number of upward (normal -> crisis) jumps by time
/// t, starting from the normal state. The n = 0 case is exact; the n >= 1
/// expressions assume the downward jumps form a Poisson process with the
/// merged rate and disagree with simulation (see validate_upward_jump_pmf).
[[nodiscard]] PmfValue upward_jump_pmf(const RegimeParams& params, double t, unsigned n);

enum class CompensatorForm {
    // lambda_U * 1{t < T1} + lambda * 1{T1 <= t}, plus the constant lambda
    // for the downward part.
    kUpwardIntensityPlusMerged,
    // Integral of rate_normal * 1{beta = 0} - rate_crisis * 1{beta = 1}: the
    // Markov-chain compensator that makes beta - Lambda a martingale.
    kMarkov,
};

[[nodiscard]] double compensator_at(const RegimeParams& params, const RegimePath& path, double t,
                                    CompensatorForm form = CompensatorForm::kUpwardIntensityPlusMerged);

struct PmfValidationRow {
    unsigned n = 0;
    double formula = 0.0;
    double empirical = 0.0;
    double std_error = 0.0;
    [[nodiscard]] double z_score() const;
};

/// Monte-Carlo frequencies of upward-jump counts next to the closed forms.
[[nodiscard]] std::vector<PmfValidationRow> validate_upward_jump_pmf(const RegimeParams& params,
                                                                     double t, unsigned n_max,
                                                                     std::size_t n_paths,
                                                                     std::uint64_t seed);

[[nodiscard]] std::size_t upward_jump_count_at(const RegimePath& path, double t);

}  // namespace rxva
