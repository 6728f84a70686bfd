#pragma once

#include "rxva/generators.hpp"
#include "rxva/market.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rxva {

/// Driver of a one-dimensional BSDE  -dU = g(t, U, Z) dt - Z dW.
class Driver {
public:
    virtual ~Driver() = default;
    [[nodiscard]] virtual double value(double t, double u, double z, int beta, double v_hat,
                                       double z_hat) const = 0;
    [[nodiscard]] virtual DriverPartials partials(double t, double u, double z, int beta,
                                                  double v_hat, double z_hat) const = 0;
};

/// Reduced XVA driver g-breve for one side.
class XvaDriver final : public Driver {
public:
    XvaDriver(MarketParams params, Side side);
    [[nodiscard]] double value(double t, double u, double z, int beta, double v_hat,
                               double z_hat) const override;
    [[nodiscard]] DriverPartials partials(double t, double u, double z, int beta, double v_hat,
                                          double z_hat) const override;

private:
    MarketParams params_;
    Side side_;
};

/// g = -rate * u: the Black-Scholes reference equation.
class LinearDriver final : public Driver {
public:
    explicit LinearDriver(double rate) : rate_(rate) {}
    [[nodiscard]] double value(double, double u, double, int, double, double) const override {
        return -rate_ * u;
    }
    [[nodiscard]] DriverPartials partials(double, double u, double, int, double,
                                          double) const override {
        return {-rate_ * u, -rate_, 0.0};
    }

private:
    double rate_;
};

class ZeroDriver final : public Driver {
public:
    [[nodiscard]] double value(double, double, double, int, double, double) const override {
        return 0.0;
    }
    [[nodiscard]] DriverPartials partials(double, double, double, int, double,
                                          double) const override {
        return {};
    }
};

/// Black-Scholes value and Brownian loading at every (path, grid point).
struct ReferenceGrid {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::vector<double> v_hat;  // n_paths * (n_steps + 1)
    std::vector<double> z_hat;  // n_paths * (n_steps + 1)

    [[nodiscard]] double v(std::size_t path, std::size_t step) const {
        return v_hat[path * (n_steps + 1) + step];
    }
    [[nodiscard]] double z(std::size_t path, std::size_t step) const {
        return z_hat[path * (n_steps + 1) + step];
    }
};

[[nodiscard]] ReferenceGrid compute_reference(const MarketParams& params, const ClaimSpec& claim,
                                              const PathBundle& paths, unsigned threads = 0);

struct ReducedProblem {
    std::shared_ptr<const Driver> driver;
    std::function<double(double)> terminal;  // of the terminal stock price
    const PathBundle* paths = nullptr;
    const ReferenceGrid* reference = nullptr;
    double strike = 1.0;  // regression coordinate is log(S / strike)
};

/// Terminal identically zero (reduced XVA problem).
[[nodiscard]] std::function<double(double)> zero_terminal();

enum class Backend { kRegression, kShooting };
[[nodiscard]] const char* to_string(Backend backend);
[[nodiscard]] Backend backend_from_string(const std::string& text);

struct ShootingConfig {
    std::size_t hidden_layers = 2;
    std::size_t width = 16;
    double learning_rate = 1e-3;
    std::size_t iterations = 5000;
    std::size_t batch_size = 256;
    /// Paths used for the final shooting refinement of u0; 0 = all paths.
    std::size_t eval_paths = 0;
};

struct SolverConfig {
    std::size_t n_steps = 50;
    std::size_t n_paths = 100000;
    Backend backend = Backend::kRegression;
    int basis_degree = 3;
    ShootingConfig shooting;
    std::uint64_t seed = 20240101;
    double clamp_quantile = 1e-4;
    unsigned threads = 0;

    void validate() const;
};

struct SolverDiagnostics {
    std::vector<double> r2_u;  // per step, regression backend
    std::vector<double> r2_z;
    std::size_t clamped_targets = 0;
    std::size_t fallback_buckets = 0;  // buckets solved with a constant basis
    double terminal_residual_mean = 0.0;  // shooting backend
    double terminal_residual_variance = 0.0;
    double final_loss = 0.0;
    std::size_t iterations = 0;
};

struct SolverOutput {
    /// u0 and its Monte-Carlo standard error, indexed by the initial regime.
    std::array<std::optional<double>, 2> u0;
    std::array<std::optional<double>, 2> u0_std_error;
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::vector<double> u_paths;  // n_paths * (n_steps + 1)
    std::vector<double> z_paths;  // n_paths * n_steps
    SolverDiagnostics diagnostics;

    /// u0 of the lowest initial regime present.
    [[nodiscard]] double primary_u0() const;
    [[nodiscard]] double primary_std_error() const;
    [[nodiscard]] double u(std::size_t path, std::size_t step) const {
        return u_paths[path * (n_steps + 1) + step];
    }
    [[nodiscard]] double z(std::size_t path, std::size_t step) const {
        return z_paths[path * n_steps + step];
    }
};

/// Backward Euler with least-squares conditional expectations; separate
/// polynomial coefficients in log-moneyness for each regime value.
[[nodiscard]] SolverOutput solve_regression(const ReducedProblem& problem, const SolverConfig& config);

/// Forward Euler from a trainable u0 with z given by a small network,
/// trained to hit the terminal condition; u0 is then re-shot on the full
/// path set with the network held fixed.
[[nodiscard]] SolverOutput solve_shooting(const ReducedProblem& problem, const SolverConfig& config);

[[nodiscard]] SolverOutput solve(const ReducedProblem& problem, const SolverConfig& config);

/// XVA, z-tilde and the two jump loadings on the grid, per path.
struct FullSolution {
    std::size_t n_paths = 0;
    std::size_t n_steps = 0;
    std::vector<double> xva;             // n_paths * (n_steps + 1)
    std::vector<double> z_tilde;         // n_paths * n_steps
    std::vector<double> z_investor;      // n_paths * (n_steps + 1)
    std::vector<double> z_counterparty;  // n_paths * (n_steps + 1)

    [[nodiscard]] double xva_at(std::size_t path, std::size_t step) const {
        return xva[path * (n_steps + 1) + step];
    }
};

/// Undoes the reduction: before the first default the reduced solution is
/// the XVA; from the default on it is frozen at the closeout adjustment.
/// The closeout uses the reference value at the first grid point at or
/// after the default time.
[[nodiscard]] FullSolution expand_full(const SolverOutput& output, const MarketParams& params,
                                       const ReferenceGrid& reference,
                                       const std::vector<DefaultTimes>& default_times,
                                       double maturity);

}  // namespace rxva
