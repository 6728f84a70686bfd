#include "rxva/bsde_solver.hpp"

#include "rxva/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rxva {

XvaDriver::XvaDriver(MarketParams params, Side side) : params_(std::move(params)), side_(side) {
    params_.validate();
    (void)default_intensities_q(params_);  // rejects negative intensities up front
}

double XvaDriver::value(double t, double u, double z, int beta, double v_hat, double z_hat) const {
    return eval_g_breve(params_, t, u, z, beta, v_hat, z_hat, side_);
}

DriverPartials XvaDriver::partials(double t, double u, double z, int beta, double v_hat,
                                   double z_hat) const {
    return eval_g_breve_partials(params_, t, u, z, beta, v_hat, z_hat, side_);
}

std::function<double(double)> zero_terminal() {
    return [](double) { return 0.0; };
}

const char* to_string(Backend backend) {
    return backend == Backend::kRegression ? "regression" : "shooting";
}

Backend backend_from_string(const std::string& text) {
    if (text == "regression") return Backend::kRegression;
    if (text == "shooting") return Backend::kShooting;
    throw std::invalid_argument("unknown solver backend '" + text +
                                "' (expected regression or shooting)");
}

void SolverConfig::validate() const {
    if (n_steps < 1) throw std::invalid_argument("solver: n_steps must be >= 1");
    if (n_paths < 1) throw std::invalid_argument("solver: n_paths must be >= 1");
    if (basis_degree < 0) throw std::invalid_argument("solver: basis_degree must be >= 0");
    if (backend == Backend::kRegression &&
        n_paths < 10 * static_cast<std::size_t>(basis_degree + 1))
        throw std::invalid_argument("solver: regression needs n_paths >= 10 x basis dimension");
    if (!(clamp_quantile >= 0.0 && clamp_quantile < 0.5))
        throw std::invalid_argument("solver: clamp_quantile must lie in [0, 0.5)");
    if (shooting.width < 1 || shooting.batch_size < 1)
        throw std::invalid_argument("solver: shooting width and batch size must be >= 1");
    if (!(shooting.learning_rate > 0.0))
        throw std::invalid_argument("solver: shooting learning rate must be positive");
}

double SolverOutput::primary_u0() const {
    for (const auto& v : u0)
        if (v) return *v;
    throw std::logic_error("solver output has no u0");
}

double SolverOutput::primary_std_error() const {
    for (std::size_t g = 0; g < 2; ++g)
        if (u0[g]) return u0_std_error[g].value_or(0.0);
    throw std::logic_error("solver output has no u0");
}

ReferenceGrid compute_reference(const MarketParams& params, const ClaimSpec& claim,
                                const PathBundle& paths, unsigned threads) {
    ReferenceGrid ref;
    ref.n_paths = paths.n_paths;
    ref.n_steps = paths.n_steps;
    const std::size_t width = paths.n_steps + 1;
    ref.v_hat.resize(paths.n_paths * width);
    ref.z_hat.resize(paths.n_paths * width);
    parallel_chunks(paths.n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p)
            for (std::size_t i = 0; i < width; ++i) {
                const auto bs = bs_price_delta(params, claim, paths.time(i), paths.stock_at(p, i));
                ref.v_hat[p * width + i] = bs.value;
                ref.z_hat[p * width + i] = bs.z_hat;
            }
    });
    return ref;
}

namespace {

void check_problem(const ReducedProblem& problem) {
    if (!problem.driver) throw std::invalid_argument("reduced problem has no driver");
    if (!problem.terminal) throw std::invalid_argument("reduced problem has no terminal function");
    if (!problem.paths || !problem.reference)
        throw std::invalid_argument("reduced problem needs paths and a reference grid");
    if (problem.reference->n_paths != problem.paths->n_paths ||
        problem.reference->n_steps != problem.paths->n_steps)
        throw std::invalid_argument("reference grid does not match the path bundle");
    if (!(problem.strike > 0.0)) throw std::invalid_argument("reduced problem strike must be > 0");
}

// Winsorizes in place at the q and 1-q empirical quantiles; returns the
// number of values moved.
std::size_t winsorize(std::vector<double>& values, double q) {
    if (q <= 0.0 || values.size() < 3) return 0;
    std::vector<double> sorted(values);
    const std::size_t last = sorted.size() - 1;
    const auto lo_rank = static_cast<std::size_t>(std::floor(q * static_cast<double>(last)));
    const auto hi_rank = static_cast<std::size_t>(std::ceil((1.0 - q) * static_cast<double>(last)));
    std::nth_element(sorted.begin(), sorted.begin() + lo_rank, sorted.end());
    const double lo = sorted[lo_rank];
    std::nth_element(sorted.begin(), sorted.begin() + hi_rank, sorted.end());
    const double hi = sorted[hi_rank];
    std::size_t moved = 0;
    for (double& v : values) {
        if (v < lo) {
            v = lo;
            ++moved;
        } else if (v > hi) {
            v = hi;
            ++moved;
        }
    }
    return moved;
}

std::string describe_point(std::size_t step, std::size_t path, double t, double u, double z,
                           int beta, double v_hat, double z_hat) {
    std::ostringstream s;
    s << "non-finite driver value at step " << step << ", path " << path << " (t=" << t
      << ", u=" << u << ", z=" << z << ", beta=" << beta << ", v_hat=" << v_hat
      << ", z_hat=" << z_hat << ")";
    return s.str();
}

// Per-chunk sufficient statistics for one regression per regime bucket.
struct BucketStats {
    Eigen::MatrixXd gram;
    Eigen::VectorXd rhs;
    double count = 0.0;
    double sum_y = 0.0;
    double sum_yy = 0.0;

    explicit BucketStats(int dim = 0)
        : gram(Eigen::MatrixXd::Zero(dim, dim)), rhs(Eigen::VectorXd::Zero(dim)) {}

    BucketStats& operator+=(const BucketStats& o) {
        gram += o.gram;
        rhs += o.rhs;
        count += o.count;
        sum_y += o.sum_y;
        sum_yy += o.sum_yy;
        return *this;
    }
};

inline void fill_basis(double x, int dim, double* out) {
    double power = 1.0;
    for (int k = 0; k < dim; ++k) {
        out[k] = power;
        power *= x;
    }
}

class StepRegression {
public:
    StepRegression(const std::vector<double>& x, const std::vector<std::uint8_t>& bucket, int dim,
                   unsigned threads, std::size_t step)
        : x_(x), bucket_(bucket), dim_(dim), threads_(threads), step_(step) {}

    // Fits target on the basis separately per bucket. Returns fitted values
    // and R^2 pooled over buckets.
    double fit(const std::vector<double>& target, std::vector<double>& fitted,
               std::size_t& fallback_buckets) {
        const std::size_t n = x_.size();
        const std::size_t chunks = chunk_count(n);
        std::vector<std::array<BucketStats, 2>> partial(chunks, {BucketStats(dim_), BucketStats(dim_)});
        parallel_chunks(n, threads_, [&](std::size_t c, std::size_t begin, std::size_t end) {
            std::vector<double> phi(static_cast<std::size_t>(dim_));
            for (std::size_t p = begin; p < end; ++p) {
                auto& s = partial[c][bucket_[p]];
                fill_basis(x_[p], dim_, phi.data());
                const Eigen::Map<const Eigen::VectorXd> f(phi.data(), dim_);
                s.gram.selfadjointView<Eigen::Lower>().rankUpdate(f);
                s.rhs += target[p] * f;
                s.count += 1.0;
                s.sum_y += target[p];
                s.sum_yy += target[p] * target[p];
            }
        });
        std::array<BucketStats, 2> total{BucketStats(dim_), BucketStats(dim_)};
        for (const auto& part : partial)
            for (int g = 0; g < 2; ++g) total[g] += part[g];

        std::array<Eigen::VectorXd, 2> coef;
        for (int g = 0; g < 2; ++g) {
            auto& s = total[g];
            if (s.count == 0.0) continue;
            s.gram.triangularView<Eigen::StrictlyUpper>() = s.gram.transpose();
            int use_dim = dim_;
            if (s.count < 10.0 * dim_) {
                use_dim = 1;
                ++fallback_buckets;
            }
            const Eigen::MatrixXd a = s.gram.topLeftCorner(use_dim, use_dim);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
            if (qr.rank() < use_dim) {
                std::ostringstream msg;
                msg << "rank-deficient regression at step " << step_ << " (regime " << g
                    << ", rank " << qr.rank() << " of " << use_dim << ")";
                throw std::runtime_error(msg.str());
            }
            Eigen::VectorXd c = Eigen::VectorXd::Zero(dim_);
            c.head(use_dim) = qr.solve(s.rhs.head(use_dim));
            coef[g] = c;
        }

        fitted.resize(n);
        std::vector<std::array<double, 2>> ssr(chunks, {0.0, 0.0});
        parallel_chunks(n, threads_, [&](std::size_t c, std::size_t begin, std::size_t end) {
            std::vector<double> phi(static_cast<std::size_t>(dim_));
            for (std::size_t p = begin; p < end; ++p) {
                fill_basis(x_[p], dim_, phi.data());
                const Eigen::Map<const Eigen::VectorXd> f(phi.data(), dim_);
                fitted[p] = f.dot(coef[bucket_[p]]);
                const double r = target[p] - fitted[p];
                ssr[c][bucket_[p]] += r * r;
            }
        });
        double ss_res = 0.0, ss_tot = 0.0;
        for (const auto& r : ssr) ss_res += r[0] + r[1];
        for (const auto& s : total)
            if (s.count > 0.0) ss_tot += s.sum_yy - s.sum_y * s.sum_y / s.count;
        return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }

private:
    const std::vector<double>& x_;
    const std::vector<std::uint8_t>& bucket_;
    int dim_;
    unsigned threads_;
    std::size_t step_;
};

// Sums per-chunk values in chunk order.
template <class F>
std::array<double, 2> ordered_group_sum(std::size_t n, unsigned threads,
                                        const std::vector<std::uint8_t>& group, F&& value) {
    const std::size_t chunks = chunk_count(n);
    std::vector<std::array<double, 2>> partial(chunks, {0.0, 0.0});
    parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) partial[c][group[p]] += value(p);
    });
    std::array<double, 2> total{0.0, 0.0};
    for (const auto& part : partial) {
        total[0] += part[0];
        total[1] += part[1];
    }
    return total;
}

}  // namespace

SolverOutput solve_regression(const ReducedProblem& problem, const SolverConfig& config) {
    config.validate();
    check_problem(problem);
    const PathBundle& b = *problem.paths;
    const ReferenceGrid& ref = *problem.reference;
    const std::size_t n_paths = b.n_paths;
    const std::size_t n = b.n_steps;
    const double dt = b.dt();
    const int dim = config.basis_degree + 1;
    const unsigned threads = config.threads;
    if (n_paths < 10 * static_cast<std::size_t>(dim))
        throw std::invalid_argument("solve_regression: fewer than 10 x basis dimension paths");

    SolverOutput out;
    out.n_paths = n_paths;
    out.n_steps = n;
    out.u_paths.assign(n_paths * (n + 1), 0.0);
    out.z_paths.assign(n_paths * n, 0.0);
    out.diagnostics.r2_u.assign(n, 1.0);
    out.diagnostics.r2_z.assign(n, 1.0);

    std::vector<double> u_next(n_paths), pathwise(n_paths), target_z(n_paths), target_u(n_paths),
        z_fit(n_paths), u_fit(n_paths), x(n_paths);
    std::vector<std::uint8_t> bucket(n_paths);

    for (std::size_t p = 0; p < n_paths; ++p) {
        u_next[p] = problem.terminal(b.stock_at(p, n));
        pathwise[p] = u_next[p];
        out.u_paths[p * (n + 1) + n] = u_next[p];
    }

    const Driver& driver = *problem.driver;
    auto driver_step = [&](std::size_t i, std::size_t begin, std::size_t end) {
        const double t = b.time(i);
        for (std::size_t p = begin; p < end; ++p) {
            const int beta = b.beta(p, i);
            const double g = driver.value(t, u_next[p], z_fit[p], beta, ref.v(p, i), ref.z(p, i));
            if (!std::isfinite(g))
                throw std::runtime_error(
                    describe_point(i, p, t, u_next[p], z_fit[p], beta, ref.v(p, i), ref.z(p, i)));
            target_u[p] = u_next[p] + g * dt;
            pathwise[p] += g * dt;
        }
    };

    for (std::size_t step = n; step-- > 0;) {
        for (std::size_t p = 0; p < n_paths; ++p) {
            target_z[p] = u_next[p] * b.dw(p, step) / dt;
            bucket[p] = static_cast<std::uint8_t>(b.beta(p, step));
        }

        if (step == 0) {
            // Every path shares the same state at t = 0 up to the regime, so
            // the conditional expectations reduce to per-regime means.
            const auto count = ordered_group_sum(n_paths, threads, bucket, [](std::size_t) { return 1.0; });
            const auto sum_z = ordered_group_sum(n_paths, threads, bucket,
                                                 [&](std::size_t p) { return target_z[p]; });
            std::array<double, 2> z0{0.0, 0.0};
            for (int g = 0; g < 2; ++g)
                if (count[g] > 0.0) z0[g] = sum_z[g] / count[g];
            for (std::size_t p = 0; p < n_paths; ++p) z_fit[p] = z0[bucket[p]];
            parallel_chunks(n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
                driver_step(0, begin, end);
            });
            const auto sum_u = ordered_group_sum(n_paths, threads, bucket,
                                                 [&](std::size_t p) { return target_u[p]; });
            const auto sum_pw = ordered_group_sum(n_paths, threads, bucket,
                                                  [&](std::size_t p) { return pathwise[p]; });
            std::array<double, 2> mean_pw{0.0, 0.0};
            for (int g = 0; g < 2; ++g)
                if (count[g] > 0.0) mean_pw[g] = sum_pw[g] / count[g];
            const auto sq_pw = ordered_group_sum(n_paths, threads, bucket, [&](std::size_t p) {
                const double d = pathwise[p] - mean_pw[bucket[p]];
                return d * d;
            });
            for (int g = 0; g < 2; ++g) {
                if (count[g] == 0.0) continue;
                out.u0[g] = sum_u[g] / count[g];
                const double var = count[g] > 1.0 ? sq_pw[g] / (count[g] - 1.0) : 0.0;
                out.u0_std_error[g] = std::sqrt(var / count[g]);
            }
            for (std::size_t p = 0; p < n_paths; ++p) {
                out.u_paths[p * (n + 1)] = *out.u0[bucket[p]];
                out.z_paths[p * n] = z_fit[p];
            }
            break;
        }

        // Standardized log-moneyness keeps the normal equations well scaled.
        const auto moments = ordered_group_sum(n_paths, threads, std::vector<std::uint8_t>(n_paths, 0),
                                               [&](std::size_t p) {
                                                   x[p] = std::log(b.stock_at(p, step) / problem.strike);
                                                   return x[p];
                                               });
        const double mean_x = moments[0] / static_cast<double>(n_paths);
        const auto spread = ordered_group_sum(n_paths, threads, std::vector<std::uint8_t>(n_paths, 0),
                                              [&](std::size_t p) {
                                                  const double d = x[p] - mean_x;
                                                  return d * d;
                                              });
        double sd_x = std::sqrt(spread[0] / static_cast<double>(n_paths));
        if (!(sd_x > 0.0)) sd_x = 1.0;
        for (std::size_t p = 0; p < n_paths; ++p) x[p] = (x[p] - mean_x) / sd_x;

        StepRegression regression(x, bucket, dim, threads, step);
        out.diagnostics.clamped_targets += winsorize(target_z, config.clamp_quantile);
        out.diagnostics.r2_z[step] = regression.fit(target_z, z_fit, out.diagnostics.fallback_buckets);

        parallel_chunks(n_paths, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            driver_step(step, begin, end);
        });
        out.diagnostics.clamped_targets += winsorize(target_u, config.clamp_quantile);
        out.diagnostics.r2_u[step] = regression.fit(target_u, u_fit, out.diagnostics.fallback_buckets);

        for (std::size_t p = 0; p < n_paths; ++p) {
            out.u_paths[p * (n + 1) + step] = u_fit[p];
            out.z_paths[p * n + step] = z_fit[p];
        }
        u_next.swap(u_fit);
    }
    return out;
}

SolverOutput solve(const ReducedProblem& problem, const SolverConfig& config) {
    return config.backend == Backend::kRegression ? solve_regression(problem, config)
                                                  : solve_shooting(problem, config);
}

FullSolution expand_full(const SolverOutput& output, const MarketParams& params,
                         const ReferenceGrid& reference,
                         const std::vector<DefaultTimes>& default_times, double maturity) {
    if (output.n_paths != reference.n_paths || output.n_steps != reference.n_steps ||
        default_times.size() != output.n_paths)
        throw std::invalid_argument("expand_full: solver output, reference grid and default times "
                                    "are on different grids");
    if (!(maturity > 0.0)) throw std::invalid_argument("expand_full: maturity must be positive");

    const std::size_t n = output.n_steps;
    const double dt = maturity / static_cast<double>(n);
    FullSolution full;
    full.n_paths = output.n_paths;
    full.n_steps = n;
    full.xva.resize(output.n_paths * (n + 1));
    full.z_tilde.resize(output.n_paths * n);
    full.z_investor.resize(output.n_paths * (n + 1));
    full.z_counterparty.resize(output.n_paths * (n + 1));

    for (std::size_t p = 0; p < output.n_paths; ++p) {
        const DefaultTimes& d = default_times[p];
        const double tau = std::min(d.first(), maturity);
        const bool investor_first = d.investor < std::min(d.counterparty, maturity);
        const bool counterparty_first = d.counterparty < std::min(d.investor, maturity);

        double frozen = 0.0;
        if (investor_first || counterparty_first) {
            auto k = static_cast<std::size_t>(std::ceil(tau / dt - 1e-12));
            k = std::min(k, n);
            const auto theta = theta_tilde(params, reference.v(p, k));
            frozen = investor_first ? theta.investor : theta.counterparty;
        }

        for (std::size_t i = 0; i <= n; ++i) {
            const double t = dt * static_cast<double>(i);
            const double u = output.u(p, i);
            const bool alive = t < tau;
            const std::size_t at = p * (n + 1) + i;
            full.xva[at] = (alive || !(investor_first || counterparty_first)) ? u : frozen;
            const auto theta = theta_tilde(params, reference.v(p, i));
            const bool up_to_default = t <= tau;
            full.z_investor[at] = up_to_default ? theta.investor - u : 0.0;
            full.z_counterparty[at] = up_to_default ? theta.counterparty - u : 0.0;
            if (i < n) full.z_tilde[p * n + i] = alive ? output.z(p, i) : 0.0;
        }
    }
    return full;
}

}  // namespace rxva
