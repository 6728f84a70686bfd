#include "rxva/bsde_solver.hpp"

#include "rxva/parallel.hpp"
#include "rxva/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rxva {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// Fully connected tanh network R^3 -> R.
struct Network {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;

    Network(std::size_t hidden_layers, std::size_t width, std::uint64_t seed) {
        const auto w = static_cast<Eigen::Index>(width);
        Eigen::Index fan_in = 3;
        PathRng rng(seed, Stream::kNetworkInit, 0);
        for (std::size_t l = 0; l < hidden_layers; ++l) {
            const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + w));
            Matrix m(w, fan_in);
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = bound * (2.0 * rng.uniform() - 1.0);
            weights.push_back(std::move(m));
            biases.push_back(Vector::Zero(w));
            fan_in = w;
        }
        // Zero output layer: training starts from z = 0.
        weights.push_back(Matrix::Zero(1, fan_in));
        biases.push_back(Vector::Zero(1));
    }

    [[nodiscard]] std::size_t layers() const { return weights.size(); }

    // Forward pass on a batch (columns). activations[0] is the input,
    // activations[l] the output of hidden layer l.
    RowVector forward(const Matrix& input, std::vector<Matrix>& activations) const {
        activations.resize(layers());
        activations[0] = input;
        for (std::size_t l = 0; l + 1 < layers(); ++l) {
            Matrix pre = weights[l] * activations[l];
            pre.colwise() += biases[l];
            activations[l + 1] = pre.array().tanh().matrix();
        }
        RowVector out = weights.back() * activations.back();
        out.array() += biases.back()(0);
        return out;
    }
};

struct Gradient {
    std::vector<Matrix> weights;
    std::vector<Vector> biases;
    std::array<double, 2> u0{0.0, 0.0};

    explicit Gradient(const Network& net) {
        for (std::size_t l = 0; l < net.layers(); ++l) {
            weights.push_back(Matrix::Zero(net.weights[l].rows(), net.weights[l].cols()));
            biases.push_back(Vector::Zero(net.biases[l].size()));
        }
    }
    void clear() {
        for (auto& m : weights) m.setZero();
        for (auto& b : biases) b.setZero();
        u0 = {0.0, 0.0};
    }
};

class Adam {
public:
    explicit Adam(const Network& net, double lr) : lr_(lr), m_(net), v_(net) {}

    void step(Network& net, std::array<double, 2>& u0, const Gradient& g) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
            m = kBeta1 * m + (1.0 - kBeta1) * grad;
            v = kBeta2 * v + (1.0 - kBeta2) * grad.cwiseProduct(grad);
            param.array() -= lr_ * (m.array() / c1) / ((v.array() / c2).sqrt() + kEps);
        };
        for (std::size_t l = 0; l < net.layers(); ++l) {
            update(net.weights[l], g.weights[l], m_.weights[l], v_.weights[l]);
            update(net.biases[l], g.biases[l], m_.biases[l], v_.biases[l]);
        }
        for (int k = 0; k < 2; ++k) {
            m_.u0[k] = kBeta1 * m_.u0[k] + (1.0 - kBeta1) * g.u0[k];
            v_.u0[k] = kBeta2 * v_.u0[k] + (1.0 - kBeta2) * g.u0[k] * g.u0[k];
            u0[k] -= lr_ * (m_.u0[k] / c1) / (std::sqrt(v_.u0[k] / c2) + kEps);
        }
    }

private:
    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEps = 1e-8;
    double lr_;
    std::size_t t_ = 0;
    Gradient m_;
    Gradient v_;
};

struct Features {
    double maturity = 1.0;
    double strike = 1.0;
    double x_scale = 1.0;

    void fill(Matrix& input, Eigen::Index col, double t, double stock, int beta) const {
        input(0, col) = t / maturity;
        input(1, col) = std::log(stock / strike) / x_scale;
        input(2, col) = static_cast<double>(beta);
    }
};

std::string non_finite(std::size_t step, std::size_t path, double u, double z) {
    std::ostringstream s;
    s << "shooting: non-finite state at step " << step << ", path " << path << " (u=" << u
      << ", z=" << z << ")";
    return s.str();
}

}  // namespace

SolverOutput solve_shooting(const ReducedProblem& problem, const SolverConfig& config) {
    config.validate();
    if (!problem.driver || !problem.terminal || !problem.paths || !problem.reference)
        throw std::invalid_argument("reduced problem needs driver, terminal, paths and reference");
    const PathBundle& b = *problem.paths;
    const ReferenceGrid& ref = *problem.reference;
    if (ref.n_paths != b.n_paths || ref.n_steps != b.n_steps)
        throw std::invalid_argument("reference grid does not match the path bundle");
    const Driver& driver = *problem.driver;
    const ShootingConfig& sc = config.shooting;
    const std::size_t n = b.n_steps;
    const std::size_t n_paths = b.n_paths;
    const double dt = b.dt();

    Features features{b.maturity, problem.strike, 1.0};
    {
        double sum_sq = 0.0;
        for (std::size_t p = 0; p < n_paths; ++p) {
            const double r = std::log(b.stock_at(p, n) / b.stock_at(p, 0));
            sum_sq += r * r;
        }
        const double scale = std::sqrt(sum_sq / static_cast<double>(n_paths));
        if (scale > 0.0) features.x_scale = scale;
    }

    Network net(sc.hidden_layers, sc.width, config.seed);
    std::array<double, 2> u0{0.0, 0.0};
    Gradient grad(net);
    Adam adam(net, sc.learning_rate);

    const auto batch = static_cast<Eigen::Index>(sc.batch_size);
    std::vector<std::size_t> index(sc.batch_size);
    std::vector<std::vector<Matrix>> acts(n);
    Matrix input(3, batch);
    Matrix u(n + 1, batch), g_u(n, batch), g_z(n, batch), z(n, batch);
    double loss = 0.0;

    for (std::size_t it = 0; it < sc.iterations; ++it) {
        PathRng pick(config.seed, Stream::kShootingTrain, it);
        for (auto& k : index)
            k = std::min(n_paths - 1, static_cast<std::size_t>(pick.uniform() * static_cast<double>(n_paths)));

        for (Eigen::Index c = 0; c < batch; ++c) u(0, c) = u0[b.beta(index[c], 0)];
        for (std::size_t i = 0; i < n; ++i) {
            const double t = b.time(i);
            for (Eigen::Index c = 0; c < batch; ++c)
                features.fill(input, c, t, b.stock_at(index[c], i), b.beta(index[c], i));
            z.row(static_cast<Eigen::Index>(i)) = net.forward(input, acts[i]);
            for (Eigen::Index c = 0; c < batch; ++c) {
                const std::size_t p = index[c];
                const auto row = static_cast<Eigen::Index>(i);
                const auto d = driver.partials(t, u(row, c), z(row, c), b.beta(p, i), ref.v(p, i), ref.z(p, i));
                g_u(row, c) = d.d_u;
                g_z(row, c) = d.d_z;
                u(row + 1, c) = u(row, c) - d.value * dt + z(row, c) * b.dw(p, i);
            }
        }

        RowVector adjoint(batch);
        loss = 0.0;
        for (Eigen::Index c = 0; c < batch; ++c) {
            const double r = u(static_cast<Eigen::Index>(n), c) - problem.terminal(b.stock_at(index[c], n));
            loss += r * r;
            adjoint(c) = 2.0 * r / static_cast<double>(batch);
        }
        loss /= static_cast<double>(batch);
        if (!std::isfinite(loss)) {
            std::ostringstream s;
            s << "shooting: training diverged at iteration " << it;
            throw std::runtime_error(s.str());
        }

        grad.clear();
        for (std::size_t i = n; i-- > 0;) {
            const auto row = static_cast<Eigen::Index>(i);
            RowVector delta(batch);
            for (Eigen::Index c = 0; c < batch; ++c)
                delta(c) = adjoint(c) * (-g_z(row, c) * dt + b.dw(index[c], i));
            // Backpropagate delta (dL/dz) through the network at step i.
            Matrix upstream = delta;
            for (std::size_t l = net.layers(); l-- > 0;) {
                grad.weights[l].noalias() += upstream * acts[i][l].transpose();
                grad.biases[l] += upstream.rowwise().sum();
                if (l == 0) break;
                Matrix back = net.weights[l].transpose() * upstream;
                upstream = back.cwiseProduct((1.0 - acts[i][l].array().square()).matrix());
            }
            for (Eigen::Index c = 0; c < batch; ++c) adjoint(c) *= 1.0 - g_u(row, c) * dt;
        }
        for (Eigen::Index c = 0; c < batch; ++c) grad.u0[b.beta(index[c], 0)] += adjoint(c);
        adam.step(net, u0, grad);
    }

    // Network fixed: z no longer depends on u0, so evaluate it once on the
    // evaluation paths and re-shoot u0 per initial regime.
    const std::size_t n_eval = sc.eval_paths == 0 ? n_paths : std::min(sc.eval_paths, n_paths);
    SolverOutput out;
    out.n_paths = n_eval;
    out.n_steps = n;
    out.u_paths.assign(n_eval * (n + 1), 0.0);
    out.z_paths.assign(n_eval * n, 0.0);
    parallel_chunks(n_eval, config.threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        const auto cols = static_cast<Eigen::Index>(end - begin);
        Matrix in(3, cols);
        std::vector<Matrix> scratch;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t p = begin; p < end; ++p)
                features.fill(in, static_cast<Eigen::Index>(p - begin), b.time(i), b.stock_at(p, i), b.beta(p, i));
            const RowVector zz = net.forward(in, scratch);
            for (std::size_t p = begin; p < end; ++p) out.z_paths[p * n + i] = zz(static_cast<Eigen::Index>(p - begin));
        }
    });

    std::vector<double> residual(n_eval);
    std::vector<std::uint8_t> group(n_eval);
    for (std::size_t p = 0; p < n_eval; ++p) group[p] = b.beta(p, 0);

    // Runs the forward recursion for every path in `g` from `start` and
    // returns the mean terminal residual (chunk-ordered reduction).
    auto shoot = [&](int g, double start) {
        const std::size_t chunks = chunk_count(n_eval);
        std::vector<double> partial(chunks, 0.0), counts(chunks, 0.0);
        parallel_chunks(n_eval, config.threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
            for (std::size_t p = begin; p < end; ++p) {
                if (group[p] != g) continue;
                double level = start;
                out.u_paths[p * (n + 1)] = level;
                for (std::size_t i = 0; i < n; ++i) {
                    const double zz = out.z_paths[p * n + i];
                    const double gv = driver.value(b.time(i), level, zz, b.beta(p, i), ref.v(p, i), ref.z(p, i));
                    level = level - gv * dt + zz * b.dw(p, i);
                    if (!std::isfinite(level)) throw std::runtime_error(non_finite(i, p, level, zz));
                    out.u_paths[p * (n + 1) + i + 1] = level;
                }
                residual[p] = level - problem.terminal(b.stock_at(p, n));
                partial[c] += residual[p];
                counts[c] += 1.0;
            }
        });
        double sum = 0.0, count = 0.0;
        for (std::size_t c = 0; c < chunks; ++c) {
            sum += partial[c];
            count += counts[c];
        }
        return count > 0.0 ? sum / count : 0.0;
    };

    double pooled_sum = 0.0, pooled_sq = 0.0, pooled_n = 0.0;
    for (int g = 0; g < 2; ++g) {
        std::size_t members = 0;
        for (auto v : group) members += (v == g);
        if (members == 0) continue;

        // Secant on the mean terminal residual, which is monotone in u0.
        double x0 = u0[g], x1 = u0[g] + 1e-3;
        double f0 = shoot(g, x0), f1 = shoot(g, x1);
        for (int k = 0; k < 50 && std::abs(f1) > 1e-14 && f1 != f0; ++k) {
            const double x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            x0 = x1;
            f0 = f1;
            x1 = x2;
            f1 = shoot(g, x1);
        }
        // The last shot was at x1, so u_paths and residual match it.
        double sum = 0.0, sq = 0.0;
        for (std::size_t p = 0; p < n_eval; ++p)
            if (group[p] == g) sum += residual[p];
        const double mean = sum / static_cast<double>(members);
        for (std::size_t p = 0; p < n_eval; ++p)
            if (group[p] == g) sq += (residual[p] - mean) * (residual[p] - mean);
        const double var = members > 1 ? sq / static_cast<double>(members - 1) : 0.0;
        out.u0[g] = x1;
        out.u0_std_error[g] = std::sqrt(var / static_cast<double>(members));
        pooled_sum += sum;
        pooled_sq += sq + static_cast<double>(members) * mean * mean;
        pooled_n += static_cast<double>(members);
    }
    out.diagnostics.terminal_residual_mean = pooled_sum / pooled_n;
    out.diagnostics.terminal_residual_variance =
        pooled_sq / pooled_n - out.diagnostics.terminal_residual_mean * out.diagnostics.terminal_residual_mean;
    out.diagnostics.final_loss = loss;
    out.diagnostics.iterations = sc.iterations;
    return out;
}

}  // namespace rxva
