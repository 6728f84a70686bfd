#include "rxva/io.hpp"

#include "rxva/config.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <system_error>
#include <unistd.h>

namespace rxva {

using nlohmann::json;

void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + fmt::format(".tmp{}", static_cast<long>(::getpid()));
    try {
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
            writer(out);
            out.flush();
            if (!out) throw std::runtime_error("write to " + tmp.string() + " failed");
        }
        fs::rename(tmp, target);
    } catch (...) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw;
    }
}

void write_paths_csv(std::ostream& out, const PathBundle& b, std::size_t max_paths) {
    out << "path_id,step,t,S,beta,dW\n";
    const std::size_t count = std::min(max_paths, b.n_paths);
    for (std::size_t p = 0; p < count; ++p)
        for (std::size_t i = 0; i <= b.n_steps; ++i) {
            out << p << ',' << i << ',' << fmt::format("{}", b.time(i)) << ','
                << fmt::format("{}", b.stock_at(p, i)) << ',';
            if (i < b.n_steps)
                out << b.beta(p, i) << ',' << fmt::format("{}", b.dw(p, i));
            else
                out << ',';
            out << '\n';
        }
}

void write_regime_paths_csv(std::ostream& out, const std::vector<RegimePath>& paths) {
    out << "path_id,jump_index,jump_time\n";
    for (std::size_t p = 0; p < paths.size(); ++p)
        for (std::size_t k = 0; k < paths[p].jump_times.size(); ++k)
            out << p << ',' << k + 1 << ',' << fmt::format("{}", paths[p].jump_times[k]) << '\n';
}

void write_solver_steps_csv(std::ostream& out, const SolverOutput& o, double maturity) {
    out << "step,t,mean_u,mean_z,r2_u,r2_z\n";
    const double dt = maturity / static_cast<double>(o.n_steps);
    const auto n = static_cast<double>(o.n_paths);
    for (std::size_t i = 0; i <= o.n_steps; ++i) {
        double su = 0.0, sz = 0.0;
        for (std::size_t p = 0; p < o.n_paths; ++p) {
            su += o.u(p, i);
            if (i < o.n_steps) sz += o.z(p, i);
        }
        out << i << ',' << fmt::format("{}", dt * static_cast<double>(i)) << ','
            << fmt::format("{}", su / n) << ',';
        if (i < o.n_steps) out << fmt::format("{}", sz / n);
        out << ',';
        if (i < o.diagnostics.r2_u.size()) out << fmt::format("{}", o.diagnostics.r2_u[i]);
        out << ',';
        if (i < o.diagnostics.r2_z.size()) out << fmt::format("{}", o.diagnostics.r2_z[i]);
        out << '\n';
    }
}

json diagnostics_to_json(const SolverDiagnostics& d) {
    return {{"r2_u", d.r2_u},
            {"r2_z", d.r2_z},
            {"clamped_targets", d.clamped_targets},
            {"fallback_buckets", d.fallback_buckets},
            {"terminal_residual_mean", d.terminal_residual_mean},
            {"terminal_residual_variance", d.terminal_residual_variance},
            {"final_loss", d.final_loss},
            {"iterations", d.iterations}};
}

json checks_to_json(const CheckReport& report) {
    json items = json::array();
    for (const auto& i : report.items)
        items.push_back({{"id", i.id},
                         {"description", i.description},
                         {"lhs", i.lhs},
                         {"rhs", i.rhs},
                         {"passed", i.passed},
                         {"necessary", i.necessary}});
    return {{"passed", report.passed},
            {"necessary_passed", report.necessary_passed()},
            {"items", items}};
}

json report_to_json(const XVAReport& r) {
    RunConfig echo;
    echo.market = r.market;
    echo.claim = r.claim;
    echo.solver = r.solver;
    const json config = to_json(echo);

    json checks = checks_to_json(r.checks);
    checks["lipschitz_k"] = lipschitz_constant(r.market).k;

    return {{"xva_plus", r.xva_plus},
            {"se_plus", r.se_plus},
            {"xva_minus", r.xva_minus},
            {"se_minus", r.se_minus},
            {"v_hat0", r.v_hat0},
            {"regime_mode", to_string(r.regime.mode)},
            {"initial_regime", r.initial_regime},
            {"seed", r.solver.seed},
            {"market", config["market"]},
            {"claim", config["claim"]},
            {"regime",
             {{"mode", to_string(r.regime.mode)},
              {"rate_normal", r.regime.params.rate_normal},
              {"rate_crisis", r.regime.params.rate_crisis},
              {"initial_state", r.regime.params.initial_state}}},
            {"solver", config["solver"]},
            {"diagnostics", {{"plus", diagnostics_to_json(r.diagnostics_plus)},
                             {"minus", diagnostics_to_json(r.diagnostics_minus)}}},
            {"checks", checks},
            {"warnings", r.warnings}};
}

}  // namespace rxva
