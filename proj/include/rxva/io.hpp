#pragma once

#include "rxva/bsde_solver.hpp"
#include "rxva/market.hpp"
#include "rxva/regime.hpp"
#include "rxva/xva.hpp"

#include "json.hpp"

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace rxva {

/// Writes through a temporary file in the same directory and renames it
/// into place, so a failed writer leaves no partial output.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);

/// path_id,step,t,S,beta,dW for the first max_paths paths. beta and dW
/// belong to the interval starting at the row's grid point and are empty
/// on the last row.
void write_paths_csv(std::ostream& out, const PathBundle& paths, std::size_t max_paths);

/// path_id,jump_index,jump_time
void write_regime_paths_csv(std::ostream& out, const std::vector<RegimePath>& paths);

/// step,t,mean_u,mean_z,r2_u,r2_z: cross-sectional means per grid point.
void write_solver_steps_csv(std::ostream& out, const SolverOutput& output, double maturity);

[[nodiscard]] nlohmann::json diagnostics_to_json(const SolverDiagnostics& d);
[[nodiscard]] nlohmann::json checks_to_json(const CheckReport& report);
[[nodiscard]] nlohmann::json report_to_json(const XVAReport& report);

}  // namespace rxva
