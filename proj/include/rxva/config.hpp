#pragma once

#include "rxva/bsde_solver.hpp"
#include "rxva/market.hpp"
#include "rxva/regime.hpp"
#include "rxva/xva.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rxva {

struct RegimeSection {
    RegimeMode mode = RegimeMode::kFrozenNormal;
    double mean_normal_years = 1.39;
    double mean_crisis_years = 0.99;
    int initial_state = 0;

    [[nodiscard]] RegimeSpec spec() const;
};

struct SweepSection {
    SweepSpec spec;
    bool gnuplot = false;
};

struct IoSection {
    std::string input;       // stress-index CSV for estimate-regimes
    std::string output_dir;  // empty: $RXVA_OUT or the current directory
};

/// Run configuration. Every field has a default; the defaults are the
/// benchmark market, claim and solver.
struct RunConfig {
    MarketParams market;
    ClaimSpec claim;
    RegimeSection regime;
    SolverConfig solver;
    std::optional<SweepSection> sweep;
    IoSection io;

    /// Checks every section; throws std::invalid_argument.
    void validate() const;
};

[[nodiscard]] nlohmann::json to_json(const RunConfig& config);

/// Fills a RunConfig from JSON. Missing keys keep their defaults; unknown
/// keys and ill-typed values are errors.
[[nodiscard]] RunConfig config_from_json(const nlohmann::json& doc);
[[nodiscard]] RunConfig load_config_file(const std::string& path);

/// Applies "section.key=value" (nested keys allowed, e.g.
/// solver.shooting.iterations=100). The value is read as JSON when it
/// parses, otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Defaults, then the config file (if any), then overrides in order.
[[nodiscard]] RunConfig resolve_config(const std::optional<std::string>& path,
                                       const std::vector<std::string>& overrides);

}  // namespace rxva
