#include "rxva/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace rxva {

using nlohmann::json;

namespace {

// Reads keys from one JSON object and rejects any it did not consume.
class Section {
public:
    Section(const json& doc, std::string name) : name_(std::move(name)) {
        if (!doc.is_object()) throw std::invalid_argument("config: " + name_ + " must be an object");
        doc_ = &doc;
    }

    template <class T>
    void read(const char* key, T& target) {
        seen_.insert(key);
        const auto it = doc_->find(key);
        if (it == doc_->end() || it->is_null()) return;
        try {
            target = it->get<T>();
        } catch (const json::exception&) {
            throw std::invalid_argument("config: " + name_ + "." + key + " has the wrong type");
        }
    }

    template <class T>
    void read_optional(const char* key, std::optional<T>& target) {
        seen_.insert(key);
        const auto it = doc_->find(key);
        if (it == doc_->end() || it->is_null()) return;
        T value{};
        read(key, value);
        target = value;
    }

    [[nodiscard]] const json* child(const char* key) {
        seen_.insert(key);
        const auto it = doc_->find(key);
        return it == doc_->end() || it->is_null() ? nullptr : &*it;
    }

    void finish() const {
        for (const auto& item : doc_->items())
            if (!seen_.count(item.key()))
                throw std::invalid_argument("config: unknown key " + name_ + "." + item.key());
    }

private:
    const json* doc_ = nullptr;
    std::string name_;
    std::set<std::string> seen_;
};

json market_json(const MarketParams& m) {
    json j = {
        {"repo_rate_lend", m.repo_rate_lend},
        {"repo_rate_borrow", m.repo_rate_borrow},
        {"funding_rate_lend", m.funding_rate_lend},
        {"funding_rate_borrow", m.funding_rate_borrow},
        {"collateral_rate_receive", m.collateral_rate_receive},
        {"collateral_rate_pay", m.collateral_rate_pay},
        {"discount_rate", m.discount_rate},
        {"bond_return_investor", m.bond_return_investor},
        {"bond_return_counterparty", m.bond_return_counterparty},
        {"volatility", m.volatility},
        {"loss_investor", m.loss_investor},
        {"loss_counterparty", m.loss_counterparty},
        {"collateralization", m.collateralization},
    };
    if (m.physical_drift) j["physical_drift"] = *m.physical_drift;
    if (m.physical_intensity_investor) j["physical_intensity_investor"] = *m.physical_intensity_investor;
    if (m.physical_intensity_counterparty)
        j["physical_intensity_counterparty"] = *m.physical_intensity_counterparty;
    return j;
}

void read_market(const json& doc, MarketParams& m) {
    Section s(doc, "market");
    s.read("repo_rate_lend", m.repo_rate_lend);
    s.read("repo_rate_borrow", m.repo_rate_borrow);
    s.read("funding_rate_lend", m.funding_rate_lend);
    s.read("funding_rate_borrow", m.funding_rate_borrow);
    s.read("collateral_rate_receive", m.collateral_rate_receive);
    s.read("collateral_rate_pay", m.collateral_rate_pay);
    s.read("discount_rate", m.discount_rate);
    s.read("bond_return_investor", m.bond_return_investor);
    s.read("bond_return_counterparty", m.bond_return_counterparty);
    s.read("volatility", m.volatility);
    s.read("loss_investor", m.loss_investor);
    s.read("loss_counterparty", m.loss_counterparty);
    s.read("collateralization", m.collateralization);
    s.read_optional("physical_drift", m.physical_drift);
    s.read_optional("physical_intensity_investor", m.physical_intensity_investor);
    s.read_optional("physical_intensity_counterparty", m.physical_intensity_counterparty);
    s.finish();
}

OptionKind option_kind_from_string(const std::string& text) {
    if (text == "call") return OptionKind::kCall;
    if (text == "put") return OptionKind::kPut;
    throw std::invalid_argument("config: claim.kind must be call or put, got '" + text + "'");
}

void read_claim(const json& doc, ClaimSpec& c) {
    Section s(doc, "claim");
    std::string kind = c.kind == OptionKind::kCall ? "call" : "put";
    s.read("kind", kind);
    c.kind = option_kind_from_string(kind);
    s.read("strike", c.strike);
    s.read("maturity", c.maturity);
    s.read("spot", c.spot);
    s.finish();
}

void read_regime(const json& doc, RegimeSection& r) {
    Section s(doc, "regime");
    std::string mode = to_string(r.mode);
    s.read("mode", mode);
    r.mode = regime_mode_from_string(mode);
    s.read("mean_normal_years", r.mean_normal_years);
    s.read("mean_crisis_years", r.mean_crisis_years);
    s.read("initial_state", r.initial_state);
    s.finish();
}

void read_solver(const json& doc, SolverConfig& c) {
    Section s(doc, "solver");
    s.read("n_steps", c.n_steps);
    s.read("n_paths", c.n_paths);
    std::string backend = to_string(c.backend);
    s.read("backend", backend);
    c.backend = backend_from_string(backend);
    s.read("basis_degree", c.basis_degree);
    s.read("seed", c.seed);
    s.read("clamp_quantile", c.clamp_quantile);
    s.read("threads", c.threads);
    if (const json* sh = s.child("shooting")) {
        Section t(*sh, "solver.shooting");
        t.read("hidden_layers", c.shooting.hidden_layers);
        t.read("width", c.shooting.width);
        t.read("learning_rate", c.shooting.learning_rate);
        t.read("iterations", c.shooting.iterations);
        t.read("batch_size", c.shooting.batch_size);
        t.read("eval_paths", c.shooting.eval_paths);
        t.finish();
    }
    s.finish();
}

void read_sweep(const json& doc, SweepSection& w) {
    Section s(doc, "sweep");
    std::string axis = to_string(w.spec.axis);
    s.read("axis", axis);
    w.spec.axis = sweep_axis_from_string(axis);
    s.read("grid", w.spec.grid);
    std::vector<std::string> modes;
    for (auto m : w.spec.modes) modes.emplace_back(to_string(m));
    s.read("modes", modes);
    w.spec.modes.clear();
    for (const auto& m : modes) w.spec.modes.push_back(regime_mode_from_string(m));
    s.read("gnuplot", w.gnuplot);
    s.finish();
}

void read_io(const json& doc, IoSection& io) {
    Section s(doc, "io");
    s.read("input", io.input);
    s.read("output_dir", io.output_dir);
    s.finish();
}

}  // namespace

RegimeSpec RegimeSection::spec() const {
    RegimeSpec out;
    out.mode = mode;
    out.params = RegimeParams::from_means(mean_normal_years, mean_crisis_years, initial_state);
    return out;
}

void RunConfig::validate() const {
    market.validate();
    claim.validate();
    solver.validate();
    (void)regime.spec().params;  // from_means validates
    if (sweep) sweep->spec.validate();
}

json to_json(const RunConfig& c) {
    json doc;
    doc["market"] = market_json(c.market);
    doc["claim"] = {{"kind", c.claim.kind == OptionKind::kCall ? "call" : "put"},
                    {"strike", c.claim.strike},
                    {"maturity", c.claim.maturity},
                    {"spot", c.claim.spot}};
    doc["regime"] = {{"mode", to_string(c.regime.mode)},
                     {"mean_normal_years", c.regime.mean_normal_years},
                     {"mean_crisis_years", c.regime.mean_crisis_years},
                     {"initial_state", c.regime.initial_state}};
    // threads is left out: results do not depend on it.
    doc["solver"] = {{"n_steps", c.solver.n_steps},
                     {"n_paths", c.solver.n_paths},
                     {"backend", to_string(c.solver.backend)},
                     {"basis_degree", c.solver.basis_degree},
                     {"seed", c.solver.seed},
                     {"clamp_quantile", c.solver.clamp_quantile},
                     {"shooting",
                      {{"hidden_layers", c.solver.shooting.hidden_layers},
                       {"width", c.solver.shooting.width},
                       {"learning_rate", c.solver.shooting.learning_rate},
                       {"iterations", c.solver.shooting.iterations},
                       {"batch_size", c.solver.shooting.batch_size},
                       {"eval_paths", c.solver.shooting.eval_paths}}}};
    if (c.sweep) {
        json modes = json::array();
        for (auto m : c.sweep->spec.modes) modes.push_back(to_string(m));
        doc["sweep"] = {{"axis", to_string(c.sweep->spec.axis)},
                        {"grid", c.sweep->spec.grid},
                        {"modes", modes},
                        {"gnuplot", c.sweep->gnuplot}};
    }
    doc["io"] = {{"input", c.io.input}, {"output_dir", c.io.output_dir}};
    return doc;
}

RunConfig config_from_json(const json& doc) {
    RunConfig c;
    Section top(doc, "config");
    if (const json* j = top.child("market")) read_market(*j, c.market);
    if (const json* j = top.child("claim")) read_claim(*j, c.claim);
    if (const json* j = top.child("regime")) read_regime(*j, c.regime);
    if (const json* j = top.child("solver")) read_solver(*j, c.solver);
    if (const json* j = top.child("sweep")) {
        SweepSection w;
        read_sweep(*j, w);
        c.sweep = w;
    }
    if (const json* j = top.child("io")) read_io(*j, c.io);
    top.finish();
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    try {
        return config_from_json(json::parse(in));
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
    }
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override '" + assignment + "' is not section.key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    if (path.find('.') == std::string::npos)
        throw std::invalid_argument("override '" + assignment + "' needs a section.key path");

    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) throw std::invalid_argument("override '" + assignment + "' has an empty key");
        if (!node->is_object()) {
            if (!node->is_null())
                throw std::invalid_argument("override '" + assignment + "' descends into a non-object");
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[key] = value;
            break;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

RunConfig resolve_config(const std::optional<std::string>& path,
                         const std::vector<std::string>& overrides) {
    RunConfig base = path ? load_config_file(*path) : RunConfig{};
    if (overrides.empty()) return base;
    json doc = to_json(base);
    // to_json drops threads; keep it across the round trip.
    doc["solver"]["threads"] = base.solver.threads;
    for (const auto& o : overrides) apply_override(doc, o);
    return config_from_json(doc);
}

}  // namespace rxva
