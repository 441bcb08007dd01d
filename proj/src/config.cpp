#include "entrykin/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "entrykin/errors.hpp"

namespace entrykin {

using nlohmann::json;

namespace {

// Reads one JSON object, remembering which keys were consumed so leftovers can be reported.
class Section {
public:
    Section(const json* obj, std::string path, std::vector<std::string>& errors)
        : obj_(obj), path_(std::move(path)), errors_(errors) {
        if (obj_ && !obj_->is_object()) {
            error("", "must be an object");
            obj_ = nullptr;
        }
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void error(const std::string& key, const std::string& msg) const {
        errors_.push_back(fmt::format("{}: {}", key.empty() ? path_ : key_path(key), msg));
    }

    const json* find(const std::string& key) {
        seen_.insert(key);
        if (!obj_) return nullptr;
        auto it = obj_->find(key);
        return it == obj_->end() ? nullptr : &*it;
    }

    Section sub(const std::string& key) { return Section(find(key), key_path(key), errors_); }

    void get(const std::string& key, double& out) {
        if (auto* v = find(key)) {
            if (v->is_number()) out = v->get<double>();
            else error(key, "expected a number");
        }
    }
    void get(const std::string& key, int& out) {
        if (auto* v = find(key)) {
            if (v->is_number_integer() && v->get<std::int64_t>() >= INT32_MIN && v->get<std::int64_t>() <= INT32_MAX)
                out = v->get<int>();
            else error(key, "expected an integer");
        }
    }
    void get(const std::string& key, std::int64_t& out) {
        if (auto* v = find(key)) {
            if (v->is_number_integer()) out = v->get<std::int64_t>();
            else error(key, "expected an integer");
        }
    }
    void get(const std::string& key, std::uint64_t& out) {
        if (auto* v = find(key)) {
            if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
            else error(key, "expected a nonnegative integer");
        }
    }
    void get(const std::string& key, std::string& out) {
        if (auto* v = find(key)) {
            if (v->is_string()) out = v->get<std::string>();
            else error(key, "expected a string");
        }
    }
    template <class T>
    void get(const std::string& key, std::vector<T>& out) {
        if (auto* v = find(key)) {
            if (!v->is_array()) {
                error(key, "expected an array");
                return;
            }
            std::vector<T> tmp;
            for (std::size_t i = 0; i < v->size(); ++i) {
                const auto& e = (*v)[i];
                const bool ok = std::is_integral_v<T> ? e.is_number_integer() : e.is_number();
                if (!ok) {
                    error(key, fmt::format("element {} has the wrong type", i));
                    return;
                }
                tmp.push_back(e.get<T>());
            }
            out = std::move(tmp);
        }
    }

    void finish() const {
        if (!obj_) return;
        for (auto it = obj_->begin(); it != obj_->end(); ++it)
            if (!seen_.count(it.key())) errors_.push_back(fmt::format("{}: unknown key", key_path(it.key())));
    }

private:
    const json* obj_;
    std::string path_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
};

struct Checker {
    std::vector<std::string>& errors;
    void operator()(bool ok, const std::string& path, const std::string& msg) const {
        if (!ok) errors.push_back(fmt::format("{}: {}", path, msg));
    }
};

bool finite_all(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_all(const ExperimentConfig& c, std::vector<std::string>& errors) {
    Checker req{errors};
    const auto& m = c.model;
    req(m.M >= 2, "model.M", fmt::format("must be >= 2 (got {})", m.M));
    req(std::isfinite(m.Mc) && m.Mc > 1.0 && m.Mc < m.M, "model.Mc", fmt::format("must lie in (1, M) (got {})", m.Mc));
    req(std::isfinite(m.h) && m.h > 0.0, "model.h", "must be > 0");
    req(std::isfinite(m.tau) && m.tau > 0.0, "model.tau", "must be > 0");

    const auto& p = c.probability;
    if (p.family == "logistic_floor") {
        req(p.p_min >= 0.0 && p.p_min < 1.0, "probability.p_min", "must lie in [0, 1)");
        req(std::isfinite(p.scale) && p.scale > 0.0, "probability.scale", "must be > 0");
        req(std::isfinite(p.center), "probability.center", "must be finite");
    } else if (p.family == "rational_tails") {
        req(std::isfinite(p.alpha) && p.alpha > 0.0, "probability.alpha", "must be > 0");
    } else if (p.family == "constant") {
        req(p.value > 0.0 && p.value <= 1.0, "probability.value", "must lie in (0, 1]");
    } else if (p.family == "tabulated") {
        req(!p.table.empty(), "probability.table", "required for the tabulated family");
    } else {
        errors.push_back(fmt::format("probability.family: unknown family '{}'", p.family));
    }

    const auto& a = c.abm;
    req(a.replicas >= 1, "abm.replicas", "must be >= 1");
    req(a.rounds >= 0, "abm.rounds", "must be >= 0");
    req(a.x0.kind == "gaussian" || a.x0.kind == "uniform", "abm.x0.kind", "must be 'gaussian' or 'uniform'");
    if (a.x0.kind == "gaussian") {
        req(std::isfinite(a.x0.mean), "abm.x0.mean", "must be finite");
        req(std::isfinite(a.x0.sd) && a.x0.sd > 0.0, "abm.x0.sd", "must be > 0");
    } else if (a.x0.kind == "uniform") {
        req(std::isfinite(a.x0.lo) && std::isfinite(a.x0.hi) && a.x0.lo < a.x0.hi, "abm.x0.hi", "must exceed abm.x0.lo");
    }
    req(!a.windows.empty(), "abm.windows", "needs at least one window");
    for (double R : a.windows) req(std::isfinite(R) && R > 0.0, "abm.windows", "entries must be > 0");
    req(a.record_every >= 0, "abm.record_every", "must be >= 0");
    req(std::isfinite(a.record_growth) && a.record_growth >= 0.0, "abm.record_growth", "must be >= 0");
    for (auto n : a.snapshot_rounds)
        req(n >= 0 && n <= a.rounds, "abm.snapshot_rounds", fmt::format("round {} outside [0, rounds]", n));

    const auto& d = c.pde;
    req(std::isfinite(d.x_min) && d.x_min < 0.0, "pde.grid.x_min", "must be < 0");
    req(std::isfinite(d.x_max) && d.x_max > 0.0, "pde.grid.x_max", "must be > 0");
    req(d.n_cells >= 16, "pde.grid.n_cells", "must be >= 16");
    const auto& s = d.solver;
    req(s.theta >= 0.5 && s.theta <= 1.0, "pde.solver.theta", "must lie in [0.5, 1]");
    req(std::isfinite(s.dt_max) && s.dt_max > 0.0, "pde.solver.dt_max", "must be > 0");
    req(s.cfl > 0.0 && s.cfl <= 1.0, "pde.solver.cfl", "must lie in (0, 1]");
    req(std::isfinite(s.epsilon) && s.epsilon >= 0.0, "pde.solver.epsilon", "must be >= 0");
    req(s.picard_iters >= 0, "pde.solver.picard_iters", "must be >= 0");
    req(s.mass_tol > 0.0, "pde.solver.mass_tol", "must be > 0");
    req(s.energy_tol > 0.0, "pde.solver.energy_tol", "must be > 0");
    req(std::isfinite(d.T) && d.T >= 0.0, "pde.T", "must be >= 0");
    req(std::isfinite(d.record_dt) && d.record_dt >= 0.0, "pde.record_dt", "must be >= 0");
    req(finite_all(d.snapshot_times), "pde.snapshot_times", "entries must be finite");
    for (double t : d.snapshot_times) req(t >= 0.0 && t <= d.T, "pde.snapshot_times", "entries must lie in [0, T]");

    const auto& g = c.diagnostics;
    req(g.phi_frac > 0.0 && g.phi_frac <= 1.0, "diagnostics.phi_frac", "must lie in (0, 1]");
    req(g.sorting_tol >= 0.0 && g.sorting_tol <= 1.0, "diagnostics.sorting_tol", "must lie in [0, 1]");
    req(g.bound_factor > 0.0, "diagnostics.bound_factor", "must be > 0");
    req(g.C_T > 0.0, "diagnostics.C_T", "must be > 0");
    req(g.bounds_tol >= 0.0, "diagnostics.bounds_tol", "must be >= 0");
    req(g.mass_drift_tol > 0.0, "diagnostics.mass_drift_tol", "must be > 0");
    req(g.clipped_tol >= 0.0, "diagnostics.clipped_tol", "must be >= 0");
    req(g.cp_grid_step > 0.0, "diagnostics.cp_grid_step", "must be > 0");

    const auto& k = c.compare;
    req(k.checkpoint_every >= 1, "compare.checkpoint_every", "must be >= 1");
    req(k.coarsen >= 1 && d.n_cells % std::max(k.coarsen, 1) == 0, "compare.coarsen",
        "must be >= 1 and divide pde.grid.n_cells");
    req(k.alpha_allowance >= 0.0, "compare.alpha_allowance", "must be >= 0");
    req(k.l1_tol > 0.0, "compare.l1_tol", "must be > 0");

    const auto& w = c.sweep;
    for (int M : w.M) req(M >= 2, "sweep.M", "entries must be >= 2");
    for (double v : w.Mc) req(std::isfinite(v) && v > 1.0, "sweep.Mc", "entries must be > 1");
    for (double v : w.h) req(std::isfinite(v) && v > 0.0, "sweep.h", "entries must be > 0");
    for (double v : w.tau) req(std::isfinite(v) && v > 0.0, "sweep.tau", "entries must be > 0");
    req(std::isfinite(w.h2_over_tau) && w.h2_over_tau >= 0.0, "sweep.h2_over_tau", "must be >= 0");
    req(!(w.h2_over_tau > 0.0 && !w.tau.empty()), "sweep.tau", "must be empty when sweep.h2_over_tau is set");
    req(w.sorting_window >= 0 && static_cast<std::size_t>(w.sorting_window) < a.windows.size(),
        "sweep.sorting_window", "must index abm.windows");
    req(w.sorting_threshold > 0.0 && w.sorting_threshold <= 1.0, "sweep.sorting_threshold", "must lie in (0, 1]");

    req(!c.output.dir.empty(), "output.dir", "must be non-empty");
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    std::vector<std::string> errors;
    check_all(cfg, errors);
    if (!errors.empty()) throw ConfigError(std::move(errors));
}

ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({fmt::format("config: JSON syntax error: {}", e.what())});
    }
    std::vector<std::string> errors;
    ExperimentConfig c;
    c.base_dir = base_dir;
    Section top(&root, "", errors);
    {
        auto s = top.sub("model");
        s.get("M", c.model.M);
        s.get("Mc", c.model.Mc);
        s.get("h", c.model.h);
        s.get("tau", c.model.tau);
        s.finish();
    }
    {
        auto s = top.sub("probability");
        auto& p = c.probability;
        s.get("family", p.family);
        s.get("p_min", p.p_min);
        s.get("scale", p.scale);
        s.get("center", p.center);
        s.get("alpha", p.alpha);
        s.get("value", p.value);
        s.get("table", p.table);
        s.finish();
    }
    {
        auto s = top.sub("abm");
        auto& a = c.abm;
        s.get("replicas", a.replicas);
        s.get("rounds", a.rounds);
        s.get("base_seed", a.base_seed);
        {
            auto x = s.sub("x0");
            x.get("kind", a.x0.kind);
            x.get("mean", a.x0.mean);
            x.get("sd", a.x0.sd);
            x.get("lo", a.x0.lo);
            x.get("hi", a.x0.hi);
            x.finish();
        }
        s.get("windows", a.windows);
        s.get("record_every", a.record_every);
        s.get("record_growth", a.record_growth);
        s.get("snapshot_rounds", a.snapshot_rounds);
        s.finish();
    }
    {
        auto s = top.sub("pde");
        auto& d = c.pde;
        {
            auto g = s.sub("grid");
            g.get("x_min", d.x_min);
            g.get("x_max", d.x_max);
            g.get("n_cells", d.n_cells);
            g.finish();
        }
        {
            auto v = s.sub("solver");
            auto& so = d.solver;
            v.get("theta", so.theta);
            v.get("dt_max", so.dt_max);
            v.get("cfl", so.cfl);
            std::string mode = to_string(so.boundary);
            v.get("boundary_mode", mode);
            if (mode == "zero_flux" || mode == "absorbing_ledger") so.boundary = boundary_mode_from_string(mode);
            else v.error("boundary_mode", fmt::format("must be zero_flux or absorbing_ledger (got '{}')", mode));
            v.get("epsilon", so.epsilon);
            v.get("picard_iters", so.picard_iters);
            v.get("mass_tol", so.mass_tol);
            v.get("energy_tol", so.energy_tol);
            v.finish();
        }
        s.get("T", d.T);
        s.get("record_dt", d.record_dt);
        s.get("snapshot_times", d.snapshot_times);
        s.finish();
    }
    {
        auto s = top.sub("diagnostics");
        auto& g = c.diagnostics;
        s.get("phi_frac", g.phi_frac);
        s.get("sorting_tol", g.sorting_tol);
        s.get("bound_factor", g.bound_factor);
        s.get("C_T", g.C_T);
        s.get("bounds_tol", g.bounds_tol);
        s.get("mass_drift_tol", g.mass_drift_tol);
        s.get("clipped_tol", g.clipped_tol);
        s.get("cp_grid_step", g.cp_grid_step);
        s.finish();
    }
    {
        auto s = top.sub("compare");
        auto& k = c.compare;
        s.get("checkpoint_every", k.checkpoint_every);
        s.get("coarsen", k.coarsen);
        s.get("alpha_allowance", k.alpha_allowance);
        s.get("l1_tol", k.l1_tol);
        s.finish();
    }
    {
        auto s = top.sub("sweep");
        auto& w = c.sweep;
        s.get("M", w.M);
        s.get("Mc", w.Mc);
        s.get("h", w.h);
        s.get("tau", w.tau);
        s.get("h2_over_tau", w.h2_over_tau);
        s.get("sorting_window", w.sorting_window);
        s.get("sorting_threshold", w.sorting_threshold);
        s.finish();
    }
    {
        auto s = top.sub("output");
        s.get("dir", c.output.dir);
        s.finish();
    }
    top.finish();
    check_all(c, errors);
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({fmt::format("config: cannot open '{}'", path.string())});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path.parent_path());
}

std::string serialize_config(const ExperimentConfig& c) {
    // ordered_json keeps the documented section order in the echo.
    nlohmann::ordered_json j;
    j["model"] = {{"M", c.model.M}, {"Mc", c.model.Mc}, {"h", c.model.h}, {"tau", c.model.tau}};
    const auto& p = c.probability;
    j["probability"] = {{"family", p.family}, {"p_min", p.p_min}, {"scale", p.scale}, {"center", p.center},
                        {"alpha", p.alpha},   {"value", p.value}, {"table", p.table}};
    const auto& a = c.abm;
    nlohmann::ordered_json x0 = {
        {"kind", a.x0.kind}, {"mean", a.x0.mean}, {"sd", a.x0.sd}, {"lo", a.x0.lo}, {"hi", a.x0.hi}};
    j["abm"] = {{"replicas", a.replicas},         {"rounds", a.rounds},
                {"base_seed", a.base_seed},       {"x0", x0},
                {"windows", a.windows},           {"record_every", a.record_every},
                {"record_growth", a.record_growth}, {"snapshot_rounds", a.snapshot_rounds}};
    const auto& d = c.pde;
    nlohmann::ordered_json grid = {{"x_min", d.x_min}, {"x_max", d.x_max}, {"n_cells", d.n_cells}};
    nlohmann::ordered_json solver = {{"theta", d.solver.theta},
                                     {"dt_max", d.solver.dt_max},
                                     {"cfl", d.solver.cfl},
                                     {"boundary_mode", to_string(d.solver.boundary)},
                                     {"epsilon", d.solver.epsilon},
                                     {"picard_iters", d.solver.picard_iters},
                                     {"mass_tol", d.solver.mass_tol},
                                     {"energy_tol", d.solver.energy_tol}};
    j["pde"] = {{"grid", grid},
                {"solver", solver},
                {"T", d.T},
                {"record_dt", d.record_dt},
                {"snapshot_times", d.snapshot_times}};
    const auto& g = c.diagnostics;
    j["diagnostics"] = {{"phi_frac", g.phi_frac},         {"sorting_tol", g.sorting_tol},
                        {"bound_factor", g.bound_factor}, {"C_T", g.C_T},
                        {"bounds_tol", g.bounds_tol},     {"mass_drift_tol", g.mass_drift_tol},
                        {"clipped_tol", g.clipped_tol},   {"cp_grid_step", g.cp_grid_step}};
    const auto& k = c.compare;
    j["compare"] = {{"checkpoint_every", k.checkpoint_every},
                    {"coarsen", k.coarsen},
                    {"alpha_allowance", k.alpha_allowance},
                    {"l1_tol", k.l1_tol}};
    const auto& w = c.sweep;
    j["sweep"] = {{"M", w.M},
                  {"Mc", w.Mc},
                  {"h", w.h},
                  {"tau", w.tau},
                  {"h2_over_tau", w.h2_over_tau},
                  {"sorting_window", w.sorting_window},
                  {"sorting_threshold", w.sorting_threshold}};
    j["output"] = {{"dir", c.output.dir}};
    return j.dump(2) + "\n";
}

ModelParams make_params(const ExperimentConfig& c) {
    return ModelParams(c.model.M, c.model.Mc, c.model.h, c.model.tau);
}

ProbabilityFn make_probability(const ExperimentConfig& c) {
    const auto& p = c.probability;
    if (p.family == "logistic_floor") return ProbabilityFn(LogisticFloor{p.p_min, p.scale, p.center});
    if (p.family == "rational_tails") return ProbabilityFn(RationalTails{p.alpha});
    if (p.family == "constant") return ProbabilityFn(ConstantP{p.value});
    if (p.family == "tabulated") {
        std::filesystem::path path(p.table);
        if (path.is_relative() && !c.base_dir.empty()) path = c.base_dir / path;
        return ProbabilityFn(TabulatedC2::load(path));
    }
    throw ConfigError({fmt::format("probability.family: unknown family '{}'", p.family)});
}

Grid make_grid(const ExperimentConfig& c) { return Grid(c.pde.x_min, c.pde.x_max, c.pde.n_cells); }

std::vector<double> make_f0(const ExperimentConfig& c, const Grid& grid) {
    const auto& x0 = c.abm.x0;
    if (x0.kind == "gaussian") return gaussian_density(grid, x0.mean, x0.sd);
    std::vector<double> f(grid.size(), 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double lo = std::max(grid.face(i), x0.lo), hi = std::min(grid.face(i + 1), x0.hi);
        f[i] = hi > lo ? hi - lo : 0.0;
        total += f[i];
    }
    if (!(total > 0.0)) throw ConfigError({"abm.x0: initial law has no mass on the grid"});
    for (auto& v : f) v /= total * grid.dx();
    return f;
}

}  // namespace entrykin
