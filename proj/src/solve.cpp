#include "entrykin/solve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

namespace {

Snapshot make_snapshot(const KineticState& s, const CoefficientSet& co, const Grid& grid, const CellTables& tab,
                       const SolverConfig& cfg) {
    Snapshot snap;
    snap.t = s.t;
    snap.f = s.f;
    snap.p = tab.p;
    auto F = face_fluxes(s, co, grid, tab, cfg);
    F.pop_back();
    snap.flux_left_face = std::move(F);
    return snap;
}

std::vector<double> sorted_unique_upto(std::vector<double> v, double T) {
    std::erase_if(v, [T](double x) { return !(x >= 0.0 && x <= T); });
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

SolveResult solve(const std::vector<double>& f0, double T, const Grid& grid, const ProbabilityFn& pf_in,
                  const ModelParams& params, const SolverConfig& cfg, const SolveOptions& opt) {
    validate(cfg);
    if (!(std::isfinite(T) && T >= 0.0)) throw ContractViolation("horizon T must be finite and >= 0");
    if (f0.size() != grid.size()) throw ContractViolation("f0 size differs from grid");
    for (double v : f0)
        if (!(v >= 0.0) || !std::isfinite(v)) throw ContractViolation("f0 must be finite and nonnegative");
    if (std::abs(grid_mass(f0, grid) - 1.0) > 1e-10)
        throw ContractViolation(fmt::format("f0 mass {:.17g} is not 1 within 1e-10", grid_mass(f0, grid)));
    if (!(opt.record_dt >= 0.0)) throw ContractViolation("record_dt must be >= 0");

    const ProbabilityFn pf = regularize_p(pf_in, cfg.epsilon);
    const CellTables tab = tabulate(grid, pf);

    SolveResult res;
    res.series.windows = opt.windows;
    KineticState st{f0, 0.0, 0.0, 0.0};

    auto coeffs_of = [&](const KineticState& s) {
        auto co = compute_coefficients(s, grid, tab, params, cfg.mass_tol);
        if (opt.frozen_cd) {
            co.c = opt.frozen_cd->first;
            co.d = opt.frozen_cd->second;
        }
        return co;
    };
    auto record = [&](const KineticState& s, const CoefficientSet& co) {
        auto r = moments(s, grid, tab, params, opt.windows, cfg.boundary);
        r.c = co.c;
        r.d = co.d;
        res.series.records.push_back(std::move(r));
    };

    CoefficientSet co = coeffs_of(st);
    if (!(co.beta > 0.0) && !opt.frozen_cd)
        throw ContractViolation("beta(0) = 0: the diffusion would be degenerate");

    const auto rec_times = sorted_unique_upto(opt.record_times, T);
    const auto snap_times = sorted_unique_upto(opt.snapshot_times, T);
    std::size_t next_rec = 0, next_snap = 0;
    double next_uniform = opt.record_dt > 0.0 ? opt.record_dt : std::numeric_limits<double>::infinity();
    std::size_t uniform_k = 1;

    auto emit = [&](bool force) {
        bool rec = force || opt.record_dt == 0.0;
        while (next_rec < rec_times.size() && rec_times[next_rec] <= st.t) {
            rec = true;
            ++next_rec;
        }
        while (next_uniform <= st.t) {
            rec = true;
            next_uniform = opt.record_dt * static_cast<double>(++uniform_k);
        }
        if (rec) record(st, co);
        while (next_snap < snap_times.size() && snap_times[next_snap] <= st.t) {
            res.snapshots.push_back(make_snapshot(st, co, grid, tab, cfg));
            ++next_snap;
        }
    };
    emit(true);

    res.stats.min_f = *std::min_element(st.f.begin(), st.f.end());
    res.stats.min_dt = std::numeric_limits<double>::infinity();
    while (st.t < T) {
        double target = T;
        if (next_rec < rec_times.size()) target = std::min(target, rec_times[next_rec]);
        if (next_snap < snap_times.size()) target = std::min(target, snap_times[next_snap]);
        target = std::min(target, next_uniform);

        double dt_adv = admissible_dt(co, grid, tab, cfg);
        if (!(dt_adv > 1e-14 * std::max(1.0, T)))
            throw StepSizeError(fmt::format("admissible step {} collapsed at t = {} (c = {})", dt_adv, st.t, co.c));
        double dt = std::min(dt_adv, target - st.t);
        const bool lands = dt >= target - st.t;

        StepStats ss;
        KineticState next = step(st, co, grid, tab, cfg, dt, &ss);
        for (int it = 0; it < cfg.picard_iters; ++it) {
            CoefficientSet ref = coeffs_of(next);
            if (std::abs(ref.c) * tab.p_max * dt > cfg.cfl * grid.dx()) break;
            next = step(st, ref, grid, tab, cfg, dt, &ss);
        }
        if (lands) next.t = target;
        st = std::move(next);
        ++res.stats.steps;
        res.stats.max_mass_drift = std::max(res.stats.max_mass_drift, ss.mass_drift);
        res.stats.total_clipped += ss.clipped;
        res.stats.max_step_clipped = std::max(res.stats.max_step_clipped, ss.clipped);
        res.stats.min_f = std::min(res.stats.min_f, ss.min_f);
        res.stats.min_dt = std::min(res.stats.min_dt, dt);
        co = coeffs_of(st);
        emit(st.t >= T);
    }
    if (res.stats.steps == 0) res.stats.min_dt = 0.0;
    res.final_state = std::move(st);
    return res;
}

}  // namespace entrykin
