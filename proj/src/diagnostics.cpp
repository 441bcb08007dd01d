#include "entrykin/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

InvariantReport check_record_invariants(const MomentSeries& series, const ProbabilityFn& pf) {
    InvariantReport rep;
    rep.min_b_minus_beta = std::numeric_limits<double>::infinity();
    const auto& rs = series.records;
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const auto& r = rs[k];
        auto bad = [&](const char* what, double v) { rep.violations.push_back({k, r.t, what, v}); };
        rep.max_abs_a = std::max(rep.max_abs_a, std::abs(r.a));
        rep.min_b_minus_beta = std::min(rep.min_b_minus_beta, r.b - r.beta);
        if (!(std::abs(r.a) < 1.0)) bad("|a| < 1", r.a);
        if (!(r.b >= 0.0 && r.b <= 1.0)) bad("0 <= b <= 1", r.b);
        if (!(r.b >= r.beta - 1e-12)) bad("b >= beta", r.b - r.beta);
        if (!(r.phi >= 0.0)) bad("phi >= 0", r.phi);
        for (double s : r.sorting)
            if (!(s >= 0.0 && s <= 1.0 + 1e-12)) bad("sorting in [0,1]", s);
        if (!(r.alpha >= pf.p_min() && r.alpha <= 1.0 + 1e-12)) bad("alpha in [p_min, 1]", r.alpha);
        if (k > 0 && !(r.t > rs[k - 1].t)) bad("t increasing", r.t);
    }
    if (rs.empty()) rep.min_b_minus_beta = 0.0;
    return rep;
}

EnergyReport check_energy_inequality(const MomentSeries& series, double tol, const std::vector<double>* d_series,
                                     const std::vector<double>* grad_series) {
    const auto& rs = series.records;
    if ((d_series && d_series->size() != rs.size()) || (grad_series && grad_series->size() != rs.size()))
        throw ContractViolation("d / grad series length differs from the records");
    EnergyReport rep;
    rep.tol = tol;
    if (rs.empty()) return rep;
    rep.e0 = rs[0].energy;
    double dissipated = 0.0;
    for (std::size_t k = 0; k < rs.size(); ++k) {
        if (k > 0) {
            const std::size_t j = k - 1;
            const double d = d_series ? (*d_series)[j] : rs[j].d;
            const double G = grad_series ? (*grad_series)[j] : rs[j].grad_energy;
            dissipated += d * G * (rs[k].t - rs[j].t);
        }
        const double excess = rs[k].energy + dissipated - rep.e0;
        const double rel = rep.e0 > 0.0 ? excess / rep.e0 : excess;
        rep.max_violation = std::max(rep.max_violation, rel);
        if (rel > tol) rep.violating.push_back(k);
    }
    return rep;
}

C0Assembly assemble_c0(double c_p, const MomentSeries& series) {
    C0Assembly a;
    a.c_p = c_p;
    for (const auto& r : series.records) {
        a.sup_abs_c = std::max(a.sup_abs_c, std::abs(r.c));
        a.sup_d = std::max(a.sup_d, r.d);
    }
    a.value = c_p * (1.0 + 2.0 * c_p) * (a.sup_abs_c + a.sup_d);
    a.formula = fmt::format("c0 = c_p*(1+2*c_p)*(sup|c|+sup d) = {}*{}*({}+{}) = {}", c_p, 1.0 + 2.0 * c_p,
                            a.sup_abs_c, a.sup_d, a.value);
    return a;
}

BoundsReport check_moment_bounds(const MomentSeries& series, double c0, double tol) {
    BoundsReport rep;
    rep.c0 = c0;
    rep.tol = tol;
    const auto& rs = series.records;
    if (rs.size() < 3) {
        rep.inconclusive = true;
        return rep;
    }
    const double beta0 = rs[0].beta;
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const auto& r = rs[k];
        const double lower = beta0 * std::exp(-c0 * (r.t - rs[0].t));
        if (r.beta > 0.0) rep.worst_lower_ratio = std::max(rep.worst_lower_ratio, lower / r.beta);
        if (r.beta < lower * (1.0 - tol)) rep.violations.push_back({k, r.t, "beta lower bound", r.beta});
        if (k + 1 == rs.size()) break;
        const auto& n = rs[k + 1];
        const double dt = n.t - r.t;
        if (!(dt > 0.0)) continue;
        const double allowed = c0 * std::min(r.beta, n.beta) * std::exp(c0 * dt) * (1.0 + tol);
        const double da = std::abs(n.alpha - r.alpha) / dt, db = std::abs(n.beta - r.beta) / dt;
        if (allowed > 0.0) {
            rep.worst_alpha_ratio = std::max(rep.worst_alpha_ratio, da / allowed);
            rep.worst_beta_ratio = std::max(rep.worst_beta_ratio, db / allowed);
        }
        if (da > allowed) rep.violations.push_back({k, r.t, "|alpha'| <= c0 beta", da});
        if (db > allowed) rep.violations.push_back({k, r.t, "|beta'| <= c0 beta", db});
    }
    return rep;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Fail: return "fail";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

double ls_slope(const std::vector<double>& t, const std::vector<double>& y) {
    if (t.size() != y.size()) throw ContractViolation("slope inputs differ in length");
    if (t.size() < 2) return 0.0;
    double mt = 0.0, my = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        mt += t[i];
        my += y[i];
    }
    mt /= static_cast<double>(t.size());
    my /= static_cast<double>(t.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        sxy += (t[i] - mt) * (y[i] - my);
        sxx += (t[i] - mt) * (t[i] - mt);
    }
    return sxx > 0.0 ? sxy / sxx : 0.0;
}

AsymptoticsReport sorting_and_learning_verdict(const MomentSeries& series, const ModelParams& params,
                                               const ProbabilityFn& pf, const AsymptoticsOptions& opt) {
    AsymptoticsReport rep;
    const auto& rs = series.records;
    rep.band_lo = (params.Mc() - 1.0) / params.M();
    rep.band_hi = params.Mc() / params.M();
    const double pmin4 = std::pow(pf.p_min(), 4);
    rep.regime_lhs = opt.bound_factor * std::sqrt(params.tau()) * (params.M() - 1.0);
    rep.regime_rhs = pmin4;
    rep.regime_ok = rep.regime_lhs < rep.regime_rhs;
    rep.a_bound = pmin4 > 0.0 ? opt.bound_factor * std::sqrt(params.tau()) / pmin4
                              : std::numeric_limits<double>::infinity();
    if (rs.size() < 4 || rs.back().t - rs.front().t < opt.min_horizon) {
        rep.verdict = Verdict::Inconclusive;
        rep.note = "series shorter than the required horizon";
        return rep;
    }
    const double t0 = rs.front().t, t1 = rs.back().t;
    auto window = [&](double from) {
        std::vector<std::size_t> idx;
        for (std::size_t k = 0; k < rs.size(); ++k)
            if (rs[k].t >= from) idx.push_back(k);
        return idx;
    };
    const auto quarter = window(t0 + 0.75 * (t1 - t0));
    const auto half = window(t0 + 0.5 * (t1 - t0));

    rep.phi0 = rs.front().phi;
    rep.phi_final = rs.back().phi;
    rep.phi_decayed = rep.phi_final <= opt.phi_frac * rep.phi0;
    {
        std::vector<double> t, y;
        for (auto k : quarter) {
            t.push_back(rs[k].t);
            y.push_back(rs[k].phi);
        }
        rep.phi_trailing_slope = ls_slope(t, y);
        rep.phi_eventually_decreasing = rep.phi_trailing_slope <= 0.0;
    }
    rep.sorting_ok = true;
    for (std::size_t w = 0; w < series.windows.size(); ++w) {
        rep.sorting_final.push_back(rs.back().sorting.at(w));
        std::vector<double> t, y;
        for (auto k : half) {
            t.push_back(rs[k].t);
            y.push_back(rs[k].sorting[w]);
        }
        rep.sorting_trailing_slope.push_back(ls_slope(t, y));
        rep.sorting_ok = rep.sorting_ok && rep.sorting_final.back() <= opt.sorting_tol;
    }
    rep.alpha_trailing_min = std::numeric_limits<double>::infinity();
    rep.alpha_trailing_max = -std::numeric_limits<double>::infinity();
    for (auto k : quarter) {
        rep.alpha_trailing_min = std::min(rep.alpha_trailing_min, rs[k].alpha);
        rep.alpha_trailing_max = std::max(rep.alpha_trailing_max, rs[k].alpha);
        rep.a_trailing_max = std::max(rep.a_trailing_max, std::abs(rs[k].a));
    }
    rep.alpha_in_band = rep.alpha_trailing_min > rep.band_lo && rep.alpha_trailing_max < rep.band_hi;
    rep.a_bound_ok = rep.a_trailing_max <= rep.a_bound;

    const bool ok = rep.phi_decayed && rep.sorting_ok && rep.alpha_in_band && (!rep.regime_ok || rep.a_bound_ok);
    rep.verdict = ok ? Verdict::Pass : Verdict::Fail;
    if (!rep.regime_ok) rep.note = "regime surrogate fails; surrogate |a| bound not asserted";
    return rep;
}

TimescaleReport timescale_report(const ModelParams& params, double C_T) {
    if (!(C_T > 0.0)) throw ContractViolation("C_T must be > 0");
    TimescaleReport r;
    const double M1 = params.M() - 1.0;
    r.transport_rate = params.h() * M1 / params.tau();
    r.diffusion_rate = params.h() * params.h() * M1 / (2.0 * params.tau());
    r.ratio = r.transport_rate / r.diffusion_rate;
    r.T_learn = C_T / r.transport_rate;
    r.T_sort = C_T / r.diffusion_rate;
    return r;
}

std::optional<double> learning_time(const MomentSeries& series, const ModelParams& params) {
    const double lo = (params.Mc() - 1.0) / params.M(), hi = params.Mc() / params.M();
    for (const auto& r : series.records)
        if (r.alpha > lo && r.alpha < hi) return r.t;
    return std::nullopt;
}

std::optional<double> sorting_time(const MomentSeries& series, std::size_t window, double threshold) {
    for (const auto& r : series.records)
        if (r.sorting.at(window) < threshold) return r.t;
    return std::nullopt;
}

}  // namespace entrykin
