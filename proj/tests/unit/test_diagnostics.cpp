#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "entrykin/diagnostics.hpp"
#include "entrykin/errors.hpp"
#include "entrykin/grid.hpp"
#include "entrykin/moments.hpp"
#include "entrykin/solve.hpp"

using namespace entrykin;

namespace {

const ModelParams kParams(11, 3.0, 0.1, 0.01);
const ProbabilityFn kP(LogisticFloor{0.1, 1.0, -2.5});
const std::vector<double> kWindows{1.0, 2.0};

MomentRecord record(double t, double alpha, double beta) {
    MomentRecord r;
    r.t = t;
    r.mass = 1.0;
    r.alpha = alpha;
    r.beta = beta;
    r.a = kParams.kappa() - alpha;
    r.b = alpha * (1 - alpha);
    r.energy = 1.0;
    r.phi = 1.0;
    r.sorting = {0.5, 0.5};
    return r;
}

MomentSeries default_run(double T, int n_cells = 400) {
    const Grid g(-12.0, 12.0, n_cells);
    SolverConfig cfg;
    cfg.dt_max = 0.02;
    return solve(gaussian_density(g, 0.0, 1.0), T, g, kP, kParams, cfg).series;
}

}  // namespace

TEST_CASE("moments of a spike at p = 1/2") {
    const Grid g(-4.0, 4.0, 32);
    KineticState s;
    s.f.assign(g.size(), 0.0);
    s.f[15] = 1.0 / g.dx();
    const auto r = moments(s, g, ProbabilityFn(ConstantP{0.5}), kParams, kWindows);
    CHECK(r.alpha == 0.5);
    CHECK(r.beta == 0.25);
    CHECK(r.b == 0.25);
    CHECK(r.a == doctest::Approx(kParams.kappa() - 0.5));
    CHECK(r.mass == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.sorting[0] == 1.0);
    CHECK(r.bmass_left == 0.0);
    CHECK(r.energy == doctest::Approx(0.5 / g.dx()));
    CHECK(r.phi >= 0.0);
}

TEST_CASE("mass where p is nearly one has vanishing beta and phi") {
    const Grid g(-40.0, 40.0, 160);
    KineticState s;
    s.f.assign(g.size(), 0.0);
    s.f[158] = 1.0 / g.dx();
    const auto r = moments(s, g, kP, kParams, kWindows);
    CHECK(r.beta < 1e-15);
    CHECK(r.phi < 1e-15);
    CHECK(r.sorting[1] == 0.0);
    CHECK(r.bmass_right == 0.0);
}

TEST_CASE("record invariants flag injected violations") {
    MomentSeries s;
    s.windows = kWindows;
    s.records = {record(0.0, 0.5, 0.2), record(1.0, 0.4, 0.2)};
    CHECK(check_record_invariants(s, kP).pass());
    s.records[1].b = s.records[1].beta - 1e-6;
    CHECK_FALSE(check_record_invariants(s, kP).pass());
    s.records[1] = record(1.0, 0.4, 0.2);
    s.records[1].t = 0.0;
    CHECK_FALSE(check_record_invariants(s, kP).pass());
    s.records[1] = record(1.0, 0.05, 0.04);
    CHECK_FALSE(check_record_invariants(s, kP).pass());
    s.records[1] = record(1.0, 0.4, 0.2);
    s.records[1].sorting[0] = 1.1;
    CHECK_FALSE(check_record_invariants(s, kP).pass());
}

TEST_CASE("energy stays constant without transport or diffusion") {
    const Grid g(-8.0, 8.0, 200);
    SolveOptions opt;
    opt.frozen_cd = std::make_pair(0.0, 0.0);
    SolverConfig cfg;
    cfg.dt_max = 0.05;
    const auto r = solve(gaussian_density(g, 0.0, 1.0), 1.0, g, ProbabilityFn(ConstantP{0.5}), kParams, cfg, opt);
    for (const auto& rec : r.series.records) CHECK(rec.energy == doctest::Approx(r.series.records[0].energy));
    const auto e = check_energy_inequality(r.series, 1e-12);
    CHECK(e.pass());
    CHECK(e.max_violation == 0.0);
}

TEST_CASE("energy inequality holds for pure diffusion and catches a forged gain") {
    const Grid g(-8.0, 8.0, 200);
    SolveOptions opt;
    opt.frozen_cd = std::make_pair(0.0, 0.5);
    SolverConfig cfg;
    cfg.dt_max = 0.01;
    auto r = solve(gaussian_density(g, 0.0, 1.0), 1.0, g, ProbabilityFn(ConstantP{0.5}), kParams, cfg, opt);
    CHECK(check_energy_inequality(r.series, 1e-6).pass());
    r.series.records.back().energy *= 2.0;
    CHECK_FALSE(check_energy_inequality(r.series, 1e-6).pass());
}

TEST_CASE("c0 assembly") {
    MomentSeries s;
    s.records = {record(0.0, 0.5, 0.2), record(1.0, 0.4, 0.2)};
    s.records[0].c = -3.0;
    s.records[1].c = 2.0;
    s.records[0].d = 1.0;
    s.records[1].d = 1.5;
    const auto c0 = assemble_c0(2.0, s);
    CHECK(c0.value == 2.0 * 5.0 * (3.0 + 1.5));
    CHECK(c0.sup_abs_c == 3.0);
    CHECK(c0.sup_d == 1.5);
    CHECK_FALSE(c0.formula.empty());
}

TEST_CASE("moment bounds hold on a real run and fail with a shrunken constant") {
    const auto s = default_run(5.0);
    const auto c0 = assemble_c0(kP.c_p(), s);
    const auto ok = check_moment_bounds(s, c0.value);
    CHECK(ok.pass());
    CHECK(ok.worst_alpha_ratio <= 1.0);
    const auto bad = check_moment_bounds(s, c0.value * 1e-3);
    CHECK_FALSE(bad.pass());
}

TEST_CASE("constant p test mode keeps alpha fixed and passes the bounds") {
    const Grid g(-8.0, 8.0, 200);
    SolveOptions opt;
    opt.frozen_cd = std::make_pair(1.0, 0.2);
    SolverConfig cfg;
    cfg.dt_max = 0.01;
    const auto r = solve(gaussian_density(g, -3.0, 0.5), 1.0, g, ProbabilityFn(ConstantP{0.4}), kParams, cfg, opt);
    for (const auto& rec : r.series.records) {
        CHECK(rec.alpha == doctest::Approx(0.4).epsilon(1e-14));
        CHECK(rec.beta == doctest::Approx(0.24).epsilon(1e-14));
    }
    CHECK(check_moment_bounds(r.series, 1e-9).pass());
}

TEST_CASE("moment bounds need enough records") {
    MomentSeries s;
    s.records = {record(0.0, 0.5, 0.2), record(1.0, 0.5, 0.2)};
    const auto r = check_moment_bounds(s, 1.0);
    CHECK(r.inconclusive);
    CHECK_FALSE(r.pass());
}

TEST_CASE("timescales") {
    const auto t = timescale_report(kParams);
    CHECK(t.transport_rate == doctest::Approx(100.0));
    CHECK(t.diffusion_rate == doctest::Approx(5.0));
    CHECK(t.ratio == doctest::Approx(20.0));
    CHECK(t.T_learn == doctest::Approx(0.1));
    CHECK(t.T_sort == doctest::Approx(2.0));
    CHECK(timescale_report(ModelParams(11, 3.0, 1.0, 1.0)).ratio == doctest::Approx(2.0));
    CHECK(timescale_report(ModelParams(11, 3.0, 1e-6, 1.0)).ratio == doctest::Approx(2e6));
    for (double h : {0.013, 0.2, 0.77, 3.0})
        for (int M : {2, 7, 500}) CHECK(timescale_report(ModelParams(M, 1.5, h, 0.3)).ratio == doctest::Approx(2.0 / h));
}

TEST_CASE("least squares slope, learning and sorting times") {
    CHECK(ls_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
    CHECK(ls_slope({0, 1, 2}, {4, 4, 4}) == 0.0);
    MomentSeries s;
    s.windows = kWindows;
    s.records = {record(0.0, 0.9, 0.1), record(1.0, 0.5, 0.2), record(2.0, 0.2, 0.16)};
    s.records[1].sorting = {0.3, 0.6};
    s.records[2].sorting = {0.05, 0.2};
    CHECK(learning_time(s, kParams) == 2.0);
    CHECK(sorting_time(s, 0, 0.1) == 2.0);
    CHECK(sorting_time(s, 0, 0.4) == 1.0);
    CHECK_FALSE(sorting_time(s, 1, 0.1).has_value());
    s.records[2].alpha = 0.5;
    CHECK_FALSE(learning_time(s, kParams).has_value());
}

TEST_CASE("long-time verdict on a transport-dominated run") {
    const auto s = default_run(40.0);
    const auto v = sorting_and_learning_verdict(s, kParams, kP);
    CHECK(v.regime_ok);
    CHECK(v.phi_decayed);
    CHECK(v.alpha_in_band);
    CHECK(v.verdict == Verdict::Pass);
}

TEST_CASE("already-sorted initial data passes sorting immediately") {
    const Grid g(-12.0, 12.0, 400);
    SolverConfig cfg;
    cfg.dt_max = 0.02;
    const auto s = solve(gaussian_density(g, 6.0, 0.5), 1.0, g, kP, kParams, cfg).series;
    for (double v : s.records.front().sorting) CHECK(v < 0.05);
    const auto v = sorting_and_learning_verdict(s, kParams, kP);
    CHECK(v.sorting_ok);
}

TEST_CASE("diffusion-dominated regime is reported, not enforced") {
    // A large tau makes the surrogate regime condition fail; the |a| bound is then not required.
    const ModelParams slow(11, 3.0, 0.1, 100.0);
    const Grid g(-12.0, 12.0, 200);
    SolverConfig cfg;
    cfg.dt_max = 1.0;
    const auto s = solve(gaussian_density(g, 0.0, 1.0), 10.0, g, kP, slow, cfg).series;
    const auto v = sorting_and_learning_verdict(s, slow, kP);
    CHECK_FALSE(v.regime_ok);
    CHECK_FALSE(v.note.empty());
}

TEST_CASE("short series is inconclusive") {
    MomentSeries s;
    s.windows = kWindows;
    s.records = {record(0.0, 0.5, 0.2)};
    CHECK(sorting_and_learning_verdict(s, kParams, kP).verdict == Verdict::Inconclusive);
    s.records.push_back(record(1.0, 0.2, 0.1));
    AsymptoticsOptions opt;
    opt.min_horizon = 10.0;
    CHECK(sorting_and_learning_verdict(s, kParams, kP, opt).verdict == Verdict::Inconclusive);
    CHECK(to_string(Verdict::Inconclusive) == "inconclusive");
}
