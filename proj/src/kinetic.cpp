#include "entrykin/kinetic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

std::string to_string(BoundaryMode m) {
    return m == BoundaryMode::ZeroFlux ? "zero_flux" : "absorbing_ledger";
}

BoundaryMode boundary_mode_from_string(const std::string& s) {
    if (s == "zero_flux") return BoundaryMode::ZeroFlux;
    if (s == "absorbing_ledger") return BoundaryMode::AbsorbingLedger;
    throw ContractViolation(fmt::format("unknown boundary mode '{}'", s));
}

void validate(const SolverConfig& cfg) {
    auto req = [](bool ok, const char* what) {
        if (!ok) throw ContractViolation(what);
    };
    req(cfg.theta >= 0.5 && cfg.theta <= 1.0, "solver.theta must lie in [0.5, 1]");
    req(std::isfinite(cfg.dt_max) && cfg.dt_max > 0.0, "solver.dt_max must be > 0");
    req(cfg.cfl > 0.0 && cfg.cfl <= 1.0, "solver.cfl must lie in (0, 1]");
    req(std::isfinite(cfg.epsilon) && cfg.epsilon >= 0.0, "solver.epsilon must be >= 0");
    req(cfg.picard_iters >= 0, "solver.picard_iters must be >= 0");
    req(cfg.mass_tol > 0.0, "solver.mass_tol must be > 0");
    req(cfg.energy_tol > 0.0, "solver.energy_tol must be > 0");
}

ProbabilityFn regularize_p(const ProbabilityFn& pf, double epsilon) { return pf.regularized(epsilon); }

CoefficientSet coefficients_from_moments(double alpha, double beta, const ModelParams& params) {
    CoefficientSet co;
    const double M1 = params.M() - 1.0;
    co.alpha = alpha;
    co.beta = beta;
    co.a = params.kappa() - alpha;
    co.b = alpha * (1.0 - alpha);
    co.c = params.h() * M1 * co.a / params.tau();
    co.d = params.h() * params.h() * M1 * M1 / (2.0 * params.tau()) * (co.a * co.a + co.b / M1);
    return co;
}

CellTables tabulate(const Grid& grid, const ProbabilityFn& pf) {
    CellTables t;
    t.p.resize(grid.size());
    t.q.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid.center(i);
        t.p[i] = pf(x);
        t.q[i] = pf.one_minus(x);
    }
    t.p_max = *std::max_element(t.p.begin(), t.p.end());
    t.p_left = pf(grid.x_min());
    t.q_left = pf.one_minus(grid.x_min());
    return t;
}

CoefficientSet compute_coefficients(const KineticState& s, const Grid& grid, const CellTables& tab,
                                    const ModelParams& params, double mass_tol) {
    if (s.f.size() != grid.size()) throw ContractViolation("state size differs from grid");
    double mass = 0.0, alpha = 0.0, beta = 0.0;
    for (std::size_t i = 0; i < s.f.size(); ++i) {
        mass += s.f[i];
        alpha += tab.p[i] * s.f[i];
        beta += tab.p[i] * tab.q[i] * s.f[i];
    }
    const double dx = grid.dx();
    mass = mass * dx + s.escaped_left + s.escaped_right;
    if (!(std::abs(mass - 1.0) <= mass_tol))
        throw MassViolation(fmt::format("total mass {:.17g} differs from 1 by more than {}", mass, mass_tol));
    alpha = alpha * dx + s.escaped_right + s.escaped_left * tab.p_left;
    beta = beta * dx + s.escaped_left * tab.p_left * tab.q_left;
    return coefficients_from_moments(alpha, beta, params);
}

CoefficientSet compute_coefficients(const KineticState& s, const Grid& grid, const ProbabilityFn& pf,
                                    const ModelParams& params, double mass_tol) {
    return compute_coefficients(s, grid, tabulate(grid, pf), params, mass_tol);
}

double admissible_dt(const CoefficientSet& co, const Grid& grid, const CellTables& tab, const SolverConfig& cfg) {
    const double speed = std::abs(co.c) * tab.p_max;
    if (speed == 0.0) return cfg.dt_max;
    return std::min(cfg.dt_max, cfg.cfl * grid.dx() / speed);
}

namespace {

double total(const KineticState& s, double dx) {
    double m = 0.0;
    for (double v : s.f) m += v;
    return m * dx + s.escaped_left + s.escaped_right;
}

}  // namespace

std::vector<double> face_fluxes(const KineticState& s, const CoefficientSet& co, const Grid& grid,
                                const CellTables& tab, const SolverConfig& cfg) {
    const std::size_t N = grid.size();
    const double dx = grid.dx();
    std::vector<double> g(N), F(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) g[i] = tab.p[i] * s.f[i];
    for (std::size_t i = 1; i < N; ++i) {
        const double adv = co.c >= 0.0 ? co.c * g[i - 1] : co.c * g[i];
        F[i] = adv - co.d * (g[i] - g[i - 1]) / dx;
    }
    if (cfg.boundary == BoundaryMode::AbsorbingLedger) {
        F[0] = (co.c < 0.0 ? co.c * g[0] : 0.0) - co.d * g[0] / dx;
        F[N] = (co.c > 0.0 ? co.c * g[N - 1] : 0.0) + co.d * g[N - 1] / dx;
    }
    return F;
}

KineticState step(const KineticState& s, const CoefficientSet& co, const Grid& grid, const CellTables& tab,
                  const SolverConfig& cfg, double dt, StepStats* stats) {
    const std::size_t N = grid.size();
    if (s.f.size() != N) throw ContractViolation("state size differs from grid");
    if (!(dt >= 0.0) || !std::isfinite(dt)) throw ContractViolation("dt must be finite and >= 0");
    if (!std::isfinite(co.d) || co.d < 0.0)
        throw ParabolicityError(fmt::format("diffusion coefficient d = {} is not admissible", co.d));
    if (!std::isfinite(co.c)) throw StepSizeError("transport coefficient is not finite");
    const double dx = grid.dx();
    if (std::abs(co.c) * tab.p_max * dt > cfg.cfl * dx * (1.0 + 1e-12))
        throw ContractViolation(fmt::format("dt = {} exceeds the advective limit {}", dt,
                                            cfg.cfl * dx / (std::abs(co.c) * tab.p_max)));
    KineticState out = s;
    out.t = s.t + dt;
    if (dt == 0.0) {
        if (stats) *stats = {0.0, 0.0, N ? *std::min_element(s.f.begin(), s.f.end()) : 0.0};
        return out;
    }
    const bool absorbing = cfg.boundary == BoundaryMode::AbsorbingLedger;
    const double before = total(s, dx);

    // Transport: first-order upwind on g = p f.
    std::vector<double> g(N), F(N + 1, 0.0);
    for (std::size_t i = 0; i < N; ++i) g[i] = tab.p[i] * s.f[i];
    for (std::size_t i = 1; i < N; ++i) F[i] = co.c >= 0.0 ? co.c * g[i - 1] : co.c * g[i];
    if (absorbing) {
        F[0] = co.c < 0.0 ? co.c * g[0] : 0.0;
        F[N] = co.c > 0.0 ? co.c * g[N - 1] : 0.0;
    }
    const double lam = dt / dx;
    std::vector<double> fs(N);
    for (std::size_t i = 0; i < N; ++i) fs[i] = s.f[i] - lam * (F[i + 1] - F[i]);
    out.escaped_left += -dt * F[0];
    out.escaped_right += dt * F[N];

    // Diffusion: (I - theta r L P) f = (I + (1 - theta) r L P) fs, r = d dt / dx^2.
    const double r = co.d * dt / (dx * dx);
    const double th = cfg.theta;
    std::vector<double> gs(N), rhs(N);
    for (std::size_t i = 0; i < N; ++i) gs[i] = tab.p[i] * fs[i];
    auto lap = [&](std::size_t i) {
        const double left = i > 0 ? gs[i - 1] : 0.0;
        const double right = i + 1 < N ? gs[i + 1] : 0.0;
        double self = 2.0 * gs[i];
        if (!absorbing) self -= (i == 0 ? gs[i] : 0.0) + (i + 1 == N ? gs[i] : 0.0);
        return left - self + right;
    };
    for (std::size_t i = 0; i < N; ++i) rhs[i] = fs[i] + (1.0 - th) * r * lap(i);

    std::vector<double> lower(N, 0.0), diag(N), upper(N, 0.0);
    for (std::size_t i = 0; i < N; ++i) {
        double nb = 2.0;
        if (!absorbing && (i == 0 || i + 1 == N)) nb = 1.0;
        diag[i] = 1.0 + th * r * nb * tab.p[i];
        if (i > 0) lower[i] = -th * r * tab.p[i - 1];
        if (i + 1 < N) upper[i] = -th * r * tab.p[i + 1];
    }
    // Thomas algorithm; the matrix is column diagonally dominant so no pivoting is needed.
    std::vector<double> cp(N), dp(N);
    double piv = diag[0];
    if (!(piv > 0.0) || !std::isfinite(piv)) throw ParabolicityError("tridiagonal pivot breakdown at row 0");
    cp[0] = upper[0] / piv;
    dp[0] = rhs[0] / piv;
    for (std::size_t i = 1; i < N; ++i) {
        piv = diag[i] - lower[i] * cp[i - 1];
        if (!(piv > 0.0) || !std::isfinite(piv))
            throw ParabolicityError(fmt::format("tridiagonal pivot breakdown at row {}", i));
        cp[i] = upper[i] / piv;
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / piv;
    }
    out.f[N - 1] = dp[N - 1];
    for (std::size_t i = N - 1; i-- > 0;) out.f[i] = dp[i] - cp[i] * out.f[i + 1];

    if (absorbing) {
        const double flux_scale = r * dx;
        out.escaped_left += flux_scale * (th * tab.p[0] * out.f[0] + (1.0 - th) * gs[0]);
        out.escaped_right += flux_scale * (th * tab.p[N - 1] * out.f[N - 1] + (1.0 - th) * gs[N - 1]);
    }

    // Clip negatives and rescale the positive part so the grid mass is unchanged.
    double neg = 0.0, pos = 0.0;
    for (double v : out.f) (v < 0.0 ? neg : pos) += v;
    double clipped = 0.0;
    if (neg < 0.0) {
        clipped = -neg * dx;
        const double scale = pos > 0.0 ? (pos + neg) / pos : 0.0;
        for (auto& v : out.f) v = v < 0.0 ? 0.0 : v * scale;
    }
    if (stats) {
        stats->mass_drift = std::abs(total(out, dx) - before);
        stats->clipped = clipped;
        stats->min_f = *std::min_element(out.f.begin(), out.f.end());
    }
    return out;
}

KineticState step(const KineticState& s, const CoefficientSet& co, const Grid& grid, const ProbabilityFn& pf,
                  const SolverConfig& cfg, double dt, StepStats* stats) {
    return step(s, co, grid, tabulate(grid, pf), cfg, dt, stats);
}

}  // namespace entrykin
