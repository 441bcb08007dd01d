#include "entrykin/moments.hpp"

#include "entrykin/errors.hpp"

namespace entrykin {

MomentRecord moments(const KineticState& s, const Grid& grid, const CellTables& tab, const ModelParams& params,
                     std::span<const double> windows, BoundaryMode mode) {
    const std::size_t N = grid.size();
    if (s.f.size() != N) throw ContractViolation("state size differs from grid");
    const double dx = grid.dx();
    MomentRecord r;
    r.t = s.t;
    double mass = 0.0, alpha = 0.0, beta = 0.0, energy = 0.0, e2 = 0.0, grad = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double f = s.f[i], p = tab.p[i];
        mass += f;
        alpha += p * f;
        beta += p * tab.q[i] * f;
        energy += p * f * f;
        e2 += p * p * f * f;
        if (i + 1 < N) {
            const double dg = tab.p[i + 1] * s.f[i + 1] - p * f;
            grad += dg * dg;
        }
    }
    if (mode == BoundaryMode::AbsorbingLedger) {
        const double g0 = tab.p[0] * s.f[0], gN = tab.p[N - 1] * s.f[N - 1];
        grad += g0 * g0 + gN * gN;
    }
    r.mass = mass * dx + s.escaped_left + s.escaped_right;
    alpha = alpha * dx + s.escaped_right + s.escaped_left * tab.p_left;
    beta = beta * dx + s.escaped_left * tab.p_left * tab.q_left;
    const auto co = coefficients_from_moments(alpha, beta, params);
    r.alpha = co.alpha;
    r.beta = co.beta;
    r.a = co.a;
    r.b = co.b;
    r.c = co.c;
    r.d = co.d;
    r.energy = energy * dx;
    r.grad_energy = grad / dx;
    const double w = e2 * dx;
    r.phi = r.beta * w * w * w;
    for (double R : windows) {
        if (!(R > 0.0)) throw ContractViolation("sorting window must be > 0");
        double m = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double x = grid.center(i);
            if (x > -R && x < R) m += s.f[i];
        }
        r.sorting.push_back(m * dx);
    }
    r.bmass_left = s.f[0] * dx + s.escaped_left;
    r.bmass_right = s.f[N - 1] * dx + s.escaped_right;
    return r;
}

MomentRecord moments(const KineticState& s, const Grid& grid, const ProbabilityFn& pf, const ModelParams& params,
                     std::span<const double> windows, BoundaryMode mode) {
    return moments(s, grid, tabulate(grid, pf), params, windows, mode);
}

}  // namespace entrykin
