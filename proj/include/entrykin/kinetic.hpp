#pragma once

#include <string>
#include <vector>

#include "entrykin/grid.hpp"
#include "entrykin/model.hpp"

namespace entrykin {

struct KineticState {
    std::vector<double> f;  ///< cell averages, >= 0
    double t = 0.0;
    double escaped_left = 0.0;   ///< absorbing mode only
    double escaped_right = 0.0;  ///< absorbing mode only
};

struct CoefficientSet {
    double alpha = 0.0;
    double beta = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;  ///< h (M-1) a / tau
    double d = 0.0;  ///< h^2 (M-1)^2 / (2 tau) * (a^2 + b / (M-1))
};

enum class BoundaryMode { ZeroFlux, AbsorbingLedger };

[[nodiscard]] std::string to_string(BoundaryMode m);
/// Throws ContractViolation for unknown names.
[[nodiscard]] BoundaryMode boundary_mode_from_string(const std::string& s);

struct SolverConfig {
    double theta = 1.0;  ///< diffusion implicitness in [0.5, 1]
    double dt_max = 0.01;
    double cfl = 0.9;  ///< advective Courant limit in (0, 1]
    BoundaryMode boundary = BoundaryMode::ZeroFlux;
    double epsilon = 0.0;  ///< p regularization
    int picard_iters = 0;
    double mass_tol = 1e-10;    ///< allowed |mass - 1| when coefficients are evaluated
    double energy_tol = 1e-4;   ///< cumulative energy-inequality slack used by the monitors

    friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Throws ContractViolation listing the first offending field.
void validate(const SolverConfig& cfg);

/// (p + eps) / (1 + eps); eps == 0 returns pf unchanged.
[[nodiscard]] ProbabilityFn regularize_p(const ProbabilityFn& pf, double epsilon);

/// Coefficients from the two moments alone.
[[nodiscard]] CoefficientSet coefficients_from_moments(double alpha, double beta, const ModelParams& params);

/// p, 1 - p and p_max on cell centres, plus p at x_min for the absorbing ledger.
struct CellTables {
    std::vector<double> p;
    std::vector<double> q;
    double p_max = 0.0;
    double p_left = 0.0;
    double q_left = 0.0;
};

[[nodiscard]] CellTables tabulate(const Grid& grid, const ProbabilityFn& pf);

/// alpha and beta by midpoint quadrature; ledger mass counts at p = 1 (right) and p(x_min) (left).
/// Throws MassViolation if |sum(f) dx + ledger - 1| > mass_tol.
[[nodiscard]] CoefficientSet compute_coefficients(const KineticState& s, const Grid& grid, const ProbabilityFn& pf,
                                                  const ModelParams& params, double mass_tol = 1e-8);
[[nodiscard]] CoefficientSet compute_coefficients(const KineticState& s, const Grid& grid, const CellTables& tab,
                                                  const ModelParams& params, double mass_tol = 1e-8);

struct StepStats {
    double mass_drift = 0.0;  ///< |total after - total before|, ledger included
    double clipped = 0.0;     ///< mass removed from negative cells (then redistributed)
    double min_f = 0.0;
};

/// Largest dt allowed by the advective limit: cfl * dx / (|c| * p_max), capped by dt_max.
[[nodiscard]] double admissible_dt(const CoefficientSet& co, const Grid& grid, const CellTables& tab,
                                   const SolverConfig& cfg);

/// One Lie-split step: explicit upwind transport of g = p f, then theta-implicit diffusion of g
/// (tridiagonal solve). Throws ContractViolation for dt < 0 or dt above the advective limit,
/// ParabolicityError for d < 0, non-finite d, or a failed pivot.
[[nodiscard]] KineticState step(const KineticState& s, const CoefficientSet& co, const Grid& grid,
                                const ProbabilityFn& pf, const SolverConfig& cfg, double dt,
                                StepStats* stats = nullptr);
[[nodiscard]] KineticState step(const KineticState& s, const CoefficientSet& co, const Grid& grid,
                                const CellTables& tab, const SolverConfig& cfg, double dt,
                                StepStats* stats = nullptr);

/// Face fluxes F_0..F_N of c (p f)_upwind - d d/dx (p f) with the boundary rule of cfg.
[[nodiscard]] std::vector<double> face_fluxes(const KineticState& s, const CoefficientSet& co, const Grid& grid,
                                              const CellTables& tab, const SolverConfig& cfg);

}  // namespace entrykin
