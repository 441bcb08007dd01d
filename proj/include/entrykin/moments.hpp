#pragma once

#include <span>
#include <string>
#include <vector>

#include "entrykin/grid.hpp"
#include "entrykin/kinetic.hpp"
#include "entrykin/model.hpp"

namespace entrykin {

struct MomentRecord {
    double t = 0.0;
    double mass = 0.0;  ///< sum(f) dx plus escaped ledger mass
    double alpha = 0.0;
    double beta = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double energy = 0.0;       ///< sum p f^2 dx
    double grad_energy = 0.0;  ///< sum over faces of ((g_{i+1} - g_i)/dx)^2 dx, g = p f
    double phi = 0.0;          ///< beta * (sum p^2 f^2 dx)^3
    std::vector<double> sorting;  ///< mass of cells with centre in (-R, R), one per window
    double bmass_left = 0.0;      ///< first cell mass plus left ledger
    double bmass_right = 0.0;     ///< last cell mass plus right ledger
};

struct MomentSeries {
    std::vector<double> windows;
    std::vector<MomentRecord> records;
    std::string provenance;  ///< free text carried into report files
};

/// Midpoint-quadrature moments of a kinetic state. In absorbing mode the boundary faces count
/// in grad_energy with a zero ghost value, matching the solver.
[[nodiscard]] MomentRecord moments(const KineticState& s, const Grid& grid, const CellTables& tab,
                                   const ModelParams& params, std::span<const double> windows,
                                   BoundaryMode mode = BoundaryMode::ZeroFlux);
[[nodiscard]] MomentRecord moments(const KineticState& s, const Grid& grid, const ProbabilityFn& pf,
                                   const ModelParams& params, std::span<const double> windows,
                                   BoundaryMode mode = BoundaryMode::ZeroFlux);

}  // namespace entrykin
