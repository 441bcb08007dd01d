#pragma once

#include <optional>
#include <vector>

#include "entrykin/grid.hpp"
#include "entrykin/kinetic.hpp"
#include "entrykin/model.hpp"
#include "entrykin/moments.hpp"

namespace entrykin {

struct SolveOptions {
    std::vector<double> windows{1.0, 2.0};
    /// Uniform record spacing; 0 records after every step.
    double record_dt = 0.0;
    /// Extra record times, hit exactly by shortening the step that crosses them.
    std::vector<double> record_times;
    /// Snapshot times (hit exactly); T is not added implicitly.
    std::vector<double> snapshot_times;
    /// Test mode: hold (c, d) fixed instead of recomputing them from the state.
    std::optional<std::pair<double, double>> frozen_cd;
};

struct Snapshot {
    double t = 0.0;
    std::vector<double> f;
    std::vector<double> p;
    std::vector<double> flux_left_face;  ///< F at the left face of each cell
};

struct SolveStats {
    std::size_t steps = 0;
    double max_mass_drift = 0.0;
    double total_clipped = 0.0;
    double min_f = 0.0;
    double max_step_clipped = 0.0;
    double min_dt = 0.0;
};

struct SolveResult {
    KineticState final_state;
    MomentSeries series;
    std::vector<Snapshot> snapshots;
    SolveStats stats;
};

/// Integrates from f0 to time T with coefficients lagged one step (plus cfg.picard_iters
/// refreshes from the tentative end state). Every quantity uses p regularized by cfg.epsilon.
///
/// Throws ContractViolation when f0 has the wrong size, a negative entry, mass off 1 by more
/// than 1e-10, or beta(0) == 0; StepSizeError when the admissible step collapses; errors of
/// step() propagate.
[[nodiscard]] SolveResult solve(const std::vector<double>& f0, double T, const Grid& grid, const ProbabilityFn& pf,
                                const ModelParams& params, const SolverConfig& cfg, const SolveOptions& opt = {});

}  // namespace entrykin
