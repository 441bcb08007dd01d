#pragma once

#include <optional>
#include <string>
#include <vector>

#include "entrykin/model.hpp"
#include "entrykin/moments.hpp"

namespace entrykin {

struct RecordViolation {
    std::size_t index;
    double t;
    std::string what;
    double value;
};

struct InvariantReport {
    std::vector<RecordViolation> violations;
    double max_abs_a = 0.0;
    double min_b_minus_beta = 0.0;
    [[nodiscard]] bool pass() const noexcept { return violations.empty(); }
};

/// Pointwise record invariants: |a| < 1, 0 <= b <= 1, b >= beta - 1e-12, phi >= 0, sorting in
/// [0, 1 + 1e-12], alpha in [p_min, 1], strictly increasing t.
[[nodiscard]] InvariantReport check_record_invariants(const MomentSeries& series, const ProbabilityFn& pf);

struct EnergyReport {
    double e0 = 0.0;
    double tol = 0.0;
    /// max_k (E_k + sum_{j<k} d_j G_j (t_{j+1} - t_j) - E_0) / E_0, floored at 0.
    double max_violation = 0.0;
    std::vector<std::size_t> violating;  ///< record indices above tol
    [[nodiscard]] bool pass() const noexcept { return violating.empty(); }
};

/// Discrete energy inequality with left Riemann sums over records; d and G are read from the
/// series unless d_series / grad_series are supplied (same length as the records).
[[nodiscard]] EnergyReport check_energy_inequality(const MomentSeries& series, double tol,
                                                   const std::vector<double>* d_series = nullptr,
                                                   const std::vector<double>* grad_series = nullptr);

struct C0Assembly {
    double value = 0.0;
    double c_p = 0.0;
    double sup_abs_c = 0.0;
    double sup_d = 0.0;
    std::string formula;
};

/// c0 = c_p (1 + 2 c_p) (sup|c| + sup d) over the records.
[[nodiscard]] C0Assembly assemble_c0(double c_p, const MomentSeries& series);

struct BoundsReport {
    double c0 = 0.0;
    double tol = 0.0;
    std::vector<RecordViolation> violations;
    double worst_alpha_ratio = 0.0;  ///< max |dalpha/dt| / allowed
    double worst_beta_ratio = 0.0;
    double worst_lower_ratio = 0.0;  ///< max beta(0) e^{-c0 t} / beta(t)
    bool inconclusive = false;       ///< fewer than 3 records
    [[nodiscard]] bool pass() const noexcept { return !inconclusive && violations.empty(); }
};

/// Over each record interval [t_k, t_{k+1}]: |dalpha|/dt and |dbeta|/dt must not exceed
/// c0 min(beta_k, beta_{k+1}) e^{c0 dt} (1 + tol), the largest value c0 beta can take inside the
/// interval if the bounds hold; and beta(t_k) >= beta(0) e^{-c0 t_k} (1 - tol).
[[nodiscard]] BoundsReport check_moment_bounds(const MomentSeries& series, double c0, double tol = 1e-6);

enum class Verdict { Pass, Fail, Inconclusive };
[[nodiscard]] std::string to_string(Verdict v);

struct AsymptoticsOptions {
    double phi_frac = 0.1;
    double sorting_tol = 0.05;
    double bound_factor = 5e-5;  ///< surrogate for the non-constructive regime constant
    double min_horizon = 0.0;    ///< series shorter than this is inconclusive
};

struct AsymptoticsReport {
    Verdict verdict = Verdict::Inconclusive;
    double phi0 = 0.0;
    double phi_final = 0.0;
    bool phi_decayed = false;
    double phi_trailing_slope = 0.0;
    bool phi_eventually_decreasing = false;
    std::vector<double> sorting_final;
    std::vector<double> sorting_trailing_slope;
    bool sorting_ok = false;
    double band_lo = 0.0;
    double band_hi = 0.0;
    double alpha_trailing_min = 0.0;
    double alpha_trailing_max = 0.0;
    bool alpha_in_band = false;
    double a_trailing_max = 0.0;
    double a_bound = 0.0;  ///< surrogate bound bound_factor sqrt(tau) / p_min^4
    bool a_bound_ok = false;
    double regime_lhs = 0.0;  ///< bound_factor sqrt(tau) (M-1)
    double regime_rhs = 0.0;  ///< p_min^4
    bool regime_ok = false;
    std::string note;
};

/// Long-time verdict from trailing-quarter windows. Pass requires phi decay, every sorting window
/// below sorting_tol, alpha inside ((Mc-1)/M, Mc/M) and, when the regime surrogate holds, the
/// surrogate |a| bound.
[[nodiscard]] AsymptoticsReport sorting_and_learning_verdict(const MomentSeries& series, const ModelParams& params,
                                                             const ProbabilityFn& pf,
                                                             const AsymptoticsOptions& opt = {});

struct TimescaleReport {
    double transport_rate = 0.0;  ///< h (M-1) / tau
    double diffusion_rate = 0.0;  ///< h^2 (M-1) / (2 tau)
    double ratio = 0.0;           ///< transport / diffusion = 2 / h
    double T_learn = 0.0;
    double T_sort = 0.0;
};

[[nodiscard]] TimescaleReport timescale_report(const ModelParams& params, double C_T = 10.0);

/// First record time with alpha strictly inside ((Mc-1)/M, Mc/M).
[[nodiscard]] std::optional<double> learning_time(const MomentSeries& series, const ModelParams& params);
/// First record time with sorting[window] < threshold.
[[nodiscard]] std::optional<double> sorting_time(const MomentSeries& series, std::size_t window, double threshold);

/// Least-squares slope of y against t.
[[nodiscard]] double ls_slope(const std::vector<double>& t, const std::vector<double>& y);

}  // namespace entrykin
