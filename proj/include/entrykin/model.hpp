#pragma once

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace entrykin {

/// Game and learning parameters shared by the agent simulation and the kinetic solver.
///
/// `Mc` is real so capacity sweeps may use non-integer values. Construction validates
/// 2 <= M, 1 < Mc < M, h > 0, tau > 0 and throws ContractViolation otherwise.
class ModelParams {
public:
    ModelParams(int M, double Mc, double h, double tau);

    [[nodiscard]] int M() const noexcept { return M_; }
    [[nodiscard]] double Mc() const noexcept { return Mc_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    /// (Mc - 1) / (M - 1): the entry fraction at which mean payoff vanishes.
    [[nodiscard]] double kappa() const noexcept { return kappa_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    int M_;
    double Mc_;
    double h_;
    double tau_;
    double kappa_;
};

[[nodiscard]] double kappa(const ModelParams& params) noexcept;

/// Per-round payoff to one agent with the stay-out compensation fixed at zero.
/// Throws ContractViolation for m > M, m < 0, or an entrant with m == 0.
[[nodiscard]] double payoff(bool entered, int m, const ModelParams& params);

struct EquilibriumSummary {
    double symmetric_probability;  ///< (Mc-1)/(M-1)
    double expected_entrants;      ///< M (Mc-1)/(M-1)
    double band_lo;                ///< Mc - 1
    double band_hi;                ///< Mc
    bool expected_inside_band;
};

[[nodiscard]] EquilibriumSummary equilibrium_summary(const ModelParams& params);

// ---------------------------------------------------------------------------
// Propensity-to-probability maps

/// p(x) = p_min + (1 - p_min) * sigmoid(scale * (x - center)).
struct LogisticFloor {
    double p_min = 0.1;
    double scale = 1.0;
    double center = 0.0;
    friend bool operator==(const LogisticFloor&, const LogisticFloor&) = default;
};

/// p(x) = sigmoid(alpha * asinh(x / 2)); behaves like x^a/(1+x^a) as x -> +inf and
/// like 1/(1+|x|^a) as x -> -inf, so p_min = 0.
struct RationalTails {
    double alpha = 2.0;
    friend bool operator==(const RationalTails&, const RationalTails&) = default;
};

/// p(x) == value. Test mode for the solver and a degenerate member for condition checks.
struct ConstantP {
    double value = 1.0;
    friend bool operator==(const ConstantP&, const ConstantP&) = default;
};

/// Samples (x, p, p') on an increasing grid. p'' at the nodes comes from centered
/// differences of p'. Between nodes p is a cubic Hermite interpolant and p'' is linear.
struct TabulatedC2 {
    std::vector<double> x;
    std::vector<double> p;
    std::vector<double> dp;
    std::vector<double> d2p;
    std::string source;  ///< file path when loaded from disk, empty otherwise

    static TabulatedC2 from_samples(std::vector<double> x, std::vector<double> p, std::vector<double> dp);
    /// Whitespace-separated three-column text (x p p'); '#' starts a comment.
    static TabulatedC2 load(const std::filesystem::path& path);
};

using ProbabilityFamily = std::variant<LogisticFloor, RationalTails, ConstantP, TabulatedC2>;

/// The map p(x) with its derivatives and its certified constant c_p.
///
/// Immutable after construction. An optional epsilon lifts p to (p + eps)/(1 + eps),
/// which keeps the same c_p certificate.
class ProbabilityFn {
public:
    explicit ProbabilityFn(LogisticFloor f);
    explicit ProbabilityFn(RationalTails f);
    explicit ProbabilityFn(ConstantP f);
    explicit ProbabilityFn(TabulatedC2 f);

    /// order 0 -> p, 1 -> p', 2 -> p''. Throws ContractViolation for other orders,
    /// ExtrapolationError outside a table.
    [[nodiscard]] double eval(double x, int order = 0) const;
    [[nodiscard]] double operator()(double x) const { return eval(x, 0); }
    /// 1 - p(x), computed without cancellation where the family allows it.
    [[nodiscard]] double one_minus(double x) const;

    [[nodiscard]] double p_min() const noexcept { return p_min_; }
    [[nodiscard]] double c_p() const noexcept { return c_p_; }
    [[nodiscard]] double epsilon() const noexcept { return eps_; }
    [[nodiscard]] const ProbabilityFamily& family() const noexcept { return *family_; }
    [[nodiscard]] std::string describe() const;

    /// (p + eps)/(1 + eps); eps == 0 returns an identical copy.
    [[nodiscard]] ProbabilityFn regularized(double eps) const;

private:
    ProbabilityFn(std::shared_ptr<const ProbabilityFamily> fam, double base_p_min, double c_p);
    [[nodiscard]] double base_eval(double x, int order) const;
    [[nodiscard]] double base_one_minus(double x) const;

    std::shared_ptr<const ProbabilityFamily> family_;
    double base_p_min_ = 0.0;
    double p_min_ = 0.0;
    double c_p_ = 0.0;
    double eps_ = 0.0;
};

/// Free-function form of ProbabilityFn::eval.
[[nodiscard]] double prob_eval(const ProbabilityFn& pf, double x, int order);

enum class ConditionKind {
    Monotonicity,      ///< p' < 0 or p decreasing between consecutive grid points
    SlopeBound,        ///< p' > c_p (1 - p)
    CurvatureBound,    ///< |p''| > c_p (1 - p)
    CurvatureVsSlope,  ///< |p''| > c_p p'
};

[[nodiscard]] std::string to_string(ConditionKind k);

struct ConditionViolation {
    double x;
    ConditionKind kind;
    double lhs;
    double rhs;
};

struct ConditionReport {
    std::vector<ConditionViolation> violations;
    /// Points where p' == 0: permitted, but listed because sorting needs p to move.
    std::vector<double> flat_points;
    /// Smallest c_p satisfying the three derivative bounds on this grid (inf if none does).
    double minimal_c_p = 0.0;
    double c_p_tested = 0.0;
    std::size_t grid_size = 0;

    [[nodiscard]] bool certified() const noexcept { return violations.empty(); }
};

/// Checks the a-priori derivative conditions and the long-time curvature condition on a
/// sorted grid. Throws ContractViolation for an empty or unsorted grid.
[[nodiscard]] ConditionReport verify_p_conditions(const ProbabilityFn& pf, std::span<const double> test_grid,
                                                  double c_p_candidate);

/// Uniformly spaced points on [lo, hi] with the given step (hi included when it lands on the lattice).
[[nodiscard]] std::vector<double> linspace_step(double lo, double hi, double step);

}  // namespace entrykin
