#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "entrykin/model.hpp"

namespace entrykin {

struct Atom {
    double x;
    double w;
};

/// Finitely many distinct atoms with positive weights summing to 1 (within 1e-12).
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<Atom> atoms);
    /// Rescales positive weights to unit sum before validating.
    static DiscreteDistribution normalized(std::vector<Atom> atoms);

    [[nodiscard]] const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    [[nodiscard]] std::size_t size() const noexcept { return atoms_.size(); }

private:
    std::vector<Atom> atoms_;
};

struct PayoffMoments {
    Eigen::VectorXd A;  ///< A_i = E[(Mc - m) d_i]
    Eigen::MatrixXd D;  ///< D_ik = E[(Mc - m)^2 d_i d_k]
};

inline constexpr int kMaxMomentAgents = 20;
inline constexpr int kMaxAveragedAgents = 12;
inline constexpr std::size_t kMaxAveragedAtoms = 6;

/// Exact expectations over all 2^M entry profiles. Throws SizeError for M > 20 and
/// ContractViolation if xbar.size() != M.
[[nodiscard]] PayoffMoments exact_payoff_moments(std::span<const double> xbar, const ModelParams& params,
                                                 const ProbabilityFn& pf);

/// Same, from entry probabilities directly (p and 1 - p supplied separately for accuracy).
[[nodiscard]] PayoffMoments exact_payoff_moments_p(std::span<const double> p, std::span<const double> q, double Mc);

/// Smallest eigenvalue of a symmetric matrix.
[[nodiscard]] double min_eigenvalue(const Eigen::MatrixXd& sym);

struct ClosureCoefficients {
    double alpha;
    double beta;
    double a;
    double b;
    double drift_coeff;      ///< (M-1) a
    double diffusion_coeff;  ///< (M-1)^2 a^2 + (M-1) b
};

[[nodiscard]] ClosureCoefficients closure_coefficients(const DiscreteDistribution& f, const ModelParams& params,
                                                       const ProbabilityFn& pf);

struct AveragedCoefficients {
    double drift;      ///< E[A_j | x_j = x] / p(x)
    double diffusion;  ///< E[D_jj | x_j = x] / p(x)
};

/// Conditional drift and diffusion of one agent placed at x_query when the other M-1 agents are
/// i.i.d. from f. Enumerates every composition of the M-1 agents over the atoms (multinomial
/// weights) and, inside each, all 2^M entry profiles. Limits: M <= 12, at most 6 atoms (SizeError);
/// p(x_query) must be > 0.
[[nodiscard]] AveragedCoefficients averaged_coefficients_exact(const DiscreteDistribution& f, double x_query,
                                                               const ModelParams& params, const ProbabilityFn& pf);

struct ClosureCheckRow {
    std::string check;
    int M = 0;
    int cases = 0;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// Randomized self-check of the closure identities and moment oracles, driven by `seed`.
/// Rows: one "closure" row per M in [M_lo, M_hi] (dists_per_M random distributions with up to
/// max_atoms atoms), an "m2_oracle" row and a "psd_m6" row.
[[nodiscard]] std::vector<ClosureCheckRow> run_closure_checks(std::uint64_t seed, const ProbabilityFn& pf,
                                                              int M_lo = 2, int M_hi = 8, int dists_per_M = 50,
                                                              std::size_t max_atoms = 4);

}  // namespace entrykin
