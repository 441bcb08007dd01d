#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "entrykin/grid.hpp"
#include "entrykin/model.hpp"
#include "entrykin/rng.hpp"

namespace entrykin {

struct AgentEnsembleState {
    std::vector<double> x;
    std::int64_t n = 0;
    Rng rng;
};

/// Applies one round with the given entry decisions (entered[i] != 0) and returns m.
/// Throws ContractViolation if the decision vector length differs from M or from x.
int apply_entries(AgentEnsembleState& state, const ModelParams& params, std::span<const std::uint8_t> entered);

/// One round: agent i (in index order) draws u_i = uniform01(rng) and enters iff u_i < p(x_i),
/// so exactly M draws are consumed. Entrants move by h (Mc - m). Returns m.
int step_round(AgentEnsembleState& state, const ModelParams& params, const ProbabilityFn& pf);

/// Rounds at which records are kept: 0, every `every` rounds, geometrically growing rounds
/// (factor `growth` > 1, disabled when <= 1), any `extra` rounds <= total, and `total`.
[[nodiscard]] std::vector<std::int64_t> record_rounds(std::int64_t total, std::int64_t every, double growth,
                                                      std::span<const std::int64_t> extra = {});

struct AbmRecord {
    std::int64_t n = 0;
    double t = 0.0;
    int m = 0;  ///< entrants in round n (0 for the initial record)
    double alpha_hat = 0.0;
    double a_hat = 0.0;
    std::vector<double> sort_frac;  ///< one entry per configured window
};

struct AbmSeries {
    std::vector<double> windows;
    std::vector<AbmRecord> records;
};

struct AbmRunOptions {
    std::vector<double> windows{1.0, 2.0};
    std::vector<std::int64_t> record_at;  ///< empty: every round
};

/// A single replica. Record n carries the entrant count of round n (rounds are 1-based), so the
/// initial record reports m = 0.
[[nodiscard]] AbmSeries run_trajectory(std::vector<double> x0, std::int64_t rounds, const ModelParams& params,
                                       const ProbabilityFn& pf, std::uint64_t seed, const AbmRunOptions& opt = {});

/// Draws M initial propensities from a replica stream.
using X0Sampler = std::function<std::vector<double>(Rng&, int M)>;

struct AbmAggregateRow {
    std::int64_t n = 0;
    double t = 0.0;
    double m_mean = 0.0;
    double m_se = 0.0;
    double alpha_hat = 0.0;
    double alpha_se = 0.0;
    double a_hat = 0.0;
    std::vector<double> sort_frac;
    std::size_t replica_count = 0;
};

struct AbmEnsemble {
    std::vector<double> windows;
    std::vector<AbmAggregateRow> rows;
    /// Pooled propensities of all replicas at each snapshot round, replica-major.
    std::vector<std::int64_t> snapshot_rounds;
    std::vector<std::vector<double>> snapshots;
};

struct EnsembleOptions {
    AbmRunOptions run;
    std::vector<std::int64_t> snapshot_rounds;
    unsigned threads = 1;
    /// Replica execution order; empty means 0..R-1. Only used to test order independence.
    std::vector<std::size_t> execution_order;
};

/// Replica r seeds its engine with split_seed(base_seed, r), draws x0 from that stream, then
/// plays. Reduction runs in replica index order, so results do not depend on scheduling.
[[nodiscard]] AbmEnsemble ensemble_run(std::size_t replicas, std::uint64_t base_seed, const X0Sampler& x0_sampler,
                                       std::int64_t rounds, const ModelParams& params, const ProbabilityFn& pf,
                                       const EnsembleOptions& opt = {});

/// Mean and standard error (sample sd / sqrt(n), zero for n == 1), summed in index order.
struct MeanSe {
    double mean;
    double se;
};
[[nodiscard]] MeanSe mean_se(std::span<const double> v);

struct EmpiricalDensity {
    std::vector<double> f;
    double out_left = 0.0;
    double out_right = 0.0;
};

/// Histogram normalized so that sum(f) * dx is the in-range fraction. x == x_max lands in the
/// last cell.
[[nodiscard]] EmpiricalDensity empirical_density(std::span<const double> xs, const Grid& grid);

/// Fraction of xs strictly inside (-R, R). Throws ContractViolation for R <= 0.
[[nodiscard]] double sorting_fraction(std::span<const double> xs, double R);

/// Inverse-CDF sampler for a cell-averaged density: picks a cell by cumulative mass, then a
/// uniform point inside it (two draws per sample).
class GridDensitySampler {
public:
    GridDensitySampler(const Grid& grid, std::span<const double> f);
    [[nodiscard]] double sample(Rng& rng) const;
    [[nodiscard]] std::vector<double> sample_n(Rng& rng, int n) const;

private:
    Grid grid_;
    std::vector<double> cdf_;
};

}  // namespace entrykin
