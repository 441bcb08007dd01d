#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "entrykin/abm.hpp"
#include "entrykin/config.hpp"
#include "entrykin/diagnostics.hpp"
#include "entrykin/solve.hpp"

namespace entrykin {

enum class Subcommand { Abm, Pde, Compare, Sweep, CheckP, CheckClosure };

[[nodiscard]] std::string to_string(Subcommand s);
/// Throws ContractViolation for unknown names.
[[nodiscard]] Subcommand subcommand_from_string(const std::string& s);

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct PdeExperiment {
    SolveResult result;
    InvariantReport invariants;
    EnergyReport energy;
    C0Assembly c0;
    BoundsReport bounds;
    AsymptoticsReport asymptotics;
    TimescaleReport timescales;
    std::vector<CheckLine> checks;
};

/// Solves the configured PDE and runs every monitor. extra_record_times are added to the
/// record schedule; T overrides pde.T when given.
[[nodiscard]] PdeExperiment run_pde_experiment(const ExperimentConfig& cfg,
                                               const std::vector<double>& extra_record_times = {},
                                               std::optional<double> T = std::nullopt,
                                               const std::vector<double>& snapshot_times = {});

/// Replica ensemble with x0 drawn from the discretized initial law.
[[nodiscard]] AbmEnsemble run_abm_experiment(const ExperimentConfig& cfg, unsigned threads,
                                             const std::vector<std::int64_t>& record_at,
                                             const std::vector<std::int64_t>& snapshot_rounds);

struct AlphaCheckpoint {
    std::int64_t n = 0;
    double t = 0.0;
    double alpha_abm = 0.0;
    double alpha_se = 0.0;
    double alpha_pde = 0.0;
    double abs_diff = 0.0;
};

struct DensityCheck {
    std::int64_t n = 0;
    double t = 0.0;
    double l1 = 0.0;            ///< on cells merged `coarsen` at a time, plus out-of-range ABM mass
    double out_of_range = 0.0;  ///< ABM mass outside the grid
};

struct ComparisonReport {
    std::vector<AlphaCheckpoint> checkpoints;
    double sup_abs_diff = 0.0;
    double max_se = 0.0;
    double alpha_threshold = 0.0;  ///< 3 max_se + allowance
    bool alpha_pass = false;
    std::vector<DensityCheck> densities;  ///< at rounds/2 and rounds
    double l1_tol = 0.0;
    bool l1_pass = false;
};

/// L1 distance between two cell densities after merging `coarsen` adjacent cells.
[[nodiscard]] double coarse_l1(const std::vector<double>& f, const std::vector<double>& g, double dx, int coarsen);

struct CompareExperiment {
    AbmEnsemble abm;
    PdeExperiment pde;
    ComparisonReport report;
};

/// ABM ensemble against the PDE on the same initial law, aligned at t = tau n. The PDE horizon is
/// tau * abm.rounds (pde.T is ignored).
[[nodiscard]] CompareExperiment run_compare_experiment(const ExperimentConfig& cfg, unsigned threads);

struct SweepPoint {
    std::size_t index = 0;
    int M = 0;
    double Mc = 0.0;
    double h = 0.0;
    double tau = 0.0;
    std::string status;  ///< ok | error
    std::string error;
    std::string verdict;
    bool checks_pass = false;
    std::optional<double> learn_time;
    std::optional<double> sort_time;
    double predicted_ratio = 0.0;  ///< 2 / h
    std::string dir;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    bool monotone = false;  ///< measured sort/learn gap grows as h shrinks within each (M, Mc) group
    std::string monotone_detail;
};

/// Runs every sweep point (writing per-point artifacts under out_dir when non-empty).
[[nodiscard]] SweepResult run_sweep_experiment(const ExperimentConfig& cfg, unsigned threads,
                                               const std::filesystem::path& out_dir);

struct RunOptions {
    std::filesystem::path out_dir;
    unsigned threads = 1;
    std::ostream* log = nullptr;  ///< human summary; may be null
};

struct RunOutcome {
    int exit_code = 0;  ///< 0 all checks pass, 2 some check failed
    std::vector<CheckLine> checks;
};

/// Executes one subcommand and writes its artifacts to opt.out_dir (created if missing).
/// Execution errors propagate as exceptions; the CLI maps them to exit status 1.
RunOutcome run(Subcommand cmd, const ExperimentConfig& cfg, const RunOptions& opt);

/// 64-bit FNV-1a of the serialized config, as 16 hex digits.
[[nodiscard]] std::string config_hash(const ExperimentConfig& cfg);

}  // namespace entrykin
