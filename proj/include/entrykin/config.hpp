#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "entrykin/grid.hpp"
#include "entrykin/kinetic.hpp"
#include "entrykin/model.hpp"

namespace entrykin {

struct ModelSection {
    int M = 11;
    double Mc = 3.0;
    double h = 0.1;
    double tau = 0.01;
    friend bool operator==(const ModelSection&, const ModelSection&) = default;
};

/// family: logistic_floor (p_min, scale, center) | rational_tails (alpha) | constant (value) |
/// tabulated (table, resolved against the config file's directory).
struct ProbabilitySection {
    std::string family = "logistic_floor";
    double p_min = 0.1;
    double scale = 1.0;
    double center = -2.5;
    double alpha = 2.0;
    double value = 1.0;
    std::string table;
    friend bool operator==(const ProbabilitySection&, const ProbabilitySection&) = default;
};

/// Initial propensity law shared by both models. kind: gaussian (mean, sd) | uniform (lo, hi).
struct X0Section {
    std::string kind = "gaussian";
    double mean = 0.0;
    double sd = 1.0;
    double lo = -1.0;
    double hi = 1.0;
    friend bool operator==(const X0Section&, const X0Section&) = default;
};

struct AbmSection {
    int replicas = 100;
    std::int64_t rounds = 1000;
    std::uint64_t base_seed = 12345;
    X0Section x0;
    std::vector<double> windows{1.0, 2.0};
    std::int64_t record_every = 1;
    double record_growth = 0.0;
    std::vector<std::int64_t> snapshot_rounds;
    friend bool operator==(const AbmSection&, const AbmSection&) = default;
};

struct PdeSection {
    double x_min = -12.0;
    double x_max = 12.0;
    int n_cells = 800;
    SolverConfig solver;
    double T = 100.0;
    double record_dt = 0.0;
    std::vector<double> snapshot_times;
    friend bool operator==(const PdeSection&, const PdeSection&) = default;
};

struct DiagnosticsSection {
    double phi_frac = 0.1;
    double sorting_tol = 0.05;
    double bound_factor = 5e-5;
    double C_T = 10.0;
    double bounds_tol = 1e-6;
    double mass_drift_tol = 1e-13;
    double clipped_tol = 1e-6;
    double cp_grid_step = 0.01;
    friend bool operator==(const DiagnosticsSection&, const DiagnosticsSection&) = default;
};

struct CompareSection {
    std::int64_t checkpoint_every = 10;
    int coarsen = 4;
    double alpha_allowance = 0.01;
    double l1_tol = 0.1;
    friend bool operator==(const CompareSection&, const CompareSection&) = default;
};

/// Cross product of the non-empty lists; empty lists keep the model value. When h2_over_tau > 0,
/// tau is derived as h^2 / h2_over_tau and the tau list must be empty.
struct SweepSection {
    std::vector<int> M;
    std::vector<double> Mc;
    std::vector<double> h;
    std::vector<double> tau;
    double h2_over_tau = 0.0;
    int sorting_window = 0;
    double sorting_threshold = 0.1;
    friend bool operator==(const SweepSection&, const SweepSection&) = default;
};

struct OutputSection {
    std::string dir = "out";
    friend bool operator==(const OutputSection&, const OutputSection&) = default;
};

struct ExperimentConfig {
    ModelSection model;
    ProbabilitySection probability;
    AbmSection abm;
    PdeSection pde;
    DiagnosticsSection diagnostics;
    CompareSection compare;
    SweepSection sweep;
    OutputSection output;
    /// Directory used to resolve relative table paths; not serialized.
    std::filesystem::path base_dir;

    friend bool operator==(const ExperimentConfig& l, const ExperimentConfig& r) {
        return l.model == r.model && l.probability == r.probability && l.abm == r.abm && l.pde == r.pde &&
               l.diagnostics == r.diagnostics && l.compare == r.compare && l.sweep == r.sweep &&
               l.output == r.output;
    }
};

/// Parses JSON text; unknown keys and invalid values are collected into one ConfigError whose
/// messages carry dotted field paths.
[[nodiscard]] ExperimentConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig parse_config(const std::filesystem::path& path);
/// Full JSON with every key, 2-space indent, trailing newline.
[[nodiscard]] std::string serialize_config(const ExperimentConfig& cfg);
/// Re-validates a config assembled in code (e.g. a sweep point); throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

[[nodiscard]] ModelParams make_params(const ExperimentConfig& cfg);
[[nodiscard]] ProbabilityFn make_probability(const ExperimentConfig& cfg);
[[nodiscard]] Grid make_grid(const ExperimentConfig& cfg);
/// Initial density discretized on the grid (cell averages, unit mass).
[[nodiscard]] std::vector<double> make_f0(const ExperimentConfig& cfg, const Grid& grid);

}  // namespace entrykin
