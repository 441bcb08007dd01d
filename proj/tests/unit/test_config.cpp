#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "entrykin/config.hpp"
#include "entrykin/errors.hpp"
#include "entrykin/grid.hpp"

using namespace entrykin;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> errors_of(const std::string& text) {
    try {
        (void)parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.messages;
    }
    return {};
}

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
    return std::any_of(msgs.begin(), msgs.end(), [&](const auto& m) { return m.find(needle) != std::string::npos; });
}

}  // namespace

TEST_CASE("an empty object yields the documented defaults") {
    const auto cfg = parse_config_text("{}");
    CHECK(cfg == ExperimentConfig{});
    CHECK(cfg.model.M == 11);
    CHECK(cfg.model.Mc == 3.0);
    CHECK(cfg.pde.solver.theta == 1.0);
    CHECK(cfg.pde.solver.boundary == BoundaryMode::ZeroFlux);
    CHECK(cfg.abm.windows == std::vector<double>{1.0, 2.0});
    CHECK(serialize_config(cfg) == serialize_config(ExperimentConfig{}));
}

TEST_CASE("capacity equal to the agent count names the field") {
    const auto msgs = errors_of(R"({"model": {"M": 5, "Mc": 5}})");
    REQUIRE_FALSE(msgs.empty());
    CHECK(mentions(msgs, "model.Mc"));
}

TEST_CASE("unknown keys are rejected with their path") {
    CHECK(mentions(errors_of(R"({"modle": {}})"), "modle"));
    CHECK(mentions(errors_of(R"({"pde": {"grid": {"cells": 10}}})"), "pde.grid.cells"));
}

TEST_CASE("all errors are collected") {
    const auto msgs = errors_of(R"({"model": {"h": -1, "tau": 0}, "pde": {"solver": {"theta": 0.2}}})");
    CHECK(msgs.size() >= 3);
    CHECK(mentions(msgs, "model.h"));
    CHECK(mentions(msgs, "model.tau"));
    CHECK(mentions(msgs, "pde.solver.theta"));
}

TEST_CASE("type and value errors") {
    CHECK(mentions(errors_of(R"({"model": {"M": "eleven"}})"), "model.M"));
    CHECK(mentions(errors_of(R"({"pde": {"solver": {"boundary_mode": "periodic"}}})"), "pde.solver.boundary_mode"));
    CHECK(mentions(errors_of(R"({"probability": {"family": "tanh"}})"), "probability.family"));
    CHECK(mentions(errors_of(R"({"pde": {"grid": {"x_min": 1}}})"), "pde.grid"));
    CHECK_FALSE(errors_of("{not json").empty());
    CHECK_FALSE(errors_of("[]").empty());
}

TEST_CASE("parse, serialize, parse is the identity") {
    const std::string text = R"({
      "model": {"M": 40, "Mc": 7.5, "h": 0.02, "tau": 0.001},
      "probability": {"family": "rational_tails", "alpha": 1.5},
      "abm": {"replicas": 7, "rounds": 33, "base_seed": 18446744073709551615, "windows": [0.5],
              "x0": {"kind": "uniform", "lo": -2, "hi": 3}, "snapshot_rounds": [3, 9]},
      "pde": {"grid": {"x_min": -5, "x_max": 7, "n_cells": 64},
              "solver": {"theta": 0.5, "boundary_mode": "absorbing_ledger", "epsilon": 0.01, "picard_iters": 1},
              "T": 2.5, "snapshot_times": [0.1]},
      "sweep": {"h": [0.1, 0.2], "h2_over_tau": 4},
      "output": {"dir": "somewhere"}
    })";
    const auto a = parse_config_text(text);
    CHECK(a.abm.base_seed == 18446744073709551615ULL);
    CHECK(a.pde.solver.boundary == BoundaryMode::AbsorbingLedger);
    const auto s1 = serialize_config(a);
    const auto b = parse_config_text(s1);
    CHECK(a == b);
    CHECK(serialize_config(b) == s1);
    CHECK(s1.back() == '\n');
}

TEST_CASE("shipped configs parse") {
    for (const char* name : {"default.json", "compare.json", "sweep.json"}) {
        CAPTURE(name);
        CHECK_NOTHROW((void)parse_config(fs::path(ENTRYKIN_SOURCE_DIR) / "configs" / name));
    }
    CHECK_THROWS_AS((void)parse_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("tabulated paths resolve against the config directory") {
    const auto dir = fs::temp_directory_path() / "entrykin_cfg_test";
    fs::create_directories(dir);
    {
        std::ofstream t(dir / "p.txt");
        for (int i = 0; i <= 40; ++i) {
            const double x = -2.0 + 0.1 * i;
            t << x << " " << 0.3 + 0.1 * x << " " << 0.1 << "\n";
        }
        std::ofstream c(dir / "cfg.json");
        c << R"({"probability": {"family": "tabulated", "table": "p.txt"}, "pde": {"grid": {"x_min": -2, "x_max": 2, "n_cells": 40}}})";
    }
    const auto cfg = parse_config(dir / "cfg.json");
    const auto pf = make_probability(cfg);
    CHECK(pf(0.5) == doctest::Approx(0.35));
    fs::remove_all(dir);
}

TEST_CASE("factories") {
    ExperimentConfig cfg;
    const auto params = make_params(cfg);
    CHECK(params.kappa() == doctest::Approx(0.2));
    const auto g = make_grid(cfg);
    CHECK(g.n_cells() == 800);
    CHECK(grid_mass(make_f0(cfg, g), g) == doctest::Approx(1.0).epsilon(1e-14));
    cfg.abm.x0.kind = "uniform";
    cfg.abm.x0.lo = -1.0;
    cfg.abm.x0.hi = 2.0;
    const auto f = make_f0(cfg, g);
    CHECK(grid_mass(f, g) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f[g.size() / 2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(f[0] == 0.0);
    cfg.model.Mc = 20.0;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}
