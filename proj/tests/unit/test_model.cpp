#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "entrykin/errors.hpp"
#include "entrykin/model.hpp"

using namespace entrykin;

namespace {
double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

TEST_CASE("kappa examples") {
    CHECK(kappa(ModelParams(11, 3.0, 0.1, 0.01)) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(kappa(ModelParams(5, 3.0, 1.0, 1.0)) == 0.5);
    const double k = kappa(ModelParams(2, 1.0 + 1e-9, 1.0, 1.0));
    CHECK(k > 0.0);
    CHECK(k < 1e-8);
}

TEST_CASE("model params reject invalid fields") {
    CHECK_THROWS_AS(ModelParams(1, 0.5, 1.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(ModelParams(5, 1.0, 1.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(ModelParams(5, 5.0, 1.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(ModelParams(5, 3.0, 0.0, 1.0), ContractViolation);
    CHECK_THROWS_AS(ModelParams(5, 3.0, 1.0, -1.0), ContractViolation);
    CHECK_THROWS_AS(ModelParams(5, std::nan(""), 1.0, 1.0), ContractViolation);
}

TEST_CASE("kappa lies inside the per-agent band for random parameters") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        const int M = 2 + static_cast<int>(u(rng) * 200);
        const double Mc = 1.0 + (M - 1.0) * (0.001 + 0.998 * u(rng));
        const ModelParams p(M, Mc, 1.0, 1.0);
        CHECK(p.kappa() > (Mc - 1.0) / M);
        CHECK(p.kappa() < Mc / M);
        CHECK(p.kappa() == (Mc - 1.0) / (M - 1.0));
    }
}

TEST_CASE("payoff rule") {
    const ModelParams p(11, 3.0, 0.1, 0.01);
    CHECK(payoff(true, 5, p) == doctest::Approx(-0.2).epsilon(1e-15));
    CHECK(payoff(true, 3, p) == 0.0);
    for (int m = 0; m <= 11; ++m) CHECK(payoff(false, m, p) == 0.0);
    CHECK_THROWS_AS((void)payoff(true, 12, p), ContractViolation);
    CHECK_THROWS_AS((void)payoff(false, 12, p), ContractViolation);
    CHECK_THROWS_AS((void)payoff(true, 0, p), ContractViolation);
    CHECK_THROWS_AS((void)payoff(false, -1, p), ContractViolation);
}

TEST_CASE("entrant payoff is antisymmetric about capacity") {
    for (int M = 3; M < 30; ++M)
        for (int Mc = 2; Mc < M; ++Mc) {
            const ModelParams p(M, Mc, 0.37, 1.0);
            for (int d = 0; Mc + d <= M && Mc - d >= 1; ++d)
                CHECK(payoff(true, Mc + d, p) == -payoff(true, Mc - d, p));
        }
}

TEST_CASE("equilibrium summary") {
    auto s = equilibrium_summary(ModelParams(11, 3.0, 0.1, 0.01));
    CHECK(s.symmetric_probability == doctest::Approx(0.2));
    CHECK(s.expected_entrants == doctest::Approx(2.2));
    CHECK(s.band_lo == 2.0);
    CHECK(s.band_hi == 3.0);
    CHECK(s.expected_inside_band);

    s = equilibrium_summary(ModelParams(3, 2.0, 1.0, 1.0));
    CHECK(s.symmetric_probability == 0.5);
    CHECK(s.expected_entrants == 1.5);

    s = equilibrium_summary(ModelParams(10, 10.0 - 1e-9, 1.0, 1.0));
    CHECK(s.symmetric_probability == doctest::Approx(1.0).epsilon(1e-8));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int i = 0; i < 1000; ++i) {
        const int M = 2 + static_cast<int>(u(rng) * 100);
        const double Mc = 1.0 + (M - 1.0) * u(rng);
        CHECK(equilibrium_summary(ModelParams(M, Mc, 1.0, 1.0)).expected_inside_band);
    }
}

TEST_CASE("logistic floor values and limits") {
    const ProbabilityFn p0(LogisticFloor{0.0, 1.0, 0.0});
    CHECK(p0(0.0) == 0.5);
    CHECK(p0.eval(0.0, 1) == 0.25);
    CHECK(p0.eval(0.0, 2) == 0.0);
    const ProbabilityFn p1(LogisticFloor{0.1, 1.0, 0.0});
    CHECK(p1(40.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(p1(-40.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(p1(-20.0) > 0.1);
    CHECK(p1.p_min() == 0.1);
    CHECK(p1.c_p() == 1.0);
    CHECK(ProbabilityFn(LogisticFloor{0.1, 3.0, 0.0}).c_p() == 9.0);
    CHECK(ProbabilityFn(LogisticFloor{0.1, 0.5, 0.0}).c_p() == 0.5);
    CHECK_THROWS_AS((void)p1.eval(0.0, 3), ContractViolation);
    CHECK_THROWS_AS((void)p1.eval(0.0, -1), ContractViolation);
    CHECK_THROWS_AS(ProbabilityFn(LogisticFloor{1.0, 1.0, 0.0}), ContractViolation);
    CHECK_THROWS_AS(ProbabilityFn(LogisticFloor{0.1, 0.0, 0.0}), ContractViolation);
}

TEST_CASE("logistic floor matches its closed form and derivatives match finite differences") {
    const LogisticFloor fam{0.15, 1.7, -0.4};
    const ProbabilityFn p(fam);
    for (double x = -8.0; x <= 8.0; x += 0.37) {
        const double ref = fam.p_min + (1 - fam.p_min) * logistic(fam.scale * (x - fam.center));
        CHECK(p(x) == doctest::Approx(ref).epsilon(1e-14));
        CHECK(p.one_minus(x) == doctest::Approx(1.0 - ref).epsilon(1e-12));
        const double hstep = 1e-5;
        CHECK(p.eval(x, 1) == doctest::Approx((p(x + hstep) - p(x - hstep)) / (2 * hstep)).epsilon(1e-7));
        CHECK(p.eval(x, 2) ==
              doctest::Approx((p.eval(x + hstep, 1) - p.eval(x - hstep, 1)) / (2 * hstep)).epsilon(1e-6).scale(1e-9));
    }
}

TEST_CASE("rational tails shape, derivatives and certificate") {
    for (double a : {0.5, 1.0, 2.0, 3.5}) {
        const ProbabilityFn p(RationalTails{a});
        CHECK(p.p_min() == 0.0);
        CHECK(p(0.0) == 0.5);
        // Asymptotic power tails: x^a/(1+x^a) for large x, 1/(1+|x|^a) for very negative x.
        const double X = 1e6;
        CHECK(p.one_minus(X) == doctest::Approx(1.0 / (1.0 + std::pow(X, a))).epsilon(1e-3));
        CHECK(p(-X) == doctest::Approx(1.0 / (1.0 + std::pow(X, a))).epsilon(1e-3));
        for (double x = -20.0; x <= 20.0; x += 0.77) {
            const double hs = 1e-5;
            CHECK(p.eval(x, 1) == doctest::Approx((p(x + hs) - p(x - hs)) / (2 * hs)).epsilon(1e-6).scale(1e-10));
            CHECK(p.eval(x, 2) ==
                  doctest::Approx((p.eval(x + hs, 1) - p.eval(x - hs, 1)) / (2 * hs)).epsilon(1e-5).scale(1e-9));
        }
        const auto grid = linspace_step(-50.0, 50.0, 0.005);
        const auto rep = verify_p_conditions(p, grid, p.c_p());
        CHECK(rep.certified());
        CHECK(rep.minimal_c_p <= p.c_p());
        CHECK(rep.minimal_c_p > 0.5 * p.c_p());
    }
    CHECK_THROWS_AS(ProbabilityFn(RationalTails{0.0}), ContractViolation);
}

TEST_CASE("condition check on the default logistic floor") {
    const ProbabilityFn p(LogisticFloor{0.1, 1.0, 0.0});
    const auto grid = linspace_step(-10.0, 10.0, 0.01);
    CHECK(grid.size() == 2001);
    const auto rep = verify_p_conditions(p, grid, 1.0);
    CHECK(rep.certified());
    CHECK(rep.flat_points.empty());
    CHECK(rep.minimal_c_p <= 1.0);
    CHECK(rep.minimal_c_p > 0.99);

    // A certificate that is too small is caught.
    CHECK_FALSE(verify_p_conditions(p, grid, 0.5).certified());
}

TEST_CASE("families certify with their own constant on dense grids") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const ProbabilityFn p(LogisticFloor{0.3 * u(rng), 0.2 + 3.0 * u(rng), 4.0 * u(rng) - 2.0});
        CHECK(verify_p_conditions(p, linspace_step(-15.0, 15.0, 0.01), p.c_p()).certified());
    }
}

TEST_CASE("constant p is certified with zero constant and flagged flat") {
    const ProbabilityFn p(ConstantP{0.5});
    const auto rep = verify_p_conditions(p, linspace_step(-1.0, 1.0, 0.5), 0.0);
    CHECK(rep.certified());
    CHECK(rep.minimal_c_p == 0.0);
    CHECK(rep.flat_points.size() == 5);
    CHECK_THROWS_AS(ProbabilityFn(ConstantP{0.0}), ContractViolation);
    CHECK_THROWS_AS(ProbabilityFn(ConstantP{1.5}), ContractViolation);
}

TEST_CASE("condition check input contract") {
    const ProbabilityFn p(ConstantP{0.5});
    std::vector<double> empty;
    CHECK_THROWS_AS((void)verify_p_conditions(p, empty, 1.0), ContractViolation);
    std::vector<double> unsorted{0.0, -1.0};
    CHECK_THROWS_AS((void)verify_p_conditions(p, unsorted, 1.0), ContractViolation);
}

TEST_CASE("decreasing table is flagged as non-monotone") {
    std::vector<double> x, pv, dp;
    for (int i = 0; i <= 20; ++i) {
        x.push_back(-1.0 + 0.1 * i);
        pv.push_back(0.9 - 0.02 * i);
        dp.push_back(-0.2);
    }
    const ProbabilityFn p(TabulatedC2::from_samples(x, pv, dp));
    const auto rep = verify_p_conditions(p, linspace_step(-1.0, 1.0, 0.05), 10.0);
    CHECK_FALSE(rep.certified());
    bool mono = false;
    for (const auto& v : rep.violations) mono = mono || v.kind == ConditionKind::Monotonicity;
    CHECK(mono);
}

TEST_CASE("tabulated p: hermite interpolation, extrapolation error and file loading") {
    // Samples of a cubic with exact derivatives are reproduced exactly by cubic Hermite.
    auto cubic = [](double x) { return 0.5 + 0.1 * x - 0.01 * x * x * x; };
    auto dcubic = [](double x) { return 0.1 - 0.03 * x * x; };
    std::vector<double> x, pv, dp;
    for (int i = 0; i <= 10; ++i) {
        const double xi = -1.0 + 0.2 * i;
        x.push_back(xi);
        pv.push_back(cubic(xi));
        dp.push_back(dcubic(xi));
    }
    const ProbabilityFn p(TabulatedC2::from_samples(x, pv, dp));
    for (double q = -1.0; q <= 1.0; q += 0.013) {
        CHECK(p(q) == doctest::Approx(cubic(q)).epsilon(1e-13));
        CHECK(p.eval(q, 1) == doctest::Approx(dcubic(q)).epsilon(1e-12));
    }
    // Interior p'' from centred differences of p' is exact for a quadratic p'.
    CHECK(p.eval(0.2, 2) == doctest::Approx(-0.06 * 0.2).epsilon(1e-12));
    CHECK_THROWS_AS((void)p(1.0001), ExtrapolationError);
    CHECK_THROWS_AS((void)p(-1.0001), ExtrapolationError);
    CHECK_NOTHROW((void)p(1.0));

    const auto path = std::filesystem::temp_directory_path() / "entrykin_table_test.txt";
    {
        std::ofstream out(path);
        out << "# x p dp\n";
        for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << " " << pv[i] << " " << dp[i] << "  # row\n";
        out << "\n";
    }
    const auto t = TabulatedC2::load(path);
    CHECK(t.x.size() == 11);
    CHECK(t.source == path.string());
    std::filesystem::remove(path);

    CHECK_THROWS_AS(TabulatedC2::from_samples({0, 1}, {0.1, 0.2}, {0.1, 0.1}), ContractViolation);
    CHECK_THROWS_AS(TabulatedC2::from_samples({0, 1, 1}, {0.1, 0.2, 0.3}, {0.1, 0.1, 0.1}), ContractViolation);
    CHECK_THROWS_AS(TabulatedC2::from_samples({0, 1, 2}, {0.1, 1.2, 0.3}, {0.1, 0.1, 0.1}), ContractViolation);
    CHECK_THROWS_AS(TabulatedC2::load("/nonexistent/table.txt"), ContractViolation);
}

TEST_CASE("regularization lifts p") {
    const ProbabilityFn half(ConstantP{0.5});
    CHECK(half.regularized(1.0)(3.0) == 0.75);
    CHECK(half.regularized(0.0)(3.0) == 0.5);
    CHECK_THROWS_AS((void)half.regularized(-1.0), ContractViolation);

    const ProbabilityFn p(LogisticFloor{0.1, 1.0, 0.0});
    const auto pe = p.regularized(0.2);
    CHECK(pe.p_min() == doctest::Approx((0.1 + 0.2) / 1.2));
    CHECK(pe.c_p() == p.c_p());
    for (double x = -5; x <= 5; x += 0.5) {
        CHECK(pe(x) == doctest::Approx((p(x) + 0.2) / 1.2).epsilon(1e-15));
        CHECK(pe.one_minus(x) == doctest::Approx(1.0 - pe(x)).epsilon(1e-12));
    }
    CHECK(verify_p_conditions(pe, linspace_step(-10.0, 10.0, 0.01), pe.c_p()).certified());
    // Two lifts compose into one.
    const auto twice = p.regularized(0.1).regularized(0.2);
    CHECK(twice(0.3) == doctest::Approx(((p(0.3) + 0.1) / 1.1 + 0.2) / 1.2).epsilon(1e-15));
}

TEST_CASE("describe names the family") {
    CHECK(ProbabilityFn(LogisticFloor{0.1, 1.0, 0.0}).describe().rfind("logistic_floor", 0) == 0);
    CHECK(ProbabilityFn(RationalTails{2.0}).describe().rfind("rational_tails", 0) == 0);
    CHECK(ProbabilityFn(ConstantP{0.5}).regularized(0.1).describe().find("regularized") != std::string::npos);
}
