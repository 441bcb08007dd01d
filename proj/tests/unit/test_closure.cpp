#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "entrykin/closure.hpp"
#include "entrykin/errors.hpp"

using namespace entrykin;

namespace {

// p = sigmoid(x) exactly when p_min = 0, so x = logit(p) places an atom at a chosen probability.
const ProbabilityFn kSigmoid(LogisticFloor{0.0, 1.0, 0.0});
double logit(double p) { return std::log(p / (1.0 - p)); }

// Independent oracle: the number of other entrants is Poisson-binomial, so the moments only need
// its mean and variance.
struct Oracle {
    std::vector<double> A;
    std::vector<std::vector<double>> D;
};
Oracle moment_oracle(const std::vector<double>& p, double Mc) {
    const std::size_t M = p.size();
    Oracle o{std::vector<double>(M), std::vector<std::vector<double>>(M, std::vector<double>(M))};
    for (std::size_t i = 0; i < M; ++i) {
        double mu = 0, var = 0;
        for (std::size_t k = 0; k < M; ++k)
            if (k != i) {
                mu += p[k];
                var += p[k] * (1 - p[k]);
            }
        o.A[i] = p[i] * (Mc - 1 - mu);
        o.D[i][i] = p[i] * ((Mc - 1 - mu) * (Mc - 1 - mu) + var);
        for (std::size_t k = 0; k < M; ++k) {
            if (k == i) continue;
            double mu2 = 0, var2 = 0;
            for (std::size_t j = 0; j < M; ++j)
                if (j != i && j != k) {
                    mu2 += p[j];
                    var2 += p[j] * (1 - p[j]);
                }
            o.D[i][k] = p[i] * p[k] * ((Mc - 2 - mu2) * (Mc - 2 - mu2) + var2);
        }
    }
    return o;
}

}  // namespace

TEST_CASE("two-agent moments by hand") {
    const double p[2] = {0.5, 0.5}, q[2] = {0.5, 0.5};
    auto m = exact_payoff_moments_p(p, q, 2.0);
    CHECK(m.A(0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.D(0, 1) == 0.0);
    // Mc = 1: every profile with the agent in pays at most 0.
    const double p2[2] = {0.3, 0.8}, q2[2] = {0.7, 0.2};
    m = exact_payoff_moments_p(p2, q2, 1.0);
    CHECK(m.A(0) == doctest::Approx(-0.3 * 0.8).epsilon(1e-15));
    CHECK(m.A(1) == doctest::Approx(-0.3 * 0.8).epsilon(1e-15));
}

TEST_CASE("exact moments agree with the Poisson-binomial oracle") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 60; ++rep) {
        const int M = 2 + rep % 9;
        const ModelParams params(M, 1.0 + (M - 1.0) * (0.01 + 0.98 * u(rng)), 1.0, 1.0);
        std::vector<double> x(M), p(M);
        for (int i = 0; i < M; ++i) {
            x[i] = 8.0 * u(rng) - 4.0;
            p[i] = kSigmoid(x[i]);
        }
        const auto m = exact_payoff_moments(x, params, kSigmoid);
        const auto o = moment_oracle(p, params.Mc());
        for (int i = 0; i < M; ++i) {
            CHECK(m.A(i) == doctest::Approx(o.A[i]).epsilon(1e-12).scale(1.0));
            for (int k = 0; k < M; ++k) {
                CHECK(m.D(i, k) == doctest::Approx(o.D[i][k]).epsilon(1e-12).scale(1.0));
                CHECK(m.D(i, k) == m.D(k, i));
            }
        }
        CHECK(min_eigenvalue(m.D) >= -1e-10);
    }
}

TEST_CASE("diffusion matrix is positive definite away from the capacity state") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        const ModelParams params(6, 1.5 + 3.0 * u(rng), 1.0, 1.0);
        std::vector<double> x(6);
        for (auto& v : x) v = 6.0 * u(rng) - 3.0;
        CHECK(min_eigenvalue(exact_payoff_moments(x, params, kSigmoid).D) > 0.0);
    }
    // With certain entry of exactly Mc = 2 agents the payoff variance vanishes.
    const double p[3] = {1.0, 1.0, 0.0}, q[3] = {0.0, 0.0, 1.0};
    const auto m = exact_payoff_moments_p(p, q, 2.0);
    CHECK(m.D.norm() == 0.0);
}

TEST_CASE("moments depend on propensities only through p") {
    const LogisticFloor a{0.1, 1.3, 0.0}, b{0.1, 1.3, 2.5};
    const ProbabilityFn pa(a), pb(b);
    const ModelParams params(5, 2.4, 1.0, 1.0);
    const std::vector<double> x{-1.0, 0.3, 2.0, -3.0, 0.0};
    std::vector<double> shifted;
    for (double v : x) shifted.push_back(v + 2.5);
    const auto ma = exact_payoff_moments(x, params, pa);
    const auto mb = exact_payoff_moments(shifted, params, pb);
    CHECK((ma.A - mb.A).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((ma.D - mb.D).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("moment enumeration limits") {
    const ModelParams big(21, 5.0, 1.0, 1.0);
    std::vector<double> x(21, 0.0);
    CHECK_THROWS_AS((void)exact_payoff_moments(x, big, kSigmoid), SizeError);
    const ModelParams small(3, 2.0, 1.0, 1.0);
    CHECK_THROWS_AS((void)exact_payoff_moments(std::vector<double>(2, 0.0), small, kSigmoid), ContractViolation);
}

TEST_CASE("closure coefficients by direct sums") {
    const ModelParams params(6, 2.0, 1.0, 1.0);  // kappa = 0.2
    const auto f = DiscreteDistribution({{logit(0.2), 0.5}, {logit(0.6), 0.5}});
    const auto c = closure_coefficients(f, params, kSigmoid);
    CHECK(c.alpha == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(c.a == doctest::Approx(-0.2).epsilon(1e-14));
    CHECK(c.b == doctest::Approx(0.24).epsilon(1e-14));
    CHECK(c.beta == doctest::Approx(0.5 * 0.16 + 0.5 * 0.24).epsilon(1e-14));
    CHECK(c.drift_coeff == doctest::Approx(5 * -0.2).epsilon(1e-14));
    CHECK(c.diffusion_coeff == doctest::Approx(25 * 0.04 + 5 * 0.24).epsilon(1e-14));

    const auto single = DiscreteDistribution({{logit(0.2), 1.0}});
    CHECK(std::abs(closure_coefficients(single, params, kSigmoid).a) < 1e-15);

    const auto half = DiscreteDistribution({{0.0, 1.0}});
    CHECK(closure_coefficients(half, params, kSigmoid).b == 0.25);
}

TEST_CASE("averaged coefficients reproduce the closure") {
    SUBCASE("drift, M = 3, two atoms") {
        const ModelParams params(3, 1.7, 1.0, 1.0);
        const auto f = DiscreteDistribution({{-0.4, 0.3}, {1.2, 0.7}});
        const auto ex = averaged_coefficients_exact(f, -0.4, params, kSigmoid);
        CHECK(std::abs(ex.drift - closure_coefficients(f, params, kSigmoid).drift_coeff) < 1e-12);
    }
    SUBCASE("diffusion, M = 4, three atoms") {
        const ModelParams params(4, 2.2, 1.0, 1.0);
        const auto f = DiscreteDistribution({{-1.0, 0.2}, {0.5, 0.5}, {2.0, 0.3}});
        const auto ex = averaged_coefficients_exact(f, 0.5, params, kSigmoid);
        CHECK(std::abs(ex.diffusion - closure_coefficients(f, params, kSigmoid).diffusion_coeff) < 1e-12);
    }
    SUBCASE("single atom at kappa has zero drift") {
        const ModelParams params(5, 2.0, 1.0, 1.0);  // kappa = 0.25
        const auto f = DiscreteDistribution({{logit(0.25), 1.0}});
        CHECK(std::abs(averaged_coefficients_exact(f, logit(0.25), params, kSigmoid).drift) < 1e-14);
    }
    SUBCASE("query point need not be an atom, and larger limits still run") {
        const ModelParams params(12, 4.0, 1.0, 1.0);
        const auto f = DiscreteDistribution::normalized({{-2, 1}, {-1, 1}, {0, 1}, {1, 1}, {2, 1}, {3, 1}});
        const auto ex = averaged_coefficients_exact(f, 0.77, params, kSigmoid);
        const auto c = closure_coefficients(f, params, kSigmoid);
        CHECK(ex.drift == doctest::Approx(c.drift_coeff).epsilon(1e-12));
        CHECK(ex.diffusion == doctest::Approx(c.diffusion_coeff).epsilon(1e-12));
    }
}

TEST_CASE("averaged coefficient limits") {
    const auto f = DiscreteDistribution({{0.0, 1.0}});
    CHECK_THROWS_AS((void)averaged_coefficients_exact(f, 0.0, ModelParams(13, 3.0, 1.0, 1.0), kSigmoid), SizeError);
    std::vector<Atom> seven;
    for (int i = 0; i < 7; ++i) seven.push_back({double(i), 1.0});
    CHECK_THROWS_AS((void)averaged_coefficients_exact(DiscreteDistribution::normalized(seven), 0.0,
                                                      ModelParams(3, 2.0, 1.0, 1.0), kSigmoid),
                    SizeError);
    const ProbabilityFn zero_floor(LogisticFloor{0.0, 1.0, 0.0});
    CHECK_THROWS_AS((void)averaged_coefficients_exact(f, -1e6, ModelParams(3, 2.0, 1.0, 1.0), zero_floor),
                    ContractViolation);
}

TEST_CASE("discrete distribution validation") {
    CHECK_THROWS_AS(DiscreteDistribution({}), ContractViolation);
    CHECK_THROWS_AS(DiscreteDistribution({{0.0, 0.5}}), ContractViolation);
    CHECK_THROWS_AS(DiscreteDistribution({{0.0, 0.5}, {0.0, 0.5}}), ContractViolation);
    CHECK_THROWS_AS(DiscreteDistribution({{0.0, 1.5}, {1.0, -0.5}}), ContractViolation);
    CHECK_NOTHROW(DiscreteDistribution({{0.0, 0.5}, {1.0, 0.5 + 5e-13}}));
    const auto n = DiscreteDistribution::normalized({{0.0, 2.0}, {1.0, 6.0}});
    CHECK(n.atoms()[1].w == 0.75);
}

TEST_CASE("self-check table passes") {
    const auto rows = run_closure_checks(99, kSigmoid, 2, 5, 10, 4);
    CHECK(rows.size() == 6);
    for (const auto& r : rows) {
        CAPTURE(r.check);
        CAPTURE(r.M);
        CHECK(r.pass);
    }
}
