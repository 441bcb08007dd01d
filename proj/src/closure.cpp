#include "entrykin/closure.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "entrykin/errors.hpp"
#include "entrykin/rng.hpp"

namespace entrykin {

DiscreteDistribution::DiscreteDistribution(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    if (atoms_.empty()) throw ContractViolation("distribution needs at least one atom");
    double s = 0.0;
    for (const auto& a : atoms_) {
        if (!(std::isfinite(a.x) && a.w > 0.0 && std::isfinite(a.w)))
            throw ContractViolation("atoms need finite x and positive weight");
        s += a.w;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ContractViolation(fmt::format("weights sum to {}, not 1", s));
    auto xs = atoms_;
    std::sort(xs.begin(), xs.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i].x == xs[i - 1].x) throw ContractViolation("atom locations must be distinct");
}

DiscreteDistribution DiscreteDistribution::normalized(std::vector<Atom> atoms) {
    double s = 0.0;
    for (const auto& a : atoms) s += a.w;
    if (!(s > 0.0)) throw ContractViolation("weights must have positive sum");
    for (auto& a : atoms) a.w /= s;
    return DiscreteDistribution(std::move(atoms));
}

namespace {

// Probability of a profile, built by flipping one agent at a time would lose accuracy; a direct
// product per mask keeps every term a plain product of M factors.
template <class Visit>
void for_each_profile(std::span<const double> p, std::span<const double> q, Visit&& visit) {
    const auto M = p.size();
    const std::uint64_t count = std::uint64_t{1} << M;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
        double w = 1.0;
        int m = 0;
        for (std::size_t i = 0; i < M; ++i) {
            if (mask >> i & 1U) {
                w *= p[i];
                ++m;
            } else {
                w *= q[i];
            }
        }
        visit(mask, m, w);
    }
}

}  // namespace

PayoffMoments exact_payoff_moments_p(std::span<const double> p, std::span<const double> q, double Mc) {
    const auto M = p.size();
    if (q.size() != M) throw ContractViolation("p and q lengths differ");
    if (M > static_cast<std::size_t>(kMaxMomentAgents))
        throw SizeError(fmt::format("exact enumeration limited to M <= {} (got {})", kMaxMomentAgents, M));
    const auto n = static_cast<Eigen::Index>(M);
    PayoffMoments out{Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
    std::vector<Eigen::Index> on;
    on.reserve(M);
    for_each_profile(p, q, [&](std::uint64_t mask, int m, double w) {
        if (m == 0) return;
        const double dev = Mc - m;
        const double wa = w * dev, wd = w * dev * dev;
        on.clear();
        for (std::size_t i = 0; i < M; ++i)
            if (mask >> i & 1U) on.push_back(static_cast<Eigen::Index>(i));
        for (auto i : on) {
            out.A(i) += wa;
            for (auto k : on) out.D(i, k) += wd;
        }
    });
    return out;
}

PayoffMoments exact_payoff_moments(std::span<const double> xbar, const ModelParams& params, const ProbabilityFn& pf) {
    if (xbar.size() != static_cast<std::size_t>(params.M()))
        throw ContractViolation(fmt::format("expected {} propensities, got {}", params.M(), xbar.size()));
    if (params.M() > kMaxMomentAgents)
        throw SizeError(fmt::format("exact enumeration limited to M <= {} (got {})", kMaxMomentAgents, params.M()));
    std::vector<double> p(xbar.size()), q(xbar.size());
    for (std::size_t i = 0; i < xbar.size(); ++i) {
        p[i] = pf(xbar[i]);
        q[i] = pf.one_minus(xbar[i]);
    }
    return exact_payoff_moments_p(p, q, params.Mc());
}

double min_eigenvalue(const Eigen::MatrixXd& sym) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw Error("eigenvalue computation failed");
    return es.eigenvalues().minCoeff();
}

ClosureCoefficients closure_coefficients(const DiscreteDistribution& f, const ModelParams& params,
                                         const ProbabilityFn& pf) {
    ClosureCoefficients c{};
    c.alpha = 0.0;
    c.beta = 0.0;
    for (const auto& at : f.atoms()) {
        const double p = pf(at.x);
        c.alpha += at.w * p;
        c.beta += at.w * p * pf.one_minus(at.x);
    }
    const double M1 = params.M() - 1.0;
    c.a = params.kappa() - c.alpha;
    c.b = c.alpha * (1.0 - c.alpha);
    c.drift_coeff = M1 * c.a;
    c.diffusion_coeff = M1 * M1 * c.a * c.a + M1 * c.b;
    return c;
}

AveragedCoefficients averaged_coefficients_exact(const DiscreteDistribution& f, double x_query,
                                                 const ModelParams& params, const ProbabilityFn& pf) {
    const int M = params.M();
    if (M > kMaxAveragedAgents)
        throw SizeError(fmt::format("averaged enumeration limited to M <= {} (got {})", kMaxAveragedAgents, M));
    const std::size_t K = f.size();
    if (K > kMaxAveragedAtoms)
        throw SizeError(fmt::format("averaged enumeration limited to {} atoms (got {})", kMaxAveragedAtoms, K));
    const double pq = pf(x_query);
    if (!(pq > 0.0)) throw ContractViolation("p(x_query) must be > 0");

    std::vector<double> pa(K), qa(K), wa(K);
    for (std::size_t k = 0; k < K; ++k) {
        pa[k] = pf(f.atoms()[k].x);
        qa[k] = pf.one_minus(f.atoms()[k].x);
        wa[k] = f.atoms()[k].w;
    }
    // Factorials up to 11! are exact in double.
    std::vector<double> fact(static_cast<std::size_t>(M) + 1, 1.0);
    for (std::size_t i = 1; i < fact.size(); ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    const int others = M - 1;
    std::vector<int> counts(K, 0);
    std::vector<double> p(static_cast<std::size_t>(M)), q(static_cast<std::size_t>(M));
    p[0] = pq;
    q[0] = pf.one_minus(x_query);

    double drift = 0.0, diff = 0.0;
    // Visit every composition counts[0] + ... + counts[K-1] = M - 1.
    auto visit = [&] {
        double mult = fact[static_cast<std::size_t>(others)];
        double weight = 1.0;
        std::size_t pos = 1;
        for (std::size_t k = 0; k < K; ++k) {
            mult /= fact[static_cast<std::size_t>(counts[k])];
            for (int c = 0; c < counts[k]; ++c, ++pos) {
                p[pos] = pa[k];
                q[pos] = qa[k];
                weight *= wa[k];
            }
        }
        weight *= mult;
        double A0 = 0.0, D0 = 0.0;
        for_each_profile(p, q, [&](std::uint64_t mask, int m, double w) {
            if (!(mask & 1U)) return;
            const double dev = params.Mc() - m;
            A0 += w * dev;
            D0 += w * dev * dev;
        });
        drift += weight * A0;
        diff += weight * D0;
    };
    auto rec = [&](auto&& self, std::size_t k, int left) -> void {
        if (k + 1 == K) {
            counts[k] = left;
            visit();
            return;
        }
        for (int c = 0; c <= left; ++c) {
            counts[k] = c;
            self(self, k + 1, left - c);
        }
    };
    rec(rec, 0, others);
    return {drift / pq, diff / pq};
}

std::vector<ClosureCheckRow> run_closure_checks(std::uint64_t seed, const ProbabilityFn& pf, int M_lo, int M_hi,
                                                int dists_per_M, std::size_t max_atoms) {
    std::vector<ClosureCheckRow> rows;
    Rng rng(seed);
    auto unif = [&](double lo, double hi) { return lo + (hi - lo) * uniform01(rng); };
    constexpr double tol = 1e-12;
    for (int M = M_lo; M <= M_hi; ++M) {
        ClosureCheckRow row{"closure", M, dists_per_M, 0.0, tol, true};
        for (int c = 0; c < dists_per_M; ++c) {
            const double Mc = unif(1.0 + 1e-3, M - 1e-3);
            const ModelParams params(M, Mc, 1.0, 1.0);
            const auto K = 1 + static_cast<std::size_t>(uniform01(rng) * static_cast<double>(max_atoms));
            std::vector<Atom> atoms;
            for (std::size_t k = 0; k < K; ++k) atoms.push_back({unif(-4.0, 4.0), unif(0.05, 1.0)});
            const auto f = DiscreteDistribution::normalized(atoms);
            const double xq = f.atoms()[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(K))].x;
            const auto cc = closure_coefficients(f, params, pf);
            const auto ex = averaged_coefficients_exact(f, xq, params, pf);
            row.max_error = std::max({row.max_error, std::abs(ex.drift - cc.drift_coeff),
                                      std::abs(ex.diffusion - cc.diffusion_coeff)});
        }
        row.pass = row.max_error <= tol;
        rows.push_back(row);
    }
    {
        ClosureCheckRow row{"m2_oracle", 2, 100, 0.0, tol, true};
        for (int c = 0; c < row.cases; ++c) {
            const double p1 = unif(0.0, 1.0), p2 = unif(0.0, 1.0), Mc = unif(1.0, 2.0);
            const double p[2] = {p1, p2}, q[2] = {1.0 - p1, 1.0 - p2};
            const auto mom = exact_payoff_moments_p(p, q, Mc);
            row.max_error = std::max({row.max_error, std::abs(mom.A(0) - p1 * (Mc - 1.0 - p2)),
                                      std::abs(mom.D(0, 1) - p1 * p2 * (Mc - 2.0) * (Mc - 2.0))});
        }
        row.pass = row.max_error <= tol;
        rows.push_back(row);
    }
    {
        constexpr double psd_tol = 1e-10;
        ClosureCheckRow row{"psd_m6", 6, 100, 0.0, psd_tol, true};
        double worst = 0.0;
        for (int c = 0; c < row.cases; ++c) {
            const ModelParams params(6, unif(1.0 + 1e-3, 6.0 - 1e-3), 1.0, 1.0);
            std::vector<double> xb(6);
            for (auto& x : xb) x = unif(-6.0, 6.0);
            const auto mom = exact_payoff_moments(xb, params, pf);
            worst = std::min(worst, min_eigenvalue(mom.D));
        }
        row.max_error = -worst;
        row.pass = worst >= -psd_tol;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace entrykin
