#include "entrykin/abm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "entrykin/errors.hpp"
#include "entrykin/parallel.hpp"

namespace entrykin {

int apply_entries(AgentEnsembleState& state, const ModelParams& params, std::span<const std::uint8_t> entered) {
    const auto M = static_cast<std::size_t>(params.M());
    if (state.x.size() != M || entered.size() != M)
        throw ContractViolation(fmt::format("expected {} agents and decisions, got {} and {}", M, state.x.size(),
                                            entered.size()));
    int m = 0;
    for (auto e : entered) m += e ? 1 : 0;
    const double dx = params.h() * (params.Mc() - m);
    for (std::size_t i = 0; i < M; ++i)
        if (entered[i]) state.x[i] += dx;
    ++state.n;
    return m;
}

int step_round(AgentEnsembleState& state, const ModelParams& params, const ProbabilityFn& pf) {
    const auto M = static_cast<std::size_t>(params.M());
    if (state.x.size() != M) throw ContractViolation("state size differs from M");
    std::vector<std::uint8_t> entered(M);
    for (std::size_t i = 0; i < M; ++i) entered[i] = uniform01(state.rng) < pf(state.x[i]) ? 1 : 0;
    return apply_entries(state, params, entered);
}

std::vector<std::int64_t> record_rounds(std::int64_t total, std::int64_t every, double growth,
                                        std::span<const std::int64_t> extra) {
    if (total < 0) throw ContractViolation("round count must be >= 0");
    std::vector<std::int64_t> out{0, total};
    if (every > 0)
        for (std::int64_t n = every; n < total; n += every) out.push_back(n);
    if (growth > 1.0) {
        double g = 1.0;
        while (g < static_cast<double>(total)) {
            out.push_back(static_cast<std::int64_t>(std::llround(g)));
            g = std::max(g * growth, g + 1.0);
        }
    }
    for (auto n : extra)
        if (n >= 0 && n <= total) out.push_back(n);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

double mean_p(const std::vector<double>& x, const ProbabilityFn& pf) {
    double s = 0.0;
    for (double v : x) s += pf(v);
    return s / static_cast<double>(x.size());
}

AbmRecord make_record(const AgentEnsembleState& st, int m, const ModelParams& params, const ProbabilityFn& pf,
                      const std::vector<double>& windows) {
    AbmRecord r;
    r.n = st.n;
    r.t = params.tau() * static_cast<double>(st.n);
    r.m = m;
    r.alpha_hat = mean_p(st.x, pf);
    r.a_hat = params.kappa() - r.alpha_hat;
    for (double R : windows) r.sort_frac.push_back(sorting_fraction(st.x, R));
    return r;
}

struct ReplicaOut {
    AbmSeries series;
    std::vector<std::vector<double>> snaps;
};

ReplicaOut run_replica(AgentEnsembleState st, std::int64_t rounds, const ModelParams& params, const ProbabilityFn& pf,
                       const AbmRunOptions& opt, std::span<const std::int64_t> snapshot_rounds) {
    for (double R : opt.windows)
        if (!(R > 0.0)) throw ContractViolation("sorting window must be > 0");
    if (static_cast<int>(st.x.size()) != params.M()) throw ContractViolation("x0 size differs from M");
    ReplicaOut out;
    out.series.windows = opt.windows;
    out.snaps.resize(snapshot_rounds.size());
    std::size_t next_rec = 0, next_snap = 0;
    auto emit = [&](int m) {
        if (opt.record_at.empty() ||
            (next_rec < opt.record_at.size() && opt.record_at[next_rec] == st.n)) {
            out.series.records.push_back(make_record(st, m, params, pf, opt.windows));
            if (!opt.record_at.empty()) ++next_rec;
        }
        while (next_snap < snapshot_rounds.size() && snapshot_rounds[next_snap] == st.n) out.snaps[next_snap++] = st.x;
    };
    emit(0);
    for (std::int64_t k = 0; k < rounds; ++k) emit(step_round(st, params, pf));
    return out;
}

}  // namespace

AbmSeries run_trajectory(std::vector<double> x0, std::int64_t rounds, const ModelParams& params,
                         const ProbabilityFn& pf, std::uint64_t seed, const AbmRunOptions& opt) {
    if (rounds < 0) throw ContractViolation("rounds must be >= 0");
    AgentEnsembleState st{std::move(x0), 0, Rng(seed)};
    return run_replica(std::move(st), rounds, params, pf, opt, {}).series;
}

MeanSe mean_se(std::span<const double> v) {
    if (v.empty()) return {0.0, 0.0};
    double s = 0.0;
    for (double x : v) s += x;
    const double n = static_cast<double>(v.size());
    const double mean = s / n;
    if (v.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

AbmEnsemble ensemble_run(std::size_t replicas, std::uint64_t base_seed, const X0Sampler& x0_sampler,
                         std::int64_t rounds, const ModelParams& params, const ProbabilityFn& pf,
                         const EnsembleOptions& opt) {
    if (replicas < 1) throw ContractViolation("need at least one replica");
    if (rounds < 0) throw ContractViolation("rounds must be >= 0");
    std::vector<std::int64_t> snaps = opt.snapshot_rounds;
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
    for (auto n : snaps)
        if (n < 0 || n > rounds) throw ContractViolation(fmt::format("snapshot round {} outside [0, {}]", n, rounds));

    std::vector<std::size_t> order = opt.execution_order;
    if (order.empty()) {
        order.resize(replicas);
        std::iota(order.begin(), order.end(), std::size_t{0});
    }
    {
        auto chk = order;
        std::sort(chk.begin(), chk.end());
        for (std::size_t i = 0; i < replicas; ++i)
            if (chk.size() != replicas || chk[i] != i) throw ContractViolation("execution order is not a permutation");
    }

    std::vector<ReplicaOut> outs(replicas);
    parallel_for(replicas, opt.threads, [&](std::size_t k) {
        const std::size_t r = order[k];
        AgentEnsembleState st{{}, 0, Rng(split_seed(base_seed, r))};
        st.x = x0_sampler(st.rng, params.M());
        outs[r] = run_replica(std::move(st), rounds, params, pf, opt.run, snaps);
    });

    AbmEnsemble ens;
    ens.windows = opt.run.windows;
    const std::size_t nrec = outs[0].series.records.size();
    std::vector<double> mv(replicas), av(replicas), sv(replicas);
    for (std::size_t j = 0; j < nrec; ++j) {
        AbmAggregateRow row;
        const auto& r0 = outs[0].series.records[j];
        row.n = r0.n;
        row.t = r0.t;
        row.replica_count = replicas;
        for (std::size_t r = 0; r < replicas; ++r) {
            mv[r] = outs[r].series.records[j].m;
            av[r] = outs[r].series.records[j].alpha_hat;
        }
        const auto m = mean_se(mv), a = mean_se(av);
        row.m_mean = m.mean;
        row.m_se = m.se;
        row.alpha_hat = a.mean;
        row.alpha_se = a.se;
        row.a_hat = params.kappa() - a.mean;
        for (std::size_t w = 0; w < ens.windows.size(); ++w) {
            for (std::size_t r = 0; r < replicas; ++r) sv[r] = outs[r].series.records[j].sort_frac[w];
            row.sort_frac.push_back(mean_se(sv).mean);
        }
        ens.rows.push_back(std::move(row));
    }
    ens.snapshot_rounds = snaps;
    ens.snapshots.resize(snaps.size());
    for (std::size_t s = 0; s < snaps.size(); ++s)
        for (std::size_t r = 0; r < replicas; ++r)
            ens.snapshots[s].insert(ens.snapshots[s].end(), outs[r].snaps[s].begin(), outs[r].snaps[s].end());
    return ens;
}

EmpiricalDensity empirical_density(std::span<const double> xs, const Grid& grid) {
    EmpiricalDensity d;
    d.f.assign(grid.size(), 0.0);
    if (xs.empty()) {
        d.out_left = 0.0;
        d.out_right = 1.0;
        return d;
    }
    std::size_t left = 0, right = 0;
    std::vector<std::size_t> counts(grid.size(), 0);
    for (double x : xs) {
        if (x < grid.x_min()) {
            ++left;
        } else if (x > grid.x_max()) {
            ++right;
        } else {
            auto i = static_cast<std::size_t>((x - grid.x_min()) / grid.dx());
            counts[std::min(i, grid.size() - 1)]++;
        }
    }
    const double n = static_cast<double>(xs.size());
    for (std::size_t i = 0; i < counts.size(); ++i) d.f[i] = static_cast<double>(counts[i]) / (n * grid.dx());
    d.out_left = static_cast<double>(left) / n;
    d.out_right = static_cast<double>(right) / n;
    return d;
}

double sorting_fraction(std::span<const double> xs, double R) {
    if (!(R > 0.0)) throw ContractViolation("sorting window must be > 0");
    if (xs.empty()) return 0.0;
    std::size_t k = 0;
    for (double x : xs) k += (x > -R && x < R) ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(xs.size());
}

GridDensitySampler::GridDensitySampler(const Grid& grid, std::span<const double> f) : grid_(grid) {
    if (f.size() != grid.size()) throw ContractViolation("density size differs from grid");
    cdf_.resize(f.size());
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!(f[i] >= 0.0)) throw ContractViolation("density must be nonnegative");
        s += f[i];
        cdf_[i] = s;
    }
    if (!(s > 0.0)) throw ContractViolation("density has zero mass");
    for (auto& c : cdf_) c /= s;
    cdf_.back() = 1.0;
}

double GridDensitySampler::sample(Rng& rng) const {
    const double u = uniform01(rng);
    const double v = uniform01(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto i = std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
    return grid_.face(i) + v * grid_.dx();
}

std::vector<double> GridDensitySampler::sample_n(Rng& rng, int n) const {
    std::vector<double> out(static_cast<std::size_t>(std::max(n, 0)));
    for (auto& x : out) x = sample(rng);
    return out;
}

}  // namespace entrykin
