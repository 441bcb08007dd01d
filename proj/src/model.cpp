#include "entrykin/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "entrykin/errors.hpp"

namespace entrykin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw ContractViolation(what);
}

// Largest ratio needed so that the three derivative bounds hold at one point.
double needed_c_p(double p1, double p2, double one_minus_p) {
    double need = 0.0;
    auto ratio = [](double num, double den) {
        if (num <= 0.0) return 0.0;
        if (den <= 0.0) return kInf;
        return num / den;
    };
    need = std::max(need, ratio(p1, one_minus_p));
    need = std::max(need, ratio(std::abs(p2), one_minus_p));
    need = std::max(need, ratio(std::abs(p2), p1));
    if (p1 < 0.0 && p2 != 0.0) need = kInf;
    return need;
}

}  // namespace

// ---------------------------------------------------------------------------

ModelParams::ModelParams(int M, double Mc, double h, double tau) : M_(M), Mc_(Mc), h_(h), tau_(tau) {
    require(M >= 2, fmt::format("M must be >= 2 (got {})", M));
    require(std::isfinite(Mc) && Mc > 1.0 && Mc < M, fmt::format("Mc must lie in (1, M) (got {})", Mc));
    require(std::isfinite(h) && h > 0.0, fmt::format("h must be > 0 (got {})", h));
    require(std::isfinite(tau) && tau > 0.0, fmt::format("tau must be > 0 (got {})", tau));
    kappa_ = (Mc - 1.0) / (M - 1.0);
}

double kappa(const ModelParams& params) noexcept { return params.kappa(); }

double payoff(bool entered, int m, const ModelParams& params) {
    if (m < 0 || m > params.M())
        throw ContractViolation(fmt::format("entrant count {} outside [0, {}]", m, params.M()));
    if (!entered) return 0.0;
    if (m == 0) throw ContractViolation("an entrant implies at least one entrant");
    return params.h() * (params.Mc() - m);
}

EquilibriumSummary equilibrium_summary(const ModelParams& params) {
    EquilibriumSummary s{};
    s.symmetric_probability = params.kappa();
    s.expected_entrants = params.M() * params.kappa();
    s.band_lo = params.Mc() - 1.0;
    s.band_hi = params.Mc();
    s.expected_inside_band = s.expected_entrants > s.band_lo && s.expected_entrants < s.band_hi;
    return s;
}

// ---------------------------------------------------------------------------
// TabulatedC2

TabulatedC2 TabulatedC2::from_samples(std::vector<double> x, std::vector<double> p, std::vector<double> dp) {
    const std::size_t n = x.size();
    require(n >= 3, "tabulated p needs at least 3 rows");
    require(p.size() == n && dp.size() == n, "tabulated columns must have equal length");
    for (std::size_t i = 0; i < n; ++i) {
        require(std::isfinite(x[i]) && std::isfinite(p[i]) && std::isfinite(dp[i]),
                fmt::format("non-finite value in row {}", i));
        require(p[i] >= 0.0 && p[i] <= 1.0, fmt::format("p outside [0,1] in row {}", i));
        if (i > 0) require(x[i] > x[i - 1], fmt::format("x not strictly increasing at row {}", i));
    }
    std::vector<double> d2(n);
    d2[0] = (dp[1] - dp[0]) / (x[1] - x[0]);
    d2[n - 1] = (dp[n - 1] - dp[n - 2]) / (x[n - 1] - x[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) d2[i] = (dp[i + 1] - dp[i - 1]) / (x[i + 1] - x[i - 1]);
    TabulatedC2 t;
    t.x = std::move(x);
    t.p = std::move(p);
    t.dp = std::move(dp);
    t.d2p = std::move(d2);
    return t;
}

TabulatedC2 TabulatedC2::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractViolation("cannot open probability table " + path.string());
    std::vector<double> x, p, dp;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double a, b, c;
        if (!(ls >> a)) continue;
        if (!(ls >> b >> c)) throw ContractViolation(fmt::format("{}:{}: expected 3 columns", path.string(), lineno));
        std::string rest;
        if (ls >> rest) throw ContractViolation(fmt::format("{}:{}: trailing data", path.string(), lineno));
        x.push_back(a);
        p.push_back(b);
        dp.push_back(c);
    }
    auto t = from_samples(std::move(x), std::move(p), std::move(dp));
    t.source = path.string();
    return t;
}

namespace {

double tab_eval(const TabulatedC2& t, double x, int order) {
    if (!(x >= t.x.front() && x <= t.x.back()))
        throw ExtrapolationError(fmt::format("x={} outside table range [{}, {}]", x, t.x.front(), t.x.back()));
    auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
    std::size_t k = static_cast<std::size_t>(it - t.x.begin());
    k = std::clamp<std::size_t>(k, 1, t.x.size() - 1) - 1;
    const double h = t.x[k + 1] - t.x[k];
    const double s = (x - t.x[k]) / h;
    if (order == 2) return t.d2p[k] + s * (t.d2p[k + 1] - t.d2p[k]);
    const double p0 = t.p[k], p1 = t.p[k + 1], m0 = t.dp[k] * h, m1 = t.dp[k + 1] * h;
    if (order == 0) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * m0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * m1;
    }
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * m0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * m1) / h;
}

struct BaseInfo {
    double p_min;
    double c_p;
};

BaseInfo info(const LogisticFloor& f) {
    require(std::isfinite(f.p_min) && f.p_min >= 0.0 && f.p_min < 1.0, "logistic p_min must lie in [0,1)");
    require(std::isfinite(f.scale) && f.scale > 0.0, "logistic scale must be > 0");
    require(std::isfinite(f.center), "logistic center must be finite");
    return {f.p_min, std::max(f.scale, f.scale * f.scale)};
}

BaseInfo info(const RationalTails& f) {
    require(std::isfinite(f.alpha) && f.alpha > 0.0, "rational-tails exponent must be > 0");
    const double a = f.alpha;
    return {0.0, std::max(a / 2.0 + 0.25, a * a / 4.0 + a / 10.0)};
}

BaseInfo info(const ConstantP& f) {
    require(std::isfinite(f.value) && f.value > 0.0 && f.value <= 1.0, "constant p must lie in (0,1]");
    return {f.value, 0.0};
}

BaseInfo info(const TabulatedC2& t) {
    require(t.x.size() >= 3 && t.p.size() == t.x.size() && t.dp.size() == t.x.size() && t.d2p.size() == t.x.size(),
            "malformed probability table");
    double need = 0.0;
    for (std::size_t i = 0; i < t.x.size(); ++i) need = std::max(need, needed_c_p(t.dp[i], t.d2p[i], 1.0 - t.p[i]));
    return {*std::min_element(t.p.begin(), t.p.end()), need};
}

}  // namespace

// ---------------------------------------------------------------------------
// ProbabilityFn

ProbabilityFn::ProbabilityFn(std::shared_ptr<const ProbabilityFamily> fam, double base_p_min, double c_p)
    : family_(std::move(fam)), base_p_min_(base_p_min), p_min_(base_p_min), c_p_(c_p) {}

ProbabilityFn::ProbabilityFn(LogisticFloor f) : ProbabilityFn(nullptr, info(f).p_min, info(f).c_p) {
    family_ = std::make_shared<const ProbabilityFamily>(f);
}
ProbabilityFn::ProbabilityFn(RationalTails f) : ProbabilityFn(nullptr, info(f).p_min, info(f).c_p) {
    family_ = std::make_shared<const ProbabilityFamily>(f);
}
ProbabilityFn::ProbabilityFn(ConstantP f) : ProbabilityFn(nullptr, info(f).p_min, info(f).c_p) {
    family_ = std::make_shared<const ProbabilityFamily>(f);
}
ProbabilityFn::ProbabilityFn(TabulatedC2 f) : ProbabilityFn(nullptr, 0.0, 0.0) {
    const auto bi = info(f);
    base_p_min_ = p_min_ = bi.p_min;
    c_p_ = bi.c_p;
    family_ = std::make_shared<const ProbabilityFamily>(std::move(f));
}

double ProbabilityFn::base_eval(double x, int order) const {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, LogisticFloor>) {
                const double z = f.scale * (x - f.center);
                const double sg = sigmoid(z), sm = sigmoid(-z);
                const double q = 1.0 - f.p_min;
                if (order == 0) return f.p_min + q * sg;
                if (order == 1) return q * f.scale * sg * sm;
                return q * f.scale * f.scale * sg * sm * (sm - sg);
            } else if constexpr (std::is_same_v<T, RationalTails>) {
                const double r = std::sqrt(4.0 + x * x);
                const double u = f.alpha * std::asinh(x / 2.0);
                const double u1 = f.alpha / r;
                const double u2 = -f.alpha * x / (r * r * r);
                const double sg = sigmoid(u), sm = sigmoid(-u);
                if (order == 0) return sg;
                if (order == 1) return sg * sm * u1;
                return sg * sm * ((sm - sg) * u1 * u1 + u2);
            } else if constexpr (std::is_same_v<T, ConstantP>) {
                return order == 0 ? f.value : 0.0;
            } else {
                return tab_eval(f, x, order);
            }
        },
        *family_);
}

double ProbabilityFn::base_one_minus(double x) const {
    return std::visit(
        [&](const auto& f) -> double {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, LogisticFloor>) {
                return (1.0 - f.p_min) * sigmoid(-f.scale * (x - f.center));
            } else if constexpr (std::is_same_v<T, RationalTails>) {
                return sigmoid(-f.alpha * std::asinh(x / 2.0));
            } else if constexpr (std::is_same_v<T, ConstantP>) {
                return 1.0 - f.value;
            } else {
                return 1.0 - tab_eval(f, x, 0);
            }
        },
        *family_);
}

double ProbabilityFn::eval(double x, int order) const {
    if (order < 0 || order > 2) throw ContractViolation(fmt::format("derivative order {} not in {{0,1,2}}", order));
    const double v = base_eval(x, order);
    if (eps_ == 0.0) return v;
    return order == 0 ? (v + eps_) / (1.0 + eps_) : v / (1.0 + eps_);
}

double ProbabilityFn::one_minus(double x) const { return base_one_minus(x) / (1.0 + eps_); }

ProbabilityFn ProbabilityFn::regularized(double eps) const {
    if (!(std::isfinite(eps) && eps >= 0.0)) throw ContractViolation("epsilon must be finite and >= 0");
    ProbabilityFn out = *this;
    if (eps == 0.0) return out;
    // (p + e1)/(1+e1) lifted again by e2 equals a single lift by e1 + e2 + e1 e2.
    out.eps_ = eps_ + eps + eps_ * eps;
    out.p_min_ = (base_p_min_ + out.eps_) / (1.0 + out.eps_);
    return out;
}

std::string ProbabilityFn::describe() const {
    std::string base = std::visit(
        [](const auto& f) -> std::string {
            using T = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<T, LogisticFloor>)
                return fmt::format("logistic_floor(p_min={}, scale={}, center={})", f.p_min, f.scale, f.center);
            else if constexpr (std::is_same_v<T, RationalTails>)
                return fmt::format("rational_tails(alpha={})", f.alpha);
            else if constexpr (std::is_same_v<T, ConstantP>)
                return fmt::format("constant(value={})", f.value);
            else
                return fmt::format("tabulated({} rows{}{})", f.x.size(), f.source.empty() ? "" : ", ", f.source);
        },
        *family_);
    if (eps_ > 0.0) base += fmt::format(" regularized(eps={})", eps_);
    return base;
}

double prob_eval(const ProbabilityFn& pf, double x, int order) { return pf.eval(x, order); }

// ---------------------------------------------------------------------------

std::string to_string(ConditionKind k) {
    switch (k) {
        case ConditionKind::Monotonicity: return "monotonicity";
        case ConditionKind::SlopeBound: return "slope_bound";
        case ConditionKind::CurvatureBound: return "curvature_bound";
        case ConditionKind::CurvatureVsSlope: return "curvature_vs_slope";
    }
    return "unknown";
}

ConditionReport verify_p_conditions(const ProbabilityFn& pf, std::span<const double> grid, double c_p) {
    if (grid.empty()) throw ContractViolation("test grid is empty");
    if (!std::is_sorted(grid.begin(), grid.end())) throw ContractViolation("test grid is not sorted");
    ConditionReport rep;
    rep.c_p_tested = c_p;
    rep.grid_size = grid.size();
    // Relative slack so that exact equality cases (e.g. c_p = s at the sigmoid tail) pass.
    constexpr double rel = 1e-12;
    double prev_p = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = grid[i];
        const double p = pf.eval(x, 0), p1 = pf.eval(x, 1), p2 = pf.eval(x, 2);
        const double q = pf.one_minus(x);
        if (p1 < 0.0 || (i > 0 && p < prev_p)) rep.violations.push_back({x, ConditionKind::Monotonicity, p1, 0.0});
        if (p1 == 0.0) rep.flat_points.push_back(x);
        if (p1 > c_p * q * (1 + rel) + 1e-300) rep.violations.push_back({x, ConditionKind::SlopeBound, p1, c_p * q});
        if (std::abs(p2) > c_p * q * (1 + rel) + 1e-300)
            rep.violations.push_back({x, ConditionKind::CurvatureBound, std::abs(p2), c_p * q});
        if (std::abs(p2) > c_p * p1 * (1 + rel) + 1e-300)
            rep.violations.push_back({x, ConditionKind::CurvatureVsSlope, std::abs(p2), c_p * p1});
        rep.minimal_c_p = std::max(rep.minimal_c_p, needed_c_p(p1, p2, q));
        prev_p = p;
    }
    return rep;
}

std::vector<double> linspace_step(double lo, double hi, double step) {
    if (!(step > 0.0) || !(hi >= lo)) throw ContractViolation("linspace_step needs step > 0 and hi >= lo");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) out[i] = lo + static_cast<double>(i) * step;
    return out;
}

}  // namespace entrykin
