#include "rumdp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rumdp {

namespace {

// Continued fraction for I_x(a,b) (modified Lentz), valid for x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int max_iter = 10000;
    constexpr double eps = 1e-12;
    constexpr double tiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < eps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (a <= 0.0 || b <= 0.0) throw std::invalid_argument("incomplete_beta requires a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double beta_quantile(double p, double a, double b, bool upper) {
    double lo = 0.0;
    double hi = 1.0;
    // I_x is increasing in x; 60 halvings bring the bracket below 1e-18
    for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (incomplete_beta(a, b, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return upper ? hi : lo;
}

BinomialInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double gamma) {
    if (k > n) throw std::invalid_argument("clopper_pearson: successes exceed trials");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("clopper_pearson: gamma must lie in (0,1)");
    BinomialInterval iv;
    if (n == 0) {
        iv.trivial = true;
        return iv;
    }
    const double kd = static_cast<double>(k);
    const double nd = static_cast<double>(n);
    // both ends solved on the small tail: I_x(a,b) = 1 - I_{1-x}(b,a) avoids cancellation near 1.
    // the margin covers evaluation error of the incomplete beta, so the rounding stays outward
    constexpr double margin = 1e-12;
    iv.lo = k == 0 ? 0.0 : std::max(0.0, beta_quantile(gamma / 2.0, kd, nd - kd + 1.0, false) - margin);
    iv.hi = k == n ? 1.0 : std::min(1.0, 1.0 - beta_quantile(gamma / 2.0, nd - kd, kd + 1.0, false) + margin);
    return iv;
}

double weissman_radius(std::uint64_t n, std::size_t m, double gamma) {
    if (n == 0) return 2.0;
    if (m < 2) throw std::invalid_argument("weissman_radius: support size must be at least 2");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("weissman_radius: gamma must lie in (0,1)");
    const double md = static_cast<double>(m);
    // ln(2^m - 2) = m ln 2 + ln(1 - 2^(1-m))
    const double log_sets = md * std::log(2.0) + std::log1p(-std::exp2(1.0 - md));
    const double eps = std::sqrt(2.0 * (log_sets + std::log(1.0 / gamma)) / static_cast<double>(n));
    return std::min(eps, 2.0);
}

void validate(const ConfidenceConfig& cfg) {
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    if (!(cfg.eps_floor >= 0.0 && cfg.eps_floor < 1.0)) throw std::invalid_argument("eps_floor must lie in [0,1)");
}

IntervalTable trivial_intervals(const ExpressionIndex& idx) {
    IntervalTable t;
    t.entries.resize(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f) {
        auto& e = t.entries[f];
        if (idx.is_constant(f)) {
            const double v = idx.exprs[f].constant_term().convert_to<double>();
            e.lo = e.hi = v;
            e.constant = true;
        } else {
            e.trivial = true;
        }
    }
    return t;
}

IntervalTable learn_intervals(const ExpressionIndex& idx, const CountTable& counts, const ConfidenceConfig& cfg) {
    validate(cfg);
    if (counts.pooled.size() != idx.size()) throw std::invalid_argument("learn_intervals: counts are not pooled");
    IntervalTable t = trivial_intervals(idx);
    if (idx.unknown.empty()) return t;
    t.gamma = cfg.delta / static_cast<double>(idx.unknown.size());
    for (std::size_t f : idx.unknown) {
        auto& e = t.entries[f];
        const auto& pc = counts.pooled[f];
        e.successes = pc.successes;
        e.trials = pc.trials;
        const auto iv = clopper_pearson(pc.successes, pc.trials, t.gamma);
        e.lo = iv.lo;
        e.hi = iv.hi;
        e.trivial = iv.trivial;
        if (!e.trivial && cfg.eps_floor > 0.0 && e.lo == 0.0) e.lo = std::min(cfg.eps_floor, e.hi);
    }
    for (std::size_t f = 0; f < idx.size(); ++f) {
        if (!idx.is_constant(f)) continue;
        t.entries[f].successes = counts.pooled[f].successes;
        t.entries[f].trials = counts.pooled[f].trials;
    }
    return t;
}

} // namespace rumdp
