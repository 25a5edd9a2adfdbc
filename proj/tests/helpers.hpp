#pragma once

#include "rumdp/model.hpp"
#include "rumdp/model_io.hpp"
#include "rumdp/sampling.hpp"
#include "rumdp/stats.hpp"

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace testing {

inline rumdp::Pmdp coin_model() {
    return rumdp::parse_model(R"(
        params: theta1 in [0,1];
        target s1;
        state s0 { action a { -> s1 : theta1; -> s0 : 1 - theta1; } }
        state s1 { action a { -> s1 : 1; } }
    )");
}

/// One uniform random point of the parameter box.
inline std::vector<double> random_point(const rumdp::ParameterSpace& ps, std::mt19937_64& rng) {
    std::vector<double> v(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        std::uniform_real_distribution<double> d(ps.lo(i), ps.hi(i));
        v[i] = d(rng);
    }
    return v;
}

/**
 * Small random pMDP: `n` states, up to three parameters, linear expressions
 * of the form c*theta_i and their complements or 2-way constant splits. The
 * last state is the target.
 */
inline rumdp::Pmdp random_pmdp(std::mt19937_64& rng, std::size_t n, std::size_t nparams) {
    using namespace rumdp;
    ParameterSpace ps;
    for (std::size_t i = 0; i < nparams; ++i) {
        ps.names.push_back("t" + std::to_string(i + 1));
        ps.lower.push_back(Rational(1, 10));
        ps.upper.push_back(Rational(9, 10));
    }
    PmdpBuilder b(ps);
    for (std::size_t s = 0; s < n; ++s) b.add_state("s" + std::to_string(s));
    const std::size_t a0 = b.add_action("a");
    const std::size_t a1 = b.add_action("b");
    std::uniform_int_distribution<std::size_t> pick_state(0, n - 1), pick_param(0, nparams - 1);
    std::uniform_int_distribution<int> pick_coef(1, 4), coin(0, 3);
    for (std::size_t s = 0; s + 1 < n; ++s) {
        for (std::size_t a : {a0, a1}) {
            if (a == a1 && coin(rng) == 0) continue;
            std::size_t t1 = pick_state(rng), t2 = pick_state(rng);
            if (t1 == t2) t2 = (t1 + 1) % n;
            Polynomial p;
            if (coin(rng) == 0) {
                p = Polynomial::constant(Rational(pick_coef(rng), 5));
            } else {
                const Rational c(pick_coef(rng), 4);
                p = Polynomial::variable(pick_param(rng)) * c;
                if (coin(rng) == 0 && nparams > 1) {
                    // mix of two parameters with weights summing to c
                    const std::size_t j = pick_param(rng);
                    p = Polynomial::variable(pick_param(rng)) * (c / 2) + Polynomial::variable(j) * (c / 2);
                }
            }
            b.add_choice(s, a, {{t1, p}, {t2, Polynomial::constant(1) - p}});
        }
    }
    b.add_choice(n - 1, a0, {{n - 1, Polynomial::constant(1)}});
    b.add_target(n - 1);
    b.set_initial(0);
    return b.build();
}

/// Pooled counts and learned intervals from one episodic dataset.
struct Dataset {
    rumdp::CountTable pooled;
    rumdp::IntervalTable ivals;
};

inline Dataset learn(const rumdp::Pmdp& m, const rumdp::ExpressionIndex& idx, const rumdp::Mdp& truth,
                     std::uint64_t budget, std::uint64_t seed, double delta, std::size_t episode_len = 0) {
    rumdp::SamplingConfig sc;
    sc.budget = budget;
    sc.seed = seed;
    sc.episode_len = episode_len;
    Dataset d;
    d.pooled = rumdp::pool(m, idx, rumdp::collect(truth, sc));
    rumdp::ConfidenceConfig cc;
    cc.delta = delta;
    d.ivals = rumdp::learn_intervals(idx, d.pooled, cc);
    return d;
}

/// Trivial table with some expressions overridden by their printed form.
inline rumdp::IntervalTable intervals_by_text(const rumdp::Pmdp& m, const rumdp::ExpressionIndex& idx,
                                              const std::vector<std::pair<std::string, std::pair<double, double>>>& given) {
    rumdp::IntervalTable t = rumdp::trivial_intervals(idx);
    for (const auto& [text, b] : given) {
        const rumdp::Polynomial p = rumdp::parse_expression(text, m.params.names);
        bool found = false;
        for (std::size_t f = 0; f < idx.size(); ++f)
            if (idx.exprs[f] == p) {
                t.entries[f].lo = b.first;
                t.entries[f].hi = b.second;
                t.entries[f].trivial = false;
                found = true;
            }
        if (!found) throw std::invalid_argument("no such expression: " + text);
    }
    return t;
}

inline std::size_t expr_id(const rumdp::Pmdp& m, const rumdp::ExpressionIndex& idx, const std::string& text) {
    const rumdp::Polynomial p = rumdp::parse_expression(text, m.params.names);
    for (std::size_t f = 0; f < idx.size(); ++f)
        if (idx.exprs[f] == p) return f;
    throw std::invalid_argument("no such expression: " + text);
}

/**
 * Witness that the parameter box can be looser than the learned intervals:
 * t1, t2 free, their average pinned to one half at a third choice.
 */
inline rumdp::Pmdp averaging_witness() {
    return rumdp::parse_model(R"(
        params: t1 in [0,1], t2 in [0,1];
        target g;
        state s0 { action a { -> g : t1; -> b : 1 - t1; } }
        state s1 { action a { -> g : t2; -> b : 1 - t2; } }
        state s2 { action a { -> g : 1/2*t1 + 1/2*t2; -> b : 1 - 1/2*t1 - 1/2*t2; } }
        state g { action a { -> g : 1; } }
        state b { action a { -> b : 1; } }
    )");
}

inline rumdp::IntervalTable averaging_intervals(const rumdp::Pmdp& m, const rumdp::ExpressionIndex& idx) {
    return intervals_by_text(m, idx, {{"1/2*t1 + 1/2*t2", {0.5, 0.5}}, {"1 - 1/2*t1 - 1/2*t2", {0.5, 0.5}}});
}

/**
 * Witness that the learned intervals can admit kernels outside the parameter
 * box: t at one choice, 1 - t at another, both learned as [0.4, 0.7].
 */
inline rumdp::Pmdp complement_witness() {
    return rumdp::parse_model(R"(
        params: t in [0,1];
        target g;
        state s0 { action a { -> g : t; -> h : 3/5 - 3/5*t; -> b : 2/5 - 2/5*t; } }
        state s1 { action a { -> g : 1 - t; -> h : 3/5*t; -> b : 2/5*t; } }
        state h { action a { -> h : 1; } }
        state g { action a { -> g : 1; } }
        state b { action a { -> b : 1; } }
    )");
}

inline rumdp::IntervalTable complement_intervals(const rumdp::Pmdp& m, const rumdp::ExpressionIndex& idx) {
    return intervals_by_text(m, idx, {{"t", {0.4, 0.7}}, {"1 - t", {0.4, 0.7}}});
}

} // namespace testing
