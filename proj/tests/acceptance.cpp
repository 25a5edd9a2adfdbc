// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "helpers.hpp"

#include "rumdp/bench.hpp"
#include "rumdp/experiment.hpp"
#include "rumdp/geometry.hpp"
#include "rumdp/relax.hpp"
#include "rumdp/rvi.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

using namespace rumdp;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Bounds expr_bound(const UncertainModel& u, const Pmdp& m, const ExpressionIndex& idx, const std::string& text) {
    return u.expr_bounds[testing::expr_id(m, idx, text)];
}

bool near(double a, double b, double tol = 1e-9) { return std::abs(a - b) <= tol; }

bool interval_contains(const IntervalTable& t, const ExpressionIndex& idx, const std::vector<double>& u) {
    for (std::size_t f = 0; f < idx.size(); ++f) {
        const double v = idx.exprs[f].evaluate(u);
        if (v < t[f].lo || v > t[f].hi) return false;
    }
    return true;
}

// 1: statewise V(P_I) <= V(P_Lambda) <= V(P_R) and tightened expression intervals
Outcome hierarchy() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<std::size_t> states(4, 50), params(1, 3);
    SolveOptions sopt;
    sopt.vi_tol = 1e-9;
    const Objective obj{ObjectiveKind::reach};
    int checks = 0, bad = 0, fallbacks = 0;
    double worst = 0.0;
    for (int model = 0; model < 20; ++model) {
        const Pmdp m = testing::random_pmdp(rng, states(rng), params(rng));
        const ExpressionIndex idx = index_expressions(m);
        const Mdp truth = instantiate(m, testing::random_point(m.params, rng));
        for (int d = 0; d < 5; ++d) {
            const auto data = testing::learn(m, idx, truth, 80, 100 * model + d, 0.05, 12);
            UncertainModel u[3];
            const Provenance order[3] = {Provenance::P_I, Provenance::P_Lambda, Provenance::P_R};
            for (int k = 0; k < 3; ++k) {
                RelaxOptions ro;
                ro.provenance = order[k];
                u[k] = build_relaxation(m, idx, data.ivals, &data.pooled, ro);
                fallbacks += u[k].fallback_used;
            }
            std::vector<double> v[3];
            for (int k = 0; k < 3; ++k) v[k] = solve(u[k], obj, NatureMode::robust, sopt).values;
            for (std::size_t s = 0; s < m.num_states(); ++s) {
                const double gap = std::max(v[0][s] - v[1][s], v[1][s] - v[2][s]);
                worst = std::max(worst, gap);
                bad += gap > 1e-6;
                ++checks;
            }
            if (!u[1].fallback_used)
                for (std::size_t f = 0; f < idx.size(); ++f) {
                    const Bounds b = u[1].expr_bounds[f];
                    bad += b.lo < data.ivals[f].lo - 1e-9 || b.hi > data.ivals[f].hi + 1e-9;
                    ++checks;
                }
        }
    }
    return {bad == 0, fmt("%d checks, %d violations, worst value excess %.2e, %d fallback models", checks, bad, worst,
                          fallbacks)};
}

// 2: the two incomparability witnesses
Outcome witnesses() {
    bool ok = true;
    std::string why;
    {
        const Pmdp m = testing::averaging_witness();
        const ExpressionIndex idx = index_expressions(m);
        const Polytope region = build_region(idx, testing::averaging_intervals(m, idx), m.params);
        const Bounds th = expr_bound(build_param_box_model(m, region, idx, nullptr), m, idx, "1/2*t1 + 1/2*t2");
        const Bounds la = expr_bound(build_expr_proj_model(m, region, idx, nullptr), m, idx, "1/2*t1 + 1/2*t2");
        ok = ok && near(th.lo, 0.0) && near(th.hi, 1.0) && near(la.lo, 0.5) && near(la.hi, 0.5);
        why += fmt("averaging: box [%.6g,%.6g] vs projection [%.6g,%.6g]", th.lo, th.hi, la.lo, la.hi);
    }
    {
        const Pmdp m = testing::complement_witness();
        const ExpressionIndex idx = index_expressions(m);
        const IntervalTable t = testing::complement_intervals(m, idx);
        const Polytope region = build_region(idx, t, m.params);
        const std::vector<double> dir{1.0};
        const double lo = lp_solve(region, dir, Sense::minimize).objective;
        const double hi = lp_solve(region, dir, Sense::maximize).objective;
        // P_I: does each choice admit a distribution with its first expression at 0.7?
        const UncertainModel pi = build_interval_model(m, idx, t);
        bool admits = true;
        for (std::size_t c = 0; c < 2; ++c) {
            const auto& b = pi.bounds[c];
            double rest_lo = 0.0, rest_hi = 0.0;
            for (std::size_t k = 1; k < b.size(); ++k) {
                rest_lo += b[k].lo;
                rest_hi += b[k].hi;
            }
            admits = admits && b[0].lo <= 0.7 && 0.7 <= b[0].hi && rest_lo <= 0.3 + 1e-12 && 0.3 <= rest_hi + 1e-12;
        }
        ok = ok && near(lo, 0.4) && near(hi, 0.6) && admits;
        why += fmt("; complement: box [%.6g,%.6g], tied intervals admit 0.7/0.7: %s", lo, hi, admits ? "yes" : "no");
    }
    return {ok, why};
}

struct PacStats {
    int runs = 0;
    int covered = 0;
    int sound = 0;
    int fallback = 0;
};

PacStats pac_runs(const Benchmark& b, int reps, std::uint64_t budget, double delta) {
    const ExpressionIndex idx = index_expressions(b.model);
    PacStats st;
    RelaxOptions ro;
    ro.provenance = Provenance::P_Lambda;
    ro.delta = delta;
    for (int r = 0; r < reps; ++r) {
        const auto data = testing::learn(b.model, idx, b.truth, budget, 7000 + r, delta);
        const Synthesis s = synthesize(b.model, idx, b.truth, b.objective, data.ivals, &data.pooled, ro, {});
        ++st.runs;
        st.covered += interval_contains(data.ivals, idx, b.true_params);
        st.sound += s.robust.values[b.truth.initial] <= s.true_value + 1e-9;
        st.fallback += s.model.fallback_used;
    }
    return st;
}

std::vector<std::pair<std::string, PacStats>>& pac_cache() {
    static std::vector<std::pair<std::string, PacStats>> cache;
    if (cache.empty()) {
        cache.emplace_back("chain(5)", pac_runs(generate({Family::chain, 5, 0, 11, {}}), 500, 300, 0.05));
        cache.emplace_back("betting_game(10)", pac_runs(generate({Family::betting_game, 10, 0, 12, {}}), 500, 300, 0.05));
    }
    return cache;
}

// 3: coverage of the true parameters and soundness of the robust bound
Outcome pac_coverage() {
    bool ok = true;
    std::string why;
    for (const auto& [name, st] : pac_cache()) {
        const double cov = static_cast<double>(st.covered) / st.runs;
        const double snd = static_cast<double>(st.sound) / st.runs;
        ok = ok && cov >= 0.92 && snd >= 0.92;
        why += fmt("%s%s: u in U %.3f, bound <= true %.3f", why.empty() ? "" : "; ", name.c_str(), cov, snd);
    }
    return {ok, why};
}

// 4: the learned region is rarely empty
Outcome emptiness() {
    bool ok = true;
    std::string why;
    for (const auto& [name, st] : pac_cache()) {
        const double f = static_cast<double>(st.fallback) / st.runs;
        ok = ok && f <= 0.08;
        why += fmt("%s%s: fallback %.3f", why.empty() ? "" : "; ", name.c_str(), f);
    }
    return {ok, why};
}

// 5: inner problems against independent optima
Outcome inner_oracles() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0), val(-1.0, 2.0);
    std::uniform_int_distribution<std::size_t> width(2, 6);
    double worst_greedy = 0.0;
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = width(rng);
        std::vector<double> mu(n);
        double s = 0.0;
        for (auto& x : mu) s += (x = unit(rng) + 1e-3);
        std::vector<Bounds> b(n);
        ParameterSpace ps;
        for (std::size_t k = 0; k < n; ++k) {
            mu[k] /= s;
            b[k] = {std::max(0.0, mu[k] - 0.3 * unit(rng)), std::min(1.0, mu[k] + 0.3 * unit(rng))};
            ps.names.push_back("x" + std::to_string(k));
            ps.lower.push_back(Rational(b[k].lo));
            ps.upper.push_back(Rational(b[k].hi));
        }
        // transportation LP: bounds as variable bounds, unit mass as two rows
        Polytope p(ps);
        p.add_row(std::vector<double>(n, 1.0), 1.0);
        p.add_row(std::vector<double>(n, -1.0), -1.0);
        std::vector<double> v(n);
        for (auto& x : v) x = val(rng);
        for (Sense sense : {Sense::minimize, Sense::maximize}) {
            const double g = inner_interval(b, v, sense).value;
            const LPResult lp = lp_solve(p, v, sense);
            worst_greedy = std::max(worst_greedy, lp.status == LpStatus::optimal
                                                      ? std::abs(g - lp.objective)
                                                      : std::numeric_limits<double>::infinity());
        }
    }

    double worst_region = 0.0;
    int models = 0, cases = 0;
    for (int rep = 0; models < 200 && rep < 2000; ++rep) {
        const Pmdp m = testing::random_pmdp(rng, 5, 2);
        const ExpressionIndex idx = index_expressions(m);
        const auto data = testing::learn(m, idx, instantiate(m, testing::random_point(m.params, rng)), 40, rep, 0.1, 6);
        const Polytope region = build_region(idx, data.ivals, m.params);
        if (!RegionLp(region).feasible()) continue;
        ++models;
        const UncertainModel r = build_region_model(m, region, idx);
        for (std::size_t c = 0; c < m.num_choices(); ++c) {
            std::vector<double> v(m.choices[c].transitions.size());
            for (auto& x : v) x = unit(rng);
            for (Sense sense : {Sense::minimize, Sense::maximize}) {
                const double a = inner_region(*r.region, c, v, sense, InnerBackend::lp);
                const double b = inner_region(*r.region, c, v, sense, InnerBackend::vertex);
                worst_region = std::max(worst_region, std::abs(a - b));
                ++cases;
            }
        }
    }
    return {worst_greedy <= 1e-8 && worst_region <= 1e-6 && models == 200,
            fmt("greedy vs LP: 500 locals, max diff %.2e; region LP vs vertex: %d models, %d cases, max diff %.2e",
                worst_greedy, models, cases, worst_region)};
}

// 6: lifted glider regions contain every consistent true point, before and after tightening
Outcome mccormick_obbt() {
    const Benchmark b = generate({Family::glider, 5, 5, 0, {}});
    const ExpressionIndex idx = index_expressions(b.model);
    std::mt19937_64 rng(6);
    double worst = 0.0;
    bool monotone = true;
    int accepted_total = 0, regions = 0, aux = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
        const auto data = testing::learn(b.model, idx, b.truth, 150, seed, 0.05);
        const Polytope region = build_region(idx, data.ivals, b.model.params);
        aux = static_cast<int>(region.num_aux());
        std::vector<Polytope> rounds{region};
        for (std::size_t r = 1; r <= 4; ++r) {
            const ObbtResult res = obbt(region, 0.0, r);
            if (res.infeasible) return {false, fmt("tightening declared the seed %d region empty", int(seed))};
            rounds.push_back(res.region);
        }
        for (std::size_t r = 1; r < rounds.size(); ++r)
            for (std::size_t j = 0; j < region.dim(); ++j)
                monotone = monotone && rounds[r].var_bounds[j].lo >= rounds[r - 1].var_bounds[j].lo - 1e-12 &&
                           rounds[r].var_bounds[j].hi <= rounds[r - 1].var_bounds[j].hi + 1e-12;
        int accepted = 0;
        for (long k = 0; k < 50'000'000 && accepted < 10000; ++k) {
            const auto x = testing::random_point(b.model.params, rng);
            if (!interval_contains(data.ivals, idx, x)) continue;
            ++accepted;
            for (const auto& p : rounds) worst = std::max(worst, p.violation(p.lift_point(x)));
        }
        accepted_total += accepted;
        ++regions;
        if (accepted < 10000) return {false, fmt("only %d consistent points found for seed %d", accepted, int(seed))};
    }
    return {worst <= 1e-9 && monotone,
            fmt("%d regions with %d auxiliaries, %d sampled points, max violation %.2e, bounds monotone: %s", regions,
                aux, accepted_total, worst, monotone ? "yes" : "no")};
}

// 7: P_Lambda gap at least 3x smaller than P_I on betting_game(25)
Outcome gap_trend() {
    const Benchmark b = generate({Family::betting_game, 25, 0, 0, {}});
    const ExpressionIndex idx = index_expressions(b.model);
    OfflineConfig cfg;
    cfg.relaxations = {Provenance::P_I, Provenance::P_Lambda};
    cfg.budget = 10000;
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < 10; ++s) cfg.seeds.push_back(s);
    cfg.workers = 4;
    const auto rows = run_offline(b.model, idx, b.truth, b.objective, cfg);
    int hits = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
        const double ratio = rows[i].rel_gap / rows[i + 1].rel_gap;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        hits += !rows[i].timed_out() && !rows[i + 1].timed_out() && ratio >= 3.0;
    }
    return {hits >= 8, fmt("ratio >= 3 in %d/10 seeds (range %.2f..%.2f)", hits, lo, hi)};
}

// 8: final certified bound under P_Lambda at least the P_I one on chain(10)
Outcome online_dominance() {
    int wins = 0;
    std::string vals;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Benchmark b = generate({Family::chain, 10, 0, seed, {}});
        const ExpressionIndex idx = index_expressions(b.model);
        double final_bound[2];
        const Provenance which[2] = {Provenance::P_I, Provenance::P_Lambda};
        for (int k = 0; k < 2; ++k) {
            OfuConfig cfg;
            cfg.budget = 2000;
            cfg.relaxation = which[k];
            cfg.seed = seed;
            final_bound[k] = ofu_learn(b.model, idx, b.truth, b.objective, cfg).points.back().robust_bound;
        }
        wins += final_bound[1] >= final_bound[0] - 1e-9;
        vals += fmt("%s%.3f/%.3f", vals.empty() ? "" : " ", final_bound[1], final_bound[0]);
    }
    return {wins >= 8, fmt("P_Lambda >= P_I in %d/10 seeds (P_Lambda/P_I: %s)", wins, vals.c_str())};
}

// 9: identical offline configurations give identical CSV bytes
Outcome determinism() {
    const Benchmark b = generate({Family::parallel_betting, 2, 0, 9, {}});
    const ExpressionIndex idx = index_expressions(b.model);
    OfflineConfig cfg;
    cfg.seeds = {1, 2, 3};
    cfg.budget = 2000;
    auto render = [&](unsigned workers) {
        cfg.workers = workers;
        std::ostringstream os;
        write_offline_csv(os, "parallel_betting", "2", run_offline(b.model, idx, b.truth, b.objective, cfg));
        return os.str();
    };
    const std::string a = render(1), c = render(1), d = render(4);
    return {a == c && a == d, fmt("%zu bytes, repeat identical: %s, 4 workers identical: %s", a.size(),
                                  a == c ? "yes" : "no", a == d ? "yes" : "no")};
}

} // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"inclusion hierarchy", hierarchy},
        {"incomparability witnesses", witnesses},
        {"PAC coverage", pac_coverage},
        {"empty-region fallback rate", emptiness},
        {"inner problem oracles", inner_oracles},
        {"McCormick soundness and OBBT", mccormick_obbt},
        {"gap improvement on betting_game(25)", gap_trend},
        {"online bound dominance on chain(10)", online_dominance},
        {"offline determinism", determinism},
    };
    int failed = 0, n = 0;
    for (const auto& [name, run] : criteria) {
        ++n;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.pass;
        std::printf("criterion %d %s: %s (%s; %.1fs)\n", n, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d/%d criteria passed\n", n - failed, n);
    return failed == 0 ? 0 : 1;
}
