#include "helpers.hpp"

#include "rumdp/bench.hpp"
#include "rumdp/relax.hpp"
#include "rumdp/rvi.hpp"

#include <doctest.h>

#include <algorithm>

using namespace rumdp;
using testing::expr_id;

namespace {

const Bounds& bound_of(const UncertainModel& u, const Pmdp& m, const ExpressionIndex& idx, const std::string& text) {
    return u.expr_bounds.at(expr_id(m, idx, text));
}

void check_local_nonempty(const UncertainModel& u) {
    REQUIRE(u.kind == UncertainKind::interval);
    for (std::size_t c = 0; c < u.bounds.size(); ++c) {
        double lo = 0.0, hi = 0.0;
        for (const auto& b : u.bounds[c]) {
            CHECK(0.0 <= b.lo);
            CHECK(b.lo <= b.hi);
            CHECK(b.hi <= 1.0);
            lo += b.lo;
            hi += b.hi;
        }
        CHECK(lo <= 1.0 + 1e-9);
        CHECK(hi >= 1.0 - 1e-9);
    }
}

} // namespace

TEST_CASE("tied intervals follow their expressions") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"theta1", {0.4, 0.7}}, {"1 - theta1", {0.3, 0.6}}});
    const UncertainModel u = build_interval_model(m, idx, t);
    CHECK(u.provenance == Provenance::P_I);
    CHECK_FALSE(u.fallback_used);
    CHECK(u.bounds[0][0].lo == 0.4);
    CHECK(u.bounds[0][0].hi == 0.7);
    CHECK(u.bounds[0][1].lo == 0.3);
    CHECK(u.bounds[0][1].hi == 0.6);
    CHECK(u.bounds[1][0].lo == 1.0);
    CHECK(u.bounds[1][0].hi == 1.0);

    const UncertainModel triv = build_interval_model(m, idx, trivial_intervals(idx));
    CHECK(triv.bounds[0][0].lo == 0.0);
    CHECK(triv.bounds[0][0].hi == 1.0);
    CHECK(triv.bounds[0][1].lo == 0.0);
    CHECK(triv.bounds[0][1].hi == 1.0);
    check_local_nonempty(triv);
}

TEST_CASE("constant-only model is a single kernel") {
    const Pmdp m = parse_model(R"(
        target s1;
        state s0 { action a { -> s1 : 0.3; -> s0 : 0.7; } }
        state s1 { action a { -> s1 : 1; } }
    )");
    const ExpressionIndex idx = index_expressions(m);
    const UncertainModel u = build_interval_model(m, idx, trivial_intervals(idx));
    for (std::size_t c = 0; c < u.bounds.size(); ++c)
        for (std::size_t k = 0; k < u.bounds[c].size(); ++k) {
            CHECK(u.bounds[c][k].lo == u.bounds[c][k].hi);
            CHECK(u.bounds[c][k].lo == doctest::Approx(m.choices[c].transitions[k].prob.constant_term().convert_to<double>()));
        }
    const SolveResult r = solve(u, {ObjectiveKind::reach}, NatureMode::robust);
    CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("parameter box can be looser than the learned intervals") {
    const Pmdp m = testing::averaging_witness();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::averaging_intervals(m, idx);
    const Polytope region = build_region(idx, t, m.params);

    const UncertainModel theta = build_param_box_model(m, region, idx, nullptr);
    CHECK(theta.provenance == Provenance::P_Theta);
    for (const char* e : {"t1", "t2", "1/2*t1 + 1/2*t2"}) {
        CAPTURE(e);
        CHECK(bound_of(theta, m, idx, e).lo == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(bound_of(theta, m, idx, e).hi == doctest::Approx(1.0).epsilon(1e-9));
    }

    const UncertainModel lambda = build_expr_proj_model(m, region, idx, nullptr);
    CHECK(lambda.provenance == Provenance::P_Lambda);
    CHECK(bound_of(lambda, m, idx, "1/2*t1 + 1/2*t2").lo == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(bound_of(lambda, m, idx, "1/2*t1 + 1/2*t2").hi == doctest::Approx(0.5).epsilon(1e-9));

    // intersecting restores the learned interval
    const UncertainModel both = build_param_box_model(m, region, idx, &t);
    CHECK(bound_of(both, m, idx, "1/2*t1 + 1/2*t2").lo == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(bound_of(both, m, idx, "1/2*t1 + 1/2*t2").hi == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("learned intervals can be looser than the parameter box") {
    const Pmdp m = testing::complement_witness();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::complement_intervals(m, idx);
    const Polytope region = build_region(idx, t, m.params);
    const UncertainModel theta = build_param_box_model(m, region, idx, nullptr);
    for (const char* e : {"t", "1 - t"}) {
        CAPTURE(e);
        CHECK(bound_of(theta, m, idx, e).lo == doctest::Approx(0.4).epsilon(1e-9));
        CHECK(bound_of(theta, m, idx, e).hi == doctest::Approx(0.6).epsilon(1e-9));
    }
    const UncertainModel lambda = build_expr_proj_model(m, region, idx, &t);
    CHECK(bound_of(lambda, m, idx, "t").hi == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(bound_of(lambda, m, idx, "1 - t").hi == doctest::Approx(0.6).epsilon(1e-9));

    // both expressions at 0.7 is admissible for the tied intervals
    const UncertainModel pi = build_interval_model(m, idx, t);
    CHECK(pi.bounds[0][0].hi == doctest::Approx(0.7));
    CHECK(pi.bounds[1][0].hi == doctest::Approx(0.7));
    CHECK(theta.bounds[0][0].hi < 0.7);
}

TEST_CASE("interval arithmetic over a box") {
    const Polynomial p = parse_expression("2*t1 - t2", {"t1", "t2"});
    const Bounds b = interval_bounds(p, {{0, 1}, {0, 1}});
    CHECK(b.lo == doctest::Approx(-1.0));
    CHECK(b.hi == doctest::Approx(2.0));
    const Bounds q = interval_bounds(parse_expression("t1*t2 - t1", {"t1", "t2"}), {{0.5, 1}, {0.2, 0.4}});
    // sound: contains the true range [-0.8, -0.3]
    CHECK(q.lo <= -0.8);
    CHECK(q.hi >= -0.3);
}

TEST_CASE("expression projection of a box returns the box") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"theta1", {0.3, 0.5}}, {"1 - theta1", {0.5, 0.7}}});
    const Polytope region = build_region(idx, t, m.params);
    const UncertainModel u = build_expr_proj_model(m, region, idx, &t);
    for (std::size_t f = 0; f < idx.size(); ++f) {
        CHECK(u.expr_bounds[f].lo == doctest::Approx(t[f].lo).epsilon(1e-9));
        CHECK(u.expr_bounds[f].hi == doctest::Approx(t[f].hi).epsilon(1e-9));
    }
}

TEST_CASE("complement coupling shrinks both intervals") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"theta1", {0.4, 0.7}}, {"1 - theta1", {0.4, 0.7}}});
    const Polytope region = build_region(idx, t, m.params);
    const UncertainModel u = build_expr_proj_model(m, region, idx, &t);
    for (const char* e : {"theta1", "1 - theta1"}) {
        CHECK(bound_of(u, m, idx, e).lo == doctest::Approx(0.4).epsilon(1e-9));
        CHECK(bound_of(u, m, idx, e).hi == doctest::Approx(0.6).epsilon(1e-9));
    }
}

TEST_CASE("single-parameter region model matches a parameter grid") {
    const Pmdp m = parse_model(R"(
        params: t in [0,1];
        target g;
        state s0 { action a { -> g : 1/2*t; -> s1 : 1/4 + 1/4*t; -> b : 3/4 - 3/4*t; } }
        state s1 { action a { -> g : t; -> b : 1 - t; } }
        state g { action a { -> g : 1; } }
        state b { action a { -> b : 1; } }
    )");
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"t", {0.3, 0.65}}});
    const Polytope region = build_region(idx, t, m.params);
    const UncertainModel r = build_region_model(m, region, idx);
    CHECK(r.kind == UncertainKind::region);
    CHECK(r.provenance == Provenance::P_R);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> val(0.0, 1.0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::vector<double> v{val(rng), val(rng), val(rng)};
        double lo = 1e9, hi = -1e9;
        for (int i = 0; i <= 10000; ++i) {
            const double x = 0.3 + 0.35 * i / 10000.0;
            const double pt[] = {x};
            double s = 0.0;
            for (std::size_t k = 0; k < 3; ++k) s += v[k] * m.choices[0].transitions[k].prob.evaluate(pt);
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        for (auto backend : {InnerBackend::lp, InnerBackend::vertex}) {
            CHECK(inner_region(*r.region, 0, v, Sense::minimize, backend) == doctest::Approx(lo).epsilon(1e-6));
            CHECK(inner_region(*r.region, 0, v, Sense::maximize, backend) == doctest::Approx(hi).epsilon(1e-6));
        }
    }
}

TEST_CASE("two-parameter region keeps few vertices") {
    const Pmdp m = parse_model(R"(
        params: t1 in [0,1], t2 in [0,1];
        state s0 { action a { -> g : 1/2*t1 + 1/2*t2; -> b : 1 - 1/2*t1 - 1/2*t2; } }
        state s1 { action a { -> g : 1/5*t1 + 4/5*t2; -> b : 1 - 1/5*t1 - 4/5*t2; } }
        state s2 { action a { -> g : 9/10*t1 + 1/10*t2; -> b : 1 - 9/10*t1 - 1/10*t2; } }
        state g { action a { -> g : 1; } }
        state b { action a { -> b : 1; } }
    )");
    const ExpressionIndex idx = index_expressions(m);
    const std::vector<double> ref{0.45, 0.55};
    IntervalTable t = trivial_intervals(idx);
    for (const char* e : {"1/2*t1 + 1/2*t2", "1/5*t1 + 4/5*t2", "9/10*t1 + 1/10*t2"}) {
        const std::size_t f = expr_id(m, idx, e);
        const double v = idx.exprs[f].evaluate(ref);
        t.entries[f].lo = v - 0.1;
        t.entries[f].hi = v + 0.1;
    }
    const UncertainModel r = build_region_model(m, build_region(idx, t, m.params), idx);
    REQUIRE(r.region->has_vertices);
    CHECK(r.region->vertices.size() >= 3);
    CHECK(r.region->vertices.size() <= 6);
}

TEST_CASE("empty region is reported") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"theta1", {0.1, 0.2}}, {"1 - theta1", {0.1, 0.2}}});
    const Polytope region = build_region(idx, t, m.params);
    CHECK_THROWS_AS(build_region_model(m, region, idx), EmptyRegion);
    CHECK_THROWS_AS(build_expr_proj_model(m, region, idx, &t), EmptyRegion);
    CHECK_THROWS_AS(build_param_box_model(m, region, idx, &t), EmptyRegion);

    for (Provenance p : {Provenance::P_Theta, Provenance::P_Lambda, Provenance::P_R}) {
        RelaxOptions opt;
        opt.provenance = p;
        const UncertainModel u = check_and_fallback(m, region, idx, t, opt);
        CHECK(u.fallback_used);
        CHECK(u.provenance == Provenance::P_I);
        // the contradictory choice was widened so the model stays usable
        CHECK(u.widened_choices == 1);
        check_local_nonempty(u);
    }
}

TEST_CASE("consistent intervals need no fallback") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const IntervalTable t = testing::intervals_by_text(m, idx, {{"theta1", {0.3, 0.6}}, {"1 - theta1", {0.35, 0.75}}});
    for (Provenance p : {Provenance::P_I, Provenance::P_Theta, Provenance::P_Lambda, Provenance::P_R}) {
        RelaxOptions opt;
        opt.provenance = p;
        const UncertainModel u = build_relaxation(m, idx, t, nullptr, opt);
        CHECK_FALSE(u.fallback_used);
        CHECK(u.provenance == p);
        CHECK(u.widened_choices == 0);
    }
}

TEST_CASE("relaxation names") {
    for (Provenance p : {Provenance::P_I, Provenance::P_Theta, Provenance::P_Lambda, Provenance::P_R})
        CHECK(parse_provenance(to_string(p)) == p);
    CHECK(parse_provenance("interval") == Provenance::P_I);
    CHECK(parse_provenance("param_box") == Provenance::P_Theta);
    CHECK(parse_provenance("expr_proj") == Provenance::P_Lambda);
    CHECK(parse_provenance("region") == Provenance::P_R);
    CHECK_THROWS(parse_provenance("P_X"));
}

TEST_CASE("hierarchy of relaxations on random data") {
    std::mt19937_64 rng(123);
    int compared = 0;
    for (int rep = 0; rep < 25; ++rep) {
        const Pmdp m = testing::random_pmdp(rng, 6, 2);
        const ExpressionIndex idx = index_expressions(m);
        const auto v = testing::random_point(m.params, rng);
        const Mdp truth = instantiate(m, v);
        const auto data = testing::learn(m, idx, truth, 60, rep, 0.05, 8);

        UncertainModel models[4];
        const Provenance order[4] = {Provenance::P_I, Provenance::P_Theta, Provenance::P_Lambda, Provenance::P_R};
        bool any_fallback = false;
        for (int k = 0; k < 4; ++k) {
            RelaxOptions opt;
            opt.provenance = order[k];
            models[k] = build_relaxation(m, idx, data.ivals, &data.pooled, opt);
            any_fallback = any_fallback || models[k].fallback_used;
        }
        if (any_fallback) continue;
        ++compared;

        // projection tightening, per expression
        const auto& lam = models[2].expr_bounds;
        const auto& th = models[1].expr_bounds;
        for (std::size_t f = 0; f < idx.size(); ++f) {
            CHECK(lam[f].lo >= data.ivals[f].lo - 1e-9);
            CHECK(lam[f].hi <= data.ivals[f].hi + 1e-9);
            CHECK(lam[f].lo >= th[f].lo - 1e-9);
            CHECK(lam[f].hi <= th[f].hi + 1e-9);
        }
        const Objective obj{ObjectiveKind::reach};
        std::vector<double> val[4];
        for (int k = 0; k < 4; ++k) val[k] = solve(models[k], obj, NatureMode::robust).values;
        for (std::size_t s = 0; s < m.num_states(); ++s) {
            CHECK(val[0][s] <= val[2][s] + 1e-6);
            CHECK(val[1][s] <= val[2][s] + 1e-6);
            CHECK(val[2][s] <= val[3][s] + 1e-6);
        }
    }
    CHECK(compared >= 15);
}
