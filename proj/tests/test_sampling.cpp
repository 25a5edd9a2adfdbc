#include "helpers.hpp"

#include "rumdp/bench.hpp"
#include "rumdp/experiment.hpp"
#include "rumdp/sampling.hpp"

#include <doctest.h>

#include <cmath>

using namespace rumdp;

namespace {

// one parameter used by two choices, so pooling has something to add up
Pmdp shared_model() {
    return parse_model(R"(
        params: p in [0,1];
        target g;
        state s0 { action a { -> s1 : p; -> s0 : 1 - p; } action b { -> g : 0.3; -> s0 : 0.7; } }
        state s1 { action a { -> g : p; -> s0 : 1 - p; } }
        state g { action a { -> g : 1; } }
    )");
}

std::size_t find_expr(const Pmdp& m, const ExpressionIndex& idx, const std::string& text) {
    const Polynomial p = parse_expression(text, m.params.names);
    for (std::size_t f = 0; f < idx.size(); ++f)
        if (idx.exprs[f] == p) return f;
    FAIL("expression not indexed: " << text);
    return 0;
}

void check_consistent(const CountTable& t) {
    for (std::size_t c = 0; c < t.sa.size(); ++c) {
        std::uint64_t sum = 0;
        for (auto k : t.sas[c]) sum += k;
        CHECK(sum == t.sa[c]);
    }
}

} // namespace

TEST_CASE("deterministic self-loop collects every sample") {
    const Pmdp m = parse_model("state s0 { action a { -> s0 : 1; } }");
    const Mdp truth = instantiate(m, {});
    SamplingConfig cfg;
    cfg.mode = SamplingMode::generative;
    cfg.budget = 37;
    const CountTable t = collect(truth, cfg);
    CHECK(t.sa[0] == 37);
    CHECK(t.sas[0][0] == 37);

    cfg.mode = SamplingMode::episodic;
    cfg.episode_len = 5;
    cfg.stop_at_terminal = false;
    cfg.budget = 4;
    const CountTable e = collect(truth, cfg);
    CHECK(e.sa[0] == 20);
    CHECK(e.sas[0][0] == 20);
}

TEST_CASE("fair coin frequency") {
    const Pmdp m = testing::coin_model();
    const double half[] = {0.5};
    const Mdp truth = instantiate(m, half);
    SamplingConfig cfg;
    cfg.mode = SamplingMode::generative;
    cfg.budget = 100000;
    cfg.seed = 2024;
    const CountTable t = collect(truth, cfg);
    CHECK(t.sa[0] == 100000);
    const double frac = static_cast<double>(t.sas[0][0]) / static_cast<double>(t.sa[0]);
    // Chebyshev: P(|X - 1/2| > 0.01) <= 0.25 / (1e5 * 1e-4) = 0.025 in the worst case
    CHECK(std::abs(frac - 0.5) < 0.01);
}

TEST_CASE("zero budget gives zero counts") {
    const Pmdp m = shared_model();
    const double v[] = {0.4};
    const Mdp truth = instantiate(m, v);
    for (auto mode : {SamplingMode::episodic, SamplingMode::generative}) {
        SamplingConfig cfg;
        cfg.mode = mode;
        cfg.budget = 0;
        const CountTable t = collect(truth, cfg);
        CHECK(t.total() == 0);
        const ExpressionIndex idx = index_expressions(m);
        const CountTable p = pool(m, idx, t);
        REQUIRE(p.pooled.size() == idx.size());
        for (const auto& pc : p.pooled) {
            CHECK(pc.successes == 0);
            CHECK(pc.trials == 0);
        }
    }
}

TEST_CASE("pooling adds counts over occurrences") {
    const Pmdp m = shared_model();
    const ExpressionIndex idx = index_expressions(m);
    CountTable raw = CountTable::zeros(m);
    // choices: (s0,a)=0, (s0,b)=1, (s1,a)=2, (g,a)=3
    raw.sa[0] = 10;
    raw.sas[0] = {3, 7};
    raw.sa[2] = 20;
    raw.sas[2] = {9, 11};
    raw.sa[1] = 5;
    raw.sas[1] = {2, 3};
    const CountTable t = pool(m, idx, raw);

    const std::size_t fp = find_expr(m, idx, "p");
    CHECK(t.pooled[fp].successes == 12);
    CHECK(t.pooled[fp].trials == 30);
    CHECK_FALSE(t.pooled[fp].known);

    const std::size_t fc = find_expr(m, idx, "0.3");
    CHECK(t.pooled[fc].known);
    CHECK(t.pooled[fc].trials == 5);
    CHECK(t.pooled[fc].successes == 2);
    for (std::size_t f : idx.unknown) CHECK(f != fc);

    const std::size_t fg = find_expr(m, idx, "1");
    CHECK(t.pooled[fg].trials == 0);
    CHECK(t.pooled[fg].successes == 0);
}

TEST_CASE("pooled counts match occurrences on random data") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 30; ++rep) {
        const Pmdp m = testing::random_pmdp(rng, 6, 2);
        const ExpressionIndex idx = index_expressions(m);
        auto v = testing::random_point(m.params, rng);
        const Mdp truth = instantiate(m, v);
        SamplingConfig cfg;
        cfg.budget = 40;
        cfg.seed = rep;
        cfg.episode_len = 8;
        const CountTable raw = collect(truth, cfg);
        check_consistent(raw);
        const CountTable t = pool(m, idx, raw);
        std::uint64_t trials = 0, weighted = 0;
        for (std::size_t f = 0; f < idx.size(); ++f) {
            std::uint64_t n = 0, k = 0;
            for (const auto& r : idx.occ[f]) {
                n += raw.sa[r.choice];
                k += raw.sas[r.choice][r.local];
            }
            CHECK(t.pooled[f].trials == n);
            CHECK(t.pooled[f].successes == k);
            CHECK(k <= n);
            trials += t.pooled[f].trials;
        }
        for (std::size_t c = 0; c < m.num_choices(); ++c) weighted += raw.sa[c] * m.choices[c].transitions.size();
        CHECK(trials == weighted);
    }
}

TEST_CASE("episodes restart and stop at terminals") {
    const Pmdp m = shared_model();
    const double v[] = {0.5};
    const Mdp truth = instantiate(m, v);
    SamplingConfig cfg;
    cfg.budget = 200;
    cfg.episode_len = 6;
    cfg.seed = 3;
    const CountTable t = collect(truth, cfg);
    check_consistent(t);
    // every episode starts in s0
    CHECK(t.sa[0] + t.sa[1] >= 200);
    CHECK(t.total() <= 200 * 6);
    CHECK(t.sa[3] == 0);
}

TEST_CASE("fixed policy only samples the chosen actions") {
    const Pmdp m = shared_model();
    const double v[] = {0.5};
    const Mdp truth = instantiate(m, v);
    SamplingConfig cfg;
    cfg.budget = 100;
    cfg.episode_len = 10;
    cfg.policy = SamplingPolicy::fixed;
    cfg.fixed_policy = {1, 0, 0};
    const CountTable t = collect(truth, cfg);
    CHECK(t.sa[0] == 0);
    CHECK(t.sa[1] > 0);
    CHECK(t.sa[2] == 0);
}

TEST_CASE("collection is deterministic and independent of workers") {
    const Benchmark b = generate({Family::betting_game, 4, 0, 7, {}});
    SamplingConfig cfg;
    cfg.budget = 500;
    cfg.seed = 99;
    const CountTable one = collect(b.truth, cfg);
    CHECK(collect(b.truth, cfg) == one);
    cfg.workers = 4;
    CHECK(collect(b.truth, cfg) == one);
    cfg.seed = 100;
    cfg.workers = 1;
    CHECK_FALSE(collect(b.truth, cfg) == one);

    cfg.mode = SamplingMode::generative;
    cfg.budget = 50;
    const CountTable g = collect(b.truth, cfg);
    for (auto n : g.sa) CHECK(n == 50);
    cfg.workers = 3;
    CHECK(collect(b.truth, cfg) == g);
}

TEST_CASE("merging is associative and commutative") {
    const Benchmark b = generate({Family::chain, 4, 0, 1, {}});
    SamplingConfig cfg;
    cfg.budget = 20;
    CountTable parts[3];
    for (int i = 0; i < 3; ++i) {
        cfg.seed = 10 + i;
        parts[i] = collect(b.truth, cfg);
    }
    CountTable x = parts[0];
    x.merge(parts[1]);
    x.merge(parts[2]);
    CountTable y = parts[2];
    CountTable yz = parts[1];
    yz.merge(parts[0]);
    y.merge(yz);
    CHECK(x == y);
    CHECK(x.total() == parts[0].total() + parts[1].total() + parts[2].total());
}

TEST_CASE("counter rng is a pure function of its coordinates") {
    const CounterRng a(1), b(1), c(2);
    CHECK(a.bits(3, 4, 0) == b.bits(3, 4, 0));
    CHECK(a.bits(3, 4, 0) != c.bits(3, 4, 0));
    CHECK(a.bits(3, 4, 0) != a.bits(4, 3, 0));
    double mean = 0.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
        const double u = a.uniform(i, 0, 0);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        mean += u;
    }
    CHECK(mean / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("default episode length") {
    CHECK(default_episode_length(16) == 16);
    CHECK(default_episode_length(1) == 4);
    CHECK(default_episode_length(1000000) == 200);
}

TEST_CASE("learning loop with no budget reports the prior") {
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const double v[] = {0.6};
    const Mdp truth = instantiate(m, v);
    OfuConfig cfg;
    cfg.budget = 0;
    cfg.relaxation = Provenance::P_I;
    const LearningTrace tr = ofu_learn(m, idx, truth, {ObjectiveKind::reach}, cfg);
    REQUIRE(tr.points.size() == 1);
    CHECK(tr.points[0].trajectories == 0);
    CHECK(tr.points[0].rebuilds == 0);
    // nature may put all mass on the self-loop
    CHECK(tr.points[0].robust_bound == doctest::Approx(0.0));
    CHECK(tr.points[0].true_value == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("rebuilds follow count doubling") {
    // one informative choice; the episode ends after one step either in the target or by length
    const Pmdp m = testing::coin_model();
    const ExpressionIndex idx = index_expressions(m);
    const double v[] = {0.3};
    const Mdp truth = instantiate(m, v);
    for (std::uint64_t budget : {1u, 2u, 3u, 8u, 100u}) {
        OfuConfig cfg;
        cfg.budget = budget;
        cfg.episode_len = 1;
        cfg.relaxation = Provenance::P_I;
        cfg.seed = budget;
        const LearningTrace tr = ofu_learn(m, idx, truth, {ObjectiveKind::reach}, cfg);
        const auto expected = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(budget)))) + 1;
        CAPTURE(budget);
        CHECK(tr.points.back().rebuilds == expected);
        CHECK(tr.points.back().trajectories == budget);
        for (std::size_t i = 1; i < tr.points.size(); ++i) {
            CHECK(tr.points[i].trajectories > tr.points[i - 1].trajectories);
            CHECK(tr.points[i].rebuilds >= tr.points[i - 1].rebuilds);
        }
    }
}

TEST_CASE("learning loop is deterministic") {
    const Benchmark b = generate({Family::chain, 4, 0, 2, {}});
    const ExpressionIndex idx = index_expressions(b.model);
    OfuConfig cfg;
    cfg.budget = 150;
    cfg.seed = 8;
    const LearningTrace a = ofu_learn(b.model, idx, b.truth, b.objective, cfg);
    const LearningTrace c = ofu_learn(b.model, idx, b.truth, b.objective, cfg);
    REQUIRE(a.points.size() == c.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].robust_bound == c.points[i].robust_bound);
        CHECK(a.points[i].true_value == c.points[i].true_value);
        CHECK(a.points[i].trajectories == c.points[i].trajectories);
    }
    CHECK(a.final_policy == c.final_policy);
}

TEST_CASE("certified bound stays below the true value on a single-parameter chain") {
    const Benchmark b = generate({Family::chain, 3, 0, 4, {}});
    const ExpressionIndex idx = index_expressions(b.model);
    const double v_star = solve_mdp(b.truth, b.objective).values[b.truth.initial];
    int covered = 0;
    const int reruns = 20;
    for (int r = 0; r < reruns; ++r) {
        OfuConfig cfg;
        cfg.budget = 300;
        cfg.seed = 1000 + r;
        cfg.relaxation = Provenance::P_Lambda;
        const LearningTrace tr = ofu_learn(b.model, idx, b.truth, b.objective, cfg);
        bool ok = true;
        for (const auto& p : tr.points) ok = ok && p.robust_bound <= p.true_value + 1e-6 && p.true_value <= v_star + 1e-6;
        covered += ok;
        CHECK(tr.points.back().robust_bound >= tr.points.front().robust_bound);
    }
    CHECK(covered == reruns);
}
