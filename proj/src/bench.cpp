#include "rumdp/bench.hpp"

#include "rumdp/sampling.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <stdexcept>
#include <tuple>

namespace rumdp {

std::string to_string(Family f) {
    switch (f) {
    case Family::chain: return "chain";
    case Family::betting_game: return "betting_game";
    case Family::parallel_betting: return "parallel_betting";
    case Family::glider: return "glider";
    case Family::engagement: return "engagement";
    }
    return "?";
}

Family parse_family(const std::string& s) {
    if (s == "chain") return Family::chain;
    if (s == "betting_game") return Family::betting_game;
    if (s == "parallel_betting") return Family::parallel_betting;
    if (s == "glider") return Family::glider;
    if (s == "engagement") return Family::engagement;
    throw std::invalid_argument("unknown benchmark family '" + s + "'");
}

std::vector<double> draw_true_params(const ParameterSpace& ps, std::uint64_t seed) {
    const CounterRng rng(seed);
    std::vector<double> u(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        const double lo = ps.lo(i) + 0.05;
        const double hi = ps.hi(i) - 0.05;
        u[i] = hi <= lo ? 0.5 * (ps.lo(i) + ps.hi(i)) : lo + (hi - lo) * rng.uniform(0xbe7c, i, 3);
    }
    return u;
}

namespace {

Polynomial var(std::size_t i) { return Polynomial::variable(i); }
Polynomial num(long long p, long long q = 1) { return Polynomial::constant(Rational(p, q)); }

struct ParamDecl {
    std::string name;
    Rational lo;
    Rational hi;
};

ParameterSpace box(std::vector<ParamDecl> params) {
    ParameterSpace ps;
    for (auto& p : params) {
        ps.names.push_back(p.name);
        ps.lower.push_back(p.lo);
        ps.upper.push_back(p.hi);
    }
    return ps;
}

// Collects successor probabilities, merging equal targets and dropping zero mass.
class Dist {
public:
    void add(std::size_t target, const Polynomial& p) {
        for (auto& t : out_)
            if (t.target == target) {
                t.prob += p;
                return;
            }
        out_.push_back({target, p});
    }
    std::vector<ParametricTransition> take() {
        std::vector<ParametricTransition> v;
        for (auto& t : out_)
            if (!t.prob.is_zero()) v.push_back(std::move(t));
        return v;
    }

private:
    std::vector<ParametricTransition> out_;
};

void check_sizes(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("invalid benchmark size: " + what);
}

Pmdp make_chain(std::size_t k) {
    check_sizes(k >= 2 && k <= 1000, "chain needs 2 <= k <= 1000");
    PmdpBuilder b(box({{"theta", Rational(1, 2), 1}}));
    for (std::size_t i = 0; i < k; ++i) b.add_state("s" + std::to_string(i));
    const std::size_t fail = b.add_state("fail");
    const std::size_t risky = b.add_action("risky");
    const std::size_t weak = b.add_action("weak");
    const std::size_t stay = b.add_action("stay");
    const Polynomial t = var(0);
    for (std::size_t i = 0; i + 1 < k; ++i) {
        if (i % 2 == 0) {
            b.add_choice(i, risky, {{i + 1, t}, {fail, num(1) - t}});
        } else {
            // half the mass detours through a bridge that retries with theta
            const std::size_t bridge = b.add_state("b" + std::to_string(i));
            b.add_choice(i, risky, {{i + 1, t * Rational(1, 2)}, {bridge, num(1, 2)}, {fail, (num(1) - t) * Rational(1, 2)}});
            b.add_choice(bridge, risky, {{i + 1, t}, {fail, num(1) - t}});
        }
        b.add_choice(i, weak, {{i + 1, t * Rational(1, 2)}, {fail, num(1) - t * Rational(1, 2)}});
    }
    b.add_choice(k - 1, stay, {{k - 1, num(1)}});
    b.add_choice(fail, stay, {{fail, num(1)}});
    b.add_target(k - 1);
    b.set_initial(0);
    return b.build();
}

constexpr std::array<int, 5> bets = {0, 1, 2, 5, 10};
constexpr int start_capital = 10;
constexpr int capital_scale = 100;

// Win probability of one game: base for small bets, plus the capital term for large ones.
Polynomial win_prob(std::size_t base, std::size_t slope, int bet, int capital) {
    if (bet <= 2) return var(base);
    return var(base) + var(slope) * Rational(std::min(capital, capital_scale), capital_scale);
}

Pmdp make_betting(std::size_t n) {
    check_sizes(n >= 1 && n <= 50, "betting_game needs 1 <= n <= 50");
    PmdpBuilder b(box({{"t1", Rational(2, 5), Rational(3, 5)}, {"t2", 0, Rational(1, 5)}}));
    auto name = [](std::size_t r, int c) { return "r" + std::to_string(r) + "_c" + std::to_string(c); };
    std::vector<std::size_t> act;
    for (int bet : bets) act.push_back(b.add_action("bet" + std::to_string(bet)));
    const std::size_t stop = b.add_action("stop");
    const std::size_t stay = b.add_action("stay");

    std::deque<std::pair<std::size_t, int>> queue{{0, start_capital}};
    b.add_state(name(0, start_capital));
    std::vector<std::tuple<std::size_t, int>> finals;
    while (!queue.empty()) {
        const auto [r, c] = queue.front();
        queue.pop_front();
        const std::size_t s = b.state(name(r, c));
        if (r == n) {
            finals.emplace_back(s, c);
            continue;
        }
        auto succ = [&](int c2) {
            const std::string nm = name(r + 1, c2);
            const bool fresh = !b.has_state(nm);
            const std::size_t id = b.state(nm);
            if (fresh) queue.emplace_back(r + 1, c2);
            return id;
        };
        for (std::size_t k = 0; k < bets.size(); ++k) {
            const int bet = bets[k];
            if (bet > c) continue;
            if (bet == 0) {
                b.add_choice(s, act[k], {{succ(c), num(1)}});
                continue;
            }
            const Polynomial p = win_prob(0, 1, bet, c);
            const std::size_t win = succ(c + bet);
            const std::size_t lose = succ(c - bet);
            b.add_choice(s, act[k], {{win, p}, {lose, num(1) - p}});
        }
    }
    const std::size_t done = b.add_state("done");
    for (const auto& [s, c] : finals) b.add_choice(s, stop, {{done, num(1)}}, Rational(c));
    b.add_choice(done, stay, {{done, num(1)}});
    b.add_target(done);
    b.set_initial(0);
    return b.build();
}

Pmdp make_parallel(std::size_t n) {
    check_sizes(n >= 1 && n <= 10, "parallel_betting needs 1 <= n <= 10");
    PmdpBuilder b(box({{"t1", Rational(2, 5), Rational(3, 5)}, {"t2", Rational(2, 5), Rational(3, 5)}, {"t3", 0, Rational(2, 5)}}));
    auto name = [](std::size_t r, int c1, int c2) {
        return "r" + std::to_string(r) + "_a" + std::to_string(c1) + "_b" + std::to_string(c2);
    };
    std::vector<std::size_t> act;
    for (int bet : bets) act.push_back(b.add_action("bet" + std::to_string(bet)));
    const std::size_t stop = b.add_action("stop");
    const std::size_t stay = b.add_action("stay");

    std::deque<std::tuple<std::size_t, int, int>> queue{{0, start_capital, start_capital}};
    b.add_state(name(0, start_capital, start_capital));
    std::vector<std::pair<std::size_t, int>> finals;
    while (!queue.empty()) {
        const auto [r, c1, c2] = queue.front();
        queue.pop_front();
        const std::size_t s = b.state(name(r, c1, c2));
        if (r == n) {
            finals.emplace_back(s, c1 + c2);
            continue;
        }
        auto succ = [&](int a1, int a2) {
            const std::string nm = name(r + 1, a1, a2);
            const bool fresh = !b.has_state(nm);
            const std::size_t id = b.state(nm);
            if (fresh) queue.emplace_back(r + 1, a1, a2);
            return id;
        };
        for (std::size_t k = 0; k < bets.size(); ++k) {
            const int bet = bets[k];
            if (bet > std::min(c1, c2)) continue;
            if (bet == 0) {
                b.add_choice(s, act[k], {{succ(c1, c2), num(1)}});
                continue;
            }
            const Polynomial p1 = var(0);
            const Polynomial p2 = win_prob(1, 2, bet, c2);
            const Polynomial q1 = num(1) - p1;
            const Polynomial q2 = num(1) - p2;
            Dist d;
            d.add(succ(c1 + bet, c2 + bet), p1 * p2);
            d.add(succ(c1 + bet, c2 - bet), p1 * q2);
            d.add(succ(c1 - bet, c2 + bet), q1 * p2);
            d.add(succ(c1 - bet, c2 - bet), q1 * q2);
            b.add_choice(s, act[k], d.take());
        }
    }
    const std::size_t done = b.add_state("done");
    for (const auto& [s, c] : finals) b.add_choice(s, stop, {{done, num(1)}}, Rational(c));
    b.add_choice(done, stay, {{done, num(1)}});
    b.add_target(done);
    b.set_initial(0);
    return b.build();
}

// Known current at a cell: signed magnitude in {-1, -1/2, 0, 1/2, 1} per axis.
struct Current {
    int h2 = 0; // twice the horizontal component
    int v2 = 0;
    bool hazard = false;
};

Current current_at(std::size_t x, std::size_t y, std::size_t X) {
    const std::uint64_t bits = splitmix64(0x611de7ull ^ (x * 1000003ull + y));
    Current c;
    c.h2 = static_cast<int>(bits % 5) - 2;
    c.v2 = static_cast<int>((bits >> 8) % 5) - 2;
    // hazards stay off the bottom row and the rightmost column, so the goal stays reachable
    c.hazard = y > 0 && x + 1 < X && (bits >> 16) % 7 == 0;
    return c;
}

Pmdp make_glider(std::size_t X, std::size_t Y) {
    check_sizes(X >= 2 && Y >= 2 && X <= 15 && Y <= 15, "glider needs 2 <= X, Y <= 15");
    const Rational half(1, 2);
    PmdpBuilder b(box({{"t1", 0, half}, {"t2", 0, half}, {"t3", 0, half}, {"t4", 0, half}}));
    auto id = [&](std::size_t x, std::size_t y) { return y * X + x; };
    for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t x = 0; x < X; ++x) b.add_state("x" + std::to_string(x) + "_y" + std::to_string(y));
    const std::array<std::string, 4> names = {"north", "south", "east", "west"};
    const std::array<int, 4> dx = {0, 0, 1, -1};
    const std::array<int, 4> dy = {1, -1, 0, 0};
    std::array<std::size_t, 4> act{};
    for (std::size_t a = 0; a < 4; ++a) act[a] = b.add_action(names[a]);
    const std::size_t stay = b.add_action("stay");
    auto clampx = [&](long v) { return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(X) - 1)); };
    auto clampy = [&](long v) { return static_cast<std::size_t>(std::clamp<long>(v, 0, static_cast<long>(Y) - 1)); };
    const std::size_t goal = id(X - 1, Y - 1);

    for (std::size_t y = 0; y < Y; ++y) {
        for (std::size_t x = 0; x < X; ++x) {
            const std::size_t s = id(x, y);
            const Current cur = current_at(x, y, X);
            if (s == goal || cur.hazard) {
                b.add_choice(s, stay, {{s, num(1)}});
                continue;
            }
            for (std::size_t a = 0; a < 4; ++a) {
                const bool horizontal = dx[a] != 0;
                // fail along the commanded axis, drift along the other one
                const int along = horizontal ? cur.h2 : cur.v2;
                const int across = horizontal ? cur.v2 : cur.h2;
                const Polynomial f = var(horizontal ? 0 : 1) * Rational(std::abs(along), 2);
                const Polynomial d = var(horizontal ? 3 : 2) * Rational(std::abs(across), 2);
                const int dir = across > 0 ? 1 : -1;
                const long mx = static_cast<long>(x) + dx[a];
                const long my = static_cast<long>(y) + dy[a];
                const long ddx = horizontal ? 0 : dir;
                const long ddy = horizontal ? dir : 0;
                Dist dist;
                dist.add(id(clampx(mx), clampy(my)), (num(1) - f) * (num(1) - d));
                dist.add(id(clampx(mx + ddx), clampy(my + ddy)), (num(1) - f) * d);
                dist.add(id(clampx(static_cast<long>(x) + ddx), clampy(static_cast<long>(y) + ddy)), f * d);
                dist.add(s, f * (num(1) - d));
                b.add_choice(s, act[a], dist.take());
            }
        }
    }
    b.add_target(goal);
    b.set_initial(0);
    return b.build();
}

Pmdp make_engagement(std::size_t L) {
    check_sizes(L >= 3 && L <= 1000, "engagement needs 3 <= L <= 1000");
    const Rational quarter(1, 4);
    ParameterSpace ps = box({{"t1", 0, quarter}, {"t2", 0, quarter}, {"t3", 0, quarter}, {"t4", 0, quarter}});
    ps.constraints.push_back({var(0) + var(1) + var(2) + var(3), Rational(1)});
    PmdpBuilder b(ps);

    // base up/down probabilities per action, scaled by response type, zone and cooldown
    const std::array<std::array<Rational, 2>, 3> base = {{{Rational(1, 5), Rational(1, 10)},
                                                          {Rational(3, 10), Rational(3, 20)},
                                                          {Rational(9, 20), Rational(1, 4)}}};
    const std::array<Rational, 5> type_up = {Rational(6, 5), Rational(1), Rational(4, 5), Rational(3, 5), Rational(7, 5)};
    const std::array<Rational, 5> type_down = {Rational(3, 5), Rational(1), Rational(13, 10), Rational(8, 5),
                                               Rational(4, 5)};
    const std::array<Rational, 3> zone_up = {Rational(4, 5), Rational(1), Rational(6, 5)};
    const std::array<Rational, 3> zone_down = {Rational(6, 5), Rational(1), Rational(4, 5)};

    auto name = [](std::size_t lvl, int cd) { return "l" + std::to_string(lvl) + "_c" + std::to_string(cd); };
    const std::size_t churn = b.add_state("churn");
    const std::size_t purchase = b.add_state("purchase");
    for (std::size_t lvl = 1; lvl < L; ++lvl)
        for (int cd = 0; cd < 2; ++cd) b.add_state(name(lvl, cd));
    const std::array<std::string, 3> names = {"light", "medium", "aggressive"};
    std::array<std::size_t, 3> act{};
    for (std::size_t a = 0; a < 3; ++a) act[a] = b.add_action(names[a]);
    const std::size_t stay = b.add_action("stay");

    auto level_state = [&](std::size_t lvl, int cd) {
        if (lvl == 0) return churn;
        if (lvl == L) return purchase;
        return b.state(name(lvl, cd));
    };
    for (std::size_t lvl = 1; lvl < L; ++lvl) {
        const std::size_t zone = 3 * lvl < L ? 0 : (3 * lvl >= 2 * L ? 2 : 1);
        for (int cd = 0; cd < 2; ++cd) {
            const std::size_t s = b.state(name(lvl, cd));
            for (std::size_t a = 0; a < 3; ++a) {
                const bool penalized = a == 2 && cd == 1;
                std::array<Rational, 5> up, down;
                for (std::size_t k = 0; k < 5; ++k) {
                    up[k] = base[a][0] * type_up[k] * zone_up[zone] * (penalized ? Rational(1, 2) : Rational(1));
                    down[k] = base[a][1] * type_down[k] * zone_down[zone] * (penalized ? Rational(3, 2) : Rational(1));
                    if (up[k] + down[k] >= 1) throw std::logic_error("engagement constants leave the simplex");
                }
                // t5 = 1 - (t1 + .. + t4) substituted: p = q5 + sum_k t_k (q_k - q5)
                Polynomial pu = Polynomial::constant(up[4]);
                Polynomial pd = Polynomial::constant(down[4]);
                for (std::size_t k = 0; k < 4; ++k) {
                    pu += var(k) * (up[k] - up[4]);
                    pd += var(k) * (down[k] - down[4]);
                }
                const int next_cd = a == 2 ? 1 : 0;
                Dist d;
                d.add(level_state(lvl + 1, next_cd), pu);
                d.add(level_state(lvl - 1, next_cd), pd);
                d.add(level_state(lvl, next_cd), num(1) - pu - pd);
                b.add_choice(s, act[a], d.take());
            }
        }
    }
    b.add_choice(churn, stay, {{churn, num(1)}});
    b.add_choice(purchase, stay, {{purchase, num(1)}});
    b.add_target(purchase);
    b.set_initial(b.state(name(std::max<std::size_t>(1, L / 3), 0)));
    return b.build();
}

std::string notes_for(Family f) {
    switch (f) {
    case Family::chain: return "theta in [0.5,1]; risky: theta forward, 1-theta fail (odd states: theta/2 forward, 1/2 bridge, (1-theta)/2 fail; bridge: theta forward); weak: theta/2 forward, 1-theta/2 fail";
    case Family::betting_game:
        return "start 10 coins; bets 0,1,2,5,10; small bets win t1; large bets win t1 + t2*min(c,100)/100; "
               "t1 in [0.4,0.6], t2 in [0,0.2]";
    case Family::parallel_betting:
        return "start 10+10 coins; shared bet; game one wins t1; game two wins t2 (+ t3*min(c2,100)/100 for bets 5,10)";
    case Family::glider:
        return "currents in {-1,-1/2,0,1/2,1} per axis from a fixed hash; hazards 1 in 7 off the bottom row and "
               "right column; fail t1|h| or t2|v|, drift t4|v| or t3|h|; t in [0,0.5]";
    case Family::engagement:
        return "base up/down light 1/5,1/10 medium 3/10,3/20 aggressive 9/20,1/4; type factors up 6/5,1,4/5,3/5,7/5 "
               "down 3/5,1,13/10,8/5,4/5; zones cold/warm/hot; cooldown halves aggressive up and scales down by 3/2";
    }
    return "";
}

} // namespace

Benchmark generate(const BenchmarkSpec& spec) {
    Benchmark out;
    out.spec = spec;
    switch (spec.family) {
    case Family::chain: out.model = make_chain(spec.size); break;
    case Family::betting_game: out.model = make_betting(spec.size); break;
    case Family::parallel_betting: out.model = make_parallel(spec.size); break;
    case Family::glider: out.model = make_glider(spec.size, spec.size_y ? spec.size_y : spec.size); break;
    case Family::engagement: out.model = make_engagement(spec.size); break;
    }
    out.true_params = spec.true_params ? *spec.true_params : draw_true_params(out.model.params, spec.seed);
    if (!out.model.params.contains(out.true_params, 1e-12))
        throw std::invalid_argument("true parameters lie outside the parameter space");
    out.truth = instantiate(out.model, out.true_params);
    out.objective = default_objective(out.model);
    out.notes = notes_for(spec.family);
    return out;
}

} // namespace rumdp
