#include "rumdp/rvi.hpp"

#include "rumdp/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rumdp {

std::string to_string(ObjectiveKind k) { return k == ObjectiveKind::reach ? "reach" : "total_reward"; }
std::string to_string(NatureMode m) { return m == NatureMode::robust ? "robust" : "optimistic"; }
std::string to_string(InnerBackend b) {
    switch (b) {
    case InnerBackend::automatic: return "auto";
    case InnerBackend::lp: return "lp";
    case InnerBackend::vertex: return "vertex";
    }
    return "?";
}

InnerResult inner_interval(std::span<const Bounds> bounds, std::span<const double> values, Sense sense) {
    if (bounds.size() != values.size()) throw std::invalid_argument("inner_interval: size mismatch");
    double lo_sum = 0.0, hi_sum = 0.0;
    for (const auto& b : bounds) {
        lo_sum += b.lo;
        hi_sum += b.hi;
    }
    const double tol = tolerances().stochastic;
    if (lo_sum > 1.0 + tol || hi_sum < 1.0 - tol)
        throw InfeasibleLocalSet("local interval set admits no distribution");

    const std::size_t k = bounds.size();
    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    if (sense == Sense::minimize)
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    else
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    InnerResult r;
    r.distribution.resize(k);
    for (std::size_t i = 0; i < k; ++i) r.distribution[i] = bounds[i].lo;
    double mass = 1.0 - lo_sum;
    for (std::size_t i : order) {
        if (mass <= 0.0) break;
        const double add = std::min(bounds[i].hi - bounds[i].lo, mass);
        r.distribution[i] += add;
        mass -= add;
    }
    for (std::size_t i = 0; i < k; ++i) r.value += r.distribution[i] * values[i];
    return r;
}

double inner_region(const RegionData& data, std::size_t choice, std::span<const double> succ_values, Sense sense,
                    InnerBackend backend, std::vector<int>* warm, std::vector<double>* distribution) {
    const auto& forms = data.forms.at(choice);
    if (forms.size() != succ_values.size()) throw std::invalid_argument("inner_region: size mismatch");
    const std::size_t n = data.region.dim();
    std::vector<double> obj(n, 0.0);
    double constant = 0.0;
    for (std::size_t k = 0; k < forms.size(); ++k) {
        const double v = succ_values[k];
        if (v == 0.0) continue;
        constant += v * forms[k].constant;
        for (std::size_t j = 0; j < n; ++j) obj[j] += v * forms[k].coeffs[j];
    }
    if (backend == InnerBackend::automatic) backend = data.has_vertices ? InnerBackend::vertex : InnerBackend::lp;
    if (backend == InnerBackend::vertex) {
        if (!data.has_vertices)
            throw BackendUnavailable("vertex backend unavailable for this region; use the lp backend");
        double best = sense == Sense::minimize ? std::numeric_limits<double>::infinity()
                                               : -std::numeric_limits<double>::infinity();
        const std::vector<double>* arg = nullptr;
        for (const auto& x : data.vertices) {
            double v = 0.0;
            for (std::size_t j = 0; j < n; ++j) v += obj[j] * x[j];
            if (sense == Sense::minimize ? v < best : v > best) {
                best = v;
                arg = &x;
            }
        }
        if (distribution) {
            distribution->clear();
            for (const auto& f : forms) distribution->push_back(f.evaluate(*arg));
        }
        return best + constant;
    }
    const auto res = data.lp->solve(obj, sense, warm && !warm->empty() ? warm : nullptr);
    if (res.status != LpStatus::optimal) throw EmptyRegion("region LP failed during value iteration");
    if (warm) *warm = res.basis;
    if (distribution) {
        distribution->clear();
        for (const auto& f : forms) distribution->push_back(f.evaluate(res.point));
    }
    return res.objective + constant;
}

namespace {

struct Sweeper {
    const UncertainModel& u;
    NatureMode mode;
    InnerBackend backend;
    std::vector<std::vector<int>> warm;
    std::vector<double> succ;

    double q(std::size_t c, const std::vector<double>& values, std::vector<double>* dist = nullptr) {
        const auto& choice = u.skeleton.choices[c];
        succ.resize(choice.transitions.size());
        for (std::size_t k = 0; k < succ.size(); ++k) succ[k] = values[choice.transitions[k].target];
        const Sense sense = mode == NatureMode::robust ? Sense::minimize : Sense::maximize;
        if (u.kind == UncertainKind::region)
            return choice.reward + inner_region(*u.region, c, succ, sense, backend, &warm[c], dist);
        InnerResult r = inner_interval(u.bounds[c], succ, sense);
        if (dist) *dist = std::move(r.distribution);
        return choice.reward + r.value;
    }
};

// Greedy choice restricted to actions that make progress. A value-preserving
// loop can look optimal without ever reaching the target (or collecting
// reward), so states are resolved backwards: a state takes its first
// near-optimal action that either pays reward or moves, under nature's
// distribution, to an already resolved state.
std::vector<std::size_t> extract_policy(Sweeper& sw, const std::vector<double>& values, bool reward, double vi_tol) {
    const Mdp& m = sw.u.skeleton;
    const std::size_t n = m.num_states();
    constexpr double mass_eps = 1e-12;
    struct Candidate {
        std::size_t choice;
        std::vector<double> dist;
    };
    std::vector<std::vector<Candidate>> cands(n);
    std::vector<std::size_t> policy(n, 0);
    std::vector<std::uint8_t> resolved(n, 0);
    std::vector<std::vector<std::size_t>> preds(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (m.is_target(s)) {
            resolved[s] = 1;
            continue;
        }
        std::vector<double> qs;
        std::vector<std::vector<double>> dists;
        for (std::size_t c = m.first_choice(s); c < m.end_choice(s); ++c) {
            std::vector<double> d;
            qs.push_back(sw.q(c, values, &d));
            dists.push_back(std::move(d));
        }
        const double best = *std::max_element(qs.begin(), qs.end());
        const double slack = std::max(1e-12, 10.0 * vi_tol) * (1.0 + std::abs(best));
        for (std::size_t i = 0; i < qs.size(); ++i)
            if (qs[i] >= best - slack) cands[s].push_back({m.first_choice(s) + i, std::move(dists[i])});
        policy[s] = cands[s].front().choice - m.first_choice(s);
        for (const auto& cd : cands[s]) {
            const auto& tr = m.choices[cd.choice].transitions;
            for (std::size_t k = 0; k < tr.size(); ++k)
                if (cd.dist[k] > mass_eps) preds[tr[k].target].push_back(s);
        }
    }

    auto try_resolve = [&](std::size_t s) {
        for (const auto& cd : cands[s]) {
            const auto& ch = m.choices[cd.choice];
            bool progress = reward && ch.reward > 0.0;
            for (std::size_t k = 0; k < ch.transitions.size() && !progress; ++k)
                progress = cd.dist[k] > mass_eps && resolved[ch.transitions[k].target] && ch.transitions[k].target != s;
            if (progress) {
                policy[s] = cd.choice - m.first_choice(s);
                return true;
            }
        }
        return false;
    };
    std::vector<std::size_t> work;
    for (std::size_t s = 0; s < n; ++s)
        if (!resolved[s] && try_resolve(s)) {
            resolved[s] = 1;
            work.push_back(s);
        }
    for (std::size_t s = 0; s < n; ++s)
        if (m.is_target(s)) work.push_back(s);
    while (!work.empty()) {
        const std::size_t t = work.back();
        work.pop_back();
        for (std::size_t p : preds[t])
            if (!resolved[p] && try_resolve(p)) {
                resolved[p] = 1;
                work.push_back(p);
            }
    }
    return policy;
}

} // namespace

SolveResult solve(const UncertainModel& u, const Objective& obj, NatureMode mode, const SolveOptions& opt) {
    const Mdp& m = u.skeleton;
    const std::size_t n = m.num_states();
    SolveResult res;
    res.mode = mode;
    res.objective = obj.kind;
    res.values.assign(n, 0.0);
    res.policy.assign(n, 0);
    if (obj.kind == ObjectiveKind::reach)
        for (std::size_t s = 0; s < n; ++s)
            if (m.is_target(s)) res.values[s] = 1.0;
    if (opt.fixed_policy && opt.fixed_policy->size() != n)
        throw std::invalid_argument("fixed policy does not cover every state");

    Sweeper sw{u, mode, opt.backend, std::vector<std::vector<int>>(m.num_choices()), {}};
    const bool reward = obj.kind == ObjectiveKind::total_reward;

    auto choice_range = [&](std::size_t s) {
        if (opt.fixed_policy) {
            const std::size_t c = m.first_choice(s) + (*opt.fixed_policy)[s];
            if (c >= m.end_choice(s)) throw std::invalid_argument("fixed policy picks a disabled action");
            return std::pair{c, c + 1};
        }
        return std::pair{m.first_choice(s), m.end_choice(s)};
    };

    double prev_residual = 0.0;
    for (res.iterations = 0; res.iterations < opt.max_iter;) {
        ++res.iterations;
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (m.is_target(s)) continue;
            if (u.kind == UncertainKind::region || (s & 255) == 0) poll(opt.deadline, "value iteration");
            const auto [b, e] = choice_range(s);
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t c = b; c < e; ++c) best = std::max(best, sw.q(c, res.values));
            if (reward && best > opt.v_max) {
                best = opt.v_max;
                res.capped = true;
            }
            residual = std::max(residual, std::abs(best - res.values[s]));
            res.values[s] = best;
        }
        res.residual = residual;
        // a small residual alone understates the error when the sweeps contract slowly;
        // rate = ratio of consecutive residuals, remaining error ~ residual * rate / (1 - rate)
        const double rate = prev_residual > 0.0 ? residual / prev_residual : 0.0;
        prev_residual = residual;
        if (residual < opt.vi_tol && (residual == 0.0 || (rate < 1.0 && residual * rate < opt.vi_tol * (1.0 - rate)))) {
            res.converged = true;
            break;
        }
    }

    if (opt.fixed_policy) {
        res.policy = *opt.fixed_policy;
        return res;
    }
    res.policy = extract_policy(sw, res.values, reward, opt.vi_tol);
    return res;
}

SolveResult solve_mdp(const Mdp& m, const Objective& obj, const SolveOptions& opt) {
    return solve(point_model(m), obj, NatureMode::robust, opt);
}

namespace {

// Strongly connected components (iterative Tarjan). Returns component id per node.
std::vector<std::size_t> scc(const std::vector<std::vector<std::size_t>>& adj, std::size_t& count) {
    const std::size_t n = adj.size();
    constexpr std::size_t none = static_cast<std::size_t>(-1);
    std::vector<std::size_t> index(n, none), low(n, 0), comp(n, none), stack;
    std::vector<std::uint8_t> on_stack(n, 0);
    std::vector<std::pair<std::size_t, std::size_t>> call;
    std::size_t next = 0;
    count = 0;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != none) continue;
        call.push_back({root, 0});
        while (!call.empty()) {
            auto& [v, i] = call.back();
            if (i == 0 && index[v] == none) {
                index[v] = low[v] = next++;
                stack.push_back(v);
                on_stack[v] = 1;
            }
            if (i < adj[v].size()) {
                const std::size_t w = adj[v][i++];
                if (index[w] == none)
                    call.push_back({w, 0});
                else if (on_stack[w])
                    low[v] = std::min(low[v], index[w]);
                continue;
            }
            if (low[v] == index[v]) {
                std::size_t w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = count;
                } while (w != v);
                ++count;
            }
            const std::size_t done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
        }
    }
    return comp;
}

} // namespace

std::vector<double> evaluate_policy(const Mdp& m, const std::vector<std::size_t>& policy, const Objective& obj,
                                    double tol, std::size_t max_iter) {
    const std::size_t n = m.num_states();
    if (policy.size() != n) throw std::invalid_argument("policy does not cover every state");
    std::vector<std::size_t> chosen(n);
    for (std::size_t s = 0; s < n; ++s) {
        chosen[s] = m.first_choice(s) + policy[s];
        if (chosen[s] >= m.end_choice(s)) throw std::invalid_argument("policy picks a disabled action");
    }
    std::vector<double> v(n, 0.0);
    std::vector<std::uint8_t> fixed(n, 0);
    for (std::size_t s = 0; s < n; ++s)
        if (m.is_target(s)) {
            v[s] = obj.kind == ObjectiveKind::reach ? 1.0 : 0.0;
            fixed[s] = 1;
        }

    // graph of the induced chain; targets are sinks
    std::vector<std::vector<std::size_t>> adj(n), radj(n);
    for (std::size_t s = 0; s < n; ++s) {
        if (m.is_target(s)) continue;
        for (const auto& t : m.choices[chosen[s]].transitions)
            if (t.prob > 0.0) {
                adj[s].push_back(t.target);
                radj[t.target].push_back(s);
            }
    }
    auto backward = [&](std::vector<std::uint8_t> mark) {
        std::vector<std::size_t> work;
        for (std::size_t s = 0; s < n; ++s)
            if (mark[s]) work.push_back(s);
        while (!work.empty()) {
            const std::size_t s = work.back();
            work.pop_back();
            for (std::size_t p : radj[s])
                if (!mark[p]) {
                    mark[p] = 1;
                    work.push_back(p);
                }
        }
        return mark;
    };

    if (obj.kind == ObjectiveKind::reach) {
        // states that cannot reach the target keep value 0
        std::vector<std::uint8_t> tgt(n, 0);
        for (std::size_t s = 0; s < n; ++s) tgt[s] = m.is_target(s);
        const auto reach = backward(tgt);
        for (std::size_t s = 0; s < n; ++s)
            if (!reach[s]) fixed[s] = 1;
    } else {
        // positive reward inside a bottom component away from the target diverges
        std::size_t ncomp = 0;
        const auto comp = scc(adj, ncomp);
        std::vector<std::uint8_t> bottom(ncomp, 1), rewarding(ncomp, 0);
        for (std::size_t s = 0; s < n; ++s) {
            if (m.is_target(s)) {
                bottom[comp[s]] = 0;
                continue;
            }
            for (std::size_t t : adj[s])
                if (comp[t] != comp[s]) bottom[comp[s]] = 0;
            if (m.choices[chosen[s]].reward > 0.0) rewarding[comp[s]] = 1;
        }
        std::vector<std::uint8_t> bad(n, 0);
        for (std::size_t s = 0; s < n; ++s)
            if (bottom[comp[s]] && rewarding[comp[s]]) bad[s] = 1;
        const auto inf = backward(bad);
        for (std::size_t s = 0; s < n; ++s)
            if (inf[s]) {
                v[s] = std::numeric_limits<double>::infinity();
                fixed[s] = 1;
            }
    }

    for (std::size_t it = 0; it < max_iter; ++it) {
        double residual = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            if (fixed[s]) continue;
            const auto& c = m.choices[chosen[s]];
            double x = obj.kind == ObjectiveKind::total_reward ? c.reward : 0.0;
            for (const auto& t : c.transitions)
                if (t.prob > 0.0) x += t.prob * v[t.target];
            residual = std::max(residual, std::abs(x - v[s]));
            v[s] = x;
        }
        if (residual < tol) break;
    }
    return v;
}

} // namespace rumdp
