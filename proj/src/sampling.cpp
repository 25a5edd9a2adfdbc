#include "rumdp/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace rumdp {

void CountTable::merge(const CountTable& other) {
    if (other.sa.size() != sa.size()) throw std::invalid_argument("count tables have different layouts");
    for (std::size_t c = 0; c < sa.size(); ++c) {
        sa[c] += other.sa[c];
        for (std::size_t k = 0; k < sas[c].size(); ++k) sas[c][k] += other.sas[c][k];
    }
    pooled.clear();
}

std::uint64_t CountTable::total() const {
    std::uint64_t n = 0;
    for (auto v : sa) n += v;
    return n;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t CounterRng::bits(std::uint64_t episode, std::uint64_t step, std::uint64_t stream) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ episode);
    h = splitmix64(h ^ (step * 0x632be59bd9b4e019ull + stream));
    return h;
}

double CounterRng::uniform(std::uint64_t episode, std::uint64_t step, std::uint64_t stream) const {
    return static_cast<double>(bits(episode, step, stream) >> 11) * 0x1.0p-53;
}

std::size_t default_episode_length(std::size_t num_states) {
    const auto len = static_cast<std::size_t>(4.0 * std::sqrt(static_cast<double>(num_states)));
    return std::clamp<std::size_t>(len, 1, 200);
}

std::vector<std::uint8_t> absorbing_states(const Mdp& m) {
    std::vector<std::uint8_t> out(m.num_states(), 1);
    for (const auto& c : m.choices) {
        bool self_loop = false;
        for (const auto& t : c.transitions)
            if (t.target == c.state && t.prob >= 1.0) self_loop = true;
        if (!self_loop) out[c.state] = 0;
    }
    return out;
}

namespace {

constexpr std::uint64_t stream_action = 1;
constexpr std::uint64_t stream_successor = 2;

std::size_t draw_successor(const Choice& c, double u) {
    double acc = 0.0;
    for (std::size_t k = 0; k < c.transitions.size(); ++k) {
        acc += c.transitions[k].prob;
        if (u < acc) return k;
    }
    // rounding: fall back to the last successor with positive mass
    for (std::size_t k = c.transitions.size(); k-- > 0;)
        if (c.transitions[k].prob > 0.0) return k;
    return 0;
}

void run_episodes(const Mdp& truth, const SamplingConfig& cfg, const std::vector<std::uint8_t>& terminal,
                  std::size_t episode_len, std::uint64_t begin, std::uint64_t end, CountTable& out) {
    const CounterRng rng(cfg.seed);
    for (std::uint64_t e = begin; e < end; ++e) {
        const std::uint64_t key = cfg.first_episode + e;
        std::size_t s = truth.initial;
        for (std::size_t step = 0; step < episode_len; ++step) {
            if (cfg.stop_at_terminal && terminal[s]) break;
            const std::size_t n_enabled = truth.end_choice(s) - truth.first_choice(s);
            std::size_t local = 0;
            if (cfg.policy == SamplingPolicy::fixed) {
                local = cfg.fixed_policy.at(s);
                if (local >= n_enabled) throw std::invalid_argument("sampling policy picks a disabled action");
            } else {
                local = std::min(n_enabled - 1,
                                 static_cast<std::size_t>(rng.uniform(key, step, stream_action) * double(n_enabled)));
            }
            const std::size_t ci = truth.first_choice(s) + local;
            const auto& c = truth.choices[ci];
            const std::size_t k = draw_successor(c, rng.uniform(key, step, stream_successor));
            ++out.sa[ci];
            ++out.sas[ci][k];
            s = c.transitions[k].target;
        }
    }
}

} // namespace

CountTable collect(const Mdp& truth, const SamplingConfig& cfg) {
    CountTable counts = CountTable::zeros(truth);
    if (cfg.budget == 0) return counts;

    if (cfg.mode == SamplingMode::generative) {
        const CounterRng rng(cfg.seed);
        for (std::size_t ci = 0; ci < truth.num_choices(); ++ci) {
            const auto& c = truth.choices[ci];
            for (std::uint64_t i = 0; i < cfg.budget; ++i) {
                const std::size_t k = draw_successor(c, rng.uniform(cfg.first_episode + ci, i, stream_successor));
                ++counts.sa[ci];
                ++counts.sas[ci][k];
            }
        }
        return counts;
    }

    std::vector<std::uint8_t> terminal = absorbing_states(truth);
    for (std::size_t s = 0; s < truth.num_states(); ++s)
        if (truth.is_target(s)) terminal[s] = 1;
    const std::size_t len = cfg.episode_len ? cfg.episode_len : default_episode_length(truth.num_states());

    const unsigned workers = std::max(1u, std::min<unsigned>(cfg.workers, static_cast<unsigned>(cfg.budget)));
    if (workers == 1) {
        run_episodes(truth, cfg, terminal, len, 0, cfg.budget, counts);
        return counts;
    }
    std::vector<CountTable> partial(workers, counts);
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (cfg.budget + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t b = std::min<std::uint64_t>(cfg.budget, w * chunk);
        const std::uint64_t e = std::min<std::uint64_t>(cfg.budget, b + chunk);
        pool.emplace_back([&, w, b, e] { run_episodes(truth, cfg, terminal, len, b, e, partial[w]); });
    }
    for (auto& t : pool) t.join();
    for (const auto& p : partial) counts.merge(p);
    return counts;
}

CountTable pool(const Pmdp& m, const ExpressionIndex& idx, const CountTable& raw) {
    if (raw.sa.size() != m.num_choices()) throw std::invalid_argument("count table does not match the model");
    CountTable out = raw;
    out.pooled.assign(idx.size(), PooledCount{});
    for (std::size_t f = 0; f < idx.size(); ++f) {
        auto& p = out.pooled[f];
        p.known = idx.is_constant(f);
        for (const auto& ref : idx.occ[f]) {
            p.trials += raw.sa[ref.choice];
            p.successes += raw.sas[ref.choice][ref.local];
        }
    }
    return out;
}

} // namespace rumdp
