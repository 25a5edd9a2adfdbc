#pragma once

#include "rumdp/model.hpp"

#include <cstdint>
#include <vector>

namespace rumdp {

/// Pooled binomial evidence for one expression.
struct PooledCount {
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    /// Constant expression: counts are kept but carry no information.
    bool known = false;
    bool operator==(const PooledCount&) const = default;
};

/// Visit counts #(s,a), #(s,a,s') and, after pool(), per-expression totals.
struct CountTable {
    std::vector<std::uint64_t> sa;
    std::vector<std::vector<std::uint64_t>> sas;
    std::vector<PooledCount> pooled;

    template <class Model>
    static CountTable zeros(const Model& m) {
        CountTable t;
        t.sa.assign(m.num_choices(), 0);
        t.sas.resize(m.num_choices());
        for (std::size_t c = 0; c < m.num_choices(); ++c) t.sas[c].assign(m.choices[c].transitions.size(), 0);
        return t;
    }

    /// Adds raw counts of another table with the same layout. Pooled totals are dropped.
    void merge(const CountTable& other);
    std::uint64_t total() const;

    bool operator==(const CountTable&) const = default;
};

/// Stateless counter-based generator: every draw is a hash of (seed, episode, step, stream).
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
    std::uint64_t bits(std::uint64_t episode, std::uint64_t step, std::uint64_t stream) const;
    /// Uniform double in [0,1).
    double uniform(std::uint64_t episode, std::uint64_t step, std::uint64_t stream) const;

private:
    std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class SamplingMode { episodic, generative };
enum class SamplingPolicy { uniform, fixed };

struct SamplingConfig {
    SamplingMode mode = SamplingMode::episodic;
    /// Steps per episode; 0 selects the default 4*sqrt(|S|), capped at 200.
    std::size_t episode_len = 0;
    /// Episodic: number of trajectories. Generative: samples per state-action pair.
    std::uint64_t budget = 0;
    std::uint64_t seed = 0;
    SamplingPolicy policy = SamplingPolicy::uniform;
    /// Local action index per state, for SamplingPolicy::fixed.
    std::vector<std::size_t> fixed_policy;
    /// Index of the first episode, so consecutive calls draw fresh streams.
    std::uint64_t first_episode = 0;
    /// Trajectory collection fans out over this many threads.
    unsigned workers = 1;
    /// End an episode early on target or absorbing states.
    bool stop_at_terminal = true;
};

std::size_t default_episode_length(std::size_t num_states);

/// Simulates the true model and counts transitions. Deterministic for a fixed seed.
CountTable collect(const Mdp& truth, const SamplingConfig& cfg);

/// Fills pooled (K_f, N_f) for every expression of the index.
CountTable pool(const Pmdp& m, const ExpressionIndex& idx, const CountTable& raw);

/// States where every enabled choice is a certain self-loop.
std::vector<std::uint8_t> absorbing_states(const Mdp& m);

} // namespace rumdp
