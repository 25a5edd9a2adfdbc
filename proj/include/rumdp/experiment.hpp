#pragma once

#include "rumdp/deadline.hpp"
#include "rumdp/model.hpp"
#include "rumdp/relax.hpp"
#include "rumdp/rvi.hpp"
#include "rumdp/sampling.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace rumdp {

struct TracePoint {
    std::uint64_t trajectories = 0;
    /// Robust value of the current robust policy at the initial state.
    double robust_bound = 0.0;
    /// Value of the same policy on the true model.
    double true_value = 0.0;
    Provenance relaxation = Provenance::P_I;
    std::size_t rebuilds = 0;
    /// Zero unless timing was requested.
    double wallclock_s = 0.0;
    bool fallback = false;
};

struct LearningTrace {
    Provenance relaxation = Provenance::P_I;
    std::vector<TracePoint> points;
    /// Robust policy synthesized from all data.
    std::vector<std::size_t> final_policy;
};

struct OfuConfig {
    /// Number of trajectories.
    std::uint64_t budget = 0;
    double delta = 0.001;
    Provenance relaxation = Provenance::P_Lambda;
    RegionSource source = RegionSource::intervals;
    /// 0 selects default_episode_length.
    std::size_t episode_len = 0;
    std::uint64_t seed = 0;
    InnerBackend backend = InnerBackend::automatic;
    bool record_timing = false;
    const Deadline* deadline = nullptr;
};

/**
 * Optimism-driven learning loop. Starts from trivial intervals, explores
 * uniformly until the first data rebuild and then follows the optimistic
 * policy of the latest model. The model is rebuilt at an episode boundary
 * whenever some #(s,a) has at least doubled since the previous rebuild
 * (first visit counts as doubling from zero). Every rebuild adds a trace
 * point; a last point from all data is appended if the final episodes did
 * not trigger one.
 */
LearningTrace ofu_learn(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                        const OfuConfig& cfg);

/// Robust model, robust solve and true value of the robust policy from one interval table.
struct Synthesis {
    UncertainModel model;
    SolveResult robust;
    double true_value = 0.0;
};

Synthesis synthesize(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                     const IntervalTable& ivals, const CountTable* counts, const RelaxOptions& ropt,
                     const SolveOptions& sopt);

struct OfflineConfig {
    std::vector<Provenance> relaxations{Provenance::P_I, Provenance::P_Theta, Provenance::P_Lambda, Provenance::P_R};
    std::vector<std::uint64_t> seeds{0};
    std::uint64_t budget = 100000;
    SamplingMode mode = SamplingMode::episodic;
    std::size_t episode_len = 0;
    double delta = 0.001;
    RegionSource source = RegionSource::intervals;
    InnerBackend backend = InnerBackend::automatic;
    /// Per phase (build, solve); 0 disables.
    double timeout_s = 0.0;
    /// Evaluate the robust policy instead of the true-optimal one.
    bool robust_policy = false;
    /// Concurrent (relaxation x seed) cells.
    unsigned workers = 1;
    bool record_timing = false;
};

struct OfflineRow {
    std::uint64_t seed = 0;
    Provenance relaxation = Provenance::P_I;
    /// Phase that ran out of time; empty when the row completed.
    std::string timeout_phase;
    bool fallback = false;
    std::size_t widened_choices = 0;
    double v_lower = 0.0;
    double v_upper = 0.0;
    double v_star = 0.0;
    double rel_gap = 0.0;
    double build_s = 0.0;
    double solve_s = 0.0;

    bool timed_out() const { return !timeout_phase.empty(); }
};

/// Samples once per seed, then builds and solves every requested relaxation. Rows follow (seed, relaxation) order.
std::vector<OfflineRow> run_offline(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                                    const OfflineConfig& cfg);

struct OnlineConfig {
    std::vector<Provenance> relaxations{Provenance::P_I, Provenance::P_Lambda};
    std::vector<std::uint64_t> seeds{0};
    std::uint64_t budget = 1000;
    std::size_t episode_len = 0;
    double delta = 0.001;
    RegionSource source = RegionSource::intervals;
    InnerBackend backend = InnerBackend::automatic;
    /// Whole learning run; 0 disables.
    double timeout_s = 0.0;
    unsigned workers = 1;
    bool record_timing = false;
};

struct OnlineRun {
    std::uint64_t seed = 0;
    LearningTrace trace;
    bool timed_out = false;
};

/// One ofu_learn run per (seed, relaxation), in that order.
std::vector<OnlineRun> run_online(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                                  const OnlineConfig& cfg);

/// Header plus one line per row; TO rows leave the numeric columns empty.
void write_offline_csv(std::ostream& os, const std::string& benchmark, const std::string& instance,
                       const std::vector<OfflineRow>& rows);

/// Columns trajectories, robust_bound, true_value, relaxation, rebuilds, wallclock_s, fallback.
void write_trace_csv(std::ostream& os, const LearningTrace& trace);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& s);

struct Manifest {
    std::string command;
    /// Canonical configuration text; hashed into config_hash.
    std::string config;
    std::vector<std::uint64_t> seeds;
    std::size_t episode_len = 0;
    std::string notes;
    std::size_t states = 0;
    std::size_t transitions = 0;
    std::size_t params = 0;
    std::vector<std::string> files;
};

std::string code_version();

/// JSON document with config hash, seeds, code version, sizes and output files.
std::string render_manifest(const Manifest& mf);

} // namespace rumdp
