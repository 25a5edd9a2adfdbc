#include "rumdp/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#ifndef RUMDP_VERSION
#define RUMDP_VERSION "0.0.0"
#endif

namespace rumdp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Runs job(i) for i in [0, n) on up to `workers` threads.
template <class Job>
void parallel_for(std::size_t n, unsigned workers, Job job) {
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr err;
    std::mutex err_mu;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    job(i);
                } catch (...) {
                    std::lock_guard lk(err_mu);
                    if (!err) err = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

} // namespace

Synthesis synthesize(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                     const IntervalTable& ivals, const CountTable* counts, const RelaxOptions& ropt,
                     const SolveOptions& sopt) {
    Synthesis out;
    out.model = build_relaxation(m, idx, ivals, counts, ropt);
    out.robust = solve(out.model, obj, NatureMode::robust, sopt);
    out.true_value = evaluate_policy(truth, out.robust.policy, obj)[truth.initial];
    return out;
}

LearningTrace ofu_learn(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                        const OfuConfig& cfg) {
    ConfidenceConfig cc;
    cc.delta = cfg.delta;
    validate(cc);
    RelaxOptions ropt;
    ropt.provenance = cfg.relaxation;
    ropt.source = cfg.source;
    ropt.delta = cfg.delta;
    ropt.deadline = cfg.deadline;
    SolveOptions sopt;
    sopt.backend = cfg.backend;
    sopt.deadline = cfg.deadline;

    const auto t0 = Clock::now();
    LearningTrace trace;
    trace.relaxation = cfg.relaxation;
    CountTable raw = CountTable::zeros(truth);
    std::vector<std::uint64_t> ref(truth.num_choices(), 0);
    std::size_t rebuilds = 0;
    bool exploring = true;
    std::vector<std::size_t> sampling_policy;

    auto rebuild = [&](std::uint64_t traj, bool prior) {
        const CountTable pooled = pool(m, idx, raw);
        const IntervalTable ivals = prior ? trivial_intervals(idx) : learn_intervals(idx, pooled, cc);
        Synthesis syn = synthesize(m, idx, truth, obj, ivals, &pooled, ropt, sopt);
        TracePoint p;
        p.trajectories = traj;
        p.robust_bound = syn.robust.values[truth.initial];
        p.true_value = syn.true_value;
        p.relaxation = cfg.relaxation;
        p.rebuilds = rebuilds;
        p.fallback = syn.model.fallback_used;
        if (cfg.record_timing) p.wallclock_s = seconds_since(t0);
        trace.points.push_back(p);
        trace.final_policy = syn.robust.policy;
        if (!prior) {
            sampling_policy = solve(syn.model, obj, NatureMode::optimistic, sopt).policy;
            exploring = false;
        }
    };

    rebuild(0, true);
    SamplingConfig sc;
    sc.mode = SamplingMode::episodic;
    sc.episode_len = cfg.episode_len;
    sc.budget = 1;
    sc.seed = cfg.seed;
    for (std::uint64_t t = 0; t < cfg.budget; ++t) {
        poll(cfg.deadline, "learning");
        sc.first_episode = t;
        if (exploring) {
            sc.policy = SamplingPolicy::uniform;
        } else {
            sc.policy = SamplingPolicy::fixed;
            sc.fixed_policy = sampling_policy;
        }
        raw.merge(collect(truth, sc));
        bool doubled = false;
        for (std::size_t c = 0; c < raw.sa.size() && !doubled; ++c)
            doubled = raw.sa[c] > ref[c] && raw.sa[c] >= std::max<std::uint64_t>(1, 2 * ref[c]);
        if (doubled) {
            ++rebuilds;
            ref = raw.sa;
            rebuild(t + 1, false);
        }
    }
    if (trace.points.back().trajectories != cfg.budget) rebuild(cfg.budget, false);
    return trace;
}

std::vector<OfflineRow> run_offline(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                                    const OfflineConfig& cfg) {
    if (cfg.relaxations.empty()) throw std::invalid_argument("no relaxation requested");
    ConfidenceConfig cc;
    cc.delta = cfg.delta;
    validate(cc);

    const SolveResult opt = solve_mdp(truth, obj);
    const double v_star = opt.values[truth.initial];

    // data per seed
    std::vector<CountTable> pooled(cfg.seeds.size());
    std::vector<IntervalTable> ivals(cfg.seeds.size());
    parallel_for(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
        SamplingConfig sc;
        sc.mode = cfg.mode;
        sc.episode_len = cfg.episode_len;
        sc.budget = cfg.budget;
        sc.seed = cfg.seeds[i];
        pooled[i] = pool(m, idx, collect(truth, sc));
        ivals[i] = learn_intervals(idx, pooled[i], cc);
    });

    const std::size_t nr = cfg.relaxations.size();
    std::vector<OfflineRow> rows(cfg.seeds.size() * nr);
    parallel_for(rows.size(), cfg.workers, [&](std::size_t cell) {
        const std::size_t si = cell / nr;
        OfflineRow& row = rows[cell];
        row.seed = cfg.seeds[si];
        row.relaxation = cfg.relaxations[cell % nr];
        row.v_star = v_star;

        RelaxOptions ropt;
        ropt.provenance = row.relaxation;
        ropt.source = cfg.source;
        ropt.delta = cfg.delta;
        SolveOptions sopt;
        sopt.backend = cfg.backend;

        auto t = Clock::now();
        UncertainModel u;
        try {
            const Deadline d = Deadline::after(cfg.timeout_s);
            ropt.deadline = &d;
            u = build_relaxation(m, idx, ivals[si], &pooled[si], ropt);
        } catch (const Timeout&) {
            row.timeout_phase = "build";
            return;
        }
        if (cfg.record_timing) row.build_s = seconds_since(t);
        row.fallback = u.fallback_used;
        row.widened_choices = u.widened_choices;

        t = Clock::now();
        try {
            const Deadline d = Deadline::after(cfg.timeout_s);
            sopt.deadline = &d;
            std::vector<std::size_t> policy = opt.policy;
            if (cfg.robust_policy) {
                const SolveResult r = solve(u, obj, NatureMode::robust, sopt);
                policy = r.policy;
            }
            sopt.fixed_policy = &policy;
            row.v_lower = solve(u, obj, NatureMode::robust, sopt).values[truth.initial];
            row.v_upper = solve(u, obj, NatureMode::optimistic, sopt).values[truth.initial];
        } catch (const Timeout&) {
            row.timeout_phase = "solve";
            return;
        }
        if (cfg.record_timing) row.solve_s = seconds_since(t);
        row.rel_gap = v_star != 0.0 ? (row.v_upper - row.v_lower) / std::abs(v_star)
                                    : std::numeric_limits<double>::infinity();
    });
    return rows;
}

std::vector<OnlineRun> run_online(const Pmdp& m, const ExpressionIndex& idx, const Mdp& truth, const Objective& obj,
                                  const OnlineConfig& cfg) {
    if (cfg.relaxations.empty()) throw std::invalid_argument("no relaxation requested");
    const std::size_t nr = cfg.relaxations.size();
    std::vector<OnlineRun> runs(cfg.seeds.size() * nr);
    parallel_for(runs.size(), cfg.workers, [&](std::size_t cell) {
        OnlineRun& run = runs[cell];
        run.seed = cfg.seeds[cell / nr];
        run.trace.relaxation = cfg.relaxations[cell % nr];
        OfuConfig oc;
        oc.budget = cfg.budget;
        oc.delta = cfg.delta;
        oc.relaxation = run.trace.relaxation;
        oc.source = cfg.source;
        oc.episode_len = cfg.episode_len;
        oc.seed = run.seed;
        oc.backend = cfg.backend;
        oc.record_timing = cfg.record_timing;
        const Deadline d = Deadline::after(cfg.timeout_s);
        oc.deadline = &d;
        try {
            run.trace = ofu_learn(m, idx, truth, obj, oc);
        } catch (const Timeout&) {
            run.timed_out = true;
        }
    });
    return runs;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_offline_csv(std::ostream& os, const std::string& benchmark, const std::string& instance,
                       const std::vector<OfflineRow>& rows) {
    os << "benchmark,instance,seed,relaxation,status,v_lower,v_upper,v_star,rel_gap,build_s,solve_s,fallback,"
          "widened_choices\n";
    for (const auto& r : rows) {
        os << benchmark << ',' << instance << ',' << r.seed << ',' << to_string(r.relaxation) << ',';
        if (r.timed_out()) {
            os << "TO,,," << format_double(r.v_star) << ",,,,,\n";
            continue;
        }
        os << "ok," << format_double(r.v_lower) << ',' << format_double(r.v_upper) << ',' << format_double(r.v_star)
           << ',' << format_double(r.rel_gap) << ',' << format_double(r.build_s) << ',' << format_double(r.solve_s)
           << ',' << (r.fallback ? 1 : 0) << ',' << r.widened_choices << '\n';
    }
}

void write_trace_csv(std::ostream& os, const LearningTrace& trace) {
    os << "trajectories,robust_bound,true_value,relaxation,rebuilds,wallclock_s,fallback\n";
    for (const auto& p : trace.points)
        os << p.trajectories << ',' << format_double(p.robust_bound) << ',' << format_double(p.true_value) << ','
           << to_string(p.relaxation) << ',' << p.rebuilds << ',' << format_double(p.wallclock_s) << ','
           << (p.fallback ? 1 : 0) << '\n';
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string code_version() { return RUMDP_VERSION; }

std::string render_manifest(const Manifest& mf) {
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(mf.config)));
    nlohmann::ordered_json j;
    j["command"] = mf.command;
    j["code_version"] = code_version();
    j["config_hash"] = hash;
    j["config"] = mf.config;
    j["seeds"] = mf.seeds;
    j["episode_len"] = mf.episode_len;
    j["sizes"] = {{"states", mf.states}, {"transitions", mf.transitions}, {"params", mf.params}};
    j["notes"] = mf.notes;
    j["files"] = mf.files;
    return j.dump(2) + "\n";
}

} // namespace rumdp
