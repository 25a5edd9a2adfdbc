#include "rumdp/bench.hpp"
#include "rumdp/experiment.hpp"
#include "rumdp/io.hpp"
#include "rumdp/model_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

using namespace rumdp;
namespace fs = std::filesystem;

namespace {

struct Global {
    double delta = 0.001;
    std::uint64_t seed = 0;
    double timeout_s = 0.0;
    std::string out_dir = ".";
    std::string backend = "auto";
    bool json = false;
    bool timing = false;
};

// Model with its hidden instantiation, either generated or loaded.
struct Problem {
    Pmdp model;
    std::vector<double> truth_params;
    Mdp truth;
    Objective objective;
    std::string benchmark;
    std::string instance;
    std::string notes;
};

struct Source {
    std::string family;
    std::size_t n = 0;
    std::size_t y = 0;
    std::string model;
    std::string truth;
    std::string objective;

    void add(CLI::App* sub, bool need_truth) {
        sub->add_option("--family", family, "benchmark family (chain, betting_game, parallel_betting, glider, engagement)");
        sub->add_option("--n", n, "family size (chain k, horizon, X, ladder length)");
        sub->add_option("--y", y, "second grid size for glider");
        sub->add_option("--model", model, "model file instead of a family");
        if (need_truth) sub->add_option("--truth", truth, "truth JSON for --model");
        sub->add_option("--objective", objective, "reach or total_reward; default from the model");
    }

    Problem load(const Global& g, bool need_truth) const {
        Problem p;
        if (!family.empty()) {
            BenchmarkSpec spec;
            spec.family = parse_family(family);
            spec.size = n;
            spec.size_y = y;
            spec.seed = g.seed;
            Benchmark b = generate(spec);
            p.model = std::move(b.model);
            p.truth_params = std::move(b.true_params);
            p.truth = std::move(b.truth);
            p.objective = b.objective;
            p.benchmark = family;
            p.instance = std::to_string(n) + (y ? "x" + std::to_string(y) : "");
            p.notes = b.notes;
        } else if (!model.empty()) {
            p.model = load_model(model);
            p.objective = default_objective(p.model);
            p.benchmark = fs::path(model).stem().string();
            p.instance = "file";
            if (need_truth) {
                if (truth.empty()) throw std::invalid_argument("--truth is required with --model");
                p.truth_params = truth_from_json(p.model.params, read_json_file(truth));
                p.truth = instantiate(p.model, p.truth_params);
            }
        } else {
            throw std::invalid_argument("give --family or --model");
        }
        if (objective == "reach")
            p.objective = {ObjectiveKind::reach};
        else if (objective == "total_reward")
            p.objective = {ObjectiveKind::total_reward};
        else if (!objective.empty())
            throw std::invalid_argument("unknown objective '" + objective + "'");
        return p;
    }

    std::string describe() const {
        return family.empty() ? "model=" + model + ";truth=" + truth
                              : "family=" + family + ";n=" + std::to_string(n) + ";y=" + std::to_string(y);
    }
};

InnerBackend parse_backend(const std::string& s) {
    if (s == "auto") return InnerBackend::automatic;
    if (s == "lp") return InnerBackend::lp;
    if (s == "vertex") return InnerBackend::vertex;
    throw std::invalid_argument("unknown backend '" + s + "'");
}

SamplingMode parse_mode(const std::string& s) {
    if (s == "episodic") return SamplingMode::episodic;
    if (s == "generative") return SamplingMode::generative;
    throw std::invalid_argument("unknown sampling mode '" + s + "'");
}

RegionSource parse_source(const std::string& s) {
    if (s == "intervals") return RegionSource::intervals;
    if (s == "l1") return RegionSource::l1;
    throw std::invalid_argument("unknown region source '" + s + "'");
}

std::vector<Provenance> parse_relaxations(const std::vector<std::string>& names) {
    std::vector<Provenance> out;
    for (const auto& n : names) out.push_back(parse_provenance(n));
    if (out.empty()) throw std::invalid_argument("at least one relaxation is required");
    return out;
}

std::string out_path(const Global& g, const std::string& given, const std::string& fallback) {
    if (!given.empty()) return given;
    fs::create_directories(g.out_dir);
    return (fs::path(g.out_dir) / fallback).string();
}

void emit(const Global& g, const Json& j, const std::string& text) {
    if (g.json)
        std::cout << j.dump(2) << '\n';
    else
        std::cout << text;
}

std::vector<std::uint64_t> seed_range(std::uint64_t first, std::size_t count) {
    std::vector<std::uint64_t> s(count);
    for (std::size_t i = 0; i < count; ++i) s[i] = first + i;
    return s;
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

Manifest base_manifest(const std::string& command, const Problem& p, const std::string& config) {
    Manifest mf;
    mf.command = command;
    mf.config = config;
    mf.notes = p.notes;
    mf.states = p.model.num_states();
    mf.transitions = p.model.num_transitions();
    mf.params = p.model.params.size();
    return mf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Learning robust policies for parametric MDPs from samples"};
    app.require_subcommand(1);
    app.fallthrough();
    Global g;
    app.add_option("--delta", g.delta, "failure probability of the confidence statement")->check(CLI::Range(0.0, 1.0));
    app.add_option("--seed", g.seed, "seed for hidden parameters and sampling");
    app.add_option("--timeout-s", g.timeout_s, "per-phase wall-clock limit in seconds (0 = none)");
    app.add_option("--out-dir", g.out_dir, "directory for output files");
    app.add_option("--backend", g.backend, "inner problem backend for region models")
        ->check(CLI::IsMember({"auto", "lp", "vertex"}));
    app.add_flag("--json", g.json, "print JSON instead of text");
    app.add_flag("--timing", g.timing, "record wall-clock times in CSV outputs");

    // generate
    auto* gen = app.add_subcommand("generate", "write a benchmark model and its hidden parameters");
    Source gen_src;
    std::string gen_out, gen_truth;
    gen->add_option("--family", gen_src.family)->required();
    gen->add_option("--n", gen_src.n)->required();
    gen->add_option("--y", gen_src.y);
    gen->add_option("--out", gen_out, "model file");
    gen->add_option("--truth", gen_truth, "truth JSON");

    // sample
    auto* smp = app.add_subcommand("sample", "simulate the true model and count transitions");
    Source smp_src;
    smp_src.add(smp, true);
    std::uint64_t smp_budget = 1000;
    std::string smp_mode = "episodic", smp_out;
    std::size_t smp_len = 0;
    smp->add_option("--budget", smp_budget, "trajectories (episodic) or samples per pair (generative)");
    smp->add_option("--mode", smp_mode)->check(CLI::IsMember({"episodic", "generative"}));
    smp->add_option("--episode-len", smp_len, "steps per episode (0 = 4 sqrt|S|, at most 200)");
    smp->add_option("--out", smp_out, "count JSON");

    // learn
    auto* lrn = app.add_subcommand("learn", "confidence intervals from counts");
    std::string lrn_model, lrn_counts, lrn_out;
    double lrn_eps = 0.0;
    lrn->add_option("--model", lrn_model)->required();
    lrn->add_option("--counts", lrn_counts)->required();
    lrn->add_option("--eps-floor", lrn_eps, "replacement for zero lower bounds");
    lrn->add_option("--out", lrn_out, "interval JSON");

    // inspect and solve share the model-building options
    struct BuildArgs {
        std::string model, intervals, counts, relaxation = "P_I", source = "intervals";
    };
    auto add_build = [](CLI::App* sub, BuildArgs& a) {
        sub->add_option("--model", a.model)->required();
        sub->add_option("--intervals", a.intervals, "interval JSON");
        sub->add_option("--counts", a.counts, "count JSON; intervals are learned when --intervals is absent");
        sub->add_option("--relaxation", a.relaxation, "P_I, P_Theta, P_Lambda or P_R");
        sub->add_option("--source", a.source, "region from intervals or l1")->check(CLI::IsMember({"intervals", "l1"}));
    };
    auto* ins = app.add_subcommand("inspect", "dump the uncertain model as JSON");
    BuildArgs ins_args;
    add_build(ins, ins_args);
    std::string ins_out;
    ins->add_option("--out", ins_out, "write to a file instead of stdout");

    auto* slv = app.add_subcommand("solve", "robust or optimistic value iteration");
    BuildArgs slv_args;
    add_build(slv, slv_args);
    std::string slv_mode = "robust", slv_objective;
    slv->add_option("--mode", slv_mode)->check(CLI::IsMember({"robust", "optimistic"}));
    slv->add_option("--objective", slv_objective, "reach or total_reward");

    // offline
    auto* off = app.add_subcommand("offline", "certified bounds of one policy after uniform sampling");
    Source off_src;
    off_src.add(off, true);
    std::vector<std::string> off_relax{"P_I", "P_Theta", "P_Lambda", "P_R"};
    std::uint64_t off_budget = 100000;
    std::size_t off_seeds = 1, off_len = 0;
    unsigned off_workers = 1;
    std::string off_mode = "episodic", off_source = "intervals";
    bool off_robust = false;
    off->add_option("--relaxations", off_relax)->delimiter(',');
    off->add_option("--budget", off_budget);
    off->add_option("--seeds", off_seeds, "number of data seeds starting at --seed");
    off->add_option("--episode-len", off_len);
    off->add_option("--mode", off_mode)->check(CLI::IsMember({"episodic", "generative"}));
    off->add_option("--source", off_source)->check(CLI::IsMember({"intervals", "l1"}));
    off->add_option("--workers", off_workers, "concurrent cells");
    off->add_flag("--robust-policy", off_robust, "evaluate the robust policy instead of the true-optimal one");

    // online
    auto* onl = app.add_subcommand("online", "optimistic learning traces");
    Source onl_src;
    onl_src.add(onl, true);
    std::vector<std::string> onl_relax{"P_I", "P_Lambda"};
    std::uint64_t onl_budget = 1000;
    std::size_t onl_seeds = 1, onl_len = 0;
    unsigned onl_workers = 1;
    std::string onl_source = "intervals";
    onl->add_option("--relaxations", onl_relax)->delimiter(',');
    onl->add_option("--budget", onl_budget, "trajectories");
    onl->add_option("--seeds", onl_seeds);
    onl->add_option("--episode-len", onl_len);
    onl->add_option("--source", onl_source)->check(CLI::IsMember({"intervals", "l1"}));
    onl->add_option("--workers", onl_workers);

    CLI11_PARSE(app, argc, argv);

    auto build_model = [&](const BuildArgs& a, Pmdp& m, ExpressionIndex& idx) {
        m = load_model(a.model);
        idx = index_expressions(m);
        CountTable counts = CountTable::zeros(m);
        bool have_counts = false;
        if (!a.counts.empty()) {
            counts = pool(m, idx, counts_from_json(m, read_json_file(a.counts)));
            have_counts = true;
        }
        IntervalTable ivals;
        if (!a.intervals.empty()) {
            ivals = intervals_from_json(m, idx, read_json_file(a.intervals));
        } else {
            ConfidenceConfig cc;
            cc.delta = g.delta;
            ivals = have_counts ? learn_intervals(idx, counts, cc) : trivial_intervals(idx);
        }
        RelaxOptions ro;
        ro.provenance = parse_provenance(a.relaxation);
        ro.source = parse_source(a.source);
        ro.delta = g.delta;
        const Deadline d = Deadline::after(g.timeout_s);
        ro.deadline = &d;
        return build_relaxation(m, idx, ivals, have_counts ? &counts : nullptr, ro);
    };

    try {
        if (*gen) {
            BenchmarkSpec spec;
            spec.family = parse_family(gen_src.family);
            spec.size = gen_src.n;
            spec.size_y = gen_src.y;
            spec.seed = g.seed;
            const Benchmark b = generate(spec);
            const std::string mp = out_path(g, gen_out, "model.pmdp");
            const std::string tp = out_path(g, gen_truth, "truth.json");
            save_model(b.model, mp);
            write_text_file(tp, truth_to_json(b.model.params, b.true_params).dump(2) + "\n");
            Json j{{"model", mp},
                   {"truth", tp},
                   {"states", b.model.num_states()},
                   {"choices", b.model.num_choices()},
                   {"transitions", b.model.num_transitions()},
                   {"params", b.model.params.size()},
                   {"objective", to_string(b.objective.kind)},
                   {"notes", b.notes}};
            std::ostringstream os;
            os << "wrote " << mp << " (" << b.model.num_states() << " states, " << b.model.num_transitions()
               << " transitions, " << b.model.params.size() << " parameters) and " << tp << '\n';
            emit(g, j, os.str());
        } else if (*smp) {
            const Problem p = smp_src.load(g, true);
            const ExpressionIndex idx = index_expressions(p.model);
            SamplingConfig sc;
            sc.mode = parse_mode(smp_mode);
            sc.budget = smp_budget;
            sc.episode_len = smp_len;
            sc.seed = g.seed;
            const CountTable counts = pool(p.model, idx, collect(p.truth, sc));
            const std::string path = out_path(g, smp_out, "counts.json");
            write_text_file(path, counts_to_json(p.model, idx, counts).dump(2) + "\n");
            emit(g, {{"counts", path}, {"total", counts.total()}},
                 "wrote " + path + " (" + std::to_string(counts.total()) + " transitions)\n");
        } else if (*lrn) {
            const Pmdp m = load_model(lrn_model);
            const ExpressionIndex idx = index_expressions(m);
            const CountTable counts = pool(m, idx, counts_from_json(m, read_json_file(lrn_counts)));
            ConfidenceConfig cc;
            cc.delta = g.delta;
            cc.eps_floor = lrn_eps;
            const IntervalTable ivals = learn_intervals(idx, counts, cc);
            const Json j = intervals_to_json(m, idx, ivals);
            if (!lrn_out.empty() || !g.json) {
                const std::string path = out_path(g, lrn_out, "intervals.json");
                write_text_file(path, j.dump(2) + "\n");
                if (!g.json) std::cout << "wrote " << path << " (" << ivals.size() << " expressions)\n";
            }
            if (g.json) std::cout << j.dump(2) << '\n';
        } else if (*ins) {
            Pmdp m;
            ExpressionIndex idx;
            const UncertainModel u = build_model(ins_args, m, idx);
            const std::string text = uncertain_model_to_json(m, idx, u).dump(2) + "\n";
            if (ins_out.empty())
                std::cout << text;
            else
                write_text_file(ins_out, text);
        } else if (*slv) {
            Pmdp m;
            ExpressionIndex idx;
            const UncertainModel u = build_model(slv_args, m, idx);
            Objective obj = default_objective(m);
            if (slv_objective == "reach") obj = {ObjectiveKind::reach};
            if (slv_objective == "total_reward") obj = {ObjectiveKind::total_reward};
            SolveOptions so;
            so.backend = parse_backend(g.backend);
            const Deadline d = Deadline::after(g.timeout_s);
            so.deadline = &d;
            const SolveResult r =
                solve(u, obj, slv_mode == "robust" ? NatureMode::robust : NatureMode::optimistic, so);
            std::ostringstream os;
            os << to_string(r.mode) << ' ' << to_string(r.objective) << " value at " << m.states[m.initial] << ": "
               << format_double(r.values[m.initial]) << (u.fallback_used ? " (interval fallback)" : "")
               << (r.converged ? "" : " (not converged)") << '\n';
            Json j = solve_result_to_json(u.skeleton, r);
            j["relaxation"] = to_string(u.provenance);
            j["fallback"] = u.fallback_used;
            emit(g, j, os.str());
        } else if (*off) {
            const Problem p = off_src.load(g, true);
            const ExpressionIndex idx = index_expressions(p.model);
            OfflineConfig cfg;
            cfg.relaxations = parse_relaxations(off_relax);
            cfg.seeds = seed_range(g.seed, off_seeds);
            cfg.budget = off_budget;
            cfg.mode = parse_mode(off_mode);
            cfg.episode_len = off_len ? off_len : default_episode_length(p.model.num_states());
            cfg.delta = g.delta;
            cfg.source = parse_source(off_source);
            cfg.backend = parse_backend(g.backend);
            cfg.timeout_s = g.timeout_s;
            cfg.robust_policy = off_robust;
            cfg.workers = off_workers;
            cfg.record_timing = g.timing;
            const auto rows = run_offline(p.model, idx, p.truth, p.objective, cfg);

            const std::string csv_path = out_path(g, "", "offline.csv");
            std::ostringstream csv;
            write_offline_csv(csv, p.benchmark, p.instance, rows);
            write_text_file(csv_path, csv.str());
            const std::string config = "offline;" + off_src.describe() + ";objective=" + to_string(p.objective.kind) +
                                       ";relaxations=" + join(off_relax) + ";budget=" + std::to_string(off_budget) +
                                       ";mode=" + off_mode + ";episode_len=" + std::to_string(cfg.episode_len) +
                                       ";delta=" + format_double(g.delta) + ";source=" + off_source +
                                       ";backend=" + g.backend + ";timeout_s=" + format_double(g.timeout_s) +
                                       ";robust_policy=" + std::to_string(off_robust) +
                                       ";seed=" + std::to_string(g.seed) + ";seeds=" + std::to_string(off_seeds);
            Manifest mf = base_manifest("offline", p, config);
            mf.seeds = cfg.seeds;
            mf.episode_len = cfg.episode_len;
            mf.files = {"offline.csv"};
            write_text_file(out_path(g, "", "offline_manifest.json"), render_manifest(mf));
            emit(g, {{"csv", csv_path}, {"rows", rows.size()}}, csv.str());
        } else if (*onl) {
            const Problem p = onl_src.load(g, true);
            const ExpressionIndex idx = index_expressions(p.model);
            OnlineConfig cfg;
            cfg.relaxations = parse_relaxations(onl_relax);
            cfg.seeds = seed_range(g.seed, onl_seeds);
            cfg.budget = onl_budget;
            cfg.episode_len = onl_len ? onl_len : default_episode_length(p.model.num_states());
            cfg.delta = g.delta;
            cfg.source = parse_source(onl_source);
            cfg.backend = parse_backend(g.backend);
            cfg.timeout_s = g.timeout_s;
            cfg.workers = onl_workers;
            cfg.record_timing = g.timing;
            const auto runs = run_online(p.model, idx, p.truth, p.objective, cfg);

            Manifest mf = base_manifest(
                "online", p,
                "online;" + onl_src.describe() + ";objective=" + to_string(p.objective.kind) +
                    ";relaxations=" + join(onl_relax) + ";budget=" + std::to_string(onl_budget) +
                    ";episode_len=" + std::to_string(cfg.episode_len) + ";delta=" + format_double(g.delta) +
                    ";source=" + onl_source + ";backend=" + g.backend + ";timeout_s=" + format_double(g.timeout_s) +
                    ";seed=" + std::to_string(g.seed) + ";seeds=" + std::to_string(onl_seeds));
            mf.seeds = cfg.seeds;
            mf.episode_len = cfg.episode_len;
            std::ostringstream summary;
            Json j = Json::array();
            for (const auto& run : runs) {
                const std::string name =
                    "trace_" + to_string(run.trace.relaxation) + "_seed" + std::to_string(run.seed) + ".csv";
                std::ostringstream csv;
                write_trace_csv(csv, run.trace);
                write_text_file(out_path(g, "", name), csv.str());
                mf.files.push_back(name);
                const bool has = !run.trace.points.empty();
                const TracePoint last = has ? run.trace.points.back() : TracePoint{};
                summary << name << ": " << (run.timed_out ? "TO" : "ok") << ", " << run.trace.points.size()
                        << " checkpoints, final bound " << format_double(last.robust_bound) << ", true value "
                        << format_double(last.true_value) << '\n';
                j.push_back({{"file", name},
                             {"timed_out", run.timed_out},
                             {"checkpoints", run.trace.points.size()},
                             {"final_bound", last.robust_bound},
                             {"final_true_value", last.true_value}});
            }
            write_text_file(out_path(g, "", "online_manifest.json"), render_manifest(mf));
            emit(g, j, summary.str());
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
