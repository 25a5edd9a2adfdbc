#include "rumdp/io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rumdp {

namespace {

std::string expr_text(const Pmdp& m, const ExpressionIndex& idx, std::size_t f) {
    return idx.exprs[f].to_string(m.params.names);
}

Json bounds_json(const Bounds& b) { return Json::array({b.lo, b.hi}); }

} // namespace

Json counts_to_json(const Pmdp& m, const ExpressionIndex& idx, const CountTable& t) {
    Json j;
    Json choices = Json::array();
    for (std::size_t c = 0; c < m.num_choices(); ++c) {
        Json succ = Json::object();
        for (std::size_t k = 0; k < m.choices[c].transitions.size(); ++k)
            succ[m.states[m.choices[c].transitions[k].target]] = t.sas[c][k];
        choices.push_back({{"state", m.states[m.choices[c].state]},
                           {"action", m.actions[m.choices[c].action]},
                           {"count", t.sa[c]},
                           {"successors", succ}});
    }
    j["choices"] = choices;
    if (!t.pooled.empty()) {
        Json pooled = Json::array();
        for (std::size_t f = 0; f < idx.size(); ++f)
            pooled.push_back({{"expr", expr_text(m, idx, f)},
                              {"successes", t.pooled[f].successes},
                              {"trials", t.pooled[f].trials},
                              {"known", t.pooled[f].known}});
        j["pooled"] = pooled;
    }
    return j;
}

CountTable counts_from_json(const Pmdp& m, const Json& j) {
    CountTable t = CountTable::zeros(m);
    const Json& choices = j.at("choices");
    if (choices.size() != m.num_choices()) throw std::invalid_argument("count file does not match the model");
    for (std::size_t c = 0; c < m.num_choices(); ++c) {
        const Json& e = choices[c];
        if (e.at("state").get<std::string>() != m.states[m.choices[c].state] ||
            e.at("action").get<std::string>() != m.actions[m.choices[c].action])
            throw std::invalid_argument("count file does not match the model at " + choice_label(m, c));
        t.sa[c] = e.at("count").get<std::uint64_t>();
        std::uint64_t sum = 0;
        for (std::size_t k = 0; k < m.choices[c].transitions.size(); ++k) {
            const std::string& succ = m.states[m.choices[c].transitions[k].target];
            const auto& s = e.at("successors");
            t.sas[c][k] = s.contains(succ) ? s[succ].get<std::uint64_t>() : 0;
            sum += t.sas[c][k];
        }
        if (sum != t.sa[c]) throw std::invalid_argument("successor counts do not add up at " + choice_label(m, c));
    }
    return t;
}

Json intervals_to_json(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals) {
    Json arr = Json::array();
    for (std::size_t f = 0; f < ivals.size(); ++f) {
        const auto& e = ivals[f];
        arr.push_back({{"expr", expr_text(m, idx, f)},
                       {"lo", e.lo},
                       {"hi", e.hi},
                       {"successes", e.successes},
                       {"trials", e.trials},
                       {"trivial", e.trivial},
                       {"constant", e.constant}});
    }
    return {{"gamma", ivals.gamma}, {"intervals", arr}};
}

IntervalTable intervals_from_json(const Pmdp& m, const ExpressionIndex& idx, const Json& j) {
    IntervalTable t;
    t.gamma = j.value("gamma", 0.0);
    const Json& arr = j.at("intervals");
    if (arr.size() != idx.size()) throw std::invalid_argument("interval file does not match the model");
    for (std::size_t f = 0; f < idx.size(); ++f) {
        const Json& e = arr[f];
        if (e.at("expr").get<std::string>() != expr_text(m, idx, f))
            throw std::invalid_argument("interval file lists '" + e.at("expr").get<std::string>() + "' where '" +
                                        expr_text(m, idx, f) + "' was expected");
        ExpressionInterval iv;
        iv.lo = e.at("lo").get<double>();
        iv.hi = e.at("hi").get<double>();
        iv.successes = e.value("successes", std::uint64_t{0});
        iv.trials = e.value("trials", std::uint64_t{0});
        iv.trivial = e.value("trivial", false);
        iv.constant = e.value("constant", false);
        if (!(iv.lo <= iv.hi)) throw std::invalid_argument("interval with lo > hi");
        t.entries.push_back(iv);
    }
    return t;
}

Json uncertain_model_to_json(const Pmdp& m, const ExpressionIndex& idx, const UncertainModel& u) {
    Json j;
    j["provenance"] = to_string(u.provenance);
    j["kind"] = u.kind == UncertainKind::interval ? "interval" : "region";
    j["fallback"] = u.fallback_used;
    j["widened_choices"] = u.widened_choices;
    if (!u.expr_bounds.empty()) {
        Json eb = Json::array();
        for (std::size_t f = 0; f < u.expr_bounds.size(); ++f)
            eb.push_back({{"expr", expr_text(m, idx, f)}, {"bounds", bounds_json(u.expr_bounds[f])}});
        j["expressions"] = eb;
    }
    if (u.kind == UncertainKind::interval) {
        Json choices = Json::array();
        for (std::size_t c = 0; c < u.skeleton.num_choices(); ++c) {
            Json succ = Json::array();
            for (std::size_t k = 0; k < u.bounds[c].size(); ++k)
                succ.push_back({{"target", m.states[u.skeleton.choices[c].transitions[k].target]},
                                {"bounds", bounds_json(u.bounds[c][k])}});
            choices.push_back({{"choice", choice_label(m, c)}, {"successors", succ}});
        }
        j["choices"] = choices;
    } else {
        const Polytope& p = u.region->region;
        Json vars = Json::array();
        for (std::size_t v = 0; v < p.dim(); ++v)
            vars.push_back({{"name", p.var_names[v]}, {"bounds", bounds_json(p.var_bounds[v])}});
        j["variables"] = vars;
        Json rows = Json::array();
        for (const auto& r : p.all_rows()) rows.push_back({{"coeffs", r.coeffs}, {"rhs", r.rhs}});
        j["rows"] = rows;
        j["vertices"] = u.region->has_vertices ? u.region->vertices.size() : 0;
    }
    return j;
}

Json solve_result_to_json(const Mdp& skeleton, const SolveResult& r) {
    Json j;
    j["mode"] = to_string(r.mode);
    j["objective"] = to_string(r.objective);
    j["initial_value"] = r.values[skeleton.initial];
    j["converged"] = r.converged;
    j["capped"] = r.capped;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    Json states = Json::array();
    for (std::size_t s = 0; s < skeleton.num_states(); ++s) {
        const std::size_t c = skeleton.first_choice(s) + r.policy[s];
        states.push_back({{"state", skeleton.states[s]},
                          {"value", r.values[s]},
                          {"action", skeleton.actions[skeleton.choices[c].action]}});
    }
    j["states"] = states;
    return j;
}

Json truth_to_json(const ParameterSpace& ps, const std::vector<double>& values) {
    Json params = Json::object();
    for (std::size_t i = 0; i < ps.size(); ++i) params[ps.names[i]] = values.at(i);
    return {{"params", params}};
}

std::vector<double> truth_from_json(const ParameterSpace& ps, const Json& j) {
    const Json& params = j.at("params");
    std::vector<double> v(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!params.contains(ps.names[i])) throw std::invalid_argument("truth file lacks parameter " + ps.names[i]);
        v[i] = params[ps.names[i]].get<double>();
    }
    if (params.size() != ps.size()) throw std::invalid_argument("truth file has unknown parameters");
    return v;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return Json::parse(in);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

} // namespace rumdp
