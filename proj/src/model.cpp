#include "rumdp/model.hpp"

#include "rumdp/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace rumdp {

bool ParameterSpace::contains(std::span<const double> v, double tol) const {
    if (v.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
        if (v[i] < lo(i) - tol || v[i] > hi(i) + tol) return false;
    return true;
}

std::size_t ParameterSpace::find(const std::string& name) const {
    return static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
}

PmdpBuilder::PmdpBuilder(ParameterSpace params) : params_(std::move(params)) {}

std::size_t PmdpBuilder::add_state(const std::string& name) {
    if (has_state(name)) throw ModelError("duplicate state '" + name + "'");
    state_index_.emplace(name, states_.size());
    states_.push_back(name);
    return states_.size() - 1;
}

std::size_t PmdpBuilder::add_action(const std::string& name) {
    auto it = std::find(actions_.begin(), actions_.end(), name);
    if (it != actions_.end()) throw ModelError("duplicate action '" + name + "'");
    actions_.push_back(name);
    return actions_.size() - 1;
}

bool PmdpBuilder::has_state(const std::string& name) const {
    return state_index_.count(name) != 0;
}

std::size_t PmdpBuilder::state(const std::string& name) {
    auto it = state_index_.find(name);
    if (it != state_index_.end()) return it->second;
    state_index_.emplace(name, states_.size());
    states_.push_back(name);
    return states_.size() - 1;
}

std::size_t PmdpBuilder::action(const std::string& name) {
    auto it = std::find(actions_.begin(), actions_.end(), name);
    if (it != actions_.end()) return static_cast<std::size_t>(it - actions_.begin());
    actions_.push_back(name);
    return actions_.size() - 1;
}

void PmdpBuilder::add_choice(std::size_t state, std::size_t action, std::vector<ParametricTransition> transitions,
                             Rational reward) {
    if (!choice_keys_.emplace(state, action).second)
        throw ModelError("action '" + actions_[action] + "' declared twice in state '" + states_[state] + "'");
    choices_.push_back(ParametricChoice{state, action, std::move(transitions), std::move(reward)});
}

void PmdpBuilder::set_reward(std::size_t state, std::size_t action, const Rational& reward) {
    for (auto& c : choices_) {
        if (c.state == state && c.action == action) {
            c.reward = reward;
            return;
        }
    }
    throw ModelError("reward for undeclared choice (" + states_[state] + ", " + actions_[action] + ")");
}

void PmdpBuilder::add_target(std::size_t state) { targets_.push_back(state); }

Pmdp PmdpBuilder::build() const {
    Pmdp m;
    m.params = params_;
    m.states = states_;
    m.actions = actions_;
    m.initial = initial_;
    m.choices = choices_;
    std::stable_sort(m.choices.begin(), m.choices.end(),
                     [](const ParametricChoice& a, const ParametricChoice& b) { return a.state < b.state; });
    m.offsets.assign(m.states.size() + 1, 0);
    for (const auto& c : m.choices) {
        if (c.state >= m.states.size()) throw ModelError("choice refers to an unknown state");
        ++m.offsets[c.state + 1];
    }
    std::partial_sum(m.offsets.begin(), m.offsets.end(), m.offsets.begin());
    m.target.assign(m.states.size(), 0);
    for (auto t : targets_) {
        if (t >= m.states.size()) throw ModelError("target refers to an unknown state");
        m.target[t] = 1;
    }
    validate(m);
    return m;
}

std::string choice_label(const Pmdp& m, std::size_t choice) {
    const auto& c = m.choices[choice];
    return "(" + m.states[c.state] + ", " + m.actions[c.action] + ")";
}

namespace {

// Points at which expressions are checked to lie in [0,1]: all box vertices,
// plus a regular grid when some expression is not multilinear.
std::vector<std::vector<double>> probe_points(const ParameterSpace& ps, bool need_grid) {
    const std::size_t n = ps.size();
    std::vector<std::vector<double>> pts;
    if (n == 0) {
        pts.emplace_back();
        return pts;
    }
    if (n <= 16) {
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? ps.hi(i) : ps.lo(i);
            pts.push_back(std::move(v));
        }
    }
    if (need_grid) {
        const auto per_dim = std::max<std::size_t>(
            3, static_cast<std::size_t>(std::floor(std::pow(4096.0, 1.0 / static_cast<double>(n)))));
        std::vector<std::size_t> idx(n, 0);
        while (true) {
            std::vector<double> v(n);
            for (std::size_t i = 0; i < n; ++i)
                v[i] = ps.lo(i) + (ps.hi(i) - ps.lo(i)) * static_cast<double>(idx[i]) / double(per_dim - 1);
            pts.push_back(std::move(v));
            std::size_t k = 0;
            while (k < n && ++idx[k] == per_dim) idx[k++] = 0;
            if (k == n) break;
        }
    }
    return pts;
}

} // namespace

void validate(const Pmdp& m) {
    const auto& ps = m.params;
    if (ps.lower.size() != ps.size() || ps.upper.size() != ps.size())
        throw ModelError("parameter bounds do not match parameter names");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (ps.lower[i] > ps.upper[i]) throw ModelError("empty domain for parameter '" + ps.names[i] + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (ps.names[i] == ps.names[j]) throw ModelError("duplicate parameter '" + ps.names[i] + "'");
    }
    for (const auto& c : ps.constraints)
        if (!c.lhs.is_linear() || c.lhs.param_extent() > ps.size())
            throw ModelError("parameter constraints must be linear in declared parameters");
    if (m.states.empty()) throw ModelError("model has no states");
    if (m.initial >= m.states.size()) throw ModelError("initial state out of range");
    if (m.offsets.size() != m.states.size() + 1) throw ModelError("inconsistent choice offsets");

    bool need_grid = false;
    for (const auto& c : m.choices)
        for (const auto& t : c.transitions)
            if (!t.prob.is_multilinear()) need_grid = true;
    const auto probes = probe_points(ps, need_grid);
    const double slack = tolerances().stochastic;

    for (std::size_t s = 0; s < m.states.size(); ++s)
        if (m.offsets[s] == m.offsets[s + 1]) throw ModelError("state '" + m.states[s] + "' has no enabled action");

    for (std::size_t ci = 0; ci < m.choices.size(); ++ci) {
        const auto& c = m.choices[ci];
        const std::string label = choice_label(m, ci);
        if (c.transitions.empty()) throw ModelError("choice " + label + " has no successors");
        if (c.reward < 0) throw ModelError("negative reward at " + label);
        Polynomial sum;
        for (std::size_t a = 0; a < c.transitions.size(); ++a) {
            const auto& ta = c.transitions[a];
            if (ta.target >= m.states.size()) throw ModelError("successor out of range at " + label);
            if (ta.prob.param_extent() > ps.size()) throw ModelError("undeclared parameter at " + label);
            for (std::size_t b = 0; b < a; ++b) {
                const auto& tb = c.transitions[b];
                if (ta.target == tb.target)
                    throw ModelError("duplicate successor '" + m.states[ta.target] + "' at " + label);
                if (ta.prob == tb.prob) throw ModelError("duplicate expression within distribution at " + label);
            }
            sum += ta.prob;
        }
        if (!(sum == Polynomial::constant(1)))
            throw ModelError("distribution at " + label + " does not sum to 1 (sum = " + sum.to_string(ps.names) +
                             ")");
        for (const auto& t : c.transitions) {
            if (t.prob.is_constant()) {
                const auto v = t.prob.constant_term();
                if (v < 0 || v > 1) throw ModelError("probability outside [0,1] at " + label);
                continue;
            }
            for (const auto& p : probes) {
                const double v = t.prob.evaluate(p);
                if (v < -slack || v > 1.0 + slack)
                    throw ModelError("expression '" + t.prob.to_string(ps.names) + "' leaves [0,1] over the parameter space at " +
                                     label);
            }
        }
    }
}

Mdp instantiate(const Pmdp& m, std::span<const double> v) {
    const auto& tol = tolerances();
    if (!m.params.contains(v, tol.box)) throw ModelError("instantiation outside parameter space");
    Mdp out;
    out.states = m.states;
    out.actions = m.actions;
    out.offsets = m.offsets;
    out.initial = m.initial;
    out.target = m.target;
    out.choices.reserve(m.choices.size());
    for (std::size_t ci = 0; ci < m.choices.size(); ++ci) {
        const auto& pc = m.choices[ci];
        Choice c;
        c.state = pc.state;
        c.action = pc.action;
        c.reward = pc.reward.convert_to<double>();
        double sum = 0.0;
        for (const auto& t : pc.transitions) {
            double p = t.prob.evaluate(v);
            if (p < -tol.stochastic || p > 1.0 + tol.stochastic)
                throw ModelError("instantiated probability outside [0,1] at " + choice_label(m, ci));
            p = std::clamp(p, 0.0, 1.0);
            sum += p;
            c.transitions.push_back(Transition{t.target, p});
        }
        if (std::abs(sum - 1.0) > tol.stochastic)
            throw ModelError("instantiated distribution does not sum to 1 at " + choice_label(m, ci));
        for (auto& t : c.transitions) t.prob /= sum;
        out.choices.push_back(std::move(c));
    }
    return out;
}

ExpressionIndex index_expressions(const Pmdp& m) {
    ExpressionIndex idx;
    std::map<Polynomial, std::size_t> ids;
    idx.expr_of.resize(m.choices.size());
    for (std::size_t ci = 0; ci < m.choices.size(); ++ci) {
        const auto& c = m.choices[ci];
        idx.expr_of[ci].resize(c.transitions.size());
        for (std::size_t k = 0; k < c.transitions.size(); ++k) {
            const auto& p = c.transitions[k].prob;
            auto [it, inserted] = ids.try_emplace(p, idx.exprs.size());
            if (inserted) {
                idx.exprs.push_back(p);
                idx.occ.emplace_back();
                idx.constant.push_back(p.is_constant() ? 1 : 0);
            }
            idx.occ[it->second].push_back(TransitionRef{ci, k});
            idx.expr_of[ci][k] = it->second;
        }
    }
    for (std::size_t f = 0; f < idx.exprs.size(); ++f)
        if (!idx.constant[f]) idx.unknown.push_back(f);
    return idx;
}

} // namespace rumdp
