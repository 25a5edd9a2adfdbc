#pragma once

#include "rumdp/polynomial.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumdp {

/// Raised for structurally or semantically invalid models.
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Linear side constraint `lhs <= rhs` over the parameters.
struct LinearConstraint {
    Polynomial lhs;
    Rational rhs;
    bool operator==(const LinearConstraint&) const = default;
};

/// Named parameters with a closed box domain.
struct ParameterSpace {
    std::vector<std::string> names;
    std::vector<Rational> lower;
    std::vector<Rational> upper;
    /// Standing linear constraints added to every uncertainty region.
    std::vector<LinearConstraint> constraints;

    std::size_t size() const { return names.size(); }
    double lo(std::size_t i) const { return lower[i].convert_to<double>(); }
    double hi(std::size_t i) const { return upper[i].convert_to<double>(); }
    bool contains(std::span<const double> v, double tol) const;
    /// Returns the index of the named parameter or size() if absent.
    std::size_t find(const std::string& name) const;

    bool operator==(const ParameterSpace&) const = default;
};

struct ParametricTransition {
    std::size_t target = 0;
    Polynomial prob;
    bool operator==(const ParametricTransition&) const = default;
};

struct ParametricChoice {
    std::size_t state = 0;
    std::size_t action = 0;
    std::vector<ParametricTransition> transitions;
    Rational reward = 0;
    bool operator==(const ParametricChoice&) const = default;
};

struct Transition {
    std::size_t target = 0;
    double prob = 0.0;
    bool operator==(const Transition&) const = default;
};

struct Choice {
    std::size_t state = 0;
    std::size_t action = 0;
    std::vector<Transition> transitions;
    double reward = 0.0;
    bool operator==(const Choice&) const = default;
};

/**
 * State/action skeleton shared by concrete and parametric models.
 *
 * Choices (enabled state-action pairs) are stored grouped by state; the
 * choices of state s occupy [offsets[s], offsets[s+1]).
 */
template <class ChoiceT>
struct BasicModel {
    std::vector<std::string> states;
    std::vector<std::string> actions;
    std::vector<ChoiceT> choices;
    std::vector<std::size_t> offsets;
    std::size_t initial = 0;
    std::vector<std::uint8_t> target;

    std::size_t num_states() const { return states.size(); }
    std::size_t num_choices() const { return choices.size(); }
    std::size_t first_choice(std::size_t s) const { return offsets[s]; }
    std::size_t end_choice(std::size_t s) const { return offsets[s + 1]; }
    std::span<const ChoiceT> choices_of(std::size_t s) const {
        return std::span<const ChoiceT>(choices).subspan(offsets[s], offsets[s + 1] - offsets[s]);
    }
    bool is_target(std::size_t s) const { return !target.empty() && target[s] != 0; }
    std::size_t num_transitions() const {
        std::size_t n = 0;
        for (const auto& c : choices) n += c.transitions.size();
        return n;
    }
    bool has_rewards() const {
        for (const auto& c : choices)
            if (c.reward != 0) return true;
        return false;
    }

    bool operator==(const BasicModel&) const = default;
};

struct Pmdp : BasicModel<ParametricChoice> {
    ParameterSpace params;
    bool operator==(const Pmdp&) const = default;
};

using Mdp = BasicModel<Choice>;

/// Location of a transition: choice index and position in its successor list.
struct TransitionRef {
    std::size_t choice = 0;
    std::size_t local = 0;
    bool operator==(const TransitionRef&) const = default;
};

/// Distinct transition expressions of a pMDP and where they occur.
struct ExpressionIndex {
    std::vector<Polynomial> exprs;
    std::vector<std::vector<TransitionRef>> occ;
    /// Expression id of every transition, indexed [choice][local].
    std::vector<std::vector<std::size_t>> expr_of;
    std::vector<std::uint8_t> constant;
    /// Ids of the non-constant expressions, ascending.
    std::vector<std::size_t> unknown;

    std::size_t size() const { return exprs.size(); }
    bool is_constant(std::size_t f) const { return constant[f] != 0; }
};

/**
 * Incrementally assembles a model. Choices may be added in any order; build()
 * groups them by state and validates.
 */
class PmdpBuilder {
public:
    explicit PmdpBuilder(ParameterSpace params);

    std::size_t add_state(const std::string& name);
    std::size_t add_action(const std::string& name);
    /// Index of a state or action, adding it when missing.
    std::size_t state(const std::string& name);
    std::size_t action(const std::string& name);
    bool has_state(const std::string& name) const;

    void add_choice(std::size_t state, std::size_t action, std::vector<ParametricTransition> transitions,
                    Rational reward = 0);
    void set_reward(std::size_t state, std::size_t action, const Rational& reward);
    void set_initial(std::size_t state) { initial_ = state; }
    void add_target(std::size_t state);
    void add_constraint(LinearConstraint c) { params_.constraints.push_back(std::move(c)); }

    const ParameterSpace& params() const { return params_; }

    /// Builds and validates; throws ModelError on any invariant violation.
    Pmdp build() const;

private:
    ParameterSpace params_;
    std::vector<std::string> states_;
    std::map<std::string, std::size_t> state_index_;
    std::vector<std::string> actions_;
    std::set<std::pair<std::size_t, std::size_t>> choice_keys_;
    std::vector<ParametricChoice> choices_;
    std::vector<std::size_t> targets_;
    std::size_t initial_ = 0;
};

/// Enforces all pMDP invariants; throws ModelError naming the failing choice.
void validate(const Pmdp& m);

/// Instantiates every transition expression at v.
Mdp instantiate(const Pmdp& m, std::span<const double> v);

ExpressionIndex index_expressions(const Pmdp& m);

/// Human-readable "(state, action)" label used in diagnostics.
std::string choice_label(const Pmdp& m, std::size_t choice);

} // namespace rumdp
