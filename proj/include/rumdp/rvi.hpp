#pragma once

#include "rumdp/geometry.hpp"
#include "rumdp/relax.hpp"

#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumdp {

enum class ObjectiveKind { reach, total_reward };

/// Maximization objective; targets and rewards come from the model skeleton.
struct Objective {
    ObjectiveKind kind = ObjectiveKind::reach;
};

/// Total reward when the model has rewards, reachability otherwise.
template <class Model>
Objective default_objective(const Model& m) {
    return {m.has_rewards() ? ObjectiveKind::total_reward : ObjectiveKind::reach};
}

std::string to_string(ObjectiveKind k);

enum class NatureMode { robust, optimistic };
enum class InnerBackend { automatic, lp, vertex };

std::string to_string(NatureMode m);
std::string to_string(InnerBackend b);

struct InnerResult {
    double value = 0.0;
    std::vector<double> distribution;
};

class InfeasibleLocalSet : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Optimal distribution within per-successor bounds: everyone starts at the
 * lower bound and the remaining mass goes to successors in order of value
 * (ascending for minimize), saturating at the upper bounds.
 */
InnerResult inner_interval(std::span<const Bounds> bounds, std::span<const double> values, Sense sense);

class BackendUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Extremum of sum_k values[k] * P(s,a,k) over the region for one choice; optionally the minimizing (maximizing) P(s,a,.).
double inner_region(const RegionData& data, std::size_t choice, std::span<const double> succ_values, Sense sense,
                    InnerBackend backend, std::vector<int>* warm = nullptr,
                    std::vector<double>* distribution = nullptr);

struct SolveOptions {
    double vi_tol = 1e-6;
    std::size_t max_iter = 100000;
    /// Values of total-reward objectives are capped here.
    double v_max = 1e4;
    InnerBackend backend = InnerBackend::automatic;
    /// Restricts every state to one local action index (policy evaluation).
    const std::vector<std::size_t>* fixed_policy = nullptr;
    const Deadline* deadline = nullptr;
};

struct SolveResult {
    std::vector<double> values;
    /// Local action index per state.
    std::vector<std::size_t> policy;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    /// Some value reached the cap.
    bool capped = false;
    NatureMode mode = NatureMode::robust;
    ObjectiveKind objective = ObjectiveKind::reach;
};

/// Gauss-Seidel robust (or optimistic) value iteration.
SolveResult solve(const UncertainModel& u, const Objective& obj, NatureMode mode, const SolveOptions& opt = {});

/// Exact value of a memoryless policy on a concrete MDP; diverging total rewards are +infinity.
std::vector<double> evaluate_policy(const Mdp& m, const std::vector<std::size_t>& policy, const Objective& obj,
                                    double tol = 1e-9, std::size_t max_iter = 1000000);

/// Optimal values and policy of a concrete MDP.
SolveResult solve_mdp(const Mdp& m, const Objective& obj, const SolveOptions& opt = {});

} // namespace rumdp
