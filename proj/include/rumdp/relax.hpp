#pragma once

#include "rumdp/geometry.hpp"
#include "rumdp/model.hpp"
#include "rumdp/stats.hpp"

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumdp {

enum class Provenance { P_I, P_Theta, P_Lambda, P_R };
enum class UncertainKind { interval, region };

std::string to_string(Provenance p);
/// Accepts "P_I", "P_Theta", "P_Lambda", "P_R" and the lowercase aliases interval, param_box, expr_proj, region.
Provenance parse_provenance(const std::string& s);

class EmptyRegion : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shared polytope of a region model together with the lifted transition rows.
struct RegionData {
    Polytope region;
    std::shared_ptr<const RegionLp> lp;
    /// Lifted affine form of every transition, indexed [choice][local].
    std::vector<std::vector<LinearForm>> forms;
    /// Cached vertices of the lifted region; empty when unavailable.
    std::vector<std::vector<double>> vertices;
    bool has_vertices = false;
};

/**
 * Rectangular uncertain MDP. The skeleton holds states, choices, successor
 * lists, rewards, initial and target states; its transition probabilities
 * are unused. Interval models carry per-transition bounds, region models a
 * shared polytope.
 */
struct UncertainModel {
    UncertainKind kind = UncertainKind::interval;
    Provenance provenance = Provenance::P_I;
    bool fallback_used = false;
    Mdp skeleton;
    /// Per-transition bounds [choice][local] (interval kind).
    std::vector<std::vector<Bounds>> bounds;
    /// Per-expression bounds after projection, aligned with the expression index (empty for point models).
    std::vector<Bounds> expr_bounds;
    /// Choices whose learned intervals admitted no distribution and were widened to [0,1].
    std::size_t widened_choices = 0;
    std::shared_ptr<const RegionData> region;
};

Mdp skeleton_of(const Pmdp& m);

/// Tied intervals: each transition receives the interval of its expression.
UncertainModel build_interval_model(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals);

/// Single-MDP model with point intervals.
UncertainModel point_model(const Mdp& m);

/// Bounding box B(U) by 2|params| LPs, expression bounds over the box; optionally intersected with `ivals`.
UncertainModel build_param_box_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                     const IntervalTable* ivals, const Deadline* deadline = nullptr);

/// Per-expression min and max over the region, intersected with `ivals` when given.
UncertainModel build_expr_proj_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                     const IntervalTable* ivals, const Deadline* deadline = nullptr);

/// Region-coupled rectangular relaxation; vertices are cached when the dimension permits.
UncertainModel build_region_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                  bool cache_vertices = true, const Deadline* deadline = nullptr);

/// Per-expression interval arithmetic of a polynomial over a box.
Bounds interval_bounds(const Polynomial& p, const std::vector<Bounds>& box);

/// True when every choice admits a distribution: sum of lower bounds <= 1 <= sum of upper bounds.
bool locally_nonempty(const UncertainModel& u);

enum class RegionSource { intervals, l1 };

struct RelaxOptions {
    Provenance provenance = Provenance::P_I;
    RegionSource source = RegionSource::intervals;
    std::size_t obbt_rounds = 5;
    double obbt_tol = 1e-6;
    /// Intersect P_Theta expression bounds with the learned intervals.
    bool intersect_box = true;
    bool cache_vertices = true;
    double delta = 0.001;
    const Deadline* deadline = nullptr;
};

/**
 * Builds the requested model from a region. Falls back to P_I (flagged) when
 * the region is empty or the projection leaves some choice without a distribution.
 */
UncertainModel check_and_fallback(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                  const IntervalTable& ivals, const RelaxOptions& opt);

/// Region construction (interval or L1 source), bound tightening when auxiliaries exist, then check_and_fallback.
UncertainModel build_relaxation(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals,
                                const CountTable* counts, const RelaxOptions& opt);

/// Region used by build_relaxation, before fallback handling; nullopt when OBBT proves it empty.
std::optional<Polytope> prepare_region(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals,
                                       const CountTable* counts, const RelaxOptions& opt);

} // namespace rumdp
