#pragma once

#include "rumdp/deadline.hpp"
#include "rumdp/model.hpp"
#include "rumdp/sampling.hpp"
#include "rumdp/stats.hpp"

#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace rumdp {

/// Row `coeffs . x <= rhs`.
struct LinearRow {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

struct Bounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Auxiliary variable `var = left * right`, relaxed by its McCormick envelope.
struct Product {
    std::size_t var = 0;
    std::size_t left = 0;
    std::size_t right = 0;
};

/// Affine function over the variables of a polytope.
struct LinearForm {
    std::vector<double> coeffs;
    double constant = 0.0;

    double evaluate(std::span<const double> x) const;
};

/**
 * Linear inequality system over parameters followed by auxiliary variables.
 *
 * `rows` holds the linear constraints; the four envelope rows of every
 * product are derived from the current variable bounds on demand, so
 * changing a bound automatically refreshes them.
 */
class Polytope {
public:
    Polytope() = default;
    explicit Polytope(const ParameterSpace& params);

    std::vector<std::string> var_names;
    std::vector<Bounds> var_bounds;
    std::vector<LinearRow> rows;
    std::vector<Product> products;
    /// Monomial represented by each variable (degree one for parameters).
    std::map<Monomial, std::size_t> monomial_var;
    std::size_t num_params = 0;

    std::size_t dim() const { return var_names.size(); }
    std::size_t num_aux() const { return dim() - num_params; }

    /// Variable holding the monomial, creating the product chain when needed.
    std::size_t lift_monomial(const Monomial& m);
    /// Lifted affine form of p; creates auxiliaries for unseen monomials.
    LinearForm lift(const Polynomial& p);
    /// Lifted affine form of p; throws if a monomial has no variable.
    LinearForm lift(const Polynomial& p) const;

    /// Adds `lo <= form <= hi` as two rows.
    void add_range(const LinearForm& form, double lo, double hi);
    void add_row(std::vector<double> coeffs, double rhs);

    std::vector<LinearRow> mccormick_rows() const;
    /// Linear rows followed by envelope rows (bounds excluded).
    std::vector<LinearRow> all_rows() const;

    /// Max violation of rows and bounds at x (0 when feasible).
    double violation(std::span<const double> x) const;

    /// Value of every monomial variable at a parameter point.
    std::vector<double> lift_point(std::span<const double> params) const;

    /// Re-derives auxiliary bounds from factor bounds by interval multiplication, intersecting.
    void propagate_product_bounds();

    /// Plain-text dump: `var name in [lo, hi]` and `row: c1 c2 ... <= rhs` lines.
    std::string dump() const;

private:
    std::size_t add_variable(const std::string& name, Bounds b);
};

/**
 * Uncertainty region: every expression of the index constrained to its
 * learned interval, polynomial monomials lifted to product chains (left to
 * right in parameter order) with McCormick envelopes, the parameter box as
 * variable bounds, and the standing parameter constraints.
 */
Polytope build_region(const ExpressionIndex& idx, const IntervalTable& ivals, const ParameterSpace& params);

/**
 * Region from per-(s,a) L1 balls around the empirical distributions, with the
 * failure budget split over the constrained state-action pairs. Choices with
 * more than four successors are rejected.
 */
Polytope build_l1_region(const Pmdp& m, const ExpressionIndex& idx, const CountTable& counts, double delta);

enum class LpStatus { optimal, infeasible, unbounded };
enum class Sense { minimize, maximize };

struct LPResult {
    LpStatus status = LpStatus::infeasible;
    double objective = 0.0;
    std::vector<double> point;
    /// Basic variable ids (structural j < dim, slack dim + row); usable as a warm start.
    std::vector<int> basis;
    std::size_t pivots = 0;
};

/**
 * Dense simplex over a fixed polytope.
 *
 * Construction materializes the rows, shifts variables to their lower bounds,
 * and runs phase one once with a single artificial variable. Each solve then
 * starts from that feasible dictionary, or from a caller-supplied basis, and
 * runs phase two. Pivoting follows Bland's rule throughout.
 */
class RegionLp {
public:
    explicit RegionLp(const Polytope& p);

    bool feasible() const { return feasible_; }
    std::size_t dim() const { return n_; }
    std::size_t num_rows() const { return m_; }

    LPResult solve(std::span<const double> objective, Sense sense, const std::vector<int>* warm = nullptr) const;

private:
    struct Dictionary {
        std::vector<double> a; // m x (n + 1): n nonbasic columns then rhs
        std::vector<int> basic;
        std::vector<int> nonbasic;
    };

    double& at(Dictionary& d, std::size_t i, std::size_t j) const { return d.a[i * (n_ + 1) + j]; }
    double at(const Dictionary& d, std::size_t i, std::size_t j) const { return d.a[i * (n_ + 1) + j]; }
    void pivot(Dictionary& d, std::vector<double>& obj, double& obj0, std::size_t r, std::size_t s) const;
    /// Bland-rule phase two; returns false if unbounded.
    bool optimize(Dictionary& d, std::vector<double>& obj, double& obj0, std::size_t& pivots) const;
    bool apply_basis(Dictionary& d, const std::vector<int>& basis) const;

    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<double> lo_;
    Dictionary start_;
    bool feasible_ = false;
};

LPResult lp_solve(const Polytope& p, std::span<const double> objective, Sense sense,
                  const std::vector<int>* warm = nullptr);

struct ObbtResult {
    Polytope region;
    bool infeasible = false;
    std::size_t rounds = 0;
};

/// Optimization-based bound tightening: per round, min and max of every variable, then envelope refresh.
ObbtResult obbt(const Polytope& p, double tol, std::size_t max_rounds, const Deadline* deadline = nullptr);

class VertexEnumerationUnavailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Largest dimension accepted by enumerate_vertices.
inline constexpr std::size_t max_vertex_dimension = 6;

/**
 * All vertices of a bounded polytope by brute force over d-subsets of the
 * potentially active constraints. Throws VertexEnumerationUnavailable above
 * max_vertex_dimension or when the subset count is excessive.
 */
std::vector<std::vector<double>> enumerate_vertices(const Polytope& p, const Deadline* deadline = nullptr);

} // namespace rumdp
