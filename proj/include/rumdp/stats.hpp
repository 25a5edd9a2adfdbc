#pragma once

#include "rumdp/model.hpp"
#include "rumdp/sampling.hpp"

#include <cstdint>
#include <vector>

namespace rumdp {

/// Regularized incomplete beta function I_x(a, b) for a, b > 0.
double incomplete_beta(double a, double b, double x);

/// x with I_x(a, b) = p, by bisection. `upper` selects the upper end of the final bracket.
double beta_quantile(double p, double a, double b, bool upper = false);

struct BinomialInterval {
    double lo = 0.0;
    double hi = 1.0;
    bool trivial = false;
};

/**
 * Two-sided Clopper-Pearson interval for k successes in n trials at failure
 * probability gamma. Bounds are rounded outward to the bisection bracket.
 * n = 0 yields the trivial interval [0,1].
 */
BinomialInterval clopper_pearson(std::uint64_t k, std::uint64_t n, double gamma);

/// L1 deviation radius: sqrt(2 (ln(2^m - 2) + ln(1/gamma)) / n), capped at 2.
double weissman_radius(std::uint64_t n, std::size_t m, double gamma);

struct ConfidenceConfig {
    double delta = 0.001;
    /// Replacement for zero lower bounds of non-constant expressions; 0 disables.
    double eps_floor = 0.0;
    bool l1_enabled = false;
};

void validate(const ConfidenceConfig& cfg);

struct ExpressionInterval {
    double lo = 0.0;
    double hi = 1.0;
    std::uint64_t successes = 0;
    std::uint64_t trials = 0;
    bool trivial = false;
    bool constant = false;
};

/// One interval per expression of an ExpressionIndex.
struct IntervalTable {
    std::vector<ExpressionInterval> entries;
    /// Per-expression failure probability used.
    double gamma = 0.0;

    std::size_t size() const { return entries.size(); }
    const ExpressionInterval& operator[](std::size_t f) const { return entries[f]; }
};

/// Per-expression Clopper-Pearson intervals from pooled counts with the budget split over unknown expressions.
IntervalTable learn_intervals(const ExpressionIndex& idx, const CountTable& counts, const ConfidenceConfig& cfg);

/// Intervals carrying no information: [0,1] for unknowns, exact values for constants.
IntervalTable trivial_intervals(const ExpressionIndex& idx);

} // namespace rumdp
