#pragma once

namespace rumdp {

/// Numerical tolerances shared across the library.
struct Tolerances {
    /// Row/bound violation accepted as feasible by the LP solver and vertex enumeration.
    double feasibility = 1e-7;
    /// Entries smaller than this are treated as zero when pivoting.
    double pivot = 1e-11;
    /// Slack applied around zero-width interval constraints.
    double equality_slack = 1e-12;
    /// Allowed deviation from 1 of an instantiated distribution.
    double stochastic = 1e-9;
    /// Allowed distance of an instantiation outside the parameter box.
    double box = 1e-12;
    /// Safety margin applied when OBBT replaces a variable bound.
    double obbt_margin = 1e-9;
    /// Duplicate vertices closer than this are merged.
    double vertex_merge = 1e-7;
};

inline const Tolerances& tolerances() {
    static const Tolerances tol{};
    return tol;
}

} // namespace rumdp
