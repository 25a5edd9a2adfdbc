#include "rumdp/relax.hpp"

#include "rumdp/tolerances.hpp"

#include <algorithm>
#include <cmath>

namespace rumdp {

std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::P_I: return "P_I";
    case Provenance::P_Theta: return "P_Theta";
    case Provenance::P_Lambda: return "P_Lambda";
    case Provenance::P_R: return "P_R";
    }
    return "?";
}

Provenance parse_provenance(const std::string& s) {
    if (s == "P_I" || s == "interval") return Provenance::P_I;
    if (s == "P_Theta" || s == "param_box") return Provenance::P_Theta;
    if (s == "P_Lambda" || s == "expr_proj") return Provenance::P_Lambda;
    if (s == "P_R" || s == "region") return Provenance::P_R;
    throw std::invalid_argument("unknown relaxation '" + s + "'");
}

Mdp skeleton_of(const Pmdp& m) {
    Mdp out;
    out.states = m.states;
    out.actions = m.actions;
    out.offsets = m.offsets;
    out.initial = m.initial;
    out.target = m.target;
    out.choices.reserve(m.num_choices());
    for (const auto& c : m.choices) {
        Choice k;
        k.state = c.state;
        k.action = c.action;
        k.reward = c.reward.convert_to<double>();
        for (const auto& t : c.transitions) k.transitions.push_back({t.target, 0.0});
        out.choices.push_back(std::move(k));
    }
    return out;
}

namespace {

Bounds clip01(Bounds b) {
    b.lo = std::clamp(b.lo, 0.0, 1.0);
    b.hi = std::clamp(b.hi, 0.0, 1.0);
    if (b.lo > b.hi) b.lo = b.hi = 0.5 * (b.lo + b.hi);
    return b;
}

Bounds constant_bounds(const ExpressionIndex& idx, std::size_t f) {
    const double v = idx.exprs[f].constant_term().convert_to<double>();
    return {v, v};
}

bool choice_nonempty(const std::vector<Bounds>& bs) {
    double lo = 0.0, hi = 0.0;
    for (const auto& b : bs) {
        lo += b.lo;
        hi += b.hi;
    }
    const double tol = tolerances().stochastic;
    return lo <= 1.0 + tol && hi >= 1.0 - tol;
}

// Spreads expression bounds onto transitions.
UncertainModel interval_from_expr_bounds(const Pmdp& m, const ExpressionIndex& idx, std::vector<Bounds> eb,
                                         Provenance prov) {
    UncertainModel u;
    u.kind = UncertainKind::interval;
    u.provenance = prov;
    u.skeleton = skeleton_of(m);
    u.bounds.resize(m.num_choices());
    for (std::size_t c = 0; c < m.num_choices(); ++c)
        for (std::size_t f : idx.expr_of[c]) u.bounds[c].push_back(eb[f]);
    u.expr_bounds = std::move(eb);
    return u;
}

} // namespace

bool locally_nonempty(const UncertainModel& u) {
    if (u.kind != UncertainKind::interval) return true;
    return std::all_of(u.bounds.begin(), u.bounds.end(), choice_nonempty);
}

UncertainModel build_interval_model(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals) {
    if (ivals.size() != idx.size()) throw std::invalid_argument("interval table does not match the expression index");
    std::vector<Bounds> eb(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f)
        eb[f] = idx.is_constant(f) ? constant_bounds(idx, f) : clip01({ivals[f].lo, ivals[f].hi});
    UncertainModel u = interval_from_expr_bounds(m, idx, std::move(eb), Provenance::P_I);
    // a choice with contradictory intervals keeps only what is certain
    for (std::size_t c = 0; c < m.num_choices(); ++c) {
        if (choice_nonempty(u.bounds[c])) continue;
        ++u.widened_choices;
        for (std::size_t k = 0; k < u.bounds[c].size(); ++k)
            if (!idx.is_constant(idx.expr_of[c][k])) u.bounds[c][k] = {0.0, 1.0};
    }
    return u;
}

UncertainModel point_model(const Mdp& m) {
    UncertainModel u;
    u.kind = UncertainKind::interval;
    u.provenance = Provenance::P_I;
    u.skeleton = m;
    u.bounds.resize(m.num_choices());
    for (std::size_t c = 0; c < m.num_choices(); ++c)
        for (const auto& t : m.choices[c].transitions) u.bounds[c].push_back({t.prob, t.prob});
    return u;
}

Bounds interval_bounds(const Polynomial& p, const std::vector<Bounds>& box) {
    Bounds out{0.0, 0.0};
    for (const auto& t : p.terms()) {
        const double c = t.coeff.convert_to<double>();
        Bounds mono{1.0, 1.0};
        for (std::size_t f : factors(t.monomial)) {
            const Bounds b = box.at(f);
            const double v[4] = {mono.lo * b.lo, mono.lo * b.hi, mono.hi * b.lo, mono.hi * b.hi};
            mono = {*std::min_element(v, v + 4), *std::max_element(v, v + 4)};
        }
        if (c >= 0.0) {
            out.lo += c * mono.lo;
            out.hi += c * mono.hi;
        } else {
            out.lo += c * mono.hi;
            out.hi += c * mono.lo;
        }
    }
    return out;
}

UncertainModel build_param_box_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                     const IntervalTable* ivals, const Deadline* deadline) {
    const RegionLp lp(region);
    if (!lp.feasible()) throw EmptyRegion("uncertainty region is empty");
    std::vector<Bounds> box(region.num_params);
    std::vector<double> e(region.dim(), 0.0);
    for (std::size_t i = 0; i < region.num_params; ++i) {
        poll(deadline, "box projection");
        e[i] = 1.0;
        const auto lo = lp.solve(e, Sense::minimize);
        const auto hi = lp.solve(e, Sense::maximize);
        e[i] = 0.0;
        if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal)
            throw EmptyRegion("uncertainty region is empty");
        box[i] = {std::max(region.var_bounds[i].lo, lo.objective - tolerances().box),
                  std::min(region.var_bounds[i].hi, hi.objective + tolerances().box)};
    }
    std::vector<Bounds> eb(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f) {
        if (idx.is_constant(f)) {
            eb[f] = constant_bounds(idx, f);
            continue;
        }
        Bounds b = clip01(interval_bounds(idx.exprs[f], box));
        if (ivals) {
            b.lo = std::max(b.lo, (*ivals)[f].lo);
            b.hi = std::min(b.hi, (*ivals)[f].hi);
            if (b.lo > b.hi) throw EmptyRegion("box bounds and learned intervals are disjoint");
        }
        eb[f] = b;
    }
    return interval_from_expr_bounds(m, idx, std::move(eb), Provenance::P_Theta);
}

UncertainModel build_expr_proj_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                     const IntervalTable* ivals, const Deadline* deadline) {
    const RegionLp lp(region);
    if (!lp.feasible()) throw EmptyRegion("uncertainty region is empty");
    const double pad = tolerances().box;
    std::vector<Bounds> eb(idx.size());
    for (std::size_t f = 0; f < idx.size(); ++f) {
        if (idx.is_constant(f)) {
            eb[f] = constant_bounds(idx, f);
            continue;
        }
        poll(deadline, "expression projection");
        const LinearForm form = region.lift(idx.exprs[f]);
        const auto lo = lp.solve(form.coeffs, Sense::minimize);
        const auto hi = lp.solve(form.coeffs, Sense::maximize);
        if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal)
            throw EmptyRegion("uncertainty region is empty");
        Bounds b = clip01({lo.objective + form.constant - pad, hi.objective + form.constant + pad});
        if (ivals) {
            b.lo = std::max(b.lo, (*ivals)[f].lo);
            b.hi = std::min(b.hi, (*ivals)[f].hi);
            if (b.lo > b.hi) b.lo = b.hi = 0.5 * (b.lo + b.hi);
        }
        eb[f] = b;
    }
    return interval_from_expr_bounds(m, idx, std::move(eb), Provenance::P_Lambda);
}

UncertainModel build_region_model(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                  bool cache_vertices, const Deadline* deadline) {
    auto data = std::make_shared<RegionData>();
    data->region = region;
    data->lp = std::make_shared<const RegionLp>(region);
    if (!data->lp->feasible()) throw EmptyRegion("uncertainty region is empty");
    data->forms.resize(m.num_choices());
    for (std::size_t c = 0; c < m.num_choices(); ++c)
        for (std::size_t f : idx.expr_of[c]) data->forms[c].push_back(region.lift(idx.exprs[f]));
    if (cache_vertices && region.dim() <= max_vertex_dimension) {
        try {
            data->vertices = enumerate_vertices(region, deadline);
            data->has_vertices = !data->vertices.empty();
        } catch (const VertexEnumerationUnavailable&) {
            data->has_vertices = false;
        }
    }
    UncertainModel u;
    u.kind = UncertainKind::region;
    u.provenance = Provenance::P_R;
    u.skeleton = skeleton_of(m);
    u.region = std::move(data);
    return u;
}

UncertainModel check_and_fallback(const Pmdp& m, const Polytope& region, const ExpressionIndex& idx,
                                  const IntervalTable& ivals, const RelaxOptions& opt) {
    const IntervalTable* clip = opt.source == RegionSource::intervals ? &ivals : nullptr;
    auto fallback = [&] {
        UncertainModel u = build_interval_model(m, idx, ivals);
        u.fallback_used = true;
        return u;
    };
    if (!RegionLp(region).feasible()) return fallback();
    try {
        UncertainModel u;
        switch (opt.provenance) {
        case Provenance::P_I: return build_interval_model(m, idx, ivals);
        case Provenance::P_Theta:
            u = build_param_box_model(m, region, idx, opt.intersect_box ? clip : nullptr, opt.deadline);
            break;
        case Provenance::P_Lambda: u = build_expr_proj_model(m, region, idx, clip, opt.deadline); break;
        case Provenance::P_R: u = build_region_model(m, region, idx, opt.cache_vertices, opt.deadline); break;
        }
        if (!locally_nonempty(u)) return fallback();
        return u;
    } catch (const EmptyRegion&) {
        return fallback();
    }
}

std::optional<Polytope> prepare_region(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals,
                                       const CountTable* counts, const RelaxOptions& opt) {
    Polytope region;
    if (opt.source == RegionSource::l1) {
        if (!counts) throw std::invalid_argument("L1 region requires raw counts");
        region = build_l1_region(m, idx, *counts, opt.delta);
    } else {
        region = build_region(idx, ivals, m.params);
    }
    if (region.num_aux() > 0 && opt.obbt_rounds > 0) {
        auto t = obbt(region, opt.obbt_tol, opt.obbt_rounds, opt.deadline);
        if (t.infeasible) return std::nullopt;
        region = std::move(t.region);
    }
    return region;
}

UncertainModel build_relaxation(const Pmdp& m, const ExpressionIndex& idx, const IntervalTable& ivals,
                                const CountTable* counts, const RelaxOptions& opt) {
    if (opt.provenance == Provenance::P_I) return build_interval_model(m, idx, ivals);
    auto region = prepare_region(m, idx, ivals, counts, opt);
    if (!region) {
        UncertainModel u = build_interval_model(m, idx, ivals);
        u.fallback_used = true;
        return u;
    }
    return check_and_fallback(m, *region, idx, ivals, opt);
}

} // namespace rumdp
