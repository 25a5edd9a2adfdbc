#include "rumdp/geometry.hpp"

#include "rumdp/tolerances.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace rumdp {

double LinearForm::evaluate(std::span<const double> x) const {
    double v = constant;
    for (std::size_t j = 0; j < coeffs.size(); ++j) v += coeffs[j] * x[j];
    return v;
}

Polytope::Polytope(const ParameterSpace& params) {
    num_params = params.size();
    for (std::size_t i = 0; i < params.size(); ++i) {
        add_variable(params.names[i], {params.lo(i), params.hi(i)});
        monomial_var[Monomial{{i, 1u}}] = i;
    }
    for (const auto& c : params.constraints) {
        if (!c.lhs.is_linear()) throw std::invalid_argument("standing constraints must be linear");
        auto coeffs = c.lhs.linear_coefficients(num_params);
        const double rhs = (c.rhs - c.lhs.constant_term()).convert_to<double>();
        add_row(std::move(coeffs), rhs);
    }
}

std::size_t Polytope::add_variable(const std::string& name, Bounds b) {
    var_names.push_back(name);
    var_bounds.push_back(b);
    for (auto& r : rows) r.coeffs.push_back(0.0);
    return var_names.size() - 1;
}

namespace {

Bounds interval_product(Bounds a, Bounds b) {
    const double c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(c, c + 4), *std::max_element(c, c + 4)};
}

} // namespace

std::size_t Polytope::lift_monomial(const Monomial& m) {
    if (m.empty()) throw std::invalid_argument("constant monomial has no variable");
    if (auto it = monomial_var.find(m); it != monomial_var.end()) return it->second;
    const auto fs = factors(m);
    Monomial prefix{{fs[0], 1u}};
    std::size_t cur = monomial_var.at(prefix);
    for (std::size_t r = 1; r < fs.size(); ++r) {
        // multiply the prefix monomial by one more factor
        const std::size_t f = fs[r];
        if (!prefix.empty() && prefix.back().first == f)
            ++prefix.back().second;
        else
            prefix.emplace_back(f, 1u);
        if (auto it = monomial_var.find(prefix); it != monomial_var.end()) {
            cur = it->second;
            continue;
        }
        const std::size_t right = monomial_var.at(Monomial{{f, 1u}});
        const std::string name = var_names[cur] + "*" + var_names[right];
        const std::size_t z = add_variable(name, interval_product(var_bounds[cur], var_bounds[right]));
        products.push_back({z, cur, right});
        monomial_var[prefix] = z;
        cur = z;
    }
    return cur;
}

LinearForm Polytope::lift(const Polynomial& p) {
    for (const auto& t : p.terms())
        if (!t.monomial.empty()) lift_monomial(t.monomial);
    return static_cast<const Polytope&>(*this).lift(p);
}

LinearForm Polytope::lift(const Polynomial& p) const {
    LinearForm f;
    f.coeffs.assign(dim(), 0.0);
    for (const auto& t : p.terms()) {
        const double c = t.coeff.convert_to<double>();
        if (t.monomial.empty()) {
            f.constant += c;
            continue;
        }
        auto it = monomial_var.find(t.monomial);
        if (it == monomial_var.end()) throw std::invalid_argument("monomial is not lifted in this region");
        f.coeffs[it->second] += c;
    }
    return f;
}

void Polytope::add_row(std::vector<double> coeffs, double rhs) {
    if (coeffs.size() != dim()) throw std::invalid_argument("row length does not match the variable count");
    rows.push_back({std::move(coeffs), rhs});
}

void Polytope::add_range(const LinearForm& form, double lo, double hi) {
    if (hi - lo <= 0.0) {
        // equality stored as two inequalities with a little slack
        const double s = tolerances().equality_slack;
        lo -= s;
        hi += s;
    }
    std::vector<double> neg(form.coeffs.size());
    std::transform(form.coeffs.begin(), form.coeffs.end(), neg.begin(), [](double c) { return -c; });
    add_row(form.coeffs, hi - form.constant);
    add_row(std::move(neg), form.constant - lo);
}

std::vector<LinearRow> Polytope::mccormick_rows() const {
    std::vector<LinearRow> out;
    out.reserve(4 * products.size());
    for (const auto& pr : products) {
        const auto [xl, xu] = var_bounds[pr.left];
        const auto [yl, yu] = var_bounds[pr.right];
        auto row = [&](double cx, double cy, double cz, double rhs) {
            LinearRow r;
            r.coeffs.assign(dim(), 0.0);
            r.coeffs[pr.left] += cx;
            r.coeffs[pr.right] += cy;
            r.coeffs[pr.var] += cz;
            r.rhs = rhs;
            out.push_back(std::move(r));
        };
        row(yl, xl, -1.0, xl * yl);   // z >= yl x + xl y - xl yl
        row(yu, xu, -1.0, xu * yu);   // z >= yu x + xu y - xu yu
        row(-yl, -xu, 1.0, -xu * yl); // z <= yl x + xu y - xu yl
        row(-yu, -xl, 1.0, -xl * yu); // z <= yu x + xl y - xl yu
    }
    return out;
}

std::vector<LinearRow> Polytope::all_rows() const {
    std::vector<LinearRow> out = rows;
    auto mc = mccormick_rows();
    out.insert(out.end(), std::make_move_iterator(mc.begin()), std::make_move_iterator(mc.end()));
    return out;
}

double Polytope::violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t j = 0; j < dim(); ++j) {
        worst = std::max(worst, var_bounds[j].lo - x[j]);
        worst = std::max(worst, x[j] - var_bounds[j].hi);
    }
    for (const auto& r : all_rows()) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < dim(); ++j) lhs += r.coeffs[j] * x[j];
        worst = std::max(worst, lhs - r.rhs);
    }
    return worst;
}

std::vector<double> Polytope::lift_point(std::span<const double> params) const {
    std::vector<double> x(dim(), 0.0);
    for (std::size_t i = 0; i < num_params; ++i) x[i] = params[i];
    // products are created after their factors, so one pass suffices
    for (const auto& pr : products) x[pr.var] = x[pr.left] * x[pr.right];
    return x;
}

void Polytope::propagate_product_bounds() {
    for (const auto& pr : products) {
        const Bounds b = interval_product(var_bounds[pr.left], var_bounds[pr.right]);
        auto& v = var_bounds[pr.var];
        v.lo = std::max(v.lo, b.lo);
        v.hi = std::min(v.hi, b.hi);
        if (v.lo > v.hi) v.lo = v.hi = 0.5 * (v.lo + v.hi);
    }
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string Polytope::dump() const {
    std::ostringstream os;
    for (std::size_t j = 0; j < dim(); ++j)
        os << "var " << var_names[j] << " in [" << fmt(var_bounds[j].lo) << ", " << fmt(var_bounds[j].hi) << "]\n";
    for (const auto& r : all_rows()) {
        os << "row:";
        for (double c : r.coeffs) os << ' ' << fmt(c);
        os << " <= " << fmt(r.rhs) << '\n';
    }
    return os.str();
}

Polytope build_region(const ExpressionIndex& idx, const IntervalTable& ivals, const ParameterSpace& params) {
    if (ivals.size() != idx.size()) throw std::invalid_argument("interval table does not match the expression index");
    Polytope p(params);
    // create all auxiliaries first so every row has the final width
    for (std::size_t f : idx.unknown) p.lift(idx.exprs[f]);
    for (std::size_t f : idx.unknown) {
        const LinearForm form = std::as_const(p).lift(idx.exprs[f]);
        p.add_range(form, ivals[f].lo, ivals[f].hi);
    }
    return p;
}

Polytope build_l1_region(const Pmdp& m, const ExpressionIndex& idx, const CountTable& counts, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    if (counts.sa.size() != m.num_choices()) throw std::invalid_argument("count table does not match the model");
    Polytope p(m.params);
    std::vector<std::size_t> used;
    for (std::size_t c = 0; c < m.num_choices(); ++c) {
        if (counts.sa[c] == 0) continue;
        const auto& ex = idx.expr_of[c];
        const bool informative = std::any_of(ex.begin(), ex.end(), [&](std::size_t f) { return !idx.is_constant(f); });
        if (!informative || ex.size() < 2) continue;
        if (ex.size() > 4) throw std::invalid_argument("L1 region supports at most four successors per choice, " +
                                                       choice_label(m, c) + " has " + std::to_string(ex.size()));
        used.push_back(c);
    }
    if (used.empty()) return p;
    for (std::size_t c : used)
        for (std::size_t f : idx.expr_of[c]) p.lift(idx.exprs[f]);
    const double gamma = delta / static_cast<double>(used.size());
    for (std::size_t c : used) {
        const auto& ex = idx.expr_of[c];
        const std::size_t k = ex.size();
        const std::uint64_t n = counts.sa[c];
        const double eps = weissman_radius(n, k, gamma);
        std::vector<LinearForm> forms;
        std::vector<double> emp;
        for (std::size_t i = 0; i < k; ++i) {
            forms.push_back(std::as_const(p).lift(idx.exprs[ex[i]]));
            emp.push_back(static_cast<double>(counts.sas[c][i]) / static_cast<double>(n));
        }
        // sum_i |f_i - p_i| <= eps as 2^k sign rows
        for (unsigned mask = 0; mask < (1u << k); ++mask) {
            std::vector<double> coeffs(p.dim(), 0.0);
            double rhs = eps;
            for (std::size_t i = 0; i < k; ++i) {
                const double s = (mask >> i) & 1u ? -1.0 : 1.0;
                for (std::size_t j = 0; j < p.dim(); ++j) coeffs[j] += s * forms[i].coeffs[j];
                rhs += s * (emp[i] - forms[i].constant);
            }
            p.add_row(std::move(coeffs), rhs);
        }
    }
    return p;
}

// ---------------------------------------------------------------------------
// simplex

namespace {

// variable ids: structural [0, n), slack [n, n + m), artificial n + m
constexpr double enter_eps = 1e-9;

} // namespace

RegionLp::RegionLp(const Polytope& p) : n_(p.dim()) {
    const auto rows = p.all_rows();
    lo_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) lo_[j] = p.var_bounds[j].lo;

    // rows: A y <= b - A lo, then y_j <= hi_j - lo_j
    m_ = rows.size() + n_;
    const std::size_t w = n_ + 1;
    // phase one needs one extra column for the artificial variable
    std::vector<double> a(m_ * (w + 1), 0.0);
    const std::size_t w1 = w + 1;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        double rhs = rows[i].rhs;
        for (std::size_t j = 0; j < n_; ++j) {
            a[i * w1 + j] = rows[i].coeffs[j];
            rhs -= rows[i].coeffs[j] * lo_[j];
        }
        a[i * w1 + n_] = -1.0;
        a[i * w1 + n_ + 1] = rhs;
    }
    for (std::size_t j = 0; j < n_; ++j) {
        const std::size_t i = rows.size() + j;
        a[i * w1 + j] = 1.0;
        a[i * w1 + n_] = -1.0;
        a[i * w1 + n_ + 1] = p.var_bounds[j].hi - lo_[j];
        if (p.var_bounds[j].hi < p.var_bounds[j].lo - tolerances().feasibility) {
            feasible_ = false;
            return;
        }
    }

    // generic pivoting on the (n+1)-column phase-one dictionary
    std::vector<int> basic(m_), nonbasic(n_ + 1);
    for (std::size_t i = 0; i < m_; ++i) basic[i] = static_cast<int>(n_ + i);
    for (std::size_t j = 0; j < n_; ++j) nonbasic[j] = static_cast<int>(j);
    const int art = static_cast<int>(n_ + m_);
    nonbasic[n_] = art;
    std::vector<double> obj(n_ + 1, 0.0);
    obj[n_] = -1.0; // maximize -artificial
    double obj0 = 0.0;

    auto piv = [&](std::size_t r, std::size_t s) {
        const double inv = 1.0 / a[r * w1 + s];
        for (std::size_t k = 0; k < w1; ++k)
            if (k != s) a[r * w1 + k] *= inv;
        a[r * w1 + s] = inv;
        for (std::size_t i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = a[i * w1 + s];
            if (f == 0.0) continue;
            for (std::size_t k = 0; k < w1; ++k)
                if (k != s) a[i * w1 + k] -= f * a[r * w1 + k];
            a[i * w1 + s] = -f * inv;
        }
        const double d = obj[s];
        if (d != 0.0) {
            for (std::size_t k = 0; k < n_ + 1; ++k)
                if (k != s) obj[k] -= d * a[r * w1 + k];
            obj[s] = -d * inv;
            obj0 += d * a[r * w1 + n_ + 1];
        }
        std::swap(basic[r], nonbasic[s]);
    };

    std::size_t worst = 0;
    for (std::size_t i = 1; i < m_; ++i)
        if (a[i * w1 + n_ + 1] < a[worst * w1 + n_ + 1]) worst = i;
    if (m_ > 0 && a[worst * w1 + n_ + 1] < 0.0) {
        piv(worst, n_);
        for (;;) {
            std::size_t s = n_ + 1;
            for (std::size_t j = 0; j < n_ + 1; ++j)
                if (obj[j] > enter_eps && (s == n_ + 1 || nonbasic[j] < nonbasic[s])) s = j;
            if (s == n_ + 1) break;
            std::size_t r = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double c = a[i * w1 + s];
                if (c <= enter_eps) continue;
                const double ratio = a[i * w1 + n_ + 1] / c;
                if (r == m_ || ratio < best - 1e-12 || (ratio <= best + 1e-12 && basic[i] < basic[r])) {
                    r = i;
                    best = ratio;
                }
            }
            if (r == m_) break;
            piv(r, s);
        }
        if (obj0 < -tolerances().feasibility) {
            feasible_ = false;
            return;
        }
        // drive the artificial out of the basis if it is still there at level zero
        for (std::size_t i = 0; i < m_; ++i) {
            if (basic[i] != art) continue;
            std::size_t s = n_ + 1;
            double mag = 0.0;
            for (std::size_t j = 0; j < n_ + 1; ++j) {
                if (nonbasic[j] == art) continue;
                if (std::abs(a[i * w1 + j]) > mag) {
                    mag = std::abs(a[i * w1 + j]);
                    s = j;
                }
            }
            if (s == n_ + 1) {
                feasible_ = false; // degenerate row made of the artificial only
                return;
            }
            piv(i, s);
        }
    }
    // drop the artificial column
    std::size_t art_col = 0;
    while (nonbasic[art_col] != art) ++art_col;
    start_.a.assign(m_ * w, 0.0);
    start_.basic = basic;
    start_.nonbasic.clear();
    for (std::size_t j = 0; j < n_ + 1; ++j)
        if (j != art_col) start_.nonbasic.push_back(nonbasic[j]);
    for (std::size_t i = 0; i < m_; ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < n_ + 1; ++j)
            if (j != art_col) start_.a[i * w + k++] = a[i * w1 + j];
        start_.a[i * w + n_] = std::max(0.0, a[i * w1 + n_ + 1]);
    }
    feasible_ = true;
}

void RegionLp::pivot(Dictionary& d, std::vector<double>& obj, double& obj0, std::size_t r, std::size_t s) const {
    const std::size_t w = n_ + 1;
    double* row = &d.a[r * w];
    const double inv = 1.0 / row[s];
    for (std::size_t k = 0; k < w; ++k)
        if (k != s) row[k] *= inv;
    row[s] = inv;
    for (std::size_t i = 0; i < m_; ++i) {
        if (i == r) continue;
        double* other = &d.a[i * w];
        const double f = other[s];
        if (f == 0.0) continue;
        for (std::size_t k = 0; k < w; ++k)
            if (k != s) other[k] -= f * row[k];
        other[s] = -f * inv;
    }
    if (!obj.empty()) {
        const double c = obj[s];
        if (c != 0.0) {
            for (std::size_t k = 0; k < n_; ++k)
                if (k != s) obj[k] -= c * row[k];
            obj[s] = -c * inv;
            obj0 += c * row[n_];
        }
    }
    std::swap(d.basic[r], d.nonbasic[s]);
}

bool RegionLp::optimize(Dictionary& d, std::vector<double>& obj, double& obj0, std::size_t& pivots) const {
    const std::size_t w = n_ + 1;
    for (;;) {
        std::size_t s = n_;
        for (std::size_t j = 0; j < n_; ++j)
            if (obj[j] > enter_eps && (s == n_ || d.nonbasic[j] < d.nonbasic[s])) s = j;
        if (s == n_) return true;
        std::size_t r = m_;
        double best = 0.0;
        for (std::size_t i = 0; i < m_; ++i) {
            const double c = d.a[i * w + s];
            if (c <= enter_eps) continue;
            const double ratio = d.a[i * w + n_] / c;
            if (r == m_ || ratio < best - 1e-12 || (ratio <= best + 1e-12 && d.basic[i] < d.basic[r])) {
                r = i;
                best = ratio;
            }
        }
        if (r == m_) return false;
        pivot(d, obj, obj0, r, s);
        ++pivots;
    }
}

bool RegionLp::apply_basis(Dictionary& d, const std::vector<int>& basis) const {
    if (basis.size() != m_) return false;
    std::vector<std::uint8_t> want(n_ + m_, 0);
    for (int v : basis) {
        if (v < 0 || static_cast<std::size_t>(v) >= n_ + m_) return false;
        want[v] = 1;
    }
    std::vector<double> none;
    double dummy = 0.0;
    const std::size_t w = n_ + 1;
    for (std::size_t s = 0; s < n_; ++s) {
        if (!want[d.nonbasic[s]]) continue;
        std::size_t r = m_;
        double mag = tolerances().pivot * 1e3;
        for (std::size_t i = 0; i < m_; ++i) {
            if (want[d.basic[i]]) continue;
            const double c = std::abs(d.a[i * w + s]);
            if (c > mag) {
                mag = c;
                r = i;
            }
        }
        if (r == m_) return false; // singular basis
        pivot(d, none, dummy, r, s);
    }
    for (std::size_t i = 0; i < m_; ++i) {
        double& rhs = d.a[i * w + n_];
        if (rhs < -tolerances().feasibility) return false;
        if (rhs < 0.0) rhs = 0.0;
    }
    return true;
}

LPResult RegionLp::solve(std::span<const double> objective, Sense sense, const std::vector<int>* warm) const {
    if (objective.size() != n_) throw std::invalid_argument("objective length does not match the region");
    LPResult res;
    if (!feasible_) {
        res.status = LpStatus::infeasible;
        return res;
    }
    const double sign = sense == Sense::maximize ? 1.0 : -1.0;

    Dictionary d = start_;
    if (warm && !apply_basis(d, *warm)) d = start_;

    // reduced costs of sign * c . y in the current dictionary
    const std::size_t w = n_ + 1;
    std::vector<double> obj(n_, 0.0);
    double obj0 = 0.0;
    std::vector<std::ptrdiff_t> col_of(n_ + m_, -1);
    for (std::size_t j = 0; j < n_; ++j) col_of[d.nonbasic[j]] = static_cast<std::ptrdiff_t>(j);
    for (std::size_t v = 0; v < n_; ++v) {
        const double c = sign * objective[v];
        if (c == 0.0) continue;
        if (col_of[v] >= 0) {
            obj[col_of[v]] += c;
            continue;
        }
        for (std::size_t i = 0; i < m_; ++i) {
            if (d.basic[i] != static_cast<int>(v)) continue;
            obj0 += c * d.a[i * w + n_];
            for (std::size_t j = 0; j < n_; ++j) obj[j] -= c * d.a[i * w + j];
            break;
        }
    }
    if (!optimize(d, obj, obj0, res.pivots)) {
        res.status = LpStatus::unbounded;
        return res;
    }
    res.status = LpStatus::optimal;
    res.point = lo_;
    for (std::size_t i = 0; i < m_; ++i)
        if (d.basic[i] < static_cast<int>(n_)) res.point[d.basic[i]] += d.a[i * w + n_];
    double val = 0.0;
    for (std::size_t j = 0; j < n_; ++j) val += objective[j] * res.point[j];
    res.objective = val;
    res.basis = d.basic;
    return res;
}

LPResult lp_solve(const Polytope& p, std::span<const double> objective, Sense sense, const std::vector<int>* warm) {
    return RegionLp(p).solve(objective, sense, warm);
}

// ---------------------------------------------------------------------------
// bound tightening

ObbtResult obbt(const Polytope& p, double tol, std::size_t max_rounds, const Deadline* deadline) {
    ObbtResult out;
    out.region = p;
    const double margin = tolerances().obbt_margin;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        const RegionLp lp(out.region);
        if (!lp.feasible()) {
            out.infeasible = true;
            return out;
        }
        ++out.rounds;
        auto& vb = out.region.var_bounds;
        std::vector<Bounds> next = vb;
        std::vector<double> e(lp.dim(), 0.0);
        for (std::size_t j = 0; j < lp.dim(); ++j) {
            poll(deadline, "bound tightening");
            e[j] = 1.0;
            const auto lo = lp.solve(e, Sense::minimize);
            const auto hi = lp.solve(e, Sense::maximize);
            e[j] = 0.0;
            if (lo.status != LpStatus::optimal || hi.status != LpStatus::optimal) {
                out.infeasible = true;
                return out;
            }
            next[j].lo = std::max(vb[j].lo, lo.objective - margin);
            next[j].hi = std::min(vb[j].hi, hi.objective + margin);
            if (next[j].lo > next[j].hi) next[j].lo = next[j].hi = 0.5 * (next[j].lo + next[j].hi);
        }
        double improvement = 0.0;
        for (std::size_t j = 0; j < vb.size(); ++j)
            improvement = std::max({improvement, next[j].lo - vb[j].lo, vb[j].hi - next[j].hi});
        vb = std::move(next);
        out.region.propagate_product_bounds();
        if (improvement < tol) break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// vertices

namespace {

// Gaussian elimination with partial pivoting; false when singular.
bool solve_square(std::vector<double> a, std::vector<double> b, std::size_t d, std::vector<double>& x) {
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::abs(a[r * d + c]) > std::abs(a[piv * d + c])) piv = r;
        if (std::abs(a[piv * d + c]) < 1e-10) return false;
        if (piv != c) {
            for (std::size_t k = 0; k < d; ++k) std::swap(a[c * d + k], a[piv * d + k]);
            std::swap(b[c], b[piv]);
        }
        for (std::size_t r = c + 1; r < d; ++r) {
            const double f = a[r * d + c] / a[c * d + c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < d; ++k) a[r * d + k] -= f * a[c * d + k];
            b[r] -= f * b[c];
        }
    }
    x.assign(d, 0.0);
    for (std::size_t c = d; c-- > 0;) {
        double v = b[c];
        for (std::size_t k = c + 1; k < d; ++k) v -= a[c * d + k] * x[k];
        x[c] = v / a[c * d + c];
    }
    return true;
}

double binomial(std::size_t n, std::size_t k) {
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace

std::vector<std::vector<double>> enumerate_vertices(const Polytope& p, const Deadline* deadline) {
    const std::size_t d = p.dim();
    if (d > max_vertex_dimension)
        throw VertexEnumerationUnavailable("vertex enumeration unavailable: dimension " + std::to_string(d) +
                                           " exceeds " + std::to_string(max_vertex_dimension));
    std::vector<std::vector<double>> out;
    if (d == 0) return out;
    const RegionLp lp(p);
    if (!lp.feasible()) return out;

    std::vector<LinearRow> cand;
    auto add = [&](LinearRow r) {
        double norm = 0.0;
        for (double c : r.coeffs) norm = std::max(norm, std::abs(c));
        if (norm < 1e-14) return;
        for (double& c : r.coeffs) c /= norm;
        r.rhs /= norm;
        for (const auto& q : cand) {
            bool same = std::abs(q.rhs - r.rhs) <= 1e-12;
            for (std::size_t j = 0; same && j < d; ++j) same = std::abs(q.coeffs[j] - r.coeffs[j]) <= 1e-12;
            if (same) return;
        }
        // keep only rows that can be active somewhere in the polytope
        poll(deadline, "vertex enumeration");
        const auto best = lp.solve(r.coeffs, Sense::maximize);
        if (best.status != LpStatus::optimal || best.objective < r.rhs - 1e-9) return;
        cand.push_back(std::move(r));
    };
    for (auto& r : p.all_rows()) add(std::move(r));
    for (std::size_t j = 0; j < d; ++j) {
        LinearRow up{std::vector<double>(d, 0.0), p.var_bounds[j].hi};
        up.coeffs[j] = 1.0;
        add(std::move(up));
        LinearRow down{std::vector<double>(d, 0.0), -p.var_bounds[j].lo};
        down.coeffs[j] = -1.0;
        add(std::move(down));
    }
    if (cand.size() < d) return out;
    if (binomial(cand.size(), d) > 2e6)
        throw VertexEnumerationUnavailable("vertex enumeration unavailable: too many constraint subsets");

    const double feas = tolerances().feasibility;
    const double merge = tolerances().vertex_merge;
    std::vector<std::size_t> pick(d);
    std::iota(pick.begin(), pick.end(), 0);
    std::vector<double> a(d * d), b(d), x;
    for (std::size_t step = 0;; ++step) {
        if ((step & 4095) == 0) poll(deadline, "vertex enumeration");
        for (std::size_t r = 0; r < d; ++r) {
            for (std::size_t j = 0; j < d; ++j) a[r * d + j] = cand[pick[r]].coeffs[j];
            b[r] = cand[pick[r]].rhs;
        }
        if (solve_square(a, b, d, x)) {
            bool ok = true;
            for (const auto& r : cand) {
                double lhs = 0.0;
                for (std::size_t j = 0; j < d; ++j) lhs += r.coeffs[j] * x[j];
                if (lhs > r.rhs + feas) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                const bool dup = std::any_of(out.begin(), out.end(), [&](const std::vector<double>& v) {
                    for (std::size_t j = 0; j < d; ++j)
                        if (std::abs(v[j] - x[j]) > merge) return false;
                    return true;
                });
                if (!dup) out.push_back(x);
            }
        }
        // next combination
        std::size_t i = d;
        while (i > 0 && pick[i - 1] == cand.size() - d + (i - 1)) --i;
        if (i == 0) break;
        ++pick[i - 1];
        for (std::size_t k = i; k < d; ++k) pick[k] = pick[k - 1] + 1;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace rumdp
