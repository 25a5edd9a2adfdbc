#include "rumdp/polynomial.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace rumdp {

unsigned degree(const Monomial& m) {
    unsigned d = 0;
    for (const auto& [param, exp] : m) d += exp;
    return d;
}

std::vector<std::size_t> factors(const Monomial& m) {
    std::vector<std::size_t> out;
    for (const auto& [param, exp] : m)
        for (unsigned e = 0; e < exp; ++e) out.push_back(param);
    return out;
}

namespace {

Monomial multiply(const Monomial& a, const Monomial& b) {
    Monomial out;
    out.reserve(a.size() + b.size());
    auto i = a.begin();
    auto j = b.begin();
    while (i != a.end() || j != b.end()) {
        if (j == b.end() || (i != a.end() && i->first < j->first)) {
            out.push_back(*i++);
        } else if (i == a.end() || j->first < i->first) {
            out.push_back(*j++);
        } else {
            out.emplace_back(i->first, i->second + j->second);
            ++i;
            ++j;
        }
    }
    return out;
}

} // namespace

Polynomial::Polynomial(std::vector<Term> terms) : terms_(std::move(terms)) { refresh_values(); }

void Polynomial::refresh_values() {
    values_.clear();
    values_.reserve(terms_.size());
    for (const auto& t : terms_) values_.push_back(t.coeff.convert_to<double>());
}

Polynomial Polynomial::constant(const Rational& c) {
    Polynomial p;
    if (c != 0) p.add_term({}, c);
    return p;
}

Polynomial Polynomial::variable(std::size_t param) {
    Polynomial p;
    p.add_term({{param, 1u}}, Rational(1));
    return p;
}

Polynomial Polynomial::monomial(Monomial m, const Rational& c) {
    std::sort(m.begin(), m.end());
    Monomial merged;
    for (const auto& f : m) {
        if (f.second == 0) continue;
        if (!merged.empty() && merged.back().first == f.first)
            merged.back().second += f.second;
        else
            merged.push_back(f);
    }
    Polynomial p;
    if (c != 0) p.add_term(merged, c);
    return p;
}

void Polynomial::add_term(const Monomial& m, const Rational& c) {
    auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                               [](const Term& t, const Monomial& key) { return t.monomial < key; });
    if (it != terms_.end() && it->monomial == m) {
        it->coeff += c;
        if (it->coeff == 0) terms_.erase(it);
    } else if (c != 0) {
        terms_.insert(it, Term{m, c});
    }
    refresh_values();
}

bool Polynomial::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.front().monomial.empty());
}

Rational Polynomial::constant_term() const {
    if (!terms_.empty() && terms_.front().monomial.empty()) return terms_.front().coeff;
    return Rational(0);
}

unsigned Polynomial::degree() const {
    unsigned d = 0;
    for (const auto& t : terms_) d = std::max(d, rumdp::degree(t.monomial));
    return d;
}

bool Polynomial::is_multilinear() const {
    for (const auto& t : terms_)
        for (const auto& f : t.monomial)
            if (f.second > 1) return false;
    return true;
}

std::size_t Polynomial::param_extent() const {
    std::size_t n = 0;
    for (const auto& t : terms_)
        for (const auto& f : t.monomial) n = std::max(n, f.first + 1);
    return n;
}

double Polynomial::evaluate(std::span<const double> point) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        double prod = values_[k];
        for (const auto& [param, exp] : terms_[k].monomial)
            for (unsigned e = 0; e < exp; ++e) prod *= point[param];
        sum += prod;
    }
    return sum;
}

std::vector<double> Polynomial::linear_coefficients(std::size_t n) const {
    std::vector<double> c(n, 0.0);
    for (std::size_t k = 0; k < terms_.size(); ++k) {
        const auto& m = terms_[k].monomial;
        if (m.size() == 1 && m.front().second == 1 && m.front().first < n) c[m.front().first] = values_[k];
    }
    return c;
}

Polynomial Polynomial::operator-() const {
    auto terms = terms_;
    for (auto& t : terms) t.coeff = -t.coeff;
    return Polynomial(std::move(terms));
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
    for (const auto& t : other.terms_) add_term(t.monomial, t.coeff);
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
    for (const auto& t : other.terms_) add_term(t.monomial, -t.coeff);
    return *this;
}

Polynomial& Polynomial::operator*=(const Polynomial& other) {
    std::map<Monomial, Rational> acc;
    for (const auto& a : terms_)
        for (const auto& b : other.terms_) acc[multiply(a.monomial, b.monomial)] += a.coeff * b.coeff;
    std::vector<Term> out;
    for (auto& [m, c] : acc)
        if (c != 0) out.push_back(Term{m, c});
    terms_ = std::move(out);
    refresh_values();
    return *this;
}

Polynomial& Polynomial::operator*=(const Rational& c) {
    if (c == 0) {
        terms_.clear();
    } else {
        for (auto& t : terms_) t.coeff *= c;
    }
    refresh_values();
    return *this;
}

bool operator==(const Polynomial& a, const Polynomial& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (std::size_t k = 0; k < a.terms_.size(); ++k) {
        if (a.terms_[k].monomial != b.terms_[k].monomial || a.terms_[k].coeff != b.terms_[k].coeff)
            return false;
    }
    return true;
}

bool operator<(const Polynomial& a, const Polynomial& b) {
    const std::size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (std::size_t k = 0; k < n; ++k) {
        const auto& x = a.terms_[k];
        const auto& y = b.terms_[k];
        if (x.monomial != y.monomial) return x.monomial < y.monomial;
        if (x.coeff != y.coeff) return x.coeff < y.coeff;
    }
    return a.terms_.size() < b.terms_.size();
}

std::string rational_to_string(const Rational& r) {
    const auto num = boost::multiprecision::numerator(r);
    const auto den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

Rational parse_rational(const std::string& text) {
    using boost::multiprecision::cpp_int;
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const Rational num = parse_rational(text.substr(0, slash));
        const Rational den = parse_rational(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("division by zero in rational '" + text + "'");
        return num / den;
    }
    std::string s = text;
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.erase(0, 1);
    }
    if (s.empty()) throw std::invalid_argument("empty number");
    const auto dot = s.find('.');
    std::string digits = s;
    std::size_t frac_len = 0;
    if (dot != std::string::npos) {
        frac_len = s.size() - dot - 1;
        digits = s.substr(0, dot) + s.substr(dot + 1);
    }
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
        throw std::invalid_argument("malformed number '" + text + "'");
    // a leading zero would make cpp_int read octal
    const auto nz = digits.find_first_not_of('0');
    cpp_int num(nz == std::string::npos ? std::string("0") : digits.substr(nz));
    cpp_int den = 1;
    for (std::size_t k = 0; k < frac_len; ++k) den *= 10;
    Rational r(num, den);
    return negative ? Rational(-r) : r;
}

std::string Polynomial::to_string(const std::vector<std::string>& names) const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        Rational c = t.coeff;
        if (first) {
            if (c < 0) {
                os << "-";
                c = -c;
            }
        } else {
            os << (c < 0 ? " - " : " + ");
            if (c < 0) c = -c;
        }
        first = false;
        bool need_star = false;
        if (t.monomial.empty() || c != 1) {
            os << rational_to_string(c);
            need_star = true;
        }
        for (const auto& [param, exp] : t.monomial) {
            for (unsigned e = 0; e < exp; ++e) {
                if (need_star) os << "*";
                os << (param < names.size() ? names[param] : "p" + std::to_string(param));
                need_star = true;
            }
        }
    }
    return os.str();
}

std::size_t PolynomialHash::operator()(const Polynomial& p) const {
    std::size_t h = 1469598103934665603ull;
    auto mix = [&h](std::size_t v) { h = (h ^ v) * 1099511628211ull; };
    for (const auto& t : p.terms()) {
        for (const auto& [param, exp] : t.monomial) {
            mix(param);
            mix(exp);
        }
        mix(std::hash<std::string>{}(rational_to_string(t.coeff)));
    }
    return h;
}

} // namespace rumdp
