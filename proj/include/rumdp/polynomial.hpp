#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rumdp {

using Rational = boost::multiprecision::cpp_rational;

/// Power product of parameters, sorted by parameter index. Empty means the constant monomial.
using Monomial = std::vector<std::pair<std::size_t, unsigned>>;

/// Total degree of a monomial.
unsigned degree(const Monomial& m);

/// Expands a monomial into its factor list, e.g. t0^2 t2 -> [0, 0, 2].
std::vector<std::size_t> factors(const Monomial& m);

/**
 * Sparse multivariate polynomial with exact rational coefficients.
 *
 * Terms are kept sorted by monomial and never carry a zero coefficient, so
 * structural equality coincides with equality of the canonical term lists.
 */
class Polynomial {
public:
    struct Term {
        Monomial monomial;
        Rational coeff;
    };

    Polynomial() = default;

    static Polynomial constant(const Rational& c);
    static Polynomial variable(std::size_t param);
    static Polynomial monomial(Monomial m, const Rational& c);

    const std::vector<Term>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    /// Constant part (coefficient of the empty monomial).
    Rational constant_term() const;
    unsigned degree() const;
    /// Degree at most one in every parameter.
    bool is_multilinear() const;
    bool is_linear() const { return degree() <= 1; }
    /// Largest parameter index used plus one.
    std::size_t param_extent() const;

    /// Evaluates with terms summed in canonical order.
    double evaluate(std::span<const double> point) const;

    /// Coefficients of the degree-one part, indexed by parameter (size n).
    std::vector<double> linear_coefficients(std::size_t n) const;

    Polynomial operator-() const;
    Polynomial& operator+=(const Polynomial& other);
    Polynomial& operator-=(const Polynomial& other);
    Polynomial& operator*=(const Polynomial& other);
    Polynomial& operator*=(const Rational& c);

    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, const Polynomial& b) { return a *= b; }
    friend Polynomial operator*(Polynomial a, const Rational& c) { return a *= c; }
    friend Polynomial operator*(const Rational& c, Polynomial a) { return a *= c; }

    friend bool operator==(const Polynomial& a, const Polynomial& b);
    friend bool operator<(const Polynomial& a, const Polynomial& b);

    /// Renders in the model-file expression syntax.
    std::string to_string(const std::vector<std::string>& names) const;

private:
    explicit Polynomial(std::vector<Term> terms);
    void add_term(const Monomial& m, const Rational& c);

    std::vector<Term> terms_;
    // coefficients converted once; aligned with terms_
    std::vector<double> values_;
    void refresh_values();
};

/// Renders a rational as an integer, or "p/q".
std::string rational_to_string(const Rational& r);

/// Parses "12", "-3/4" or a decimal such as "0.125" exactly.
Rational parse_rational(const std::string& text);

struct PolynomialHash {
    std::size_t operator()(const Polynomial& p) const;
};

} // namespace rumdp
