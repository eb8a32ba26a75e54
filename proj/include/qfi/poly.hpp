#pragma once

#include <map>
#include <string>
#include <vector>

#include "qfi/expr.hpp"

namespace qfi {

// Sparse multivariate polynomial with exact rational coefficients.
// A monomial is a SymId->exponent list sorted by id; the zero monomial is
// the constant term. Internal ordering is by id (fast, run-stable);
// to_string re-sorts by name so printed forms are process independent.

using Monomial = std::vector<std::pair<SymId, unsigned>>;

class Poly {
  public:
    Poly() = default;
    explicit Poly(const Rational& c);
    static Poly constant(const Rational& c);
    static Poly variable(SymId s);

    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const;
    const Rational* constant_value() const;  // nullptr unless constant
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    unsigned degree_in(SymId s) const;
    unsigned total_degree() const;
    std::vector<SymId> variables() const;

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(const Poly& a, const Poly& b);
    friend Poly operator*(const Rational& c, const Poly& p) {
        return Poly::constant(c) * p;
    }
    friend Poly operator*(const Poly& p, const Rational& c) {
        return Poly::constant(c) * p;
    }
    friend Poly operator-(const Poly& a);
    Poly pow(unsigned long n) const;
    friend bool operator==(const Poly& a, const Poly& b) { return a.terms_ == b.terms_; }

    void add_term(const Monomial& m, const Rational& c);

    // Divide out the largest monomial dividing every term; returns it.
    Monomial extract_monomial_content();
    // Scale so coefficients are coprime integers and the leading (by the
    // internal order) coefficient is positive; returns the factor removed.
    Rational normalize_content();

    Rational evaluate(const std::map<SymId, Rational>& point) const;

    // Group terms by the exponent of s: result[k] has s stripped out.
    std::map<unsigned, Poly> collect(SymId s) const;

    std::string to_string() const;

  private:
    std::map<Monomial, Rational> terms_;
};

Monomial monomial_mul(const Monomial& a, const Monomial& b);
Monomial monomial_gcd(const Monomial& a, const Monomial& b);
Monomial monomial_div(const Monomial& a, const Monomial& b);  // assumes divisible

}  // namespace qfi
