#pragma once

#include <gmpxx.h>

#include <optional>
#include <stdexcept>
#include <string>

namespace qfi {

// Exact rational arithmetic backed by GMP. All symbolic coefficients in the
// library are mpq_class values; doubles appear only in numeric evaluation.
using Rational = mpq_class;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Evaluation hit a point outside an operation's domain (log of a
// non-positive value, zero raised to a negative power, division by zero).
struct DomainError : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
// Malformed JSON input (missing field, wrong type, bad expression string).
struct SchemaError : Error {
    using Error::Error;
};

inline Rational rat(long n, long d = 1) {
    if (d == 0) throw DomainError("rational with zero denominator");
    Rational r(n, d);
    r.canonicalize();
    return r;
}

// Accepts "p", "-p", "p/q" with optional leading minus on p.
std::optional<Rational> parse_rational(const std::string& s);

std::string to_string(const Rational& r);

bool is_integer(const Rational& r);

// Value as long; throws unless the rational is an integer that fits.
long to_long(const Rational& r);

inline double to_double(const Rational& r) { return r.get_d(); }

// Exact k-th root when one exists (e.g. (4/9)^(1/2) -> 2/3).
std::optional<Rational> exact_root(const Rational& r, unsigned long k);

std::size_t hash_rational(const Rational& r);

}  // namespace qfi
