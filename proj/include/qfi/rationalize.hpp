#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qfi/poly.hpp"

namespace qfi {

// Auxiliary algebraic symbol. m >= 2 means aux^m = rhs (rhs over base
// symbols and earlier auxiliaries); m == 0 marks a free auxiliary with no
// relation (cos, exp, log, opaque functions). nonneg records a sign
// guarantee (principal even root, odd root of a nonnegative base, or an
// exponential); it licenses radical-index reduction on later roots, e.g.
// (u^2)^(1/4) -> u^(1/2) is sound only when u cannot be negative.
struct AlgExt {
    SymId aux;
    unsigned m = 0;
    Poly rhs;
    std::string origin;
    bool nonneg = false;
};

struct PolyFraction {
    Poly num;
    Poly den;  // never the zero polynomial
    std::string to_string() const;
};

// Strict conversion: +, *, integer powers. nullopt = NotRational marker
// (fractional exponent, sin/cos/exp/log, or an opaque function present).
// The result is canonical: common monomial factors cancelled, denominator
// integer-primitive with positive leading coefficient.
std::optional<PolyFraction> to_rational_fraction(const Expr& e);

struct ExtendedForm {
    PolyFraction fraction;
    std::vector<AlgExt> extensions;
};

// Total conversion. Fractional powers of a base become root auxiliaries
// (u^q = primitive part of the base, numeric content folded separately);
// sin/cos of one argument share a Pythagorean relation s^2 = 1 - c^2;
// exp arguments are split as (rational content) * (primitive part) so that
// exp(2X) and exp(X) land on powers of one auxiliary; log and opaque
// functions become free auxiliaries keyed by their canonical form.
ExtendedForm to_rational_fraction_extended(const Expr& e);

// Rewrite aux^k for k >= m via the root relations, last extension first.
// A zero result proves the polynomial vanishes identically; a nonzero
// result is conclusive only over the plain rational field (no extensions),
// since the reduction does not model every transcendental identity
// (multi-angle trig, for instance).
Poly reduce_modulo(Poly p, const std::vector<AlgExt>& exts);

bool fractions_equal(const PolyFraction& a, const PolyFraction& b);

}  // namespace qfi
