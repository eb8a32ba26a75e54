#pragma once

// One-dimensional motion with a velocity-proportional term,
//
//     d²x/dt² = -omega(t)·x^mu + phi(t)·dx/dt,
//
// absorbed into a new evolution parameter s with ds/dt = e^{∫phi dt}, which
// removes the velocity term: d²x/ds² = -omegabar(s)·x^mu. On top of that map
// this header builds the quadratic first integrals of the power families
// (general mu ≠ -1 plus the special cases mu = 0, 1, 2, the last two with
// their own structure: a closed-form general solution for mu = 1 and a
// third-order weight condition for mu = 2), and the inverse-time damping
// family phi = -k/t whose integrable frequencies split into the labelled
// cases 1..7.
//
// Phase space is the first Cartesian coordinate pair: expressions returned
// here are functions of t, coords()[0] and velocities()[0].

#include <optional>
#include <string>

#include "qfi/conditions.hpp"
#include "qfi/expr.hpp"

namespace qfi {

// The evolution-parameter symbol "s". Auxiliary functions fed into the
// constructors below (K11, b1, omegabar) are expressions in this symbol.
Expr s_sym();

// d/dt of F(t, x, vx) along d²x/dt² = -omega·x^mu + phi·vx.
Expr damped_flow_derivative(const Expr& F, const Expr& omega,
                            const Rational& mu, const Expr& phi);

// The damping-absorbing change of evolution parameter. `scale` is
// e^{∫phi dt} = ds/dt, positive on the working interval, so s is monotone.
// For phi = 0, a rational constant, or a reciprocal linear function
// c/(a + b·t) everything is emitted in closed form (log arguments are kept
// monic so phi = -k/t yields scale = t^{-k} exactly); otherwise scale and
// s_of_t are opaque nodes carrying their derivative rules, to be evaluated
// by quadrature, and the inverse map is unavailable.
struct Reparam {
    Expr phi;
    Expr scale;    // ds/dt
    Expr s_of_t;   // new parameter as a function of t
    Expr dt_ds;    // 1/scale, as a function of t
    bool closed_form = false;
    std::optional<Expr> t_of_s;  // inverse map, a function of s

    // omega(t) = omegabar(s(t))·scale²
    Expr omega_from_bar(const Expr& omega_bar) const;
    // omegabar(s) = omega(t(s))·(dt/ds)²; requires the inverse map
    Expr omega_bar_from(const Expr& omega) const;
};

Reparam reparameterize(const Expr& phi);

// Parameters of the nonlinear family. The quadratic weight
// K11(s) = c1 + c2·s + c3·s² is shared by every case; the remaining fields
// matter only where the case demands them.
struct NonlinFamily {
    Rational mu;
    Expr phi;
    Rational c1, c2, c3;
    Rational c4, c5;               // forcing constants of the mu = 2 condition
    std::optional<Expr> K11;       // mu = 2: candidate weight, function of s
    std::optional<Expr> b1;        // mu = 0: candidate linear coefficient
    std::optional<Expr> omega_bar; // mu = 0: frequency profile, function of s
};

struct NonlinResult {
    Expr omega;  // frequency in d²x/dt² = -omega(t)·x^mu + phi·vx
    Expr I;      // conserved along that flow
};

// General mu ≠ -1: omegabar = K11^{-(mu+3)/2} and
//   I = K11·(dx/ds)² - K11'·x·(dx/ds) + 2/(mu+1)·K11^{-(mu+1)/2}·x^{mu+1}
//       + c3·x²,
// mapped back to t. Requires (c1,c2,c3) not all zero.
NonlinResult nonlin_qfi_general(const NonlinFamily& fam);

// mu = 0 (uniform force): omegabar is free and the linear coefficient b1
// must satisfy  b1'' = 2·omegabar'·K11 + 3·omegabar·K11'.  The condition is
// verified, never solved; a violating b1 raises an error naming it. The
// integral ∫ b1·omegabar ds entering the invariant has no closed form and
// is carried as an opaque node whose derivative rule drives quadrature.
NonlinResult nonlin_qfi_mu0(const NonlinFamily& fam);

// mu = 1: for any profile rho(t) the frequency
//   omega = -rho''/rho + phi·rho'/rho + rho^{-4}·e^{2∫phi dt}
// makes the motion solvable, x(t) = rho·(A·sinθ + B·cosθ) with
// dθ/dt = rho^{-2}·e^{∫phi dt} (θ collapses to a closed form when that rate
// is a rational constant). A and B are free symbols.
struct Mu1Solution {
    Expr omega;
    Expr solution;
    Expr theta;
};
Mu1Solution nonlin_qfi_mu1(const Expr& rho, const Expr& phi);

// mu = 2: the weight K11(s) is an arbitrary function constrained by
//   K11''' = 2·(c4 + c5·s)·K11^{-5/2},
// again verified rather than solved, and the invariant picks up the
// velocity-linear and coordinate-cubic terms of that case.
NonlinResult nonlin_qfi_mu2(const NonlinFamily& fam);

// d²x/dt² = -omega(t)·x^mu - (k/t)·dx/dt. The integrable frequencies are
//   omega = t^{-2k}·(c1 + c2·M + c3·M²)^{-(mu+3)/2},   M = ∫t^{-k}dt,
// with M = ln t when k = 1 and t^{1-k}/(1-k) otherwise. The working
// interval excludes t = 0 where the damping is singular.
struct LaneEmdenCase {
    Rational k;
    Rational mu;
    Rational c1, c2, c3;
};

// One-hot (c1,c2,c3) patterns reproduce the classified cases: label
// "Case 2".."Case 4" for k ≠ 1, "Case 5".."Case 7" for k = 1, and
// "Case 1 (first|second subcase)" when the one-hot exponent degenerates to
// a constant omega (k = (mu+3)/(mu-1) resp. k = (mu+3)/(mu+1)). Those
// branches return the conventionally rescaled invariant with the constant
// A absorbed; any other coefficient pattern returns the unscaled general
// form under label "general".
struct LaneEmdenResult {
    Expr omega;
    Expr I;
    std::string label;
    Expr M;  // the damping antiderivative used by omega and I
};

LaneEmdenResult lane_emden(const LaneEmdenCase& c);

}  // namespace qfi
