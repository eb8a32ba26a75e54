#pragma once

// Named first integrals of the generalized Kepler family
//
//     q'' = -omega(t) * nu * q / r^(nu+2)        (V = -omega(t)/r^nu)
//
// and of its oscillator specialization nu = -2, each returned together with
// the omega binding under which it is conserved. Everything here is a pure
// constructor: build the phase-space expression, split it into (Kab, Ka, K)
// and attach the DynSystem. Verification lives in conditions.hpp; this file
// only promises that what it hands out passes it.

#include <array>
#include <string>
#include <vector>

#include "qfi/conditions.hpp"
#include "qfi/geometry.hpp"

namespace qfi {

enum class FIKind { Linear, Quadratic };

// A named conserved quantity of a concrete system. `expr` is the phase-space
// form in (t, x..z, vx..vz), `candidate` its split into (Kab, Ka, K), and
// `family` the omega/Q binding under which it is conserved. The family is
// never left unset: residual checks and drift runs both need it, and an
// integral without its system is a category mistake waiting to happen.
struct FirstIntegral {
    std::string name;
    std::string id;  // which catalog_entries() row produced it
    Expr expr;
    QFICandidate candidate;
    DynSystem family;
    FIKind kind = FIKind::Quadratic;
};

// Split an expression that is polynomial of degree <= 2 in vx, vy, vz into
// (Kab, Ka, K); the split reproduces the input exactly.
QFICandidate decompose_phase_space(const Expr& I);

// --- angular momentum -------------------------------------------------

// L_i = q_{i+1} v_{i+2} - q_{i+2} v_{i+1}, one-based cyclic indices.
// Conserved for every omega and every nu; the overload without a system
// binds the representative family nu = 1 with an opaque omega chain "w".
FirstIntegral angular_momentum(int i, const DynSystem& sys);
FirstIntegral angular_momentum(int i);
// L_ij = q_i v_j - q_j v_i as a raw expression (epsilon_ijk L^k).
Expr angular_momentum_component(int i, int j);
std::array<std::array<Expr, 3>, 3> angular_momentum_tensor();

// --- constant omega ----------------------------------------------------

// The integrals that exist for omega = k = const. Accepted names:
//   "H"                       any nu      H = v^2/2 - k/r^nu
//   "B11".."B33"              nu = -2     B_ij = v_i v_j - 2k q_i q_j
//   "I3_1+".."I3_3-"          nu = -2     exponential pair, see below
//   "R1".."R3"                nu = 1      Runge-Lenz vector
//   "I1", "I2"                nu = 2      time-weighted combinations
// For k > 0 the exponential pair is e^{+-sqrt(2k) t}(v_a -+ sqrt(2k) q_a).
// For k < 0 it is complex; the catalog keeps the engine real-valued and
// returns the real pair instead: "+" is cos(st) v_a + s sin(st) q_a and
// "-" is sin(st) v_a - s cos(st) q_a with s = sqrt(-2k), from which the
// complex pair is recovered as C_a +- i S_a.
FirstIntegral table1_integral(const std::string& name, const Rational& k,
                              const Rational& nu);

// --- polynomial time weight ---------------------------------------------

// J_nu under omega = k (b0 + b1 t + b2 t^2)^((nu-2)/2), nu != 0:
//   J = P (v^2/2 - omega/r^nu) - (b1 + 2 b2 t)/2 q.v + b2 r^2/2.
// For nu = 2 this decomposes as b0 H - b1 I2 - b2 I1; for nu = -2 it is half
// the trace of the oscillator tensor at f = P.
FirstIntegral J_nu(const Rational& nu, const Rational& b0, const Rational& b1,
                   const Rational& b2, const Rational& k);

// --- time-dependent Kepler, omega = c11/(b0 + b1 t) ----------------------

// E2, the generalized Runge-Lenz vector A and its direction field R_tilde.
// R_tilde is a building block: it is conserved on its own only when b1 = 0,
// where A_i = b0 R_i and E2 = b0^2 H. Identically in phase space,
// A.L = 0 and 2 E2 L^2 + c11^2 = A^2.
struct KeplerSet {
    DynSystem system;
    FirstIntegral E2;
    std::array<FirstIntegral, 3> A;
    std::array<Expr, 3> R_tilde;
    Rational c11;
};
KeplerSet kepler_time_dependent(const Rational& b0, const Rational& b1,
                                const Rational& c11);

// E3 under omega = k (b0 + b1 t + b2 t^2)^(-1/2), k != 0.
FirstIntegral kepler_E3(const Rational& b0, const Rational& b1,
                        const Rational& b2, const Rational& k);

// The compact form k^2 [ w^-2 (v^2/2 - w/r) - (1/2) ((1/w)^2)' q.v
// + ((1/w)^2)'' r^2/4 ] which expands to E2 for mu = 2 (w = k/(b0+b1 t),
// b2 must be zero) and to E3 for mu = 3.
FirstIntegral E_mu_compact(int mu, const Rational& b0, const Rational& b1,
                           const Rational& b2, const Rational& k);

// --- oscillators (nu = -2) ----------------------------------------------

// Time profiles that admit extra oscillator integrals. The f- and a3-
// parameterizations are the same profile in two printed forms,
//   omega = f''/(4f) - (f'/f)^2/8 - c0/(4 f^2),
// the rho-form substitutes f = rho^2,
//   omega = rho''/(2 rho) - c0/(4 rho^4),
// and the g-form is the linear-integral profile omega = g''/(2g) with no c0.
// When c0 > 0 the spec carries the phase angle theta as an opaque function
// with the bound rule theta' = sqrt(c0/2) / f; it is left zero otherwise.
// Profiles may be explicit expressions in t or opaque chains (depth >= 3 so
// the residual system can reach the third derivative).
struct OscillatorSpec {
    enum class Form { Profile, Rho, G };
    Form form = Form::Profile;
    Expr f;    // Profile and Rho (as rho^2); unset for G
    Expr rho;  // Rho only
    Expr g;    // G only
    Rational c0 = 0;
    Expr theta;

    static OscillatorSpec profile(Expr f, const Rational& c0);
    static OscillatorSpec from_a3(Expr a3, const Rational& c0);  // = profile
    static OscillatorSpec from_rho(Expr rho, const Rational& c0);
    static OscillatorSpec from_g(Expr g);

    Expr omega() const;
    DynSystem system() const;  // power law nu = -2 under omega()
};

// The six-component symmetric tensor
//   Lambda_ij = f (v_i v_j - 2 omega q_i q_j) - f' q_(i v_j) + f''/2 q_i q_j,
// conserved componentwise. Constant f reduces it to B_ij (c0 = -4k); the
// quadratic profile f = b0 + b1 t + b2 t^2 gives the polynomial-weight
// tensor whose trace is 2 J_{-2}. Rejects g-form specs.
std::array<FirstIntegral, 6> oscillator_Lambda(const OscillatorSpec& spec);

// Linear integrals of the oscillator profiles. For a g-form spec these are
// the three I4_i = g v_i - g' q_i. For a profile/rho spec with c0 > 0 they
// are the six
//   I41_i = sqrt(c0/2) f^-1/2 q_i sin(theta) + (f^1/2 v_i - f'/2 f^-1/2 q_i) cos(theta)
//   I42_i = -sqrt(c0/2) f^-1/2 q_i cos(theta) + (f^1/2 v_i - f'/2 f^-1/2 q_i) sin(theta)
// satisfying Lambda_ij = I41_i I41_j + I42_i I42_j,
// L_ij = sqrt(2/c0) (I41_i I42_j - I41_j I42_i) and d I42_i / d theta = I41_i.
struct OscillatorLinearSet {
    std::vector<FirstIntegral> integrals;  // I4_1..3, or I41_1..3 then I42_1..3
    Expr theta;                            // zero for the g-form
};
OscillatorLinearSet oscillator_linear(const OscillatorSpec& spec);

// --- Lewis invariant -----------------------------------------------------

// I = (x rho' - rho vx)^2 / 2 + (c0/4)(x/rho)^2, conserved along
// x'' = -psi^2 x whenever rho solves rho'' + psi^2 rho - c0/(2 rho^3) = 0;
// the attached family carries omega = -psi^2/2 expressed through rho,
//   omega = rho''/(2 rho) - c0/(4 rho^4).
FirstIntegral lewis_invariant(const Expr& rho, const Rational& c0);

// --- listing --------------------------------------------------------------

// Static description of everything the catalog can construct.
struct CatalogEntry {
    std::string id;
    std::string name;
    std::string nu;     // "-2", "1", "2", "any"
    std::string omega;  // omega family template in t
    std::vector<std::string> parameters;
};
const std::vector<CatalogEntry>& catalog_entries();
// The same listing serialized as a JSON array, stable field and row order.
std::string catalog_listing_json();

}  // namespace qfi
