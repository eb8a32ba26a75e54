// Determining equations for quadratic first integrals of
//   qdotdot^a = -omega(t) Q^a(q)
// on flat space, plus the specialized checkers built on top of them:
// conformal (point-symmetry) candidates, the time-polynomial and exponential
// integral families for polynomial omega, and the power-law classification.
#ifndef QFI_CONDITIONS_HPP
#define QFI_CONDITIONS_HPP

#include <optional>
#include <string>
#include <vector>

#include "qfi/geometry.hpp"
#include "qfi/zerotest.hpp"

namespace qfi {

// Phase-space symbols: t and the velocities paired with coords().
Expr time_symbol();
const std::array<Expr, 3>& velocities();

// Opaque function of t with an explicit derivative chain
// f, f_d, f_dd, ... (depth+1 nodes). The deepest node has no bound rule, so
// it must never itself be differentiated; size the chain accordingly.
std::vector<Expr> opaque_chain(const std::string& name, unsigned depth);

struct DynSystem {
    Expr omega;                  // function of t, not identically zero
    Vec3E Q;                     // functions of position
    std::optional<Rational> nu;  // set when Q^a = nu q^a / r^(nu+2)

    static DynSystem make(Expr omega, Vec3E Q);
    // Q^a = nu q^a / r^(nu+2): the generalized Kepler force, V = -omega/r^nu.
    static DynSystem power_law(Expr omega, const Rational& nu);

    Vec3E acceleration() const;  // -omega * Q
};

struct QFICandidate {
    SymMat3E Kab;  // entries in (t, q)
    Vec3E Ka;
    Expr K;

    Expr phase_space() const;  // Kab v^a v^b + Ka v^a + K
};

// d/dt along the flow of a second-order system with the given acceleration;
// F may be any phase-space expression, not just a quadratic one.
Expr flow_derivative(const Expr& F, const Vec3E& accel);
Expr flow_derivative(const Expr& F, const DynSystem& sys);
Expr total_time_derivative(const QFICandidate& c, const DynSystem& sys);

// The determining system, grouped by velocity degree of dI/dt plus the two
// integrability conditions it implies. All six vanish iff dI/dt == 0.
struct ResidualReport {
    std::array<Expr, 10> cubic;              // symmetrized gradient of Kab
    std::array<Expr, 6> quadratic;           // Kab_,t + K_(a;b)
    std::array<Expr, 3> linear;              // -2w Kab Q^b + Ka_,t + K_,a
    Expr scalar;                             // K_,t - w Ka Q^a
    std::array<Expr, 3> time_integrability;  // d/dt of linear minus grad of scalar
    std::array<Expr, 3> space_integrability; // antisymmetrized gradient of linear
};

ResidualReport determining_residuals(const QFICandidate& c,
                                     const DynSystem& sys);

struct ConditionVerdict {
    std::string condition;
    ZeroTestResult result;
};

// One verdict per residual group, in a fixed order; a candidate is a first
// integral iff every verdict is Zero.
std::vector<ConditionVerdict> verify_candidate(
    const QFICandidate& c, const DynSystem& sys,
    const ZeroTestOptions& opts = ZeroTestOptions());
bool all_zero(const std::vector<ConditionVerdict>& verdicts);

/* ------------------------- point-symmetry cases ------------------------- */

struct PointSymmetryOutcome {
    bool ok = false;
    std::string violated;   // name of the first failed constraint
    QFICandidate integral;  // meaningful when ok
};

// Kab = (c - psi t) delta with Ka a homothetic vector of factor psi.
struct HomothetyCaseData {
    Vec3E Ka;
    Expr V;  // potential, Q = grad V
    Rational c;
    Expr M;  // gauge function of t
    Rational c1, c2;
};

// Kab = N(t) delta, Ka = -M(t) grad S with S a gradient homothety.
struct GradientCaseData {
    Expr S;
    Expr V;
    Expr N, M, Ct;  // functions of t
    Rational d1, m, k;
};

// As above but the potential V itself is the gradient homothety, Ka = -M grad V.
struct SelfPotentialCaseData {
    Expr V;
    Expr N, M, Ct;
    Rational d2, k;
};

PointSymmetryOutcome point_noether_case(const HomothetyCaseData& d,
                                        const DynSystem& sys);
PointSymmetryOutcome point_noether_case(const GradientCaseData& d,
                                        const DynSystem& sys);
PointSymmetryOutcome point_noether_case(const SelfPotentialCaseData& d,
                                        const DynSystem& sys);

/* --------------- integrals for polynomial omega(t) ---------------------- */

// Data for the degree-n time-polynomial integral family under
// omega = b0 + b1 t + ... + b_ell t^ell:
//   Kab = C[0] + sum_k (t^k/k) C[k],  Ka = sum_k t^k L[k].
struct TimePolynomialData {
    unsigned n = 0;
    unsigned ell = 1;
    std::vector<Rational> b;   // size ell+1, b[ell] != 0
    std::vector<SymMat3E> C;   // size n+1
    std::vector<Vec3E> L;      // size n+1
    Rational s;
    Expr G;                    // function of position
};

struct CheckOutcome {
    bool ok = false;
    std::string violated;
    QFICandidate integral;
};

// Verifies the recurrence/balance/ladder conditions of the family and, on
// success, assembles the integral and confirms conservation. The out-of-range
// convention: any b_j, C[m], L[m] with an index outside its range is zero,
// and a division by (index == 0) keeps the C[0] term undivided.
CheckOutcome time_polynomial_integral_check(const TimePolynomialData& d,
                                            const DynSystem& sys,
                                            const ZeroTestOptions& opts =
                                                ZeroTestOptions());

// The exponential companion integral, which exists only for omega = b0 + b1 t:
//   I = e^(lambda t) [ -L_(a;b) v^a v^b + lambda L_a v^a
//                      + (b0 - b1/lambda + b1 t) L_a Q^a ].
CheckOutcome exponential_integral_check(const Vec3E& L, const Rational& lambda,
                                        const Rational& b0, const Rational& b1,
                                        const DynSystem& sys,
                                        const ZeroTestOptions& opts =
                                            ZeroTestOptions());

// Bounded search for nontrivial exponential integrals: L ranges over all
// polynomial vector fields of degree <= 2, Q over one-hot monomial vector
// fields of degree <= 2 plus the radial field, lambda over a small rational
// grid. Returns a description of every nontrivial solution found.
struct ExponentialFinding {
    Vec3E Q;
    Rational lambda;
    Vec3E L;
};
std::vector<ExponentialFinding> exponential_integral_search();

/* ----------------- power-law force classification ----------------------- */

// The admissible omega(t) families for Q^a = nu q^a / r^(nu+2), with
// representative integrals expressed through opaque functions of t where the
// family leaves a function free.
struct PowerLawBranch {
    std::string label;
    Expr omega;
    DynSystem system;
    std::vector<std::string> integral_names;
    std::vector<QFICandidate> integrals;
    std::vector<std::string> constraints;  // surviving-parameter relations
};

std::vector<PowerLawBranch> power_law_classification(const Rational& nu);

}  // namespace qfi

#endif
