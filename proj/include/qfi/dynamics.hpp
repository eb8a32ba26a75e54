#pragma once

// Numerical propagation of the catalog's equations of motion.
//
// The integrator is an explicit embedded Runge-Kutta 5(4) pair with
// proportional-integral step-size control and a quartic dense-output
// interpolant, so trajectories can be sampled at caller-requested times
// without constraining the step sequence. Opaque quadrature nodes (theta,
// the reparameterization channels, coupled companion functions) advance as
// extra state components driven by their bound time-derivative rules.
//
// The right-hand side and every conserved-quantity evaluation go through
// the batch tape kernels: fields are compiled once per run, and drift
// measurement evaluates the integral over the whole trajectory in a single
// batch call.

#include <array>
#include <string>
#include <vector>

#include "qfi/catalog.hpp"
#include "qfi/tape.hpp"

namespace qfi {

// An opaque function advanced alongside the coordinates; `rate` is its time
// derivative, an expression in t, the phase-space symbols, and possibly
// other channels (self-reference included: d/dt E = phi * E works).
struct AuxChannel {
    std::string name;
    Expr rate;
};

// Explicit second-order field q'' = accel(t, q, v) in `dim` coordinates
// (1 <= dim <= 3, always the leading coordinate/velocity pairs), plus the
// quadrature channels the run carries. Channels are kept name-sorted.
struct FieldSpec {
    int dim = 3;
    std::array<Expr, 3> accel{};
    std::vector<AuxChannel> aux;
};

// Walk the given expressions and collect every opaque function reachable
// from them (through channel rates as well) as a channel. A function uses
// its override entry when one is supplied, otherwise its bound d/dt rule;
// one with neither cannot be advanced and raises Error. The result is
// name-sorted.
std::vector<AuxChannel> collect_aux_channels(const std::vector<Expr>& roots,
                                             const std::vector<AuxChannel>& overrides = {});

// Field builders. `observables` contributes channels only (integrals to be
// measured along the run); overrides take precedence over bound rules, for
// companion functions that satisfy their own ODE rather than a quadrature.
FieldSpec make_field(const DynSystem& sys, const std::vector<Expr>& observables = {},
                     const std::vector<AuxChannel>& overrides = {});
FieldSpec make_field_1d(const Expr& accel_x, const std::vector<Expr>& observables = {},
                        const std::vector<AuxChannel>& overrides = {});

struct State {
    double t = 0.0;
    std::vector<double> q, v;  // length dim
    std::vector<double> aux;   // field channel order; empty means all zero
};

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double safety = 0.9;
    double max_growth = 5.0;  // accepted-step size never grows faster
    long max_steps = 20000000;
    double singular_radius = 0.0;     // abort when |q| falls below (0 = off)
    std::vector<double> sample_times; // dense-output times (ascending, inside
                                      // the interval); empty = accepted steps
};

struct Trajectory {
    int dim = 0;
    std::vector<std::string> aux_names;
    std::vector<State> states;  // states[0] is the initial state
    long steps = 0;             // accepted
    long rejected = 0;
    double rel_tol = 0.0, abs_tol = 0.0;
    std::string field_print;    // printed acceleration, for family checks
};

// Propagate s0 to t_end > s0.t. s0.aux may be empty (zero-initialized) or
// match the field's channel count. Errors: non-finite field value, step-size
// underflow (singularity), singular-radius violation, step budget exhausted
// -- all reported with the time of failure.
Trajectory integrate(const FieldSpec& field, const State& s0, double t_end,
                     const IntegratorConfig& cfg = {});
Trajectory integrate(const DynSystem& sys, const State& s0, double t_end,
                     const IntegratorConfig& cfg = {});

struct DriftResult {
    double max_abs = 0.0;
    double max_rel = 0.0;  // max |I - I0| / (1 + |I0|)
};

// Conservation drift of I along the trajectory. The FirstIntegral overload
// refuses a trajectory whose field print differs from the integral's own
// family (a drift number against the wrong system is meaningless); the raw
// overload is for expressions that carry no family record.
DriftResult drift(const Expr& I, const Trajectory& traj);
DriftResult drift(const FirstIntegral& I, const Trajectory& traj);

// Closed oscillator solution q_i(t) = (2/c0)^(1/2) f^(1/2)
// (I41_i sin(theta) - I42_i cos(theta)) for a profile/rho spec with c0 > 0.
// The constants may be symbols (for residual proofs) or numbers (for
// pointwise comparison against integration).
std::array<Expr, 3> oscillator_solution(const OscillatorSpec& spec,
                                        const std::array<Expr, 3>& I41,
                                        const std::array<Expr, 3>& I42);

// Conic-form solution of the nu = 1 family under omega = k/(b0 + b1 t),
// built from the conserved values at the initial state and validated
// against the numeric trajectory.
struct OrbitSolution {
    Rational b0, b1, k;
    double L3 = 0.0, E2 = 0.0, A1 = 0.0, A2 = 0.0;
    double k1 = 0.0, k2 = 0.0;     // A1/k, A2/k
    double alpha = 0.0, beta = 0.0;  // k1 = alpha cos(beta), k2 = alpha sin(beta)
    Expr r_closed;   // r(theta, t): L3^2 (b0+b1 t) / (k (1 + k1 cos + k2 sin))
    double max_radial_rel_err = 0.0;  // closed form vs numeric radius
    double max_angmom_err = 0.0;      // |r^2 thetadot - L3| along the path
    Trajectory traj;
};

// Initial state must satisfy z = vz = 0 (the plane is enforced, not chosen)
// and carry nonzero L3; b0 + b1 t must not cross zero inside [s0.t, t_end].
OrbitSolution kepler_orbit(const Rational& b0, const Rational& b1, const Rational& k,
                           const State& s0, double t_end,
                           const IntegratorConfig& cfg = {});

// Planar reduction of a central-force trajectory: rotate the (constant)
// angular momentum onto the z-axis and emit polar coordinates with a
// continuous (unwrapped) angle.
struct PolarState {
    double t = 0.0, r = 0.0, theta = 0.0, rdot = 0.0, thetadot = 0.0;
};
struct PolarTrajectory {
    std::array<std::array<double, 3>, 3> rotation{};  // applied to the input
    std::vector<PolarState> states;
};
PolarTrajectory polar_reduction(const Trajectory& traj, double l_min = 1e-9);

// CSV with header t, q..., v..., channel names; one row per state, 17
// significant digits.
std::string trajectory_csv(const Trajectory& traj);

// One drift record as a JSON object with a stable field order and 17
// significant digits, so reports diff byte-for-byte.
std::string drift_report_json(const std::string& integral, const std::string& family,
                              const DriftResult& d, double rel_tol, double abs_tol,
                              double t0, double t1);

}  // namespace qfi
