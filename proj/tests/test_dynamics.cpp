#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "qfi/catalog.hpp"
#include "qfi/dampxform.hpp"
#include "qfi/dynamics.hpp"
#include "qfi/exprio.hpp"
#include "qfi/zerotest.hpp"

using namespace qfi;

namespace {

const double PI = 3.14159265358979323846;

Expr T() { return time_symbol(); }

State st3(double t, std::array<double, 3> q, std::array<double, 3> v) {
    State s;
    s.t = t;
    s.q.assign(q.begin(), q.end());
    s.v.assign(v.begin(), v.end());
    return s;
}

State st1(double t, double x, double vx) {
    State s;
    s.t = t;
    s.q = {x};
    s.v = {vx};
    return s;
}

IntegratorConfig tight() {
    IntegratorConfig c;
    c.rel_tol = 1e-12;
    c.abs_tol = 1e-14;
    return c;
}

bool exactly_zero(const Expr& e) {
    ZeroTestOptions opts;
    opts.strategy = ZeroStrategy::ExactOnly;
    return is_identically_zero(e, opts);
}

}  // namespace

TEST_CASE("harmonic oscillator, dense output against sin") {
    FieldSpec f = make_field_1d(-coords()[0]);
    IntegratorConfig cfg = tight();
    for (int i = 1; i <= 30; ++i) cfg.sample_times.push_back(0.1 * i);
    cfg.sample_times.push_back(PI);
    std::sort(cfg.sample_times.begin(), cfg.sample_times.end());
    Trajectory traj = integrate(f, st1(0.0, 0.0, 1.0), cfg.sample_times.back(), cfg);

    REQUIRE(traj.dim == 1);
    REQUIRE(traj.states.size() == cfg.sample_times.size() + 1);
    CHECK(traj.states[0].t == 0.0);
    CHECK(traj.states[0].q[0] == 0.0);
    CHECK(traj.steps > 0);
    for (std::size_t i = 1; i < traj.states.size(); ++i) {
        const State& s = traj.states[i];
        CHECK(s.t > traj.states[i - 1].t);
        CHECK(std::fabs(s.q[0] - std::sin(s.t)) < 1e-9);
        CHECK(std::fabs(s.v[0] - std::cos(s.t)) < 1e-9);
    }
    // x(pi) vanishes to the dense-output accuracy
    const State& last = traj.states.back();
    CHECK(last.t == doctest::Approx(PI).epsilon(1e-15));
    CHECK(std::fabs(last.q[0]) < 1e-9);
}

TEST_CASE("circular orbit of the inverse-square force stays circular") {
    DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
    Trajectory traj = integrate(sys, st3(0, {1, 0, 0}, {0, 1, 0}), 2 * PI, tight());
    for (const State& s : traj.states) {
        double r = std::hypot(s.q[0], s.q[1]);
        CHECK(std::fabs(r - 1.0) < 1e-8);
        CHECK(std::fabs(s.q[2]) < 1e-13);
    }
    const State& s = traj.states.back();
    CHECK(std::fabs(s.q[0] - 1.0) < 1e-6);
    CHECK(std::fabs(s.q[1]) < 1e-6);
}

TEST_CASE("catalog integrals are flat along their own flow") {
    SUBCASE("constant-coupling inverse-square family") {
        DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
        Trajectory traj =
            integrate(sys, st3(0, {1, 0, 0}, {0.3, 1.1, 0.2}), 5.0, tight());
        CHECK(drift(table1_integral("H", 1, 1), traj).max_rel < 1e-8);
        CHECK(drift(table1_integral("R1", 1, 1), traj).max_rel < 1e-8);
        CHECK(drift(angular_momentum(3, sys), traj).max_rel < 1e-9);
    }
    SUBCASE("constant-coupling inverted oscillator") {
        DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(-2));
        Trajectory traj =
            integrate(sys, st3(0, {0.7, -0.4, 0.5}, {0.2, 0.6, -0.3}), 3.0, tight());
        CHECK(drift(table1_integral("I3_1+", 1, -2), traj).max_rel < 1e-8);
        CHECK(drift(table1_integral("B11", 1, -2), traj).max_rel < 1e-8);
        CHECK(drift(table1_integral("H", 1, -2), traj).max_rel < 1e-8);
    }
    SUBCASE("energy is not conserved once the coupling moves") {
        KeplerSet ks = kepler_time_dependent(1, Rational(1, 2), 1);
        Trajectory traj =
            integrate(ks.system, st3(0, {1, 0, 0}, {0.3, 1.1, 0.2}), 5.0, tight());
        // its own integrals hold...
        CHECK(drift(ks.E2, traj).max_rel < 1e-8);
        CHECK(drift(ks.A[0], traj).max_rel < 1e-8);
        // ...while the frozen-coupling energy drifts by orders more
        Expr H = table1_integral("H", 1, 1).expr;
        CHECK(drift(H, traj).max_rel > 1e-3);
        // and asking for the frozen-coupling integral by family is an error
        CHECK_THROWS_AS(drift(table1_integral("H", 1, 1), traj), Error);
    }
}

TEST_CASE("drift shrinks as the tolerance tightens") {
    DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
    FirstIntegral H = table1_integral("H", 1, 1);
    State s0 = st3(0, {1, 0, 0}, {0.3, 1.1, 0.2});
    auto run = [&](double rt) {
        IntegratorConfig c;
        c.rel_tol = rt;
        c.abs_tol = rt * 1e-2;
        return drift(H, integrate(sys, s0, 10.0, c)).max_rel;
    };
    double d8 = run(1e-8), d10 = run(1e-10), d12 = run(1e-12);
    CHECK(d10 <= 2 * d8);
    CHECK(d12 <= 2 * d10);
    CHECK(d12 < 1e-8);
}

TEST_CASE("a mistuned coefficient is visible in the drift") {
    DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
    Trajectory traj = integrate(sys, st3(0, {1, 0, 0}, {0.3, 1.1, 0.2}), 5.0, tight());
    Rational bump = Rational(1) + Rational(1, 1000);

    FirstIntegral H = table1_integral("H", 1, 1);
    QFICandidate c = H.candidate;
    c.K = Expr::num(bump) * c.K;  // scale the potential part only
    CHECK(drift(c.phase_space(), traj).max_rel > 1e-5);

    FirstIntegral R1 = table1_integral("R1", 1, 1);
    QFICandidate cr = R1.candidate;
    cr.Ka[1] = Expr::num(bump) * cr.Ka[1];
    CHECK(drift(cr.phase_space(), traj).max_rel > 1e-5);

    // control: the unperturbed forms stay flat
    CHECK(drift(H.candidate.phase_space(), traj).max_rel < 1e-8);
    CHECK(drift(R1.candidate.phase_space(), traj).max_rel < 1e-8);
}

TEST_CASE("phase channel equals its quadrature") {
    // f = 1 + t^2, c0 = 2: the bound rate sqrt(c0/2)/f = 1/(1+t^2), so the
    // channel must reproduce arctan t.
    OscillatorSpec spec = OscillatorSpec::profile(1 + T() * T(), 2);
    OscillatorLinearSet lin = oscillator_linear(spec);
    REQUIRE(lin.integrals.size() == 6);

    std::vector<Expr> obs;
    for (const auto& I : lin.integrals) obs.push_back(I.expr);
    FieldSpec f = make_field(spec.system(), obs);
    REQUIRE(f.aux.size() == 1);

    IntegratorConfig cfg = tight();
    for (int i = 1; i <= 30; ++i) cfg.sample_times.push_back(0.1 * i);
    Trajectory traj = integrate(f, st3(0, {0.4, -0.2, 0.7}, {0.1, 0.5, -0.3}), 3.0, cfg);
    for (const State& s : traj.states)
        CHECK(std::fabs(s.aux[0] - std::atan(s.t)) < 1e-9);

    SUBCASE("the linear and quadratic oscillator integrals hold numerically") {
        for (const auto& I : lin.integrals) CHECK(drift(I, traj).max_rel < 1e-8);
        for (const auto& I : oscillator_Lambda(spec)) CHECK(drift(I, traj).max_rel < 1e-8);
    }

    SUBCASE("the closed-form motion tracks the numeric one") {
        // constants from the initial state, where theta = 0
        const std::string th = spec.theta.fn_name();
        Binding b0;
        b0.set(T(), 0.0);
        b0.set_fn(th, 0.0);
        const State& s0 = traj.states[0];
        for (int i = 0; i < 3; ++i) {
            b0.set(coords()[i], s0.q[i]);
            b0.set(velocities()[i], s0.v[i]);
        }
        std::array<Expr, 3> A, B;
        for (int i = 0; i < 3; ++i) {
            A[i] = Expr::num(Rational(mpq_class(evaluate_double(lin.integrals[i].expr, b0))));
            B[i] = Expr::num(Rational(mpq_class(evaluate_double(lin.integrals[3 + i].expr, b0))));
        }
        std::array<Expr, 3> q = oscillator_solution(spec, A, B);
        for (const State& s : traj.states) {
            Binding b;
            b.set(T(), s.t);
            b.set_fn(th, s.aux[0]);
            for (int i = 0; i < 3; ++i)
                CHECK(std::fabs(evaluate_double(q[i], b) - s.q[i]) < 1e-6);
        }
    }
}

TEST_CASE("closed-form oscillator motion solves the equation of motion") {
    // opaque profile, so the identity is structural rather than a lucky f
    std::vector<Expr> chain = opaque_chain("f", 4);
    OscillatorSpec spec = OscillatorSpec::profile(chain[0], 2);
    std::array<Expr, 3> A{Expr::sym("A1"), Expr::sym("A2"), Expr::sym("A3")};
    std::array<Expr, 3> B{Expr::sym("B1"), Expr::sym("B2"), Expr::sym("B3")};
    std::array<Expr, 3> q = oscillator_solution(spec, A, B);
    Expr two_omega = 2 * spec.omega();
    for (int i = 0; i < 3; ++i) {
        Expr qdd = differentiate(differentiate(q[i], T()), T());
        CHECK(exactly_zero(qdd - two_omega * q[i]));
    }

    SUBCASE("rejected inputs") {
        CHECK_THROWS_AS(oscillator_solution(OscillatorSpec::profile(chain[0], -1), A, B),
                        DomainError);
        CHECK_THROWS_AS(oscillator_solution(OscillatorSpec::from_g(1 + T()), A, B),
                        DomainError);
    }
}

TEST_CASE("orbit solver: fixed coupling") {
    SUBCASE("circular data gives a circle") {
        OrbitSolution sol = kepler_orbit(1, 0, 1, st3(0, {1, 0, 0}, {0, 1, 0}), 2 * PI);
        CHECK(sol.alpha < 1e-12);
        CHECK(sol.max_radial_rel_err < 1e-6);
        CHECK(sol.max_angmom_err < 1e-9);
        CHECK(std::fabs(sol.E2 + 0.5) < 1e-14);
    }
    SUBCASE("elliptic data satisfies the eccentricity relation") {
        OrbitSolution sol = kepler_orbit(1, 0, 1, st3(0, {1, 0, 0}, {0, 1.2, 0}), 6.0);
        CHECK(std::fabs(2 * sol.E2 * sol.L3 * sol.L3 - (sol.alpha * sol.alpha - 1)) <
              1e-10);
        CHECK(sol.max_radial_rel_err < 1e-6);
    }
}

TEST_CASE("orbit solver: drifting coupling") {
    OrbitSolution sol =
        kepler_orbit(1, Rational(1, 10), 1, st3(0, {1, 0, 0}, {0, 1.1, 0}), 5.0, tight());
    CHECK(sol.max_radial_rel_err < 1e-6);
    CHECK(sol.max_angmom_err < 1e-9);
    CHECK(std::fabs(2 * sol.E2 * sol.L3 * sol.L3 + 1 -
                    sol.alpha * sol.alpha) < 1e-10);

    SUBCASE("its conserved set stays flat along the run") {
        KeplerSet ks = kepler_time_dependent(1, Rational(1, 10), 1);
        CHECK(drift(ks.E2, sol.traj).max_rel < 1e-8);
        for (const auto& Ai : ks.A) CHECK(drift(Ai, sol.traj).max_rel < 1e-8);
    }

    SUBCASE("the time-angle relation holds under quadrature") {
        // 1/(L3^2 (b0+b1 t)) relates to the accumulated integral of
        // k^2 / (L3 (k + A1 cos + A2 sin)^2) dtheta; check it pointwise with
        // Simpson's rule on a uniform resample, anchored at t0.
        IntegratorConfig cfg = tight();
        const int n = 2000;  // panels; nodes n+1
        for (int i = 1; i <= n; ++i) cfg.sample_times.push_back(5.0 * i / n);
        OrbitSolution rs =
            kepler_orbit(1, Rational(1, 10), 1, st3(0, {1, 0, 0}, {0, 1.1, 0}), 5.0, cfg);
        PolarTrajectory pol = polar_reduction(rs.traj);
        REQUIRE(pol.states.size() == static_cast<std::size_t>(n + 1));
        auto integrand = [&](const PolarState& p) {
            double denom = 1 + rs.k1 * std::cos(p.theta) + rs.k2 * std::sin(p.theta);
            return p.thetadot / (denom * denom);
        };
        double lhs0 = 1.0 / (rs.L3 * rs.L3 * (1 + 0.1 * pol.states[0].t));
        double h = 5.0 / n, acc = 0.0;
        for (int i = 0; i + 2 <= n; i += 2) {
            acc += h / 3 *
                   (integrand(pol.states[i]) + 4 * integrand(pol.states[i + 1]) +
                    integrand(pol.states[i + 2]));
            double t = pol.states[i + 2].t;
            double lhs = 1.0 / (rs.L3 * rs.L3 * (1 + 0.1 * t));
            double rhs = lhs0 - 0.1 * rs.L3 * acc;
            CHECK(std::fabs(lhs - rhs) < 1e-6);
        }
    }
}

TEST_CASE("orbit solver rejects bad input") {
    CHECK_THROWS_AS(kepler_orbit(1, 0, 1, st3(0, {1, 0, 0.1}, {0, 1, 0}), 1.0),
                    DomainError);  // out of plane
    CHECK_THROWS_AS(kepler_orbit(1, 0, 1, st3(0, {1, 0, 0}, {0.5, 0, 0}), 1.0),
                    DomainError);  // radial
    CHECK_THROWS_AS(kepler_orbit(1, Rational(-1, 4), 1, st3(0, {1, 0, 0}, {0, 1, 0}), 5.0),
                    DomainError);  // b0 + b1 t crosses zero
    CHECK_THROWS_AS(kepler_orbit(1, 0, 0, st3(0, {1, 0, 0}, {0, 1, 0}), 1.0),
                    DomainError);  // k = 0
}

TEST_CASE("polar reduction round-trips tilted planes") {
    DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
    // Rodrigues rotation by 0.7 about (1,2,2)/3, built in plain doubles
    double ux = 1.0 / 3, uy = 2.0 / 3, uz = 2.0 / 3;
    double ca = std::cos(0.7), sa = std::sin(0.7);
    double R[3][3];
    double u[3] = {ux, uy, uz};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) R[i][j] = (i == j ? ca : 0.0) + (1 - ca) * u[i] * u[j];
    R[0][1] -= sa * uz; R[0][2] += sa * uy;
    R[1][0] += sa * uz; R[1][2] -= sa * ux;
    R[2][0] -= sa * uy; R[2][1] += sa * ux;

    auto rotated = [&](std::array<double, 3> a) {
        return std::array<double, 3>{R[0][0] * a[0] + R[0][1] * a[1] + R[0][2] * a[2],
                                     R[1][0] * a[0] + R[1][1] * a[1] + R[1][2] * a[2],
                                     R[2][0] * a[0] + R[2][1] * a[1] + R[2][2] * a[2]};
    };

    std::vector<State> inits = {
        st3(0, {1, 0, 0}, {0, 1, 0}),                    // plane z = 0
        st3(0, {1, 0, 0}, {0, 0, 1}),                    // plane y = 0
        st3(0, rotated({1, 0, 0}), rotated({0, 1, 0})),  // generic tilt
    };
    for (const State& s0 : inits) {
        Trajectory traj = integrate(sys, s0, 4.0, tight());
        PolarTrajectory pol = polar_reduction(traj);
        // orthogonality
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                double dot = 0;
                for (int k = 0; k < 3; ++k)
                    dot += pol.rotation[i][k] * pol.rotation[j][k];
                CHECK(std::fabs(dot - (i == j ? 1.0 : 0.0)) < 1e-14);
            }
        REQUIRE(pol.states.size() == traj.states.size());
        for (std::size_t i = 0; i < pol.states.size(); ++i) {
            const PolarState& p = pol.states[i];
            const State& s = traj.states[i];
            CHECK(std::fabs(p.r - 1.0) < 1e-8);        // circular orbit
            CHECK(std::fabs(p.thetadot - 1.0) < 1e-7);
            // round trip through the reduced coordinates
            double plane[3] = {p.r * std::cos(p.theta), p.r * std::sin(p.theta), 0.0};
            for (int a = 0; a < 3; ++a) {
                double back = 0;
                for (int b = 0; b < 3; ++b) back += pol.rotation[b][a] * plane[b];
                CHECK(std::fabs(back - s.q[a]) < 1e-12);
            }
        }
    }

    SUBCASE("an undetermined plane is rejected") {
        Trajectory fake;
        fake.dim = 3;
        fake.states.push_back(st3(0, {1, 0, 0}, {0.5, 0, 0}));
        CHECK_THROWS_AS(polar_reduction(fake), DomainError);
    }
}

TEST_CASE("Lewis invariant is flat along the driven oscillator") {
    // x'' = -psi^2 x with psi = 1 + sin(t)/10; the auxiliary profile obeys
    // rho'' = -psi^2 rho + (c0/2) rho^-3 and rides along as two channels.
    Rational c0 = 2;
    std::vector<Expr> chain = opaque_chain("rho", 1);  // rho, rho_d
    Expr rho = chain[0], rho_d = chain[1];
    Expr psi = 1 + Expr::sin(T()) / 10;
    FirstIntegral lewis = lewis_invariant(rho, c0);

    Expr ep_rate = -psi * psi * rho + Expr::num(c0 * Rational(1, 2)) * pow(rho, -3);
    FieldSpec f = make_field_1d(-psi * psi * coords()[0], {lewis.expr},
                                {{rho_d.fn_name(), ep_rate}});
    REQUIRE(f.aux.size() == 2);  // rho, rho_d (name-sorted)
    CHECK(f.aux[0].name == rho.fn_name());

    State s0 = st1(0, 1.0, 0.0);
    s0.aux = {1.0, 0.0};  // rho(0) = 1, rho'(0) = 0
    Trajectory traj = integrate(f, s0, 10.0, tight());
    CHECK(drift(lewis.expr, traj).max_rel < 1e-8);
}

TEST_CASE("inverse-time damped cubic force conserves its labelled invariant") {
    LaneEmdenResult r = lane_emden({2, 3, 1, 0, 0});
    CHECK(r.label == "Case 2");
    Expr accel = -r.omega * pow(coords()[0], 3) - (2 / T()) * velocities()[0];
    Trajectory traj = integrate(make_field_1d(accel, {r.I}), st1(1.0, 1.0, 0.5), 5.0,
                                tight());
    CHECK(drift(r.I, traj).max_rel < 1e-8);
}

TEST_CASE("field compilation and integration failure modes") {
    SUBCASE("symbols outside the declared dimension") {
        FieldSpec f = make_field_1d(-coords()[1]);
        CHECK_THROWS_AS(integrate(f, st1(0, 1, 0), 1.0), Error);
    }
    SUBCASE("opaque function with no rule and no override") {
        Expr orphan = Expr::fn("orphan");
        orphan.freeze_fn();
        CHECK_THROWS_WITH_AS(make_field_1d(-orphan * coords()[0]),
                             doctest::Contains("no time rule"), Error);
    }
    SUBCASE("interval and sampling validation") {
        FieldSpec f = make_field_1d(-coords()[0]);
        CHECK_THROWS_AS(integrate(f, st1(0, 1, 0), -1.0), Error);
        IntegratorConfig cfg;
        cfg.sample_times = {2.0};
        CHECK_THROWS_AS(integrate(f, st1(0, 1, 0), 1.0, cfg), Error);
        cfg.sample_times = {0.5, 0.25};
        CHECK_THROWS_AS(integrate(f, st1(0, 1, 0), 1.0, cfg), Error);
    }
    SUBCASE("initial data must match the field") {
        FieldSpec f = make_field_1d(-coords()[0]);
        CHECK_THROWS_AS(integrate(f, st3(0, {1, 0, 0}, {0, 1, 0}), 1.0), Error);
    }
    SUBCASE("radial infall aborts at the singular shell") {
        DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
        IntegratorConfig cfg = tight();
        cfg.singular_radius = 1e-3;
        CHECK_THROWS_WITH_AS(integrate(sys, st3(0, {1, 0, 0}, {-0.8, 0, 0}), 3.0, cfg),
                             doctest::Contains("entered r <"), Error);
    }
    SUBCASE("an unreachable tolerance underflows the step size") {
        FieldSpec f = make_field_1d(-coords()[0]);
        IntegratorConfig cfg;
        cfg.rel_tol = 1e-300;
        cfg.abs_tol = 1e-300;
        CHECK_THROWS_WITH_AS(integrate(f, st1(0, 1, 0), 1.0, cfg),
                             doctest::Contains("underflow"), Error);
    }
    SUBCASE("drift input validation") {
        DynSystem sys = DynSystem::power_law(Expr::num(1), Rational(1));
        Trajectory traj = integrate(sys, st3(0, {1, 0, 0}, {0, 1, 0}), 1.0, tight());
        // integral of a different family
        CHECK_THROWS_AS(drift(table1_integral("I1", 1, 2), traj), Error);
        // integral needing a channel the run never carried
        OscillatorSpec spec = OscillatorSpec::profile(1 + T() * T(), 2);
        Trajectory plain = integrate(spec.system(),
                                     st3(0, {1, 0, 0}, {0, 1, 0}), 1.0, tight());
        Expr I41 = oscillator_linear(spec).integrals[0].expr;
        CHECK_THROWS_AS(drift(I41, plain), Error);
    }
}

TEST_CASE("reports are stable and well-formed") {
    FieldSpec f = make_field_1d(-coords()[0]);
    IntegratorConfig cfg = tight();
    cfg.sample_times = {0.5, 1.0};
    Trajectory a = integrate(f, st1(0, 0, 1), 1.0, cfg);
    Trajectory b = integrate(f, st1(0, 0, 1), 1.0, cfg);
    std::string csv = trajectory_csv(a);
    CHECK(csv == trajectory_csv(b));  // bitwise repeatable
    CHECK(csv.rfind("t,x,vx\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);  // header + 3 states

    DriftResult d{1.5, 0.25};
    std::string j = drift_report_json("L3", "inverse-square", d, 1e-9, 1e-12, 0.0, 5.0);
    CHECK(j == drift_report_json("L3", "inverse-square", d, 1e-9, 1e-12, 0.0, 5.0));
    CHECK(j.find("\"integral\": \"L3\"") != std::string::npos);
    CHECK(j.find("\"max_abs\": 1.5") != std::string::npos);
    CHECK(j.find("\"max_rel\": 0.25") != std::string::npos);
    CHECK(j.find("\"interval\": [0, 5]") != std::string::npos);
    CHECK(j.front() == '{');
    CHECK(j.back() == '}');
}
