#include "qfi/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "qfi/exprio.hpp"

namespace qfi {

namespace {

const char* kCoordNames[3] = {"x", "y", "z"};
const char* kVelNames[3] = {"vx", "vy", "vz"};

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Expr dnum(double x) { return Expr::num(Rational(mpq_class(x))); }

std::string accel_print(const FieldSpec& f) {
    std::string s = "dim=" + std::to_string(f.dim);
    for (int i = 0; i < f.dim; ++i) s += "; " + print_expr(f.accel[i]);
    return s;
}

// ---- compiled right-hand side ------------------------------------------

// State vector layout: y = [q(dim), v(dim), aux(m)]; the tape reads from a
// scratch block laid out as [t, q, v, aux] through per-input pointers.
struct CompiledField {
    int dim = 0, m = 0;
    Tape tape;  // outputs: accel components, then channel rates
    std::vector<int> plan;
};

CompiledField compile_field(const FieldSpec& f) {
    if (f.dim < 1 || f.dim > 3) throw Error("field dimension must be 1, 2 or 3");
    std::vector<Expr> outs;
    for (int i = 0; i < f.dim; ++i) outs.push_back(f.accel[i]);
    for (const auto& ch : f.aux) outs.push_back(ch.rate);
    CompiledField cf{f.dim, static_cast<int>(f.aux.size()), Tape::compile(outs), {}};
    for (const std::string& in : cf.tape.inputs()) {
        int off = -1;
        if (in == "t") off = 0;
        for (int i = 0; i < f.dim && off < 0; ++i) {
            if (in == kCoordNames[i]) off = 1 + i;
            else if (in == kVelNames[i]) off = 1 + f.dim + i;
        }
        if (off < 0 && in.rfind("fn:", 0) == 0) {
            std::string nm = in.substr(3);
            for (int j = 0; j < cf.m && off < 0; ++j)
                if (f.aux[j].name == nm) off = 1 + 2 * f.dim + j;
            if (off < 0)
                throw Error("opaque function '" + nm + "' is not a channel of this run");
        }
        if (off < 0)
            throw Error("the field references '" + in +
                        "', which is neither a phase-space symbol within dimension " +
                        std::to_string(f.dim) + " nor a channel");
        cf.plan.push_back(off);
    }
    return cf;
}

struct Rhs {
    const CompiledField& cf;
    std::vector<double> scratch, outs;
    std::vector<const double*> in_ptrs;
    std::vector<double*> out_ptrs;

    explicit Rhs(const CompiledField& c)
        : cf(c), scratch(1 + 2 * c.dim + c.m), outs(c.tape.num_outputs()) {
        for (int off : cf.plan) in_ptrs.push_back(&scratch[off]);
        for (auto& o : outs) out_ptrs.push_back(&o);
    }

    void operator()(double t, const std::vector<double>& y, std::vector<double>& dy) {
        const int d = cf.dim, m = cf.m;
        scratch[0] = t;
        std::copy(y.begin(), y.end(), scratch.begin() + 1);
        cf.tape.run(in_ptrs.data(), out_ptrs.data(), 1, KernelChoice::Scalar);
        for (double o : outs)
            if (!std::isfinite(o)) throw Error("non-finite field value at t = " + fmt17(t));
        for (int i = 0; i < d; ++i) dy[i] = y[d + i];
        for (int i = 0; i < d; ++i) dy[d + i] = outs[i];
        for (int j = 0; j < m; ++j) dy[2 * d + j] = outs[d + j];
    }
};

// ---- Dormand-Prince 5(4) pair --------------------------------------------

constexpr double C2 = 1.0 / 5, C3 = 3.0 / 10, C4 = 4.0 / 5, C5 = 8.0 / 9;
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561,
                 A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920,
                 E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40;
// dense-output weights of the quartic interpolant
constexpr double D1 = -12715105075.0 / 11282082432.0, D3 = 87487479700.0 / 32700410799.0,
                 D4 = -10690763975.0 / 1880347072.0, D5 = 701980252875.0 / 199316789632.0,
                 D6 = -1453857185.0 / 822651844.0, D7 = 69997945.0 / 29380423.0;

double initial_step(Rhs& rhs, double t0, const std::vector<double>& y0,
                    const std::vector<double>& f0, double t_end,
                    const IntegratorConfig& cfg) {
    const std::size_t n = y0.size();
    double d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.abs_tol + cfg.rel_tol * std::fabs(y0[i]);
        d0 += (y0[i] / sk) * (y0[i] / sk);
        d1 += (f0[i] / sk) * (f0[i] / sk);
    }
    d0 = std::sqrt(d0 / n);
    d1 = std::sqrt(d1 / n);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
    h0 = std::min(h0, t_end - t0);
    std::vector<double> y1(n), f1(n);
    for (std::size_t i = 0; i < n; ++i) y1[i] = y0[i] + h0 * f0[i];
    rhs(t0 + h0, y1, f1);
    double d2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double sk = cfg.abs_tol + cfg.rel_tol * std::fabs(y0[i]);
        d2 += ((f1[i] - f0[i]) / sk) * ((f1[i] - f0[i]) / sk);
    }
    d2 = std::sqrt(d2 / n) / h0;
    double h1 = (std::max(d1, d2) <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                            : std::pow(0.01 / std::max(d1, d2), 0.2);
    return std::min({100 * h0, h1, t_end - t0});
}

State state_from(double t, const std::vector<double>& y, int dim, int m) {
    State s;
    s.t = t;
    s.q.assign(y.begin(), y.begin() + dim);
    s.v.assign(y.begin() + dim, y.begin() + 2 * dim);
    s.aux.assign(y.begin() + 2 * dim, y.begin() + 2 * dim + m);
    return s;
}

double radius_of(const std::vector<double>& y, int dim) {
    double r2 = 0;
    for (int i = 0; i < dim; ++i) r2 += y[i] * y[i];
    return std::sqrt(r2);
}

}  // namespace

std::vector<AuxChannel> collect_aux_channels(const std::vector<Expr>& roots,
                                             const std::vector<AuxChannel>& overrides) {
    std::map<std::string, Expr> over, rate;
    for (const auto& o : overrides) over.emplace(o.name, o.rate);
    SymId tid = time_symbol().sym_id();
    std::vector<Expr> work = roots;
    while (!work.empty()) {
        Expr e = work.back();
        work.pop_back();
        for (const Expr& fnode : opaque_functions(e)) {
            const std::string& nm = fnode.fn_name();
            if (rate.count(nm)) continue;
            Expr r;
            if (auto it = over.find(nm); it != over.end()) {
                r = it->second;
            } else {
                const auto& rules = fnode.fn_def()->rules;
                auto rit = std::find_if(rules.begin(), rules.end(),
                                        [&](const auto& p) { return p.first == tid; });
                if (rit == rules.end())
                    throw Error("opaque function '" + nm +
                                "' has no time rule and no override; the integrator "
                                "cannot advance it");
                r = rit->second;
            }
            rate.emplace(nm, r);
            work.push_back(r);
        }
    }
    std::vector<AuxChannel> out;
    for (auto& [n, r] : rate) out.push_back({n, r});
    return out;
}

FieldSpec make_field(const DynSystem& sys, const std::vector<Expr>& observables,
                     const std::vector<AuxChannel>& overrides) {
    FieldSpec f;
    f.dim = 3;
    Vec3E a = sys.acceleration();
    f.accel = {a[0], a[1], a[2]};
    std::vector<Expr> roots(f.accel.begin(), f.accel.end());
    roots.insert(roots.end(), observables.begin(), observables.end());
    f.aux = collect_aux_channels(roots, overrides);
    return f;
}

FieldSpec make_field_1d(const Expr& accel_x, const std::vector<Expr>& observables,
                        const std::vector<AuxChannel>& overrides) {
    FieldSpec f;
    f.dim = 1;
    f.accel[0] = accel_x;
    std::vector<Expr> roots{accel_x};
    roots.insert(roots.end(), observables.begin(), observables.end());
    f.aux = collect_aux_channels(roots, overrides);
    return f;
}

Trajectory integrate(const FieldSpec& field, const State& s0, double t_end,
                     const IntegratorConfig& cfg) {
    CompiledField cf = compile_field(field);
    const int d = cf.dim, m = cf.m;
    const std::size_t n = static_cast<std::size_t>(2 * d + m);
    if (static_cast<int>(s0.q.size()) != d || static_cast<int>(s0.v.size()) != d)
        throw Error("initial state dimension mismatch");
    if (!s0.aux.empty() && static_cast<int>(s0.aux.size()) != m)
        throw Error("initial state carries " + std::to_string(s0.aux.size()) +
                    " channel values; the field has " + std::to_string(m));
    if (!(t_end > s0.t)) throw Error("t_end must exceed the initial time");
    if (!(cfg.rel_tol > 0) || !(cfg.abs_tol > 0)) throw Error("tolerances must be positive");
    for (std::size_t i = 0; i < cfg.sample_times.size(); ++i) {
        double ts = cfg.sample_times[i];
        if (ts <= s0.t || ts > t_end || (i && ts <= cfg.sample_times[i - 1]))
            throw Error("sample times must be ascending and lie inside (t0, t_end]");
    }

    std::vector<double> y(n, 0.0);
    for (int i = 0; i < d; ++i) y[i] = s0.q[i];
    for (int i = 0; i < d; ++i) y[d + i] = s0.v[i];
    for (std::size_t j = 0; j < s0.aux.size(); ++j) y[2 * d + j] = s0.aux[j];

    Trajectory out;
    out.dim = d;
    for (const auto& ch : field.aux) out.aux_names.push_back(ch.name);
    out.rel_tol = cfg.rel_tol;
    out.abs_tol = cfg.abs_tol;
    out.field_print = accel_print(field);
    out.states.push_back(state_from(s0.t, y, d, m));

    if (cfg.singular_radius > 0 && radius_of(y, d) < cfg.singular_radius)
        throw Error("initial state lies inside r < " + fmt17(cfg.singular_radius));

    Rhs rhs(cf);
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n);
    std::vector<double> yt(n), ynew(n), rc1, rc2, rc3, rc4, rc5;
    double t = s0.t;
    rhs(t, y, k1);
    double h = initial_step(rhs, t, y, k1, t_end, cfg);

    constexpr double kBeta = 0.04, kExpo = 0.2 - 0.75 * kBeta;
    double facold = 1e-4;
    bool prev_rejected = false;
    std::size_t next_sample = 0;
    long total = 0;

    while (t < t_end) {
        if (++total > cfg.max_steps)
            throw Error("step budget exhausted at t = " + fmt17(t));
        if (h < 1e-13 * std::max(1.0, std::fabs(t)))
            throw Error("step size underflow at t = " + fmt17(t) +
                        " (approaching a singularity?)");
        bool last = t + h >= t_end;
        double hs = last ? t_end - t : h;

        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * A21 * k1[i];
        rhs(t + C2 * hs, yt, k2);
        for (std::size_t i = 0; i < n; ++i) yt[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        rhs(t + C3 * hs, yt, k3);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        rhs(t + C4 * hs, yt, k4);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        rhs(t + C5 * hs, yt, k5);
        for (std::size_t i = 0; i < n; ++i)
            yt[i] = y[i] +
                    hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        rhs(t + hs, yt, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] +
                      hs * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        rhs(t + hs, ynew, k7);

        double err = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] +
                             E6 * k6[i] + E7 * k7[i]);
            double sk = cfg.abs_tol +
                        cfg.rel_tol * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
            err += (e / sk) * (e / sk);
        }
        err = std::sqrt(err / n);

        double fac = std::pow(err, kExpo) / std::pow(facold, kBeta);
        if (err > 1.0) {
            ++out.rejected;
            h = hs * std::max(0.2, std::min(1.0, cfg.safety / fac));
            prev_rejected = true;
            continue;
        }

        // dense output inside (t, t + hs]
        double t_new = last ? t_end : t + hs;
        if (!cfg.sample_times.empty() && next_sample < cfg.sample_times.size() &&
            cfg.sample_times[next_sample] <= t_new) {
            rc1 = y;
            rc2.resize(n);
            rc3.resize(n);
            rc4.resize(n);
            rc5.resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                double ydiff = ynew[i] - y[i];
                double bspl = hs * k1[i] - ydiff;
                rc2[i] = ydiff;
                rc3[i] = bspl;
                rc4[i] = ydiff - hs * k7[i] - bspl;
                rc5[i] = hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] +
                               D6 * k6[i] + D7 * k7[i]);
            }
            while (next_sample < cfg.sample_times.size() &&
                   cfg.sample_times[next_sample] <= t_new) {
                double ts = cfg.sample_times[next_sample];
                double th = (ts - t) / hs, th1 = 1.0 - th;
                for (std::size_t i = 0; i < n; ++i)
                    yt[i] = rc1[i] +
                            th * (rc2[i] + th1 * (rc3[i] + th * (rc4[i] + th1 * rc5[i])));
                out.states.push_back(state_from(ts, yt, d, m));
                ++next_sample;
            }
        }

        t = t_new;
        y.swap(ynew);
        k1.swap(k7);  // first-same-as-last
        ++out.steps;
        if (cfg.sample_times.empty()) out.states.push_back(state_from(t, y, d, m));
        if (cfg.singular_radius > 0 && radius_of(y, d) < cfg.singular_radius)
            throw Error("trajectory entered r < " + fmt17(cfg.singular_radius) +
                        " at t = " + fmt17(t));

        facold = std::max(err, 1e-4);
        double scale = std::min(cfg.max_growth, std::max(0.2, cfg.safety / fac));
        if (prev_rejected) scale = std::min(scale, 1.0);
        prev_rejected = false;
        h = hs * scale;
    }
    return out;
}

Trajectory integrate(const DynSystem& sys, const State& s0, double t_end,
                     const IntegratorConfig& cfg) {
    return integrate(make_field(sys), s0, t_end, cfg);
}

DriftResult drift(const Expr& I, const Trajectory& traj) {
    if (traj.states.empty()) throw Error("drift needs a non-empty trajectory");
    Tape tape = Tape::compile({I});
    const std::size_t N = traj.states.size();
    const int d = traj.dim;
    std::vector<std::vector<double>> cols(tape.inputs().size(), std::vector<double>(N));
    std::vector<const double*> in_ptrs;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string& in = tape.inputs()[c];
        int kind = -1, idx = 0;
        if (in == "t") kind = 0;
        for (int i = 0; i < d && kind < 0; ++i) {
            if (in == kCoordNames[i]) kind = 1, idx = i;
            else if (in == kVelNames[i]) kind = 2, idx = i;
        }
        if (kind < 0 && in.rfind("fn:", 0) == 0) {
            std::string nm = in.substr(3);
            auto it = std::find(traj.aux_names.begin(), traj.aux_names.end(), nm);
            if (it == traj.aux_names.end())
                throw Error("the integral needs channel '" + nm +
                            "', which the trajectory does not carry");
            kind = 3, idx = static_cast<int>(it - traj.aux_names.begin());
        }
        if (kind < 0)
            throw Error("the integral references '" + in +
                        "', which the trajectory does not provide");
        for (std::size_t s = 0; s < N; ++s) {
            const State& st = traj.states[s];
            cols[c][s] = kind == 0   ? st.t
                         : kind == 1 ? st.q[idx]
                         : kind == 2 ? st.v[idx]
                                     : st.aux[idx];
        }
        in_ptrs.push_back(cols[c].data());
    }
    std::vector<double> vals(N);
    double* outp = vals.data();
    tape.run(in_ptrs.data(), &outp, N);
    if (!std::isfinite(vals[0]))
        throw Error("the integral is not finite at the initial state");
    DriftResult r;
    double i0 = vals[0], denom = 1.0 + std::fabs(i0);
    for (std::size_t s = 1; s < N; ++s) {
        if (!std::isfinite(vals[s]))
            throw Error("the integral is not finite at t = " + fmt17(traj.states[s].t));
        double a = std::fabs(vals[s] - i0);
        r.max_abs = std::max(r.max_abs, a);
    }
    r.max_rel = r.max_abs / denom;
    return r;
}

DriftResult drift(const FirstIntegral& I, const Trajectory& traj) {
    FieldSpec f = make_field(I.family);
    if (accel_print(f) != traj.field_print)
        throw Error("integral '" + I.name +
                    "' belongs to a different system than this trajectory");
    return drift(I.expr, traj);
}

std::array<Expr, 3> oscillator_solution(const OscillatorSpec& spec,
                                        const std::array<Expr, 3>& I41,
                                        const std::array<Expr, 3>& I42) {
    if (!(spec.c0 > 0)) throw DomainError("the phase-carrying solution needs c0 > 0");
    if (spec.form == OscillatorSpec::Form::G)
        throw DomainError("the linear-profile form carries no phase angle");
    Rational half(1, 2);
    // (2/c0)^(1/2) written as (c0/2)^(-1/2) so it shares its root auxiliary
    // with the prefactors inside the linear integrals.
    Expr pref = Expr::pow(Expr::num(spec.c0 * half), -half) * Expr::pow(spec.f, half);
    std::array<Expr, 3> q;
    for (int i = 0; i < 3; ++i)
        q[i] = pref * (I41[i] * Expr::sin(spec.theta) - I42[i] * Expr::cos(spec.theta));
    return q;
}

OrbitSolution kepler_orbit(const Rational& b0, const Rational& b1, const Rational& k,
                           const State& s0, double t_end, const IntegratorConfig& cfg_in) {
    if (s0.q.size() != 3 || s0.v.size() != 3)
        throw Error("the orbit solver expects a three-dimensional state");
    if (s0.q[2] != 0.0 || s0.v[2] != 0.0)
        throw DomainError("initial data must lie in the z = 0 plane with vz = 0");
    if (k == 0) throw DomainError("k must be nonzero");
    double b0d = to_double(b0), b1d = to_double(b1), kd = to_double(k);
    double P0 = b0d + b1d * s0.t, P1 = b0d + b1d * t_end;
    if (P0 == 0.0 || P1 == 0.0 || (P0 > 0) != (P1 > 0))
        throw DomainError("b0 + b1 t crosses zero inside the integration interval");

    double x = s0.q[0], y = s0.q[1], vx = s0.v[0], vy = s0.v[1];
    double L3 = x * vy - y * vx;
    if (std::fabs(L3) < 1e-12) throw DomainError("degenerate radial orbit: L3 = 0");
    double r0 = std::hypot(x, y);
    double v2 = vx * vx + vy * vy, qv = x * vx + y * vy;

    OrbitSolution sol;
    sol.b0 = b0;
    sol.b1 = b1;
    sol.k = k;
    sol.L3 = L3;
    sol.E2 = P0 * P0 * (v2 / 2 - kd / (r0 * P0)) - b1d * P0 * qv +
             b1d * b1d * r0 * r0 / 2;
    sol.A1 = P0 * vy * L3 - b1d * y * L3 - kd * x / r0;
    sol.A2 = -P0 * vx * L3 + b1d * x * L3 - kd * y / r0;
    sol.k1 = sol.A1 / kd;
    sol.k2 = sol.A2 / kd;
    sol.alpha = std::hypot(sol.k1, sol.k2);
    sol.beta = std::atan2(sol.k2, sol.k1);

    Expr T = time_symbol(), th = Expr::sym("theta");
    Expr P = Expr::num(b0) + Expr::num(b1) * T;
    sol.r_closed = dnum(L3 * L3) * P *
                   Expr::pow(Expr::num(k) * (Expr::num(1) + dnum(sol.k1) * Expr::cos(th) +
                                             dnum(sol.k2) * Expr::sin(th)),
                             -1);

    DynSystem sys = DynSystem::power_law(Expr::num(k) * Expr::pow(P, -1), Rational(1));
    IntegratorConfig cfg = cfg_in;
    if (cfg.singular_radius == 0) cfg.singular_radius = 1e-3;
    sol.traj = integrate(sys, s0, t_end, cfg);

    Binding b;
    double prev_theta = std::atan2(y, x);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    for (const State& st : sol.traj.states) {
        double r = std::hypot(st.q[0], st.q[1]);
        double theta = std::atan2(st.q[1], st.q[0]);
        while (theta - prev_theta > kTwoPi / 2) theta -= kTwoPi;
        while (theta - prev_theta < -kTwoPi / 2) theta += kTwoPi;
        prev_theta = theta;
        b.set(T, st.t);
        b.set(th, theta);
        double rc = evaluate_double(sol.r_closed, b);
        sol.max_radial_rel_err =
            std::max(sol.max_radial_rel_err, std::fabs(rc - r) / r);
        double l_inst = st.q[0] * st.v[1] - st.q[1] * st.v[0];  // = r^2 thetadot
        sol.max_angmom_err = std::max(sol.max_angmom_err, std::fabs(l_inst - L3));
    }
    return sol;
}

PolarTrajectory polar_reduction(const Trajectory& traj, double l_min) {
    if (traj.dim != 3) throw Error("polar reduction expects a three-dimensional trajectory");
    if (traj.states.empty()) throw Error("polar reduction needs a non-empty trajectory");
    const State& s = traj.states[0];
    double L[3] = {s.q[1] * s.v[2] - s.q[2] * s.v[1], s.q[2] * s.v[0] - s.q[0] * s.v[2],
                   s.q[0] * s.v[1] - s.q[1] * s.v[0]};
    double Ln = std::sqrt(L[0] * L[0] + L[1] * L[1] + L[2] * L[2]);
    if (Ln < l_min)
        throw DomainError("angular momentum below threshold; the orbital plane is undetermined");
    double lx = L[0] / Ln, ly = L[1] / Ln, lz = L[2] / Ln;

    PolarTrajectory out;
    // rotation taking L/|L| onto +z: R = I + [v]x + [v]x^2 (1-c)/|v|^2 with
    // v = l x z = (ly, -lx, 0), c = lz; v = 0 needs the antipodal special case
    double ax = ly, ay = -lx, c = lz, s2 = ax * ax + ay * ay;
    double R[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    if (s2 < 1e-30) {
        if (c < 0) {
            R[1][1] = -1;
            R[2][2] = -1;
        }
    } else {
        double K[3][3] = {{0, 0, ay}, {0, 0, -ax}, {-ay, ax, 0}};
        double K2[3][3];
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                K2[i][j] = K[i][0] * K[0][j] + K[i][1] * K[1][j] + K[i][2] * K[2][j];
        double w = (1 - c) / s2;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) R[i][j] += K[i][j] + w * K2[i][j];
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.rotation[i][j] = R[i][j];

    constexpr double kTwoPi = 6.283185307179586476925286766559;
    bool first = true;
    double prev_theta = 0;
    for (const State& st : traj.states) {
        double q[3], v[3];
        for (int i = 0; i < 3; ++i) {
            q[i] = R[i][0] * st.q[0] + R[i][1] * st.q[1] + R[i][2] * st.q[2];
            v[i] = R[i][0] * st.v[0] + R[i][1] * st.v[1] + R[i][2] * st.v[2];
        }
        PolarState p;
        p.t = st.t;
        p.r = std::hypot(q[0], q[1]);
        p.theta = std::atan2(q[1], q[0]);
        if (!first) {
            while (p.theta - prev_theta > kTwoPi / 2) p.theta -= kTwoPi;
            while (p.theta - prev_theta < -kTwoPi / 2) p.theta += kTwoPi;
        }
        first = false;
        prev_theta = p.theta;
        p.rdot = (q[0] * v[0] + q[1] * v[1]) / p.r;
        p.thetadot = (q[0] * v[1] - q[1] * v[0]) / (p.r * p.r);
        out.states.push_back(p);
    }
    return out;
}

std::string trajectory_csv(const Trajectory& traj) {
    std::string s = "t";
    for (int i = 0; i < traj.dim; ++i) s += std::string(",") + kCoordNames[i];
    for (int i = 0; i < traj.dim; ++i) s += std::string(",") + kVelNames[i];
    for (const auto& nm : traj.aux_names) s += "," + nm;
    s += "\n";
    for (const State& st : traj.states) {
        s += fmt17(st.t);
        for (int i = 0; i < traj.dim; ++i) s += "," + fmt17(st.q[i]);
        for (int i = 0; i < traj.dim; ++i) s += "," + fmt17(st.v[i]);
        for (double a : st.aux) s += "," + fmt17(a);
        s += "\n";
    }
    return s;
}

std::string drift_report_json(const std::string& integral, const std::string& family,
                              const DriftResult& d, double rel_tol, double abs_tol,
                              double t0, double t1) {
    return "{\"integral\": \"" + integral + "\", \"family\": \"" + family +
           "\", \"max_abs\": " + fmt17(d.max_abs) + ", \"max_rel\": " + fmt17(d.max_rel) +
           ", \"tol\": {\"rel\": " + fmt17(rel_tol) + ", \"abs\": " + fmt17(abs_tol) +
           "}, \"interval\": [" + fmt17(t0) + ", " + fmt17(t1) + "]}";
}

}  // namespace qfi
