#include "qfi/dampxform.hpp"

#include <cmath>
#include <cstdio>

#include "qfi/exprio.hpp"
#include "qfi/zerotest.hpp"

namespace qfi {

namespace {

const Expr& tsym() {
    static const Expr t = time_symbol();
    return t;
}

bool exactly_zero(const Expr& e) {
    ZeroTestOptions o;
    o.strategy = ZeroStrategy::ExactOnly;
    return test_zero(e, o).verdict == Verdict::Zero;
}

std::string fnv_digest(const std::string& s) {
    unsigned long long h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", h);
    return buf;
}

// Nearest small rational of a double (continued fractions, denominators up
// to 10^6). Used only as a guess; every extraction below re-checks the
// candidate exactly before trusting it.
std::optional<Rational> guess_rational(double x) {
    if (!std::isfinite(x)) return std::nullopt;
    const long maxden = 1000000;
    double v = x;
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    for (int i = 0; i < 64; ++i) {
        double fl = std::floor(v);
        if (fl > 9e17 || fl < -9e17) return std::nullopt;
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > maxden) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = v - fl;
        if (rem < 1e-12) break;
        v = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    Rational r(p1, q1);
    if (std::abs(to_double(r) - x) > 1e-9 * (1.0 + std::abs(x)))
        return std::nullopt;
    return r;
}

// Reads `e` as an exact rational constant, or returns nothing.
std::optional<Rational> rational_const(const Expr& e) {
    if (e.is_num()) return e.value();
    if (!opaque_functions(e).empty()) return std::nullopt;
    Binding b;
    b.set("t", 1.378642);
    double v;
    try {
        v = evaluate_double(e, b);
    } catch (const Error&) {
        return std::nullopt;
    }
    auto r = guess_rational(v);
    if (!r) return std::nullopt;
    if (!exactly_zero(e - Expr::num(*r))) return std::nullopt;
    return r;
}

bool depends_only_on_t(const Expr& e) {
    if (!opaque_functions(e).empty()) return false;
    for (const auto& s : free_symbols(e))
        if (!structurally_equal(s, tsym())) return false;
    return true;
}

Expr quadratic_weight(const Expr& s, const Rational& c1, const Rational& c2,
                      const Rational& c3) {
    return Expr::num(c1) + Expr::num(c2) * s + Expr::num(c3) * s * s;
}

}  // namespace

Expr s_sym() {
    static const Expr s = Expr::sym("s");
    return s;
}

Expr damped_flow_derivative(const Expr& F, const Expr& omega,
                            const Rational& mu, const Expr& phi) {
    const Expr& x = coords()[0];
    const Expr& vx = velocities()[0];
    Vec3E accel;
    accel[0] = -(omega * Expr::pow(x, mu)) + phi * vx;
    return flow_derivative(F, accel);
}

Expr Reparam::omega_from_bar(const Expr& omega_bar) const {
    return substitute(omega_bar, s_sym(), s_of_t) * scale * scale;
}

Expr Reparam::omega_bar_from(const Expr& omega) const {
    if (!t_of_s)
        throw Error(
            "the inverse map t(s) is unavailable for this damping "
            "coefficient; only the t-space direction is defined");
    Expr d = substitute(dt_ds, tsym(), *t_of_s);
    return substitute(omega, tsym(), *t_of_s) * d * d;
}

Reparam reparameterize(const Expr& phi) {
    const Expr& t = tsym();
    Reparam r;
    r.phi = phi;

    if (depends_only_on_t(phi)) {
        if (phi.is_zero() || exactly_zero(phi)) {
            r.scale = Expr::num(1);
            r.s_of_t = t;
            r.dt_ds = Expr::num(1);
            r.closed_form = true;
            r.t_of_s = s_sym();
            return r;
        }
        if (exactly_zero(differentiate(phi, t))) {
            if (auto c = rational_const(phi)) {
                r.scale = Expr::exp(Expr::num(*c) * t);
                r.s_of_t = r.scale / Expr::num(*c);
                r.dt_ds = Expr::pow(r.scale, Rational(-1));
                r.closed_form = true;
                r.t_of_s =
                    Expr::log(Expr::num(*c) * s_sym()) / Expr::num(*c);
                return r;
            }
        } else {
            // phi = 1/(u0 + u1·t)? Then 1/phi is affine in t. The log
            // argument is normalized monic, t + u0/u1, so that phi = -k/t
            // comes out as scale = t^{-k} with no stray constant factor.
            Expr u = Expr::pow(phi, Rational(-1));
            Expr du = differentiate(u, t);
            if (exactly_zero(differentiate(du, t))) {
                auto u1 = rational_const(du);
                if (u1 && *u1 != 0) {
                    auto u0 = rational_const(u - Expr::num(*u1) * t);
                    if (u0) {
                        Rational shift = *u0 / *u1;
                        Rational kappa = Rational(1) / *u1;
                        Expr lin = t + Expr::num(shift);
                        r.scale = Expr::pow(lin, kappa);
                        r.dt_ds = Expr::pow(lin, -kappa);
                        if (kappa == -1) {
                            r.s_of_t = Expr::log(lin);
                            r.t_of_s =
                                Expr::exp(s_sym()) - Expr::num(shift);
                        } else {
                            Rational k1 = kappa + 1;
                            r.s_of_t = Expr::pow(lin, k1) / Expr::num(k1);
                            r.t_of_s =
                                Expr::pow(Expr::num(k1) * s_sym(),
                                          Rational(1) / k1) -
                                Expr::num(shift);
                        }
                        r.closed_form = true;
                        return r;
                    }
                }
            }
        }
    }

    std::string tag = fnv_digest(print_expr(phi));
    Expr e = Expr::fn("expphi_" + tag);
    e.bind_rule(t, phi * e);
    e.freeze_fn();
    Expr s = Expr::fn("sparam_" + tag);
    s.bind_rule(t, e);
    s.freeze_fn();
    r.scale = e;
    r.s_of_t = s;
    r.dt_ds = Expr::pow(e, Rational(-1));
    r.closed_form = false;
    return r;
}

NonlinResult nonlin_qfi_general(const NonlinFamily& fam) {
    if (fam.mu == -1)
        throw DomainError(
            "mu = -1 falls outside the power family (logarithmic branch)");
    if (fam.c1 == 0 && fam.c2 == 0 && fam.c3 == 0)
        throw DomainError(
            "the quadratic weight needs (c1,c2,c3) not all zero");

    Reparam rep = reparameterize(fam.phi);
    const Expr& x = coords()[0];
    const Expr& vx = velocities()[0];
    Expr S = rep.s_of_t;
    Expr K = quadratic_weight(S, fam.c1, fam.c2, fam.c3);
    Expr Kp = Expr::num(fam.c2) + Expr::num(2 * fam.c3) * S;
    Expr xp = vx * rep.dt_ds;  // dx/ds

    NonlinResult out;
    Rational mu = fam.mu;
    Rational two_over = Rational(2) / (mu + 1);
    out.omega = Expr::pow(K, -(mu + 3) / 2) * rep.scale * rep.scale;
    out.I = K * xp * xp - Kp * x * xp +
            two_over * Expr::pow(K, -(mu + 1) / 2) * Expr::pow(x, mu + 1) +
            Expr::num(fam.c3) * x * x;
    return out;
}

NonlinResult nonlin_qfi_mu0(const NonlinFamily& fam) {
    if (fam.mu != 0)
        throw DomainError("the uniform-force constructor requires mu = 0");
    if (!fam.omega_bar)
        throw DomainError(
            "mu = 0 needs the frequency profile omega_bar(s)");

    const Expr& s = s_sym();
    Expr wbar = *fam.omega_bar;
    Expr b1 = fam.b1 ? *fam.b1 : Expr();
    Expr K = quadratic_weight(s, fam.c1, fam.c2, fam.c3);
    Expr Kp = differentiate(K, s);

    Expr b1p = differentiate(b1, s);
    Expr resid = differentiate(b1p, s) - 2 * differentiate(wbar, s) * K -
                 3 * wbar * Kp;
    if (test_zero(resid).verdict != Verdict::Zero)
        throw Error(
            "uniform-force auxiliary condition violated: the linear "
            "coefficient must satisfy b1''(s) = 2*omega_bar'(s)*K11(s) + "
            "3*omega_bar(s)*K11'(s)");

    Reparam rep = reparameterize(fam.phi);
    const Expr& x = coords()[0];
    const Expr& vx = velocities()[0];
    Expr S = rep.s_of_t;
    Expr KS = substitute(K, s, S);
    Expr KpS = substitute(Kp, s, S);
    Expr wbarS = substitute(wbar, s, S);
    Expr xp = vx * rep.dt_ds;

    NonlinResult out;
    out.omega = wbarS * rep.scale * rep.scale;
    out.I = KS * xp * xp - KpS * x * xp + Expr::num(fam.c3) * x * x +
            2 * wbarS * KS * x;
    if (!b1.is_zero()) {
        // ∫ b1·omega_bar ds as an opaque quadrature node: additive, so its
        // derivative rule is all the conservation identity ever consumes.
        Expr b1S = substitute(b1, s, S);
        Expr q = Expr::fn(
            "qint_" + fnv_digest(print_expr(b1) + "|" + print_expr(wbar) +
                                 "|" + print_expr(fam.phi)));
        q.bind_rule(tsym(), b1S * out.omega * rep.dt_ds);
        q.freeze_fn();
        out.I = out.I + b1S * xp - substitute(b1p, s, S) * x + q;
    }
    return out;
}

Mu1Solution nonlin_qfi_mu1(const Expr& rho, const Expr& phi) {
    if (rho.is_zero())
        throw DomainError("mu = 1 needs a nonvanishing profile rho(t)");
    const Expr& t = tsym();
    Reparam rep = reparameterize(phi);

    Expr rd = differentiate(rho, t);
    Expr rdd = differentiate(rd, t);
    Expr rinv = Expr::pow(rho, Rational(-1));

    Mu1Solution out;
    out.omega = (phi * rd - rdd) * rinv +
                Expr::pow(rho, Rational(-4)) * rep.scale * rep.scale;

    Expr rate = rinv * rinv * rep.scale;  // dθ/dt
    if (rate.is_num()) {
        out.theta = Expr::num(rate.value()) * t;
    } else {
        Expr th = Expr::fn("nltheta_" + fnv_digest(print_expr(rho) + "|" +
                                                   print_expr(phi)));
        th.bind_rule(t, rate);
        th.freeze_fn();
        out.theta = th;
    }
    out.solution = rho * (Expr::sym("A") * Expr::sin(out.theta) +
                          Expr::sym("B") * Expr::cos(out.theta));
    return out;
}

NonlinResult nonlin_qfi_mu2(const NonlinFamily& fam) {
    if (fam.mu != 2)
        throw DomainError("this constructor covers the mu = 2 case only");
    if (!fam.K11)
        throw DomainError("mu = 2 needs a candidate weight K11(s)");

    const Expr& s = s_sym();
    Expr K = *fam.K11;
    Expr Kp = differentiate(K, s);
    Expr Kpp = differentiate(Kp, s);
    Expr force = Expr::num(fam.c4) + Expr::num(fam.c5) * s;
    Expr resid = differentiate(Kpp, s) -
                 2 * force * Expr::pow(K, Rational(-5, 2));
    if (test_zero(resid).verdict != Verdict::Zero)
        throw Error(
            "cubic-case auxiliary condition violated: the weight must "
            "satisfy K11'''(s) = 2*(c4 + c5*s)*K11(s)^(-5/2)");

    Reparam rep = reparameterize(fam.phi);
    const Expr& x = coords()[0];
    const Expr& vx = velocities()[0];
    Expr S = rep.s_of_t;
    Expr KS = substitute(K, s, S);
    Expr xp = vx * rep.dt_ds;

    NonlinResult out;
    out.omega = Expr::pow(KS, Rational(-5, 2)) * rep.scale * rep.scale;
    out.I = KS * xp * xp - substitute(Kp, s, S) * x * xp +
            substitute(force, s, S) * xp +
            Rational(2, 3) * Expr::pow(KS, Rational(-3, 2)) * x * x * x +
            Rational(1, 2) * substitute(Kpp, s, S) * x * x -
            Expr::num(fam.c5) * x;
    return out;
}

LaneEmdenResult lane_emden(const LaneEmdenCase& c) {
    if (c.mu == -1)
        throw DomainError(
            "mu = -1 falls outside the power family (logarithmic branch)");
    if (c.c1 == 0 && c.c2 == 0 && c.c3 == 0)
        throw DomainError(
            "the quadratic weight needs (c1,c2,c3) not all zero");

    const Expr& t = tsym();
    const Expr& x = coords()[0];
    const Expr& vx = velocities()[0];
    Rational k = c.k, mu = c.mu;
    Rational inv_mu1 = Rational(1) / (mu + 1);
    bool logb = (k == 1);

    LaneEmdenResult out;
    out.M = logb ? Expr::log(t)
                 : Expr::pow(t, Rational(1) - k) / Expr::num(Rational(1) - k);

    Expr xmu1 = Expr::pow(x, mu + 1);
    Rational half = Rational(1, 2);

    if (c.c2 == 0 && c.c3 == 0) {
        Expr A = Expr::pow(Expr::num(c.c1), -(mu + 3) / 2);
        out.omega = A * Expr::pow(t, -2 * k);
        out.I = half * Expr::pow(t, 2 * k) * vx * vx + inv_mu1 * A * xmu1;
        out.label = logb ? "Case 5" : "Case 2";
    } else if (c.c1 == 0 && c.c3 == 0) {
        if (logb) {
            Expr A = Expr::pow(Expr::num(c.c2), -(mu + 3) / 2);
            Expr L = out.M;
            out.omega =
                A * Expr::pow(t, Rational(-2)) * Expr::pow(L, -(mu + 3) / 2);
            out.I = half * t * t * L * vx * vx - half * t * x * vx +
                    inv_mu1 * A * Expr::pow(L, -(mu + 1) / 2) * xmu1;
            out.label = "Case 6";
        } else {
            Expr A = Expr::pow(Expr::num(c.c2 / (Rational(1) - k)),
                               -(mu + 3) / 2);
            Rational ex = (k * mu - k - mu - 3) / 2;
            out.omega = A * Expr::pow(t, ex);
            out.I = Expr::pow(t, k + 1) * vx * vx +
                    Expr::num(k - 1) * Expr::pow(t, k) * x * vx +
                    Rational(2) * inv_mu1 * A *
                        Expr::pow(t, (mu + 1) * (k - 1) / 2) * xmu1;
            out.label = (mu != 1 && k == (mu + 3) / (mu - 1))
                            ? "Case 1 (first subcase)"
                            : "Case 3";
        }
    } else if (c.c1 == 0 && c.c2 == 0) {
        if (logb) {
            Expr A = Expr::pow(Expr::num(c.c3), -(mu + 3) / 2);
            Expr L = out.M;
            out.omega =
                A * Expr::pow(t, Rational(-2)) * Expr::pow(L, -(mu + 3));
            out.I = half * t * t * L * L * vx * vx - t * L * x * vx +
                    inv_mu1 * A * Expr::pow(L, -(mu + 1)) * xmu1 +
                    half * x * x;
            out.label = "Case 7";
        } else {
            Expr A = Expr::pow(Expr::num(c.c3), -(mu + 3) / 2) *
                     Expr::pow(Expr::num(Rational(1) - k), mu + 3);
            out.omega = A * Expr::pow(t, k * mu + k - mu - 3);
            out.I = half * t * t * vx * vx +
                    Expr::num(k - 1) * t * x * vx +
                    inv_mu1 * A * Expr::pow(t, (mu + 1) * (k - 1)) * xmu1 +
                    Expr::num((k - 1) * (k - 1)) * half * x * x;
            out.label = (k == (mu + 3) / (mu + 1)) ? "Case 1 (second subcase)"
                                                   : "Case 4";
        }
    } else {
        Expr W = quadratic_weight(out.M, c.c1, c.c2, c.c3);
        out.omega = Expr::pow(t, -2 * k) * Expr::pow(W, -(mu + 3) / 2);
        out.I = Expr::pow(t, 2 * k) * W * vx * vx -
                Expr::pow(t, k) *
                    (Expr::num(c.c2) + Expr::num(2 * c.c3) * out.M) * x * vx +
                Rational(2) * inv_mu1 * Expr::pow(W, -(mu + 1) / 2) * xmu1 +
                Expr::num(c.c3) * x * x;
        out.label = "general";
    }
    return out;
}

}  // namespace qfi
