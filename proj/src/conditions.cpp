#include "qfi/conditions.hpp"

#include <algorithm>

#include "qfi/linearize.hpp"

namespace qfi {

Expr time_symbol() {
    static const Expr t = Expr::sym("t");
    return t;
}

const std::array<Expr, 3>& velocities() {
    static const std::array<Expr, 3> v{Expr::sym("vx"), Expr::sym("vy"),
                                       Expr::sym("vz")};
    return v;
}

std::vector<Expr> opaque_chain(const std::string& name, unsigned depth) {
    std::vector<Expr> fs;
    std::string n = name;
    for (unsigned i = 0; i <= depth; ++i) {
        fs.push_back(Expr::fn(n));
        n += i == 0 ? "_d" : "d";
    }
    for (unsigned i = 0; i < depth; ++i) fs[i].bind_rule(time_symbol(), fs[i + 1]);
    for (auto& f : fs) f.freeze_fn();
    return fs;
}

namespace {

Vec3E zero_vec() { return {{Expr(), Expr(), Expr()}}; }

SymMat3E scalar_metric(const Expr& s) {
    SymMat3E m;
    m.at(0, 0) = s;
    m.at(1, 1) = s;
    m.at(2, 2) = s;
    return m;
}

bool expr_zero(const Expr& e, const ZeroTestOptions& opts) {
    return test_zero(e, opts).verdict == Verdict::Zero;
}

bool vec_zero(const Vec3E& v, const ZeroTestOptions& opts) {
    for (const auto& e : v.c)
        if (!expr_zero(e, opts)) return false;
    return true;
}

bool mat_zero(const SymMat3E& m, const ZeroTestOptions& opts) {
    for (const auto& e : m.m)
        if (!expr_zero(e, opts)) return false;
    return true;
}

// S with S_;ab = psi * delta for a constant psi.
std::optional<Rational> gradient_homothety_factor(const Expr& S) {
    return homothety_factor(gradient(S));
}

}  // namespace

DynSystem DynSystem::make(Expr omega, Vec3E Q) {
    if (test_zero(omega).verdict == Verdict::Zero)
        throw Error("dynamical system requires a nonvanishing omega(t)");
    DynSystem s;
    s.omega = std::move(omega);
    s.Q = std::move(Q);
    return s;
}

DynSystem DynSystem::power_law(Expr omega, const Rational& nu) {
    const auto& q = coords();
    Expr radial = Expr::pow(radius_squared(), -(nu + 2) / 2);
    Vec3E Q{{Expr::num(nu) * q[0] * radial, Expr::num(nu) * q[1] * radial,
             Expr::num(nu) * q[2] * radial}};
    DynSystem s = make(std::move(omega), std::move(Q));
    s.nu = nu;
    return s;
}

Vec3E DynSystem::acceleration() const {
    return {{-(omega * Q[0]), -(omega * Q[1]), -(omega * Q[2])}};
}

Expr QFICandidate::phase_space() const {
    const auto& v = velocities();
    Vec3E vv{{v[0], v[1], v[2]}};
    return quad_form(Kab, vv, vv) + dot(Ka, vv) + K;
}

Expr flow_derivative(const Expr& F, const Vec3E& accel) {
    const auto& q = coords();
    const auto& v = velocities();
    Expr d = differentiate(F, time_symbol());
    for (int i = 0; i < 3; ++i)
        d = d + v[i] * differentiate(F, q[i]) +
            accel[i] * differentiate(F, v[i]);
    return d;
}

Expr flow_derivative(const Expr& F, const DynSystem& sys) {
    return flow_derivative(F, sys.acceleration());
}

Expr total_time_derivative(const QFICandidate& c, const DynSystem& sys) {
    return flow_derivative(c.phase_space(), sys);
}

ResidualReport determining_residuals(const QFICandidate& c,
                                     const DynSystem& sys) {
    const Expr t = time_symbol();
    const auto& q = coords();
    const Expr& w = sys.omega;

    ResidualReport r;
    r.cubic = killing_tensor_residual(c.Kab);

    SymMat3E Kab_t;
    for (int i = 0; i < 6; ++i) Kab_t.m[i] = differentiate(c.Kab.m[i], t);
    SymMat3E sg = sym_gradient(c.Ka);
    for (int i = 0; i < 6; ++i) r.quadratic[i] = Kab_t.m[i] + sg.m[i];

    Vec3E KQ = matvec(c.Kab, sys.Q);
    Vec3E Ka_t{{differentiate(c.Ka[0], t), differentiate(c.Ka[1], t),
                differentiate(c.Ka[2], t)}};
    Vec3E gK = gradient(c.K);
    for (int i = 0; i < 3; ++i)
        r.linear[i] = -2 * w * KQ[i] + Ka_t[i] + gK[i];

    Expr KaQ = dot(c.Ka, sys.Q);
    r.scalar = differentiate(c.K, t) - w * KaQ;

    // Integrability of K in t: second t-derivative of Ka plus the gradient of
    // w Ka.Q, corrected by the time dependence of Kab.
    Expr w_t = differentiate(w, t);
    Vec3E gKaQ = gradient(KaQ);
    Vec3E KtQ = matvec(Kab_t, sys.Q);
    for (int i = 0; i < 3; ++i)
        r.time_integrability[i] = differentiate(Ka_t[i], t) + w * gKaQ[i] -
                                  2 * w_t * KQ[i] - 2 * w * KtQ[i];

    // Integrability of K in space: antisymmetrized (weight 1/2) relations
    // between the components of the velocity-linear residual.
    int n = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
            Expr curl_t = Rational(1, 2) *
                          (differentiate(Ka_t[a], q[b]) -
                           differentiate(Ka_t[b], q[a]));
            Expr src = Rational(1, 2) * (differentiate(KQ[a], q[b]) -
                                         differentiate(KQ[b], q[a]));
            r.space_integrability[n++] = curl_t - 2 * w * src;
        }
    return r;
}

std::vector<ConditionVerdict> verify_candidate(const QFICandidate& c,
                                               const DynSystem& sys,
                                               const ZeroTestOptions& opts) {
    ResidualReport r = determining_residuals(c, sys);
    std::vector<ConditionVerdict> out;

    auto group = [&](const char* name, const Expr* first, std::size_t count) {
        ZeroTestResult worst;
        worst.verdict = Verdict::Zero;
        worst.method = "exact";
        for (std::size_t i = 0; i < count; ++i) {
            ZeroTestResult res = test_zero(first[i], opts);
            if (res.verdict != Verdict::Zero) {
                worst = std::move(res);
                break;
            }
            if (res.method == "sampled") worst.method = "sampled";
        }
        out.push_back({name, std::move(worst)});
    };

    group("velocity-cubic", r.cubic.data(), r.cubic.size());
    group("velocity-quadratic", r.quadratic.data(), r.quadratic.size());
    group("velocity-linear", r.linear.data(), r.linear.size());
    group("velocity-free", &r.scalar, 1);
    group("time-integrability", r.time_integrability.data(), 3);
    group("space-integrability", r.space_integrability.data(), 3);
    return out;
}

bool all_zero(const std::vector<ConditionVerdict>& verdicts) {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) {
        return v.result.verdict == Verdict::Zero;
    });
}

/* ------------------------- point-symmetry cases ------------------------- */

namespace {

bool conserved(const QFICandidate& c, const DynSystem& sys,
               const ZeroTestOptions& opts) {
    return expr_zero(total_time_derivative(c, sys), opts);
}

PointSymmetryOutcome fail_point(std::string name) {
    PointSymmetryOutcome out;
    out.violated = std::move(name);
    return out;
}

bool potential_matches(const Expr& V, const DynSystem& sys,
                       const ZeroTestOptions& opts) {
    Vec3E gV = gradient(V);
    for (int i = 0; i < 3; ++i)
        if (!expr_zero(sys.Q[i] - gV[i], opts)) return false;
    return true;
}

}  // namespace

PointSymmetryOutcome point_noether_case(const HomothetyCaseData& d,
                                        const DynSystem& sys) {
    const ZeroTestOptions opts;
    const Expr t = time_symbol();
    const Expr& w = sys.omega;

    auto psi = homothety_factor(d.Ka);
    if (!psi) return fail_point("vector-not-homothetic");
    if (!potential_matches(d.V, sys, opts))
        return fail_point("potential-mismatch");

    Expr N = Expr::num(d.c) - *psi * t;
    Expr w_t = differentiate(w, t);
    if (!expr_zero(2 * w_t * N - Expr::num(d.c1) * w, opts))
        return fail_point("omega-scaling");
    if (!expr_zero(differentiate(d.M, t) - Expr::num(d.c2) * w, opts))
        return fail_point("gauge-rate");
    Expr alg = dot(d.Ka, gradient(d.V)) + (2 * *psi - d.c1) * d.V -
               Expr::num(d.c2);
    if (!expr_zero(alg, opts)) return fail_point("potential-algebra");

    PointSymmetryOutcome out;
    out.integral = {scalar_metric(N), d.Ka, 2 * w * N * d.V + d.M};
    if (!conserved(out.integral, sys, opts)) return fail_point("conservation");
    out.ok = true;
    return out;
}

PointSymmetryOutcome point_noether_case(const GradientCaseData& d,
                                        const DynSystem& sys) {
    const ZeroTestOptions opts;
    const Expr t = time_symbol();
    const Expr& w = sys.omega;

    auto psi = gradient_homothety_factor(d.S);
    if (!psi) return fail_point("not-gradient-homothety");
    if (!potential_matches(d.V, sys, opts))
        return fail_point("potential-mismatch");
    if (!expr_zero(differentiate(d.N, t) - *psi * d.M, opts))
        return fail_point("tensor-rate");

    Expr w_t = differentiate(w, t);
    if (!expr_zero(2 * w_t * d.N - Expr::num(d.d1) * w * d.M, opts))
        return fail_point("omega-scaling");
    Expr M_tt = differentiate(differentiate(d.M, t), t);
    if (!expr_zero(M_tt - Expr::num(d.m) * w * d.M, opts))
        return fail_point("vector-acceleration");
    if (!expr_zero(differentiate(d.Ct, t) - Expr::num(d.k) * w * d.M, opts))
        return fail_point("gauge-rate");
    Expr alg = dot(gradient(d.S), gradient(d.V)) + (2 * *psi + d.d1) * d.V +
               Expr::num(d.m) * d.S + Expr::num(d.k);
    if (!expr_zero(alg, opts)) return fail_point("potential-algebra");

    Vec3E Ka = -d.M * gradient(d.S);
    PointSymmetryOutcome out;
    out.integral = {scalar_metric(d.N), Ka,
                    2 * w * d.N * d.V + differentiate(d.M, t) * d.S + d.Ct};
    if (!conserved(out.integral, sys, opts)) return fail_point("conservation");
    out.ok = true;
    return out;
}

PointSymmetryOutcome point_noether_case(const SelfPotentialCaseData& d,
                                        const DynSystem& sys) {
    const ZeroTestOptions opts;
    const Expr t = time_symbol();
    const Expr& w = sys.omega;

    auto psi = gradient_homothety_factor(d.V);
    if (!psi) return fail_point("not-gradient-homothety");
    if (!potential_matches(d.V, sys, opts))
        return fail_point("potential-mismatch");
    if (!expr_zero(differentiate(d.N, t) - *psi * d.M, opts))
        return fail_point("tensor-rate");

    Expr w_t = differentiate(w, t);
    Expr M_tt = differentiate(differentiate(d.M, t), t);
    if (!expr_zero(M_tt + 2 * w_t * d.N - Expr::num(d.d2) * w * d.M, opts))
        return fail_point("omega-scaling");
    if (!expr_zero(differentiate(d.Ct, t) - Expr::num(d.k) * w * d.M, opts))
        return fail_point("gauge-rate");
    Vec3E gV = gradient(d.V);
    Expr alg = dot(gV, gV) + (2 * *psi + d.d2) * d.V + Expr::num(d.k);
    if (!expr_zero(alg, opts)) return fail_point("potential-algebra");

    PointSymmetryOutcome out;
    out.integral = {scalar_metric(d.N), -d.M * gV,
                    (2 * w * d.N + differentiate(d.M, t)) * d.V + d.Ct};
    if (!conserved(out.integral, sys, opts)) return fail_point("conservation");
    out.ok = true;
    return out;
}

/* --------------- integrals for polynomial omega(t) ---------------------- */

namespace {

CheckOutcome fail_check(std::string name) {
    CheckOutcome out;
    out.violated = std::move(name);
    return out;
}

bool mentions_time(const Expr& e) {
    for (const Expr& s : free_symbols(e))
        if (symbol_name(s.sym_id()) == "t") return true;
    return false;
}

}  // namespace

CheckOutcome time_polynomial_integral_check(const TimePolynomialData& d,
                                            const DynSystem& sys,
                                            const ZeroTestOptions& opts) {
    const unsigned n = d.n, ell = d.ell;
    if (ell < 1 || d.b.size() != ell + 1 || d.b[ell] == 0)
        throw SchemaError("omega polynomial: need degree >= 1 coefficients "
                          "with a nonzero leading term");
    if (d.C.size() != n + 1 || d.L.size() != n + 1)
        throw SchemaError("coefficient sequences must have length n+1");

    const Expr t = time_symbol();
    Expr w;
    for (unsigned r = 0; r <= ell; ++r)
        w = w + Expr::num(d.b[r]) * Expr::pow(t, Rational(r));
    if (!expr_zero(sys.omega - w, opts)) return fail_check("omega-mismatch");

    if (!is_killing_tensor(d.C[0], opts)) return fail_check("C0-not-a-KT");
    for (unsigned k = 1; k <= n; ++k) {
        SymMat3E want = sym_gradient(d.L[k - 1]);
        for (int i = 0; i < 6; ++i)
            if (!expr_zero(d.C[k].m[i] + want.m[i], opts))
                return fail_check("C" + std::to_string(k) + "-mismatch");
        if (!is_killing_tensor(d.C[k], opts))
            return fail_check("C" + std::to_string(k) + "-not-a-KT");
    }
    if (!is_killing_vector(d.L[n], opts))
        return fail_check("L" + std::to_string(n) + "-not-a-KV");
    if (mentions_time(d.G)) return fail_check("G-depends-on-t");

    std::vector<Vec3E> CQ, gLQ;
    std::vector<Expr> LQ;
    for (unsigned m = 0; m <= n; ++m) {
        CQ.push_back(matvec(d.C[m], sys.Q));
        LQ.push_back(dot(d.L[m], sys.Q));
        gLQ.push_back(gradient(LQ.back()));
    }

    // C term divided by its own index; the undivided C[0] stands in for the
    // 0/0 slot, and negative indices vanish.
    auto divided_CQ = [&](int m) -> Vec3E {
        if (m < 0) return zero_vec();
        if (m == 0) return CQ[0];
        return {{Expr::num(Rational(1, m)) * CQ[m][0],
                 Expr::num(Rational(1, m)) * CQ[m][1],
                 Expr::num(Rational(1, m)) * CQ[m][2]}};
    };

    if (!expr_zero(LQ[n] - Expr::num(d.s), opts))
        return fail_check("s-projection");

    {
        Vec3E g = gradient(d.G);
        Vec3E L1 = n >= 1 ? d.L[1] : zero_vec();
        Vec3E res = g - 2 * Expr::num(d.b[0]) * CQ[0] + L1;
        if (!vec_zero(res, opts)) return fail_check("G-gradient");
    }

    for (unsigned r = 1; r <= ell; ++r) {
        Vec3E acc = zero_vec();
        for (unsigned sidx = 0; sidx + 1 <= ell; ++sidx) {
            unsigned j = r + sidx;
            if (j > ell) continue;
            const Rational& bj = d.b[j];
            int m = static_cast<int>(n) - static_cast<int>(sidx);
            if (m >= 0)
                acc = acc - Expr::num(Rational(2 * (long)(r + sidx)) * bj) *
                                divided_CQ(m);
            if (m > 0) acc = acc - Expr::num(2 * bj) * CQ[m];
            if (m - 1 >= 0) acc = acc + Expr::num(bj) * gLQ[m - 1];
        }
        if (!vec_zero(acc, opts))
            return fail_check("recurrence r=" + std::to_string(r));
    }

    {
        Vec3E acc = zero_vec();
        for (unsigned sidx = 1; sidx <= ell; ++sidx) {
            int m = static_cast<int>(n) - static_cast<int>(sidx);
            if (m >= 0)
                acc = acc -
                      Expr::num(Rational(2 * (long)sidx) * d.b[sidx]) *
                          divided_CQ(m);
        }
        for (unsigned sidx = 0; sidx <= ell; ++sidx) {
            int m = static_cast<int>(n) - static_cast<int>(sidx);
            if (m > 0) acc = acc - Expr::num(2 * d.b[sidx]) * CQ[m];
            if (m - 1 >= 0) acc = acc + Expr::num(d.b[sidx]) * gLQ[m - 1];
        }
        if (!vec_zero(acc, opts)) return fail_check("balance");
    }

    for (unsigned k = 2; k <= n; ++k) {
        Vec3E acc = Expr::num(rat((long)(k * (k - 1)))) * d.L[k];
        for (unsigned sidx = 1; sidx <= ell; ++sidx) {
            int m = static_cast<int>(k) - static_cast<int>(sidx) - 1;
            if (m >= 0)
                acc = acc -
                      Expr::num(Rational(2 * (long)sidx) * d.b[sidx]) *
                          divided_CQ(m);
        }
        for (unsigned sidx = 0; sidx <= ell; ++sidx) {
            int m = static_cast<int>(k) - static_cast<int>(sidx) - 1;
            if (m > 0) acc = acc - Expr::num(2 * d.b[sidx]) * CQ[m];
            if (m - 1 >= 0) acc = acc + Expr::num(d.b[sidx]) * gLQ[m - 1];
        }
        if (!vec_zero(acc, opts))
            return fail_check("ladder k=" + std::to_string(k));
    }

    CheckOutcome out;
    SymMat3E Kab = d.C[0];
    for (unsigned k = 1; k <= n; ++k)
        Kab = Kab + (Expr::num(Rational(1, k)) * Expr::pow(t, Rational(k))) *
                        d.C[k];
    Vec3E Ka = zero_vec();
    for (unsigned k = 0; k <= n; ++k)
        Ka = Ka + Expr::pow(t, Rational(k)) * d.L[k];
    Expr K = d.G;
    for (unsigned k = 0; k <= n; ++k)
        for (unsigned r = 0; r <= ell; ++r)
            K = K + Expr::num(d.b[r] / rat((long)(k + r + 1))) * LQ[k] *
                        Expr::pow(t, rat((long)(k + r + 1)));
    out.integral = {Kab, Ka, K};
    if (!expr_zero(total_time_derivative(out.integral, sys), opts))
        return fail_check("conservation");
    out.ok = true;
    return out;
}

CheckOutcome exponential_integral_check(const Vec3E& L, const Rational& lambda,
                                        const Rational& b0, const Rational& b1,
                                        const DynSystem& sys,
                                        const ZeroTestOptions& opts) {
    if (lambda == 0 || b1 == 0)
        throw SchemaError("exponential integral requires lambda != 0 and a "
                          "genuinely linear omega");
    const Expr t = time_symbol();
    if (!expr_zero(sys.omega - (Expr::num(b0) + Expr::num(b1) * t), opts))
        return fail_check("omega-not-linear");

    SymMat3E Kt = sym_gradient(L);
    if (!is_killing_tensor(Kt, opts)) return fail_check("L-gradient-not-a-KT");

    Expr LQ = dot(L, sys.Q);
    Vec3E gLQ = gradient(LQ);
    Rational mu = lambda * lambda * lambda / b1;
    for (int i = 0; i < 3; ++i)
        if (!expr_zero(gLQ[i] - mu * L[i], opts))
            return fail_check("gradient-eigenvalue");

    Vec3E KtQ = matvec(Kt, sys.Q);
    Rational l3 = lambda * lambda * lambda;
    for (int i = 0; i < 3; ++i)
        if (!expr_zero(Expr::num(l3) * L[i] + 2 * Expr::num(b1) * KtQ[i], opts))
            return fail_check("force-alignment");

    CheckOutcome out;
    Expr E = Expr::exp(Expr::num(lambda) * t);
    out.integral = {Expr::num(-1) * E * Kt,
                    Expr::num(lambda) * E * L,
                    (Expr::num(b0 - b1 / lambda) + Expr::num(b1) * t) * E * LQ};
    if (!expr_zero(total_time_derivative(out.integral, sys), opts))
        return fail_check("conservation");
    out.ok = true;
    return out;
}

std::vector<ExponentialFinding> exponential_integral_search() {
    const auto& q = coords();
    const Expr one = Expr::num(1);
    std::vector<Expr> monos{one,          q[0],        q[1],
                            q[2],         q[0] * q[0], q[1] * q[1],
                            q[2] * q[2],  q[0] * q[1], q[0] * q[2],
                            q[1] * q[2]};

    std::vector<Vec3E> basis;  // every degree <= 2 polynomial vector field
    for (int i = 0; i < 3; ++i)
        for (const Expr& m : monos) {
            Vec3E v = zero_vec();
            v[i] = m;
            basis.push_back(v);
        }

    std::vector<Vec3E> forces = basis;  // one-hot forces, plus the radial one
    forces.push_back({{Expr::num(-2) * q[0], Expr::num(-2) * q[1],
                       Expr::num(-2) * q[2]}});

    const Rational b1(1);
    std::vector<Rational> lambdas{Rational(1),     Rational(-1),
                                  Rational(2),     Rational(-2),
                                  Rational(1, 2),  Rational(-1, 2),
                                  Rational(3),     Rational(-3),
                                  Rational(3, 2),  Rational(-3, 2)};

    std::vector<ExponentialFinding> findings;
    for (const Vec3E& Q : forces) {
        // Per-basis pieces that do not depend on lambda.
        std::vector<std::array<Expr, 10>> kt;
        std::vector<Vec3E> gLQ, KtQ;
        for (const Vec3E& L : basis) {
            SymMat3E Kt = sym_gradient(L);
            kt.push_back(killing_tensor_residual(Kt));
            gLQ.push_back(gradient(dot(L, Q)));
            KtQ.push_back(matvec(Kt, Q));
        }
        for (const Rational& lam : lambdas) {
            Rational mu = lam * lam * lam / b1;
            Rational l3 = lam * lam * lam;
            PolyCoeffTable table;
            std::vector<std::map<std::size_t, Rational>> cols;
            for (std::size_t j = 0; j < basis.size(); ++j) {
                std::vector<Expr> slots(kt[j].begin(), kt[j].end());
                for (int i = 0; i < 3; ++i)
                    slots.push_back(gLQ[j][i] - mu * basis[j][i]);
                for (int i = 0; i < 3; ++i)
                    slots.push_back(Expr::num(l3) * basis[j][i] +
                                    2 * Expr::num(b1) * KtQ[j][i]);
                cols.push_back(table.extract(slots));
            }
            RatMat m = columns_to_matrix(cols, table.rows());
            for (const auto& null : nullspace(m)) {
                Vec3E L = zero_vec();
                for (std::size_t j = 0; j < basis.size(); ++j)
                    for (int i = 0; i < 3; ++i)
                        L[i] = L[i] + Expr::num(null[j]) * basis[j][i];
                DynSystem sys = DynSystem::make(
                    Expr::num(1) + Expr::num(b1) * time_symbol(), Q);
                if (exponential_integral_check(L, lam, Rational(1), b1, sys).ok)
                    findings.push_back({Q, lam, L});
            }
        }
    }
    return findings;
}

/* ----------------- power-law force classification ----------------------- */

namespace {

QFICandidate angular_momentum_candidate(int axis) {
    const auto& q = coords();
    Vec3E Ka = zero_vec();
    int i = (axis + 1) % 3, j = (axis + 2) % 3;
    Ka[i] = -q[j];
    Ka[j] = q[i];
    return {SymMat3E{}, Ka, Expr()};
}

}  // namespace

std::vector<PowerLawBranch> power_law_classification(const Rational& nu) {
    if (nu == 0) throw SchemaError("power-law exponent must be nonzero");
    const Expr t = time_symbol();
    const auto& q = coords();
    const Expr r2 = radius_squared();
    std::vector<PowerLawBranch> out;

    {
        PowerLawBranch br;
        br.label = "angular-momentum";
        auto wch = opaque_chain("w", 2);
        br.omega = wch[0];
        br.system = DynSystem::power_law(wch[0], nu);
        br.integral_names = {"L1", "L2", "L3"};
        for (int a = 0; a < 3; ++a)
            br.integrals.push_back(angular_momentum_candidate(a));
        br.constraints = {
            "omega(t) arbitrary nonzero",
            "time-dependent family coefficients all vanish",
            "surviving: constant quadratic block and rotation vector"};
        out.push_back(std::move(br));
    }

    if (nu != 1 && nu != -2) {
        PowerLawBranch br;
        br.label = nu == 2 ? "constant-weight" : "polynomial-weight";
        Expr b0 = Expr::sym("b0"), b1 = Expr::sym("b1"), b2 = Expr::sym("b2");
        Expr k = Expr::sym("k");
        Expr P = b0 + b1 * t + b2 * t * t;
        br.omega = k * Expr::pow(P, (nu - 2) / 2);
        br.system = DynSystem::power_law(br.omega, nu);
        QFICandidate J;
        J.Kab = scalar_metric(Rational(1, 2) * P);
        J.Ka = Expr::num(Rational(-1, 2)) * (b1 + 2 * b2 * t) *
               Vec3E{{q[0], q[1], q[2]}};
        J.K = -(k * Expr::pow(P, nu / 2) * Expr::pow(r2, -nu / 2)) +
              Rational(1, 2) * b2 * r2;
        br.integral_names = {"J"};
        br.integrals.push_back(std::move(J));
        br.constraints = {"weight function quadratic in t",
                          "constant quadratic block removed (reducible)",
                          nu == 2 ? "omega constant; J = b0*H - b1*I2 - b2*I1"
                                  : "omega = k*(b0+b1*t+b2*t^2)^((nu-2)/2)"};
        out.push_back(std::move(br));
    }

    if (nu == 1) {
        Expr r = Expr::pow(r2, Rational(1, 2));
        {
            PowerLawBranch br;
            br.label = "linear-denominator";
            Expr c11 = Expr::sym("c11"), b0 = Expr::sym("b0"),
                 b1 = Expr::sym("b1");
            Expr lin = b0 + b1 * t;
            br.omega = c11 * Expr::pow(lin, Rational(-1));
            br.system = DynSystem::power_law(br.omega, nu);
            QFICandidate E2;
            E2.Kab = scalar_metric(Rational(1, 2) * lin * lin);
            E2.Ka = Expr::num(-1) * b1 * lin * Vec3E{{q[0], q[1], q[2]}};
            E2.K = -(c11 * lin / r) + Rational(1, 2) * b1 * b1 * r2;
            br.integral_names = {"E2"};
            br.integrals.push_back(std::move(E2));
            br.constraints = {"a2*omega, a5*omega, a11*omega constant",
                              "a3*omega^2 constant",
                              "a3 at most quadratic, a2, a5, a11 linear in t"};
            out.push_back(std::move(br));
        }
        {
            PowerLawBranch br;
            br.label = "inverse-sqrt-quadratic";
            Expr k = Expr::sym("k"), b0 = Expr::sym("b0"), b1 = Expr::sym("b1"),
                 b2 = Expr::sym("b2");
            Expr P = b0 + b1 * t + b2 * t * t;
            br.omega = k * Expr::pow(P, Rational(-1, 2));
            br.system = DynSystem::power_law(br.omega, nu);
            QFICandidate E3;
            E3.Kab = scalar_metric(Rational(1, 2) * P);
            E3.Ka = Expr::num(Rational(-1, 2)) * (b1 + 2 * b2 * t) *
                    Vec3E{{q[0], q[1], q[2]}};
            E3.K = -(k * Expr::pow(P, Rational(1, 2)) / r) +
                   Rational(1, 2) * b2 * r2;
            br.integral_names = {"E3"};
            br.integrals.push_back(std::move(E3));
            br.constraints = {"omega = k*(b0+b1*t+b2*t^2)^(-1/2)",
                              "discriminant b1^2 - 4*b0*b2 nonzero"};
            out.push_back(std::move(br));
        }
    }

    if (nu == -2) {
        {
            // omega defined through the first-integral form of the
            // third-order condition, which then holds identically.
            PowerLawBranch br;
            br.label = "lewis";
            auto a3 = opaque_chain("a3", 3);
            Expr c0 = Expr::sym("c0");
            br.omega = a3[2] / (4 * a3[0]) -
                       Rational(1, 8) * a3[1] * a3[1] /
                           (a3[0] * a3[0]) -
                       c0 / (4 * a3[0] * a3[0]);
            br.system = DynSystem::power_law(br.omega, nu);
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    QFICandidate lam;
                    lam.Kab.at(i, j) =
                        i == j ? a3[0] : Rational(1, 2) * a3[0];
                    Vec3E Ka = zero_vec();
                    for (int a = 0; a < 3; ++a) {
                        Expr v;
                        if (a == j) v = v + q[i];
                        if (a == i) v = v + q[j];
                        Ka[a] = Expr::num(Rational(-1, 2)) * a3[1] * v;
                    }
                    lam.Ka = Ka;
                    lam.K = (-2 * br.omega * a3[0] +
                             Rational(1, 2) * a3[2]) *
                            q[i] * q[j];
                    br.integral_names.push_back(
                        "Lambda" + std::to_string(i + 1) + std::to_string(j + 1));
                    br.integrals.push_back(std::move(lam));
                }
            br.constraints = {
                "a3*ddot(a3) - dot(a3)^2/2 - 4*omega*a3^2 = c0",
                "constant-force offsets vanish",
                "cross couplings proportional to a3"};
            out.push_back(std::move(br));
        }
        {
            PowerLawBranch br;
            br.label = "linear-in-position";
            auto f = opaque_chain("f", 3);
            br.omega = f[2] / (2 * f[0]);
            br.system = DynSystem::power_law(br.omega, nu);
            for (int i = 0; i < 3; ++i) {
                QFICandidate c;
                Vec3E Ka = zero_vec();
                Ka[i] = f[0];
                c.Ka = Ka;
                c.K = Expr::num(-1) * f[1] * q[i];
                br.integral_names.push_back("M" + std::to_string(i + 1));
                br.integrals.push_back(std::move(c));
            }
            br.constraints = {"quadratic block vanishes",
                              "ddot(f) = 2*omega*f",
                              "force term linear in position"};
            out.push_back(std::move(br));
        }
    }
    return out;
}

}  // namespace qfi
