#include "qfi/catalog.hpp"

#include <cstdio>

#include "json.hpp"
#include "qfi/exprio.hpp"

namespace qfi {

namespace {

// One-based cyclic index (q_{i+3k} == q_i) to zero-based storage.
int idx0(int i) { return ((i - 1) % 3 + 3) % 3; }

Expr sqrt_rational(const Rational& r) {
    if (auto root = exact_root(r, 2)) return Expr::num(*root);
    return Expr::pow(Expr::num(r), Rational(1, 2));
}

const Expr& tsym() {
    static const Expr t = time_symbol();
    return t;
}

Vec3E velocity_vec() {
    const auto& v = velocities();
    return {{v[0], v[1], v[2]}};
}

Vec3E coord_vec() {
    const auto& q = coords();
    return {{q[0], q[1], q[2]}};
}

Expr speed_squared() {
    const auto& v = velocities();
    return v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
}

Expr position_dot_velocity() {
    const auto& q = coords();
    const auto& v = velocities();
    return q[0] * v[0] + q[1] * v[1] + q[2] * v[2];
}

// r^p for rational p, expressed through r^2 so everything stays in the
// coordinate polynomials.
Expr radius_pow(const Rational& p) {
    return Expr::pow(radius_squared(), p / 2);
}

FirstIntegral make_fi(std::string name, std::string id, const Expr& expr,
                      DynSystem family) {
    FirstIntegral fi;
    fi.name = std::move(name);
    fi.id = std::move(id);
    fi.expr = expr;
    fi.candidate = decompose_phase_space(expr);
    fi.family = std::move(family);
    bool quadratic = false;
    for (const auto& e : fi.candidate.Kab.m)
        if (!e.is_zero()) quadratic = true;
    fi.kind = quadratic ? FIKind::Quadratic : FIKind::Linear;
    return fi;
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

// The phase angle of an oscillator profile. Named by content so distinct
// profiles never share a function symbol (bound rules are keyed by name).
Expr make_theta(const Expr& f, const Rational& c0) {
    Expr th = Expr::fn("theta_" +
                       fnv_digest(print_expr(f) + "|" + to_string(c0)));
    th.bind_rule(tsym(), sqrt_rational(c0 / 2) * Expr::pow(f, Rational(-1)));
    th.freeze_fn();
    return th;
}

}  // namespace

QFICandidate decompose_phase_space(const Expr& I) {
    const auto& v = velocities();
    QFICandidate c;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            c.Kab.at(a, b) = differentiate(differentiate(I, v[a]), v[b]) / 2;
    Vec3E vv = velocity_vec();
    Expr rest = I - quad_form(c.Kab, vv, vv);
    for (int a = 0; a < 3; ++a) c.Ka[a] = differentiate(rest, v[a]);
    c.K = rest - dot(c.Ka, vv);
    return c;
}

Expr angular_momentum_component(int i, int j) {
    const auto& q = coords();
    const auto& v = velocities();
    int a = idx0(i), b = idx0(j);
    return q[a] * v[b] - q[b] * v[a];
}

std::array<std::array<Expr, 3>, 3> angular_momentum_tensor() {
    std::array<std::array<Expr, 3>, 3> L;
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) L[i - 1][j - 1] = angular_momentum_component(i, j);
    return L;
}

FirstIntegral angular_momentum(int i, const DynSystem& sys) {
    Expr L = angular_momentum_component(i + 1, i + 2);
    return make_fi("L_" + std::to_string(idx0(i) + 1), "angular-momentum", L,
                   sys);
}

FirstIntegral angular_momentum(int i) {
    auto w = opaque_chain("w", 2);
    return angular_momentum(i, DynSystem::power_law(w[0], 1));
}

FirstIntegral table1_integral(const std::string& name, const Rational& k,
                              const Rational& nu) {
    const auto& q = coords();
    const auto& v = velocities();
    DynSystem sys = DynSystem::power_law(Expr::num(k), nu);
    auto need = [&](const Rational& want, const char* what) {
        if (nu != want)
            throw DomainError(std::string(what) + " requires nu = " +
                              to_string(want) + ", got " + to_string(nu));
    };

    if (name == "H") {
        Expr H = speed_squared() / 2 - Expr::num(k) * radius_pow(-nu);
        return make_fi("H", "hamiltonian", H, std::move(sys));
    }
    if (name.size() == 3 && name[0] == 'B' && name[1] >= '1' && name[1] <= '3' &&
        name[2] >= '1' && name[2] <= '3') {
        need(-2, "B_ij");
        int i = name[1] - '1', j = name[2] - '1';
        Expr B = v[i] * v[j] - 2 * Expr::num(k) * q[i] * q[j];
        return make_fi(name, "jauch-hill-fradkin", B, std::move(sys));
    }
    if (name.size() == 5 && name.rfind("I3_", 0) == 0 && name[3] >= '1' &&
        name[3] <= '3' && (name[4] == '+' || name[4] == '-')) {
        need(-2, "I3_a");
        int a = name[3] - '1';
        bool plus = name[4] == '+';
        if (k == 0) throw DomainError("I3_a needs a nonzero k");
        Expr I;
        if (k > 0) {
            Expr s = sqrt_rational(2 * k);
            Expr E = Expr::exp((plus ? s : -s) * tsym());
            I = E * (v[a] - (plus ? s : -s) * q[a]);
        } else {
            // Real form of the complex pair e^{+-i s t}(v_a -+ i s q_a):
            // "+" keeps the real part, "-" the imaginary one.
            Expr s = sqrt_rational(-2 * k);
            Expr st = s * tsym();
            I = plus ? Expr::cos(st) * v[a] + s * Expr::sin(st) * q[a]
                     : Expr::sin(st) * v[a] - s * Expr::cos(st) * q[a];
        }
        return make_fi(name, "exponential-linear", I, std::move(sys));
    }
    if (name.size() == 2 && name[0] == 'R' && name[1] >= '1' && name[1] <= '3') {
        need(1, "R_i");
        int i = name[1] - '1';
        Expr R = speed_squared() * q[i] - position_dot_velocity() * v[i] -
                 Expr::num(k) * radius_pow(-1) * q[i];
        return make_fi(name, "runge-lenz", R, std::move(sys));
    }
    if (name == "I1" || name == "I2") {
        need(2, name.c_str());
        Expr H2 = speed_squared() / 2 - Expr::num(k) * radius_pow(-2);
        Expr I = name == "I1" ? -H2 * tsym() * tsym() +
                                    tsym() * position_dot_velocity() -
                                    radius_squared() / 2
                              : -H2 * tsym() + position_dot_velocity() / 2;
        return make_fi(name, "time-weighted-energy", I, std::move(sys));
    }
    throw DomainError("unknown constant-omega integral: " + name);
}

FirstIntegral J_nu(const Rational& nu, const Rational& b0, const Rational& b1,
                   const Rational& b2, const Rational& k) {
    if (nu == 0) throw DomainError("J_nu requires nu != 0");
    Expr P = Expr::num(b0) + Expr::num(b1) * tsym() +
             Expr::num(b2) * tsym() * tsym();
    Expr omega = Expr::num(k) * Expr::pow(P, (nu - 2) / 2);
    Expr J = P * (speed_squared() / 2 - omega * radius_pow(-nu)) -
             (Expr::num(b1) + 2 * Expr::num(b2) * tsym()) / 2 *
                 position_dot_velocity() +
             Expr::num(b2) * radius_squared() / 2;
    return make_fi("J_" + to_string(nu), "polynomial-weight", J,
                   DynSystem::power_law(omega, nu));
}

KeplerSet kepler_time_dependent(const Rational& b0, const Rational& b1,
                                const Rational& c11) {
    if (c11 == 0) throw DomainError("the Kepler family needs c11 != 0");
    const auto& q = coords();
    const auto& v = velocities();
    Expr T = Expr::num(b0) + Expr::num(b1) * tsym();
    Expr omega = Expr::num(c11) * Expr::pow(T, Rational(-1));
    KeplerSet set;
    set.c11 = c11;
    set.system = DynSystem::power_law(omega, 1);

    Expr E2 = T * T *
                  (speed_squared() / 2 -
                   Expr::num(c11) * radius_pow(-1) * Expr::pow(T, Rational(-1))) -
              Expr::num(b1) * T * position_dot_velocity() +
              Expr::num(b1 * b1) * radius_squared() / 2;
    set.E2 = make_fi("E_2", "kepler-energy", E2, set.system);

    auto L = [&](int i) { return angular_momentum_component(i + 1, i + 2); };
    for (int i = 1; i <= 3; ++i) {
        Expr Rt = speed_squared() * q[idx0(i)] -
                  position_dot_velocity() * v[idx0(i)] -
                  omega * radius_pow(-1) * q[idx0(i)];
        set.R_tilde[i - 1] = Rt;
        Expr A = T * Rt + Expr::num(b1) * (q[idx0(i + 2)] * L(i + 1) -
                                           q[idx0(i + 1)] * L(i + 2));
        set.A[i - 1] =
            make_fi("A_" + std::to_string(i), "kepler-runge-lenz", A, set.system);
    }
    return set;
}

FirstIntegral kepler_E3(const Rational& b0, const Rational& b1,
                        const Rational& b2, const Rational& k) {
    if (k == 0) throw DomainError("E_3 needs k != 0");
    Expr P = Expr::num(b0) + Expr::num(b1) * tsym() +
             Expr::num(b2) * tsym() * tsym();
    Expr omega = Expr::num(k) * Expr::pow(P, Rational(-1, 2));
    Expr E3 = P * (speed_squared() / 2 - omega * radius_pow(-1)) -
              (Expr::num(b1) + 2 * Expr::num(b2) * tsym()) / 2 *
                  position_dot_velocity() +
              Expr::num(b2) * radius_squared() / 2;
    return make_fi("E_3", "kepler-inverse-sqrt-energy", E3,
                   DynSystem::power_law(omega, 1));
}

FirstIntegral E_mu_compact(int mu, const Rational& b0, const Rational& b1,
                           const Rational& b2, const Rational& k) {
    if (k == 0) throw DomainError("the compact energy needs k != 0");
    Expr omega;
    if (mu == 2) {
        if (b2 != 0)
            throw DomainError("mu = 2 uses a linear weight; b2 must vanish");
        omega = Expr::num(k) *
                Expr::pow(Expr::num(b0) + Expr::num(b1) * tsym(), Rational(-1));
    } else if (mu == 3) {
        omega = Expr::num(k) * Expr::pow(Expr::num(b0) + Expr::num(b1) * tsym() +
                                             Expr::num(b2) * tsym() * tsym(),
                                         Rational(-1, 2));
    } else {
        throw DomainError("the compact energy is defined for mu = 2 and 3");
    }
    Expr wi2 = Expr::pow(omega, Rational(-2));
    Expr wi2_d = differentiate(wi2, tsym());
    Expr wi2_dd = differentiate(wi2_d, tsym());
    Expr E = Expr::num(k * k) *
             (wi2 * (speed_squared() / 2 - omega * radius_pow(-1)) -
              wi2_d / 2 * position_dot_velocity() +
              wi2_dd * radius_squared() / 4);
    return make_fi("E_" + std::to_string(mu) + "_compact",
                   "kepler-compact-energy", E, DynSystem::power_law(omega, 1));
}

OscillatorSpec OscillatorSpec::profile(Expr f, const Rational& c0) {
    if (f.is_zero()) throw DomainError("oscillator profile must be nonzero");
    OscillatorSpec s;
    s.form = Form::Profile;
    s.f = std::move(f);
    s.c0 = c0;
    if (c0 > 0) s.theta = make_theta(s.f, c0);
    return s;
}

OscillatorSpec OscillatorSpec::from_a3(Expr a3, const Rational& c0) {
    return profile(std::move(a3), c0);
}

OscillatorSpec OscillatorSpec::from_rho(Expr rho, const Rational& c0) {
    if (rho.is_zero()) throw DomainError("oscillator profile must be nonzero");
    OscillatorSpec s;
    s.form = Form::Rho;
    s.rho = std::move(rho);
    s.f = s.rho * s.rho;
    s.c0 = c0;
    if (c0 > 0) s.theta = make_theta(s.f, c0);
    return s;
}

OscillatorSpec OscillatorSpec::from_g(Expr g) {
    if (g.is_zero()) throw DomainError("oscillator profile must be nonzero");
    OscillatorSpec s;
    s.form = Form::G;
    s.g = std::move(g);
    return s;
}

Expr OscillatorSpec::omega() const {
    if (form == Form::G) {
        Expr gdd = differentiate(differentiate(g, tsym()), tsym());
        return gdd / (2 * g);
    }
    if (form == Form::Rho) {
        Expr rdd = differentiate(differentiate(rho, tsym()), tsym());
        return rdd / (2 * rho) - Expr::num(c0 / 4) * Expr::pow(rho, Rational(-4));
    }
    Expr fd = differentiate(f, tsym());
    Expr fdd = differentiate(fd, tsym());
    return fdd / (4 * f) -
           Expr::num(Rational(1, 8)) * fd * fd * Expr::pow(f, Rational(-2)) -
           Expr::num(c0 / 4) * Expr::pow(f, Rational(-2));
}

DynSystem OscillatorSpec::system() const {
    return DynSystem::power_law(omega(), -2);
}

std::array<FirstIntegral, 6> oscillator_Lambda(const OscillatorSpec& spec) {
    if (spec.form == OscillatorSpec::Form::G)
        throw DomainError("the oscillator tensor needs a (profile, c0) spec");
    if (spec.f.is_zero()) throw DomainError("oscillator profile must be nonzero");
    const auto& q = coords();
    const auto& v = velocities();
    Expr fd = differentiate(spec.f, tsym());
    Expr fdd = differentiate(fd, tsym());
    Expr w = spec.omega();
    DynSystem sys = spec.system();
    std::array<FirstIntegral, 6> out;
    int slot = 0;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            Expr lam = spec.f * (v[i] * v[j] - 2 * w * q[i] * q[j]) -
                       fd * (q[i] * v[j] + q[j] * v[i]) / 2 +
                       fdd / 2 * q[i] * q[j];
            out[slot++] = make_fi(
                "Lambda_" + std::to_string(i + 1) + std::to_string(j + 1),
                "oscillator-tensor", lam, sys);
        }
    return out;
}

OscillatorLinearSet oscillator_linear(const OscillatorSpec& spec) {
    const auto& q = coords();
    const auto& v = velocities();
    OscillatorLinearSet set;
    if (spec.form == OscillatorSpec::Form::G) {
        Expr gd = differentiate(spec.g, tsym());
        DynSystem sys = spec.system();
        for (int i = 0; i < 3; ++i)
            set.integrals.push_back(make_fi("I4_" + std::to_string(i + 1),
                                            "oscillator-linear",
                                            spec.g * v[i] - gd * q[i], sys));
        return set;
    }
    if (!(spec.c0 > 0))
        throw DomainError("the oscillator linear pair needs c0 > 0");
    Expr c = sqrt_rational(spec.c0 / 2);
    Expr sin_th = Expr::sin(spec.theta);
    Expr cos_th = Expr::cos(spec.theta);
    DynSystem sys = spec.system();
    std::array<Expr, 3> radial, momentum;
    if (spec.form == OscillatorSpec::Form::Rho) {
        Expr rd = differentiate(spec.rho, tsym());
        for (int i = 0; i < 3; ++i) {
            radial[i] = c * Expr::pow(spec.rho, Rational(-1)) * q[i];
            momentum[i] = spec.rho * v[i] - rd * q[i];
        }
    } else {
        Expr fd = differentiate(spec.f, tsym());
        Expr fh = Expr::pow(spec.f, Rational(1, 2));
        Expr fmh = Expr::pow(spec.f, Rational(-1, 2));
        for (int i = 0; i < 3; ++i) {
            radial[i] = c * fmh * q[i];
            momentum[i] = fh * v[i] - fd / 2 * fmh * q[i];
        }
    }
    for (int i = 0; i < 3; ++i)
        set.integrals.push_back(make_fi("I41_" + std::to_string(i + 1),
                                        "oscillator-linear-pair",
                                        radial[i] * sin_th + momentum[i] * cos_th,
                                        sys));
    for (int i = 0; i < 3; ++i)
        set.integrals.push_back(
            make_fi("I42_" + std::to_string(i + 1), "oscillator-linear-pair",
                    -radial[i] * cos_th + momentum[i] * sin_th, sys));
    set.theta = spec.theta;
    return set;
}

FirstIntegral lewis_invariant(const Expr& rho, const Rational& c0) {
    if (rho.is_zero()) throw DomainError("the Lewis invariant needs rho != 0");
    const auto& q = coords();
    const auto& v = velocities();
    Expr rd = differentiate(rho, tsym());
    Expr rdd = differentiate(rd, tsym());
    Expr omega =
        rdd / (2 * rho) - Expr::num(c0 / 4) * Expr::pow(rho, Rational(-4));
    Expr wr = q[0] * rd - rho * v[0];
    Expr I = wr * wr / 2 +
             Expr::num(c0 / 4) * q[0] * q[0] * Expr::pow(rho, Rational(-2));
    return make_fi("Lewis", "lewis-invariant", I,
                   DynSystem::power_law(omega, -2));
}

const std::vector<CatalogEntry>& catalog_entries() {
    static const std::vector<CatalogEntry> entries = {
        {"angular-momentum", "L_i", "any", "any", {"i"}},
        {"angular-momentum-tensor", "L_ij", "any", "any", {"i", "j"}},
        {"hamiltonian", "H", "any", "k", {"k", "nu"}},
        {"jauch-hill-fradkin", "B_ij", "-2", "k", {"k", "i", "j"}},
        {"exponential-linear", "I3_a+/-", "-2", "k", {"k", "a", "sign"}},
        {"runge-lenz", "R_i", "1", "k", {"k", "i"}},
        {"time-weighted-energy", "I1, I2", "2", "k", {"k"}},
        {"polynomial-weight", "J_nu", "any nonzero",
         "k*(b0 + b1*t + b2*t^2)^((nu-2)/2)", {"nu", "b0", "b1", "b2", "k"}},
        {"kepler-energy", "E_2", "1", "c11/(b0 + b1*t)", {"b0", "b1", "c11"}},
        {"kepler-runge-lenz", "A_i", "1", "c11/(b0 + b1*t)",
         {"b0", "b1", "c11", "i"}},
        {"kepler-inverse-sqrt-energy", "E_3", "1",
         "k*(b0 + b1*t + b2*t^2)^(-1/2)", {"b0", "b1", "b2", "k"}},
        {"kepler-compact-energy", "E_mu", "1",
         "k/(b0 + b1*t) for mu=2, k*(b0 + b1*t + b2*t^2)^(-1/2) for mu=3",
         {"mu", "b0", "b1", "b2", "k"}},
        {"oscillator-tensor", "Lambda_ij", "-2",
         "f''/(4*f) - (f'/f)^2/8 - c0/(4*f^2)", {"f", "c0", "i", "j"}},
        {"oscillator-linear", "I4_i", "-2", "g''/(2*g)", {"g", "i"}},
        {"oscillator-linear-pair", "I41_i, I42_i", "-2",
         "f''/(4*f) - (f'/f)^2/8 - c0/(4*f^2)", {"f", "c0", "i"}},
        {"lewis-invariant", "Lewis", "-2", "rho''/(2*rho) - c0/(4*rho^4)",
         {"rho", "c0"}},
    };
    return entries;
}

std::string catalog_listing_json() {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& e : catalog_entries()) {
        nlohmann::ordered_json row;
        row["id"] = e.id;
        row["name"] = e.name;
        row["nu"] = e.nu;
        row["omega"] = e.omega;
        row["parameters"] = e.parameters;
        rows.push_back(std::move(row));
    }
    return rows.dump(2) + "\n";
}

}  // namespace qfi
