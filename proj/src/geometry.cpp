#include "qfi/geometry.hpp"

#include <algorithm>

#include "qfi/linearize.hpp"
#include "qfi/rationalize.hpp"

namespace qfi {

const std::array<Expr, 3>& coords() {
    static const std::array<Expr, 3> q{Expr::sym("x"), Expr::sym("y"),
                                       Expr::sym("z")};
    return q;
}

Expr radius_squared() {
    const auto& q = coords();
    return q[0] * q[0] + q[1] * q[1] + q[2] * q[2];
}

SymMat3E operator+(const SymMat3E& a, const SymMat3E& b) {
    SymMat3E r;
    for (int i = 0; i < 6; ++i) r.m[i] = a.m[i] + b.m[i];
    return r;
}

SymMat3E operator-(const SymMat3E& a, const SymMat3E& b) {
    SymMat3E r;
    for (int i = 0; i < 6; ++i) r.m[i] = a.m[i] - b.m[i];
    return r;
}

SymMat3E operator*(const Expr& s, const SymMat3E& a) {
    SymMat3E r;
    for (int i = 0; i < 6; ++i) r.m[i] = s * a.m[i];
    return r;
}

Vec3E operator+(const Vec3E& a, const Vec3E& b) {
    return {{a[0] + b[0], a[1] + b[1], a[2] + b[2]}};
}

Vec3E operator-(const Vec3E& a, const Vec3E& b) {
    return {{a[0] - b[0], a[1] - b[1], a[2] - b[2]}};
}

Vec3E operator*(const Expr& s, const Vec3E& a) {
    return {{s * a[0], s * a[1], s * a[2]}};
}

Expr dot(const Vec3E& a, const Vec3E& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

Vec3E matvec(const SymMat3E& k, const Vec3E& v) {
    Vec3E r;
    for (int i = 0; i < 3; ++i) {
        Expr s = Expr::num(0);
        for (int j = 0; j < 3; ++j) s = s + k.at(i, j) * v[j];
        r[i] = s;
    }
    return r;
}

Expr quad_form(const SymMat3E& k, const Vec3E& v, const Vec3E& w) {
    return dot(v, matvec(k, w));
}

Vec3E gradient(const Expr& f) {
    const auto& q = coords();
    return {{differentiate(f, q[0]), differentiate(f, q[1]),
             differentiate(f, q[2])}};
}

SymMat3E hessian(const Expr& f) {
    const auto& q = coords();
    SymMat3E h;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
            h.at(i, j) = differentiate(differentiate(f, q[i]), q[j]);
    return h;
}

SymMat3E sym_gradient(const Vec3E& v) {
    const auto& q = coords();
    SymMat3E s;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j)
            s.at(i, j) = Rational(1, 2) *
                         (differentiate(v[i], q[j]) + differentiate(v[j], q[i]));
    return s;
}

std::array<Expr, 10> killing_tensor_residual(const SymMat3E& k) {
    const auto& q = coords();
    std::array<Expr, 10> r;
    int n = 0;
    for (int a = 0; a < 3; ++a)
        for (int b = a; b < 3; ++b)
            for (int c = b; c < 3; ++c)
                r[n++] = Rational(1, 3) *
                         (differentiate(k.at(a, b), q[c]) +
                          differentiate(k.at(b, c), q[a]) +
                          differentiate(k.at(c, a), q[b]));
    return r;
}

bool is_killing_tensor(const SymMat3E& k, const ZeroTestOptions& opts) {
    for (const Expr& r : killing_tensor_residual(k))
        if (!is_identically_zero(r, opts)) return false;
    return true;
}

bool is_killing_vector(const Vec3E& v, const ZeroTestOptions& opts) {
    SymMat3E s = sym_gradient(v);
    for (const Expr& e : s.m)
        if (!is_identically_zero(e, opts)) return false;
    return true;
}

std::optional<Rational> homothety_factor(const Vec3E& v) {
    SymMat3E s = sym_gradient(v);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            Expr want = i == j ? s.at(0, 0) : Expr::num(0);
            if (!is_identically_zero(s.at(i, j) - want)) return std::nullopt;
        }
    auto f = to_rational_fraction(s.at(0, 0));
    if (!f) return std::nullopt;
    const Rational* n = f->num.constant_value();
    const Rational* d = f->den.constant_value();
    if (!n || !d) return std::nullopt;
    return *n / *d;
}

/* ------------------- the 20-parameter quadratic family ------------------ */

SymMat3E kt_family(const std::array<Expr, 20>& a) {
    const auto& q = coords();
    const Expr &x = q[0], &y = q[1], &z = q[2];
    const Rational h(1, 2);
    SymMat3E k;
    k.at(0, 0) = h * a[5] * y * y + h * a[0] * z * z + a[3] * y * z +
                 a[4] * y + a[1] * z + a[2];
    k.at(0, 1) = h * a[9] * z * z - h * a[5] * x * y - h * a[3] * x * z -
                 h * a[13] * y * z - h * a[4] * x - h * a[14] * y +
                 a[15] * z + a[16];
    k.at(0, 2) = h * a[13] * y * y - h * a[3] * x * y - h * a[0] * x * z -
                 h * a[9] * y * z - h * a[1] * x + a[17] * y - h * a[10] * z +
                 a[18];
    k.at(1, 1) = h * a[5] * x * x + h * a[6] * z * z + a[13] * x * z +
                 a[14] * x + a[11] * z + a[12];
    k.at(1, 2) = h * a[3] * x * x - h * a[13] * x * y - h * a[9] * x * z -
                 h * a[6] * y * z - (a[15] + a[17]) * x - h * a[11] * y -
                 h * a[7] * z + a[19];
    k.at(2, 2) = h * a[0] * x * x + h * a[6] * y * y + a[9] * x * y +
                 a[10] * x + a[7] * y + a[8];
    return k;
}

Vec3E kt_generating_vector(const std::array<Expr, 20>& a) {
    const auto& q = coords();
    const Expr &x = q[0], &y = q[1], &z = q[2];
    Vec3E l;
    l[0] = -a[14] * y * y - a[10] * z * z + a[4] * x * y + a[1] * x * z +
           2 * (a[15] + a[17]) * y * z + a[2] * x + 2 * a[3] * y +
           2 * a[0] * z + a[5];
    l[1] = -a[4] * x * x - a[7] * z * z + a[14] * x * y - 2 * a[17] * x * z +
           a[11] * y * z + 2 * (a[16] - a[3]) * x + a[12] * y + 2 * a[6] * z +
           a[13];
    l[2] = -a[1] * x * x - a[11] * y * y - 2 * a[15] * x * y +
           a[10] * x * z + a[7] * y * z + 2 * (a[18] - a[0]) * x +
           2 * (a[19] - a[6]) * y + a[8] * z + a[9];
    return l;
}

SymMat3E kt_from_generating_vector(const std::array<Expr, 20>& a) {
    return sym_gradient(kt_generating_vector(a));
}

std::array<Vec3E, 6> killing_vector_basis() {
    const auto& q = coords();
    const Expr &x = q[0], &y = q[1], &z = q[2];
    const Expr zero = Expr::num(0), one = Expr::num(1);
    return {{
        {{one, zero, zero}},
        {{zero, one, zero}},
        {{zero, zero, one}},
        {{zero, -z, y}},
        {{z, zero, -x}},
        {{-y, x, zero}},
    }};
}

namespace {

int levi_civita(int i, int j, int k) {
    if (i == j || j == k || i == k) return 0;
    return ((j - i) * (k - j) * (k - i)) > 0 ? 1 : -1;
}

std::array<std::array<Expr, 3>, 3> unpack_sym(const std::array<Expr, 6>& p) {
    return {{{p[0], p[1], p[2]}, {p[1], p[3], p[4]}, {p[2], p[4], p[5]}}};
}

}  // namespace

SymMat3E kt_covariant_form(const CovariantKTParams& p) {
    const auto& q = coords();
    auto A = unpack_sym(p.A);
    auto D = unpack_sym(p.D);
    std::array<std::array<Expr, 3>, 3> B = {{
        {p.B[0], p.B[1], p.B[2]},
        {p.B[1], p.B[3], p.B[4]},
        {p.B[2], p.B[4], -p.B[0] - p.B[3]},
    }};
    const Rational h(1, 2);
    SymMat3E out;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            Expr s = D[i][j];
            for (int k = 0; k < 3; ++k) {
                // B_(i^l eps_j)kl + lambda_(i delta_j)k - delta_ij lambda_k
                Expr lin = Expr::num(0);
                for (int l = 0; l < 3; ++l) {
                    if (int e = levi_civita(j, k, l))
                        lin = lin + Expr::num(e) * B[i][l];
                    if (int e = levi_civita(i, k, l))
                        lin = lin + Expr::num(e) * B[j][l];
                }
                lin = h * lin;
                if (j == k) lin = lin + h * p.lambda[i];
                if (i == k) lin = lin + h * p.lambda[j];
                if (i == j) lin = lin - p.lambda[k];
                s = s + lin * q[k];
                for (int l = 0; l < 3; ++l) {
                    for (int m = 0; m < 3; ++m)
                        for (int n = 0; n < 3; ++n) {
                            int e = levi_civita(i, k, m) * levi_civita(j, l, n) +
                                    levi_civita(j, k, m) * levi_civita(i, l, n);
                            if (e)
                                s = s + Expr::num(e) * A[m][n] * q[k] * q[l];
                        }
                }
            }
            out.at(i, j) = s;
        }
    return out;
}

/* ----------------------- exact coefficient algebra ---------------------- */

namespace {

std::vector<std::map<std::size_t, Rational>> tensor_columns(
    PolyCoeffTable& table, const std::vector<SymMat3E>& tensors) {
    std::vector<std::map<std::size_t, Rational>> cols;
    for (const auto& t : tensors)
        cols.push_back(table.extract({t.m.begin(), t.m.end()}));
    return cols;
}

std::vector<SymMat3E> family_basis() {
    std::vector<SymMat3E> basis;
    for (int j = 0; j < 20; ++j) {
        std::array<Expr, 20> a{};
        a[j] = Expr::num(1);
        basis.push_back(kt_family(a));
    }
    return basis;
}

std::vector<SymMat3E> covariant_basis() {
    std::vector<SymMat3E> basis;
    for (int j = 0; j < 20; ++j) {
        std::array<Expr, 20> packed{};
        packed[j] = Expr::num(1);
        CovariantKTParams p;
        std::copy_n(packed.begin(), 6, p.A.begin());
        std::copy_n(packed.begin() + 6, 5, p.B.begin());
        std::copy_n(packed.begin() + 11, 3, p.lambda.begin());
        std::copy_n(packed.begin() + 14, 6, p.D.begin());
        basis.push_back(kt_covariant_form(p));
    }
    return basis;
}

}  // namespace

std::size_t tensor_span_rank(const std::vector<SymMat3E>& tensors) {
    PolyCoeffTable table;
    auto cols = tensor_columns(table, tensors);
    return rank(columns_to_matrix(cols, table.rows()));
}

const RatMat& covariant_to_family_matrix() {
    static const RatMat cached = [] {
        PolyCoeffTable table;
        auto gcols = tensor_columns(table, family_basis());
        auto mcols = tensor_columns(table, covariant_basis());
        std::size_t rows = table.rows();
        RatMat g = columns_to_matrix(gcols, rows);
        RatMat t(20, 20);
        for (int j = 0; j < 20; ++j) {
            std::vector<Rational> rhs(rows, Rational(0));
            for (const auto& [i, v] : mcols[j]) rhs[i] = v;
            auto sol = solve(g, rhs);
            if (!sol)
                throw Error("covariant parameterization left the family span");
            for (int i = 0; i < 20; ++i) t.at(i, j) = (*sol)[i];
        }
        return t;
    }();
    return cached;
}

std::array<Rational, 20> covariant_to_family(
    const std::array<Rational, 20>& packed) {
    const RatMat& t = covariant_to_family_matrix();
    std::array<Rational, 20> out{};
    for (int i = 0; i < 20; ++i) {
        Rational s(0);
        for (int j = 0; j < 20; ++j) s += t.at(i, j) * packed[j];
        out[i] = s;
    }
    return out;
}

SymMat3E kt_family_planar(const std::array<Expr, 6>& p) {
    std::array<Expr, 20> a{};
    static constexpr int slots[6] = {2, 4, 5, 12, 14, 16};  // one-based 3,5,6,13,15,17
    for (int i = 0; i < 6; ++i) a[slots[i]] = p[i];
    return kt_family(a);
}

}  // namespace qfi
