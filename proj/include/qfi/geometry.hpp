#pragma once

// Flat three-dimensional Euclidean tensor calculus in Cartesian
// coordinates, specialized to what the first-integral machinery needs:
// symmetric second-order Killing tensors, Killing/homothetic vectors and
// the standard 20-parameter description of the quadratic Killing tensor
// space, together with its generating-vector subfamily and the covariant
// (Levi-Civita based) parameterization. Indices are never raised or
// lowered explicitly since the metric is the identity.

#include <array>
#include <optional>

#include "qfi/expr.hpp"
#include "qfi/ratmat.hpp"
#include "qfi/zerotest.hpp"

namespace qfi {

inline constexpr int kDim = 3;

// The spatial coordinate symbols x, y, z.
const std::array<Expr, 3>& coords();
// x^2 + y^2 + z^2
Expr radius_squared();

struct Vec3E {
    std::array<Expr, 3> c{};
    const Expr& operator[](int i) const { return c[i]; }
    Expr& operator[](int i) { return c[i]; }
};

// Symmetric 3x3 matrix of expressions; six stored components.
struct SymMat3E {
    std::array<Expr, 6> m{};  // 00, 01, 02, 11, 12, 22

    static int index(int i, int j) {
        if (i > j) std::swap(i, j);
        static constexpr int k[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
        return k[i][j];
    }
    const Expr& at(int i, int j) const { return m[index(i, j)]; }
    Expr& at(int i, int j) { return m[index(i, j)]; }
};

SymMat3E operator+(const SymMat3E& a, const SymMat3E& b);
SymMat3E operator-(const SymMat3E& a, const SymMat3E& b);
SymMat3E operator*(const Expr& s, const SymMat3E& a);
Vec3E operator+(const Vec3E& a, const Vec3E& b);
Vec3E operator-(const Vec3E& a, const Vec3E& b);
Vec3E operator*(const Expr& s, const Vec3E& a);

Expr dot(const Vec3E& a, const Vec3E& b);
Vec3E matvec(const SymMat3E& k, const Vec3E& v);
// v^a K_ab w^b
Expr quad_form(const SymMat3E& k, const Vec3E& v, const Vec3E& w);

Vec3E gradient(const Expr& f);
SymMat3E hessian(const Expr& f);
// L_(a;b) with weight 1/2
SymMat3E sym_gradient(const Vec3E& v);

// Fully symmetrized gradient K_(ab,c); ten independent components returned
// in lexicographic index order (000, 001, ..., 222 with i<=j<=k).
std::array<Expr, 10> killing_tensor_residual(const SymMat3E& k);

bool is_killing_tensor(const SymMat3E& k, const ZeroTestOptions& opts = {});
bool is_killing_vector(const Vec3E& v, const ZeroTestOptions& opts = {});

// If L_(a;b) == psi * delta_ab for a constant psi, that factor (so 0 for a
// Killing vector, 1 for q^a); nullopt otherwise.
std::optional<Rational> homothety_factor(const Vec3E& v);

// ---------------------------------------------------------------------------
// The quadratic Killing tensor space of flat 3-space: a 20-parameter
// family covering every symmetric second-order Killing tensor.

// K_ab for given parameter values (params[0] is the first parameter).
SymMat3E kt_family(const std::array<Expr, 20>& params);

// The vector whose symmetrized gradient yields the reducible (boundary)
// part of the family; uses the same 20 parameters.
Vec3E kt_generating_vector(const std::array<Expr, 20>& params);

// sym_gradient(kt_generating_vector(params)): lies inside kt_family with
// the six irreducible parameters (1, 4, 6, 7, 10, 14 one-based) dropped.
SymMat3E kt_from_generating_vector(const std::array<Expr, 20>& params);

// Killing vector subfamily (translations + rotations) as six fixed fields.
std::array<Vec3E, 6> killing_vector_basis();

// Covariant parameterization: A, D symmetric (6 each), B symmetric
// traceless (5), lambda a vector (3); 20 parameters total via double
// Levi-Civita contraction on the quadratic part.
struct CovariantKTParams {
    std::array<Expr, 6> A{};       // A11 A12 A13 A22 A23 A33
    std::array<Expr, 5> B{};       // B11 B12 B13 B22 B23 (B33 = -B11-B22)
    std::array<Expr, 3> lambda{};
    std::array<Expr, 6> D{};
};
SymMat3E kt_covariant_form(const CovariantKTParams& p);

// Exact change of basis from covariant parameters (packed A,B,lambda,D in
// the order above) to the 20 family parameters. Cached after first use.
const RatMat& covariant_to_family_matrix();
std::array<Rational, 20> covariant_to_family(const std::array<Rational, 20>& packed);

// Dimension of the span (exact, over the rationals) of a list of
// symmetric tensors with polynomial entries.
std::size_t tensor_span_rank(const std::vector<SymMat3E>& tensors);

// The planar subfamily: parameters (one-based 3, 5, 6, 13, 15, 17) of
// kt_family, the ones whose tensors neither involve z nor the third row.
SymMat3E kt_family_planar(const std::array<Expr, 6>& params);

}  // namespace qfi
