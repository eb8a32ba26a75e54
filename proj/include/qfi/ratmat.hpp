#pragma once

// Dense exact linear algebra over the rationals.  Sizes here are tiny
// (the largest system is 20x20), so plain fraction-based Gauss-Jordan
// is entirely adequate.

#include <optional>
#include <vector>

#include "qfi/rational.hpp"

namespace qfi {

class RatMat {
  public:
    RatMat() = default;
    RatMat(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

    static RatMat identity(std::size_t n) {
        RatMat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    Rational& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Rational& at(std::size_t i, std::size_t j) const {
        return data_[i * cols_ + j];
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<Rational> data_;
};

// In-place reduced row echelon form; returns the rank.  If `pivots` is
// given it receives the pivot column of each nonzero row.
std::size_t rref(RatMat& m, std::vector<std::size_t>* pivots = nullptr);

std::size_t rank(RatMat m);

// One solution of A x = b (free variables set to zero), or nullopt when
// the system is inconsistent.
std::optional<std::vector<Rational>> solve(const RatMat& a,
                                           const std::vector<Rational>& b);

// Basis of the kernel of A, one vector per free column.
std::vector<std::vector<Rational>> nullspace(const RatMat& a);

std::optional<RatMat> inverse(const RatMat& a);

}  // namespace qfi
