#include "qfi/ratmat.hpp"

#include <algorithm>

namespace qfi {

std::size_t rref(RatMat& m, std::vector<std::size_t>* pivots) {
    if (pivots) pivots->clear();
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t p = row;
        while (p < m.rows() && m.at(p, col) == 0) ++p;
        if (p == m.rows()) continue;
        if (p != row)
            for (std::size_t j = col; j < m.cols(); ++j)
                std::swap(m.at(p, j), m.at(row, j));
        Rational inv = Rational(1) / m.at(row, col);
        for (std::size_t j = col; j < m.cols(); ++j) m.at(row, j) *= inv;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            if (i == row || m.at(i, col) == 0) continue;
            Rational f = m.at(i, col);
            for (std::size_t j = col; j < m.cols(); ++j)
                m.at(i, j) -= f * m.at(row, j);
        }
        if (pivots) pivots->push_back(col);
        ++row;
    }
    return row;
}

std::size_t rank(RatMat m) { return rref(m); }

std::optional<std::vector<Rational>> solve(const RatMat& a,
                                           const std::vector<Rational>& b) {
    RatMat aug(a.rows(), a.cols() + 1);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) aug.at(i, j) = a.at(i, j);
        aug.at(i, a.cols()) = b[i];
    }
    std::vector<std::size_t> pivots;
    std::size_t r = rref(aug, &pivots);
    for (std::size_t i = 0; i < r; ++i)
        if (pivots[i] == a.cols()) return std::nullopt;  // 0 = nonzero
    std::vector<Rational> x(a.cols(), Rational(0));
    for (std::size_t i = 0; i < r; ++i) x[pivots[i]] = aug.at(i, a.cols());
    return x;
}

std::vector<std::vector<Rational>> nullspace(const RatMat& a) {
    RatMat m = a;
    std::vector<std::size_t> pivots;
    std::size_t r = rref(m, &pivots);
    std::vector<bool> is_pivot(a.cols(), false);
    for (std::size_t p : pivots) is_pivot[p] = true;
    std::vector<std::vector<Rational>> basis;
    for (std::size_t free = 0; free < a.cols(); ++free) {
        if (is_pivot[free]) continue;
        std::vector<Rational> v(a.cols(), Rational(0));
        v[free] = 1;
        for (std::size_t i = 0; i < r; ++i) v[pivots[i]] = -m.at(i, free);
        basis.push_back(std::move(v));
    }
    return basis;
}

std::optional<RatMat> inverse(const RatMat& a) {
    if (a.rows() != a.cols()) return std::nullopt;
    std::size_t n = a.rows();
    RatMat aug(n, 2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug.at(i, j) = a.at(i, j);
        aug.at(i, n + i) = 1;
    }
    if (rref(aug) != n) return std::nullopt;
    RatMat inv(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv.at(i, j) = aug.at(i, n + j);
    return inv;
}

}  // namespace qfi
