// Exact coefficient extraction for building linear-algebra problems out of
// lists of polynomial expressions. Rows are identified by (slot, monomial):
// all columns extracted through one table share the same row space.
#ifndef QFI_LINEARIZE_HPP
#define QFI_LINEARIZE_HPP

#include <map>
#include <vector>

#include "qfi/expr.hpp"
#include "qfi/poly.hpp"
#include "qfi/ratmat.hpp"

namespace qfi {

class PolyCoeffTable {
  public:
    // Coefficient column of one flattened expression list; every slot must be
    // a polynomial (rational-fraction form with constant denominator).
    std::map<std::size_t, Rational> extract(const std::vector<Expr>& slots);

    std::size_t rows() const { return row_of_.size(); }

  private:
    std::map<std::pair<std::size_t, Monomial>, std::size_t> row_of_;
};

RatMat columns_to_matrix(
    const std::vector<std::map<std::size_t, Rational>>& cols,
    std::size_t rows);

}  // namespace qfi

#endif
