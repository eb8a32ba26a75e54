#include "qfi/linearize.hpp"

#include "qfi/rationalize.hpp"

namespace qfi {

std::map<std::size_t, Rational> PolyCoeffTable::extract(
    const std::vector<Expr>& slots) {
    std::map<std::size_t, Rational> col;
    for (std::size_t s = 0; s < slots.size(); ++s) {
        auto f = to_rational_fraction(slots[s]);
        if (!f) throw Error("coefficient extraction: not a polynomial");
        const Rational* dc = f->den.constant_value();
        if (!dc) throw Error("coefficient extraction: not a polynomial");
        for (const auto& [mono, c] : f->num.terms()) {
            auto [it, fresh] = row_of_.try_emplace({s, mono}, row_of_.size());
            (void)fresh;
            col[it->second] = c / *dc;
        }
    }
    return col;
}

RatMat columns_to_matrix(
    const std::vector<std::map<std::size_t, Rational>>& cols,
    std::size_t rows) {
    RatMat m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (const auto& [i, v] : cols[j]) m.at(i, j) = v;
    return m;
}

}  // namespace qfi
