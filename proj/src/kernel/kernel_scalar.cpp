#include <cmath>
#include <vector>

#include "qfi/tape.hpp"

namespace qfi {

void tape_run_scalar(const Tape& t, const double* const* in,
                     double* const* out, std::size_t n) {
    std::vector<double> s(t.num_slots());
    const auto& code = t.instructions();
    const auto& outs = t.output_slots();
    for (std::size_t i = 0; i < n; ++i) {
        for (const TapeInstr& c : code) {
            switch (c.op) {
                case TapeOp::Const: s[c.dst] = c.cval; break;
                case TapeOp::Input: s[c.dst] = in[c.a][i]; break;
                case TapeOp::Add: s[c.dst] = s[c.a] + s[c.b]; break;
                case TapeOp::Mul: s[c.dst] = s[c.a] * s[c.b]; break;
                case TapeOp::PowInt:
                    s[c.dst] = pow_rational_double(s[c.a], c.p, 1);
                    break;
                case TapeOp::PowSqrt:
                    s[c.dst] = pow_rational_double(s[c.a], c.p, 2);
                    break;
                case TapeOp::PowReal:
                    s[c.dst] = pow_rational_double(s[c.a], c.p, c.q);
                    break;
                case TapeOp::Sin: s[c.dst] = std::sin(s[c.a]); break;
                case TapeOp::Cos: s[c.dst] = std::cos(s[c.a]); break;
                case TapeOp::Exp: s[c.dst] = std::exp(s[c.a]); break;
                case TapeOp::Log: s[c.dst] = std::log(s[c.a]); break;
            }
        }
        for (std::size_t j = 0; j < outs.size(); ++j) out[j][i] = s[outs[j]];
    }
}

}  // namespace qfi
