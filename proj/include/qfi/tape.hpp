#pragma once

// Batch evaluation of expression sets over many points.
//
// A Tape is a flattened, deduplicated instruction list for a group of
// expressions. run() evaluates all outputs at n points laid out as one
// array per input channel (structure of arrays). Two kernels exist: a
// scalar reference and an AVX2 variant processing four points per step;
// the active one is picked at runtime (AVX2 when the CPU has it, unless
// QFI_FORCE_SCALAR is set in the environment). Both kernels are built to
// produce bitwise-identical results:
//
//   * contraction to FMA is off for the whole project,
//   * rational powers go through pow_rational_double in the scalar kernel
//     and through the same multiplication sequence (and IEEE sqrt) in the
//     vector one,
//   * sin/cos/exp/log call scalar libm per lane in both.
//
// Unlike the tree evaluator, kernels never throw on domain violations;
// out-of-domain lanes yield NaN/Inf and callers filter them.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "qfi/expr.hpp"

namespace qfi {

enum class TapeOp : std::uint8_t {
    Const,   // dst = cval
    Input,   // dst = channel a
    Add,     // dst = slot a + slot b
    Mul,     // dst = slot a * slot b
    PowInt,  // dst = slot a ^ p           (binary exponentiation)
    PowSqrt, // dst = sqrt(slot a) ^ p     (p odd; even powers fold to PowInt)
    PowReal, // dst = slot a ^ (p/q)       (one std::pow per lane)
    Sin,
    Cos,
    Exp,
    Log,
};

struct TapeInstr {
    TapeOp op;
    std::uint32_t dst = 0, a = 0, b = 0;
    long p = 0;
    unsigned long q = 1;
    double cval = 0.0;
};

enum class KernelChoice { Auto, Scalar, Avx2 };

class Tape {
  public:
    // Inputs are discovered from the expressions: one channel per free
    // symbol plus one per opaque function (channel name "fn:<name>"),
    // name-sorted. Compilation fails only on exponents too large for
    // machine integers.
    static Tape compile(const std::vector<Expr>& outputs);

    const std::vector<std::string>& inputs() const { return inputs_; }
    std::size_t num_outputs() const { return output_slots_.size(); }
    std::size_t num_slots() const { return slots_; }
    const std::vector<TapeInstr>& instructions() const { return code_; }
    const std::vector<std::uint32_t>& output_slots() const { return output_slots_; }

    // in[i]: points for channel inputs()[i], length n. out[j]: room for
    // output j, length n.
    void run(const double* const* in, double* const* out, std::size_t n,
             KernelChoice k = KernelChoice::Auto) const;

    // The kernel Auto resolves to right now.
    static const char* active_kernel();

  private:
    std::vector<std::string> inputs_;
    std::vector<TapeInstr> code_;
    std::vector<std::uint32_t> output_slots_;
    std::size_t slots_ = 0;
};

// Kernel entry points (exposed for the equivalence tests).
void tape_run_scalar(const Tape& t, const double* const* in,
                     double* const* out, std::size_t n);
void tape_run_avx2(const Tape& t, const double* const* in, double* const* out,
                   std::size_t n);
bool avx2_available();

}  // namespace qfi
