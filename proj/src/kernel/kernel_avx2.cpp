// Four-lane variant of the scalar kernel. Arithmetic mirrors the scalar
// code operation for operation (same binary-exponentiation loop, IEEE
// sqrt, scalar libm calls per lane for the transcendentals), so results
// are bitwise identical to tape_run_scalar.

#include <cmath>
#include <vector>

#include "qfi/tape.hpp"

#if defined(__AVX2__)
#include <immintrin.h>

namespace qfi {

namespace {

inline __m256d vec_ipow(__m256d b, long nn) {
    bool neg = nn < 0;
    unsigned long m = neg ? static_cast<unsigned long>(-(nn + 1)) + 1UL
                          : static_cast<unsigned long>(nn);
    __m256d r = _mm256_set1_pd(1.0);
    while (m) {
        if (m & 1) r = _mm256_mul_pd(r, b);
        b = _mm256_mul_pd(b, b);
        m >>= 1;
    }
    if (neg) r = _mm256_div_pd(_mm256_set1_pd(1.0), r);
    return r;
}

template <double F(double)>
inline __m256d lanewise(__m256d x) {
    alignas(32) double v[4];
    _mm256_store_pd(v, x);
    for (double& e : v) e = F(e);
    return _mm256_load_pd(v);
}

double sin_d(double x) { return std::sin(x); }
double cos_d(double x) { return std::cos(x); }
double exp_d(double x) { return std::exp(x); }
double log_d(double x) { return std::log(x); }

}  // namespace

void tape_run_avx2(const Tape& t, const double* const* in, double* const* out,
                   std::size_t n) {
    const auto& code = t.instructions();
    const auto& outs = t.output_slots();
    std::vector<__m256d> s(t.num_slots());
    std::size_t main = n & ~std::size_t(3);
    for (std::size_t i = 0; i < main; i += 4) {
        for (const TapeInstr& c : code) {
            switch (c.op) {
                case TapeOp::Const:
                    s[c.dst] = _mm256_set1_pd(c.cval);
                    break;
                case TapeOp::Input:
                    s[c.dst] = _mm256_loadu_pd(in[c.a] + i);
                    break;
                case TapeOp::Add:
                    s[c.dst] = _mm256_add_pd(s[c.a], s[c.b]);
                    break;
                case TapeOp::Mul:
                    s[c.dst] = _mm256_mul_pd(s[c.a], s[c.b]);
                    break;
                case TapeOp::PowInt:
                    s[c.dst] = vec_ipow(s[c.a], c.p);
                    break;
                case TapeOp::PowSqrt:
                    s[c.dst] = vec_ipow(_mm256_sqrt_pd(s[c.a]), c.p);
                    break;
                case TapeOp::PowReal: {
                    alignas(32) double v[4];
                    _mm256_store_pd(v, s[c.a]);
                    for (double& e : v) e = pow_rational_double(e, c.p, c.q);
                    s[c.dst] = _mm256_load_pd(v);
                    break;
                }
                case TapeOp::Sin: s[c.dst] = lanewise<sin_d>(s[c.a]); break;
                case TapeOp::Cos: s[c.dst] = lanewise<cos_d>(s[c.a]); break;
                case TapeOp::Exp: s[c.dst] = lanewise<exp_d>(s[c.a]); break;
                case TapeOp::Log: s[c.dst] = lanewise<log_d>(s[c.a]); break;
            }
        }
        for (std::size_t j = 0; j < outs.size(); ++j)
            _mm256_storeu_pd(out[j] + i, s[outs[j]]);
    }
    if (main < n) {
        std::vector<const double*> tin(t.inputs().size());
        std::vector<double*> tout(outs.size());
        for (std::size_t c = 0; c < tin.size(); ++c) tin[c] = in[c] + main;
        for (std::size_t j = 0; j < tout.size(); ++j) tout[j] = out[j] + main;
        tape_run_scalar(t, tin.data(), tout.data(), n - main);
    }
}

}  // namespace qfi

#else  // no AVX2 at compile time: defer to the scalar kernel

namespace qfi {
void tape_run_avx2(const Tape& t, const double* const* in, double* const* out,
                   std::size_t n) {
    tape_run_scalar(t, in, out, n);
}
}  // namespace qfi

#endif
