#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "qfi/tape.hpp"

using namespace qfi;

namespace {

const Expr x = Expr::sym("x");
const Expr y = Expr::sym("y");
const Expr t = Expr::sym("t");

std::vector<Expr> sample_outputs() {
    Expr F = Expr::fn("drv");
    F.freeze_fn();
    return {
        x * y + t,
        Expr::sin(x) * Expr::cos(y) + Expr::exp(t / 4),
        pow(x, Rational(7)) - pow(y, Rational(-3)),
        pow(x * x + 1, 5, 2) + pow(t + 3, -1, 2),
        pow(x * x + y * y, 2, 3),
        Expr::log(x * x + 1) + F * t,
        (x + y) * (x - y) / (t + 10),
    };
}

struct Batch {
    std::vector<std::vector<double>> in, out_a, out_b;
    std::vector<const double*> in_ptr;
    std::vector<double*> a_ptr, b_ptr;

    Batch(const Tape& tp, std::size_t n, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        auto u = [&](double lo, double hi) {
            return lo + (static_cast<double>(rng() >> 11) * 0x1.0p-53) * (hi - lo);
        };
        in.resize(tp.inputs().size(), std::vector<double>(n));
        for (auto& ch : in)
            for (auto& v : ch) v = u(-2.0, 2.0);
        out_a.resize(tp.num_outputs(), std::vector<double>(n));
        out_b.resize(tp.num_outputs(), std::vector<double>(n));
        for (auto& ch : in) in_ptr.push_back(ch.data());
        for (auto& ch : out_a) a_ptr.push_back(ch.data());
        for (auto& ch : out_b) b_ptr.push_back(ch.data());
    }
};

}  // namespace

TEST_CASE("tape discovers channels and deduplicates structurally equal nodes") {
    // sin(x) is built twice from scratch; only one Sin instruction may remain
    Expr a = Expr::sin(x) + y;
    Expr b = Expr::sin(x) * t;
    Tape tp = Tape::compile({a, b});
    CHECK(tp.inputs() == std::vector<std::string>{"t", "x", "y"});
    int sins = 0;
    for (const auto& c : tp.instructions())
        if (c.op == TapeOp::Sin) ++sins;
    CHECK(sins == 1);

    Expr F = Expr::fn("drv");
    F.freeze_fn();
    Tape tf = Tape::compile({F * x});
    CHECK(tf.inputs() == std::vector<std::string>{"fn:drv", "x"});
}

TEST_CASE("tape agrees with the tree evaluator") {
    auto outputs = sample_outputs();
    Tape tp = Tape::compile(outputs);
    const std::size_t n = 64;
    Batch batch(tp, n, 42);
    // keep bases of the half-integer powers in range
    for (std::size_t i = 0; i < n; ++i) batch.in[0][i] = std::abs(batch.in[0][i]);
    tp.run(batch.in_ptr.data(), batch.a_ptr.data(), n, KernelChoice::Scalar);

    for (std::size_t i = 0; i < n; ++i) {
        Binding bind;
        for (std::size_t c = 0; c < tp.inputs().size(); ++c) {
            const std::string& name = tp.inputs()[c];
            if (name.rfind("fn:", 0) == 0)
                bind.set_fn(name.substr(3), batch.in[c][i]);
            else
                bind.set(name, batch.in[c][i]);
        }
        for (std::size_t j = 0; j < outputs.size(); ++j) {
            double tree = evaluate_double(outputs[j], bind);
            double tape = batch.out_a[j][i];
            CHECK(tape == doctest::Approx(tree).epsilon(1e-14));
        }
    }
}

TEST_CASE("scalar and avx2 kernels match bitwise") {
    if (!avx2_available()) {
        MESSAGE("no AVX2 on this host; dispatch equivalence is vacuous here");
        return;
    }
    auto outputs = sample_outputs();
    Tape tp = Tape::compile(outputs);
    for (std::size_t n : {std::size_t(1), std::size_t(4), std::size_t(997),
                          std::size_t(1000)}) {
        Batch batch(tp, n, 1234 + n);
        tp.run(batch.in_ptr.data(), batch.a_ptr.data(), n, KernelChoice::Scalar);
        tp.run(batch.in_ptr.data(), batch.b_ptr.data(), n, KernelChoice::Avx2);
        for (std::size_t j = 0; j < tp.num_outputs(); ++j)
            CHECK(std::memcmp(batch.out_a[j].data(), batch.out_b[j].data(),
                              n * sizeof(double)) == 0);
    }
}

TEST_CASE("out-of-domain lanes yield NaN instead of throwing") {
    Tape tp = Tape::compile({Expr::log(x), pow(x, 1, 2)});
    double in0[3] = {-1.0, 0.5, 4.0};
    double o0[3], o1[3];
    const double* in[] = {in0};
    double* out[] = {o0, o1};
    tp.run(in, out, 3, KernelChoice::Scalar);
    CHECK(std::isnan(o0[0]));
    CHECK(std::isnan(o1[0]));
    CHECK(o0[2] == doctest::Approx(std::log(4.0)));
    CHECK(o1[2] == 2.0);

    if (avx2_available()) {
        double p0[3], p1[3];
        double* pout[] = {p0, p1};
        tp.run(in, pout, 3, KernelChoice::Avx2);
        CHECK(std::memcmp(o0, p0, sizeof o0) == 0);
        CHECK(std::memcmp(o1, p1, sizeof o1) == 0);
    }
}

TEST_CASE("kernel selection is overridable") {
    // Auto honors QFI_FORCE_SCALAR
    setenv("QFI_FORCE_SCALAR", "1", 1);
    CHECK(std::string(Tape::active_kernel()) == "scalar");
    unsetenv("QFI_FORCE_SCALAR");
    if (avx2_available()) CHECK(std::string(Tape::active_kernel()) == "avx2");
}
