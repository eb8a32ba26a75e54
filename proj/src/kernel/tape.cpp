#include "qfi/tape.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <unordered_map>

namespace qfi {

namespace {

struct NodeKey {
    Expr e;
};
struct NodeKeyHash {
    std::size_t operator()(const NodeKey& k) const { return k.e.hash(); }
};
struct NodeKeyEq {
    bool operator()(const NodeKey& a, const NodeKey& b) const {
        return structurally_equal(a.e, b.e);
    }
};

struct Compiler {
    std::unordered_map<NodeKey, std::uint32_t, NodeKeyHash, NodeKeyEq> slot_of;
    std::map<std::string, std::uint32_t> channel;  // input name -> index
    std::vector<TapeInstr> code;
    std::uint32_t slots = 0;

    std::uint32_t fresh() { return slots++; }

    std::uint32_t emit(TapeInstr i) {
        code.push_back(i);
        return i.dst;
    }

    std::uint32_t compile(const Expr& e) {
        NodeKey key{e};
        auto it = slot_of.find(key);
        if (it != slot_of.end()) return it->second;
        std::uint32_t dst = 0;
        switch (e.kind()) {
            case Kind::Num:
                dst = fresh();
                emit({TapeOp::Const, dst, 0, 0, 0, 1, to_double(e.value())});
                break;
            case Kind::Sym:
                dst = fresh();
                emit({TapeOp::Input, dst, channel.at(symbol_name(e.sym_id())), 0,
                      0, 1, 0.0});
                break;
            case Kind::Fn:
                dst = fresh();
                emit({TapeOp::Input, dst, channel.at("fn:" + e.fn_name()), 0, 0,
                      1, 0.0});
                break;
            case Kind::Add:
            case Kind::Mul: {
                TapeOp op = e.kind() == Kind::Add ? TapeOp::Add : TapeOp::Mul;
                std::uint32_t acc = compile(e.kids()[0]);
                for (std::size_t i = 1; i < e.kids().size(); ++i) {
                    std::uint32_t rhs = compile(e.kids()[i]);
                    std::uint32_t nxt = fresh();
                    emit({op, nxt, acc, rhs, 0, 1, 0.0});
                    acc = nxt;
                }
                dst = acc;
                break;
            }
            case Kind::Pow: {
                const Rational& ex = e.exponent();
                if (!ex.get_num().fits_slong_p() || !ex.get_den().fits_ulong_p())
                    throw Error("exponent out of range in tape compilation");
                long p = ex.get_num().get_si();
                unsigned long q = ex.get_den().get_ui();
                std::uint32_t a = compile(e.base());
                dst = fresh();
                TapeOp op = q == 1   ? TapeOp::PowInt
                            : q == 2 ? TapeOp::PowSqrt
                                     : TapeOp::PowReal;
                emit({op, dst, a, 0, p, q, 0.0});
                break;
            }
            case Kind::Sin:
            case Kind::Cos:
            case Kind::Exp:
            case Kind::Log: {
                std::uint32_t a = compile(e.arg());
                dst = fresh();
                TapeOp op = e.kind() == Kind::Sin   ? TapeOp::Sin
                            : e.kind() == Kind::Cos ? TapeOp::Cos
                            : e.kind() == Kind::Exp ? TapeOp::Exp
                                                    : TapeOp::Log;
                emit({op, dst, a, 0, 0, 1, 0.0});
                break;
            }
        }
        slot_of.emplace(key, dst);
        return dst;
    }
};

bool force_scalar() { return std::getenv("QFI_FORCE_SCALAR") != nullptr; }

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Tape Tape::compile(const std::vector<Expr>& outputs) {
    Tape t;
    {
        std::vector<std::string> names;
        for (const auto& e : outputs) {
            for (const auto& s : free_symbols(e))
                names.push_back(symbol_name(s.sym_id()));
            for (const auto& f : opaque_functions(e))
                names.push_back("fn:" + f.fn_name());
        }
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        t.inputs_ = std::move(names);
    }
    Compiler c;
    for (std::uint32_t i = 0; i < t.inputs_.size(); ++i)
        c.channel.emplace(t.inputs_[i], i);
    for (const auto& e : outputs) t.output_slots_.push_back(c.compile(e));
    t.code_ = std::move(c.code);
    t.slots_ = c.slots;
    return t;
}

const char* Tape::active_kernel() {
    return avx2_available() && !force_scalar() ? "avx2" : "scalar";
}

void Tape::run(const double* const* in, double* const* out, std::size_t n,
               KernelChoice k) const {
    switch (k) {
        case KernelChoice::Scalar:
            tape_run_scalar(*this, in, out, n);
            return;
        case KernelChoice::Avx2:
            tape_run_avx2(*this, in, out, n);
            return;
        case KernelChoice::Auto:
            if (avx2_available() && !force_scalar())
                tape_run_avx2(*this, in, out, n);
            else
                tape_run_scalar(*this, in, out, n);
            return;
    }
}

}  // namespace qfi
