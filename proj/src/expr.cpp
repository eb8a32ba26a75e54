#include "qfi/expr.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <set>
#include <shared_mutex>
#include <unordered_map>

namespace qfi {

/* ------------------------------ symbols -------------------------------- */

namespace {
// Function-local so interning works during static initialization of other
// translation units (tests keep file-scope Expr constants).
struct SymRegistry {
    std::shared_mutex mutex;
    std::deque<std::string> names;  // deque: stable references on growth
    std::unordered_map<std::string, SymId> index;

    static SymRegistry& get() {
        static SymRegistry r;
        return r;
    }
};
}  // namespace

SymId intern_symbol(const std::string& name) {
    if (name.empty()) throw Error("empty symbol name");
    SymRegistry& reg = SymRegistry::get();
    {
        std::shared_lock lk(reg.mutex);
        auto it = reg.index.find(name);
        if (it != reg.index.end()) return it->second;
    }
    std::unique_lock lk(reg.mutex);
    auto it = reg.index.find(name);
    if (it != reg.index.end()) return it->second;
    SymId id = static_cast<SymId>(reg.names.size());
    reg.names.push_back(name);
    reg.index.emplace(name, id);
    return id;
}

const std::string& symbol_name(SymId id) {
    SymRegistry& reg = SymRegistry::get();
    std::shared_lock lk(reg.mutex);
    return reg.names.at(id);
}

/* ----------------------------- node helpers ---------------------------- */

namespace {

inline std::size_t mix(std::size_t h, std::size_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
}

std::size_t node_hash(const ExprNode& n) {
    std::size_t h = static_cast<std::size_t>(n.kind) * 0x100000001b3ULL + 1469598103934665603ULL;
    switch (n.kind) {
        case Kind::Num: return mix(h, hash_rational(n.num));
        case Kind::Sym: return mix(h, std::hash<std::string>{}(symbol_name(n.sym)));
        // Rules are excluded on purpose: they may not be bound yet when the
        // node is created, and they can reference the node itself.
        case Kind::Fn: return mix(h, std::hash<std::string>{}(n.fn->name));
        case Kind::Pow: h = mix(h, hash_rational(n.num)); break;
        default: break;
    }
    for (const auto& k : n.kids) h = mix(h, k.hash());
    return h;
}

}  // namespace

struct ExprFactory {
    static Expr wrap(std::shared_ptr<const ExprNode> p) {
        return Expr(std::move(p));
    }
};

namespace {

Expr make_node(ExprNode&& n) {
    n.hash = node_hash(n);
    return ExprFactory::wrap(std::make_shared<const ExprNode>(std::move(n)));
}

using FnPairGuard = std::set<std::pair<const FnDef*, const FnDef*>>;

int compare_guarded(const Expr& a, const Expr& b, FnPairGuard& guard);

int compare_kids(const std::vector<Expr>& a, const std::vector<Expr>& b, FnPairGuard& g) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = compare_guarded(a[i], b[i], g)) return c;
    if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
    return 0;
}

int compare_guarded(const Expr& a, const Expr& b, FnPairGuard& guard) {
    if (a.raw() == b.raw()) return 0;
    if (a.kind() != b.kind())
        return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
    switch (a.kind()) {
        case Kind::Num:
            return cmp(a.value(), b.value());
        case Kind::Sym:
            return symbol_name(a.sym_id()).compare(symbol_name(b.sym_id()));
        case Kind::Fn: {
            const FnDef* fa = a.fn_def().get();
            const FnDef* fb = b.fn_def().get();
            if (fa == fb) return 0;
            if (int c = fa->name.compare(fb->name)) return c;
            if (fa->rules.size() != fb->rules.size())
                return fa->rules.size() < fb->rules.size() ? -1 : 1;
            auto key = std::make_pair(std::min(fa, fb), std::max(fa, fb));
            if (guard.count(key)) return 0;  // already comparing this pair
            guard.insert(key);
            for (std::size_t i = 0; i < fa->rules.size(); ++i) {
                int c = symbol_name(fa->rules[i].first)
                            .compare(symbol_name(fb->rules[i].first));
                if (c) return c;
                if ((c = compare_guarded(fa->rules[i].second, fb->rules[i].second, guard)))
                    return c;
            }
            return 0;
        }
        case Kind::Pow:
            if (int c = compare_guarded(a.base(), b.base(), guard)) return c;
            return cmp(a.exponent(), b.exponent());
        default:
            return compare_kids(a.kids(), b.kids(), guard);
    }
}

Rational rational_ipow(const Rational& b, long p) {
    if (p == 0) return Rational(1);
    bool neg = p < 0;
    unsigned long u = neg ? static_cast<unsigned long>(-(p + 1)) + 1UL
                          : static_cast<unsigned long>(p);
    if (neg && b == 0) throw DomainError("0 raised to a negative power");
    mpz_class n, d;
    mpz_pow_ui(n.get_mpz_t(), b.get_num().get_mpz_t(), u);
    mpz_pow_ui(d.get_mpz_t(), b.get_den().get_mpz_t(), u);
    Rational r = neg ? Rational(d, n) : Rational(n, d);
    r.canonicalize();
    return r;
}

}  // namespace

int compare(const Expr& a, const Expr& b) {
    FnPairGuard g;
    return compare_guarded(a, b, g);
}

bool structurally_equal(const Expr& a, const Expr& b) {
    if (a.raw() == b.raw()) return true;
    if (a.hash() != b.hash()) return false;
    return compare(a, b) == 0;
}

namespace {
struct ExprLess {
    bool operator()(const Expr& a, const Expr& b) const { return compare(a, b) < 0; }
};
}  // namespace

/* --------------------------- canonical builders ------------------------ */

Expr::Expr() : node_() { *this = num(0); }

Expr Expr::num(const Rational& r) {
    ExprNode n;
    n.kind = Kind::Num;
    n.num = r;
    n.num.canonicalize();
    return make_node(std::move(n));
}

Expr Expr::num(long p, long q) { return num(rat(p, q)); }

Expr Expr::sym(const std::string& name) { return sym(intern_symbol(name)); }

Expr Expr::sym(SymId id) {
    ExprNode n;
    n.kind = Kind::Sym;
    n.sym = id;
    return make_node(std::move(n));
}

Expr Expr::add(std::vector<Expr> kids) {
    Rational constant(0);
    std::map<Expr, Rational, ExprLess> terms;

    auto absorb = [&](const Expr& e, const Rational& scale, auto&& self) -> void {
        if (e.is_num()) {
            constant += e.value() * scale;
            return;
        }
        if (e.kind() == Kind::Add) {
            for (const auto& k : e.kids()) self(k, scale, self);
            return;
        }
        Rational coeff = scale;
        Expr core = e;
        if (e.kind() == Kind::Mul && e.kids().front().is_num()) {
            coeff *= e.kids().front().value();
            std::vector<Expr> rest(e.kids().begin() + 1, e.kids().end());
            if (rest.size() == 1) {
                core = rest[0];
            } else {
                ExprNode n;
                n.kind = Kind::Mul;
                n.kids = std::move(rest);
                core = make_node(std::move(n));
            }
        }
        auto [it, fresh] = terms.emplace(core, coeff);
        if (!fresh) it->second += coeff;
    };
    for (const auto& k : kids) absorb(k, Rational(1), absorb);

    std::vector<Expr> out;
    if (constant != 0) out.push_back(num(constant));
    for (const auto& [core, coeff] : terms) {
        if (coeff == 0) continue;
        if (coeff == 1)
            out.push_back(core);
        else
            out.push_back(mul({num(coeff), core}));
    }
    if (out.empty()) return num(0);
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = Kind::Add;
    n.kids = std::move(out);
    return make_node(std::move(n));
}

Expr Expr::mul(std::vector<Expr> kids) {
    Rational coeff(1);
    std::map<Expr, Rational, ExprLess> bases;

    auto absorb = [&](const Expr& e, auto&& self) -> void {
        if (e.is_num()) {
            coeff *= e.value();
            return;
        }
        if (e.kind() == Kind::Mul) {
            for (const auto& k : e.kids()) self(k, self);
            return;
        }
        if (e.kind() == Kind::Pow) {
            auto [it, fresh] = bases.emplace(e.base(), e.exponent());
            if (!fresh) it->second += e.exponent();
            return;
        }
        auto [it, fresh] = bases.emplace(e, Rational(1));
        if (!fresh) it->second += 1;
    };
    for (const auto& k : kids) absorb(k, absorb);
    if (coeff == 0) return num(0);

    std::vector<Expr> out;
    bool redo = false;
    for (const auto& [base, e] : bases) {
        if (e == 0) continue;
        Expr p = pow(base, e);
        // Merged exponents can collapse to a number (2^(1/2) * 2^(1/2) -> 2)
        // or re-open a product; fold those cases with one more pass.
        if (p.is_num() || p.kind() == Kind::Mul) redo = true;
        out.push_back(p);
    }
    if (redo) {
        out.push_back(num(coeff));
        return mul(std::move(out));
    }
    if (out.empty()) return num(coeff);
    if (coeff != 1) out.insert(out.begin(), num(coeff));
    if (out.size() == 1) return out[0];
    ExprNode n;
    n.kind = Kind::Mul;
    n.kids = std::move(out);
    return make_node(std::move(n));
}

Expr Expr::pow(const Expr& base, const Rational& exponent) {
    Rational e = exponent;
    e.canonicalize();
    if (e == 0) return num(1);  // 0^0 := 1 by convention
    if (e == 1) return base;
    if (base.is_num()) {
        const Rational& b = base.value();
        if (b == 0) {
            if (e < 0) throw DomainError("0 raised to a negative power");
            return num(0);
        }
        if (b == 1) return num(1);
        if (is_integer(e) && e.get_num().fits_slong_p())
            return num(rational_ipow(b, e.get_num().get_si()));
        if (e.get_den().fits_ulong_p() && e.get_num().fits_slong_p()) {
            if (auto root = exact_root(b, e.get_den().get_ui()))
                return num(rational_ipow(*root, e.get_num().get_si()));
        }
        // irrational constant such as 2^(1/2): keep symbolic
    }
    if (base.kind() == Kind::Pow && is_integer(e))
        return pow(base.base(), base.exponent() * e);
    if (base.kind() == Kind::Mul && is_integer(e)) {
        std::vector<Expr> kids;
        kids.reserve(base.kids().size());
        for (const auto& k : base.kids()) kids.push_back(pow(k, e));
        return mul(std::move(kids));
    }
    if (base.kind() == Kind::Pow && !is_integer(base.exponent())) {
        // Both exponent layers are fractional, so the inner base is
        // positive wherever the whole expression evaluates; stacking the
        // exponents is sound. (With an integer inner layer it is not:
        // (x^2)^(1/2) differs from x on x < 0.)
        return pow(base.base(), base.exponent() * e);
    }
    if (base.kind() == Kind::Mul && base.kids()[0].is_num() &&
        base.kids()[0].value() > 0) {
        // A positive constant factor scales out of any rational power;
        // without this split fractional powers of c*f would smuggle the
        // sign of the root of c into an algebraic auxiliary.
        std::vector<Expr> rest(base.kids().begin() + 1, base.kids().end());
        return mul({pow(base.kids()[0], e), pow(mul(std::move(rest)), e)});
    }
    ExprNode n;
    n.kind = Kind::Pow;
    n.num = e;
    n.kids = {base};
    return make_node(std::move(n));
}

namespace {
Expr unary(Kind k, const Expr& e) {
    ExprNode n;
    n.kind = k;
    n.kids = {e};
    return make_node(std::move(n));
}
}  // namespace

Expr Expr::sin(const Expr& e) {
    if (e.is_zero()) return num(0);
    return unary(Kind::Sin, e);
}

Expr Expr::cos(const Expr& e) {
    if (e.is_zero()) return num(1);
    return unary(Kind::Cos, e);
}

Expr Expr::exp(const Expr& e) {
    if (e.is_zero()) return num(1);
    return unary(Kind::Exp, e);
}

Expr Expr::log(const Expr& e) {
    if (e.is_one()) return num(0);
    return unary(Kind::Log, e);
}

Expr Expr::fn(const std::string& name) {
    if (name.empty()) throw Error("empty function name");
    ExprNode n;
    n.kind = Kind::Fn;
    n.fn = std::make_shared<FnDef>();
    n.fn->name = name;
    return make_node(std::move(n));
}

void Expr::bind_rule(const Expr& var, const Expr& derivative) const {
    if (kind() != Kind::Fn) throw Error("bind_rule on a non-function node");
    if (var.kind() != Kind::Sym) throw Error("derivative rules are bound per symbol");
    FnDef& def = *node_->fn;
    if (def.frozen) throw Error("function '" + def.name + "' already frozen");
    for (auto& [s, _] : def.rules)
        if (s == var.sym_id()) throw Error("duplicate rule for " + symbol_name(s));
    def.rules.emplace_back(var.sym_id(), derivative);
    std::sort(def.rules.begin(), def.rules.end(), [](const auto& a, const auto& b) {
        return symbol_name(a.first) < symbol_name(b.first);
    });
}

void Expr::freeze_fn() const {
    if (kind() != Kind::Fn) throw Error("freeze_fn on a non-function node");
    node_->fn->frozen = true;
}

/* ------------------------------ operators ------------------------------ */

Expr operator+(const Expr& a, const Expr& b) { return Expr::add({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::add({a, Expr::mul({Expr::num(-1), b})}); }
Expr operator-(const Expr& a) { return Expr::mul({Expr::num(-1), a}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::mul({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::mul({a, Expr::pow(b, Rational(-1))}); }
Expr operator+(const Expr& a, long b) { return a + Expr::num(b); }
Expr operator+(long a, const Expr& b) { return Expr::num(a) + b; }
Expr operator-(const Expr& a, long b) { return a - Expr::num(b); }
Expr operator-(long a, const Expr& b) { return Expr::num(a) - b; }
Expr operator*(const Expr& a, long b) { return a * Expr::num(b); }
Expr operator*(long a, const Expr& b) { return Expr::num(a) * b; }
Expr operator*(const Rational& a, const Expr& b) { return Expr::num(a) * b; }
Expr operator*(const Expr& a, const Rational& b) { return a * Expr::num(b); }
Expr operator/(const Expr& a, long b) { return a * Expr::num(rat(1, b)); }
Expr pow(const Expr& base, const Rational& e) { return Expr::pow(base, e); }
Expr pow(const Expr& base, long p, long q) { return Expr::pow(base, rat(p, q)); }
Expr sqrt(const Expr& e) { return Expr::pow(e, rat(1, 2)); }

/* ---------------------------- differentiation -------------------------- */

Expr differentiate(const Expr& e, const Expr& var) {
    if (var.kind() != Kind::Sym && var.kind() != Kind::Fn)
        throw Error("differentiate: variable must be a symbol or opaque function");
    switch (e.kind()) {
        case Kind::Num:
            return Expr::num(0);
        case Kind::Sym:
            return Expr::num(var.kind() == Kind::Sym && var.sym_id() == e.sym_id() ? 1 : 0);
        case Kind::Fn: {
            if (var.kind() == Kind::Fn)
                return Expr::num(structurally_equal(e, var) ? 1 : 0);
            for (const auto& [s, rule] : e.fn_def()->rules)
                if (s == var.sym_id()) return rule;
            return Expr::num(0);
        }
        case Kind::Add: {
            std::vector<Expr> kids;
            kids.reserve(e.kids().size());
            for (const auto& k : e.kids()) kids.push_back(differentiate(k, var));
            return Expr::add(std::move(kids));
        }
        case Kind::Mul: {
            std::vector<Expr> terms;
            const auto& kids = e.kids();
            for (std::size_t i = 0; i < kids.size(); ++i) {
                std::vector<Expr> factors = kids;
                factors[i] = differentiate(kids[i], var);
                terms.push_back(Expr::mul(std::move(factors)));
            }
            return Expr::add(std::move(terms));
        }
        case Kind::Pow: {
            Expr db = differentiate(e.base(), var);
            return Expr::mul({Expr::num(e.exponent()),
                              Expr::pow(e.base(), e.exponent() - 1), db});
        }
        case Kind::Sin:
            return Expr::cos(e.arg()) * differentiate(e.arg(), var);
        case Kind::Cos:
            return Expr::num(-1) * Expr::sin(e.arg()) * differentiate(e.arg(), var);
        case Kind::Exp:
            return e * differentiate(e.arg(), var);
        case Kind::Log:
            return differentiate(e.arg(), var) / e.arg();
    }
    throw Error("unreachable");
}

Expr differentiate(const Expr& e, const std::string& name) {
    return differentiate(e, Expr::sym(name));
}

/* ------------------------------ traversal ------------------------------ */

namespace {
Expr substitute_memo(const Expr& e, const Expr& what, const Expr& with,
                     std::unordered_map<const ExprNode*, Expr>& memo) {
    if (structurally_equal(e, what)) return with;
    auto it = memo.find(e.raw());
    if (it != memo.end()) return it->second;
    Expr out = e;
    switch (e.kind()) {
        case Kind::Num:
        case Kind::Sym:
        case Kind::Fn:
            break;  // fn rules are part of the definition, not the tree
        case Kind::Add:
        case Kind::Mul: {
            std::vector<Expr> kids;
            kids.reserve(e.kids().size());
            for (const auto& k : e.kids())
                kids.push_back(substitute_memo(k, what, with, memo));
            out = e.kind() == Kind::Add ? Expr::add(std::move(kids))
                                        : Expr::mul(std::move(kids));
            break;
        }
        case Kind::Pow:
            out = Expr::pow(substitute_memo(e.base(), what, with, memo), e.exponent());
            break;
        case Kind::Sin:
            out = Expr::sin(substitute_memo(e.arg(), what, with, memo));
            break;
        case Kind::Cos:
            out = Expr::cos(substitute_memo(e.arg(), what, with, memo));
            break;
        case Kind::Exp:
            out = Expr::exp(substitute_memo(e.arg(), what, with, memo));
            break;
        case Kind::Log:
            out = Expr::log(substitute_memo(e.arg(), what, with, memo));
            break;
    }
    memo.emplace(e.raw(), out);
    return out;
}
}  // namespace

Expr substitute(const Expr& e, const Expr& what, const Expr& with) {
    std::unordered_map<const ExprNode*, Expr> memo;
    return substitute_memo(e, what, with, memo);
}

namespace {
void collect(const Expr& e, Kind want, std::map<Expr, int, ExprLess>& found,
             std::set<const ExprNode*>& seen) {
    if (!seen.insert(e.raw()).second) return;
    if (e.kind() == want) found.emplace(e, 1);
    for (const auto& k : e.kids()) collect(k, want, found, seen);
}
}  // namespace

std::vector<Expr> free_symbols(const Expr& e) {
    std::map<Expr, int, ExprLess> found;
    std::set<const ExprNode*> seen;
    collect(e, Kind::Sym, found, seen);
    std::vector<Expr> out;
    for (const auto& [s, _] : found) out.push_back(s);
    return out;
}

std::vector<Expr> opaque_functions(const Expr& e) {
    std::map<Expr, int, ExprLess> found;
    std::set<const ExprNode*> seen;
    collect(e, Kind::Fn, found, seen);
    std::vector<Expr> out;
    for (const auto& [s, _] : found) out.push_back(s);
    return out;
}

/* ------------------------------ evaluation ----------------------------- */

void Binding::set(const Expr& symbol, const Rational& v) {
    if (symbol.kind() != Kind::Sym) throw Error("Binding::set expects a symbol");
    syms_[symbol.sym_id()] = EvalValue::from(v);
}

void Binding::set(const Expr& symbol, double v) {
    if (symbol.kind() != Kind::Sym) throw Error("Binding::set expects a symbol");
    syms_[symbol.sym_id()] = EvalValue::from(v);
}

void Binding::set(const std::string& name, double v) {
    syms_[intern_symbol(name)] = EvalValue::from(v);
}

void Binding::set_fn(const std::string& fn_name, double v) { fns_[fn_name] = v; }

const EvalValue* Binding::find(SymId id) const {
    auto it = syms_.find(id);
    return it == syms_.end() ? nullptr : &it->second;
}

const double* Binding::find_fn(const std::string& fn_name) const {
    auto it = fns_.find(fn_name);
    return it == fns_.end() ? nullptr : &it->second;
}

double pow_rational_double(double x, long p, unsigned long q) {
    auto ipow = [](double b, long n) {
        if (n < 0) return 1.0 / [](double bb, long m) {
            double r = 1.0;
            while (m) {
                if (m & 1) r *= bb;
                bb *= bb;
                m >>= 1;
            }
            return r;
        }(b, -n);
        double r = 1.0;
        while (n) {
            if (n & 1) r *= b;
            b *= b;
            n >>= 1;
        }
        return r;
    };
    if (q == 1) return ipow(x, p);
    if (q == 2) return ipow(std::sqrt(x), p);
    return std::pow(x, static_cast<double>(p) / static_cast<double>(q));
}

namespace {
EvalValue eval_memo(const Expr& e, const Binding& b,
                    std::unordered_map<const ExprNode*, EvalValue>& memo) {
    auto it = memo.find(e.raw());
    if (it != memo.end()) return it->second;
    EvalValue out;
    switch (e.kind()) {
        case Kind::Num:
            out = EvalValue::from(e.value());
            break;
        case Kind::Sym: {
            const EvalValue* v = b.find(e.sym_id());
            if (!v) throw Error("unbound symbol '" + symbol_name(e.sym_id()) + "'");
            out = *v;
            break;
        }
        case Kind::Fn: {
            const double* v = b.find_fn(e.fn_name());
            if (!v) throw Error("unbound function '" + e.fn_name() + "'");
            out = EvalValue::from(*v);
            break;
        }
        case Kind::Add:
        case Kind::Mul: {
            bool exact = true;
            for (const auto& k : e.kids())
                if (!eval_memo(k, b, memo).exact) exact = false;
            bool add = e.kind() == Kind::Add;
            if (exact) {
                Rational s(add ? 0 : 1);
                for (const auto& k : e.kids()) {
                    if (add)
                        s += memo.at(k.raw()).q;
                    else
                        s *= memo.at(k.raw()).q;
                }
                out = EvalValue::from(s);
            } else {
                double s = add ? 0.0 : 1.0;
                for (const auto& k : e.kids()) {
                    if (add)
                        s += memo.at(k.raw()).d;
                    else
                        s *= memo.at(k.raw()).d;
                }
                out = EvalValue::from(s);
            }
            break;
        }
        case Kind::Pow: {
            EvalValue base = eval_memo(e.base(), b, memo);
            const Rational& ex = e.exponent();
            if (!ex.get_num().fits_slong_p() || !ex.get_den().fits_ulong_p())
                throw DomainError("exponent out of range");
            long p = ex.get_num().get_si();
            unsigned long q = ex.get_den().get_ui();
            if (base.exact && q == 1) {
                out = EvalValue::from(rational_ipow(base.q, p));
            } else {
                double x = base.d;
                if (x == 0.0 && p < 0) throw DomainError("0 raised to a negative power");
                if (x < 0.0 && q != 1) throw DomainError("fractional power of a negative value");
                out = EvalValue::from(pow_rational_double(x, p, q));
            }
            break;
        }
        case Kind::Sin:
            out = EvalValue::from(std::sin(eval_memo(e.arg(), b, memo).d));
            break;
        case Kind::Cos:
            out = EvalValue::from(std::cos(eval_memo(e.arg(), b, memo).d));
            break;
        case Kind::Exp:
            out = EvalValue::from(std::exp(eval_memo(e.arg(), b, memo).d));
            break;
        case Kind::Log: {
            double x = eval_memo(e.arg(), b, memo).d;
            if (x <= 0.0) throw DomainError("log of a non-positive value");
            out = EvalValue::from(std::log(x));
            break;
        }
    }
    memo.emplace(e.raw(), out);
    return out;
}
}  // namespace

EvalValue evaluate(const Expr& e, const Binding& b) {
    std::unordered_map<const ExprNode*, EvalValue> memo;
    return eval_memo(e, b, memo);
}

double evaluate_double(const Expr& e, const Binding& b) { return evaluate(e, b).d; }

}  // namespace qfi
