#include "qfi/rationalize.hpp"

#include <map>
#include <numeric>
#include <unordered_map>

#include "qfi/exprio.hpp"

namespace qfi {

namespace {

struct Frac {
    Poly num, den;
};

void canonicalize(Frac& f) {
    if (f.den.is_zero()) throw DomainError("zero denominator");
    if (f.num.is_zero()) {
        f.den = Poly::constant(Rational(1));
        return;
    }
    Monomial mn = f.num.extract_monomial_content();
    Monomial md = f.den.extract_monomial_content();
    Monomial g = monomial_gcd(mn, md);
    Poly keep_n, keep_d;
    keep_n.add_term(monomial_div(mn, g), Rational(1));
    keep_d.add_term(monomial_div(md, g), Rational(1));
    f.num = f.num * keep_n;
    f.den = f.den * keep_d;
    Rational fd = f.den.normalize_content();
    Poly scaled;
    for (const auto& [m, c] : f.num.terms()) scaled.add_term(m, c / fd);
    f.num = std::move(scaled);
}

Frac f_const(const Rational& c) { return {Poly::constant(c), Poly::constant(Rational(1))}; }

Frac f_add(const Frac& a, const Frac& b) {
    Frac r{a.num * b.den + b.num * a.den, a.den * b.den};
    canonicalize(r);
    return r;
}

Frac f_mul(const Frac& a, const Frac& b) {
    Frac r{a.num * b.num, a.den * b.den};
    canonicalize(r);
    return r;
}

Frac f_pow_int(const Frac& a, long p) {
    if (p == 0) return f_const(Rational(1));
    bool neg = p < 0;
    unsigned long u = neg ? static_cast<unsigned long>(-(p + 1)) + 1UL
                          : static_cast<unsigned long>(p);
    Frac r{a.num.pow(u), a.den.pow(u)};
    if (neg) {
        if (r.num.is_zero()) throw DomainError("division by an identically zero expression");
        std::swap(r.num, r.den);
    }
    canonicalize(r);
    return r;
}

struct NotRationalMark {};

struct Context {
    bool allow_ext;
    std::vector<AlgExt> exts;
    std::map<std::string, SymId> keyed;
    // Radical-index planning across conversion passes: every root of one
    // base must land on a single auxiliary (t^(1/4) and t^(1/2) as powers of
    // one quartic root), because independent auxiliaries for the same base
    // cannot be related after the fact. `seen` collects the lcm of indices
    // requested this pass; `planned` carries the previous pass's answer.
    std::map<std::string, unsigned long> planned, seen;
    int counter = 0;
    std::unordered_map<const ExprNode*, Frac> memo;

    SymId fresh(const std::string& stem, const std::string& key, unsigned m,
                const Poly& rhs, const std::string& origin, bool nonneg = false) {
        auto it = keyed.find(key);
        if (it != keyed.end()) return it->second;
        // Names may repeat across independent conversions; auxiliaries are only
        // meaningful relative to the extension list they were returned with.
        SymId s = intern_symbol("@" + stem + std::to_string(++counter));
        keyed.emplace(key, s);
        exts.push_back({s, m, rhs, origin, nonneg});
        return s;
    }

    bool is_nonneg(SymId v) const {
        for (const auto& ex : exts)
            if (ex.aux == v) return ex.nonneg;
        return false;
    }
};

std::string frac_key(const Frac& f) {
    return f.num.to_string() + " / " + f.den.to_string();
}

Frac convert(const Expr& e, Context& cx);

// primitive-part decomposition of a polynomial: P = content * prim
std::pair<Rational, Poly> split_content(const Poly& p) {
    Poly prim = p;
    Rational c = prim.normalize_content();
    return {c, prim};
}

// base^(1/q) as a power of the base's root auxiliary, whose index is the
// planned lcm of every q requested for that base (falling back to q itself
// while the plan is still catching up).
Frac planned_root(const Poly& base, unsigned long q, bool base_nonneg, Context& cx) {
    std::string base_key = base.to_string();
    auto& rec = cx.seen[base_key];
    rec = rec ? std::lcm(rec, q) : q;
    unsigned long use = q;
    if (auto it = cx.planned.find(base_key); it != cx.planned.end() && it->second % q == 0)
        use = it->second;
    SymId s = cx.fresh("rt", "rt:" + std::to_string(use) + ":" + base_key,
                       static_cast<unsigned>(use), base,
                       "(" + base_key + ")^(1/" + std::to_string(use) + ")",
                       base_nonneg || use % 2 == 0);
    Frac r{Poly::variable(s), Poly::constant(Rational(1))};
    return f_pow_int(r, static_cast<long>(use / q));
}

// f^(1/q) as a fraction over (possibly fresh) root auxiliaries
Frac root_of(const Frac& f, unsigned long q, Context& cx) {
    auto root_of_poly = [&](const Poly& p) -> Frac {
        auto [c, prim] = split_content(p);
        // numeric part: exact root if available, else its own auxiliary
        Frac num_part = f_const(Rational(1));
        if (c != 1) {
            if (auto r = exact_root(c, q)) {
                num_part = f_const(*r);
            } else {
                num_part = planned_root(Poly::constant(c), q, c > 0, cx);
            }
        }
        // Pull perfect q-th powers out of the monomial content. For even q
        // only even powers may leave the radical (x^2 is nonnegative, x is
        // not), for odd q any multiple of q may; a variable with a sign
        // guarantee follows the odd rule in either case.
        Monomial mono = prim.extract_monomial_content();
        bool poly_part_trivial = false;
        if (auto* cv = prim.constant_value()) poly_part_trivial = (*cv == 1);
        Monomial outside, inside;
        bool inside_nonneg = true;
        for (const auto& [var, k] : mono) {
            unsigned e = (q % 2 == 1 || cx.is_nonneg(var))
                             ? k / static_cast<unsigned>(q)
                             : 2 * (k / static_cast<unsigned>(2 * q));
            if (e) outside.emplace_back(var, e);
            if (k - e * q) {
                inside.emplace_back(var, k - e * static_cast<unsigned>(q));
                if (!cx.is_nonneg(var)) inside_nonneg = false;
            }
        }
        if (!outside.empty()) {
            Poly out;
            out.add_term(outside, Rational(1));
            num_part = f_mul(num_part, {out, Poly::constant(Rational(1))});
        }
        // A bare monomial in sign-guaranteed variables admits radical-index
        // reduction by the shared power: (u^2)^(1/4) is u^(1/2), not a fresh
        // fourth root whose square could be -u.
        unsigned long qq = q;
        if (poly_part_trivial && inside_nonneg && !inside.empty()) {
            unsigned g = static_cast<unsigned>(qq);
            for (const auto& [var, k] : inside) g = std::gcd(g, k);
            if (g > 1) {
                qq /= g;
                for (auto& [var, k] : inside) k /= g;
            }
        }
        Poly back;
        back.add_term(inside, Rational(1));
        prim = prim * back;
        if (auto* cv = prim.constant_value()) {
            if (*cv == 1) return num_part;
        }
        if (qq == 1) return f_mul(num_part, {prim, Poly::constant(Rational(1))});
        return f_mul(num_part,
                     planned_root(prim, qq, poly_part_trivial && inside_nonneg, cx));
    };
    Frac rn = root_of_poly(f.num);
    Frac rd = root_of_poly(f.den);
    if (rd.num.is_zero()) throw DomainError("division by an identically zero expression");
    Frac r{rn.num * rd.den, rn.den * rd.num};
    canonicalize(r);
    return r;
}

Frac convert_pow(const Expr& e, Context& cx) {
    const Rational& ex = e.exponent();
    if (!ex.get_num().fits_slong_p() || !ex.get_den().fits_ulong_p())
        throw Error("exponent out of range in rational conversion");
    long p = ex.get_num().get_si();
    unsigned long q = ex.get_den().get_ui();
    Frac base = convert(e.base(), cx);
    if (q == 1) return f_pow_int(base, p);
    if (!cx.allow_ext) throw NotRationalMark{};
    Frac root = root_of(base, q, cx);
    return f_pow_int(root, p);
}

Frac convert(const Expr& e, Context& cx) {
    auto it = cx.memo.find(e.raw());
    if (it != cx.memo.end()) return it->second;
    Frac out;
    switch (e.kind()) {
        case Kind::Num:
            out = f_const(e.value());
            break;
        case Kind::Sym:
            out = {Poly::variable(e.sym_id()), Poly::constant(Rational(1))};
            break;
        case Kind::Add: {
            out = f_const(Rational(0));
            for (const auto& k : e.kids()) out = f_add(out, convert(k, cx));
            break;
        }
        case Kind::Mul: {
            out = f_const(Rational(1));
            for (const auto& k : e.kids()) out = f_mul(out, convert(k, cx));
            break;
        }
        case Kind::Pow:
            out = convert_pow(e, cx);
            break;
        case Kind::Sin:
        case Kind::Cos: {
            if (!cx.allow_ext) throw NotRationalMark{};
            std::string akey = frac_key(convert(e.arg(), cx));
            // cosine first: the sine relation refers to it
            SymId c = cx.fresh("c", "cos:" + akey, 0, Poly(),
                               "cos of " + akey);
            Poly rel = Poly::constant(Rational(1)) -
                       Poly::variable(c) * Poly::variable(c);
            SymId s = cx.fresh("s", "sin:" + akey, 2, rel, "sin of " + akey);
            out = {Poly::variable(e.kind() == Kind::Sin ? s : c),
                   Poly::constant(Rational(1))};
            break;
        }
        case Kind::Exp: {
            if (!cx.allow_ext) throw NotRationalMark{};
            Frac arg = convert(e.arg(), cx);
            auto [c, prim_num] = split_content(arg.num);
            Frac prim{prim_num, arg.den};
            SymId b = cx.fresh("e", "exp:" + frac_key(prim), 0, Poly(),
                               "exp of " + frac_key(prim), true);
            // exp(arg) = aux^c with rational c
            if (!c.get_num().fits_slong_p() || !c.get_den().fits_ulong_p())
                throw Error("exp multiplier out of range");
            long p = c.get_num().get_si();
            unsigned long q = c.get_den().get_ui();
            Frac base{Poly::variable(b), Poly::constant(Rational(1))};
            if (q != 1) base = root_of(base, q, cx);
            out = f_pow_int(base, p);
            break;
        }
        case Kind::Log: {
            if (!cx.allow_ext) throw NotRationalMark{};
            std::string akey = frac_key(convert(e.arg(), cx));
            SymId s = cx.fresh("l", "log:" + akey, 0, Poly(), "log of " + akey);
            out = {Poly::variable(s), Poly::constant(Rational(1))};
            break;
        }
        case Kind::Fn: {
            if (!cx.allow_ext) throw NotRationalMark{};
            SymId s = cx.fresh("f", "fn:" + print_expr(e), 0, Poly(),
                               "opaque " + e.fn_name());
            out = {Poly::variable(s), Poly::constant(Rational(1))};
            break;
        }
    }
    cx.memo.emplace(e.raw(), out);
    return out;
}

}  // namespace

std::string PolyFraction::to_string() const {
    std::string n = num.to_string();
    if (auto* c = den.constant_value(); c && *c == 1) return n;
    return "(" + n + ") / (" + den.to_string() + ")";
}

std::optional<PolyFraction> to_rational_fraction(const Expr& e) {
    Context cx{false};
    try {
        Frac f = convert(e, cx);
        canonicalize(f);
        return PolyFraction{f.num, f.den};
    } catch (const NotRationalMark&) {
        return std::nullopt;
    }
}

ExtendedForm to_rational_fraction_extended(const Expr& e) {
    // Re-convert until the radical-index plan stabilizes (one extra pass in
    // the common case; the cap guards pathological ping-ponging, where the
    // last pass is still sound, merely less unified).
    std::map<std::string, unsigned long> planned;
    for (int pass = 0;; ++pass) {
        Context cx{true};
        cx.planned = planned;
        Frac f = convert(e, cx);
        canonicalize(f);
        if (cx.seen == cx.planned || pass == 3)
            return ExtendedForm{PolyFraction{f.num, f.den}, cx.exts};
        planned = std::move(cx.seen);
    }
}

Poly reduce_modulo(Poly p, const std::vector<AlgExt>& exts) {
    for (auto it = exts.rbegin(); it != exts.rend(); ++it) {
        if (it->m < 2) continue;
        if (p.degree_in(it->aux) < it->m) continue;
        Poly rebuilt;
        for (const auto& [deg, coef] : p.collect(it->aux)) {
            unsigned quo = deg / it->m, rem = deg % it->m;
            Poly term = coef * it->rhs.pow(quo);
            if (rem) {
                Poly axr;
                axr.add_term({{it->aux, rem}}, Rational(1));
                term = term * axr;
            }
            rebuilt += term;
        }
        p = std::move(rebuilt);
    }
    return p;
}

bool fractions_equal(const PolyFraction& a, const PolyFraction& b) {
    return (a.num * b.den - b.num * a.den).is_zero();
}

}  // namespace qfi
