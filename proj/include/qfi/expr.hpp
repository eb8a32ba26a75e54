#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qfi/rational.hpp"

namespace qfi {

// Interned symbol handle. Symbols are global to the process; names are the
// identity (ids are stable within a run but serialization always uses names).
using SymId = std::uint32_t;

SymId intern_symbol(const std::string& name);
const std::string& symbol_name(SymId id);

enum class Kind : std::uint8_t { Num, Sym, Add, Mul, Pow, Sin, Cos, Exp, Log, Fn };

class Expr;

// An opaque function value (theta, rho, ...). It has no argument list; it is
// a named quantity whose partial derivatives with respect to chosen symbols
// are bound once as expressions. Rules may reference the function itself
// (e.g. d/dt E = phi*E), which makes the definition cyclic; equality, hashing
// and printing all handle that case.
struct FnDef {
    std::string name;
    std::vector<std::pair<SymId, Expr>> rules;  // sorted by symbol name
    bool frozen = false;
};

struct ExprNode {
    Kind kind;
    Rational num;                  // Num value, or Pow exponent
    SymId sym = 0;                 // Sym
    std::shared_ptr<FnDef> fn;     // Fn
    std::vector<Expr> kids;        // Add/Mul children, Pow base, unary argument
    std::size_t hash = 0;
};

class Expr {
  public:
    Expr();  // zero

    static Expr num(const Rational& r);
    static Expr num(long n, long d = 1);
    static Expr sym(const std::string& name);
    static Expr sym(SymId id);

    // n-ary constructors; canonicalize lightly (flatten, fold constants,
    // collect identical terms / identical bases). No distribution happens
    // here: polynomial expansion lives in the rational-form layer.
    static Expr add(std::vector<Expr> kids);
    static Expr mul(std::vector<Expr> kids);
    static Expr pow(const Expr& base, const Rational& exponent);
    static Expr sin(const Expr& e);
    static Expr cos(const Expr& e);
    static Expr exp(const Expr& e);
    static Expr log(const Expr& e);

    // Two-phase opaque function construction: declare, then bind rules.
    static Expr fn(const std::string& name);
    void bind_rule(const Expr& var, const Expr& derivative) const;  // this: Fn node
    void freeze_fn() const;

    Kind kind() const { return node_->kind; }
    const Rational& value() const { return node_->num; }      // Num
    const Rational& exponent() const { return node_->num; }   // Pow
    SymId sym_id() const { return node_->sym; }
    const std::string& fn_name() const { return node_->fn->name; }
    const std::shared_ptr<FnDef>& fn_def() const { return node_->fn; }
    const std::vector<Expr>& kids() const { return node_->kids; }
    const Expr& base() const { return node_->kids[0]; }       // Pow
    const Expr& arg() const { return node_->kids[0]; }        // unary

    bool is_num() const { return node_->kind == Kind::Num; }
    bool is_zero() const { return is_num() && node_->num == 0; }
    bool is_one() const { return is_num() && node_->num == 1; }

    std::size_t hash() const { return node_->hash; }
    const ExprNode* raw() const { return node_.get(); }

    friend bool structurally_equal(const Expr& a, const Expr& b);
    // Deterministic total order (uses names, not ids, so it is stable
    // across processes). Returns <0, 0, >0.
    friend int compare(const Expr& a, const Expr& b);

  private:
    friend struct ExprFactory;  // implementation-side constructor access
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator+(const Expr& a, long b);
Expr operator+(long a, const Expr& b);
Expr operator-(const Expr& a, long b);
Expr operator-(long a, const Expr& b);
Expr operator*(const Expr& a, long b);
Expr operator*(long a, const Expr& b);
Expr operator*(const Rational& a, const Expr& b);
Expr operator*(const Expr& a, const Rational& b);
Expr operator/(const Expr& a, long b);
Expr pow(const Expr& base, const Rational& e);
Expr pow(const Expr& base, long p, long q = 1);
Expr sqrt(const Expr& e);

// Partial derivative. `var` must be a Sym or Fn node. Differentiating an
// opaque function applies its bound rules; differentiating *by* an opaque
// function treats that node as an independent variable.
Expr differentiate(const Expr& e, const Expr& var);
Expr differentiate(const Expr& e, const std::string& symbol_name);

// Substitute every occurrence of `what` (matched structurally) by `with`.
Expr substitute(const Expr& e, const Expr& what, const Expr& with);

std::vector<Expr> free_symbols(const Expr& e);   // Sym leaves, deduplicated
std::vector<Expr> opaque_functions(const Expr& e);  // Fn leaves, deduplicated

// ---------------------------------------------------------------------------
// Numeric evaluation.
//
// The result is exact (a Rational) whenever every leaf binding used is exact,
// no transcendental node is met and every exponent applied to an exact base
// is an integer; otherwise it is a double. Opaque functions are bound by
// name and always evaluate as doubles.

struct EvalValue {
    bool exact = false;
    Rational q;
    double d = 0.0;

    static EvalValue from(const Rational& r) { return {true, r, to_double(r)}; }
    static EvalValue from(double x) { return {false, Rational(), x}; }
};

class Binding {
  public:
    void set(const Expr& symbol, const Rational& v);
    void set(const Expr& symbol, double v);
    void set(const std::string& name, double v);
    void set_fn(const std::string& fn_name, double v);
    const EvalValue* find(SymId id) const;
    const double* find_fn(const std::string& fn_name) const;

  private:
    std::map<SymId, EvalValue> syms_;
    std::map<std::string, double> fns_;
};

EvalValue evaluate(const Expr& e, const Binding& b);
double evaluate_double(const Expr& e, const Binding& b);

// Double x^(p/q) computed the same way everywhere (tree walk and both batch
// kernels): q==1 by binary exponentiation, q==2 through sqrt, otherwise one
// std::pow call. Keeping a single code path makes results bit-reproducible.
double pow_rational_double(double x, long p, unsigned long q);

}  // namespace qfi
