#include "qfi/exprio.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <vector>

namespace qfi {

namespace {

const std::set<std::string> kReserved = {"fn", "fnref", "d",   "sin",
                                         "cos", "exp",  "log", "+",
                                         "*",   "^"};

void print_rec(const Expr& e, std::ostream& os, std::vector<const FnDef*>& open) {
    switch (e.kind()) {
        case Kind::Num:
            os << to_string(e.value());
            return;
        case Kind::Sym:
            os << symbol_name(e.sym_id());
            return;
        case Kind::Add:
        case Kind::Mul:
            os << (e.kind() == Kind::Add ? "(+" : "(*");
            for (const auto& k : e.kids()) {
                os << ' ';
                print_rec(k, os, open);
            }
            os << ')';
            return;
        case Kind::Pow:
            os << "(^ ";
            print_rec(e.base(), os, open);
            os << ' ' << to_string(e.exponent()) << ')';
            return;
        case Kind::Sin:
        case Kind::Cos:
        case Kind::Exp:
        case Kind::Log: {
            const char* name = e.kind() == Kind::Sin   ? "sin"
                               : e.kind() == Kind::Cos ? "cos"
                               : e.kind() == Kind::Exp ? "exp"
                                                       : "log";
            os << '(' << name << ' ';
            print_rec(e.arg(), os, open);
            os << ')';
            return;
        }
        case Kind::Fn: {
            const FnDef* def = e.fn_def().get();
            for (const FnDef* d : open)
                if (d == def) {
                    os << "(fnref " << def->name << ')';
                    return;
                }
            os << "(fn " << def->name;
            open.push_back(def);
            for (const auto& [sym, rule] : def->rules) {
                os << " (d " << symbol_name(sym) << ' ';
                print_rec(rule, os, open);
                os << ')';
            }
            open.pop_back();
            os << ')';
            return;
        }
    }
}

struct Lexer {
    const std::string& text;
    std::size_t pos = 0;

    explicit Lexer(const std::string& t) : text(t) {}

    // Tokens: "(", ")", or a run of non-space, non-paren characters.
    std::string next() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) return std::string();  // end of input
        char c = text[pos];
        if (c == '(' || c == ')') {
            ++pos;
            return std::string(1, c);
        }
        std::size_t start = pos;
        while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '(' && text[pos] != ')')
            ++pos;
        return text.substr(start, pos - start);
    }

    std::string peek() {
        std::size_t save = pos;
        std::string t = next();
        pos = save;
        return t;
    }
};

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

struct OpenFn {
    std::string name;
    Expr node;
};

Expr parse_rec(Lexer& lx, std::vector<OpenFn>& open);

Expr parse_form(Lexer& lx, std::vector<OpenFn>& open) {
    std::string head = lx.next();
    auto expect_close = [&] {
        std::string t = lx.next();
        if (t != ")") throw ParseError("expected ')', got '" + t + "'");
    };
    if (head == "+" || head == "*") {
        std::vector<Expr> kids;
        while (lx.peek() != ")") {
            if (lx.peek().empty()) throw ParseError("unterminated form");
            kids.push_back(parse_rec(lx, open));
        }
        lx.next();
        if (kids.size() < 2) throw ParseError("'" + head + "' needs at least two operands");
        return head == "+" ? Expr::add(std::move(kids)) : Expr::mul(std::move(kids));
    }
    if (head == "^") {
        Expr base = parse_rec(lx, open);
        std::string etok = lx.next();
        auto ev = parse_rational(etok);
        if (!ev) throw ParseError("power exponent must be rational, got '" + etok + "'");
        expect_close();
        return Expr::pow(base, *ev);
    }
    if (head == "sin" || head == "cos" || head == "exp" || head == "log") {
        Expr a = parse_rec(lx, open);
        expect_close();
        if (head == "sin") return Expr::sin(a);
        if (head == "cos") return Expr::cos(a);
        if (head == "exp") return Expr::exp(a);
        return Expr::log(a);
    }
    if (head == "fnref") {
        std::string name = lx.next();
        expect_close();
        for (auto it = open.rbegin(); it != open.rend(); ++it)
            if (it->name == name) return it->node;
        throw ParseError("fnref to unknown function '" + name + "'");
    }
    if (head == "fn") {
        std::string name = lx.next();
        if (!is_identifier(name)) throw ParseError("bad function name '" + name + "'");
        Expr node = Expr::fn(name);
        open.push_back({name, node});
        while (lx.peek() == "(") {
            lx.next();
            std::string d = lx.next();
            if (d != "d") throw ParseError("expected '(d SYMBOL expr)' in fn rules");
            std::string sym = lx.next();
            if (!is_identifier(sym) || kReserved.count(sym))
                throw ParseError("bad rule symbol '" + sym + "'");
            Expr rule = parse_rec(lx, open);
            expect_close();
            node.bind_rule(Expr::sym(sym), rule);
        }
        expect_close();
        open.pop_back();
        node.freeze_fn();
        return node;
    }
    throw ParseError("unknown form '" + head + "'");
}

Expr parse_rec(Lexer& lx, std::vector<OpenFn>& open) {
    std::string tok = lx.next();
    if (tok.empty()) throw ParseError("unexpected end of input");
    if (tok == "(") return parse_form(lx, open);
    if (tok == ")") throw ParseError("unexpected ')'");
    if (auto r = parse_rational(tok)) return Expr::num(*r);
    if (is_identifier(tok)) {
        if (kReserved.count(tok)) throw ParseError("reserved word '" + tok + "'");
        return Expr::sym(tok);
    }
    throw ParseError("bad token '" + tok + "'");
}

}  // namespace

std::string print_expr(const Expr& e) {
    std::ostringstream os;
    std::vector<const FnDef*> open;
    print_rec(e, os, open);
    return os.str();
}

Expr parse_expr(const std::string& text) {
    Lexer lx(text);
    std::vector<OpenFn> open;
    Expr e = parse_rec(lx, open);
    std::string rest = lx.next();
    if (!rest.empty()) throw ParseError("trailing input '" + rest + "'");
    return e;
}

}  // namespace qfi
