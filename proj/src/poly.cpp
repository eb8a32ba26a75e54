#include "qfi/poly.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace qfi {

Poly::Poly(const Rational& c) { add_term({}, c); }

Poly Poly::constant(const Rational& c) { return Poly(c); }

Poly Poly::variable(SymId s) {
    Poly p;
    p.add_term({{s, 1}}, Rational(1));
    return p;
}

bool Poly::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

const Rational* Poly::constant_value() const {
    static const Rational zero(0);
    if (terms_.empty()) return &zero;
    if (terms_.size() == 1 && terms_.begin()->first.empty()) return &terms_.begin()->second;
    return nullptr;
}

unsigned Poly::degree_in(SymId s) const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_)
        for (const auto& [sym, e] : m)
            if (sym == s) d = std::max(d, e);
    return d;
}

unsigned Poly::total_degree() const {
    unsigned d = 0;
    for (const auto& [m, c] : terms_) {
        unsigned t = 0;
        for (const auto& [sym, e] : m) t += e;
        d = std::max(d, t);
    }
    return d;
}

std::vector<SymId> Poly::variables() const {
    std::set<SymId> s;
    for (const auto& [m, c] : terms_)
        for (const auto& [sym, e] : m) s.insert(sym);
    return {s.begin(), s.end()};
}

void Poly::add_term(const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Poly operator-(const Poly& a) {
    Poly r;
    for (const auto& [m, c] : a.terms_) r.terms_.emplace(m, -c);
    return r;
}

Monomial monomial_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            r.push_back(a[i++]);
        else if (b[j].first < a[i].first)
            r.push_back(b[j++]);
        else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i, ++j;
        }
    }
    for (; i < a.size(); ++i) r.push_back(a[i]);
    for (; j < b.size(); ++j) r.push_back(b[j]);
    return r;
}

Monomial monomial_gcd(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i].first < b[j].first)
            ++i;
        else if (b[j].first < a[i].first)
            ++j;
        else {
            r.emplace_back(a[i].first, std::min(a[i].second, b[j].second));
            ++i, ++j;
        }
    }
    return r;
}

Monomial monomial_div(const Monomial& a, const Monomial& b) {
    Monomial r;
    std::size_t j = 0;
    for (const auto& [s, e] : a) {
        unsigned sub = 0;
        while (j < b.size() && b[j].first < s) ++j;
        if (j < b.size() && b[j].first == s) sub = b[j].second;
        if (e > sub) r.emplace_back(s, e - sub);
    }
    return r;
}

Poly operator*(const Poly& a, const Poly& b) {
    Poly r;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_) r.add_term(monomial_mul(ma, mb), ca * cb);
    return r;
}

Poly Poly::pow(unsigned long n) const {
    Poly r = Poly::constant(Rational(1));
    Poly b = *this;
    while (n) {
        if (n & 1) r = r * b;
        b = b * b;
        n >>= 1;
    }
    return r;
}

Monomial Poly::extract_monomial_content() {
    if (terms_.empty()) return {};
    Monomial g = terms_.begin()->first;
    for (const auto& [m, c] : terms_) {
        g = monomial_gcd(g, m);
        if (g.empty()) return {};
    }
    std::map<Monomial, Rational> out;
    for (const auto& [m, c] : terms_) out.emplace(monomial_div(m, g), c);
    terms_ = std::move(out);
    return g;
}

Rational Poly::normalize_content() {
    if (terms_.empty()) return Rational(1);
    mpz_class num_gcd(0), den_lcm(1);
    for (const auto& [m, c] : terms_) {
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), c.get_num().get_mpz_t());
        mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), c.get_den().get_mpz_t());
    }
    Rational factor(num_gcd, den_lcm);
    factor.canonicalize();
    // leading term = last in the internal order
    if (terms_.rbegin()->second < 0) factor = -factor;
    for (auto& [m, c] : terms_) c /= factor;
    return factor;
}

Rational Poly::evaluate(const std::map<SymId, Rational>& point) const {
    Rational total(0);
    for (const auto& [m, c] : terms_) {
        Rational t = c;
        for (const auto& [s, e] : m) {
            auto it = point.find(s);
            if (it == point.end())
                throw Error("polynomial evaluation: unbound " + symbol_name(s));
            for (unsigned k = 0; k < e; ++k) t *= it->second;
        }
        total += t;
    }
    return total;
}

std::map<unsigned, Poly> Poly::collect(SymId s) const {
    std::map<unsigned, Poly> out;
    for (const auto& [m, c] : terms_) {
        unsigned deg = 0;
        Monomial rest;
        for (const auto& [sym, e] : m) {
            if (sym == s)
                deg = e;
            else
                rest.emplace_back(sym, e);
        }
        out[deg].add_term(rest, c);
    }
    return out;
}

std::string Poly::to_string() const {
    if (terms_.empty()) return "0";
    // sort by total degree then name-lexicographic monomial text
    std::vector<std::pair<std::string, const Rational*>> parts;
    for (const auto& [m, c] : terms_) {
        std::vector<std::string> factors;
        for (const auto& [s, e] : m)
            factors.push_back(e == 1 ? symbol_name(s)
                                     : symbol_name(s) + "^" + std::to_string(e));
        std::sort(factors.begin(), factors.end());
        std::string text;
        for (const auto& f : factors) text += (text.empty() ? "" : "*") + f;
        parts.emplace_back(text, &c);
    }
    std::sort(parts.begin(), parts.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::ostringstream os;
    bool first = true;
    for (const auto& [text, c] : parts) {
        if (!first) os << " + ";
        first = false;
        if (text.empty())
            os << qfi::to_string(*c);
        else if (*c == 1)
            os << text;
        else if (*c == -1)
            os << "-" << text;
        else
            os << qfi::to_string(*c) << "*" << text;
    }
    return os.str();
}

}  // namespace qfi
