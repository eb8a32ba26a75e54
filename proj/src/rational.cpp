#include "qfi/rational.hpp"

namespace qfi {

std::optional<Rational> parse_rational(const std::string& s) {
    if (s.empty()) return std::nullopt;
    std::string num = s, den = "1";
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        num = s.substr(0, slash);
        den = s.substr(slash + 1);
        if (den.empty() || den[0] == '-') return std::nullopt;
    }
    auto digits_ok = [](const std::string& t, bool sign) {
        std::size_t i = 0;
        if (sign && i < t.size() && t[i] == '-') ++i;
        if (i >= t.size()) return false;
        for (; i < t.size(); ++i)
            if (t[i] < '0' || t[i] > '9') return false;
        return true;
    };
    if (!digits_ok(num, true) || !digits_ok(den, false)) return std::nullopt;
    mpz_class n(num), d(den);
    if (d == 0) return std::nullopt;
    Rational r(n, d);
    r.canonicalize();
    return r;
}

std::string to_string(const Rational& r) {
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

long to_long(const Rational& r) {
    if (!is_integer(r)) throw DomainError("expected integer, got " + to_string(r));
    if (!r.get_num().fits_slong_p()) throw DomainError("integer too large: " + to_string(r));
    return r.get_num().get_si();
}

std::optional<Rational> exact_root(const Rational& r, unsigned long k) {
    if (k == 0) return std::nullopt;
    if (k == 1) return r;
    if (sgn(r) < 0 && k % 2 == 0) return std::nullopt;
    mpz_class rn, rd;
    if (!mpz_root(rn.get_mpz_t(), r.get_num().get_mpz_t(), k)) return std::nullopt;
    if (!mpz_root(rd.get_mpz_t(), r.get_den().get_mpz_t(), k)) return std::nullopt;
    Rational out(rn, rd);
    out.canonicalize();
    return out;
}

std::size_t hash_rational(const Rational& r) {
    // Residues mod two large primes; cheap and stable across runs.
    unsigned long a = mpz_fdiv_ui(r.get_num().get_mpz_t(), 1000000007UL);
    unsigned long b = mpz_fdiv_ui(r.get_den().get_mpz_t(), 998244353UL);
    std::size_t h = a * 1315423911u ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6));
    return h;
}

}  // namespace qfi
