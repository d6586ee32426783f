#ifndef CDIST_RATIONAL_HPP
#define CDIST_RATIONAL_HPP

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>

#include <gmpxx.h>

#include "cdist/error.hpp"

namespace cdist {

using Integer = mpz_class;

// Exact rational, always canonical (lowest terms, positive denominator).
class Rational {
public:
    Rational() = default;
    Rational(long v) : q_(v) {}                 // NOLINT(google-explicit-constructor)
    Rational(int v) : q_(static_cast<long>(v)) {} // NOLINT(google-explicit-constructor)
    Rational(unsigned long v) : q_(v) {}        // NOLINT(google-explicit-constructor)
    explicit Rational(const Integer& v) : q_(v) {}
    Rational(const Integer& num, const Integer& den) : q_(num, den) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        q_.canonicalize();
    }
    explicit Rational(const mpq_class& q) : q_(q) { q_.canonicalize(); }

    // Exact conversion; every finite double is a dyadic rational.
    static Rational from_double(double d) { return Rational(mpq_class(d)); }

    // 2^e for any integer e.
    static Rational pow2(long e) {
        Integer p;
        if (e >= 0) {
            mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e));
            return Rational(p);
        }
        mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(-e));
        return Rational(Integer(1), p);
    }

    // m / 2^e
    static Rational dyadic(const Integer& m, unsigned long e) {
        Integer d;
        mpz_ui_pow_ui(d.get_mpz_t(), 2, e);
        return Rational(m, d);
    }

    // Accepts "p/q", "p", and plain decimals such as "-0.125".
    static Rational parse(std::string_view text);

    Integer num() const { return q_.get_num(); }
    Integer den() const { return q_.get_den(); }
    const mpq_class& raw() const { return q_; }

    int sign() const { return sgn(q_); }
    bool is_zero() const { return sgn(q_) == 0; }
    bool is_integer() const { return q_.get_den() == 1; }
    double to_double() const { return q_.get_d(); }

    // "p/q" in decimal digits; integers keep the "/1".
    std::string to_string() const { return q_.get_num().get_str() + "/" + q_.get_den().get_str(); }

    Integer floor() const {
        Integer r;
        mpz_fdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
        return r;
    }
    Integer ceil() const {
        Integer r;
        mpz_cdiv_q(r.get_mpz_t(), q_.get_num_mpz_t(), q_.get_den_mpz_t());
        return r;
    }

    // Largest multiple of 2^-p that is <= *this.
    Rational round_down(unsigned long p) const { return dyadic(scaled(p).floor(), p); }
    // Smallest multiple of 2^-p that is >= *this.
    Rational round_up(unsigned long p) const { return dyadic(scaled(p).ceil(), p); }
    // Nearest multiple of 2^-p, ties toward -inf.
    Rational round_nearest(unsigned long p) const {
        Rational s = scaled(p) + Rational(Integer(1), Integer(2));
        Integer f = s.floor();
        if (Rational(f) == s) f -= 1;
        return dyadic(f, p);
    }

    // Smallest integer e with |*this| <= 2^e; requires nonzero.
    long ceil_log2_abs() const {
        if (is_zero()) throw std::domain_error("ceil_log2_abs of zero");
        Integer n = ::abs(q_.get_num());
        const Integer& d = q_.get_den();
        long e = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - static_cast<long>(mpz_sizeinbase(d.get_mpz_t(), 2));
        // 2^(e-1) < n/d < 2^(e+1); settle the exact bound.
        while (Rational(n, d) > pow2(e)) ++e;
        while (Rational(n, d) <= pow2(e - 1)) --e;
        return e;
    }

    Rational abs() const { return Rational(::abs(q_)); }

    Rational& operator+=(const Rational& o) { q_ += o.q_; return *this; }
    Rational& operator-=(const Rational& o) { q_ -= o.q_; return *this; }
    Rational& operator*=(const Rational& o) { q_ *= o.q_; return *this; }
    Rational& operator/=(const Rational& o) {
        if (o.is_zero()) throw std::domain_error("Rational: division by zero");
        q_ /= o.q_;
        return *this;
    }

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { return Rational(mpq_class(-a.q_)); }

    friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.q_, b.q_) == 0; }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        int c = cmp(a.q_, b.q_);
        return c < 0 ? std::strong_ordering::less : c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal;
    }

    friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

private:
    Rational scaled(unsigned long p) const {
        mpq_class s;
        mpq_mul_2exp(s.get_mpq_t(), q_.get_mpq_t(), p);
        return Rational(s);
    }

    mpq_class q_;
};

inline Rational Rational::parse(std::string_view text) {
    auto fail = [&] { return std::invalid_argument("not a rational literal: '" + std::string(text) + "'"); };
    if (text.empty()) throw fail();
    std::string s(text);
    auto slash = s.find('/');
    auto digits_only = [](std::string_view v, bool allow_sign) {
        if (v.empty()) return false;
        std::size_t i = 0;
        if (allow_sign && (v[0] == '-' || v[0] == '+')) i = 1;
        if (i == v.size()) return false;
        for (; i < v.size(); ++i)
            if (v[i] < '0' || v[i] > '9') return false;
        return true;
    };
    if (slash != std::string::npos) {
        std::string n = s.substr(0, slash), d = s.substr(slash + 1);
        if (!digits_only(n, true) || !digits_only(d, false)) throw fail();
        if (n[0] == '+') n.erase(0, 1);
        Integer den(d, 10);
        if (den == 0) throw fail();
        return Rational(Integer(n, 10), den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) {
        if (!digits_only(s, true)) throw fail();
        if (s[0] == '+') s.erase(0, 1);
        return Rational(Integer(s, 10));
    }
    std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
    bool neg = !ip.empty() && ip[0] == '-';
    if (!ip.empty() && (ip[0] == '-' || ip[0] == '+')) ip.erase(0, 1);
    if (ip.empty()) ip = "0";
    if (!digits_only(ip, false) || (!fp.empty() && !digits_only(fp, false))) throw fail();
    Integer scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, fp.size());
    Integer whole(ip + fp, 10);
    Rational r(whole, scale);
    return neg ? -r : r;
}

inline Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

} // namespace cdist

#endif
