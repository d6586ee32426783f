#ifndef CDIST_ELEMENTARY_HPP
#define CDIST_ELEMENTARY_HPP

// Certified rational enclosures of elementary functions at a point.
// Every function takes a working precision `wp` (bits) and returns an
// interval guaranteed to contain the true value; the width shrinks
// roughly like 2^-wp (relative for exp).

#include <algorithm>
#include <cmath>

#include "cdist/interval.hpp"

namespace cdist::elementary {

// sqrt(q) for q >= 0, width <= 2^-wp.
inline Interval sqrt_point(const Rational& q, unsigned long wp) {
    if (q.sign() < 0) throw DomainError("sqrt of a negative rational");
    if (q.is_zero()) return Interval(Rational(0));
    Rational scaled = q * Rational::pow2(2 * static_cast<long>(wp));
    Integer lo_in = scaled.floor(), hi_in = scaled.ceil();
    Integer s_lo, s_hi;
    mpz_sqrt(s_lo.get_mpz_t(), lo_in.get_mpz_t());
    mpz_sqrt(s_hi.get_mpz_t(), hi_in.get_mpz_t());
    if (s_hi * s_hi < hi_in) s_hi += 1;
    return {Rational::dyadic(s_lo, wp), Rational::dyadic(s_hi, wp)};
}

// exp(q). Halve q until |r| <= 1/2, Taylor-sum r, then square back.
inline Interval exp_point(const Rational& q, unsigned long wp) {
    if (q.is_zero()) return Interval(Rational(1));
    long halvings = std::max(0L, q.ceil_log2_abs() + 1);
    Rational r = q * Rational::pow2(-halvings);
    unsigned long guard = wp + 2 * static_cast<unsigned long>(halvings) + 8;
    if (q.sign() > 0) guard += static_cast<unsigned long>(std::ceil(q.to_double() * 1.4427)) + 1;
    Rational eps = Rational::pow2(-static_cast<long>(guard));
    Interval term(Rational(1));
    Interval sum(Rational(1));
    for (long i = 1;; ++i) {
        term = (term * r / Rational(i)).round_out(guard);
        sum = sum + term;
        if (term.mag() <= eps) {
            // |r| <= 1/2 so the tail is bounded by the last term.
            Rational t = term.mag();
            sum = sum + Interval(-t, t);
            break;
        }
    }
    for (long i = 0; i < halvings; ++i) {
        Rational lo = max(sum.lo, Rational(0));
        sum = Interval(lo * lo, sum.hi * sum.hi).round_out(guard);
    }
    return sum;
}

// 2*atanh(z) = log((1+z)/(1-z)) for 0 <= z <= 1/3.
inline Interval two_atanh(const Rational& z, unsigned long wp) {
    unsigned long guard = wp + 8;
    Rational eps = Rational::pow2(-static_cast<long>(guard));
    Rational z2 = z * z;
    Interval power(z);
    Interval sum(Rational(0));
    for (long k = 0;; ++k) {
        Interval term = (power / Rational(2 * k + 1)).round_out(guard);
        sum = sum + term;
        power = (power * z2).round_out(guard + 4);
        if (power.mag() <= eps) {
            // tail <= z^(2k+3) / (1 - z^2) <= (9/8) * power
            Rational t = power.mag() * Rational(Integer(9), Integer(8));
            sum = sum + Interval(Rational(0), t);
            break;
        }
    }
    return sum * Rational(2);
}

inline Interval ln2(unsigned long wp) { return two_atanh(Rational(Integer(1), Integer(3)), wp); }

// log(q) for q > 0.
inline Interval log_point(const Rational& q, unsigned long wp) {
    if (q.sign() <= 0) throw DomainError("log of a non-positive rational");
    if (q == Rational(1)) return Interval(Rational(0));
    // q = m * 2^e with m in [1, 2)
    long e = q.ceil_log2_abs();
    if (Rational::pow2(e) != q) e -= 1;
    Rational m = q * Rational::pow2(-e);
    Rational z = (m - Rational(1)) / (m + Rational(1));
    Interval result = two_atanh(z, wp + 2);
    if (e == 0) return result;
    unsigned long extra = static_cast<unsigned long>(Rational(e).abs().ceil_log2_abs() + 2);
    return result + ln2(wp + extra) * Rational(e);
}

// atan(1/k) for integer k >= 2, alternating series.
inline Interval atan_inv(long k, unsigned long wp) {
    unsigned long guard = wp + 8;
    Rational eps = Rational::pow2(-static_cast<long>(guard));
    Rational inv = Rational(Integer(1), Integer(k));
    Rational inv2 = inv * inv;
    Interval power(inv);
    Interval sum(Rational(0));
    for (long i = 0;; ++i) {
        Interval term = (power / Rational(2 * i + 1)).round_out(guard);
        sum = (i % 2 == 0) ? sum + term : sum - term;
        power = (power * inv2).round_out(guard + 4);
        Interval next = (power / Rational(2 * i + 3)).round_out(guard);
        if (next.mag() <= eps) {
            Rational t = next.mag();
            sum = sum + Interval(-t, t);
            break;
        }
    }
    return sum;
}

// Machin: pi = 16 atan(1/5) - 4 atan(1/239).
inline Interval pi_enclosure(unsigned long wp) {
    return atan_inv(5, wp + 5) * Rational(16) - atan_inv(239, wp + 3) * Rational(4);
}

} // namespace cdist::elementary

#endif
