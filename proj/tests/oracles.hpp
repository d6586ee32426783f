#ifndef CDIST_TESTS_ORACLES_HPP
#define CDIST_TESTS_ORACLES_HPP

// Reference values computed with MPFR, independently of the library's own
// series. Every oracle returns a rational interval that contains the true
// value (directed rounding at 256 bits).

#include <cmath>
#include <functional>

#include <gmp.h>
#include <mpfr.h>

#include "cdist/interval.hpp"
#include "cdist/rational.hpp"

namespace oracle {

using cdist::Interval;
using cdist::Rational;

inline constexpr mpfr_prec_t bits = 256;

inline Rational to_rational(const mpfr_t x) {
    mpq_t q;
    mpq_init(q);
    mpfr_get_q(q, x);
    Rational r{mpq_class(q)};
    mpq_clear(q);
    return r;
}

inline void set_rational(mpfr_t x, const Rational& q, mpfr_rnd_t rnd) { mpfr_set_q(x, q.raw().get_mpq_t(), rnd); }

// f evaluated once rounding down and once rounding up. Only valid for
// functions monotone in the rounding of their argument, which holds for
// the uses below (argument exact or function monotone).
inline Interval enclose(const std::function<void(mpfr_t, mpfr_rnd_t)>& f) {
    mpfr_t lo, hi;
    mpfr_init2(lo, bits);
    mpfr_init2(hi, bits);
    f(lo, MPFR_RNDD);
    f(hi, MPFR_RNDU);
    Interval r(to_rational(lo), to_rational(hi));
    mpfr_clear(lo);
    mpfr_clear(hi);
    return r;
}

inline Interval pi() {
    return enclose([](mpfr_t r, mpfr_rnd_t rnd) { mpfr_const_pi(r, rnd); });
}

// exp(q), q exact.
inline Interval exp(const Rational& q) {
    return enclose([&q](mpfr_t r, mpfr_rnd_t rnd) {
        mpfr_t a;
        mpfr_init2(a, bits * 2);
        set_rational(a, q, rnd);
        mpfr_exp(r, a, rnd);
        mpfr_clear(a);
    });
}

inline Interval e() { return exp(Rational(1)); }

// log(q), q > 0 exact.
inline Interval log(const Rational& q) {
    return enclose([&q](mpfr_t r, mpfr_rnd_t rnd) {
        mpfr_t a;
        mpfr_init2(a, bits * 2);
        set_rational(a, q, rnd);
        mpfr_log(r, a, rnd);
        mpfr_clear(a);
    });
}

// sqrt(q), q >= 0 exact.
inline Interval sqrt(const Rational& q) {
    return enclose([&q](mpfr_t r, mpfr_rnd_t rnd) {
        mpfr_t a;
        mpfr_init2(a, bits * 2);
        set_rational(a, q, rnd);
        mpfr_sqrt(r, a, rnd);
        mpfr_clear(a);
    });
}

inline double erf(double x) {
    mpfr_t a;
    mpfr_init2(a, bits);
    mpfr_set_d(a, x, MPFR_RNDN);
    mpfr_erf(a, a, MPFR_RNDN);
    double r = mpfr_get_d(a, MPFR_RNDN);
    mpfr_clear(a);
    return r;
}

// P(|Z| < t) for a standard normal Z.
inline double normal_central_mass(double t) { return erf(t / std::sqrt(2.0)); }

// Composite Simpson rule on [a, b] with n (even) panels, in MPFR.
inline double simpson(const std::function<void(mpfr_t out, const mpfr_t x)>& f, double a, double b, int n = 4096) {
    mpfr_t h, x, fx, acc;
    mpfr_inits2(bits, h, x, fx, acc, static_cast<mpfr_ptr>(nullptr));
    mpfr_set_d(h, (b - a) / n, MPFR_RNDN);
    mpfr_set_zero(acc, 1);
    for (int i = 0; i <= n; ++i) {
        mpfr_mul_si(x, h, i, MPFR_RNDN);
        mpfr_add_d(x, x, a, MPFR_RNDN);
        f(fx, x);
        int w = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
        mpfr_mul_si(fx, fx, w, MPFR_RNDN);
        mpfr_add(acc, acc, fx, MPFR_RNDN);
    }
    mpfr_mul(acc, acc, h, MPFR_RNDN);
    mpfr_div_ui(acc, acc, 3, MPFR_RNDN);
    double r = mpfr_get_d(acc, MPFR_RNDN);
    mpfr_clears(h, x, fx, acc, static_cast<mpfr_ptr>(nullptr));
    return r;
}

// exp(-(y-u)^2 / (2 sigma^2)), unnormalized Gaussian likelihood.
inline std::function<void(mpfr_t, const mpfr_t)> gauss_lik(double y, double sigma) {
    return [y, sigma](mpfr_t out, const mpfr_t u) {
        mpfr_d_sub(out, y, u, MPFR_RNDN);
        mpfr_sqr(out, out, MPFR_RNDN);
        mpfr_div_d(out, out, -2 * sigma * sigma, MPFR_RNDN);
        mpfr_exp(out, out, MPFR_RNDN);
    };
}

// Posterior mean of a uniform(0,1) prior under Gaussian noise, by quadrature.
inline double uniform_gauss_posterior_mean(double y, double sigma) {
    auto lik = gauss_lik(y, sigma);
    double z = simpson(lik, 0, 1);
    double m = simpson(
        [&lik](mpfr_t out, const mpfr_t u) {
            lik(out, u);
            mpfr_mul(out, out, u, MPFR_RNDN);
        },
        0, 1);
    return m / z;
}

// Posterior mass of (a, b) within (0, 1) for the same model.
inline double uniform_gauss_posterior_mass(double a, double b, double y, double sigma) {
    auto lik = gauss_lik(y, sigma);
    return simpson(lik, a, b) / simpson(lik, 0, 1);
}

} // namespace oracle

#endif
