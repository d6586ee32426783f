#ifndef CDIST_CREAL_HPP
#define CDIST_CREAL_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>
#include <vector>

#include "cdist/elementary.hpp"
#include "cdist/error.hpp"
#include "cdist/interval.hpp"
#include "cdist/lazy.hpp"
#include "cdist/rational.hpp"

namespace cdist {

// A real given by a fast Cauchy sequence: |approx(n) - approx(n+1)| <= 2^-n,
// hence |x - approx(n)| <= 2^-n+1. Copies share one memo table; every
// approximation is computed at most once and never changes afterwards.
class CReal {
public:
    using ApproxFn = std::function<Rational(unsigned)>;

    CReal() : CReal(Rational(0)) {}
    CReal(const Rational& q) : s_(std::make_shared<State>()) { // NOLINT(google-explicit-constructor)
        s_->exact = q;
        s_->fn = [q](unsigned) { return q; };
    }

    static CReal make(ApproxFn f, bool debug_check = false) {
        CReal x{Uninit{}};
        x.s_ = std::make_shared<State>();
        x.s_->fn = std::move(f);
        x.s_->debug = debug_check;
        return x;
    }

    // The computation of x itself is postponed until the first query.
    static CReal deferred(std::function<CReal()> thunk) {
        Lazy<CReal> lz(std::move(thunk));
        return make([lz](unsigned n) { return lz.get().approx(n); });
    }

    // Every query diverges.
    static CReal bottom() {
        return make([](unsigned) -> Rational { throw Diverged(DivergeReason::Bottom, "real with no approximations"); });
    }

    Rational approx(unsigned n) const {
        Rational v = value_at(n);
        if (s_->debug) {
            Rational w = value_at(n + 1);
            if ((v - w).abs() > Rational::pow2(-static_cast<long>(n)))
                throw FastCauchyViolation("approx(" + std::to_string(n) + ")=" + v.to_string() + " and approx(" +
                                          std::to_string(n + 1) + ")=" + w.to_string() + " are more than 2^-" +
                                          std::to_string(n) + " apart");
        }
        return v;
    }

    // [approx(n) - 2^-n+1, approx(n) + 2^-n+1]
    Interval enclosure(unsigned n) const {
        Rational a = approx(n);
        Rational r = radius(n);
        return {a - r, a + r};
    }

    // The point itself when the value is a known rational, else enclosure(n).
    Interval tight_enclosure(unsigned n) const {
        if (s_->exact) return Interval(*s_->exact);
        return enclosure(n);
    }

    const std::optional<Rational>& exact() const { return s_->exact; }
    bool debug_checked() const { return s_->debug; }

    static Rational radius(unsigned n) { return Rational::pow2(1 - static_cast<long>(n)); }

private:
    struct Uninit {};
    explicit CReal(Uninit) {}

    struct State {
        ApproxFn fn;
        bool debug = false;
        std::optional<Rational> exact;
        std::mutex mutex;
        std::map<unsigned, Rational> memo;
    };

    Rational value_at(unsigned n) const {
        {
            std::lock_guard lock(s_->mutex);
            auto it = s_->memo.find(n);
            if (it != s_->memo.end()) return it->second;
        }
        Rational v = s_->fn(n);
        std::lock_guard lock(s_->mutex);
        return s_->memo.emplace(n, std::move(v)).first->second;
    }

    std::shared_ptr<State> s_;
};

inline CReal make_creal(CReal::ApproxFn f, bool debug_check = false) { return CReal::make(std::move(f), debug_check); }
inline CReal from_rational(const Rational& q) { return CReal(q); }
inline Rational approx(const CReal& x, unsigned n) { return x.approx(n); }
inline Interval enclosure(const CReal& x, unsigned n) { return x.enclosure(n); }

// ---------------------------------------------------------------- arithmetic

enum class ArithOp { Add, Sub, Mul, Neg };

inline CReal neg(const CReal& x) {
    if (x.exact()) return CReal(-*x.exact());
    return CReal::make([x](unsigned n) { return -x.approx(n); });
}

inline CReal add(const CReal& x, const CReal& y) {
    if (x.exact() && y.exact()) return CReal(*x.exact() + *y.exact());
    return CReal::make([x, y](unsigned n) { return x.approx(n + 2) + y.approx(n + 2); });
}

inline CReal sub(const CReal& x, const CReal& y) { return add(x, neg(y)); }

namespace detail {
// ceil(log2(B_x + B_y + 2)) + 2 with B the magnitude of the index-0 enclosure.
inline unsigned mul_shift(const CReal& x, const CReal& y) {
    Rational b = x.enclosure(0).mag() + y.enclosure(0).mag() + Rational(2);
    return static_cast<unsigned>(b.ceil_log2_abs() + 2);
}
} // namespace detail

inline CReal mul(const CReal& x, const CReal& y) {
    if (x.exact() && y.exact()) return CReal(*x.exact() * *y.exact());
    return CReal::make([x, y](unsigned n) {
        unsigned s = detail::mul_shift(x, y);
        return x.approx(n + s) * y.approx(n + s);
    });
}

inline CReal arith(ArithOp op, const CReal& x, const CReal& y) {
    switch (op) {
    case ArithOp::Add: return add(x, y);
    case ArithOp::Sub: return sub(x, y);
    case ArithOp::Mul: return mul(x, y);
    case ArithOp::Neg: return neg(x);
    }
    throw std::invalid_argument("arith: unknown op");
}

inline CReal abs(const CReal& x) {
    if (x.exact()) return CReal(x.exact()->abs());
    return CReal::make([x](unsigned n) { return x.approx(n).abs(); });
}

inline CReal operator+(const CReal& x, const CReal& y) { return add(x, y); }
inline CReal operator-(const CReal& x, const CReal& y) { return sub(x, y); }
inline CReal operator*(const CReal& x, const CReal& y) { return mul(x, y); }
inline CReal operator-(const CReal& x) { return neg(x); }

// Precision index queried by the i-th refinement of a semi-decision.
inline unsigned refinement_precision(unsigned i) { return 4 + 2 * i; }

// 1/x. Separation of x from 0 is searched once, lazily, within `fuel`
// refinements; afterwards approx(n) = 1/x(a) with a chosen so that
// |x(a)| >= m/2 and the fast Cauchy bound carries over.
inline CReal reciprocal(const CReal& x, unsigned fuel = default_fuel()) {
    if (x.exact()) {
        if (x.exact()->is_zero()) throw DomainError("reciprocal of exact zero");
        return CReal(Rational(1) / *x.exact());
    }
    struct Sep {
        unsigned base;
        unsigned shift;
    };
    Lazy<Sep> sep([x, fuel]() -> Sep {
        for (unsigned i = 0; i < fuel; ++i) {
            Interval e = x.enclosure(refinement_precision(i));
            if (e.lo.sign() > 0 || e.hi.sign() < 0) {
                Rational m = min(e.lo.abs(), e.hi.abs());
                long k1 = std::max(0L, 3 - m.ceil_log2_abs());
                long shift = std::max(0L, (Rational(4) / (m * m)).ceil_log2_abs()) + 1;
                return {static_cast<unsigned>(k1), static_cast<unsigned>(shift)};
            }
        }
        throw Diverged(DivergeReason::Fuel, "reciprocal: argument not separated from 0");
    });
    return CReal::make([x, sep](unsigned n) {
        const Sep& s = sep.get();
        unsigned a = std::max(n + s.shift, s.base);
        return Rational(1) / x.approx(a);
    });
}

inline CReal div(const CReal& x, const CReal& y) { return mul(x, reciprocal(y)); }
inline CReal operator/(const CReal& x, const CReal& y) { return div(x, y); }

// ----------------------------------------------------------- transcendentals

namespace detail {

// An interval evaluator returns nullopt when the input is not yet narrow
// enough to decide, and may throw DomainError once the input certifies it.
using IntervalFn = std::function<std::optional<Interval>(const Interval&, unsigned long wp)>;

// Interval extension: refine the input until the image has width <= 2^-n,
// then round its midpoint to 2^-(n+3). Consecutive outputs are then within
// 2^-n-1 + 2^-n-2 + 2^-n-3 < 2^-n of each other.
inline CReal refine_unary(const CReal& x, IntervalFn f, std::function<unsigned()> extra, unsigned fuel) {
    Lazy<unsigned> extra_bits(std::move(extra));
    return CReal::make([x, f = std::move(f), extra_bits, fuel](unsigned n) {
        Rational target = Rational::pow2(-static_cast<long>(n));
        for (unsigned a = 0; a < fuel; ++a) {
            unsigned k = n + 3 + extra_bits.get() + a * (a + 1);
            Interval in = x.tight_enclosure(k);
            std::optional<Interval> out = f(in, k + 4);
            if (out && out->width() <= target) return out->mid().round_nearest(n + 3);
        }
        throw Diverged(DivergeReason::Fuel, "refinement did not reach the requested width");
    });
}

// Same acceptance rule for constants computed by enclosure at working precision.
inline CReal from_enclosures(std::function<Interval(unsigned long)> f) {
    return CReal::make([f = std::move(f)](unsigned n) {
        Rational target = Rational::pow2(-static_cast<long>(n));
        for (unsigned long wp = n + 4;; wp += 8) {
            Interval iv = f(wp);
            if (iv.width() <= target) return iv.mid().round_nearest(n + 3);
        }
    });
}

} // namespace detail

enum class Transcendental { Sqrt, Log, Exp };

inline CReal sqrt(const CReal& x, unsigned fuel = default_fuel()) {
    auto f = [](const Interval& in, unsigned long wp) -> std::optional<Interval> {
        if (in.hi.sign() < 0) throw DomainError("sqrt of a negative real");
        Rational lo = max(in.lo, Rational(0));
        return Interval(elementary::sqrt_point(lo, wp).lo, elementary::sqrt_point(in.hi, wp).hi);
    };
    return detail::refine_unary(x, f, [] { return 0u; }, fuel);
}

inline CReal log(const CReal& x, unsigned fuel = default_fuel()) {
    auto f = [](const Interval& in, unsigned long wp) -> std::optional<Interval> {
        if (in.hi.sign() <= 0) throw DomainError("log of a non-positive real");
        if (in.lo.sign() <= 0) return std::nullopt;
        return Interval(elementary::log_point(in.lo, wp).lo, elementary::log_point(in.hi, wp).hi);
    };
    return detail::refine_unary(x, f, [] { return 0u; }, fuel);
}

inline CReal exp(const CReal& x, unsigned fuel = default_fuel()) {
    auto f = [](const Interval& in, unsigned long wp) -> std::optional<Interval> {
        return Interval(elementary::exp_point(in.lo, wp).lo, elementary::exp_point(in.hi, wp).hi);
    };
    // exp'(x) <= e^hi, so the input needs about 1.45*hi extra bits.
    auto extra = [x]() -> unsigned {
        Rational hi = x.enclosure(0).hi;
        if (hi.sign() <= 0) return 0u;
        return static_cast<unsigned>(std::ceil(hi.to_double() * 1.4427)) + 1;
    };
    return detail::refine_unary(x, f, extra, fuel);
}

inline CReal transcendental(Transcendental op, const CReal& x, unsigned fuel = default_fuel()) {
    switch (op) {
    case Transcendental::Sqrt: return sqrt(x, fuel);
    case Transcendental::Log: return log(x, fuel);
    case Transcendental::Exp: return exp(x, fuel);
    }
    throw std::invalid_argument("transcendental: unknown op");
}

// --------------------------------------------------------------- comparison

enum class Comparison { Less, Greater, Undecided };

inline const char* to_string(Comparison c) {
    switch (c) {
    case Comparison::Less: return "Less";
    case Comparison::Greater: return "Greater";
    case Comparison::Undecided: return "Undecided";
    }
    return "?";
}

// Semi-decides x < y (and y < x). Undecided is the finite image of divergence.
inline Comparison lt_semi(const CReal& x, const CReal& y, unsigned fuel = default_fuel()) {
    for (unsigned i = 0; i < fuel; ++i) {
        unsigned k = refinement_precision(i);
        Interval ex = x.tight_enclosure(k);
        Interval ey = y.tight_enclosure(k);
        if (ex.hi < ey.lo) return Comparison::Less;
        if (ey.hi < ex.lo) return Comparison::Greater;
    }
    return Comparison::Undecided;
}

// --------------------------------------------------------------- constants

inline CReal pi() {
    static const CReal value = detail::from_enclosures([](unsigned long wp) { return elementary::pi_enclosure(wp); });
    return value;
}

// 2 + sum_{k=2}^{2+n} 1/k!
inline CReal euler_series(bool debug_check = false) {
    return make_creal(
        [](unsigned n) {
            Rational sum(2);
            Rational term(1);
            for (unsigned k = 2; k <= 2 + n; ++k) {
                term = term / Rational(static_cast<long>(k));
                sum += term;
            }
            return sum;
        },
        debug_check);
}

// y_n = 1/(-2)^(n+1): converges to 0 while changing sign at every index.
inline CReal thrashing_zero(bool debug_check = false) {
    return make_creal(
        [](unsigned n) {
            Rational r = Rational::pow2(-static_cast<long>(n) - 1);
            return n % 2 == 0 ? -r : r;
        },
        debug_check);
}

// -------------------------------------------------------- dyadic dense set

// Countable dense subset of the reals with a computable metric.
struct DenseEnum {
    std::function<Rational(std::size_t)> enumerate;
    std::function<CReal(const Rational&, const Rational&)> metric;
};

// 0, then for n = 1, 2, ...: m/2^n for m in [-n*2^n, n*2^n] with
// m odd or |m| > (n-1)*2^n, in increasing m.
inline DenseEnum dyadic_enum() {
    struct Gen {
        std::mutex mutex;
        std::vector<Rational> cache{Rational(0)};
        long level = 0;
    };
    auto g = std::make_shared<Gen>();
    auto enumerate = [g](std::size_t i) {
        std::lock_guard lock(g->mutex);
        while (g->cache.size() <= i) {
            long n = ++g->level;
            Integer scale;
            mpz_ui_pow_ui(scale.get_mpz_t(), 2, static_cast<unsigned long>(n));
            Integer top = scale * n;
            Integer inner = scale * (n - 1);
            for (Integer m = -top; m <= top; ++m) {
                Integer am = ::abs(m);
                if (mpz_odd_p(m.get_mpz_t()) || am > inner)
                    g->cache.push_back(Rational::dyadic(m, static_cast<unsigned long>(n)));
            }
        }
        return g->cache[i];
    };
    auto metric = [](const Rational& a, const Rational& b) { return CReal((a - b).abs()); };
    return {enumerate, metric};
}

} // namespace cdist

#endif
