#ifndef CDIST_MEASURE_HPP
#define CDIST_MEASURE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdist/creal.hpp"
#include "cdist/openset.hpp"
#include "cdist/parallel.hpp"
#include "cdist/sampler.hpp"

namespace cdist {

// ------------------------------------------------------------ flattening

inline void flatten(const CReal& x, std::vector<Coord>& out) { out.emplace_back(x); }
inline void flatten(const LazyNat& x, std::vector<Coord>& out) { out.emplace_back(x); }
inline void flatten(bool b, std::vector<Coord>& out) { out.emplace_back(b); }
inline void flatten(std::uint64_t n, std::vector<Coord>& out) { out.emplace_back(LazyNat(n)); }

template <class T>
void flatten(const Lazy<T>& x, std::vector<Coord>& out) {
    flatten(x.get(), out);
}

template <class A, class B>
void flatten(const std::pair<A, B>& p, std::vector<Coord>& out) {
    flatten(p.first, out);
    flatten(p.second, out);
}

template <class X>
Membership classify_sample(const OpenSet& u, const X& x, unsigned n) {
    std::vector<Coord> coords;
    try {
        flatten(x, coords);
    } catch (const Error&) {
        return u.kind() == OpenSet::Kind::Empty ? Membership::Outside : Membership::Failed;
    }
    return u.classify(coords, n);
}

// ---------------------------------------------------------------- bounds

struct MeasureBounds {
    Rational lower;
    Rational upper;
    unsigned prefix_bits = 0;
    unsigned precision = 0;
    std::uint64_t samples = 0;
    std::uint64_t inside = 0;
    std::uint64_t outside = 0;
    std::uint64_t straddle = 0;
    std::uint64_t failed = 0;

    Rational width() const { return upper - lower; }
    bool brackets(const Rational& v) const { return lower <= v && v <= upper; }
};

inline nlohmann::json to_json(const MeasureBounds& b) {
    return {{"lower", b.lower.to_string()},   {"upper", b.upper.to_string()},     {"lower_approx", b.lower.to_double()},
            {"upper_approx", b.upper.to_double()}, {"prefix_bits", b.prefix_bits}, {"precision", b.precision},
            {"samples", b.samples},            {"inside", b.inside},               {"outside", b.outside},
            {"straddle", b.straddle},          {"failed", b.failed}};
}

inline constexpr unsigned max_prefix_bits = 24;

namespace detail {

inline void check_prefix_bits(unsigned k) {
    if (k > max_prefix_bits)
        throw std::invalid_argument("prefix_bits " + std::to_string(k) + " exceeds the cap of " +
                                    std::to_string(max_prefix_bits));
}

// Rational r >= the real value v, within about 1e-12 relative.
inline Rational rational_above(double v) { return Rational::from_double(v * (1 + 1e-12) + 1e-300); }

inline Rational hoeffding(std::uint64_t n, double delta) {
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("confidence delta must lie in (0,1)");
    return rational_above(std::sqrt(std::log(2.0 / delta) / (2.0 * static_cast<double>(n))));
}

// attempt(p) for p = n, n-1, ..., 0, stepping down only while an attempt
// fails by reading past the end of the finite tape. Enclosures at any
// precision are sound, so the first attempt that fits the prefix wins.
template <class F>
auto at_supported_precision(const BitTape& t, unsigned n, F attempt) {
    for (unsigned p = n;; --p) {
        std::uint64_t before = t.overruns();
        try {
            auto r = attempt(p);
            if constexpr (std::is_same_v<decltype(r), Membership>) {
                if (r == Membership::Failed && p > 0 && t.overruns() != before) continue;
            }
            return r;
        } catch (const OutOfBits&) {
            if (p == 0 || t.overruns() == before) throw;
        }
    }
}

} // namespace detail

// Runs classify(s(tape), n) on all 2^k prefix tapes, at the highest
// precision <= n the prefix supports. A prefix that is certified inside U contributes its whole cylinder to the lower bound;
// one certified outside is removed from the upper bound.
template <class X, class Classify>
MeasureBounds measure_bounds_with(const Sampler<X>& s, Classify classify, unsigned k, unsigned n) {
    detail::check_prefix_bits(k);
    std::uint64_t total = std::uint64_t{1} << k;
    std::vector<Membership> result(total, Membership::Failed);
    parallel_for(total, [&](std::size_t p) {
        BitTape t = BitTape::from_prefix_index(p, k);
        try {
            X x = s.run(t);
            result[p] = detail::at_supported_precision(t, n, [&](unsigned q) { return classify(x, q); });
        } catch (const Error&) {
            result[p] = Membership::Failed;
        }
    });
    MeasureBounds b;
    b.prefix_bits = k;
    b.precision = n;
    b.samples = total;
    for (Membership m : result) {
        switch (m) {
        case Membership::Inside: ++b.inside; break;
        case Membership::Outside: ++b.outside; break;
        case Membership::Straddle: ++b.straddle; break;
        case Membership::Failed: ++b.failed; break;
        }
    }
    Rational cell = Rational::pow2(-static_cast<long>(k));
    b.lower = Rational(b.inside) * cell;
    b.upper = Rational(1) - Rational(b.outside) * cell;
    return b;
}

template <class X>
MeasureBounds measure_bounds(const Sampler<X>& s, const OpenSet& u, unsigned k, unsigned n) {
    return measure_bounds_with(s, [&u](const X& x, unsigned prec) { return classify_sample(u, x, prec); }, k, n);
}

// Monte Carlo over seeds seed, seed+1, ...: the frequency of certified
// membership widened by the Hoeffding radius at confidence 1 - delta.
// Straddling and failed samples count toward the upper bound only.
template <class X, class Classify>
MeasureBounds measure_mc_with(const Sampler<X>& s, Classify classify, std::uint64_t samples, std::uint64_t seed,
                              unsigned n, double delta) {
    if (samples == 0) throw std::invalid_argument("measure_mc needs at least one sample");
    std::vector<Membership> result(samples, Membership::Failed);
    parallel_for(samples, [&](std::size_t i) {
        BitTape t = BitTape::from_seed(seed + i);
        try {
            result[i] = classify(s.run(t), n);
        } catch (const Error&) {
            result[i] = Membership::Failed;
        }
    });
    MeasureBounds b;
    b.precision = n;
    b.samples = samples;
    for (Membership m : result) {
        switch (m) {
        case Membership::Inside: ++b.inside; break;
        case Membership::Outside: ++b.outside; break;
        case Membership::Straddle: ++b.straddle; break;
        case Membership::Failed: ++b.failed; break;
        }
    }
    Rational h = detail::hoeffding(samples, delta);
    Rational N(samples);
    b.lower = max(Rational(0), Rational(b.inside) / N - h);
    b.upper = min(Rational(1), (N - Rational(b.outside)) / N + h);
    return b;
}

template <class X>
MeasureBounds measure_mc(const Sampler<X>& s, const OpenSet& u, std::uint64_t samples, std::uint64_t seed, unsigned n,
                         double delta) {
    return measure_mc_with(
        s, [&u](const X& x, unsigned prec) { return classify_sample(u, x, prec); }, samples, seed, n, delta);
}

// ----------------------------------------------------------- integration

using RealFn = std::function<CReal(const CReal&)>;

namespace detail {

inline Interval clip(const Interval& v, const Rational& m) {
    Rational lo = max(v.lo, -m), hi = min(v.hi, m);
    if (hi < lo) return Interval(-m, m);
    return {lo, hi};
}

// Bounds on f over the ball described by enclosure e: f(mid) +- L*radius.
inline Interval bound_f(const RealFn& f, const Interval& e, const Rational& m, const Rational& lip, unsigned n) {
    Rational mid = e.mid();
    Rational rad = e.width() / Rational(2);
    Interval fy = f(CReal(mid)).tight_enclosure(n);
    Rational slack = lip * rad;
    return clip(Interval(fy.lo - slack, fy.hi + slack), m);
}

} // namespace detail

// Certified enclosure of the integral of f against the pushforward of s,
// by exhaustive enumeration of 2^k prefixes. Requires |f| <= M and f
// L-Lipschitz on the range of s; failing prefixes contribute [-M, M].
inline Interval integrate_enum(const Sampler<CReal>& s, const RealFn& f, const Rational& m, const Rational& lip,
                               unsigned k, unsigned n) {
    detail::check_prefix_bits(k);
    std::uint64_t total = std::uint64_t{1} << k;
    std::vector<Interval> parts(total);
    parallel_for(total, [&](std::size_t p) {
        BitTape t = BitTape::from_prefix_index(p, k);
        try {
            CReal x = s.run(t);
            parts[p] = detail::at_supported_precision(
                t, n, [&](unsigned q) { return detail::bound_f(f, x.tight_enclosure(q), m, lip, n); });
        } catch (const Error&) {
            parts[p] = Interval(-m, m);
        }
    });
    Interval sum(Rational(0));
    for (const Interval& v : parts) sum = sum + v;
    return sum * Rational::pow2(-static_cast<long>(k));
}

// Monte Carlo integral with Hoeffding half-width for values in [-M, M]
// (range 2M), at confidence 1 - delta. Sample values are f at the
// enclosure midpoint with their evaluation radius; failures span [-M, M].
inline Interval integrate_mc(const Sampler<CReal>& s, const RealFn& f, const Rational& m, std::uint64_t samples,
                             std::uint64_t seed, double delta, unsigned n = 20, const Rational& lip = Rational(0)) {
    if (samples == 0) throw std::invalid_argument("integrate_mc needs at least one sample");
    std::vector<Interval> parts(samples);
    parallel_for(samples, [&](std::size_t i) {
        BitTape t = BitTape::from_seed(seed + i);
        try {
            CReal x = s.run(t);
            Interval e = x.tight_enclosure(n);
            if (lip.is_zero()) {
                // Without a modulus, evaluate f on the sample itself.
                parts[i] = detail::clip(f(x).tight_enclosure(n), m);
            } else {
                parts[i] = detail::bound_f(f, e, m, lip, n);
            }
        } catch (const Error&) {
            parts[i] = Interval(-m, m);
        }
    });
    Interval sum(Rational(0));
    for (const Interval& v : parts) sum = sum + v;
    Rational N(samples);
    Interval mean = sum / N;
    Rational h = Rational(2) * m * detail::hoeffding(samples, delta);
    return {mean.lo - h, mean.hi + h};
}

// ------------------------------------------------ finitely supported measures

// Finite support with exact rational masses, total mass <= 1.
template <class P>
class DiscreteMeasure {
public:
    using point_type = P;

    DiscreteMeasure() = default;
    explicit DiscreteMeasure(std::map<P, Rational> masses) : m_(std::move(masses)) { normalize_check(); }
    DiscreteMeasure(std::initializer_list<std::pair<const P, Rational>> l) : m_(l) { normalize_check(); }

    const std::map<P, Rational>& masses() const { return m_; }

    Rational mass(const P& p) const {
        auto it = m_.find(p);
        return it == m_.end() ? Rational(0) : it->second;
    }

    template <class Pred>
    Rational mass_where(Pred pred) const {
        Rational r(0);
        for (const auto& [p, w] : m_)
            if (pred(p)) r += w;
        return r;
    }

    Rational total() const {
        Rational r(0);
        for (const auto& [p, w] : m_) r += w;
        return r;
    }

    friend bool operator==(const DiscreteMeasure& a, const DiscreteMeasure& b) { return a.m_ == b.m_; }

private:
    void normalize_check() {
        for (auto it = m_.begin(); it != m_.end();) {
            if (it->second.sign() < 0) throw MassError("negative mass");
            if (it->second.is_zero())
                it = m_.erase(it);
            else
                ++it;
        }
        if (total() > Rational(1)) throw MassError("total mass " + total().to_string() + " exceeds 1");
    }

    std::map<P, Rational> m_;
};

template <class P>
DiscreteMeasure<P> val_ret(const P& x) {
    return DiscreteMeasure<P>(std::map<P, Rational>{{x, Rational(1)}});
}

// The mixture sum_x mu(x) f(x).
template <class P, class F>
auto val_bind(const DiscreteMeasure<P>& mu, F f) {
    using Q = typename std::decay_t<std::invoke_result_t<F, P>>::point_type;
    std::map<Q, Rational> acc;
    for (const auto& [x, w] : mu.masses()) {
        const auto fx = f(x); // keeps the masses alive for the loop
        for (const auto& [y, v] : fx.masses()) acc[y] += w * v;
    }
    return DiscreteMeasure<Q>(std::move(acc));
}

} // namespace cdist

#endif
