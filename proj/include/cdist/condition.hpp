#ifndef CDIST_CONDITION_HPP
#define CDIST_CONDITION_HPP

#include <functional>
#include <regex>
#include <stdexcept>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "cdist/creal.hpp"
#include "cdist/measure.hpp"
#include "cdist/openset.hpp"
#include "cdist/sampler.hpp"

namespace cdist {

// A density p(y | u) with a global bound p <= bound and a Lipschitz
// constant in u (only needed for certified posterior bounds).
struct BndDens {
    std::function<CReal(const CReal& u, const Rational& y)> dens;
    Rational bound;
    Rational lipschitz;
    std::string name;
};

// The coordinate of a prior sample the density is a function of.
inline CReal u_of(const CReal& x) { return x; }
inline CReal u_of(const LazyNat& n) { return CReal(Rational(static_cast<unsigned long>(n.value()))); }
template <class A, class B>
CReal u_of(const std::pair<A, B>& p) {
    return u_of(p.first);
}
template <class T>
CReal u_of(const Lazy<T>& x) {
    return u_of(x.get());
}

namespace detail {
inline const CReal& sqrt_two_pi() {
    static const CReal v = sqrt(CReal(Rational(2)) * pi());
    return v;
}
} // namespace detail

// exp(-(y-u)^2 / (2 sigma^2)) / (sigma sqrt(2 pi)); bound 2/(5 sigma) >= 1/(sigma sqrt(2 pi)),
// Lipschitz 1/(4 sigma^2) >= e^(-1/2) / (sigma^2 sqrt(2 pi)).
inline BndDens gaussian_noise(const Rational& sigma) {
    if (sigma.sign() <= 0) throw std::invalid_argument("gaussian-noise: sigma must be positive");
    BndDens d;
    d.name = "gaussian-noise(" + sigma.to_string() + ")";
    d.bound = Rational(2) / (Rational(5) * sigma);
    d.lipschitz = Rational(1) / (Rational(4) * sigma * sigma);
    CReal inv_two_var(Rational(-1) / (Rational(2) * sigma * sigma));
    CReal inv_norm = reciprocal(CReal(sigma) * detail::sqrt_two_pi());
    d.dens = [inv_two_var, inv_norm](const CReal& u, const Rational& y) {
        CReal r = CReal(y) - u;
        return exp(r * r * inv_two_var) * inv_norm;
    };
    return d;
}

// exp(-|y-u| / b) / (2b); bound 1/(2b), Lipschitz 1/(2b^2).
inline BndDens laplace_noise(const Rational& b) {
    if (b.sign() <= 0) throw std::invalid_argument("laplace-noise: scale must be positive");
    BndDens d;
    d.name = "laplace-noise(" + b.to_string() + ")";
    d.bound = Rational(1) / (Rational(2) * b);
    d.lipschitz = Rational(1) / (Rational(2) * b * b);
    CReal neg_inv_b(Rational(-1) / b);
    CReal half_inv_b(Rational(1) / (Rational(2) * b));
    d.dens = [neg_inv_b, half_inv_b](const CReal& u, const Rational& y) {
        return exp(abs(CReal(y) - u) * neg_inv_b) * half_inv_b;
    };
    return d;
}

inline BndDens constant_density(const Rational& c = Rational(1)) {
    if (c.sign() <= 0) throw std::invalid_argument("constant density must be positive");
    BndDens d;
    d.name = "constant(" + c.to_string() + ")";
    d.bound = c;
    d.lipschitz = Rational(0);
    d.dens = [c](const CReal&, const Rational&) { return CReal(c); };
    return d;
}

// "gaussian-noise(1)", "laplace-noise(0.5)", "constant" or "constant(2)".
inline BndDens parse_density(const std::string& text) {
    static const std::regex form(R"(\s*([a-z\-]+)\s*(?:\(\s*([^)]*?)\s*\))?\s*)");
    std::smatch m;
    if (!std::regex_match(text, m, form)) throw std::invalid_argument("malformed density '" + text + "'");
    std::string name = m[1];
    bool has_arg = m[2].matched && !m[2].str().empty();
    auto arg = [&] {
        if (!has_arg) throw std::invalid_argument("density '" + name + "' needs a parameter");
        return Rational::parse(m[2].str());
    };
    if (name == "gaussian-noise") return gaussian_noise(arg());
    if (name == "laplace-noise") return laplace_noise(arg());
    if (name == "constant") return has_arg ? constant_density(arg()) : constant_density();
    throw std::invalid_argument("unknown density '" + name + "' (known: gaussian-noise, laplace-noise, constant)");
}

// Rejection realizer of the posterior: each round draws x from the prior
// on even(t) and w uniform on even(odd(t)), accepts when w*bound < p(y|u),
// and otherwise continues on odd(odd(t)).
template <class X>
Sampler<X> obs_dens(const Sampler<X>& prior, const BndDens& d, const Rational& y, unsigned fuel = default_fuel()) {
    return Sampler<X>([prior, d, y, fuel](const BitTape& t) -> X {
        const Sampler<CReal> uniform01 = std_uniform();
        CReal bound(d.bound);
        BitTape cur = t;
        for (unsigned round = 0; round < fuel; ++round) {
            X x = prior.run(cur.even());
            CReal w = uniform01.run(cur.odd().even());
            switch (lt_semi(w * bound, d.dens(u_of(x), y), fuel)) {
            case Comparison::Less: return x;
            case Comparison::Greater: cur = cur.odd().odd(); continue;
            case Comparison::Undecided:
                throw Diverged(DivergeReason::Comparison, "obs_dens: acceptance test not decided");
            }
        }
        throw Diverged(DivergeReason::Fuel, "obs_dens: no accepted round");
    });
}

// Rejection on a positive-probability open event: redraw on odd(t) until
// the sample is certified inside U.
template <class X>
Sampler<X> condition_event(const Sampler<X>& prior, const OpenSet& u, unsigned fuel = default_fuel()) {
    return Sampler<X>([prior, u, fuel](const BitTape& t) -> X {
        BitTape cur = t;
        for (unsigned round = 0; round < fuel; ++round) {
            X x = prior.run(cur.even());
            bool rejected = false;
            for (unsigned i = 0; i < fuel && !rejected; ++i) {
                switch (classify_sample(u, x, refinement_precision(i))) {
                case Membership::Inside: return x;
                case Membership::Outside: rejected = true; break;
                case Membership::Straddle: break;
                case Membership::Failed: throw Diverged(DivergeReason::Bottom, "condition_event: sample undefined");
                }
            }
            if (!rejected) throw Diverged(DivergeReason::Comparison, "condition_event: sample stays on the boundary");
            cur = cur.odd();
        }
        throw Diverged(DivergeReason::Fuel, "condition_event: no accepted round");
    });
}

struct PosteriorBounds {
    MeasureBounds bounds;
    Interval numerator;
    Interval denominator;
};

inline nlohmann::json to_json(const PosteriorBounds& p) {
    nlohmann::json j = to_json(p.bounds);
    j["numerator"] = to_json(p.numerator);
    j["denominator"] = to_json(p.denominator);
    return j;
}

// Certified bounds on kappa(y, B) = int_B p(y|u) dmu / int p(y|u) dmu,
// from exhaustive enumeration of 2^k prior prefixes at precision n.
template <class X>
PosteriorBounds posterior_bounds(const Sampler<X>& prior, const BndDens& d, const Rational& y, const OpenSet& b,
                                 unsigned k, unsigned n) {
    detail::check_prefix_bits(k);
    std::uint64_t total = std::uint64_t{1} << k;
    std::vector<Interval> num(total), den(total);
    std::vector<Membership> where(total, Membership::Failed);
    RealFn p_of = [&d, &y](const CReal& u) { return d.dens(u, y); };
    Interval unknown(Rational(0), d.bound);
    parallel_for(total, [&](std::size_t i) {
        BitTape t = BitTape::from_prefix_index(i, k);
        try {
            X x = prior.run(t);
            CReal u = u_of(x);
            Interval p = detail::at_supported_precision(
                t, n, [&](unsigned q) { return detail::bound_f(p_of, u.tight_enclosure(q), d.bound, d.lipschitz, n); });
            p = Interval(max(p.lo, Rational(0)), max(p.hi, Rational(0)));
            Membership m = detail::at_supported_precision(t, n, [&](unsigned q) { return classify_sample(b, x, q); });
            where[i] = m;
            den[i] = p;
            if (m == Membership::Inside)
                num[i] = p;
            else if (m == Membership::Outside)
                num[i] = Interval(Rational(0));
            else
                num[i] = Interval(Rational(0), p.hi);
        } catch (const Error&) {
            where[i] = Membership::Failed;
            num[i] = unknown;
            den[i] = unknown;
        }
    });
    PosteriorBounds r;
    Interval ns(Rational(0)), ds(Rational(0));
    for (std::uint64_t i = 0; i < total; ++i) {
        ns = ns + num[i];
        ds = ds + den[i];
        switch (where[i]) {
        case Membership::Inside: ++r.bounds.inside; break;
        case Membership::Outside: ++r.bounds.outside; break;
        case Membership::Straddle: ++r.bounds.straddle; break;
        case Membership::Failed: ++r.bounds.failed; break;
        }
    }
    Rational cell = Rational::pow2(-static_cast<long>(k));
    r.numerator = ns * cell;
    r.denominator = ds * cell;
    if (r.denominator.lo.sign() <= 0) throw DenominatorIndistinguishableFromZero();
    r.bounds.prefix_bits = k;
    r.bounds.precision = n;
    r.bounds.samples = total;
    r.bounds.lower = max(Rational(0), min(Rational(1), r.numerator.lo / r.denominator.hi));
    r.bounds.upper = max(Rational(0), min(Rational(1), r.numerator.hi / r.denominator.lo));
    return r;
}

} // namespace cdist

#endif
