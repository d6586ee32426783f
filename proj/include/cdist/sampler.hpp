#ifndef CDIST_SAMPLER_HPP
#define CDIST_SAMPLER_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <type_traits>
#include <utility>

#include "cdist/creal.hpp"
#include "cdist/error.hpp"
#include "cdist/lazy.hpp"
#include "cdist/tape.hpp"

namespace cdist {

// How a value produced by one sampler is handed to the continuation of a
// bind without running the producer yet. Types without a specialization
// are produced strictly.
template <class X>
struct DeferTraits {
    static constexpr bool deferrable = false;
};

template <>
struct DeferTraits<CReal> {
    static constexpr bool deferrable = true;
    static CReal defer(std::function<CReal()> f) { return CReal::deferred(std::move(f)); }
};

template <>
struct DeferTraits<LazyNat> {
    static constexpr bool deferrable = true;
    static LazyNat defer(std::function<LazyNat()> f) { return LazyNat::deferred(std::move(f)); }
};

template <class T>
struct DeferTraits<Lazy<T>> {
    static constexpr bool deferrable = true;
    static Lazy<T> defer(std::function<Lazy<T>()> f) {
        return Lazy<T>([f = std::move(f)] { return f().get(); });
    }
};

template <class A, class B>
struct DeferTraits<std::pair<A, B>> {
    static constexpr bool deferrable = DeferTraits<A>::deferrable && DeferTraits<B>::deferrable;
    static std::pair<A, B> defer(std::function<std::pair<A, B>()> f) {
        Lazy<std::pair<A, B>> both(std::move(f));
        return {DeferTraits<A>::defer([both] { return both.get().first; }),
                DeferTraits<B>::defer([both] { return both.get().second; })};
    }
};

// Produce f() now, or a handle that runs it on first use.
template <class X>
X produce(std::function<X()> f) {
    if constexpr (DeferTraits<X>::deferrable) {
        return DeferTraits<X>::defer(std::move(f));
    } else {
        return f();
    }
}

// A deterministic function from bit tapes to X. A sampler may itself be
// the result of a computation (see deferred); `whnf` performs it.
template <class X>
class Sampler {
public:
    using value_type = X;
    using RunFn = std::function<X(const BitTape&)>;

    explicit Sampler(RunFn f) : s_(std::make_shared<State>()) { s_->run = std::move(f); }

    static Sampler deferred(std::function<Sampler()> make) {
        Sampler s;
        s.s_ = std::make_shared<State>();
        s.s_->make.emplace(std::move(make));
        return s;
    }

    // Throws if constructing the sampler itself diverges.
    const Sampler& whnf() const {
        const Sampler* cur = this;
        while (cur->s_->make) cur = &cur->s_->make->get();
        return *cur;
    }

    X run(const BitTape& t) const { return whnf().s_->run(t); }
    X operator()(const BitTape& t) const { return run(t); }

private:
    Sampler() = default;

    struct State {
        RunFn run;
        std::optional<Lazy<Sampler>> make;
    };
    std::shared_ptr<State> s_;
};

template <class S>
struct sampler_value;
template <class Y>
struct sampler_value<Sampler<Y>> {
    using type = Y;
};

template <class X>
Sampler<X> ret(X x) {
    return Sampler<X>([x = std::move(x)](const BitTape&) { return x; });
}

// run(bind(s, f), t) = run(f(run(s, even t)), odd t). The sampler s is
// brought to weak-head form first; its output is passed unforced when X
// is deferrable.
template <class X, class F>
auto bind(Sampler<X> s, F f) {
    using SY = std::decay_t<std::invoke_result_t<F, X>>;
    using Y = typename sampler_value<SY>::type;
    return Sampler<Y>([s = std::move(s), f = std::move(f)](const BitTape& t) {
        const Sampler<X>& head = s.whnf();
        BitTape left = t.even();
        X x = produce<X>([head, left] { return head.run(left); });
        return f(std::move(x)).run(t.odd());
    });
}

template <class X, class G>
auto fmap(Sampler<X> s, G g) {
    using Y = std::decay_t<std::invoke_result_t<G, X>>;
    return Sampler<Y>([s = std::move(s), g = std::move(g)](const BitTape& t) { return g(s.run(t)); });
}

// ---------------------------------------------------------------- primitives

// approx(n): n+1 bisections of (0,1), bit true keeps the left half; the
// midpoint of the final interval, a dyadic with denominator 2^(n+2).
inline Sampler<CReal> std_uniform() {
    return Sampler<CReal>([](const BitTape& t) {
        return CReal::make([t](unsigned n) {
            Integer pos = 0;
            for (unsigned i = 0; i <= n; ++i) {
                pos <<= 1;
                if (!t.read(i)) pos += 1;
            }
            return Rational::dyadic(2 * pos + 1, n + 2);
        });
    });
}

// a + (b - a) u. Requires a < b, checked when run.
inline Sampler<CReal> uniform(const CReal& a, const CReal& b, unsigned fuel = default_fuel()) {
    return Sampler<CReal>([a, b, fuel](const BitTape& t) {
        if (lt_semi(a, b, fuel) != Comparison::Less)
            throw Diverged(DivergeReason::Comparison, "uniform: endpoints not certified a < b");
        CReal u = std_uniform().run(t);
        if (a.exact() && b.exact()) {
            Rational lo = *a.exact();
            Rational w = *b.exact() - lo;
            long s = std::max(0L, w.ceil_log2_abs() - 3);
            return CReal::make([u, lo, w, s](unsigned n) { return lo + w * u.approx(n + static_cast<unsigned>(s)); });
        }
        return a + (b - a) * u;
    });
}

// Reads tape bit 0.
inline Sampler<bool> std_bernoulli() {
    return Sampler<bool>([](const BitTape& t) { return t.read(0); });
}

// u < p for u drawn from std_uniform on the same tape.
inline Sampler<bool> bernoulli(const CReal& p, unsigned fuel = default_fuel()) {
    return Sampler<bool>([p, fuel](const BitTape& t) {
        CReal u = std_uniform().run(t);
        switch (lt_semi(u, p, fuel)) {
        case Comparison::Less: return true;
        case Comparison::Greater: return false;
        case Comparison::Undecided: break;
        }
        throw Diverged(DivergeReason::Comparison, "bernoulli: draw not separated from p");
    });
}

// Draw a fair bit; true gives 1, false recurses and adds 1. `fuel` bounds
// the recursion depth.
inline Sampler<LazyNat> std_geometric(unsigned fuel = default_fuel()) {
    if (fuel == 0)
        return Sampler<LazyNat>([](const BitTape&) -> LazyNat {
            throw Diverged(DivergeReason::Fuel, "stdGeometric recursion depth");
        });
    return bind(std_bernoulli(), [fuel](bool b) {
        if (b) return ret(LazyNat(1));
        auto rest = Sampler<LazyNat>::deferred([fuel] { return std_geometric(fuel - 1); });
        return bind(rest, [](LazyNat n) { return ret(n.succ()); });
    });
}

// Polar method: u1, u2 uniform on (-1,1), s = u1^2 + u2^2; accept when
// s < 1 with u1 sqrt(-2 log s / s), otherwise retry on a fresh split.
inline Sampler<CReal> std_normal(unsigned fuel = default_fuel()) {
    return Sampler<CReal>([fuel](const BitTape& t) {
        const Sampler<CReal> side = uniform(CReal(Rational(-1)), CReal(Rational(1)), fuel);
        BitTape cur = t;
        for (unsigned round = 0; round < fuel; ++round) {
            CReal u1 = side.run(cur.even());
            CReal u2 = side.run(cur.odd().even());
            CReal s = u1 * u1 + u2 * u2;
            switch (lt_semi(s, CReal(Rational(1)), fuel)) {
            case Comparison::Less: return u1 * sqrt(CReal(Rational(-2)) * log(s, fuel) / s, fuel);
            case Comparison::Greater: cur = cur.odd().odd(); continue;
            case Comparison::Undecided: throw Diverged(DivergeReason::Comparison, "stdNormal: s not separated from 1");
            }
        }
        throw Diverged(DivergeReason::Fuel, "stdNormal: no accepted round");
    });
}

// m + s z. Requires s > 0, checked when run.
inline Sampler<CReal> normal(const CReal& m, const CReal& s, unsigned fuel = default_fuel()) {
    Sampler<CReal> z = std_normal(fuel);
    return Sampler<CReal>([m, s, z, fuel](const BitTape& t) {
        if (lt_semi(CReal(Rational(0)), s, fuel) != Comparison::Less)
            throw Diverged(DivergeReason::Comparison, "normal: scale not certified positive");
        return m + s * z.run(t);
    });
}

// approx(m): trisect (0,1) m times, bit true keeping the left third,
// bit false the right third; the midpoint of the final interval.
inline Sampler<CReal> cantor() {
    return Sampler<CReal>([](const BitTape& t) {
        return CReal::make([t](unsigned m) {
            Rational left(0), right(1), third(1);
            for (unsigned i = 0; i < m; ++i) {
                third = third / Rational(3);
                if (t.read(i)) {
                    right = left + third;
                } else {
                    left = right - third;
                }
            }
            return right - third / Rational(2);
        });
    });
}

// No sampler at all: bringing it to weak-head form diverges.
template <class X = CReal>
Sampler<X> bot_samp() {
    return Sampler<X>::deferred([]() -> Sampler<X> { throw Diverged(DivergeReason::BotSampler, "botSamp"); });
}

// A sampler whose every sample diverges at every precision.
inline Sampler<CReal> bot_samp_bot() {
    return Sampler<CReal>([](const BitTape&) { return CReal::bottom(); });
}

// -------------------------------------------------------- library programs

// Discards a draw from bot_samp: diverges.
inline Sampler<CReal> always_div() {
    return bind(bot_samp(), [](const CReal&) { return std_uniform(); });
}

// Discards a draw from bot_samp_bot: behaves as std_uniform on odd(t).
inline Sampler<CReal> never_div() {
    return bind(bot_samp_bot(), [](const CReal&) { return std_uniform(); });
}

inline Sampler<Lazy<bool>> lazy_bernoulli() {
    return fmap(std_bernoulli(), [](bool b) { return Lazy<bool>::ready(b); });
}

// On bit true: a sample whose value diverges.
inline Sampler<Lazy<bool>> maybe_bot() {
    return bind(std_bernoulli(), [](bool b) {
        if (b) return ret(Lazy<bool>::bottom());
        return lazy_bernoulli();
    });
}

// On bit true: a sampler that diverges.
inline Sampler<Lazy<bool>> maybe_bot_prime() {
    return bind(std_bernoulli(), [](bool b) {
        if (b) return bot_samp<Lazy<bool>>();
        return lazy_bernoulli();
    });
}

// x ~ normal(-1,1), then y ~ normal(1,1); x + y.
inline Sampler<CReal> my_normal() {
    return bind(normal(CReal(Rational(-1)), CReal(Rational(1))), [](CReal x) {
        return bind(normal(CReal(Rational(1)), CReal(Rational(1))), [x](CReal y) { return ret(x + y); });
    });
}

// Same draws in the opposite order.
inline Sampler<CReal> my_normal_prime() {
    return bind(normal(CReal(Rational(1)), CReal(Rational(1))), [](CReal y) {
        return bind(normal(CReal(Rational(-1)), CReal(Rational(1))), [y](CReal x) { return ret(x + y); });
    });
}

} // namespace cdist

#endif
