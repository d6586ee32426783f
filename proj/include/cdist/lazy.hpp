#ifndef CDIST_LAZY_HPP
#define CDIST_LAZY_HPP

#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <utility>

#include "cdist/error.hpp"

namespace cdist {

// Memoized thunk. Forced at most once; an exception thrown while forcing is
// remembered and rethrown on every later access. Re-entrant forcing from
// the same computation is a cycle and diverges.
template <class T>
class Lazy {
public:
    explicit Lazy(std::function<T()> fn) : s_(std::make_shared<State>()) { s_->fn = std::move(fn); }

    static Lazy ready(T value) {
        Lazy l;
        l.s_ = std::make_shared<State>();
        l.s_->value.emplace(std::move(value));
        return l;
    }

    // Every access diverges.
    static Lazy bottom() {
        return Lazy([]() -> T { throw Diverged(DivergeReason::Bottom, "forced a bottom value"); });
    }

    const T& get() const {
        std::lock_guard lock(s_->mutex);
        if (s_->value) return *s_->value;
        if (s_->error) std::rethrow_exception(s_->error);
        if (s_->running) throw Diverged(DivergeReason::Cycle, "value depends on itself");
        s_->running = true;
        try {
            s_->value.emplace(s_->fn());
        } catch (...) {
            s_->error = std::current_exception();
            s_->running = false;
            s_->fn = nullptr;
            throw;
        }
        s_->running = false;
        s_->fn = nullptr;
        return *s_->value;
    }

    bool forced() const {
        std::lock_guard lock(s_->mutex);
        return s_->value.has_value() || s_->error != nullptr;
    }

private:
    Lazy() = default;

    struct State {
        std::recursive_mutex mutex;
        std::function<T()> fn;
        std::optional<T> value;
        std::exception_ptr error;
        bool running = false;
    };
    std::shared_ptr<State> s_;
};

// A natural number revealed lazily in Peano fashion: base + (deferred rest).
// Knowing the base alone already certifies a lower bound, which the
// measure engine uses to rule values out of finite sets.
class LazyNat {
public:
    LazyNat(std::uint64_t n = 0) : base_(n) {} // NOLINT(google-explicit-constructor)

    static LazyNat deferred(std::function<LazyNat()> rest) {
        LazyNat r;
        r.rest_.emplace(std::move(rest));
        return r;
    }

    LazyNat plus(std::uint64_t k) const {
        LazyNat r = *this;
        r.base_ += k;
        return r;
    }
    LazyNat succ() const { return plus(1); }

    // Forces everything.
    std::uint64_t value() const {
        std::uint64_t acc = base_;
        std::optional<Lazy<LazyNat>> rest = rest_;
        while (rest) {
            LazyNat next = rest->get();
            acc += next.base_;
            rest = std::move(next.rest_);
        }
        return acc;
    }

    // Equivalent value whose base is nonzero, or which is exactly zero.
    LazyNat whnf() const {
        LazyNat cur = *this;
        while (cur.base_ == 0 && cur.rest_) {
            LazyNat next = cur.rest_->get();
            cur = std::move(next);
        }
        return cur;
    }

    bool is_zero() const {
        LazyNat w = whnf();
        return w.base_ == 0 && !w.rest_;
    }

    LazyNat pred() const {
        LazyNat w = whnf();
        if (w.base_ > 0) w.base_ -= 1;
        return w;
    }

    // What can be learned without failing: either the exact value, or a
    // certified lower bound. Stops early once the bound exceeds `enough`.
    struct Partial {
        std::uint64_t floor = 0;
        bool exact = false;
    };
    Partial peel(std::uint64_t enough = UINT64_MAX) const {
        Partial p{base_, !rest_};
        std::optional<Lazy<LazyNat>> rest = rest_;
        while (rest && p.floor <= enough) {
            try {
                LazyNat next = rest->get();
                p.floor += next.base_;
                rest = std::move(next.rest_);
            } catch (const Error&) {
                return p;
            }
        }
        p.exact = !rest;
        return p;
    }

    std::uint64_t known_floor() const { return base_; }
    bool has_rest() const { return rest_.has_value(); }

private:
    std::uint64_t base_ = 0;
    std::optional<Lazy<LazyNat>> rest_;
};

} // namespace cdist

#endif
