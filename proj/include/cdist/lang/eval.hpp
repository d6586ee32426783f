#ifndef CDIST_LANG_EVAL_HPP
#define CDIST_LANG_EVAL_HPP

#include <atomic>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdist/lang/global_env.hpp"
#include "cdist/lang/syntax.hpp"
#include "cdist/lang/value.hpp"
#include "cdist/sampler.hpp"
#include "cdist/tape.hpp"

namespace cdist::lang {

// Shared by every thunk of one evaluation; `fuel` bounds fix unrollings.
struct EvalContext {
    std::shared_ptr<const GlobalEnv> genv;
    std::atomic<unsigned> fuel;

    EvalContext(std::shared_ptr<const GlobalEnv> g, unsigned f) : genv(std::move(g)), fuel(f) {}
};
using CtxPtr = std::shared_ptr<EvalContext>;

inline ValuePtr eval(const TermPtr& t, const EnvPtr& env, const CtxPtr& ctx);

inline Thunk delay(const TermPtr& t, const EnvPtr& env, const CtxPtr& ctx) {
    if (const auto* v = std::get_if<Var>(&t->node))
        if (const Thunk* bound = lookup(env, v->name)) return *bound;
    return Thunk([t, env, ctx] { return eval(t, env, ctx); });
}

namespace detail {

inline const Sampler<Thunk>& as_dist(const ValuePtr& v, Loc loc) { return expect<DistV>(v, "a distribution", loc).sampler; }

inline ValuePtr saturate(const RopEntry& rop, std::vector<Thunk> args) {
    TypePtr cod = rop.type;
    for (unsigned i = 0; i < rop.arity; ++i) cod = cod->b;
    auto compute = [fn = rop.fn, args = std::move(args)] {
        std::vector<CReal> xs;
        xs.reserve(args.size());
        for (const Thunk& a : args) xs.push_back(expect<RealV>(a.get(), "a real").x);
        return fn(xs);
    };
    if (cod->kind == Type::Kind::Nat)
        return make_value(NatV{LazyNat::deferred([compute] { return LazyNat(std::get<std::uint64_t>(compute())); })});
    return make_value(RealV{CReal::deferred([compute] { return std::get<CReal>(compute()); })});
}

inline ValuePtr apply(const ValuePtr& f, Thunk arg, const CtxPtr& ctx, Loc loc) {
    if (const auto* c = std::get_if<ClosV>(&f->v)) return eval(c->body, extend(c->env, c->name, std::move(arg)), ctx);
    if (const auto* p = std::get_if<PrimV>(&f->v)) {
        const RopEntry* rop = ctx->genv->rop(p->name);
        if (!rop) throw StuckTerm("unknown operation '" + p->name + "'", loc);
        std::vector<Thunk> args = p->args;
        args.push_back(std::move(arg));
        if (args.size() == rop->arity) return saturate(*rop, std::move(args));
        return make_value(PrimV{p->name, std::move(args)});
    }
    throw StuckTerm(std::string("applying a ") + kind_name(f), loc);
}

} // namespace detail

// Call-by-name evaluation to weak head normal form.
inline ValuePtr eval(const TermPtr& t, const EnvPtr& env, const CtxPtr& ctx) {
    const Loc loc = t->loc;
    return std::visit(
        [&](const auto& n) -> ValuePtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Zero>) {
                return make_value(NatV{LazyNat(0)});
            } else if constexpr (std::is_same_v<N, Succ>) {
                Thunk e = delay(n.e, env, ctx);
                return make_value(
                    NatV{LazyNat::deferred([e, loc] { return expect<NatV>(e.get(), "a natural", loc).n; }).succ()});
            } else if constexpr (std::is_same_v<N, Pred>) {
                return make_value(NatV{expect<NatV>(eval(n.e, env, ctx), "a natural", loc).n.pred()});
            } else if constexpr (std::is_same_v<N, Ifz>) {
                bool zero = expect<NatV>(eval(n.cond, env, ctx), "a natural", n.cond->loc).n.is_zero();
                return eval(zero ? n.then_branch : n.else_branch, env, ctx);
            } else if constexpr (std::is_same_v<N, Var>) {
                if (const Thunk* v = lookup(env, n.name)) return v->get();
                throw StuckTerm("unbound variable '" + n.name + "'", loc);
            } else if constexpr (std::is_same_v<N, Lam>) {
                return make_value(ClosV{env, n.name, n.body});
            } else if constexpr (std::is_same_v<N, App>) {
                return detail::apply(eval(n.fn, env, ctx), delay(n.arg, env, ctx), ctx, loc);
            } else if constexpr (std::is_same_v<N, Fix>) {
                unsigned left = ctx->fuel.load();
                do {
                    if (left == 0) throw Diverged(DivergeReason::Fuel, "fix unrolled past the fuel limit");
                } while (!ctx->fuel.compare_exchange_weak(left, left - 1));
                return detail::apply(eval(n.e, env, ctx), delay(t, env, ctx), ctx, loc);
            } else if constexpr (std::is_same_v<N, Pair>) {
                return make_value(PairV{delay(n.first, env, ctx), delay(n.second, env, ctx)});
            } else if constexpr (std::is_same_v<N, Fst>) {
                return expect<PairV>(eval(n.e, env, ctx), "a pair", loc).first.get();
            } else if constexpr (std::is_same_v<N, Snd>) {
                return expect<PairV>(eval(n.e, env, ctx), "a pair", loc).second.get();
            } else if constexpr (std::is_same_v<N, RealLit>) {
                return make_value(RealV{CReal(n.value)});
            } else if constexpr (std::is_same_v<N, RealPrim>) {
                if (const CReal* r = ctx->genv->real(n.name)) return make_value(RealV{*r});
                if (ctx->genv->rop(n.name)) return make_value(PrimV{n.name, {}});
                throw StuckTerm("unknown real primitive '" + n.name + "'", loc);
            } else if constexpr (std::is_same_v<N, DistPrim>) {
                if (const DistEntry* d = ctx->genv->dist(n.name)) return make_value(DistV{d->sampler});
                throw StuckTerm("unknown distribution '" + n.name + "'", loc);
            } else if constexpr (std::is_same_v<N, Return>) {
                return make_value(DistV{ret(delay(n.e, env, ctx))});
            } else {
                static_assert(std::is_same_v<N, Bind>);
                TermPtr m1 = n.m1, m2 = n.m2;
                std::string x = n.name;
                auto first = Sampler<Thunk>::deferred([m1, env, ctx] { return detail::as_dist(eval(m1, env, ctx), m1->loc); });
                return make_value(DistV{bind(first, [m2, x, env, ctx](Thunk xv) {
                    return detail::as_dist(eval(m2, extend(env, x, std::move(xv)), ctx), m2->loc);
                })});
            }
        },
        t->node);
}

inline ValuePtr eval(const TermPtr& t, const GlobalEnv& genv, unsigned fuel = default_fuel()) {
    return eval(t, nullptr, std::make_shared<EvalContext>(std::make_shared<const GlobalEnv>(genv), fuel));
}

// The sampler denoted by a closed term of type dist T. Every run evaluates
// the term afresh with its own fuel budget.
inline Sampler<Thunk> program_sampler(TermPtr t, std::shared_ptr<const GlobalEnv> genv, unsigned fuel = default_fuel()) {
    return Sampler<Thunk>([t = std::move(t), genv = std::move(genv), fuel](const BitTape& tape) {
        auto ctx = std::make_shared<EvalContext>(genv, fuel);
        return detail::as_dist(eval(t, nullptr, ctx), t->loc).run(tape);
    });
}

inline Sampler<Thunk> program_sampler(TermPtr t, const GlobalEnv& genv, unsigned fuel = default_fuel()) {
    return program_sampler(std::move(t), std::make_shared<const GlobalEnv>(genv), fuel);
}

// ------------------------------------------------------------- rendering

struct Rendered {
    nlohmann::json value;
    bool exact = true; // no real coordinate carries an approximation error
};

// Forces the whole value; reals are shown as approx(precision).
inline Rendered render(const ValuePtr& v, unsigned precision) {
    if (const auto* n = std::get_if<NatV>(&v->v)) return {std::to_string(n->n.value()), true};
    if (const auto* r = std::get_if<RealV>(&v->v)) {
        if (r->x.exact()) return {r->x.exact()->to_string(), true};
        return {r->x.approx(precision).to_string(), false};
    }
    if (const auto* p = std::get_if<PairV>(&v->v)) {
        Rendered a = render(p->first.get(), precision);
        Rendered b = render(p->second.get(), precision);
        return {nlohmann::json::array({a.value, b.value}), a.exact && b.exact};
    }
    throw StuckTerm(std::string("cannot render a ") + kind_name(v), {});
}

struct SampleReport {
    nlohmann::json value; // null when diverged
    Rational radius;
    std::size_t bits_read = 0;
    bool diverged = false;
    std::string reason;
    std::string message;
};

inline nlohmann::json to_json(const SampleReport& r) {
    nlohmann::json j{{"value", r.value},
                     {"radius", r.diverged ? nlohmann::json(nullptr) : nlohmann::json(r.radius.to_string())},
                     {"bits_read", r.bits_read},
                     {"diverged", r.diverged}};
    if (r.diverged) {
        j["reason"] = r.reason;
        j["message"] = r.message;
    }
    return j;
}

// Runs s on the tape and forces the result at `precision`. Divergence,
// exhausted tapes and domain errors are reported, not thrown.
inline SampleReport run_sampler(const Sampler<Thunk>& s, const BitTape& tape, unsigned precision) {
    auto [tracked, log] = tape.tracked();
    SampleReport r;
    try {
        Rendered out = render(s.run(tracked).get(), precision);
        r.value = std::move(out.value);
        r.radius = out.exact ? Rational(0) : CReal::radius(precision);
    } catch (const Diverged& e) {
        r.diverged = true;
        r.reason = to_string(e.reason());
        r.message = e.what();
    } catch (const OutOfBits& e) {
        r.diverged = true;
        r.reason = "out-of-bits";
        r.message = e.what();
    } catch (const Error& e) {
        r.diverged = true;
        r.reason = "error";
        r.message = e.what();
    }
    r.bits_read = log->size();
    return r;
}

inline SampleReport run_dist(const TermPtr& t, const GlobalEnv& genv, const BitTape& tape, unsigned precision,
                             unsigned fuel = default_fuel()) {
    return run_sampler(program_sampler(t, genv, fuel), tape, precision);
}

} // namespace cdist::lang

#endif
