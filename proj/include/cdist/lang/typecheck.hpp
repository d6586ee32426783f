#ifndef CDIST_LANG_TYPECHECK_HPP
#define CDIST_LANG_TYPECHECK_HPP

#include <string>
#include <utility>
#include <vector>

#include "cdist/lang/global_env.hpp"
#include "cdist/lang/syntax.hpp"

namespace cdist::lang {

// Typing context; later entries shadow earlier ones.
class TyCtx {
public:
    TyCtx() = default;
    TyCtx(std::initializer_list<std::pair<std::string, TypePtr>> l) : vars_(l) {}

    TyCtx with(const std::string& name, TypePtr t) const {
        TyCtx c = *this;
        c.vars_.emplace_back(name, std::move(t));
        return c;
    }

    TypePtr find(const std::string& name) const {
        for (auto it = vars_.rbegin(); it != vars_.rend(); ++it)
            if (it->first == name) return it->second;
        return nullptr;
    }

private:
    std::vector<std::pair<std::string, TypePtr>> vars_;
};

namespace detail {

inline void require(bool ok, const char* rule, const std::string& msg, Loc loc) {
    if (!ok) throw TypeError(rule, msg, loc);
}

inline std::string mismatch(const TypePtr& want, const TypePtr& got) {
    return "expected " + to_string(want) + ", found " + to_string(got);
}

} // namespace detail

inline TypePtr infer(const TyCtx& ctx, const GlobalEnv& genv, const TermPtr& t) {
    using detail::mismatch;
    using detail::require;
    const Loc loc = t->loc;
    auto nat_arg = [&](const char* rule, const TermPtr& e) {
        TypePtr a = infer(ctx, genv, e);
        require(type_eq(a, nat_t()), rule, mismatch(nat_t(), a), e->loc);
    };
    return std::visit(
        [&](const auto& n) -> TypePtr {
            using N = std::decay_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Zero>) {
                return nat_t();
            } else if constexpr (std::is_same_v<N, Succ>) {
                nat_arg("succ", n.e);
                return nat_t();
            } else if constexpr (std::is_same_v<N, Pred>) {
                nat_arg("pred", n.e);
                return nat_t();
            } else if constexpr (std::is_same_v<N, Ifz>) {
                nat_arg("ifz", n.cond);
                TypePtr a = infer(ctx, genv, n.then_branch);
                TypePtr b = infer(ctx, genv, n.else_branch);
                require(type_eq(a, b), "ifz", "branches differ: " + to_string(a) + " and " + to_string(b), loc);
                return a;
            } else if constexpr (std::is_same_v<N, Var>) {
                if (TypePtr ty = ctx.find(n.name)) return ty;
                throw UnboundVariable(n.name, loc);
            } else if constexpr (std::is_same_v<N, Lam>) {
                return arrow_t(n.type, infer(ctx.with(n.name, n.type), genv, n.body));
            } else if constexpr (std::is_same_v<N, App>) {
                TypePtr f = infer(ctx, genv, n.fn);
                require(f->kind == Type::Kind::Arrow, "app", "applying a non-function of type " + to_string(f), loc);
                TypePtr a = infer(ctx, genv, n.arg);
                require(type_eq(f->a, a), "app", "argument " + mismatch(f->a, a), n.arg->loc);
                return f->b;
            } else if constexpr (std::is_same_v<N, Fix>) {
                TypePtr f = infer(ctx, genv, n.e);
                require(f->kind == Type::Kind::Arrow && type_eq(f->a, f->b), "fix",
                        "expected a function of type T -> T, found " + to_string(f), loc);
                return f->a;
            } else if constexpr (std::is_same_v<N, Pair>) {
                return prod_t(infer(ctx, genv, n.first), infer(ctx, genv, n.second));
            } else if constexpr (std::is_same_v<N, Fst> || std::is_same_v<N, Snd>) {
                constexpr bool first = std::is_same_v<N, Fst>;
                TypePtr p = infer(ctx, genv, n.e);
                require(p->kind == Type::Kind::Prod, first ? "fst" : "snd", "expected a product, found " + to_string(p), loc);
                return first ? p->a : p->b;
            } else if constexpr (std::is_same_v<N, RealLit>) {
                return real_t();
            } else if constexpr (std::is_same_v<N, RealPrim>) {
                if (TypePtr ty = genv.real_prim_type(n.name)) return ty;
                throw UnboundVariable(n.name, loc);
            } else if constexpr (std::is_same_v<N, DistPrim>) {
                if (const DistEntry* d = genv.dist(n.name)) return dist_t(d->payload);
                throw UnboundVariable(n.name, loc);
            } else if constexpr (std::is_same_v<N, Return>) {
                TypePtr a = infer(ctx, genv, n.e);
                if (!wf_dist(a)) throw IllFormedDistType("return: no distributions over " + to_string(a), loc);
                return dist_t(a);
            } else {
                static_assert(std::is_same_v<N, Bind>);
                TypePtr m1 = infer(ctx, genv, n.m1);
                require(m1->kind == Type::Kind::Dist, "bind", "expected a distribution, found " + to_string(m1), n.m1->loc);
                if (!wf_dist(m1->a)) throw IllFormedDistType("bind: no distributions over " + to_string(m1->a), n.m1->loc);
                TypePtr m2 = infer(ctx.with(n.name, m1->a), genv, n.m2);
                require(m2->kind == Type::Kind::Dist, "bind", "body must be a distribution, found " + to_string(m2),
                        n.m2->loc);
                if (!wf_dist(m2->a)) throw IllFormedDistType("bind: no distributions over " + to_string(m2->a), n.m2->loc);
                return m2;
            }
        },
        t->node);
}

inline TypePtr infer(const GlobalEnv& genv, const TermPtr& t) { return infer(TyCtx{}, genv, t); }

} // namespace cdist::lang

#endif
