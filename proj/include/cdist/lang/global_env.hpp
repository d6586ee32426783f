#ifndef CDIST_LANG_GLOBAL_ENV_HPP
#define CDIST_LANG_GLOBAL_ENV_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdist/creal.hpp"
#include "cdist/lang/parser.hpp"
#include "cdist/lang/syntax.hpp"
#include "cdist/lang/value.hpp"
#include "cdist/sampler.hpp"

namespace cdist::lang {

// Result of a saturated real operation: a real, or a natural for
// comparison-like operations declared with codomain nat.
using RopResult = std::variant<CReal, std::uint64_t>;
using RopFn = std::function<RopResult(const std::vector<CReal>&)>;

struct RopEntry {
    TypePtr type; // real -> ... -> real (or nat), `arity` arrows
    unsigned arity;
    RopFn fn;
};

struct DistEntry {
    TypePtr payload;
    Sampler<Thunk> sampler;
};

// Xi: named real constants, real operations and primitive distributions.
class GlobalEnv {
public:
    void add_real(const std::string& name, CReal value) {
        claim(name);
        reals_.emplace(name, std::move(value));
    }

    // The type must be real^arity -> real or real^arity -> nat.
    void add_rop(const std::string& name, TypePtr type, unsigned arity, RopFn fn) {
        if (arity == 0) throw RegistrationError("operation '" + name + "' must take at least one argument");
        TypePtr t = type;
        for (unsigned i = 0; i < arity; ++i) {
            if (t->kind != Type::Kind::Arrow || t->a->kind != Type::Kind::Real)
                throw RegistrationError("operation '" + name + "' of arity " + std::to_string(arity) +
                                        " cannot have type " + to_string(type));
            t = t->b;
        }
        if (t->kind != Type::Kind::Real && t->kind != Type::Kind::Nat)
            throw RegistrationError("operation '" + name + "' of arity " + std::to_string(arity) +
                                    " cannot have type " + to_string(type));
        claim(name);
        rops_.emplace(name, RopEntry{std::move(type), arity, std::move(fn)});
    }

    void add_dist(const std::string& name, TypePtr payload, Sampler<Thunk> sampler) {
        if (!wf_dist(payload))
            throw RegistrationError("distribution '" + name + "' has ill-formed payload type " + to_string(payload));
        claim(name);
        dists_.emplace(name, DistEntry{std::move(payload), std::move(sampler)});
    }

    const CReal* real(const std::string& name) const { return find(reals_, name); }
    const RopEntry* rop(const std::string& name) const { return find(rops_, name); }
    const DistEntry* dist(const std::string& name) const { return find(dists_, name); }

    // Type of a real constant or operation; null when unknown.
    TypePtr real_prim_type(const std::string& name) const {
        if (reals_.count(name)) return real_t();
        if (const RopEntry* r = rop(name)) return r->type;
        return nullptr;
    }

    PrimNames names() const {
        PrimNames p;
        for (const auto& [n, _] : reals_) p.reals.insert(n);
        for (const auto& [n, _] : rops_) p.reals.insert(n);
        for (const auto& [n, _] : dists_) p.dists.insert(n);
        return p;
    }

    std::vector<std::string> dist_names() const {
        std::vector<std::string> out;
        for (const auto& [n, _] : dists_) out.push_back(n);
        return out;
    }

private:
    void claim(const std::string& name) {
        if (name.empty() || detail::keywords().count(name))
            throw RegistrationError("'" + name + "' is not a valid primitive name");
        if (reals_.count(name) || rops_.count(name) || dists_.count(name))
            throw RegistrationError("'" + name + "' is already registered");
    }

    template <class M>
    static const typename M::mapped_type* find(const M& m, const std::string& name) {
        auto it = m.find(name);
        return it == m.end() ? nullptr : &it->second;
    }

    std::map<std::string, CReal> reals_;
    std::map<std::string, RopEntry> rops_;
    std::map<std::string, DistEntry> dists_;
};

inline TypePtr real_fn_t(unsigned arity, TypePtr codomain = real_t()) {
    TypePtr t = std::move(codomain);
    for (unsigned i = 0; i < arity; ++i) t = arrow_t(real_t(), t);
    return t;
}

inline Sampler<Thunk> real_dist(Sampler<CReal> s) {
    return fmap(std::move(s), [](CReal x) { return ready_real(std::move(x)); });
}

inline Sampler<Thunk> nat_dist(Sampler<LazyNat> s) {
    return fmap(std::move(s), [](LazyNat n) { return ready_nat(std::move(n)); });
}

// pi; add sub mul div neg sqrt log exp lt; stdUniform stdBernoulli
// stdGeometric stdNormal cantor botSamp botSampBot.
inline GlobalEnv default_global_env(unsigned fuel = default_fuel()) {
    GlobalEnv g;
    g.add_real("pi", pi());

    auto binary = [&g](const std::string& name, ArithOp op) {
        g.add_rop(name, real_fn_t(2), 2, [op](const std::vector<CReal>& a) -> RopResult { return arith(op, a[0], a[1]); });
    };
    binary("add", ArithOp::Add);
    binary("sub", ArithOp::Sub);
    binary("mul", ArithOp::Mul);
    g.add_rop("div", real_fn_t(2), 2, [fuel](const std::vector<CReal>& a) -> RopResult {
        return mul(a[0], reciprocal(a[1], fuel));
    });
    g.add_rop("neg", real_fn_t(1), 1, [](const std::vector<CReal>& a) -> RopResult { return neg(a[0]); });
    auto unary = [&g, fuel](const std::string& name, Transcendental op) {
        g.add_rop(name, real_fn_t(1), 1,
                  [op, fuel](const std::vector<CReal>& a) -> RopResult { return transcendental(op, a[0], fuel); });
    };
    unary("sqrt", Transcendental::Sqrt);
    unary("log", Transcendental::Log);
    unary("exp", Transcendental::Exp);
    g.add_rop("lt", real_fn_t(2, nat_t()), 2, [fuel](const std::vector<CReal>& a) -> RopResult {
        switch (lt_semi(a[0], a[1], fuel)) {
        case Comparison::Less: return std::uint64_t{1};
        case Comparison::Greater: return std::uint64_t{0};
        case Comparison::Undecided: break;
        }
        throw Diverged(DivergeReason::Comparison, "lt: arguments not separated");
    });

    g.add_dist("stdUniform", real_t(), real_dist(std_uniform()));
    g.add_dist("stdBernoulli", nat_t(), fmap(std_bernoulli(), [](bool b) { return ready_nat(LazyNat(b ? 1 : 0)); }));
    g.add_dist("stdGeometric", nat_t(), nat_dist(std_geometric(fuel)));
    g.add_dist("stdNormal", real_t(), real_dist(std_normal(fuel)));
    g.add_dist("cantor", real_t(), real_dist(cantor()));
    g.add_dist("botSamp", real_t(), bot_samp<Thunk>());
    g.add_dist("botSampBot", real_t(), real_dist(bot_samp_bot()));
    return g;
}

} // namespace cdist::lang

#endif
