#ifndef CDIST_LANG_VALUE_HPP
#define CDIST_LANG_VALUE_HPP

#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdist/creal.hpp"
#include "cdist/lazy.hpp"
#include "cdist/lang/syntax.hpp"
#include "cdist/openset.hpp"
#include "cdist/sampler.hpp"

namespace cdist::lang {

struct Value;
using ValuePtr = std::shared_ptr<const Value>;
// A call-by-name argument: evaluated at most once, on first use.
using Thunk = Lazy<ValuePtr>;

struct EnvNode;
using EnvPtr = std::shared_ptr<const EnvNode>;

// Persistent environment; extension shares the tail.
struct EnvNode {
    std::string name;
    Thunk value;
    EnvPtr next;
};

inline EnvPtr extend(EnvPtr env, std::string name, Thunk v) {
    return std::make_shared<EnvNode>(EnvNode{std::move(name), std::move(v), std::move(env)});
}

inline const Thunk* lookup(const EnvPtr& env, const std::string& name) {
    for (const EnvNode* n = env.get(); n; n = n->next.get())
        if (n->name == name) return &n->value;
    return nullptr;
}

struct NatV { LazyNat n; };
struct RealV { CReal x; };
struct ClosV { EnvPtr env; std::string name; TermPtr body; };
// A real operation of the global environment applied to fewer arguments than its arity.
struct PrimV { std::string name; std::vector<Thunk> args; };
struct PairV { Thunk first, second; };
struct DistV { Sampler<Thunk> sampler; };

struct Value {
    std::variant<NatV, RealV, ClosV, PrimV, PairV, DistV> v;
};

template <class V>
ValuePtr make_value(V v) {
    return std::make_shared<const Value>(Value{std::move(v)});
}

inline Thunk ready(ValuePtr v) { return Thunk::ready(std::move(v)); }
inline Thunk ready_nat(LazyNat n) { return ready(make_value(NatV{std::move(n)})); }
inline Thunk ready_real(CReal x) { return ready(make_value(RealV{std::move(x)})); }

inline const char* kind_name(const ValuePtr& v) {
    static const char* names[] = {"nat", "real", "closure", "primitive", "pair", "distribution"};
    return names[v->v.index()];
}

template <class V>
const V& expect(const ValuePtr& v, const char* what, Loc loc = {}) {
    if (const V* p = std::get_if<V>(&v->v)) return *p;
    throw StuckTerm(std::string("expected ") + what + ", got a " + kind_name(v), loc);
}

// Coordinates of a sample of a well-formed distribution type.
inline void flatten(const ValuePtr& v, std::vector<Coord>& out) {
    if (const auto* n = std::get_if<NatV>(&v->v)) {
        out.emplace_back(n->n);
    } else if (const auto* r = std::get_if<RealV>(&v->v)) {
        out.emplace_back(r->x);
    } else if (const auto* p = std::get_if<PairV>(&v->v)) {
        flatten(p->first.get(), out);
        flatten(p->second.get(), out);
    } else {
        throw StuckTerm(std::string("a ") + kind_name(v) + " is not a sample of a well-formed distribution type", {});
    }
}

// Leftmost scalar coordinate, the argument of an observation density.
inline CReal u_of(const ValuePtr& v) {
    if (const auto* n = std::get_if<NatV>(&v->v)) return CReal(Rational(static_cast<unsigned long>(n->n.value())));
    if (const auto* r = std::get_if<RealV>(&v->v)) return r->x;
    if (const auto* p = std::get_if<PairV>(&v->v)) return u_of(p->first.get());
    throw StuckTerm(std::string("a ") + kind_name(v) + " has no real coordinate", {});
}

} // namespace cdist::lang

#endif
