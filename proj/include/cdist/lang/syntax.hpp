#ifndef CDIST_LANG_SYNTAX_HPP
#define CDIST_LANG_SYNTAX_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cdist/rational.hpp"

namespace cdist::lang {

struct Loc {
    int line = 1;
    int col = 1;
    std::string str() const { return std::to_string(line) + ":" + std::to_string(col); }
};

// Static errors. Kept outside cdist::Error so that sample-level failure
// handling never absorbs them.
class LangError : public std::runtime_error {
public:
    LangError(const std::string& kind, const std::string& msg, Loc loc)
        : std::runtime_error(kind + " at " + loc.str() + ": " + msg), kind_(kind), loc_(loc) {}
    const std::string& kind() const noexcept { return kind_; }
    Loc loc() const noexcept { return loc_; }

private:
    std::string kind_;
    Loc loc_;
};

class ParseError : public LangError {
public:
    ParseError(const std::string& msg, Loc loc) : LangError("ParseError", msg, loc) {}
};
class TypeError : public LangError {
public:
    TypeError(const std::string& rule, const std::string& msg, Loc loc) : LangError("TypeError", "[" + rule + "] " + msg, loc) {}
};
class UnboundVariable : public LangError {
public:
    UnboundVariable(const std::string& name, Loc loc) : LangError("UnboundVariable", "'" + name + "'", loc) {}
};
class IllFormedDistType : public LangError {
public:
    IllFormedDistType(const std::string& msg, Loc loc) : LangError("IllFormedDistType", msg, loc) {}
};
class RegistrationError : public LangError {
public:
    explicit RegistrationError(const std::string& msg) : LangError("RegistrationError", msg, Loc{0, 0}) {}
};
// Evaluation reached a form no rule applies to; only possible on ill-typed input.
class StuckTerm : public LangError {
public:
    StuckTerm(const std::string& msg, Loc loc) : LangError("StuckTerm", msg, loc) {}
};

// ------------------------------------------------------------------ types

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct Type {
    enum class Kind { Nat, Real, Arrow, Prod, Dist };
    Kind kind;
    TypePtr a; // Arrow domain, Prod left, Dist payload
    TypePtr b; // Arrow codomain, Prod right
};

inline TypePtr nat_t() {
    static const TypePtr t = std::make_shared<Type>(Type{Type::Kind::Nat, nullptr, nullptr});
    return t;
}
inline TypePtr real_t() {
    static const TypePtr t = std::make_shared<Type>(Type{Type::Kind::Real, nullptr, nullptr});
    return t;
}
inline TypePtr arrow_t(TypePtr a, TypePtr b) {
    return std::make_shared<Type>(Type{Type::Kind::Arrow, std::move(a), std::move(b)});
}
inline TypePtr prod_t(TypePtr a, TypePtr b) {
    return std::make_shared<Type>(Type{Type::Kind::Prod, std::move(a), std::move(b)});
}
inline TypePtr dist_t(TypePtr a) { return std::make_shared<Type>(Type{Type::Kind::Dist, std::move(a), nullptr}); }

inline bool type_eq(const TypePtr& x, const TypePtr& y) {
    if (x == y) return true;
    if (!x || !y || x->kind != y->kind) return false;
    switch (x->kind) {
    case Type::Kind::Nat:
    case Type::Kind::Real: return true;
    case Type::Kind::Dist: return type_eq(x->a, y->a);
    case Type::Kind::Arrow:
    case Type::Kind::Prod: return type_eq(x->a, y->a) && type_eq(x->b, y->b);
    }
    return false;
}

// Precedence: dist > * > ->; * and -> associate to the right.
inline std::string to_string(const TypePtr& t, int ctx = 0) {
    auto wrap = [ctx](int level, const std::string& s) { return ctx > level ? "(" + s + ")" : s; };
    switch (t->kind) {
    case Type::Kind::Nat: return "nat";
    case Type::Kind::Real: return "real";
    case Type::Kind::Dist: return wrap(2, "dist " + to_string(t->a, 3));
    case Type::Kind::Prod: return wrap(1, to_string(t->a, 2) + " * " + to_string(t->b, 1));
    case Type::Kind::Arrow: return wrap(0, to_string(t->a, 1) + " -> " + to_string(t->b, 0));
    }
    return "?";
}

// |-_D: nat, real, and products of well-formed types.
inline bool wf_dist(const TypePtr& t) {
    switch (t->kind) {
    case Type::Kind::Nat:
    case Type::Kind::Real: return true;
    case Type::Kind::Prod: return wf_dist(t->a) && wf_dist(t->b);
    default: return false;
    }
}

// ------------------------------------------------------------------ terms

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Zero {};
struct Succ { TermPtr e; };
struct Pred { TermPtr e; };
struct Ifz { TermPtr cond, then_branch, else_branch; };
struct Var { std::string name; };
struct Lam { std::string name; TypePtr type; TermPtr body; };
struct App { TermPtr fn, arg; };
struct Fix { TermPtr e; };
struct Pair { TermPtr first, second; };
struct Fst { TermPtr e; };
struct Snd { TermPtr e; };
struct RealLit { Rational value; };
// A real constant (arity 0) or a real operation of the global environment.
struct RealPrim { std::string name; };
struct DistPrim { std::string name; };
struct Return { TermPtr e; };
struct Bind { std::string name; TermPtr m1, m2; };

struct Term {
    std::variant<Zero, Succ, Pred, Ifz, Var, Lam, App, Fix, Pair, Fst, Snd, RealLit, RealPrim, DistPrim, Return, Bind> node;
    Loc loc;
};

template <class N>
TermPtr mk(N node, Loc loc = {}) {
    return std::make_shared<Term>(Term{std::move(node), loc});
}

// Exact decimal spelling; only rationals whose denominator is 2^a 5^b have one.
inline std::string decimal_literal(const Rational& q) {
    Integer den = q.den();
    unsigned digits = 0;
    Integer scaled = q.num();
    while (den != 1) {
        if (mpz_divisible_ui_p(den.get_mpz_t(), 10)) {
            den /= 10;
        } else if (mpz_divisible_ui_p(den.get_mpz_t(), 2)) {
            den /= 2;
            scaled *= 5;
        } else if (mpz_divisible_ui_p(den.get_mpz_t(), 5)) {
            den /= 5;
            scaled *= 2;
        } else {
            throw std::invalid_argument(q.to_string() + " has no finite decimal expansion");
        }
        ++digits;
    }
    bool neg = sgn(scaled) < 0;
    std::string body = Integer(::abs(scaled)).get_str();
    if (digits > 0) {
        if (body.size() <= digits) body = std::string(digits + 1 - body.size(), '0') + body;
        body.insert(body.size() - digits, ".");
    }
    return (neg ? "-" : "") + body;
}

// Concrete syntax, fully parenthesized where needed; parses back to the same term.
inline std::string to_string(const TermPtr& t) {
    struct Show {
        std::string operator()(const Zero&) const { return "O"; }
        std::string operator()(const Succ& n) const { return "succ (" + to_string(n.e) + ")"; }
        std::string operator()(const Pred& n) const { return "pred (" + to_string(n.e) + ")"; }
        std::string operator()(const Ifz& n) const {
            return "ifz " + to_string(n.cond) + " then " + to_string(n.then_branch) + " else " + to_string(n.else_branch);
        }
        std::string operator()(const Var& n) const { return n.name; }
        std::string operator()(const Lam& n) const {
            return "\\" + n.name + " : " + to_string(n.type) + ". " + to_string(n.body);
        }
        std::string operator()(const App& n) const { return "(" + to_string(n.fn) + ") (" + to_string(n.arg) + ")"; }
        std::string operator()(const Fix& n) const { return "fix (" + to_string(n.e) + ")"; }
        std::string operator()(const Pair& n) const { return "(" + to_string(n.first) + ", " + to_string(n.second) + ")"; }
        std::string operator()(const Fst& n) const { return "fst (" + to_string(n.e) + ")"; }
        std::string operator()(const Snd& n) const { return "snd (" + to_string(n.e) + ")"; }
        std::string operator()(const RealLit& n) const { return decimal_literal(n.value); }
        std::string operator()(const RealPrim& n) const { return n.name; }
        std::string operator()(const DistPrim& n) const { return n.name; }
        std::string operator()(const Return& n) const { return "return (" + to_string(n.e) + ")"; }
        std::string operator()(const Bind& n) const {
            return "let " + n.name + " <- " + to_string(n.m1) + " in " + to_string(n.m2);
        }
    };
    return std::visit(Show{}, t->node);
}

} // namespace cdist::lang

#endif
