#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "cdist/lang/eval.hpp"
#include "cdist/lang/parser.hpp"
#include "cdist/lang/typecheck.hpp"
#include "cdist/measure.hpp"

using namespace cdist;
using namespace cdist::lang;

namespace {

const GlobalEnv& genv() {
    static const GlobalEnv g = default_global_env();
    return g;
}

TermPtr p(const std::string& text) { return parse(text, genv().names()); }
TypePtr ty(const std::string& text) { return infer(genv(), p(text)); }
std::string show(const std::string& text) { return to_string(ty(text)); }

std::string read_program(const std::string& name) {
    std::ifstream in(std::string(CDIST_PROGRAMS_DIR) + "/" + name);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

template <class E>
Loc error_loc(const std::string& text) {
    try {
        ty(text);
    } catch (const E& e) {
        return e.loc();
    }
    ADD_FAILURE() << "no error for: " << text;
    return {};
}

} // namespace

// ------------------------------------------------------------------ parser

TEST(Parse, ExampleShapes) {
    TermPtr r = p("return 0.5");
    const auto* ret = std::get_if<Return>(&r->node);
    ASSERT_NE(ret, nullptr);
    ASSERT_TRUE(std::holds_alternative<RealLit>(ret->e->node));
    EXPECT_EQ(std::get<RealLit>(ret->e->node).value, Rational(Integer(1), Integer(2)));

    TermPtr b = p("let x <- stdUniform in return x");
    const auto* bind = std::get_if<Bind>(&b->node);
    ASSERT_NE(bind, nullptr);
    EXPECT_EQ(bind->name, "x");
    EXPECT_EQ(std::get<DistPrim>(bind->m1->node).name, "stdUniform");
    EXPECT_EQ(std::get<Var>(std::get<Return>(bind->m2->node).e->node).name, "x");

    TermPtr f = p("fix (\\g:nat->nat. g)");
    const auto* fix = std::get_if<Fix>(&f->node);
    ASSERT_NE(fix, nullptr);
    EXPECT_TRUE(std::holds_alternative<Lam>(fix->e->node));
}

TEST(Parse, ApplicationIsLeftAssociativeAndArrowsRight) {
    TermPtr t = p("add 1 2");
    const auto& outer = std::get<App>(t->node);
    EXPECT_TRUE(std::holds_alternative<App>(outer.fn->node));
    EXPECT_TRUE(std::holds_alternative<RealLit>(outer.arg->node));
    TypePtr a = parse_type("nat -> real -> nat");
    EXPECT_TRUE(type_eq(a, arrow_t(nat_t(), arrow_t(real_t(), nat_t()))));
    EXPECT_TRUE(type_eq(parse_type("dist nat * real"), prod_t(dist_t(nat_t()), real_t())));
    EXPECT_TRUE(type_eq(parse_type("(nat -> nat) -> nat"), arrow_t(arrow_t(nat_t(), nat_t()), nat_t())));
}

TEST(Parse, UnicodeCommentsAndNegativeLiterals) {
    EXPECT_TRUE(type_eq(ty("λx:real → real. x -- identity"), arrow_t(arrow_t(real_t(), real_t()), arrow_t(real_t(), real_t()))));
    TermPtr n = p("-1.25");
    EXPECT_EQ(std::get<RealLit>(n->node).value, Rational(Integer(-5), Integer(4)));
    EXPECT_EQ(show("let x ← stdNormal in return (x, O)"), "dist (real * nat)");
}

TEST(Parse, RoundTripsThroughConcreteSyntax) {
    for (const char* text : {"let x <- stdUniform in return (add x 0.125)", "fix (\\f:nat->nat. \\n:nat. ifz n then O else f (pred n))",
                             "(\\p:real*nat. snd p) (pi, succ O)", "return (lt 0.1 (sqrt 2))"}) {
        TermPtr once = p(text);
        TermPtr twice = p(to_string(once));
        EXPECT_EQ(to_string(once), to_string(twice)) << text;
    }
}

TEST(Parse, ErrorsCarryLineAndColumn) {
    try {
        p("return (O,\n   )");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.loc().line, 2);
        EXPECT_EQ(e.loc().col, 4);
    }
    EXPECT_THROW(p("\\x. x"), ParseError);
    EXPECT_THROW(p("let x stdUniform in x"), ParseError);
    EXPECT_THROW(p("return )"), ParseError);
    EXPECT_THROW(p("ifz O then O"), ParseError);
    EXPECT_THROW(p("(O"), ParseError);
}

// ------------------------------------------------------------------- types

TEST(WfDist, Rules) {
    EXPECT_TRUE(wf_dist(real_t()));
    EXPECT_TRUE(wf_dist(nat_t()));
    EXPECT_FALSE(wf_dist(arrow_t(nat_t(), nat_t())));
    EXPECT_TRUE(wf_dist(prod_t(nat_t(), prod_t(real_t(), real_t()))));
    EXPECT_FALSE(wf_dist(prod_t(nat_t(), dist_t(real_t()))));
    EXPECT_FALSE(wf_dist(dist_t(real_t())));
}

TEST(Infer, Examples) {
    EXPECT_EQ(show("return O"), "dist nat");
    EXPECT_EQ(show("ifz O then stdUniform else stdUniform"), "dist real");
    EXPECT_EQ(show("pi"), "real");
    EXPECT_EQ(show("add"), "real -> real -> real");
    EXPECT_EQ(show("lt 1"), "real -> nat");
    EXPECT_EQ(show("\\x:nat. (x, 0.5)"), "nat -> nat * real");
    EXPECT_EQ(show("fix (\\g:dist nat. g)"), "dist nat");
    EXPECT_EQ(show(read_program("geometric.lcd")), "dist nat");
    EXPECT_EQ(show(read_program("uniform_pair.lcd")), "dist ((real * real) * nat)");
    EXPECT_THROW(ty("let x <- stdUniform in return (\\y:real. y)"), IllFormedDistType);
    EXPECT_THROW(ty("return stdUniform"), IllFormedDistType);
}

TEST(Infer, ErrorsNameTheRule) {
    auto rule_of = [](const std::string& text) {
        try {
            ty(text);
        } catch (const TypeError& e) {
            return std::string(e.what());
        }
        return std::string("no error");
    };
    EXPECT_NE(rule_of("succ 0.5").find("[succ]"), std::string::npos);
    EXPECT_NE(rule_of("ifz 0.5 then O else O").find("[ifz]"), std::string::npos);
    EXPECT_NE(rule_of("ifz O then O else 0.5").find("[ifz]"), std::string::npos);
    EXPECT_NE(rule_of("O O").find("[app]"), std::string::npos);
    EXPECT_NE(rule_of("(\\x:nat. x) 0.5").find("[app]"), std::string::npos);
    EXPECT_NE(rule_of("fix (\\x:nat. 0.5)").find("[fix]"), std::string::npos);
    EXPECT_NE(rule_of("fst O").find("[fst]"), std::string::npos);
    EXPECT_NE(rule_of("let x <- O in return x").find("[bind]"), std::string::npos);
    EXPECT_THROW(ty("y"), UnboundVariable);
    EXPECT_THROW(ty("\\x:nat. y"), UnboundVariable);
    Loc l = error_loc<UnboundVariable>("return\n  (O, zz)");
    EXPECT_EQ(l.line, 2);
    EXPECT_EQ(l.col, 7);
}

// -------------------------------------------------------------- evaluation

TEST(Eval, Examples) {
    ValuePtr v = eval(p("ifz O then succ O else pred O"), genv());
    EXPECT_EQ(std::get<NatV>(v->v).n.value(), 1u);
    EXPECT_EQ(std::get<NatV>(eval(p("pred O"), genv())->v).n.value(), 0u);
    EXPECT_EQ(std::get<NatV>(eval(p("snd (0.5, succ (succ O))"), genv())->v).n.value(), 2u);
    ValuePtr r = eval(p("add 0.25 (mul 2 0.125)"), genv());
    EXPECT_EQ(std::get<RealV>(r->v).x.approx(10), Rational(Integer(1), Integer(2)));
    EXPECT_THROW(eval(p("fix (\\g:nat. g)"), genv(), 32), Diverged);
    ValuePtr lt = eval(p("lt 0.25 pi"), genv());
    EXPECT_EQ(std::get<NatV>(lt->v).n.value(), 1u);
    EXPECT_THROW(std::get<NatV>(eval(p("lt 0.5 0.5"), genv(), 8)->v).n.value(), Diverged);
}

TEST(Eval, RecursionByFix) {
    // Doubling by recursion: 3 -> 6.
    const char* dbl = "fix (\\d:nat->nat. \\n:nat. ifz n then O else succ (succ (d (pred n)))) (succ (succ (succ O)))";
    EXPECT_EQ(std::get<NatV>(eval(p(dbl), genv())->v).n.value(), 6u);
}

TEST(Eval, CallByNameIgnoresUnusedArguments) {
    ValuePtr v = eval(p("(\\x:real. 0.5) (fix (\\y:real. y))"), genv(), 16);
    EXPECT_EQ(std::get<RealV>(v->v).x.approx(0), Rational(Integer(1), Integer(2)));
    ValuePtr w = eval(p("fst (O, fix (\\n:nat. n))"), genv(), 16);
    EXPECT_EQ(std::get<NatV>(w->v).n.value(), 0u);
}

TEST(Eval, GeometricProgramMassesByPrefixEnumeration) {
    Sampler<Thunk> s = program_sampler(p(read_program("geometric.lcd")), genv());
    MeasureBounds one = measure_bounds(s, OpenSet::nats({1}), 8, 0);
    MeasureBounds two = measure_bounds(s, OpenSet::nats({2}), 8, 0);
    EXPECT_EQ(one.lower, Rational(Integer(1), Integer(2)));
    EXPECT_EQ(one.upper, Rational(Integer(1), Integer(2)));
    EXPECT_EQ(two.lower, Rational(Integer(1), Integer(4)));
    EXPECT_EQ(two.upper, Rational(Integer(1), Integer(4)));
}

// ---------------------------------------------------------------- run_dist

TEST(RunDist, Examples) {
    SampleReport a = run_dist(p("return 0.25"), genv(), BitTape::from_seed(1), 10);
    EXPECT_EQ(a.value, "1/4");
    EXPECT_EQ(a.bits_read, 0u);
    EXPECT_EQ(a.radius, Rational(0));

    SampleReport u = run_dist(p("stdUniform"), genv(), BitTape::constant(false), 0);
    EXPECT_EQ(u.value, "3/4");
    EXPECT_EQ(u.bits_read, 1u);
    EXPECT_EQ(u.radius, Rational(2));

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        SampleReport n = run_dist(p(read_program("never_div.lcd")), genv(), BitTape::from_seed(seed), 10);
        ASSERT_FALSE(n.diverged);
        Rational x = Rational::parse(n.value.get<std::string>());
        EXPECT_GT(x, Rational(0));
        EXPECT_LT(x, Rational(1));
        SampleReport d = run_dist(p(read_program("always_div.lcd")), genv(), BitTape::from_seed(seed), 10);
        EXPECT_TRUE(d.diverged);
        EXPECT_EQ(d.reason, "botSamp");
    }
}

TEST(RunDist, PairsRenderAsArrays) {
    SampleReport r = run_dist(p(read_program("uniform_pair.lcd")), genv(), BitTape::from_seed(5), 12);
    ASSERT_FALSE(r.diverged);
    ASSERT_TRUE(r.value.is_array());
    ASSERT_EQ(r.value.size(), 2u);
    Rational x = Rational::parse(r.value[0][0].get<std::string>()), y = Rational::parse(r.value[0][1].get<std::string>());
    EXPECT_EQ(r.value[1].get<std::string>(), y < x ? "1" : "0");
}

// ------------------------------------------------------------ global env

TEST(GlobalEnvironment, LookupsAndRegistration) {
    const DistEntry* u = genv().dist("stdUniform");
    ASSERT_NE(u, nullptr);
    EXPECT_TRUE(type_eq(u->payload, real_t()));
    EXPECT_EQ(genv().dist_names().size(), 7u);
    EXPECT_TRUE(type_eq(genv().real_prim_type("pi"), real_t()));

    GlobalEnv g = default_global_env();
    auto id = [](const std::vector<CReal>& a) -> RopResult { return a[0]; };
    EXPECT_THROW(g.add_rop("twice", real_fn_t(1), 2, id), RegistrationError);
    EXPECT_THROW(g.add_rop("f", arrow_t(nat_t(), real_t()), 1, id), RegistrationError);
    EXPECT_THROW(g.add_rop("add", real_fn_t(2), 2, id), RegistrationError);
    EXPECT_THROW(g.add_rop("succ", real_fn_t(1), 1, id), RegistrationError);
    EXPECT_THROW(g.add_dist("fnDist", arrow_t(real_t(), real_t()), real_dist(std_uniform())), RegistrationError);
    EXPECT_NO_THROW(g.add_rop("half", real_fn_t(1), 1, [](const std::vector<CReal>& a) -> RopResult {
        return a[0] * CReal(Rational(Integer(1), Integer(2)));
    }));
    EXPECT_EQ(to_string(infer(g, parse("half", g.names()))), "real -> real");
}

// -------------------------------------------------------------- coherence

TEST(Coherence, PrimitivesMatchLibrarySamplers) {
    using Lib = std::function<std::string(const BitTape&, unsigned)>;
    auto real = [](Sampler<CReal> s) -> Lib {
        return [s](const BitTape& t, unsigned n) {
            CReal x = s.run(t);
            return x.exact() ? x.exact()->to_string() : x.approx(n).to_string();
        };
    };
    std::vector<std::pair<std::string, Lib>> prims{
        {"stdUniform", real(std_uniform())},
        {"stdNormal", real(std_normal())},
        {"cantor", real(cantor())},
        {"stdGeometric", [](const BitTape& t, unsigned) { return std::to_string(std_geometric().run(t).value()); }},
        {"stdBernoulli", [](const BitTape& t, unsigned) { return std::string(std_bernoulli().run(t) ? "1" : "0"); }},
    };
    for (const auto& [name, lib] : prims)
        for (std::uint64_t seed = 0; seed < 10; ++seed)
            for (unsigned n : {0u, 5u, 10u}) {
                BitTape t = BitTape::from_seed(seed);
                SampleReport r = run_dist(p(name), genv(), t, n);
                ASSERT_FALSE(r.diverged) << name;
                EXPECT_EQ(r.value.get<std::string>(), lib(t, n)) << name << " seed " << seed << " n " << n;
            }
    EXPECT_TRUE(run_dist(p("botSamp"), genv(), BitTape::from_seed(0), 5).diverged);
    SampleReport bb = run_dist(p("botSampBot"), genv(), BitTape::from_seed(0), 5);
    EXPECT_TRUE(bb.diverged);
    EXPECT_EQ(bb.reason, "bottom");
}

// ------------------------------------------------ call-by-name behaviours

TEST(Laziness, MaybeBotVersusPrime) {
    Sampler<Thunk> mb = program_sampler(p(read_program("maybe_bot.lcd")), genv(), 16);
    Sampler<Thunk> mbp = program_sampler(p(read_program("maybe_bot_prime.lcd")), genv(), 16);
    for (bool head : {false, true}) {
        BitTape t = BitTape::from_function([head](std::uint64_t i) { return i == 0 ? head : (i % 3 == 0); });
        // Bit 0 true gives b = 1, the diverging branch in both programs.
        if (head) {
            Thunk v = mb.run(t);
            EXPECT_THROW(std::get<NatV>(v.get()->v).n.value(), Diverged);
            EXPECT_THROW(mbp.run(t), Diverged);
        } else {
            EXPECT_NO_THROW(std::get<NatV>(mb.run(t).get()->v).n.value());
            EXPECT_NO_THROW(std::get<NatV>(mbp.run(t).get()->v).n.value());
        }
    }
}

// ------------------------------------------------------- type soundness

namespace {

// Generates closed well-typed terms of a requested type.
class TermGen {
public:
    explicit TermGen(std::uint64_t seed) : rng_(seed) {}

    TypePtr random_type(int depth) {
        switch (pick(depth > 0 ? 6 : 2)) {
        case 0: return nat_t();
        case 1: return real_t();
        case 2: return arrow_t(random_type(depth - 1), random_type(depth - 1));
        case 3: return prod_t(random_type(depth - 1), random_type(depth - 1));
        default: return dist_t(random_wf(depth - 1));
        }
    }

    std::string term(const TypePtr& t, int depth) {
        std::vector<std::function<std::string()>> options;
        for (const auto& [name, vt] : ctx_)
            if (type_eq(vt, t)) options.push_back([name = name] { return name; });
        if (depth > 0) {
            options.push_back([&] { return "ifz " + paren(term(nat_t(), depth - 1)) + " then " + paren(term(t, depth - 1)) +
                                           " else " + paren(term(t, depth - 1)); });
            options.push_back([&] {
                TypePtr a = random_type(1);
                return paren(term(arrow_t(a, t), depth - 1)) + " " + paren(term(a, depth - 1));
            });
            options.push_back([&] {
                TypePtr b = random_type(1);
                return "fst " + paren(term(prod_t(t, b), depth - 1));
            });
            options.push_back([&] { return "fix " + paren(lambda(t, t, depth - 1)); });
        }
        switch (t->kind) {
        case Type::Kind::Nat:
            options.push_back([] { return std::string("O"); });
            if (depth > 0) {
                options.push_back([&] { return "succ " + paren(term(nat_t(), depth - 1)); });
                options.push_back([&] { return "pred " + paren(term(nat_t(), depth - 1)); });
                options.push_back([&] { return "lt " + paren(term(real_t(), depth - 1)) + " " + paren(term(real_t(), depth - 1)); });
            }
            break;
        case Type::Kind::Real:
            options.push_back([&] { return std::to_string(pick(9)) + "." + std::to_string(pick(100)); });
            options.push_back([] { return std::string("pi"); });
            if (depth > 0) {
                for (const char* op : {"add", "sub", "mul", "div"})
                    options.push_back([&, op] {
                        return std::string(op) + " " + paren(term(real_t(), depth - 1)) + " " + paren(term(real_t(), depth - 1));
                    });
                // exp is left out: nested towers of it are correct but needlessly slow.
                for (const char* op : {"neg", "sqrt", "log"})
                    options.push_back([&, op] { return std::string(op) + " " + paren(term(real_t(), depth - 1)); });
            }
            break;
        case Type::Kind::Arrow: options.push_back([&] { return lambda(t->a, t->b, depth); }); break;
        case Type::Kind::Prod:
            options.push_back([&] { return "(" + term(t->a, depth - 1) + ", " + term(t->b, depth - 1) + ")"; });
            break;
        case Type::Kind::Dist:
            options.push_back([&] { return "return " + paren(term(t->a, depth - 1)); });
            if (type_eq(t->a, real_t()))
                for (const char* d : {"stdUniform", "stdNormal", "cantor", "botSampBot", "botSamp"})
                    options.push_back([d] { return std::string(d); });
            if (type_eq(t->a, nat_t()))
                for (const char* d : {"stdBernoulli", "stdGeometric"}) options.push_back([d] { return std::string(d); });
            if (depth > 0)
                options.push_back([&] {
                    TypePtr a = random_wf(1);
                    std::string x = fresh();
                    std::string m1 = term(dist_t(a), depth - 1);
                    ctx_.emplace_back(x, a);
                    std::string m2 = term(t, depth - 1);
                    ctx_.pop_back();
                    return "let " + x + " <- " + paren(m1) + " in " + paren(m2);
                });
            break;
        }
        return options[pick(static_cast<int>(options.size()))]();
    }

private:
    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    TypePtr random_wf(int depth) {
        switch (pick(depth > 0 ? 3 : 2)) {
        case 0: return nat_t();
        case 1: return real_t();
        default: return prod_t(random_wf(depth - 1), random_wf(depth - 1));
        }
    }

    std::string lambda(const TypePtr& a, const TypePtr& b, int depth) {
        std::string x = fresh();
        ctx_.emplace_back(x, a);
        std::string body = term(b, depth - 1);
        ctx_.pop_back();
        return "\\" + x + " : " + to_string(a) + ". " + body;
    }

    std::string fresh() { return "v" + std::to_string(counter_++); }
    static std::string paren(const std::string& s) { return "(" + s + ")"; }

    std::mt19937_64 rng_;
    std::vector<std::pair<std::string, TypePtr>> ctx_;
    int counter_ = 0;
};

// Forces v as far as its type allows, checking the value shape.
void force(const ValuePtr& v, const TypePtr& t, const BitTape& tape) {
    switch (t->kind) {
    case Type::Kind::Nat: expect<NatV>(v, "a natural").n.value(); return;
    case Type::Kind::Real: expect<RealV>(v, "a real").x.approx(6); return;
    case Type::Kind::Arrow:
        if (!std::holds_alternative<ClosV>(v->v) && !std::holds_alternative<PrimV>(v->v))
            throw StuckTerm(std::string("expected a function, got a ") + kind_name(v), {});
        return;
    case Type::Kind::Prod: {
        const PairV& pr = expect<PairV>(v, "a pair");
        for (const auto& [part, pt] : {std::pair{pr.first, t->a}, std::pair{pr.second, t->b}}) {
            try {
                force(part.get(), pt, tape);
            } catch (const Error&) {
            }
        }
        return;
    }
    case Type::Kind::Dist: force(expect<DistV>(v, "a distribution").sampler.run(tape).get(), t->a, tape); return;
    }
}

} // namespace

TEST(TypeSoundness, RandomWellTypedTermsNeverGetStuck) {
    TermGen gen(20240601);
    int diverged = 0, produced = 0;
    for (int i = 0; i < 1000; ++i) {
        TypePtr want = gen.random_type(2);
        std::string text = gen.term(want, 4);
        TermPtr t;
        TypePtr got;
        ASSERT_NO_THROW({
            t = p(text);
            got = infer(genv(), t);
        }) << text;
        ASSERT_TRUE(type_eq(got, want)) << text << " : " << to_string(got) << " vs " << to_string(want);
        try {
            force(eval(t, genv(), 24), got, BitTape::from_seed(static_cast<std::uint64_t>(i)));
            ++produced;
        } catch (const StuckTerm& e) {
            ADD_FAILURE() << "stuck: " << e.what() << "\n  in " << text;
        } catch (const Error&) {
            ++diverged;
        }
    }
    EXPECT_EQ(produced + diverged, 1000);
    EXPECT_GT(produced, 300);
}
