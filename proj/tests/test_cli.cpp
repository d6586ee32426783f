#include <cstdlib>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cdist/cli.hpp"

using namespace cdist;
using nlohmann::json;

namespace {

struct Outcome {
    int code;
    std::vector<json> records;
    std::string text;
    std::string err;
};

Outcome invoke(const cli::RunConfig& c) {
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(c, out, err);
    o.text = out.str();
    o.err = err.str();
    if (!c.pretty) {
        std::istringstream lines(o.text);
        for (std::string line; std::getline(lines, line);)
            if (!line.empty()) o.records.push_back(json::parse(line));
    }
    return o;
}

cli::RunConfig config(const std::string& command) {
    cli::RunConfig c;
    c.command = command;
    return c;
}

std::string program(const std::string& name) { return std::string(CDIST_PROGRAMS_DIR) + "/" + name; }

} // namespace

// --------------------------------------------------------------- typecheck

TEST(CliTypecheck, ReportsTypeOrStaticError) {
    auto c = config("typecheck");
    c.program = "return O";
    Outcome ok = invoke(c);
    EXPECT_EQ(ok.code, cli::Ok);
    EXPECT_EQ(ok.records.at(0)["type"], "dist nat");

    c.program = "let x <- stdUniform in return (\\y:real. y)";
    Outcome bad = invoke(c);
    EXPECT_EQ(bad.code, cli::StaticError);
    EXPECT_EQ(bad.records.at(0)["error"], "IllFormedDistType");

    c.program = "let x <-\n  in x";
    Outcome parse = invoke(c);
    EXPECT_EQ(parse.code, cli::StaticError);
    EXPECT_EQ(parse.records.at(0)["error"], "ParseError");
    EXPECT_EQ(parse.records.at(0)["line"], 2);
    EXPECT_EQ(parse.records.at(0)["column"], 3);
}

TEST(CliTypecheck, FilesAndPrettyOutput) {
    auto c = config("typecheck");
    c.path = program("geometric.lcd");
    c.pretty = true;
    Outcome o = invoke(c);
    EXPECT_EQ(o.code, cli::Ok);
    EXPECT_EQ(o.text, "dist nat\n");
    c.path = program("does_not_exist.lcd");
    EXPECT_EQ(invoke(c).code, cli::StaticError);
}

TEST(CliTypecheck, ExactlyOneSource) {
    auto c = config("typecheck");
    EXPECT_EQ(invoke(c).code, cli::StaticError);
    c.program = "return O";
    c.dist = "stdUniform";
    EXPECT_EQ(invoke(c).code, cli::StaticError);
}

// ------------------------------------------------------------------ sample

TEST(CliSample, DeterministicPerSeed) {
    auto c = config("sample");
    c.dist = "stdUniform";
    c.seed = 7;
    Outcome a = invoke(c), b = invoke(c);
    EXPECT_EQ(a.code, cli::Ok);
    EXPECT_EQ(a.text, b.text);
    ASSERT_EQ(a.records.size(), 1u);
    const json& r = a.records[0];
    for (const char* key : {"value", "radius", "bits_read", "diverged", "seed", "precision"})
        EXPECT_TRUE(r.contains(key)) << key;
    EXPECT_EQ(r["seed"], 7);
    EXPECT_EQ(r["radius"], "1/512");
    EXPECT_FALSE(r["diverged"].get<bool>());
}

TEST(CliSample, CountAndDivergenceAsData) {
    auto c = config("sample");
    c.dist = "botSamp";
    c.count = 3;
    Outcome o = invoke(c);
    EXPECT_EQ(o.code, cli::Ok);
    ASSERT_EQ(o.records.size(), 3u);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_TRUE(o.records[i]["diverged"].get<bool>());
        EXPECT_EQ(o.records[i]["seed"], i);
        EXPECT_TRUE(o.records[i]["value"].is_null());
    }
}

TEST(CliSample, ProgramsAndTypeRequirement) {
    auto c = config("sample");
    c.program = "return 0.25";
    Outcome o = invoke(c);
    EXPECT_EQ(o.records.at(0)["value"], "1/4");
    EXPECT_EQ(o.records.at(0)["radius"], "0/1");
    EXPECT_EQ(o.records.at(0)["bits_read"], 0);
    c.program = "succ O";
    Outcome wrong = invoke(c);
    EXPECT_EQ(wrong.code, cli::StaticError);
    EXPECT_EQ(wrong.records.at(0)["error"], "TypeError");
}

TEST(CliSample, DefaultFuelFromEnvironment) {
    auto c = config("sample");
    c.program = "return (fix (\\n:nat. succ n))";
    // The value forces one succ per fix unrolling; the fuel decides where it stops.
    ::setenv("CDIST_DEFAULT_FUEL", "5", 1);
    Outcome o = invoke(c);
    ::unsetenv("CDIST_DEFAULT_FUEL");
    EXPECT_EQ(o.records.at(0)["reason"], "fuel");
    EXPECT_EQ(cli::resolve_fuel(std::nullopt), 64u);
    EXPECT_EQ(cli::resolve_fuel(9u), 9u);
    ::setenv("CDIST_DEFAULT_FUEL", "abc", 1);
    EXPECT_THROW(cli::resolve_fuel(std::nullopt), std::invalid_argument);
    ::setenv("CDIST_DEFAULT_FUEL", "12", 1);
    EXPECT_EQ(cli::resolve_fuel(std::nullopt), 12u);
    EXPECT_EQ(cli::resolve_fuel(3u), 3u);
    ::unsetenv("CDIST_DEFAULT_FUEL");
}

// ----------------------------------------------------------------- measure

TEST(CliMeasure, Examples) {
    auto c = config("measure");
    c.dist = "stdUniform";
    c.set = "(0,1/2)";
    c.prefix_bits = 12;
    c.precision = 10;
    Outcome u = invoke(c);
    ASSERT_EQ(u.code, cli::Ok);
    Rational lo = Rational::parse(u.records[0]["lower"].get<std::string>());
    Rational hi = Rational::parse(u.records[0]["upper"].get<std::string>());
    EXPECT_LE(lo, Rational(Integer(1), Integer(2)));
    EXPECT_GE(hi, Rational(Integer(1), Integer(2)));
    EXPECT_LE(hi - lo, Rational(Integer(1), Integer(10)));
    EXPECT_EQ(u.records[0]["mode"], "enumeration");

    c.dist = "stdGeometric";
    c.set = "{1}";
    c.prefix_bits = 8;
    Outcome g = invoke(c);
    EXPECT_EQ(g.records.at(0)["lower"], "1/2");
    EXPECT_EQ(g.records.at(0)["upper"], "1/2");

    c.set = "{}";
    Outcome e = invoke(c);
    EXPECT_EQ(e.records.at(0)["lower"], "0/1");
    EXPECT_EQ(e.records.at(0)["upper"], "0/1");
}

TEST(CliMeasure, LambdaProgramAndMonteCarlo) {
    auto c = config("measure");
    c.path = program("geometric.lcd");
    c.set = "{2}";
    c.prefix_bits = 10;
    Outcome g = invoke(c);
    EXPECT_EQ(g.records.at(0)["lower"], "1/4");
    EXPECT_EQ(g.records.at(0)["upper"], "1/4");

    c.path.clear();
    c.dist = "stdUniform";
    c.set = "(0,1/2)";
    c.mc_samples = 2000;
    c.seed = 3;
    Outcome mc = invoke(c);
    EXPECT_EQ(mc.records.at(0)["mode"], "monte-carlo");
    EXPECT_EQ(mc.records.at(0)["samples"], 2000);
    EXPECT_EQ(mc.text, invoke(c).text);
}

TEST(CliMeasure, SetErrorsAreStatic) {
    auto c = config("measure");
    c.dist = "stdUniform";
    c.set = "(0,1) x (0,1)";
    Outcome dim = invoke(c);
    EXPECT_EQ(dim.code, cli::StaticError);
    c.set = "(1,0)";
    EXPECT_EQ(invoke(c).code, cli::StaticError);
    c.set = "(0,1)";
    c.prefix_bits = 30;
    EXPECT_EQ(invoke(c).code, cli::StaticError);
}

TEST(CliMeasure, PrettyTable) {
    auto c = config("measure");
    c.dist = "stdUniform";
    c.set = "(0,1)";
    c.prefix_bits = 4;
    c.pretty = true;
    Outcome o = invoke(c);
    EXPECT_EQ(o.code, cli::Ok);
    EXPECT_NE(o.text.find("lower"), std::string::npos);
    EXPECT_NE(o.text.find("straddle"), std::string::npos);
}

// --------------------------------------------------------------- condition

TEST(CliCondition, ConstantDensityMatchesPrior) {
    auto c = config("condition");
    c.dist = "stdUniform";
    c.density = "constant";
    c.observe = "0";
    c.query_set = "(0,1/2)";
    c.prefix_bits = 10;
    Outcome post = invoke(c);
    ASSERT_EQ(post.code, cli::Ok);
    auto m = config("measure");
    m.dist = "stdUniform";
    m.set = "(0,1/2)";
    m.prefix_bits = 10;
    Outcome prior = invoke(m);
    EXPECT_EQ(post.records[0]["lower"], prior.records[0]["lower"]);
    EXPECT_EQ(post.records[0]["upper"], prior.records[0]["upper"]);
}

TEST(CliCondition, GaussianBracketsHalf) {
    auto c = config("condition");
    c.dist = "stdUniform";
    c.density = "gaussian-noise(1)";
    c.observe = "0.5";
    c.query_set = "(0,1/2)";
    c.prefix_bits = 10;
    Outcome o = invoke(c);
    ASSERT_EQ(o.code, cli::Ok);
    Rational lo = Rational::parse(o.records[0]["lower"].get<std::string>());
    Rational hi = Rational::parse(o.records[0]["upper"].get<std::string>());
    EXPECT_LE(lo, Rational(Integer(1), Integer(2)));
    EXPECT_GE(hi, Rational(Integer(1), Integer(2)));
}

TEST(CliCondition, ImpossibleObservationExitsTwo) {
    auto c = config("condition");
    c.dist = "stdUniform";
    c.density = "gaussian-noise(0.01)";
    c.observe = "1000";
    c.query_set = "(0,1/2)";
    c.prefix_bits = 8;
    Outcome o = invoke(c);
    EXPECT_EQ(o.code, cli::CertificationFailure);
    EXPECT_EQ(o.records.at(0)["error"], "DenominatorIndistinguishableFromZero");
}

TEST(CliCondition, PosteriorSamplesAndUsageErrors) {
    auto c = config("condition");
    c.path = program("uniform_prior.lcd");
    c.density = "gaussian-noise(1)";
    c.observe = "0.5";
    c.posterior_samples = 4;
    Outcome o = invoke(c);
    ASSERT_EQ(o.code, cli::Ok);
    ASSERT_EQ(o.records.size(), 4u);
    for (const json& r : o.records) EXPECT_FALSE(r["diverged"].get<bool>());

    c.density = "cauchy(1)";
    EXPECT_EQ(invoke(c).code, cli::StaticError);
    c.density = "gaussian-noise(1)";
    c.posterior_samples.reset();
    EXPECT_EQ(invoke(c).code, cli::StaticError);
}

TEST(Cli, UnknownCommand) {
    Outcome o = invoke(config("plot"));
    EXPECT_EQ(o.code, cli::StaticError);
    EXPECT_NE(o.err.find("unknown command"), std::string::npos);
}
