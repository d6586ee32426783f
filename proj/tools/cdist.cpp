#include <CLI11.hpp>

#include "cdist/cli.hpp"

namespace {

void add_source(CLI::App* cmd, cdist::cli::RunConfig& c, bool allow_dist = true) {
    cmd->add_option("file", c.path, "λCD program file (.lcd)");
    cmd->add_option("--program,-e", c.program, "inline λCD program text");
    if (allow_dist) cmd->add_option("--dist", c.dist, "a registered primitive distribution");
}

void add_common(CLI::App* cmd, cdist::cli::RunConfig& c) {
    cmd->add_option("--fuel", c.fuel, "fix unrollings and comparison refinements (default: $CDIST_DEFAULT_FUEL or 64)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--pretty", c.pretty, "human-readable table instead of JSON lines");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact computable distributions: sampling, certified measures and conditioning for λCD programs"};
    app.require_subcommand(1);
    cdist::cli::RunConfig c;

    auto* tc = app.add_subcommand("typecheck", "print the type of a program");
    tc->add_option("file", c.path, "λCD program file (.lcd)");
    tc->add_option("--program,-e", c.program, "inline λCD program text");
    add_common(tc, c);

    auto* sample = app.add_subcommand("sample", "draw samples, one JSON record per seed");
    add_source(sample, c);
    sample->add_option("--n", c.count, "number of samples (seeds seed..seed+n-1)");
    sample->add_option("--precision", c.precision, "render reals as approx(precision)");
    sample->add_option("--seed", c.seed, "first seed");
    add_common(sample, c);

    auto* measure = app.add_subcommand("measure", "certified bounds on the probability of an open set");
    add_source(measure, c);
    measure->add_option("--set", c.set, "open set, e.g. '(0,1/2)', '{1,2}', '(0,1) x {0}'")->required();
    measure->add_option("--prefix-bits,-k", c.prefix_bits, "enumerate all 2^k tape prefixes (k <= 24)");
    measure->add_option("--precision", c.precision, "enclosure precision n");
    measure->add_option("--mc", c.mc_samples, "Monte Carlo with this many seeded samples instead of enumeration")
        ->check(CLI::PositiveNumber);
    measure->add_option("--seed", c.seed, "first Monte Carlo seed");
    measure->add_option("--delta", c.delta, "Hoeffding confidence parameter");
    add_common(measure, c);

    auto* cond = app.add_subcommand("condition", "condition a prior on an observation");
    cond->add_option("--prior", c.path, "prior program file (.lcd)");
    cond->add_option("--prior-program", c.program, "inline prior program text");
    cond->add_option("--prior-dist", c.dist, "a registered primitive distribution as prior");
    cond->add_option("--density", c.density, "gaussian-noise(s), laplace-noise(b) or constant[(c)]")->required();
    cond->add_option("--observe", c.observe, "observed value (decimal or p/q)")->required();
    cond->add_option("--query-set", c.query_set, "certified posterior bounds for this open set");
    cond->add_option("--posterior-samples", c.posterior_samples, "draw this many posterior samples by rejection");
    cond->add_option("--prefix-bits,-k", c.prefix_bits, "prior prefixes enumerated for --query-set");
    cond->add_option("--precision", c.precision, "enclosure precision n");
    cond->add_option("--seed", c.seed, "first seed for posterior samples");
    add_common(cond, c);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : cdist::cli::StaticError;
    }
    c.command = app.get_subcommands().front()->get_name();
    return cdist::cli::run(c);
}
