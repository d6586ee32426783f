#ifndef CDIST_CLI_HPP
#define CDIST_CLI_HPP

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cdist/condition.hpp"
#include "cdist/lang/eval.hpp"
#include "cdist/lang/parser.hpp"
#include "cdist/lang/typecheck.hpp"
#include "cdist/measure.hpp"

namespace cdist::cli {

enum Exit : int { Ok = 0, StaticError = 1, CertificationFailure = 2 };

struct RunConfig {
    std::string command;
    // Exactly one program source: a file, inline text, or a registered distribution.
    std::string path;
    std::string program;
    std::string dist;

    std::uint64_t seed = 0;
    std::uint64_t count = 1;
    unsigned precision = 10;
    std::optional<unsigned> fuel;
    unsigned prefix_bits = 10;
    std::optional<std::uint64_t> mc_samples;
    double delta = 0.01;
    std::string set;
    bool pretty = false;

    std::string density;
    std::string observe;
    std::string query_set;
    std::optional<std::uint64_t> posterior_samples;
};

// Explicit --fuel, else CDIST_DEFAULT_FUEL, else 64.
inline unsigned resolve_fuel(const std::optional<unsigned>& explicit_fuel) {
    if (explicit_fuel) return *explicit_fuel;
    if (const char* env = std::getenv("CDIST_DEFAULT_FUEL")) {
        char* end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v < (1ul << 31)) return static_cast<unsigned>(v);
        throw std::invalid_argument(std::string("CDIST_DEFAULT_FUEL is not a positive integer: '") + env + "'");
    }
    return 64;
}

namespace detail {

struct Loaded {
    lang::TermPtr term;
    lang::TypePtr type;
    std::shared_ptr<const lang::GlobalEnv> genv;
};

inline std::string source_text(const RunConfig& c) {
    int given = !c.path.empty() + !c.program.empty() + !c.dist.empty();
    if (given != 1) throw std::invalid_argument("give exactly one of a program file, --program or --dist");
    if (!c.program.empty()) return c.program;
    if (!c.dist.empty()) return c.dist;
    std::ifstream in(c.path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read '" + c.path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline Loaded load(const RunConfig& c, unsigned fuel) {
    auto genv = std::make_shared<const lang::GlobalEnv>(lang::default_global_env(fuel));
    if (!c.dist.empty() && !genv->dist(c.dist)) throw std::invalid_argument("unknown distribution '" + c.dist + "'");
    lang::TermPtr t = lang::parse(source_text(c), genv->names());
    lang::TypePtr ty = lang::infer(*genv, t);
    return {t, ty, genv};
}

inline Loaded load_dist(const RunConfig& c, unsigned fuel) {
    Loaded l = load(c, fuel);
    if (l.type->kind != lang::Type::Kind::Dist)
        throw lang::TypeError("program", "expected a program of type dist T, found " + lang::to_string(l.type), l.term->loc);
    return l;
}

inline std::size_t coordinate_count(const lang::TypePtr& t) {
    if (t->kind == lang::Type::Kind::Prod) return coordinate_count(t->a) + coordinate_count(t->b);
    return 1;
}

inline OpenSet load_set(const std::string& text, const lang::TypePtr& payload) {
    if (text.empty()) throw std::invalid_argument("an open set is required (--set)");
    OpenSet u = OpenSet::parse(text);
    if (u.kind() != OpenSet::Kind::Empty && u.dim() != coordinate_count(payload))
        throw std::invalid_argument("set '" + text + "' has dimension " + std::to_string(u.dim()) +
                                    " but samples of " + lang::to_string(payload) + " have " +
                                    std::to_string(coordinate_count(payload)) + " coordinates");
    return u;
}

inline nlohmann::json error_record(const std::string& kind, const std::string& message) {
    return {{"ok", false}, {"error", kind}, {"message", message}};
}

inline void print_bounds_table(std::ostream& out, const MeasureBounds& b) {
    out << std::left << std::setw(14) << "lower" << b.lower.to_string() << "  (" << b.lower.to_double() << ")\n"
        << std::setw(14) << "upper" << b.upper.to_string() << "  (" << b.upper.to_double() << ")\n"
        << std::setw(14) << "width" << b.width().to_double() << "\n"
        << std::setw(14) << "samples" << b.samples << "\n"
        << std::setw(14) << "inside" << b.inside << "\n"
        << std::setw(14) << "outside" << b.outside << "\n"
        << std::setw(14) << "straddle" << b.straddle << "\n"
        << std::setw(14) << "failed" << b.failed << "\n";
}

inline void print_sample(std::ostream& out, const RunConfig& c, std::uint64_t seed, const lang::SampleReport& r) {
    if (!c.pretty) {
        nlohmann::json j = lang::to_json(r);
        j["seed"] = seed;
        j["precision"] = c.precision;
        out << j.dump() << "\n";
        return;
    }
    out << std::left << std::setw(12) << seed;
    if (r.diverged)
        out << std::setw(28) << ("diverged (" + r.reason + ")");
    else
        out << std::setw(28) << (r.value.is_string() ? r.value.get<std::string>() : r.value.dump());
    out << std::setw(12) << (r.diverged ? "-" : r.radius.to_string()) << r.bits_read << "\n";
}

inline void print_sample_header(std::ostream& out, const RunConfig& c) {
    if (c.pretty)
        out << std::left << std::setw(12) << "seed" << std::setw(28) << "value" << std::setw(12) << "radius"
            << "bits_read\n";
}

// Runs body and maps exceptions to exit codes: static problems 1,
// certification and runtime failures 2.
template <class Body>
int guarded(const RunConfig& c, std::ostream& out, std::ostream& err, Body body) {
    auto report = [&](const std::string& kind, const std::string& msg, int code) {
        if (c.pretty)
            err << msg << "\n";
        else
            out << error_record(kind, msg).dump() << "\n";
        return code;
    };
    try {
        return body();
    } catch (const lang::LangError& e) {
        nlohmann::json j = error_record(e.kind(), e.what());
        if (e.loc().line > 0) {
            j["line"] = e.loc().line;
            j["column"] = e.loc().col;
        }
        if (c.pretty)
            err << e.what() << "\n";
        else
            out << j.dump() << "\n";
        return StaticError;
    } catch (const DenominatorIndistinguishableFromZero& e) {
        return report("DenominatorIndistinguishableFromZero", e.what(), CertificationFailure);
    } catch (const Error& e) {
        return report("RuntimeError", e.what(), CertificationFailure);
    } catch (const std::invalid_argument& e) {
        return report("UsageError", e.what(), StaticError);
    } catch (const std::domain_error& e) {
        return report("UsageError", e.what(), StaticError);
    }
}

} // namespace detail

inline int cmd_typecheck(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(c, out, err, [&] {
        detail::Loaded l = detail::load(c, resolve_fuel(c.fuel));
        if (c.pretty)
            out << lang::to_string(l.type) << "\n";
        else
            out << nlohmann::json{{"ok", true}, {"type", lang::to_string(l.type)}}.dump() << "\n";
        return Ok;
    });
}

// One record per seed seed, seed+1, ..., seed+count-1.
inline int cmd_sample(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(c, out, err, [&] {
        unsigned fuel = resolve_fuel(c.fuel);
        detail::Loaded l = detail::load_dist(c, fuel);
        Sampler<lang::Thunk> s = lang::program_sampler(l.term, l.genv, fuel);
        detail::print_sample_header(out, c);
        for (std::uint64_t i = 0; i < c.count; ++i) {
            std::uint64_t seed = c.seed + i;
            detail::print_sample(out, c, seed, lang::run_sampler(s, BitTape::from_seed(seed), c.precision));
        }
        return Ok;
    });
}

inline int cmd_measure(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(c, out, err, [&] {
        unsigned fuel = resolve_fuel(c.fuel);
        detail::Loaded l = detail::load_dist(c, fuel);
        OpenSet u = detail::load_set(c.set, l.type->a);
        Sampler<lang::Thunk> s = lang::program_sampler(l.term, l.genv, fuel);
        MeasureBounds b = c.mc_samples ? measure_mc(s, u, *c.mc_samples, c.seed, c.precision, c.delta)
                                       : measure_bounds(s, u, c.prefix_bits, c.precision);
        if (c.pretty) {
            detail::print_bounds_table(out, b);
        } else {
            nlohmann::json j = to_json(b);
            j["ok"] = true;
            j["set"] = u.to_string();
            j["mode"] = c.mc_samples ? "monte-carlo" : "enumeration";
            if (c.mc_samples) {
                j["seed"] = c.seed;
                j["delta"] = c.delta;
            }
            out << j.dump() << "\n";
        }
        return Ok;
    });
}

// --query-set gives certified posterior bounds by enumeration;
// --posterior-samples draws from the rejection realizer.
inline int cmd_condition(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return detail::guarded(c, out, err, [&] {
        unsigned fuel = resolve_fuel(c.fuel);
        detail::Loaded l = detail::load_dist(c, fuel);
        if (c.density.empty()) throw std::invalid_argument("a density is required (--density)");
        if (c.observe.empty()) throw std::invalid_argument("an observation is required (--observe)");
        if (c.query_set.empty() && !c.posterior_samples)
            throw std::invalid_argument("give --query-set and/or --posterior-samples");
        BndDens d = parse_density(c.density);
        Rational y = Rational::parse(c.observe);
        Sampler<lang::Thunk> prior = lang::program_sampler(l.term, l.genv, fuel);
        if (!c.query_set.empty()) {
            OpenSet b = detail::load_set(c.query_set, l.type->a);
            PosteriorBounds p = posterior_bounds(prior, d, y, b, c.prefix_bits, c.precision);
            if (c.pretty) {
                detail::print_bounds_table(out, p.bounds);
            } else {
                nlohmann::json j = to_json(p);
                j["ok"] = true;
                j["density"] = d.name;
                j["observe"] = y.to_string();
                j["set"] = b.to_string();
                out << j.dump() << "\n";
            }
        }
        if (c.posterior_samples) {
            Sampler<lang::Thunk> post = obs_dens(prior, d, y, fuel);
            detail::print_sample_header(out, c);
            for (std::uint64_t i = 0; i < *c.posterior_samples; ++i) {
                std::uint64_t seed = c.seed + i;
                detail::print_sample(out, c, seed, lang::run_sampler(post, BitTape::from_seed(seed), c.precision));
            }
        }
        return Ok;
    });
}

inline int run(const RunConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (c.command == "typecheck") return cmd_typecheck(c, out, err);
    if (c.command == "sample") return cmd_sample(c, out, err);
    if (c.command == "measure") return cmd_measure(c, out, err);
    if (c.command == "condition") return cmd_condition(c, out, err);
    err << "unknown command '" << c.command << "'\n";
    return StaticError;
}

} // namespace cdist::cli

#endif
