#pragma once

#include "netsemi/csv.hpp"
#include "netsemi/errors.hpp"
#include "netsemi/network.hpp"
#include "netsemi/oracle.hpp"
#include "netsemi/resolvent.hpp"
#include "netsemi/semigroup.hpp"
#include "netsemi/spec_io.hpp"
#include "netsemi/state.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace netsemi::cli {

enum class Command { Wellposed, Evolve, Resolvent, VerifyOracle, VerifyLaplace, VerifySemigroupLaw, VerifyBoundary };

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

struct RunConfig {
    Command command = Command::Wellposed;
    std::string spec;
    std::string out; ///< empty: standard output
    double t = 0.0;
    double s = 0.0;
    double dx = 0.01;
    double truncate = 10.0;
    std::string lambda = "1";
    double tol = 1e-12;
    std::size_t samples = 50;
    std::optional<double> threshold;
    double band_factor = 1.5;
    std::vector<double> times;
};

/// "RE" or "RE,IM".
inline Complex parse_lambda(const std::string& text)
{
    std::stringstream in(text);
    double re = 0.0;
    double im = 0.0;
    char comma = 0;
    if (!(in >> re)) {
        throw SpecError("cannot parse --lambda '" + text + "' (expected RE or RE,IM)");
    }
    if (in >> comma) {
        if (comma != ',' || !(in >> im)) {
            throw SpecError("cannot parse --lambda '" + text + "' (expected RE or RE,IM)");
        }
        std::string rest;
        if (in >> rest) {
            throw SpecError("cannot parse --lambda '" + text + "' (expected RE or RE,IM)");
        }
    }
    return {re, im};
}

namespace detail {

inline void print_matrix(std::ostream& os, const char* name, const Matrix& a)
{
    os << name << " (" << a.rows() << "x" << a.cols() << "):\n";
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        os << "  [";
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            os << (j ? ", " : "") << format_number(a(i, j));
        }
        os << "]\n";
    }
}

inline void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw SpecError(std::string("--") + name + " must be positive");
    }
}

inline void with_output(const RunConfig& cfg, std::ostream& fallback, const std::function<void(std::ostream&)>& body)
{
    if (cfg.out.empty()) {
        body(fallback);
        return;
    }
    std::ofstream f(cfg.out);
    if (!f) {
        throw SpecError("cannot write '" + cfg.out + "'");
    }
    body(f);
}

inline int run_wellposed(const NetworkFile& file, std::ostream& out)
{
    const WellposednessReport rep = wellposedness(file.boundary);
    const auto& sig = file.signature();
    out << "signature: m=" << sig.m << " q=" << sig.q << " r=" << sig.r << "\n";
    print_matrix(out, "B", file.boundary.entries());
    print_matrix(out, "V0e", rep.v0e);
    print_matrix(out, "V0i", rep.v0i);
    print_matrix(out, "V1i", rep.v1i);
    print_matrix(out, "R0", rep.r0);
    out << "rank " << rep.rank << "/" << rep.required_rank() << " (pivot tolerance 1e-10 relative)\n";
    out << "wellposed=" << (rep.wellposed ? "true" : "false") << "\n";
    return rep.wellposed ? kPass : kFail;
}

inline int run_evolve(const NetworkFile& file, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    if (!(cfg.t >= 0.0)) throw SpecError("--t must be nonnegative");
    require_positive(cfg.dx, "grid-du");
    require_positive(cfg.truncate, "truncate");
    const StateVector& s0 = file.initial_data();
    const Semigroup sg(file.boundary);
    const EdgeGrids grids = uniform_grids(file.signature(), cfg.dx, cfg.truncate);
    const StateVector snap = sg.apply(s0, cfg.t, grids);
    if (s0.approximate()) {
        err << "note: input contains sampled data; output values are approximate\n";
    }
    with_output(cfg, out, [&](std::ostream& os) { write_real_csv(os, sample(snap, grids)); });
    return kPass;
}

inline int run_resolvent(const NetworkFile& file, const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    require_positive(cfg.tol, "tol");
    require_positive(cfg.dx, "grid");
    require_positive(cfg.truncate, "truncate");
    ResolventParams p;
    p.lambda = parse_lambda(cfg.lambda);
    p.tol = cfg.tol;
    const Resolvent res(file.boundary, file.resolvent_data(), p);
    if (res.near_threshold()) {
        err << "warning: ||B11||_inf e^{-Re lambda} = " << format_number(res.neumann_ratio())
            << " is close to 1; Neumann series converges slowly (" << res.neumann_depth() << " terms)\n";
    }
    const auto samples = res.sample(uniform_grids(file.signature(), cfg.dx, cfg.truncate));
    if (samples.approximate) {
        err << "note: input contains sampled data; output values are approximate\n";
    }
    with_output(cfg, out, [&](std::ostream& os) { write_complex_csv(os, samples); });
    return kPass;
}

inline int verdict(std::ostream& out, bool pass)
{
    out << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? kPass : kFail;
}

inline int run_verify_oracle(const NetworkFile& file, const RunConfig& cfg, std::ostream& out)
{
    require_positive(cfg.dx, "dx");
    require_positive(cfg.truncate, "truncate");
    if (!(cfg.t >= 0.0)) throw SpecError("--t must be nonnegative");
    const double threshold = cfg.threshold.value_or(1e-12);
    const std::size_t cells = cells_for_spacing(cfg.dx);
    const auto steps = static_cast<std::size_t>(std::llround(cfg.t * static_cast<double>(cells)));
    if (std::abs(static_cast<double>(steps) / static_cast<double>(cells) - cfg.t) > 1e-9) {
        throw SpecError("--t must be a multiple of --dx");
    }
    const Semigroup sg(file.boundary);
    const double band = cfg.band_factor * cfg.dx;
    const Comparison c = compare_trajectory(sg, file.initial_data(), cfg.dx, steps, cfg.truncate, band);
    out << "upwind oracle: dx=" << format_number(cfg.dx) << " steps=" << steps << " truncate="
        << format_number(cfg.truncate) << " exclusion band=" << format_number(band) << "\n";
    out << "compared nodes=" << c.compared << " excluded=" << c.excluded << "\n";
    out << "max abs error=" << format_number(c.max_abs_err) << " at " << to_string(c.kind) << "[" << c.edge
        << "] x=" << format_number(c.x) << " t=" << format_number(c.t) << "\n";
    out << "threshold=" << format_number(threshold) << "\n";
    return verdict(out, c.max_abs_err <= threshold);
}

inline int run_verify_laplace(const NetworkFile& file, const RunConfig& cfg, std::ostream& out)
{
    require_positive(cfg.tol, "tol");
    require_positive(cfg.truncate, "truncate");
    if (cfg.samples == 0) throw SpecError("--samples must be positive");
    const double threshold = cfg.threshold.value_or(1e-6);
    ResolventParams p;
    p.lambda = parse_lambda(cfg.lambda);
    p.tol = cfg.tol;
    const StateVector& s0 = file.initial_data();
    const auto& sig = file.signature();
    EdgeGrids grids;
    grids.u.assign(sig.m, midpoint_samples(1.0, cfg.samples));
    grids.v.assign(sig.q, midpoint_samples(cfg.truncate, cfg.samples));
    grids.w.assign(sig.r, midpoint_samples(cfg.truncate, cfg.samples));

    const auto lap = laplace_of_semigroup(s0, file.boundary, p, grids);
    const auto res = resolvent_apply(s0, file.boundary, p, grids);
    out << "laplace vs resolvent: lambda=" << format_number(p.lambda.real()) << "," << format_number(p.lambda.imag())
        << " tol=" << format_number(p.tol) << " samples/edge=" << cfg.samples << "\n";
    bool pass = true;
    for (auto k : kAllKinds) {
        if (lap.of(k).empty()) continue;
        const Deviation d = deviation(lap.of(k), res.of(k));
        out << to_string(k) << ": max=" << format_number(d.max_abs) << " mean=" << format_number(d.mean_abs)
            << " max_rel=" << format_number(d.max_rel) << "\n";
        pass = pass && d.max_abs <= threshold;
    }
    out << "threshold=" << format_number(threshold) << " (max abs deviation per component)\n";
    return verdict(out, pass);
}

inline int run_verify_semigroup_law(const NetworkFile& file, const RunConfig& cfg, std::ostream& out)
{
    if (!(cfg.s >= 0.0) || !(cfg.t >= 0.0)) throw SpecError("--s and --t must be nonnegative");
    require_positive(cfg.dx, "dx");
    require_positive(cfg.truncate, "truncate");
    const double threshold = cfg.threshold.value_or(1e-9);
    const StateVector& s0 = file.initial_data();
    const Semigroup sg(file.boundary);
    const StateVector mid = sg.lift(s0, cfg.s);
    const double total = cfg.s + cfg.t;
    const double band = cfg.band_factor * cfg.dx;
    const EdgeGrids grids = uniform_grids(file.signature(), cfg.dx, cfg.truncate);
    double worst = 0.0;
    std::size_t compared = 0;
    for (auto k : kAllKinds) {
        const auto& gs = grids.of(k);
        if (gs.empty()) continue;
        for (double x : gs.front()) {
            if (k != EdgeKind::Incoming && characteristic_distance(x, total) <= band) continue;
            const Vector a = sg.eval(k, mid, x, cfg.t);
            const Vector b = sg.eval(k, s0, x, total);
            worst = std::max(worst, magnitude(Vector(a - b)));
            ++compared;
        }
    }
    out << "semigroup law T(t)T(s) = T(s+t): s=" << format_number(cfg.s) << " t=" << format_number(cfg.t)
        << " nodes=" << compared << " exclusion band=" << format_number(band) << "\n";
    out << "max abs error=" << format_number(worst) << "\nthreshold=" << format_number(threshold) << "\n";
    return verdict(out, worst <= threshold);
}

inline int run_verify_boundary(const NetworkFile& file, const RunConfig& cfg, std::ostream& out)
{
    const double threshold = cfg.threshold.value_or(1e-10);
    std::vector<double> times = cfg.times;
    if (times.empty()) times.push_back(cfg.t);
    const Semigroup sg(file.boundary);
    double worst = 0.0;
    for (double t : times) {
        if (!(t > 0.0)) throw SpecError("--t must be positive for the boundary check");
        const double v = boundary_violation(sg, file.initial_data(), t);
        out << "t=" << format_number(t) << " violation=" << format_number(v) << "\n";
        worst = std::max(worst, v);
    }
    out << "threshold=" << format_number(threshold) << "\n";
    return verdict(out, worst <= threshold);
}

} // namespace detail

/// Executes one command. Library errors are reported on `err` with exit code 2.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    try {
        const NetworkFile file = load_network_spec(cfg.spec);
        switch (cfg.command) {
        case Command::Wellposed: return detail::run_wellposed(file, out);
        case Command::Evolve: return detail::run_evolve(file, cfg, out, err);
        case Command::Resolvent: return detail::run_resolvent(file, cfg, out, err);
        case Command::VerifyOracle: return detail::run_verify_oracle(file, cfg, out);
        case Command::VerifyLaplace: return detail::run_verify_laplace(file, cfg, out);
        case Command::VerifySemigroupLaw: return detail::run_verify_semigroup_law(file, cfg, out);
        case Command::VerifyBoundary: return detail::run_verify_boundary(file, cfg, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

/// Parses argv into a RunConfig and runs it.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Transport semigroups on networks with bounded and unbounded edges", "netsemi"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto spec_option = [&](CLI::App* sub) {
        sub->add_option("--spec", cfg.spec, "network spec file (JSON)")->required();
    };

    auto* wellposed = app.add_subcommand("wellposed", "assemble B and check the rank condition");
    spec_option(wellposed);

    auto* evolve = app.add_subcommand("evolve", "sample T(t) applied to the initial data");
    spec_option(evolve);
    evolve->add_option("--t", cfg.t, "time")->required();
    evolve->add_option("--grid-du", cfg.dx, "sample spacing on every edge")->capture_default_str();
    evolve->add_option("--truncate", cfg.truncate, "half-line truncation length L")->capture_default_str();
    evolve->add_option("--out", cfg.out, "CSV output file (default: stdout)");

    auto* resolvent = app.add_subcommand("resolvent", "sample R(lambda, A) applied to the data");
    spec_option(resolvent);
    resolvent->add_option("--lambda", cfg.lambda, "RE or RE,IM")->required();
    resolvent->add_option("--tol", cfg.tol, "series/quadrature tolerance")->capture_default_str();
    resolvent->add_option("--grid", cfg.dx, "sample spacing on every edge")->capture_default_str();
    resolvent->add_option("--truncate", cfg.truncate, "half-line truncation length L")->capture_default_str();
    resolvent->add_option("--out", cfg.out, "CSV output file (default: stdout)");

    auto* verify = app.add_subcommand("verify", "run a verification check");
    verify->require_subcommand(1);

    auto* oracle = verify->add_subcommand("oracle", "compare the explicit formula with the CFL=1 upwind scheme");
    spec_option(oracle);
    oracle->add_option("--dx", cfg.dx, "grid spacing, must be 1/M")->capture_default_str();
    oracle->add_option("--t", cfg.t, "final time (multiple of dx)")->required();
    oracle->add_option("--truncate", cfg.truncate, "half-line truncation length L")->capture_default_str();
    oracle->add_option("--threshold", cfg.threshold, "max abs error allowed (default 1e-12)");
    oracle->add_option("--band-factor", cfg.band_factor, "characteristic exclusion band in units of dx")->capture_default_str();

    auto* laplace = verify->add_subcommand("laplace", "compare the Laplace transform of T with the resolvent");
    spec_option(laplace);
    laplace->add_option("--lambda", cfg.lambda, "RE or RE,IM")->required();
    laplace->add_option("--tol", cfg.tol, "series/quadrature tolerance")->capture_default_str();
    laplace->add_option("--samples", cfg.samples, "sample points per edge")->capture_default_str();
    laplace->add_option("--truncate", cfg.truncate, "half-line sampling length L")->capture_default_str();
    laplace->add_option("--threshold", cfg.threshold, "max abs deviation allowed (default 1e-6)");

    auto* law = verify->add_subcommand("semigroup-law", "check T(t)T(s) = T(s+t) off characteristics");
    spec_option(law);
    law->add_option("--s", cfg.s, "first time")->required();
    law->add_option("--t", cfg.t, "second time")->required();
    law->add_option("--dx", cfg.dx, "sample spacing")->capture_default_str();
    law->add_option("--truncate", cfg.truncate, "half-line sampling length L")->capture_default_str();
    law->add_option("--threshold", cfg.threshold, "max abs error allowed (default 1e-9)");
    law->add_option("--band-factor", cfg.band_factor, "characteristic exclusion band in units of dx")->capture_default_str();

    auto* boundary = verify->add_subcommand("boundary", "check the vertex condition on the explicit solution");
    spec_option(boundary);
    boundary->add_option("--t", cfg.times, "time(s), repeatable")->required();
    boundary->add_option("--threshold", cfg.threshold, "max violation allowed (default 1e-10)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return kPass;
    } catch (const CLI::CallForAllHelp& e) {
        app.exit(e, out, err);
        return kPass;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    if (wellposed->parsed()) cfg.command = Command::Wellposed;
    else if (evolve->parsed()) cfg.command = Command::Evolve;
    else if (resolvent->parsed()) cfg.command = Command::Resolvent;
    else if (oracle->parsed()) cfg.command = Command::VerifyOracle;
    else if (laplace->parsed()) cfg.command = Command::VerifyLaplace;
    else if (law->parsed()) cfg.command = Command::VerifySemigroupLaw;
    else if (boundary->parsed()) cfg.command = Command::VerifyBoundary;
    return run(cfg, out, err);
}

} // namespace netsemi::cli
