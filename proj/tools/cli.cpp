/*
 * Copyright 2026 The dualmink Authors.
 * This file is licensed to you under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License. You may obtain a copy
 * of the License at http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software distributed under
 * the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
 * OF ANY KIND, either express or implied. See the License for the specific language
 * governing permissions and limitations under the License.
 */
#include "cli.hpp"

#include <dualmink/errors.hpp>
#include <dualmink/io.hpp>
#include <dualmink/measures.hpp>
#include <dualmink/parallel.hpp>
#include <dualmink/solver.hpp>
#include <dualmink/verify.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace dualmink::cli {

namespace {

void emit(const Json& doc, const std::string& out)
{
    if (out.empty()) {
        std::cout << doc.dump(2) << '\n';
    } else {
        write_json_file(out, doc);
    }
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError(path + ": cannot open for writing");
    os << text;
    if (!os) throw ConfigError(path + ": write failed");
}

Json provenance(const Json& config, const Json& seed)
{
    return {{"config_hash", config_hash(config)}, {"seed", seed}, {"config", config}};
}

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------------------
// Shared solver flags

struct SolverFlags
{
    std::string config;
    std::optional<double> tau;
    std::optional<double> tol;
    std::optional<int> max_iter;
    std::optional<std::string> scheme;
    std::optional<std::string> init;
    std::optional<std::uint64_t> seed;
    std::optional<double> radius;

    void add(CLI::App* app, bool with_seed = true)
    {
        app->add_option("--solver-config", config, "Solver configuration file")->check(CLI::ExistingFile);
        app->add_option("--tau", tau, "Step damping in (0, 1]");
        app->add_option("--tol", tol, "Residual tolerance");
        app->add_option("--max-iter", max_iter, "Iteration cap");
        app->add_option("--scheme", scheme, "newton or multiplicative")
            ->check(CLI::IsMember({"newton", "multiplicative"}));
        app->add_option("--init", init, "ball or random")->check(CLI::IsMember({"ball", "random"}));
        if (with_seed) app->add_option("--seed", seed, "Seed of random starts");
        app->add_option("--radius", radius, "Initial ball radius");
    }

    SolverConfig resolve() const
    {
        SolverConfig c;
        if (!config.empty()) {
            c = with_diagnostics(config, [](const Json& d) { return SolverConfig::from_json(d); });
        }
        if (tau) c.tau = *tau;
        if (tol) c.tol_residual = *tol;
        if (max_iter) c.max_iter = *max_iter;
        if (scheme) c.scheme = *scheme == "newton" ? SolverConfig::Scheme::Newton : SolverConfig::Scheme::Multiplicative;
        if (init) c.init.kind = *init == "ball" ? InitSpec::Kind::Ball : InitSpec::Kind::Random;
        if (seed) c.init.seed = *seed;
        if (radius) c.init.radius = *radius;
        c.validate();
        return c;
    }
};

// ---------------------------------------------------------------------------------------
// measure

struct MeasureArgs
{
    std::string body;
    double p = 0.0;
    double q = 3.0;
    std::string region = "full";
    std::string kind = "lp";
    int level = 4;
    std::string out;
    std::string tsv;
};

int run_measure(const MeasureArgs& a)
{
    const Json body_doc = read_json_file(a.body);
    const auto body = load_body(a.body);
    const auto region = RegionSpec::parse(a.region);
    const auto grid = measure_grid(body, build_geodesic_grid(a.level));

    Json config = {{"command", "measure"}, {"body_hash", config_hash(body_doc)}, {"p", a.p},          {"q", a.q},
                   {"region", a.region},   {"kind", a.kind},  {"level", grid->level()}};
    Json doc = {{"command", "measure"}, {"provenance", provenance(config, nullptr)}};
    doc["kind"] = a.kind;
    doc["p"] = a.p;
    doc["q"] = a.q;
    doc["region"] = region.to_json();
    doc["level"] = grid->level();

    if (a.kind == "density") {
        const auto d = lp_dual_density(body, a.p, a.q, grid);
        doc["lambda"] = d.lambda;
        doc["min"] = d.f.min();
        doc["max"] = d.f.max();
        doc["field"] = field_to_json(d.f);
        if (!a.tsv.empty()) {
            std::ostringstream os;
            os << "# config_hash=" << config_hash(config) << '\n' << "x\ty\tz\tf\n";
            for (std::size_t i = 0; i < d.f.size(); ++i) {
                const Vec3& v = grid->node(i);
                os << Json(v.x()).dump() << '\t' << Json(v.y()).dump() << '\t' << Json(v.z()).dump() << '\t'
                   << Json(d.f[i]).dump() << '\n';
            }
            write_text(a.tsv, os.str());
        }
    } else {
        double value = 0.0;
        if (a.kind == "lp") {
            value = lp_dual_curvature(body, a.p, a.q, region, grid);
        } else if (a.kind == "radial") {
            value = dual_curvature_radial(body, a.q, region, grid);
        } else if (a.kind == "boundary") {
            value = dual_curvature_boundary(body, a.q, region, grid);
        } else if (a.kind == "surface") {
            value = surface_area_measure(body, grid)(region);
        } else {
            value = cone_volume_measure(body, grid)(region);
        }
        doc["value"] = value;
        if (region.is_full()) doc["total"] = value;
    }
    emit(doc, a.out);
    return kOk;
}

// ---------------------------------------------------------------------------------------
// solve

struct SolveArgs
{
    std::string f;
    std::optional<double> f_const;
    double p = 0.0;
    double q = 3.0;
    std::optional<int> level;
    SolverFlags solver;
    std::string out;
    std::string report;
};

int run_solve(const SolveArgs& a)
{
    const auto config = a.solver.resolve();
    ScalarField f = [&] {
        if (a.f_const) return ScalarField::constant(build_geodesic_grid(a.level.value_or(config.level)), *a.f_const);
        auto field = load_field(a.f);
        if (a.level && *a.level != field.grid().level()) {
            throw ConfigError(a.f + ": /level: field level " + std::to_string(field.grid().level()) +
                              " does not match --level " + std::to_string(*a.level));
        }
        return field;
    }();

    Json cfg = {{"command", "solve"}, {"f_hash", config_hash(field_to_json(f))}, {"p", a.p}, {"q", a.q}, {"solver", config.to_json()}};
    const Json prov = provenance(cfg, config.init.seed);
    const auto rep = solve(f, a.p, a.q, config);

    Json full = rep.to_json();
    full["provenance"] = prov;
    if (!a.report.empty()) write_json_file(a.report, full);
    if (!a.out.empty()) {
        Json body = full["solution"];
        body["provenance"] = {{"config_hash", prov["config_hash"]}, {"seed", prov["seed"]}};
        write_json_file(a.out, body);
    }
    Json summary = {{"command", "solve"},
                    {"provenance", {{"config_hash", prov["config_hash"]}, {"seed", prov["seed"]}}},
                    {"status", full["status"]},
                    {"iterations", full["iterations"]},
                    {"final_residual", full["final_residual"]},
                    {"lambda", full["lambda"]},
                    {"message", full["message"]}};
    if (!rep.converged()) {
        std::cerr << "solve: " << to_string(rep.status) << (rep.message.empty() ? "" : ": " + rep.message) << '\n';
    }
    if (a.out.empty() && a.report.empty()) {
        emit(full, "");
    } else {
        emit(summary, "");
    }
    switch (rep.status) {
    case SolveStatus::Converged:
        return kOk;
    case SolveStatus::MaxIter:
        return kSuiteFailure;
    case SolveStatus::Degenerate:
        return kDegenerate;
    }
    return kDegenerate;
}

// ---------------------------------------------------------------------------------------
// verify and probe

struct ReportArgs
{
    std::string out;
    std::string tsv;
};

int finish_report(const EstimateReport& rep, const ReportArgs& a)
{
    emit(rep.to_json(), a.out);
    if (!a.tsv.empty()) write_text(a.tsv, rep.to_tsv());
    std::cerr << rep.suite << ": " << to_string(rep.verdict.status) << '\n';
    for (const auto& n : rep.verdict.notes) std::cerr << "  " << n << '\n';
    return rep.verdict.status == VerdictStatus::Fail ? kSuiteFailure : kOk;
}

struct SuiteArgs
{
    std::string config;
    std::string family;
    std::optional<double> p;
    std::optional<double> q;
    std::optional<double> lambda_cap;
    std::optional<int> level;
    std::optional<std::uint64_t> seed;
    std::optional<int> count;
    std::optional<double> h_max;
    std::optional<double> volume_min;
    std::optional<double> c_ratio;
    std::optional<double> ratio_floor;
    std::optional<double> baseline_tol;
    std::string baseline_dir;
    bool no_baseline = false;
    bool update_baseline = false;
    bool require_baseline = false;
    SolverFlags solver;
    ReportArgs report;

    void add(CLI::App* app)
    {
        app->add_option("--config", config, "Suite configuration file")->check(CLI::ExistingFile);
        app->add_option("--family", family, "Family specification file")->check(CLI::ExistingFile);
        app->add_option("--p", p, "Exponent p");
        app->add_option("--q", q, "Exponent q");
        app->add_option("--lambda-cap", lambda_cap, "Retain bodies with lambda <= cap");
        app->add_option("--level", level, "Grid level");
        app->add_option("--seed", seed, "Family seed");
        app->add_option("--count", count, "Family size");
        app->add_option("--h-max", h_max, "c0 bound on sup h");
        app->add_option("--volume-min", volume_min, "c0 bound on volume");
        app->add_option("--c-ratio", c_ratio, "basic-estimate bound on the ratio spread");
        app->add_option("--ratio-floor", ratio_floor, "proposition floor on r1/r3");
        app->add_option("--baseline-tol", baseline_tol, "Relative baseline tolerance");
        app->add_option("--baseline-dir", baseline_dir, "Baseline directory (default: DUALMINK_BASELINE_DIR)");
        app->add_flag("--no-baseline", no_baseline, "Skip the baseline comparison");
        app->add_flag("--update-baseline", update_baseline, "Overwrite the stored baseline");
        app->add_flag("--require-baseline", require_baseline, "Fail when no baseline is stored");
        app->add_option("--out", report.out, "Report file (JSON); stdout when omitted");
        app->add_option("--tsv", report.tsv, "Tabular export");
        solver.add(app, false);
    }

    SuiteConfig resolve() const
    {
        SuiteConfig c;
        if (!config.empty()) c = with_diagnostics(config, [](const Json& d) { return SuiteConfig::from_json(d); });
        if (!family.empty()) c.family = with_diagnostics(family, [](const Json& d) { return FamilySpec::from_json(d); });
        if (p) c.p = *p;
        if (q) c.q = *q;
        if (lambda_cap) c.lambda_cap = *lambda_cap;
        if (level) c.family.level = *level;
        if (seed) c.family.seed = *seed;
        if (count) c.family.count = *count;
        if (h_max) c.h_max = *h_max;
        if (volume_min) c.volume_min = *volume_min;
        if (c_ratio) c.c_ratio = *c_ratio;
        if (ratio_floor) c.ratio_floor = *ratio_floor;
        if (baseline_tol) c.baseline_tol = *baseline_tol;
        const bool solver_flags = !solver.config.empty() || solver.tau || solver.tol || solver.max_iter ||
                                  solver.scheme || solver.init || solver.radius;
        if (solver_flags) c.solver = solver.resolve();
        c.validate();
        return c;
    }
};

int run_suite(const std::string& name, const SuiteArgs& a)
{
    const auto config = a.resolve();
    const EstimateReport rep = name == "c0"               ? c0_suite(config)
                               : name == "basic-estimate" ? basic_estimate_suite(config)
                                                          : proposition_suite(config);
    int code = finish_report(rep, a.report);

    const auto dir = a.baseline_dir.empty() ? baseline_dir({}) : std::filesystem::path(a.baseline_dir);
    if (a.no_baseline || dir.empty() || rep.baseline_metrics().empty()) return code;
    if (a.update_baseline) {
        write_baseline(rep, dir);
        std::cerr << "baseline written: " << baseline_path(rep, dir).string() << '\n';
        return code;
    }
    const auto check = check_baseline(rep, dir, config.baseline_tol);
    if (!check.found && a.require_baseline) {
        std::cerr << "baseline missing: " << check.path.string() << '\n';
        code = kSuiteFailure;
    } else if (!check.found) {
        write_baseline(rep, dir);
        std::cerr << "baseline established: " << check.path.string() << '\n';
    } else if (check.ok) {
        std::cerr << "baseline " << check.message << '\n';
    } else {
        std::cerr << "baseline mismatch (" << check.path.string() << "): " << check.message << '\n';
        code = kSuiteFailure;
    }
    return code;
}

struct UniquenessArgs
{
    std::string f;
    double bump = 0.02;
    int level = 4;
    UniquenessConfig config;
    SolverFlags solver;
    ReportArgs report;
};

int run_uniqueness(UniquenessArgs a)
{
    auto f = a.f.empty() ? bump_density(build_geodesic_grid(a.level), a.bump) : load_field(a.f);
    a.config.solver = a.solver.resolve();
    return finish_report(uniqueness_probe(f, a.config), a.report);
}

struct DegenerationArgs
{
    DegenerationConfig config;
    std::string schedule;
    ReportArgs report;
};

int run_degeneration(DegenerationArgs a)
{
    if (!a.schedule.empty()) {
        a.config.schedule.clear();
        for (const auto& item : split(a.schedule, ',')) {
            try {
                a.config.schedule.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError("--schedule: '" + item + "' is not a number");
            }
        }
    }
    return finish_report(degeneration_probe(a.config), a.report);
}

// ---------------------------------------------------------------------------------------
// john

struct JohnArgs
{
    std::string body;
    double tol = 1e-3;
    std::string out;
};

int run_john(const JohnArgs& a)
{
    const Json body_doc = read_json_file(a.body);
    const auto body = load_body(a.body);
    JohnOptions opts;
    opts.tol = a.tol;
    const auto e = john_ellipsoid(body, opts);
    const auto c = john_containment(body, e);
    Json axes = Json::array();
    for (int k = 0; k < 3; ++k) axes.push_back({e.axes(0, k), e.axes(1, k), e.axes(2, k)});
    const Json config = {{"command", "john"}, {"body_hash", config_hash(body_doc)}, {"tol", a.tol}};
    emit({{"command", "john"},
          {"provenance", provenance(config, nullptr)},
          {"center", {e.center.x(), e.center.y(), e.center.z()}},
          {"half_axes", {e.half_axes[0], e.half_axes[1], e.half_axes[2]}},
          {"axes", axes},
          {"volume", e.volume()},
          {"containment", {{"inner_excess", c.inner_excess}, {"outer_excess", c.outer_excess}}}},
         a.out);
    return kOk;
}

} // namespace

int run(int argc, char** argv)
{
    CLI::App app{"L_p dual curvature measures, the dual Minkowski solver, and estimate suites", "dualmink"};
    app.require_subcommand(1);
    app.fallthrough();
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    unsigned threads = 0;
    app.add_option("--threads", threads, "Cap on worker threads (0: hardware default)");
    std::function<int()> action;

    MeasureArgs measure;
    auto* m = app.add_subcommand("measure", "Evaluate a measure of a body over a region");
    m->add_option("--body", measure.body, "Body specification file")->required()->check(CLI::ExistingFile);
    m->add_option("--p", measure.p, "Exponent p");
    m->add_option("--q", measure.q, "Exponent q");
    m->add_option("--region", measure.region, "full, hemisphere:x,y,z or cap:x,y,z,angle, joined with +");
    m->add_option("--kind", measure.kind, "lp, radial, boundary, surface, cone or density")
        ->check(CLI::IsMember({"lp", "radial", "boundary", "surface", "cone", "density"}));
    m->add_option("--level", measure.level, "Grid level for ellipsoids");
    m->add_option("--out", measure.out, "Output file (JSON); stdout when omitted");
    m->add_option("--tsv", measure.tsv, "Nodal density table (kind density)");
    m->callback([&] { action = [&] { return run_measure(measure); }; });

    SolveArgs solve_args;
    auto* s = app.add_subcommand("solve", "Solve for a support function with prescribed density");
    auto* f_opt = s->add_option("--f", solve_args.f, "Density field file")->check(CLI::ExistingFile);
    auto* c_opt = s->add_option("--f-const", solve_args.f_const, "Constant density");
    f_opt->excludes(c_opt);
    s->add_option("--p", solve_args.p, "Exponent p");
    s->add_option("--q", solve_args.q, "Exponent q");
    s->add_option("--level", solve_args.level, "Grid level (must match the field)");
    s->add_option("--out", solve_args.out, "Solution body file (support_grid)");
    s->add_option("--report", solve_args.report, "Full solve report");
    solve_args.solver.add(s);
    s->callback([&] {
        if (solve_args.f.empty() && !solve_args.f_const) throw CLI::RequiredError("--f or --f-const");
        action = [&] { return run_solve(solve_args); };
    });

    std::string suite_name;
    SuiteArgs suite;
    auto* v = app.add_subcommand("verify", "Run an estimate suite");
    v->add_option("suite", suite_name, "c0, basic-estimate or proposition")
        ->required()
        ->check(CLI::IsMember({"c0", "basic-estimate", "proposition"}));
    suite.add(v);
    v->callback([&] { action = [&] { return run_suite(suite_name, suite); }; });

    JohnArgs john;
    auto* j = app.add_subcommand("john", "John ellipsoid of a body");
    j->add_option("--body", john.body, "Body specification file")->required()->check(CLI::ExistingFile);
    j->add_option("--tol", john.tol, "Relative volume tolerance");
    j->add_option("--out", john.out, "Output file (JSON); stdout when omitted");
    j->callback([&] { action = [&] { return run_john(john); }; });

    auto* pr = app.add_subcommand("probe", "Uniqueness and degeneration probes");
    pr->require_subcommand(1);

    UniquenessArgs uniq;
    auto* pu = pr->add_subcommand("uniqueness", "Multi-start solves near the isotropic data");
    pu->add_option("--f", uniq.f, "Density field file (default: the bump density)")->check(CLI::ExistingFile);
    pu->add_option("--bump", uniq.bump, "Bump amplitude of the default density");
    pu->add_option("--level", uniq.level, "Grid level of the default density");
    pu->add_option("--p", uniq.config.p, "Exponent p");
    pu->add_option("--q", uniq.config.q, "Exponent q");
    pu->add_option("--starts", uniq.config.n_starts, "Number of seeded starts");
    pu->add_option("--seed", uniq.config.seed, "Seed of the first start");
    pu->add_option("--epsilon", uniq.config.epsilon, "Bound on sup |f - 1|");
    pu->add_option("--delta", uniq.config.delta, "Bound on |q - 3|");
    pu->add_option("--agree-tol", uniq.config.agree_tol, "Agreement threshold");
    pu->add_option("--out", uniq.report.out, "Report file (JSON); stdout when omitted");
    pu->add_option("--tsv", uniq.report.tsv, "Tabular export");
    uniq.solver.add(pu, false);
    pu->callback([&] { action = [&] { return run_uniqueness(uniq); }; });

    DegenerationArgs degen;
    auto* pd = pr->add_subcommand("degeneration", "Flattening ellipsoid schedule (observational)");
    pd->add_option("--p", degen.config.p, "Exponent p");
    pd->add_option("--q", degen.config.q, "Exponent q");
    pd->add_option("--schedule", degen.schedule, "Comma-separated thicknesses");
    pd->add_option("--level", degen.config.level, "Grid level");
    pd->add_flag("--allow-unsupported", degen.config.allow_unsupported, "Admit p outside [0, 1)");
    pd->add_option("--out", degen.report.out, "Report file (JSON); stdout when omitted");
    pd->add_option("--tsv", degen.report.tsv, "Tabular export");
    pd->callback([&] { action = [&] { return run_degeneration(degen); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        set_max_threads(threads);
        return action();
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDegenerate;
    } catch (const AmbiguityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDegenerate;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidBodyError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDegenerate;
    }
}

} // namespace dualmink::cli
