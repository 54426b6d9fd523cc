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
#include <dualmink/verify.hpp>

#include <dualmink/errors.hpp>
#include <dualmink/measures.hpp>
#include <dualmink/parallel.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

namespace dualmink {

namespace {

constexpr double kCanaryTol = 1e-6;
constexpr double kJohnTol = 1e-6;

const char* family_name(FamilySpec::Kind k)
{
    switch (k) {
    case FamilySpec::Kind::Balls:
        return "balls";
    case FamilySpec::Kind::Ellipsoids:
        return "ellipsoids";
    case FamilySpec::Kind::PerturbedBalls:
        return "perturbed_balls";
    case FamilySpec::Kind::Solver:
        return "solver";
    }
    return "unknown";
}

int json_int(const Json& doc, const char* key, int fallback)
{
    if (!doc.contains(key)) return fallback;
    if (!doc[key].is_number_integer()) throw DocumentError(std::string("/") + key, "expected an integer");
    return doc[key].get<int>();
}

double json_opt(const Json& doc, const char* key, double fallback)
{
    return doc.contains(key) ? json_number(doc, std::string("/") + key) : fallback;
}

void reject_unknown(const Json& doc, std::initializer_list<const char*> known)
{
    for (const auto& [key, value] : doc.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; })) {
            throw DocumentError("/" + key, "unknown option");
        }
    }
}

template <typename Fn>
auto nested(const std::string& prefix, Fn&& fn)
{
    try {
        return fn();
    } catch (const DocumentError& e) {
        const std::string msg = e.what();
        throw DocumentError(prefix + e.pointer(), e.pointer().empty() ? msg : msg.substr(e.pointer().size() + 2));
    }
}

Mat3 random_rotation(std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::Quaterniond quat(g(rng), g(rng), g(rng), g(rng));
    quat.normalize();
    return quat.toRotationMatrix();
}

std::string member_id(const char* prefix, std::size_t k)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s-%02zu", prefix, k);
    return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

/// Closed-form expectations for a ball of radius r.
std::vector<std::string> canary_failures(const Json& row, double r, double p, double q)
{
    const double f = std::pow(r, q - p);
    const std::pair<const char*, double> expect[] = {
        {"lambda", std::max(f, 1.0 / f)},
        {"sup_h", r},
        {"volume", 4.0 * std::numbers::pi / 3.0 * r * r * r},
        {"r1", r},
        {"r2", r},
        {"r3", r},
        {"ratio", f},
    };
    std::vector<std::string> bad;
    for (const auto& [key, value] : expect) {
        if (rel_err(row[key].get<double>(), value) > kCanaryTol) {
            bad.push_back(row["id"].get<std::string>() + ": " + key + " deviates from its closed form");
        }
    }
    return bad;
}

struct RowSet
{
    Json rows = Json::array();
    std::vector<std::string> canary_notes;
    std::vector<std::string> john_notes;
    std::vector<const Json*> retained() const
    {
        std::vector<const Json*> out;
        for (const auto& r : rows) {
            if (!r["canary"].get<bool>() && r["retained"].get<bool>()) out.push_back(&r);
        }
        return out;
    }
};

RowSet collect_rows(const SuiteConfig& c)
{
    RowSet set;
    for (double r : {1.0, 1.1}) {
        auto row = estimate_row(member_id("canary-ball", r == 1.0 ? 0 : 1), ConvexBody::ball(r), c.p, c.q,
                                c.lambda_cap, c.family.level);
        row["canary"] = true;
        for (auto& note : canary_failures(row, r, c.p, c.q)) set.canary_notes.push_back(std::move(note));
        set.rows.push_back(std::move(row));
    }
    const auto members = sample_family(c.family, c.p, c.q, c.solver);
    std::vector<Json> rows(members.size());
    parallel_for(
        members.size(),
        [&](std::size_t k) {
            rows[k] = estimate_row(members[k].id, members[k].body, c.p, c.q, c.lambda_cap, c.family.level);
        },
        1);
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (!rows[k]["john_ok"].get<bool>()) {
            set.john_notes.push_back(members[k].id + ": John ellipsoid containment check failed");
        }
        set.rows.push_back(std::move(rows[k]));
    }
    return set;
}

EstimateReport start_report(const std::string& suite, const Json& config)
{
    EstimateReport rep;
    rep.suite = suite;
    rep.config = config;
    rep.config_hash = config_hash(Json{{"suite", suite}, {"config", config}});
    return rep;
}

/// Common verdict logic: canaries and John checks fail the suite; no retained body is inconclusive.
bool preliminary_verdict(EstimateReport& rep, const RowSet& set, std::size_t retained)
{
    for (const auto& n : set.canary_notes) rep.verdict.notes.push_back(n);
    for (const auto& n : set.john_notes) rep.verdict.notes.push_back(n);
    if (!set.canary_notes.empty() || !set.john_notes.empty()) {
        rep.verdict.status = VerdictStatus::Fail;
        return false;
    }
    if (retained == 0) {
        rep.verdict.status = VerdictStatus::Inconclusive;
        rep.verdict.notes.push_back("no body satisfies lambda <= lambda_cap");
        return false;
    }
    return true;
}

void require_supported(double p, double q)
{
    if (!(p >= 0.0 && p < 1.0 && q > 2.0 + p)) throw ConfigError("suites need 0 <= p < 1 and q > 2 + p");
}

std::string tsv_cell(const Json& v)
{
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

} // namespace

// ---------------------------------------------------------------------------------------
// Families and configs

void FamilySpec::validate() const
{
    if (count < 1) throw ConfigError("family count must be at least 1");
    if (level < 1 || level > SphericalGrid::kMaxLevel) throw ConfigError("family level must lie in [1, 7]");
    if (kind != Kind::PerturbedBalls && !(lo > 0.0 && hi >= lo)) {
        throw ConfigError("family range must be positive and nonempty");
    }
    if (!(amplitude >= 0.0)) throw ConfigError("family amplitude must be non-negative");
}

Json FamilySpec::to_json() const
{
    Json doc;
    doc["kind"] = family_name(kind);
    if (kind != Kind::PerturbedBalls) doc["range"] = {lo, hi};
    if (kind == Kind::PerturbedBalls) doc["amplitude"] = amplitude;
    doc["count"] = count;
    doc["seed"] = seed;
    doc["level"] = level;
    return doc;
}

FamilySpec FamilySpec::from_json(const Json& doc)
{
    if (!doc.is_object()) throw DocumentError("", "family must be an object");
    reject_unknown(doc, {"type", "kind", "range", "amplitude", "count", "seed", "level"});
    FamilySpec f;
    if (!doc.contains("kind") || !doc["kind"].is_string()) throw DocumentError("/kind", "expected a family kind");
    const auto kind = doc["kind"].get<std::string>();
    if (kind == "balls") {
        f.kind = Kind::Balls;
    } else if (kind == "ellipsoids") {
        f.kind = Kind::Ellipsoids;
    } else if (kind == "perturbed_balls") {
        f.kind = Kind::PerturbedBalls;
    } else if (kind == "solver") {
        f.kind = Kind::Solver;
    } else {
        throw DocumentError("/kind", "expected balls, ellipsoids, perturbed_balls or solver");
    }
    if (doc.contains("range")) {
        const auto& r = doc["range"];
        if (!r.is_array() || r.size() != 2) throw DocumentError("/range", "expected [lo, hi]");
        f.lo = json_number(doc, "/range/0");
        f.hi = json_number(doc, "/range/1");
    }
    f.amplitude = json_opt(doc, "amplitude", f.amplitude);
    f.count = json_int(doc, "count", f.count);
    f.level = json_int(doc, "level", f.level);
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw DocumentError("/seed", "expected a non-negative integer");
        f.seed = doc["seed"].get<std::uint64_t>();
    }
    if (f.count < 1) throw DocumentError("/count", "family count must be at least 1");
    if (f.level < 1 || f.level > SphericalGrid::kMaxLevel) throw DocumentError("/level", "level must lie in [1, 7]");
    if (f.kind != Kind::PerturbedBalls && !(f.lo > 0.0 && f.hi >= f.lo)) {
        throw DocumentError("/range", "range must be positive and nonempty");
    }
    if (!(f.amplitude >= 0.0)) throw DocumentError("/amplitude", "amplitude must be non-negative");
    return f;
}

std::vector<SampledBody> sample_family(const FamilySpec& family, double p, double q, const SolverConfig& solver)
{
    family.validate();
    std::vector<SampledBody> out;
    const auto n = static_cast<std::size_t>(family.count);
    switch (family.kind) {
    case FamilySpec::Kind::Balls:
        for (std::size_t k = 0; k < n; ++k) {
            const double t = n == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(n - 1);
            out.push_back({member_id("ball", k), ConvexBody::ball(family.lo + t * (family.hi - family.lo))});
        }
        break;
    case FamilySpec::Kind::Ellipsoids: {
        std::mt19937_64 rng(family.seed);
        std::uniform_real_distribution<double> axis(family.lo, family.hi);
        for (std::size_t k = 0; k < n; ++k) {
            Vec3 r;
            for (int i = 0; i < 3; ++i) r[i] = axis(rng);
            const Mat3 rot = random_rotation(rng);
            out.push_back({member_id("ellipsoid", k), ConvexBody::ellipsoid(r, Vec3::Zero(), rot)});
        }
        break;
    }
    case FamilySpec::Kind::PerturbedBalls: {
        const auto grid = build_geodesic_grid(family.level);
        std::vector<std::optional<ConvexBody>> bodies(n);
        parallel_for(
            n,
            [&](std::size_t k) {
                const auto poly = random_smooth_field(grid, family.seed + k);
                std::vector<double> u(poly.size());
                for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::exp(family.amplitude * poly[i]);
                bodies[k] = ConvexBody::support_grid(convexify(ScalarField(grid, u)));
            },
            1);
        for (std::size_t k = 0; k < n; ++k) out.push_back({member_id("perturbed", k), std::move(*bodies[k])});
        break;
    }
    case FamilySpec::Kind::Solver: {
        const auto grid = build_geodesic_grid(family.level);
        const double mid = 0.5 * (std::log(family.lo) + std::log(family.hi));
        const double half = 0.5 * (std::log(family.hi) - std::log(family.lo));
        std::vector<std::optional<ConvexBody>> bodies(n);
        std::vector<std::string> failures(n);
        parallel_for(
            n,
            [&](std::size_t k) {
                const auto poly = random_smooth_field(grid, family.seed + k);
                std::vector<double> f(poly.size());
                for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(mid + half * poly[i]);
                const auto rep = solve(ScalarField(grid, f), p, q, solver);
                if (rep.converged()) {
                    bodies[k] = ConvexBody::support_grid(rep.u);
                } else {
                    failures[k] = to_string(rep.status) + (rep.message.empty() ? "" : ": " + rep.message);
                }
            },
            1);
        for (std::size_t k = 0; k < n; ++k) {
            if (!bodies[k]) {
                throw DegeneracyError("solver family member " + std::to_string(k) + " did not converge (" +
                                      failures[k] + ")");
            }
            out.push_back({member_id("solved", k), std::move(*bodies[k])});
        }
        break;
    }
    }
    return out;
}

void SuiteConfig::validate() const
{
    family.validate();
    solver.validate();
    if (!(lambda_cap > 1.0)) throw ConfigError("lambda_cap must exceed 1");
    if (!(h_max > 0.0) || !(volume_min > 0.0)) throw ConfigError("c0 bounds must be positive");
    if (!(c_ratio >= 0.0)) throw ConfigError("c_ratio must be non-negative");
    if (!(ratio_floor > 0.0)) throw ConfigError("ratio_floor must be positive");
    if (!(baseline_tol > 0.0)) throw ConfigError("baseline_tol must be positive");
}

Json SuiteConfig::to_json() const
{
    Json doc;
    doc["family"] = family.to_json();
    doc["p"] = p;
    doc["q"] = q;
    doc["lambda_cap"] = lambda_cap;
    doc["h_max"] = h_max;
    doc["volume_min"] = volume_min;
    doc["c_ratio"] = c_ratio;
    doc["ratio_floor"] = ratio_floor;
    doc["baseline_tol"] = baseline_tol;
    doc["solver"] = solver.to_json();
    return doc;
}

SuiteConfig SuiteConfig::from_json(const Json& doc)
{
    if (!doc.is_object()) throw DocumentError("", "suite config must be an object");
    reject_unknown(doc, {"family", "p", "q", "lambda_cap", "h_max", "volume_min", "c_ratio", "ratio_floor",
                         "baseline_tol", "solver"});
    SuiteConfig c;
    if (doc.contains("family")) c.family = nested("/family", [&] { return FamilySpec::from_json(doc["family"]); });
    if (doc.contains("solver")) c.solver = nested("/solver", [&] { return SolverConfig::from_json(doc["solver"]); });
    c.p = json_opt(doc, "p", c.p);
    c.q = json_opt(doc, "q", c.q);
    c.lambda_cap = json_opt(doc, "lambda_cap", c.lambda_cap);
    c.h_max = json_opt(doc, "h_max", c.h_max);
    c.volume_min = json_opt(doc, "volume_min", c.volume_min);
    c.c_ratio = json_opt(doc, "c_ratio", c.c_ratio);
    c.ratio_floor = json_opt(doc, "ratio_floor", c.ratio_floor);
    c.baseline_tol = json_opt(doc, "baseline_tol", c.baseline_tol);
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw DocumentError("", e.what());
    }
    return c;
}

std::string to_string(VerdictStatus s)
{
    switch (s) {
    case VerdictStatus::Pass:
        return "pass";
    case VerdictStatus::Fail:
        return "fail";
    case VerdictStatus::Inconclusive:
        return "inconclusive";
    case VerdictStatus::Observational:
        return "observational";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------------------
// Reports

std::string config_hash(const Json& config)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : config.dump()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Json EstimateReport::to_json() const
{
    Json doc;
    doc["suite"] = suite;
    doc["provenance"] = {{"config_hash", config_hash},
                         {"seed", config.contains("family") ? config["family"]["seed"] : config.value("seed", Json(nullptr))},
                         {"level", config.contains("family") ? config["family"]["level"] : config.value("level", Json(nullptr))},
                         {"config", config}};
    doc["verdict"] = {{"status", to_string(verdict.status)}, {"notes", verdict.notes}};
    doc["summary"] = summary;
    doc["rows"] = rows;
    return doc;
}

std::string EstimateReport::to_tsv() const
{
    std::ostringstream out;
    out << "# suite=" << suite << " config_hash=" << config_hash << " verdict=" << to_string(verdict.status) << '\n';
    if (rows.empty()) return out.str();
    std::vector<std::string> keys;
    for (const auto& [key, value] : rows.front().items()) keys.push_back(key);
    for (std::size_t k = 0; k < keys.size(); ++k) out << (k ? "\t" : "") << keys[k];
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t k = 0; k < keys.size(); ++k) {
            out << (k ? "\t" : "") << (row.contains(keys[k]) ? tsv_cell(row[keys[k]]) : std::string());
        }
        out << '\n';
    }
    return out.str();
}

Json EstimateReport::baseline_metrics() const
{
    Json m = Json::object();
    const char* keys[] = {"max_sup_h", "min_volume", "ratio_min", "ratio_max", "ratio_spread", "min_r1_over_r3"};
    for (const char* k : keys) {
        if (summary.contains(k) && summary[k].is_number()) m[k] = summary[k];
    }
    return m;
}

Json estimate_row(const std::string& id, const ConvexBody& body, double p, double q, double lambda_cap, int level)
{
    const auto grid = measure_grid(body, build_geodesic_grid(level));
    const auto dens = lp_dual_density(body, p, q, grid);
    const auto h = sample_support(body, grid);
    const auto john = john_ellipsoid(body);
    const auto contain = john_containment(body, john);
    const Vec3 r = john.half_axes;
    const double ratio = r.prod() / std::pow(r[2], 3.0 - q + p);

    Json row;
    row["id"] = id;
    row["canary"] = false;
    row["p"] = p;
    row["q"] = q;
    row["lambda"] = dens.lambda;
    row["retained"] = dens.lambda <= lambda_cap;
    row["sup_h"] = h.max();
    row["volume"] = volume(body);
    row["r1"] = r[0];
    row["r2"] = r[1];
    row["r3"] = r[2];
    row["ratio"] = ratio;
    row["r1_over_r3"] = r[0] / r[2];
    row["r3_pow_qp_r1_over_r3"] = std::pow(r[2], q - p) * r[0] / r[2];
    row["john_inner_excess"] = contain.inner_excess;
    row["john_outer_excess"] = contain.outer_excess;
    row["john_ok"] = contain.inner_excess <= kJohnTol && contain.outer_excess <= kJohnTol;
    return row;
}

EstimateReport c0_suite(const SuiteConfig& c)
{
    c.validate();
    require_supported(c.p, c.q);
    auto rep = start_report("c0", c.to_json());
    const auto set = collect_rows(c);
    rep.rows = set.rows;
    const auto kept = set.retained();
    double max_h = 0.0;
    double min_vol = std::numeric_limits<double>::infinity();
    for (const auto* r : kept) {
        max_h = std::max(max_h, (*r)["sup_h"].get<double>());
        min_vol = std::min(min_vol, (*r)["volume"].get<double>());
    }
    rep.summary = {{"bodies", set.rows.size() - 2}, {"retained", kept.size()}};
    if (!kept.empty()) {
        rep.summary["max_sup_h"] = max_h;
        rep.summary["min_volume"] = min_vol;
    }
    rep.summary["h_max"] = c.h_max;
    rep.summary["volume_min"] = c.volume_min;
    if (!preliminary_verdict(rep, set, kept.size())) return rep;
    const bool ok = max_h <= c.h_max && min_vol >= c.volume_min;
    if (max_h > c.h_max) rep.verdict.notes.push_back("sup h exceeds h_max");
    if (min_vol < c.volume_min) rep.verdict.notes.push_back("volume below volume_min");
    rep.verdict.status = ok ? VerdictStatus::Pass : VerdictStatus::Fail;
    return rep;
}

EstimateReport basic_estimate_suite(const SuiteConfig& c)
{
    c.validate();
    require_supported(c.p, c.q);
    auto rep = start_report("basic_estimate", c.to_json());
    const auto set = collect_rows(c);
    rep.rows = set.rows;
    const auto kept = set.retained();
    const double c_ratio = c.c_ratio > 0.0 ? c.c_ratio : c.lambda_cap * c.lambda_cap;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    double cor_min = std::numeric_limits<double>::infinity();
    double r3_min = std::numeric_limits<double>::infinity();
    double r1_max = 0.0;
    for (const auto* r : kept) {
        lo = std::min(lo, (*r)["ratio"].get<double>());
        hi = std::max(hi, (*r)["ratio"].get<double>());
        cor_min = std::min(cor_min, (*r)["r3_pow_qp_r1_over_r3"].get<double>());
        r3_min = std::min(r3_min, (*r)["r3"].get<double>());
        r1_max = std::max(r1_max, (*r)["r1"].get<double>());
    }
    rep.summary = {{"bodies", set.rows.size() - 2}, {"retained", kept.size()}};
    if (!kept.empty()) {
        rep.summary["ratio_min"] = lo;
        rep.summary["ratio_max"] = hi;
        rep.summary["ratio_spread"] = hi / lo;
        rep.summary["min_r3_pow_qp_r1_over_r3"] = cor_min;
        rep.summary["min_r3"] = r3_min;
        rep.summary["max_r1"] = r1_max;
    }
    rep.summary["c_ratio"] = c_ratio;
    if (!preliminary_verdict(rep, set, kept.size())) return rep;
    if (hi / lo > c_ratio) rep.verdict.notes.push_back("ratio spread exceeds c_ratio");
    rep.verdict.status = hi / lo <= c_ratio ? VerdictStatus::Pass : VerdictStatus::Fail;
    return rep;
}

EstimateReport proposition_suite(const SuiteConfig& c)
{
    c.validate();
    require_supported(c.p, c.q);
    auto rep = start_report("proposition", c.to_json());
    const auto set = collect_rows(c);
    rep.rows = set.rows;
    const auto kept = set.retained();
    double lo = std::numeric_limits<double>::infinity();
    Json candidates = Json::array();
    for (const auto* r : kept) {
        const double v = (*r)["r1_over_r3"].get<double>();
        lo = std::min(lo, v);
        if (v < c.ratio_floor) candidates.push_back((*r)["id"]);
    }
    rep.summary = {{"bodies", set.rows.size() - 2}, {"retained", kept.size()}};
    if (!kept.empty()) rep.summary["min_r1_over_r3"] = lo;
    rep.summary["ratio_floor"] = c.ratio_floor;
    rep.summary["counterexample_candidates"] = candidates;
    if (!preliminary_verdict(rep, set, kept.size())) return rep;
    if (!candidates.empty()) rep.verdict.notes.push_back("bodies below ratio_floor need inspection");
    rep.verdict.status = candidates.empty() ? VerdictStatus::Pass : VerdictStatus::Fail;
    return rep;
}

// ---------------------------------------------------------------------------------------
// Probes

Json UniquenessConfig::to_json() const
{
    return {{"p", p},           {"q", q},         {"n_starts", n_starts},   {"seed", seed},
            {"epsilon", epsilon}, {"delta", delta}, {"agree_tol", agree_tol}, {"solver", solver.to_json()}};
}

ScalarField bump_density(GridPtr grid, double amplitude)
{
    return ScalarField::sample(std::move(grid),
                               [&](const Vec3& v) { return 1.0 + amplitude * std::exp(4.0 * (v.z() - 1.0)); });
}

EstimateReport uniqueness_probe(const ScalarField& f, const UniquenessConfig& c)
{
    if (c.n_starts < 1) throw ConfigError("n_starts must be at least 1");
    if (!(c.p >= 0.0 && c.p < 1.0)) throw ConfigError("uniqueness probe needs 0 <= p < 1");
    if (!(std::abs(c.q - 3.0) < c.delta)) throw ConfigError("uniqueness probe needs |q - 3| < delta");
    double dev = 0.0;
    for (double x : f.values()) dev = std::max(dev, std::abs(x - 1.0));
    if (!(dev < c.epsilon)) throw ConfigError("uniqueness probe needs sup |f - 1| < epsilon");

    Json cfg = c.to_json();
    cfg["level"] = f.grid().level();
    cfg["f_hash"] = config_hash(field_to_json(f));
    auto rep = start_report("uniqueness_probe", cfg);

    std::vector<ScalarField> sols;
    std::vector<std::string> failures;
    for (int k = 0; k < c.n_starts; ++k) {
        SolverConfig sc = c.solver;
        sc.init.kind = InitSpec::Kind::Random;
        sc.init.seed = c.seed + static_cast<std::uint64_t>(k);
        const auto r = solve(f, c.p, c.q, sc);
        rep.rows.push_back({{"start", k},
                            {"seed", sc.init.seed},
                            {"status", to_string(r.status)},
                            {"iterations", r.iterations},
                            {"final_residual", r.residual_history.back()},
                            {"lambda", std::isfinite(r.lambda) ? Json(r.lambda) : Json(nullptr)},
                            {"u_min", r.u.min()},
                            {"u_max", r.u.max()}});
        if (r.converged()) {
            sols.push_back(r.u);
        } else {
            failures.push_back("start " + std::to_string(k) + ": " + to_string(r.status));
        }
    }
    double pairwise = 0.0;
    for (std::size_t a = 0; a < sols.size(); ++a) {
        for (std::size_t b = a + 1; b < sols.size(); ++b) {
            for (std::size_t i = 0; i < f.size(); ++i) pairwise = std::max(pairwise, std::abs(sols[a][i] - sols[b][i]));
        }
    }
    rep.summary["converged"] = sols.size();
    rep.summary["pairwise_max"] = pairwise;
    if (!sols.empty()) {
        const auto back = lp_density_of_field(sols.front(), c.p, c.q);
        double worst = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) worst = std::max(worst, std::abs(back[i] / f[i] - 1.0));
        rep.summary["roundtrip_max_rel"] = worst;
    }
    if (!failures.empty()) {
        rep.verdict.status = VerdictStatus::Inconclusive;
        rep.verdict.notes = failures;
    } else if (pairwise <= c.agree_tol) {
        rep.verdict.status = VerdictStatus::Pass;
        rep.verdict.notes.push_back("all starts agree");
    } else {
        rep.verdict.status = VerdictStatus::Fail;
        rep.verdict.notes.push_back("disagreement found");
    }
    return rep;
}

Json DegenerationConfig::to_json() const
{
    return {{"p", p}, {"q", q}, {"schedule", schedule}, {"level", level}, {"allow_unsupported", allow_unsupported}};
}

EstimateReport degeneration_probe(const DegenerationConfig& c)
{
    if (!(c.p >= 0.0 && c.p < 1.0) && !c.allow_unsupported) {
        throw ConfigError("p outside [0, 1) is an unsupported regime; set the explicit flag to probe it");
    }
    if (c.schedule.empty()) throw ConfigError("schedule must not be empty");
    if (c.q == c.p) throw ConfigError("q - p must be nonzero");
    for (double t : c.schedule) {
        if (!(t > 0.0)) throw ConfigError("schedule thicknesses must be positive");
    }
    auto rep = start_report("degeneration_probe", c.to_json());
    const auto grid = build_geodesic_grid(c.level);
    bool increasing = true;
    double prev = -1.0;
    for (std::size_t k = 0; k < c.schedule.size(); ++k) {
        const double t = c.schedule[k];
        const auto body = ConvexBody::ellipsoid(Vec3(1.0, 1.0, t));
        const auto d = lp_dual_density(body, c.p, c.q, grid);
        const double sup = d.f.max();
        const double inf = d.f.min();
        const double vol = volume(body);
        // Dilation s K rescales f by s^(q-p); the best s balances sup and 1/inf.
        const double s = std::pow(sup * inf, -0.5 / (c.q - c.p));
        rep.rows.push_back({{"step", k + 1},
                            {"thickness", t},
                            {"lambda", d.lambda},
                            {"sup_f", sup},
                            {"inf_f", inf},
                            {"volume", vol},
                            {"lambda_star", std::sqrt(sup / inf)},
                            {"dilation", s},
                            {"volume_star", vol * s * s * s}});
        if (k > 0 && !(d.lambda > prev)) increasing = false;
        prev = d.lambda;
    }
    rep.summary["lambda_strictly_increasing"] = increasing;
    rep.summary["final_volume"] = rep.rows.back()["volume"];
    rep.summary["final_lambda"] = rep.rows.back()["lambda"];
    rep.verdict.status = VerdictStatus::Observational;
    if (!(c.p >= 0.0 && c.p < 1.0)) rep.verdict.notes.push_back("unsupported regime: no estimate is claimed");
    return rep;
}

// ---------------------------------------------------------------------------------------
// Baselines

std::filesystem::path baseline_dir(const std::filesystem::path& fallback)
{
    if (const char* env = std::getenv("DUALMINK_BASELINE_DIR"); env && *env) return env;
    return fallback;
}

std::filesystem::path baseline_path(const EstimateReport& report, const std::filesystem::path& dir)
{
    return dir / (report.suite + "-" + report.config_hash + ".json");
}

BaselineCheck check_baseline(const EstimateReport& report, const std::filesystem::path& dir, double tol)
{
    BaselineCheck out;
    out.path = baseline_path(report, dir);
    if (!std::filesystem::exists(out.path)) {
        out.message = "no baseline at " + out.path.string();
        return out;
    }
    out.found = true;
    const Json stored = read_json_file(out.path);
    const Json now = report.baseline_metrics();
    if (!stored.contains("metrics") || !stored["metrics"].is_object()) {
        out.message = out.path.string() + ": missing metrics";
        return out;
    }
    out.ok = true;
    std::ostringstream msg;
    for (const auto& [key, value] : stored["metrics"].items()) {
        if (!now.contains(key)) {
            out.ok = false;
            msg << key << " missing from report; ";
            continue;
        }
        const double a = now[key].get<double>();
        const double b = value.get<double>();
        if (std::abs(a - b) > tol * std::max(std::abs(b), 1e-300)) {
            out.ok = false;
            msg << key << " = " << a << " vs baseline " << b << "; ";
        }
    }
    out.message = out.ok ? "matches " + out.path.string() : msg.str();
    return out;
}

void write_baseline(const EstimateReport& report, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    write_json_file(baseline_path(report, dir),
                    {{"suite", report.suite}, {"config_hash", report.config_hash}, {"metrics", report.baseline_metrics()}});
}

} // namespace dualmink
