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
#pragma once

#include <dualmink/body.hpp>
#include <dualmink/io.hpp>
#include <dualmink/solver.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dualmink {

///
/// A sampled family of bodies.
///
///   balls:           `count` radii evenly spaced over `range` (endpoints included)
///   ellipsoids:      half-axes uniform in `range`, random rotation, centered
///   perturbed_balls: support exp(amplitude * P) with P = random_smooth_field, convexified
///   solver:          bodies solved from f = exp(log-uniform in `range` via P) for the suite's (p, q)
///
struct FamilySpec
{
    enum class Kind { Balls, Ellipsoids, PerturbedBalls, Solver };
    Kind kind = Kind::Ellipsoids;
    double lo = 0.7;
    double hi = 1.4;
    double amplitude = 0.1;
    int count = 8;
    std::uint64_t seed = 1;
    int level = 4;

    void validate() const;
    Json to_json() const;
    static FamilySpec from_json(const Json& doc);
};

struct SampledBody
{
    std::string id;
    ConvexBody body;
};

/// Deterministic members of the family. Solver members need (p, q); a failed solve throws
/// DegeneracyError naming the member.
std::vector<SampledBody> sample_family(const FamilySpec& family, double p, double q,
                                       const SolverConfig& solver = {});

struct SuiteConfig
{
    FamilySpec family;
    double p = 0.0;
    double q = 3.5;
    double lambda_cap = 20.0;
    /// c0: empirical bounds sup h <= h_max and |K| >= volume_min.
    double h_max = 10.0;
    double volume_min = 0.01;
    /// basic estimate: pass when max/min ratio <= c_ratio (0 means lambda_cap^2).
    double c_ratio = 0.0;
    /// proposition: floor on r1 / r3.
    double ratio_floor = 0.05;
    /// Relative tolerance of baseline comparisons.
    double baseline_tol = 0.01;
    /// Solver settings for solver families and probes.
    SolverConfig solver;

    void validate() const;
    Json to_json() const;
    /// Keys: family, p, q, lambda_cap, h_max, volume_min, c_ratio, ratio_floor,
    /// baseline_tol, solver. Missing keys keep their defaults.
    static SuiteConfig from_json(const Json& doc);
};

enum class VerdictStatus { Pass, Fail, Inconclusive, Observational };

std::string to_string(VerdictStatus s);

struct Verdict
{
    VerdictStatus status = VerdictStatus::Inconclusive;
    std::vector<std::string> notes;
};

///
/// Suite output: one row object per body (or per start / schedule step for probes), a
/// summary, a verdict, and the provenance needed to reproduce it.
///
struct EstimateReport
{
    std::string suite;
    Json config;
    std::string config_hash;
    Json rows = Json::array();
    Json summary = Json::object();
    Verdict verdict;

    Json to_json() const;
    /// Tab-separated rows with a header line of the row keys; nested values are inlined as JSON.
    std::string to_tsv() const;
    /// Summary metrics compared against stored baselines.
    Json baseline_metrics() const;
};

/// FNV-1a 64-bit hash of the canonical (compact) JSON text, as 16 hex digits.
std::string config_hash(const Json& config);

/// Per-body quantities shared by the estimate suites.
Json estimate_row(const std::string& id, const ConvexBody& body, double p, double q, double lambda_cap,
                  int level);

EstimateReport c0_suite(const SuiteConfig& config);
EstimateReport basic_estimate_suite(const SuiteConfig& config);
EstimateReport proposition_suite(const SuiteConfig& config);

struct UniquenessConfig
{
    double p = 0.3;
    double q = 3.05;
    int n_starts = 5;
    std::uint64_t seed = 1;
    /// Preconditions: sup |f - 1| < epsilon and |q - 3| < delta.
    double epsilon = 0.1;
    double delta = 0.2;
    /// Agreement threshold on pairwise sup distances.
    double agree_tol = 5e-3;
    SolverConfig solver;

    Json to_json() const;
};

/// Solves from n_starts seeded random starts and compares the solutions.
EstimateReport uniqueness_probe(const ScalarField& f, const UniquenessConfig& config);

/// The probe density 1 + 0.02 exp(4 (<v, e3> - 1)).
ScalarField bump_density(GridPtr grid, double amplitude = 0.02);

struct DegenerationConfig
{
    double p = -2.0;
    double q = 3.0;
    /// Thickness t of the ellipsoid (1, 1, t) at each step.
    std::vector<double> schedule = {1.0, 0.6, 0.35, 0.2, 0.12, 0.07, 0.04, 0.02};
    int level = 4;
    /// Must be set to run with p outside [0, 1).
    bool allow_unsupported = false;

    Json to_json() const;
};

///
/// Observational: lambda of the density and |K| along the flattening schedule, plus the
/// dilation-optimal lambda* = sqrt(sup f / inf f) and the volume of the matching dilate.
///
EstimateReport degeneration_probe(const DegenerationConfig& config);

struct BaselineCheck
{
    bool found = false;
    bool ok = false;
    std::filesystem::path path;
    std::string message;
};

/// Directory from DUALMINK_BASELINE_DIR, else `fallback`.
std::filesystem::path baseline_dir(const std::filesystem::path& fallback);

/// Baseline file name "<suite>-<config hash>.json".
std::filesystem::path baseline_path(const EstimateReport& report, const std::filesystem::path& dir);

/// Compares report metrics with the stored baseline within config.baseline_tol relative.
BaselineCheck check_baseline(const EstimateReport& report, const std::filesystem::path& dir, double tol);

void write_baseline(const EstimateReport& report, const std::filesystem::path& dir);

} // namespace dualmink
