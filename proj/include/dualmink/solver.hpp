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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dualmink {

struct InitSpec
{
    enum class Kind { Ball, Field, Random };
    Kind kind = Kind::Ball;
    /// Ball radius, and the base radius of random starts.
    double radius = 1.0;
    /// Random starts: u = radius * exp(amplitude * P) with P = random_smooth_field(seed).
    std::uint64_t seed = 0;
    double amplitude = 0.2;
    /// Field starts.
    std::optional<ScalarField> field;
};

struct SolverConfig
{
    enum class Scheme { Newton, Multiplicative };

    /// Grid level of generated fields (solve itself runs on the grid of f).
    int level = 4;
    /// Step damping in (0, 1].
    double tau = 1.0;
    /// Convergence threshold on sup |log residual|.
    double tol_residual = 1e-3;
    int max_iter = 2000;
    /// Convexify after this many accepted steps (0 disables periodic convexification).
    int convexify_every = 10;
    InitSpec init;
    double rho_min = 1e-3;
    double tol_convex = 1e-6;
    Scheme scheme = Scheme::Newton;
    /// Step halvings tried before a step is declared degenerate.
    int max_halvings = 5;
    /// Admit p outside [0, 1) or q <= 2 + p.
    bool allow_unsupported = false;

    void validate() const;
    Json to_json() const;
    /// Missing keys keep their defaults; unknown keys are rejected.
    static SolverConfig from_json(const Json& doc);
};

enum class SolveStatus { Converged, MaxIter, Degenerate };

std::string to_string(SolveStatus s);

struct SolveReport
{
    ScalarField u;
    SolveStatus status = SolveStatus::MaxIter;
    /// sup |log residual| of the initial field and after every accepted step.
    std::vector<double> residual_history;
    int iterations = 0;
    /// max(sup F, 1 / inf F) of the density F realized by u.
    double lambda = 1.0;
    std::string message;

    bool converged() const { return status == SolveStatus::Converged; }
    /// Status, history and the solution as a support_grid body document.
    Json to_json() const;
};

///
/// Density (|grad u|^2 + u^2)^((q-3)/2) u^(1-p) det(Hess u + u I) of a nodal field, from the
/// grid fits. DegeneracyError naming the node where it is not positive.
///
ScalarField lp_density_of_field(const ScalarField& u, double p, double q);

/// log(lp_density_of_field(u)) - log(f) per node.
ScalarField residual(const ScalarField& u, const ScalarField& f, double p, double q);

///
/// Node values of the support function of the Wulff shape
/// P = {x : <x, v_j> <= u_j for all nodes j}. The result is <= u and equals u exactly at
/// nodes whose constraint touches P. DegeneracyError when u is not positive.
///
ScalarField convexify(const ScalarField& u);

///
/// Seeded polynomial of degree <= 3 in the coordinates without constant term, scaled to
/// sup |P| = 1 over the grid nodes.
///
ScalarField random_smooth_field(GridPtr grid, std::uint64_t seed);

/// Starting field on `grid` described by `init`.
ScalarField initial_field(const InitSpec& init, GridPtr grid);

///
/// Solves u^(1-p) (|grad u|^2 + u^2)^((q-3)/2) det(Hess u + u I) = f on the grid of f.
///
/// Newton: damped Newton steps on log u with the exact Jacobian of the discrete operator.
/// Multiplicative: u <- u exp(-tau r / (q - p)). In both, a trial step is halved (up to
/// max_halvings times) until the field stays positive with a positive density and sup |r|
/// does not increase; when no trial qualifies the report is degenerate.
///
SolveReport solve(const ScalarField& f, double p, double q, const SolverConfig& config = {});

} // namespace dualmink
