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

#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace dualmink {

///
/// A subset of S^2: the full sphere, a closed cap {v : <v,c> >= cos(angle)}, or a finite
/// union. Hemispheres are caps of angle pi/2.
///
class RegionSpec
{
public:
    static RegionSpec full();
    static RegionSpec cap(const Vec3& center, double angle);
    static RegionSpec hemisphere(const Vec3& center) { return cap(center, 1.5707963267948966); }
    static RegionSpec union_of(std::vector<RegionSpec> parts);

    bool contains(const Vec3& v) const;

    /// Node-wise realization: mask[i] = contains(node i).
    std::vector<char> realize(const SphericalGrid& grid) const;

    /// Quadrature weights restricted to the region; see region_weights.
    std::vector<double> weights(const SphericalGrid& grid) const;

    bool is_full() const;
    Json to_json() const;
    static RegionSpec from_json(const Json& doc);

    ///
    /// Compact text form used on the command line: "full", "hemisphere:x,y,z",
    /// "cap:x,y,z,angle", joined with '+' for unions.
    ///
    static RegionSpec parse(const std::string& text);

private:
    enum class Kind { Full, Cap, Union };
    Kind m_kind = Kind::Full;
    Vec3 m_center = Vec3::UnitZ();
    double m_angle = 0.0;
    double m_cos = -1.0;
    std::vector<RegionSpec> m_parts;
};

///
/// Effective quadrature weights of the set {w : pred(w)}.
///
/// Each grid triangle spreads its area to its corners like the full-sphere weights.
/// Triangles whose corners and centroid all agree on `pred` are taken whole; the others are
/// split recursively (up to `depth` times) and the pieces inside are apportioned by the
/// barycentric coordinates of their centroids, which integrates the piecewise-linear
/// interpolant of a nodal field over the set. With pred always true the result equals
/// grid.weights().
///
std::vector<double> region_weights(const SphericalGrid& grid, const std::function<bool(const Vec3&)>& pred,
                                   int depth = 6);

///
/// A finite measure on S^2: a density against the grid quadrature (mass value_i * w_i at
/// node i) or a finite sum of atoms.
///
class SphericalMeasure
{
public:
    struct Density
    {
        GridPtr grid;
        std::vector<double> values;
    };
    struct Atomic
    {
        std::vector<Vec3> points;
        std::vector<double> masses;
    };

    explicit SphericalMeasure(Density d);
    explicit SphericalMeasure(Atomic a);

    bool is_atomic() const { return std::holds_alternative<Atomic>(m_rep); }
    const Density& density() const { return std::get<Density>(m_rep); }
    const Atomic& atomic() const { return std::get<Atomic>(m_rep); }

    double total() const;
    double operator()(const RegionSpec& region) const;

    double min_value() const;
    double max_value() const;

    /// Rows plus a summary record {total, min, max, lambda}.
    Json to_json() const;

private:
    std::variant<Density, Atomic> m_rep;
};

///
/// Grid used for smooth bodies: a support-grid body always uses its own grid; for
/// ellipsoids `grid` is used, or the level-4 grid when null.
///
GridPtr measure_grid(const ConvexBody& body, GridPtr grid = nullptr);

/// S_K: facet atoms for polytopes, det(Hess h + h I) densities for smooth bodies.
SphericalMeasure surface_area_measure(const ConvexBody& body, GridPtr grid = nullptr);

/// V_K = (1/3) h_K S_K.
SphericalMeasure cone_volume_measure(const ConvexBody& body, GridPtr grid = nullptr);

///
/// Integral of rho_K^q over the directions whose boundary point has a normal in `region`.
/// Polytopes: adaptive quadrature over the radially projected facet triangles.
/// Ellipsoids: per-triangle degree-5 rule with adaptive refinement along the region
/// boundary. Support grids: region_weights of the radial Gauss normal test.
///
double dual_curvature_radial(const ConvexBody& body, double q, const RegionSpec& region, GridPtr grid = nullptr);

///
/// Integral of |x|^(q-3) <x, nu(x)> over the boundary points with normal in `region`.
/// Polytopes: adaptive planar quadrature per facet. Smooth bodies: quadrature of
/// |Dh|^(q-3) h det(Hess h + h I) over the region (closed-form integrand for ellipsoids).
///
double dual_curvature_boundary(const ConvexBody& body, double q, const RegionSpec& region, GridPtr grid = nullptr);

/// As dual_curvature_boundary with <x, nu(x)>^(1-p). p = 0 is the same computation.
double lp_dual_curvature(const ConvexBody& body, double p, double q, const RegionSpec& region,
                         GridPtr grid = nullptr);

struct DensityResult
{
    ScalarField f;
    double lambda = 1.0; // max(sup f, 1 / inf f)
};

///
/// f = (|grad h|^2 + h^2)^((q-3)/2) h^(1-p) det(Hess h + h I) at the grid nodes, for smooth
/// bodies. DegeneracyError (naming the node) when inf f <= 0.
///
DensityResult lp_dual_density(const ConvexBody& body, double p, double q, GridPtr grid = nullptr);

/// lambda of a positive field: max(sup f, 1 / inf f).
double density_lambda(const ScalarField& f);

///
/// (V_{Phi K}(Phi^{-t} region), |det Phi| V_K(region)) for a polytope, both from exact facet
/// data (the image polytope's hull is recomputed).
///
std::pair<double, double> equivariance_pushforward(const ConvexBody& polytope, const Mat3& phi,
                                                   const RegionSpec& region);

// ---------------------------------------------------------------------------------------
// Planar Monge-Ampere measure of piecewise-linear convex functions.

struct AffinePiece
{
    Vec2 gradient;
    double offset = 0.0;
};

/// Convex polygon, vertices in counter-clockwise order.
using Polygon = std::vector<Vec2>;

bool polygon_contains(const Polygon& poly, const Vec2& x, double tol = 1e-12);

/// Area of the convex hull of planar points (0 when collinear).
double hull_area(std::vector<Vec2> pts);

///
/// mu_v(region) for v = max of the pieces restricted to `domain`: sum over the vertices of
/// the upper-envelope cell complex lying in region and domain of the area of the convex
/// hull of the gradients active there. Cells and vertices outside the domain are clipped.
///
double monge_ampere_measure_pl(std::span<const AffinePiece> pieces, const Polygon& domain, const Polygon& region);

} // namespace dualmink
