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

#include <dualmink/hull.hpp>
#include <dualmink/sphere_grid.hpp>

#include <Eigen/Geometry>

#include <variant>
#include <vector>

namespace dualmink {

struct BodyOptions
{
    /// Lower bound on the radial function (origin margin).
    double rho_min = 1e-3;
    /// Tolerance of the convexity check for support-grid bodies.
    double tol_convex = 1e-6;
};

/// {X + A z : |z| <= 1} with A = axes * diag(half_axes).
struct Ellipsoid
{
    Vec3 center = Vec3::Zero();
    Vec3 half_axes = Vec3::Ones();
    Mat3 axes = Mat3::Identity(); // orthonormal columns
};

// Closed forms for ellipsoids. Directions are unit vectors; x is a boundary point.
Mat3 shape_matrix(const Ellipsoid& e);
double ellipsoid_support(const Ellipsoid& e, const Vec3& v);
Vec3 ellipsoid_gradient(const Ellipsoid& e, const Vec3& v);
double ellipsoid_radial(const Ellipsoid& e, const Vec3& w);
Vec3 ellipsoid_normal(const Ellipsoid& e, const Vec3& x);
/// det(Hess h + h I) at v.
double ellipsoid_curvature(const Ellipsoid& e, const Vec3& v);

struct Polytope
{
    std::vector<Vec3> vertices;    // extreme points only
    std::vector<HullFacet> facets; // triangle indices refer to `vertices`
};

struct SupportGrid
{
    ScalarField u;
};

///
/// A convex body with the origin in its interior.
///
/// Construction validates the representation invariants and throws InvalidBodyError on
/// violation. Instances are immutable.
///
class ConvexBody
{
public:
    enum class Kind { Ellipsoid, Polytope, SupportGrid };

    static ConvexBody ellipsoid(const Vec3& half_axes, const Vec3& center = Vec3::Zero(),
                                const Mat3& axes = Mat3::Identity(), const BodyOptions& opts = {});
    static ConvexBody ball(double radius = 1.0, const BodyOptions& opts = {});
    static ConvexBody polytope(std::span<const Vec3> points, const BodyOptions& opts = {});
    static ConvexBody cube(double half_side = 1.0, const BodyOptions& opts = {});
    static ConvexBody support_grid(ScalarField u, const BodyOptions& opts = {});

    Kind kind() const { return static_cast<Kind>(m_rep.index()); }
    bool smooth() const { return kind() != Kind::Polytope; }

    const Ellipsoid& as_ellipsoid() const { return std::get<Ellipsoid>(m_rep); }
    const Polytope& as_polytope() const { return std::get<Polytope>(m_rep); }
    const SupportGrid& as_support_grid() const { return std::get<SupportGrid>(m_rep); }

    /// Image under x -> s x. Support-grid values are rescaled on the same grid.
    ConvexBody scaled(double s) const;

    /// Image under x -> Phi x (ellipsoids and polytopes only).
    ConvexBody transformed(const Mat3& phi) const;

    const BodyOptions& options() const { return m_opts; }

private:
    using Rep = std::variant<Ellipsoid, Polytope, SupportGrid>;
    ConvexBody(Rep rep, const BodyOptions& opts);
    void validate() const;

    Rep m_rep;
    BodyOptions m_opts;
};

/// h_K(v).
double support(const ConvexBody& body, const Vec3& v);

/// rho_K(w) = max{t >= 0 : t w in K}.
double radial(const ConvexBody& body, const Vec3& w);

/// Dh_K(v): the boundary point with exterior normal v. AmbiguityError where h_K is not
/// differentiable (polytope normal-cone boundaries).
Vec3 support_gradient(const ConvexBody& body, const Vec3& v);

struct RadialGaussHit
{
    Vec3 point;
    std::vector<Vec3> normals;
};

/// The boundary point rho_K(w) w and its exterior unit normal(s).
RadialGaussHit radial_gauss(const ConvexBody& body, const Vec3& w);

double volume(const ConvexBody& body);

/// Values of h_K at the nodes of `grid`.
ScalarField sample_support(const ConvexBody& body, GridPtr grid);

///
/// det(Hess h + h I) at the nodes of `grid` for a smooth body: closed form for ellipsoids,
/// ma_operator for support grids on the same grid.
///
ScalarField curvature_density(const ConvexBody& body, GridPtr grid);

/// Spherical gradient of h_K at node i of `grid` as an ambient tangent vector.
Vec3 support_tangent_gradient(const ConvexBody& body, const SphericalGrid& grid, std::size_t i);

struct JohnEllipsoid
{
    Vec3 center = Vec3::Zero();
    Vec3 half_axes = Vec3::Ones(); // ascending
    Mat3 axes = Mat3::Identity();  // column k pairs with half_axes[k]

    double volume() const;
    Mat3 shape() const { return axes * half_axes.asDiagonal() * axes.transpose(); }
};

struct JohnOptions
{
    /// Relative volume tolerance of the maximization.
    double tol = 1e-3;
    int max_newton = 200;
};

///
/// Maximal-volume inscribed ellipsoid, by a log-barrier interior-point method over
/// E = {M z + X : |z| <= 1} with support-function containment constraints at facet normals
/// (polytopes) or grid nodes (support grids). Ellipsoids return themselves.
///
JohnEllipsoid john_ellipsoid(const ConvexBody& body, const JohnOptions& opts = {});

struct JohnContainment
{
    /// max over constraint directions of h_E - h_K (<= 0 when E is inside K).
    double inner_excess = 0.0;
    /// max over K of |M^-1 (x - X)| - 3 (<= 0 when K is inside X + 3 (E - X)).
    double outer_excess = 0.0;
};

JohnContainment john_containment(const ConvexBody& body, const JohnEllipsoid& e);

} // namespace dualmink
