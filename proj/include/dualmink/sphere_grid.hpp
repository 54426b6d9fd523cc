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

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

namespace dualmink {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Triangle = std::array<std::uint32_t, 3>;

/// Orthonormal tangent pair at a node; (e1, e2, v) is right-handed.
struct TangentFrame
{
    Vec3 e1;
    Vec3 e2;
};

///
/// Second-order local data of a scalar field at a node.
///
/// The field is fitted by least squares in the node's orthographic tangent chart
/// y = (<w,e1>, <w,e2>). The metric of that chart has vanishing first derivatives at the
/// origin, so the coordinate gradient and Hessian there are the spherical gradient and the
/// covariant Hessian. Constants and restrictions of linear functions are reproduced exactly.
///
struct LocalJet
{
    double value = 0.0;
    Vec2 gradient = Vec2::Zero();
    Mat2 hessian = Mat2::Zero();
};

class SphericalGrid;
using GridPtr = std::shared_ptr<const SphericalGrid>;

///
/// Icosahedral geodesic discretization of S^2.
///
/// Immutable after construction. The least-squares derivative operators are built lazily
/// on first use (thread-safe) since they dominate the memory footprint at high levels.
///
class SphericalGrid
{
public:
    static constexpr int kMaxLevel = 7;

    static constexpr int kRings = 3;
    static constexpr int kFitDegree = 5;
    /// Monomials up to kFitDegree plus the normal coordinate <w, v>.
    static constexpr int kFitTerms = (kFitDegree + 1) * (kFitDegree + 2) / 2 + 1;

    int level() const { return m_level; }
    std::size_t size() const { return m_nodes.size(); }

    std::span<const Vec3> nodes() const { return m_nodes; }
    const Vec3& node(std::size_t i) const { return m_nodes[i]; }
    std::span<const double> weights() const { return m_weights; }
    std::span<const Triangle> triangles() const { return m_triangles; }
    const TangentFrame& frame(std::size_t i) const { return m_frames[i]; }

    /// kRings-ring neighbor indices of node i (node i itself excluded).
    std::span<const std::uint32_t> stencil(std::size_t i) const;

    /// Triangles incident to node i.
    std::span<const std::uint32_t> incident_triangles(std::size_t i) const;

    /// Orthographic chart coordinates of a unit vector w around node i.
    Vec2 chart(std::size_t i, const Vec3& w) const;

    /// Local jet of a nodal field at node i. Throws NumericalError for a degenerate stencil.
    LocalJet jet(std::span<const double> values, std::size_t i) const;

    ///
    /// Linear operator rows of the fit at node i: coefficient rows for value, g1, g2,
    /// H11, H12, H22 against the values of [i, stencil(i)...] in that order.
    ///
    const Eigen::Matrix<double, 6, Eigen::Dynamic>& fit_rows(std::size_t i) const;

    std::size_t nearest_node(const Vec3& v) const;

    /// Triangle containing v with gnomonic barycentric coordinates (non-negative, sum 1).
    std::pair<std::size_t, Vec3> locate(const Vec3& v) const;

    /// Typical edge length (radians).
    double spacing() const { return m_spacing; }

private:
    friend GridPtr build_geodesic_grid(int level);
    SphericalGrid() = default;
    void build_fits() const;

    int m_level = 0;
    double m_spacing = 0.0;
    std::vector<Vec3> m_nodes;
    std::vector<double> m_weights;
    std::vector<Triangle> m_triangles;
    std::vector<TangentFrame> m_frames;
    std::vector<std::uint32_t> m_stencil_offsets;
    std::vector<std::uint32_t> m_stencil_data;
    std::vector<std::uint32_t> m_incident_offsets;
    std::vector<std::uint32_t> m_incident_data;

    mutable std::once_flag m_fit_once;
    mutable std::vector<Eigen::Matrix<double, 6, Eigen::Dynamic>> m_fits;
};

/// Builds (or returns the cached) level-`level` grid with 10*4^level + 2 nodes.
/// Throws ConfigError when level is outside [0, 7].
GridPtr build_geodesic_grid(int level);

/// Nodal scalar field on a grid; all values finite.
class ScalarField
{
public:
    ScalarField(GridPtr grid, std::vector<double> values);
    static ScalarField constant(GridPtr grid, double c);

    template <typename Fn>
    static ScalarField sample(GridPtr grid, Fn&& fn)
    {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid->node(i));
        return ScalarField(std::move(grid), std::move(v));
    }

    const SphericalGrid& grid() const { return *m_grid; }
    const GridPtr& grid_ptr() const { return m_grid; }
    std::span<const double> values() const { return m_values; }
    double operator[](std::size_t i) const { return m_values[i]; }
    std::size_t size() const { return m_values.size(); }

    double min() const;
    double max() const;

private:
    GridPtr m_grid;
    std::vector<double> m_values;
};

/// Sum of w_i f_i with compensated summation.
double quadrature(const SphericalGrid& grid, std::span<const double> values);
double quadrature(const ScalarField& field);

/// Spherical gradient at a node, as coefficients in the node's tangent frame.
Vec2 spherical_gradient(const ScalarField& field, std::size_t node);

/// Same gradient expressed as an ambient tangent vector.
Vec3 spherical_gradient_ambient(const ScalarField& field, std::size_t node);

/// det(Hess u + u I) per node.
ScalarField ma_operator(const ScalarField& field);

/// Smallest eigenvalue of (Hess u + u I) over all nodes.
double min_curvature_eigenvalue(const ScalarField& field);

} // namespace dualmink
