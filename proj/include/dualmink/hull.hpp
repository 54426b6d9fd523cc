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

#include <dualmink/sphere_grid.hpp>

#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace dualmink {

/// Triangulated boundary of a 3-D convex hull, outward oriented.
struct ConvexHull
{
    std::vector<Vec3> points;          // input points, unchanged
    std::vector<Triangle> triangles;   // indices into points, counter-clockwise seen from outside
    std::vector<Vec3> normals;         // unit outward normal per triangle
    std::vector<double> offsets;       // <normal, x> on the triangle's plane
    std::vector<std::uint32_t> vertices; // sorted indices of points on the hull
};

/// A planar face of a polytope, made of coplanar hull triangles.
struct HullFacet
{
    Vec3 normal;
    double offset = 0.0;
    double area = 0.0;
    std::vector<Triangle> triangles;
};

///
/// Quickhull. Points within `rel_tol * diameter` of a face plane are treated as coplanar
/// (not added). Throws NumericalError if the points do not span three dimensions.
///
ConvexHull convex_hull(std::span<const Vec3> points, double rel_tol = 1e-11);

/// Groups edge-adjacent hull triangles whose planes agree within `tol` into facets.
std::vector<HullFacet> merge_coplanar(const ConvexHull& hull, double tol = 1e-9);

} // namespace dualmink
