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
#include <dualmink/errors.hpp>
#include <dualmink/hull.hpp>

#include <algorithm>
#include <deque>
#include <numeric>
#include <unordered_map>

namespace dualmink {

namespace {

struct Face
{
    Triangle v;
    Vec3 normal;
    double offset = 0.0;
    std::vector<std::uint32_t> outside;
    bool alive = true;
};

std::uint64_t edge_key(std::uint32_t a, std::uint32_t b)
{
    return (static_cast<std::uint64_t>(a) << 32) | b;
}

class Quickhull
{
public:
    Quickhull(std::span<const Vec3> pts, double rel_tol)
        : m_pts(pts)
    {
        Vec3 lo = pts[0];
        Vec3 hi = pts[0];
        for (const auto& p : pts) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        m_eps = rel_tol * std::max(1.0, (hi - lo).norm());
    }

    void run()
    {
        seed_simplex();
        while (!m_pending.empty()) {
            int f = m_pending.front();
            m_pending.pop_front();
            if (!m_faces[f].alive || m_faces[f].outside.empty()) continue;
            add_point(f);
        }
    }

    ConvexHull result() const
    {
        ConvexHull hull;
        hull.points.assign(m_pts.begin(), m_pts.end());
        for (const auto& f : m_faces) {
            if (!f.alive) continue;
            hull.triangles.push_back(f.v);
            hull.normals.push_back(f.normal);
            hull.offsets.push_back(f.offset);
            hull.vertices.insert(hull.vertices.end(), f.v.begin(), f.v.end());
        }
        std::sort(hull.vertices.begin(), hull.vertices.end());
        hull.vertices.erase(std::unique(hull.vertices.begin(), hull.vertices.end()), hull.vertices.end());
        return hull;
    }

private:
    double distance(const Face& f, std::uint32_t p) const { return f.normal.dot(m_pts[p]) - f.offset; }

    int make_face(std::uint32_t a, std::uint32_t b, std::uint32_t c)
    {
        Face f;
        f.v = {a, b, c};
        Vec3 n = (m_pts[b] - m_pts[a]).cross(m_pts[c] - m_pts[a]);
        f.normal = n.normalized();
        f.offset = f.normal.dot(m_pts[a] + m_pts[b] + m_pts[c]) / 3.0;
        int id = static_cast<int>(m_faces.size());
        m_faces.push_back(std::move(f));
        for (int k = 0; k < 3; ++k) m_edges[edge_key(m_faces[id].v[k], m_faces[id].v[(k + 1) % 3])] = id;
        return id;
    }

    void kill_face(int id)
    {
        auto& f = m_faces[id];
        f.alive = false;
        for (int k = 0; k < 3; ++k) m_edges.erase(edge_key(f.v[k], f.v[(k + 1) % 3]));
    }

    int neighbor(std::uint32_t a, std::uint32_t b) const
    {
        auto it = m_edges.find(edge_key(b, a));
        if (it == m_edges.end()) throw NumericalError("convex hull lost manifold connectivity");
        return it->second;
    }

    void seed_simplex()
    {
        const auto n = static_cast<std::uint32_t>(m_pts.size());
        if (n < 4) throw NumericalError("convex hull needs at least 4 points");

        std::uint32_t i0 = 0;
        std::uint32_t i1 = 0;
        for (std::uint32_t i = 1; i < n; ++i) {
            if (m_pts[i].x() < m_pts[i0].x()) i0 = i;
            if (m_pts[i].x() > m_pts[i1].x()) i1 = i;
        }
        if (i0 == i1 || (m_pts[i1] - m_pts[i0]).norm() <= m_eps) {
            // Fall back to the farthest pair from point 0.
            i0 = 0;
            double best = -1.0;
            for (std::uint32_t i = 0; i < n; ++i) {
                double d = (m_pts[i] - m_pts[0]).norm();
                if (d > best) {
                    best = d;
                    i1 = i;
                }
            }
        }
        const Vec3 axis = (m_pts[i1] - m_pts[i0]).normalized();
        std::uint32_t i2 = i0;
        double best = -1.0;
        for (std::uint32_t i = 0; i < n; ++i) {
            Vec3 d = m_pts[i] - m_pts[i0];
            double dist = (d - d.dot(axis) * axis).norm();
            if (dist > best) {
                best = dist;
                i2 = i;
            }
        }
        if (best <= m_eps) throw NumericalError("convex hull input is not full-dimensional");
        const Vec3 plane_n = (m_pts[i1] - m_pts[i0]).cross(m_pts[i2] - m_pts[i0]).normalized();
        std::uint32_t i3 = i0;
        best = -1.0;
        for (std::uint32_t i = 0; i < n; ++i) {
            double dist = std::abs(plane_n.dot(m_pts[i] - m_pts[i0]));
            if (dist > best) {
                best = dist;
                i3 = i;
            }
        }
        if (best <= m_eps) throw NumericalError("convex hull input is not full-dimensional");

        const Vec3 centroid = (m_pts[i0] + m_pts[i1] + m_pts[i2] + m_pts[i3]) / 4.0;
        const std::array<Triangle, 4> tris = {Triangle{i0, i1, i2}, Triangle{i0, i3, i1}, Triangle{i1, i3, i2},
                                              Triangle{i2, i3, i0}};
        std::vector<int> ids;
        for (auto t : tris) {
            Vec3 nrm = (m_pts[t[1]] - m_pts[t[0]]).cross(m_pts[t[2]] - m_pts[t[0]]);
            if (nrm.dot(m_pts[t[0]] - centroid) < 0) std::swap(t[1], t[2]);
            ids.push_back(make_face(t[0], t[1], t[2]));
        }
        for (std::uint32_t p = 0; p < n; ++p) {
            if (p == i0 || p == i1 || p == i2 || p == i3) continue;
            assign(p, ids);
        }
        for (int id : ids) {
            if (!m_faces[id].outside.empty()) m_pending.push_back(id);
        }
    }

    void assign(std::uint32_t p, const std::vector<int>& candidates)
    {
        for (int id : candidates) {
            if (distance(m_faces[id], p) > m_eps) {
                m_faces[id].outside.push_back(p);
                return;
            }
        }
    }

    void add_point(int start)
    {
        const Face& sf = m_faces[start];
        std::uint32_t eye = sf.outside.front();
        double far = distance(sf, eye);
        for (auto p : sf.outside) {
            double d = distance(sf, p);
            if (d > far) {
                far = d;
                eye = p;
            }
        }

        // Visible region by flood fill over face adjacency.
        std::vector<int> visible{start};
        std::unordered_map<int, bool> seen{{start, true}};
        for (std::size_t k = 0; k < visible.size(); ++k) {
            const Face& f = m_faces[visible[k]];
            for (int e = 0; e < 3; ++e) {
                int g = neighbor(f.v[e], f.v[(e + 1) % 3]);
                if (seen.contains(g)) continue;
                bool vis = distance(m_faces[g], eye) > m_eps;
                seen[g] = vis;
                if (vis) visible.push_back(g);
            }
        }

        std::vector<std::pair<std::uint32_t, std::uint32_t>> horizon;
        for (int id : visible) {
            const Face& f = m_faces[id];
            for (int e = 0; e < 3; ++e) {
                int g = neighbor(f.v[e], f.v[(e + 1) % 3]);
                if (!seen[g]) horizon.emplace_back(f.v[e], f.v[(e + 1) % 3]);
            }
        }

        std::vector<std::uint32_t> orphans;
        for (int id : visible) {
            for (auto p : m_faces[id].outside) {
                if (p != eye) orphans.push_back(p);
            }
            m_faces[id].outside.clear();
            kill_face(id);
        }

        std::vector<int> created;
        created.reserve(horizon.size());
        for (auto [a, b] : horizon) created.push_back(make_face(a, b, eye));
        std::sort(orphans.begin(), orphans.end());
        for (auto p : orphans) assign(p, created);
        for (int id : created) {
            if (!m_faces[id].outside.empty()) m_pending.push_back(id);
        }
    }

    std::span<const Vec3> m_pts;
    double m_eps = 0.0;
    std::vector<Face> m_faces;
    std::unordered_map<std::uint64_t, int> m_edges;
    std::deque<int> m_pending;
};

} // namespace

ConvexHull convex_hull(std::span<const Vec3> points, double rel_tol)
{
    Quickhull qh(points, rel_tol);
    qh.run();
    return qh.result();
}

std::vector<HullFacet> merge_coplanar(const ConvexHull& hull, double tol)
{
    const std::size_t n = hull.triangles.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };

    std::unordered_map<std::uint64_t, std::size_t> owner;
    for (std::size_t t = 0; t < n; ++t) {
        for (int k = 0; k < 3; ++k) owner[edge_key(hull.triangles[t][k], hull.triangles[t][(k + 1) % 3])] = t;
    }
    for (std::size_t t = 0; t < n; ++t) {
        for (int k = 0; k < 3; ++k) {
            auto it = owner.find(edge_key(hull.triangles[t][(k + 1) % 3], hull.triangles[t][k]));
            if (it == owner.end()) continue;
            std::size_t s = it->second;
            if ((hull.normals[t] - hull.normals[s]).norm() < tol &&
                std::abs(hull.offsets[t] - hull.offsets[s]) < tol * std::max(1.0, std::abs(hull.offsets[t]))) {
                parent[find(t)] = find(s);
            }
        }
    }

    std::unordered_map<std::size_t, std::size_t> facet_of_root;
    std::vector<HullFacet> facets;
    std::vector<Vec3> weighted;
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t root = find(t);
        auto [it, inserted] = facet_of_root.emplace(root, facets.size());
        if (inserted) {
            facets.emplace_back();
            weighted.push_back(Vec3::Zero());
        }
        const auto& tri = hull.triangles[t];
        const Vec3& a = hull.points[tri[0]];
        Vec3 cross = (hull.points[tri[1]] - a).cross(hull.points[tri[2]] - a);
        auto& facet = facets[it->second];
        facet.triangles.push_back(tri);
        facet.area += 0.5 * cross.norm();
        weighted[it->second] += 0.5 * cross;
    }
    for (std::size_t f = 0; f < facets.size(); ++f) {
        auto& facet = facets[f];
        facet.normal = weighted[f].normalized();
        double sum = 0.0;
        for (const auto& tri : facet.triangles) {
            for (auto v : tri) sum += facet.normal.dot(hull.points[v]);
        }
        facet.offset = sum / static_cast<double>(3 * facet.triangles.size());
    }
    return facets;
}

} // namespace dualmink
