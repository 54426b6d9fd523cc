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
#include <dualmink/parallel.hpp>
#include <dualmink/sphere_grid.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace dualmink {

namespace {

double spherical_triangle_area(const Vec3& a, const Vec3& b, const Vec3& c)
{
    // Van Oosterom-Strackee.
    double numer = std::abs(a.dot(b.cross(c)));
    double denom = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(numer, denom);
}

///
/// (sqrt(1 - r^2) - 1 + r^2/2 + r^4/8) / scale^6 for r^2 = scale^2 * rr, evaluated without
/// cancellation. Together with the monomial columns this spans <w, v>, so restrictions of
/// linear functions are fitted exactly; it is O(r^6) and does not touch the 2-jet at 0.
///
constexpr double kChartMinCos = 0.2;

double normal_remainder(double rr, double scale)
{
    double t = rr * scale * scale;
    double denom = std::sqrt(std::max(0.0, 1.0 - t)) + 1.0 - 0.5 * t - 0.125 * t * t;
    double s2 = scale * scale;
    return -(rr * rr * rr / 8.0 + s2 * rr * rr * rr * rr / 64.0) / denom;
}

TangentFrame make_frame(const Vec3& v)
{
    Vec3 ref = std::abs(v.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    Vec3 e1 = (ref - ref.dot(v) * v).normalized();
    Vec3 e2 = v.cross(e1);
    return {e1, e2};
}

void icosahedron(std::vector<Vec3>& nodes, std::vector<Triangle>& tris)
{
    const double phi = std::numbers::phi;
    nodes = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    for (auto& v : nodes) v.normalize();
    tris = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (auto& t : tris) {
        const Vec3& a = nodes[t[0]];
        if (a.dot((nodes[t[1]] - a).cross(nodes[t[2]] - a)) < 0) std::swap(t[1], t[2]);
    }
}

void subdivide(std::vector<Vec3>& nodes, std::vector<Triangle>& tris)
{
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
        auto key = std::minmax(a, b);
        auto it = midpoints.find(key);
        if (it != midpoints.end()) return it->second;
        auto idx = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back((nodes[a] + nodes[b]).normalized());
        midpoints.emplace(key, idx);
        return idx;
    };
    std::vector<Triangle> out;
    out.reserve(tris.size() * 4);
    for (const auto& t : tris) {
        std::uint32_t ab = midpoint(t[0], t[1]);
        std::uint32_t bc = midpoint(t[1], t[2]);
        std::uint32_t ca = midpoint(t[2], t[0]);
        out.push_back({t[0], ab, ca});
        out.push_back({t[1], bc, ab});
        out.push_back({t[2], ca, bc});
        out.push_back({ab, bc, ca});
    }
    tris = std::move(out);
}

} // namespace

GridPtr build_geodesic_grid(int level)
{
    if (level < 0 || level > SphericalGrid::kMaxLevel) {
        throw ConfigError("grid level " + std::to_string(level) + " outside [0, " +
                          std::to_string(SphericalGrid::kMaxLevel) + "]");
    }

    static std::mutex cache_mutex;
    static std::map<int, GridPtr> cache;
    {
        std::lock_guard lock(cache_mutex);
        auto it = cache.find(level);
        if (it != cache.end()) return it->second;
    }

    std::shared_ptr<SphericalGrid> grid(new SphericalGrid());
    grid->m_level = level;
    icosahedron(grid->m_nodes, grid->m_triangles);
    for (int l = 0; l < level; ++l) subdivide(grid->m_nodes, grid->m_triangles);

    const std::size_t n = grid->m_nodes.size();
    grid->m_weights.assign(n, 0.0);
    std::vector<std::vector<std::uint32_t>> adjacency(n);
    std::vector<std::vector<std::uint32_t>> incident(n);
    double edge_sum = 0.0;
    for (std::size_t t = 0; t < grid->m_triangles.size(); ++t) {
        const auto& tri = grid->m_triangles[t];
        const Vec3& a = grid->m_nodes[tri[0]];
        const Vec3& b = grid->m_nodes[tri[1]];
        const Vec3& c = grid->m_nodes[tri[2]];
        double third = spherical_triangle_area(a, b, c) / 3.0;
        for (int k = 0; k < 3; ++k) {
            grid->m_weights[tri[k]] += third;
            adjacency[tri[k]].push_back(tri[(k + 1) % 3]);
            adjacency[tri[k]].push_back(tri[(k + 2) % 3]);
            incident[tri[k]].push_back(static_cast<std::uint32_t>(t));
        }
        edge_sum += std::acos(std::clamp(a.dot(b), -1.0, 1.0));
    }
    grid->m_spacing = edge_sum / static_cast<double>(grid->m_triangles.size());
    for (auto& adj : adjacency) {
        std::sort(adj.begin(), adj.end());
        adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }

    grid->m_frames.reserve(n);
    grid->m_stencil_offsets.reserve(n + 1);
    grid->m_stencil_offsets.push_back(0);
    grid->m_incident_offsets.push_back(0);
    for (std::size_t i = 0; i < n; ++i) {
        grid->m_frames.push_back(make_frame(grid->m_nodes[i]));

        std::vector<std::uint32_t> ring = adjacency[i];
        for (int r = 1; r < SphericalGrid::kRings; ++r) {
            std::vector<std::uint32_t> grown = ring;
            for (auto j : ring) grown.insert(grown.end(), adjacency[j].begin(), adjacency[j].end());
            std::sort(grown.begin(), grown.end());
            grown.erase(std::unique(grown.begin(), grown.end()), grown.end());
            ring = std::move(grown);
        }
        // The orthographic chart is only injective on the open hemisphere around node i.
        const Vec3& center = grid->m_nodes[i];
        std::erase_if(ring, [&](std::uint32_t j) {
            return j == i || (level > 0 && grid->m_nodes[j].dot(center) < kChartMinCos);
        });
        grid->m_stencil_data.insert(grid->m_stencil_data.end(), ring.begin(), ring.end());
        grid->m_stencil_offsets.push_back(static_cast<std::uint32_t>(grid->m_stencil_data.size()));

        grid->m_incident_data.insert(grid->m_incident_data.end(), incident[i].begin(), incident[i].end());
        grid->m_incident_offsets.push_back(static_cast<std::uint32_t>(grid->m_incident_data.size()));
    }

    std::lock_guard lock(cache_mutex);
    auto [it, inserted] = cache.emplace(level, std::move(grid));
    return it->second;
}

std::span<const std::uint32_t> SphericalGrid::stencil(std::size_t i) const
{
    return {m_stencil_data.data() + m_stencil_offsets[i], m_stencil_offsets[i + 1] - m_stencil_offsets[i]};
}

std::span<const std::uint32_t> SphericalGrid::incident_triangles(std::size_t i) const
{
    return {m_incident_data.data() + m_incident_offsets[i], m_incident_offsets[i + 1] - m_incident_offsets[i]};
}

Vec2 SphericalGrid::chart(std::size_t i, const Vec3& w) const
{
    const auto& f = m_frames[i];
    return Vec2(w.dot(f.e1), w.dot(f.e2));
}

void SphericalGrid::build_fits() const
{
    std::call_once(m_fit_once, [this] {
        m_fits.resize(size());
        parallel_for(size(), [this](std::size_t i) {
            auto ring = stencil(i);
            const Eigen::Index k = static_cast<Eigen::Index>(ring.size()) + 1;
            std::vector<Vec2> y(static_cast<std::size_t>(k));
            y[0] = Vec2::Zero();
            double scale = 0.0;
            for (std::size_t j = 0; j < ring.size(); ++j) {
                y[j + 1] = chart(i, m_nodes[ring[j]]);
                scale = std::max(scale, y[j + 1].norm());
            }
            // Coarse grids (levels 0-1) lack points for the full degree; drop degree there.
            int degree = kFitDegree;
            while (degree > 2 && (degree + 1) * (degree + 2) / 2 + 1 + 4 > k) --degree;
            const int terms = (degree + 1) * (degree + 2) / 2 + 1;
            Eigen::MatrixXd design(k, terms);
            for (Eigen::Index r = 0; r < k; ++r) {
                double a = y[static_cast<std::size_t>(r)].x() / scale;
                double b = y[static_cast<std::size_t>(r)].y() / scale;
                int col = 0;
                design(r, col++) = normal_remainder(a * a + b * b, scale);
                for (int deg = 0; deg <= degree; ++deg) {
                    for (int pa = deg; pa >= 0; --pa) design(r, col++) = std::pow(a, pa) * std::pow(b, deg - pa);
                }
            }
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeThinU | Eigen::ComputeThinV);
            const auto& sv = svd.singularValues();
            if (sv(sv.size() - 1) <= 1e-10 * sv(0)) {
                throw NumericalError("rank-deficient derivative fit", i);
            }
            Eigen::MatrixXd pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
            Eigen::Matrix<double, 6, Eigen::Dynamic> rows(6, k);
            rows.row(0) = pinv.row(1);
            rows.row(1) = pinv.row(2) / scale;
            rows.row(2) = pinv.row(3) / scale;
            rows.row(3) = 2.0 * pinv.row(4) / (scale * scale);
            rows.row(4) = pinv.row(5) / (scale * scale);
            rows.row(5) = 2.0 * pinv.row(6) / (scale * scale);
            m_fits[i] = std::move(rows);
        });
    });
}

const Eigen::Matrix<double, 6, Eigen::Dynamic>& SphericalGrid::fit_rows(std::size_t i) const
{
    build_fits();
    return m_fits[i];
}

LocalJet SphericalGrid::jet(std::span<const double> values, std::size_t i) const
{
    const auto& rows = fit_rows(i);
    auto ring = stencil(i);
    Eigen::Matrix<double, 6, 1> c = rows.col(0) * values[i];
    for (std::size_t j = 0; j < ring.size(); ++j) {
        c += rows.col(static_cast<Eigen::Index>(j) + 1) * values[ring[j]];
    }
    LocalJet jet;
    jet.value = c(0);
    jet.gradient = Vec2(c(1), c(2));
    jet.hessian << c(3), c(4), c(4), c(5);
    return jet;
}

std::size_t SphericalGrid::nearest_node(const Vec3& v) const
{
    std::size_t best = 0;
    double best_dot = -2.0;
    for (std::size_t i = 0; i < m_nodes.size(); ++i) {
        double d = m_nodes[i].dot(v);
        if (d > best_dot) {
            best_dot = d;
            best = i;
        }
    }
    return best;
}

std::pair<std::size_t, Vec3> SphericalGrid::locate(const Vec3& v) const
{
    auto try_triangle = [&](std::size_t t) -> std::optional<Vec3> {
        const auto& tri = m_triangles[t];
        Mat3 m;
        m.col(0) = m_nodes[tri[0]];
        m.col(1) = m_nodes[tri[1]];
        m.col(2) = m_nodes[tri[2]];
        Vec3 lam = m.partialPivLu().solve(v);
        if (lam.minCoeff() < -1e-12) return std::nullopt;
        return lam / lam.sum();
    };
    for (auto t : incident_triangles(nearest_node(v))) {
        if (auto lam = try_triangle(t)) return {t, *lam};
    }
    for (std::size_t t = 0; t < m_triangles.size(); ++t) {
        if (auto lam = try_triangle(t)) return {t, *lam};
    }
    throw NumericalError("point location failed on the sphere grid");
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : m_grid(std::move(grid))
    , m_values(std::move(values))
{
    if (!m_grid) throw ConfigError("scalar field without a grid");
    if (m_values.size() != m_grid->size()) {
        throw ConfigError("field has " + std::to_string(m_values.size()) + " values but grid has " +
                          std::to_string(m_grid->size()) + " nodes");
    }
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        if (!std::isfinite(m_values[i])) throw NumericalError("non-finite field value", i);
    }
}

ScalarField ScalarField::constant(GridPtr grid, double c)
{
    std::vector<double> v(grid->size(), c);
    return ScalarField(std::move(grid), std::move(v));
}

double ScalarField::min() const
{
    return *std::min_element(m_values.begin(), m_values.end());
}

double ScalarField::max() const
{
    return *std::max_element(m_values.begin(), m_values.end());
}

double quadrature(const SphericalGrid& grid, std::span<const double> values)
{
    if (values.size() != grid.size()) throw ConfigError("quadrature: field/grid size mismatch");
    std::vector<double> terms(values.size());
    auto w = grid.weights();
    for (std::size_t i = 0; i < values.size(); ++i) terms[i] = w[i] * values[i];
    return stable_sum(terms);
}

double quadrature(const ScalarField& field)
{
    return quadrature(field.grid(), field.values());
}

Vec2 spherical_gradient(const ScalarField& field, std::size_t node)
{
    return field.grid().jet(field.values(), node).gradient;
}

Vec3 spherical_gradient_ambient(const ScalarField& field, std::size_t node)
{
    Vec2 g = spherical_gradient(field, node);
    const auto& f = field.grid().frame(node);
    return g.x() * f.e1 + g.y() * f.e2;
}

ScalarField ma_operator(const ScalarField& field)
{
    const auto& grid = field.grid();
    std::vector<double> out(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        LocalJet jet = grid.jet(field.values(), i);
        Mat2 m = jet.hessian + field[i] * Mat2::Identity();
        out[i] = m.determinant();
    });
    return ScalarField(field.grid_ptr(), std::move(out));
}

double min_curvature_eigenvalue(const ScalarField& field)
{
    const auto& grid = field.grid();
    std::vector<double> low(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) {
        LocalJet jet = grid.jet(field.values(), i);
        Mat2 m = jet.hessian + field[i] * Mat2::Identity();
        double mean = 0.5 * (m(0, 0) + m(1, 1));
        double diff = 0.5 * (m(0, 0) - m(1, 1));
        low[i] = mean - std::sqrt(diff * diff + m(0, 1) * m(0, 1));
    });
    return *std::min_element(low.begin(), low.end());
}

} // namespace dualmink
