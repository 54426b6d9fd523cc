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
#include <dualmink/measures.hpp>
#include <dualmink/parallel.hpp>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace dualmink {

// ---------------------------------------------------------------------------------------
// Regions

RegionSpec RegionSpec::full()
{
    return RegionSpec{};
}

RegionSpec RegionSpec::cap(const Vec3& center, double angle)
{
    if (!center.allFinite() || center.norm() < 1e-12) throw ConfigError("cap center must be a nonzero vector");
    if (!(angle >= 0.0 && angle <= std::numbers::pi)) throw ConfigError("cap angle must lie in [0, pi]");
    RegionSpec r;
    r.m_kind = Kind::Cap;
    r.m_center = center.normalized();
    r.m_angle = angle;
    r.m_cos = angle == std::numbers::pi / 2 ? 0.0 : std::cos(angle);
    return r;
}

RegionSpec RegionSpec::union_of(std::vector<RegionSpec> parts)
{
    if (parts.empty()) throw ConfigError("union of regions needs at least one part");
    RegionSpec r;
    r.m_kind = Kind::Union;
    r.m_parts = std::move(parts);
    return r;
}

bool RegionSpec::contains(const Vec3& v) const
{
    switch (m_kind) {
    case Kind::Full:
        return true;
    case Kind::Cap:
        return v.dot(m_center) >= m_cos - 1e-12;
    case Kind::Union:
        return std::any_of(m_parts.begin(), m_parts.end(), [&](const RegionSpec& r) { return r.contains(v); });
    }
    return false;
}

std::vector<char> RegionSpec::realize(const SphericalGrid& grid) const
{
    std::vector<char> mask(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) mask[i] = contains(grid.node(i)) ? 1 : 0;
    return mask;
}

std::vector<double> RegionSpec::weights(const SphericalGrid& grid) const
{
    if (is_full()) return {grid.weights().begin(), grid.weights().end()};
    return region_weights(grid, [this](const Vec3& v) { return contains(v); });
}

namespace {

struct SubTriangle
{
    Vec3 b0, b1, b2; // barycentric corners relative to the grid triangle
};

void accumulate_region(const Mat3& corners, const SubTriangle& t, double area, int depth,
                       const std::function<bool(const Vec3&)>& pred, std::array<bool, 3> corner_in, Vec3& acc)
{
    const Vec3 centre_b = (t.b0 + t.b1 + t.b2) / 3.0;
    const bool centre_in = pred((corners * centre_b).normalized());
    const bool uniform = corner_in[0] == corner_in[1] && corner_in[1] == corner_in[2] && corner_in[0] == centre_in;
    if (uniform || depth == 0) {
        double frac = 0.0;
        if (uniform) {
            frac = centre_in ? 1.0 : 0.0;
        } else {
            frac = (corner_in[0] + corner_in[1] + corner_in[2] + 3.0 * centre_in) / 6.0;
        }
        acc += frac * area * centre_b;
        return;
    }
    const Vec3 m01 = 0.5 * (t.b0 + t.b1);
    const Vec3 m12 = 0.5 * (t.b1 + t.b2);
    const Vec3 m20 = 0.5 * (t.b2 + t.b0);
    auto in = [&](const Vec3& b) { return pred((corners * b).normalized()); };
    const bool i01 = in(m01), i12 = in(m12), i20 = in(m20);
    const double sub = area / 4.0;
    accumulate_region(corners, {t.b0, m01, m20}, sub, depth - 1, pred, {corner_in[0], i01, i20}, acc);
    accumulate_region(corners, {m01, t.b1, m12}, sub, depth - 1, pred, {i01, corner_in[1], i12}, acc);
    accumulate_region(corners, {m20, m12, t.b2}, sub, depth - 1, pred, {i20, i12, corner_in[2]}, acc);
    accumulate_region(corners, {m01, m12, m20}, sub, depth - 1, pred, {i01, i12, i20}, acc);
}

} // namespace

std::vector<double> region_weights(const SphericalGrid& grid, const std::function<bool(const Vec3&)>& pred, int depth)
{
    std::vector<char> node_in(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { node_in[i] = pred(grid.node(i)) ? 1 : 0; });

    const auto tris = grid.triangles();
    std::vector<Vec3> contrib(tris.size(), Vec3::Zero());
    parallel_for(tris.size(), [&](std::size_t t) {
        const auto& tri = tris[t];
        Mat3 corners;
        for (int k = 0; k < 3; ++k) corners.col(k) = grid.node(tri[k]);
        const Vec3& a = grid.node(tri[0]);
        const Vec3& b = grid.node(tri[1]);
        const Vec3& c = grid.node(tri[2]);
        const double area = 2.0 * std::atan2(std::abs(a.dot(b.cross(c))), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
        accumulate_region(corners, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, area, depth, pred,
                          {node_in[tri[0]] != 0, node_in[tri[1]] != 0, node_in[tri[2]] != 0}, contrib[t]);
    });

    // Deterministic per-node gather over incident triangles.
    std::vector<double> w(grid.size(), 0.0);
    parallel_for(grid.size(), [&](std::size_t i) {
        std::vector<double> parts;
        for (auto t : grid.incident_triangles(i)) {
            const auto& tri = tris[t];
            for (int k = 0; k < 3; ++k) {
                if (tri[k] == i) parts.push_back(contrib[t][k]);
            }
        }
        w[i] = stable_sum(parts);
    });
    return w;
}

namespace {

/// Degree-5 7-point rule on the reference triangle (weights sum to 1).
struct SimplexRule
{
    std::array<Vec3, 7> points;
    std::array<double, 7> weights;
};

const SimplexRule& simplex_rule()
{
    static const SimplexRule rule = [] {
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
        const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
        SimplexRule r;
        r.points = {Vec3(1.0 / 3, 1.0 / 3, 1.0 / 3), Vec3(a1, a1, b1), Vec3(a1, b1, a1), Vec3(b1, a1, a1),
                    Vec3(a2, a2, b2),               Vec3(a2, b2, a2), Vec3(b2, a2, a2)};
        r.weights = {0.225, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

/// Integral over the central projection of a sub-simplex (barycentric corners t) of the grid
/// triangle `corners`; the projection has area element |det corners| / |x|^3 per unit
/// barycentric area.
double projected_rule(const Mat3& corners, double det, const SubTriangle& t, double bary_area,
                      const std::function<double(const Vec3&)>& f, const std::function<bool(const Vec3&)>* pred)
{
    const auto& rule = simplex_rule();
    double sum = 0.0;
    for (int k = 0; k < 7; ++k) {
        const Vec3 b = rule.points[k][0] * t.b0 + rule.points[k][1] * t.b1 + rule.points[k][2] * t.b2;
        const Vec3 x = corners * b;
        const double r = x.norm();
        const Vec3 w = x / r;
        if (pred && !(*pred)(w)) continue;
        sum += rule.weights[k] * f(w) / (r * r * r);
    }
    return sum * det * bary_area;
}

double integrate_projected(const Mat3& corners, double det, const SubTriangle& t, double bary_area, int depth,
                           const std::function<double(const Vec3&)>& f, const std::function<bool(const Vec3&)>& pred,
                           std::array<bool, 3> corner_in)
{
    const Vec3 centre_b = (t.b0 + t.b1 + t.b2) / 3.0;
    const bool centre_in = pred((corners * centre_b).normalized());
    const bool uniform = corner_in[0] == corner_in[1] && corner_in[1] == corner_in[2] && corner_in[0] == centre_in;
    if (uniform) return centre_in ? projected_rule(corners, det, t, bary_area, f, nullptr) : 0.0;
    if (depth == 0) return projected_rule(corners, det, t, bary_area, f, &pred);
    const Vec3 m01 = 0.5 * (t.b0 + t.b1);
    const Vec3 m12 = 0.5 * (t.b1 + t.b2);
    const Vec3 m20 = 0.5 * (t.b2 + t.b0);
    auto in = [&](const Vec3& b) { return pred((corners * b).normalized()); };
    const bool i01 = in(m01), i12 = in(m12), i20 = in(m20);
    const double sub = bary_area / 4.0;
    return integrate_projected(corners, det, {t.b0, m01, m20}, sub, depth - 1, f, pred, {corner_in[0], i01, i20}) +
           integrate_projected(corners, det, {m01, t.b1, m12}, sub, depth - 1, f, pred, {i01, corner_in[1], i12}) +
           integrate_projected(corners, det, {m20, m12, t.b2}, sub, depth - 1, f, pred, {i20, i12, corner_in[2]}) +
           integrate_projected(corners, det, {m01, m12, m20}, sub, depth - 1, f, pred, {i01, i12, i20});
}

} // namespace

namespace {
double integrate_over(const SphericalGrid& grid, const std::function<double(const Vec3&)>& f,
                      const std::function<bool(const Vec3&)>& pred, int depth = 6)
{
    std::vector<char> node_in(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { node_in[i] = pred(grid.node(i)) ? 1 : 0; });
    const auto tris = grid.triangles();
    std::vector<double> parts(tris.size());
    parallel_for(tris.size(), [&](std::size_t t) {
        const auto& tri = tris[t];
        Mat3 corners;
        for (int k = 0; k < 3; ++k) corners.col(k) = grid.node(tri[k]);
        const double det = std::abs(corners.determinant());
        parts[t] = integrate_projected(corners, det, {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()}, 0.5, depth, f, pred,
                                       {node_in[tri[0]] != 0, node_in[tri[1]] != 0, node_in[tri[2]] != 0});
    });
    return stable_sum(parts);
}
} // namespace

bool RegionSpec::is_full() const
{
    switch (m_kind) {
    case Kind::Full:
        return true;
    case Kind::Cap:
        return m_cos <= -1.0;
    case Kind::Union:
        return std::any_of(m_parts.begin(), m_parts.end(), [](const RegionSpec& r) { return r.is_full(); });
    }
    return false;
}

Json RegionSpec::to_json() const
{
    Json doc;
    switch (m_kind) {
    case Kind::Full:
        doc["type"] = "full";
        break;
    case Kind::Cap:
        doc["type"] = "cap";
        doc["center"] = Json::array({m_center.x(), m_center.y(), m_center.z()});
        doc["angle"] = m_angle;
        break;
    case Kind::Union:
        doc["type"] = "union";
        doc["parts"] = Json::array();
        for (const auto& p : m_parts) doc["parts"].push_back(p.to_json());
        break;
    }
    return doc;
}

RegionSpec RegionSpec::from_json(const Json& doc)
{
    if (!doc.is_object() || !doc.contains("type") || !doc["type"].is_string()) {
        throw DocumentError("/type", "region needs a string type");
    }
    const auto type = doc["type"].get<std::string>();
    if (type == "full") return full();
    if (type == "cap") return cap(json_vec3(doc, "/center"), json_number(doc, "/angle"));
    if (type == "hemisphere") return hemisphere(json_vec3(doc, "/center"));
    if (type == "union") {
        if (!doc.contains("parts") || !doc["parts"].is_array()) throw DocumentError("/parts", "expected an array");
        std::vector<RegionSpec> parts;
        for (std::size_t i = 0; i < doc["parts"].size(); ++i) {
            try {
                parts.push_back(from_json(doc["parts"][i]));
            } catch (const DocumentError& e) {
                throw DocumentError("/parts/" + std::to_string(i) + e.pointer(), e.what());
            }
        }
        return union_of(std::move(parts));
    }
    throw DocumentError("/type", "unknown region type '" + type + "'");
}

RegionSpec RegionSpec::parse(const std::string& text)
{
    std::vector<RegionSpec> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, '+')) {
        const auto colon = item.find(':');
        const std::string head = item.substr(0, colon);
        std::vector<double> nums;
        if (colon != std::string::npos) {
            std::stringstream ns(item.substr(colon + 1));
            std::string tok;
            while (std::getline(ns, tok, ',')) {
                try {
                    std::size_t used = 0;
                    nums.push_back(std::stod(tok, &used));
                    if (used != tok.size()) throw std::invalid_argument(tok);
                } catch (const std::exception&) {
                    throw ConfigError("region '" + text + "': '" + tok + "' is not a number");
                }
            }
        }
        if (head == "full" && nums.empty()) {
            parts.push_back(full());
        } else if (head == "hemisphere" && nums.size() == 3) {
            parts.push_back(hemisphere(Vec3(nums[0], nums[1], nums[2])));
        } else if (head == "cap" && nums.size() == 4) {
            parts.push_back(cap(Vec3(nums[0], nums[1], nums[2]), nums[3]));
        } else {
            throw ConfigError("region '" + text + "': expected full, hemisphere:x,y,z or cap:x,y,z,angle");
        }
    }
    if (parts.empty()) throw ConfigError("empty region");
    return parts.size() == 1 ? parts.front() : union_of(std::move(parts));
}

// ---------------------------------------------------------------------------------------
// Measures

SphericalMeasure::SphericalMeasure(Density d)
    : m_rep(std::move(d))
{
    const auto& den = density();
    if (!den.grid || den.values.size() != den.grid->size()) throw ConfigError("density does not match its grid");
    double scale = 0.0;
    for (double v : den.values) scale = std::max(scale, std::abs(v));
    for (std::size_t i = 0; i < den.values.size(); ++i) {
        if (!std::isfinite(den.values[i]) || den.values[i] < -1e-6 * scale) {
            throw NumericalError("measure density is negative or not finite", i);
        }
    }
}

SphericalMeasure::SphericalMeasure(Atomic a)
    : m_rep(std::move(a))
{
    const auto& at = atomic();
    if (at.points.size() != at.masses.size()) throw ConfigError("atom points and masses differ in count");
    for (double m : at.masses) {
        if (!(m >= 0.0) || !std::isfinite(m)) throw ConfigError("atom masses must be finite and nonnegative");
    }
}

double SphericalMeasure::total() const
{
    return (*this)(RegionSpec::full());
}

double SphericalMeasure::operator()(const RegionSpec& region) const
{
    if (is_atomic()) {
        const auto& a = atomic();
        std::vector<double> parts;
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            if (region.contains(a.points[i])) parts.push_back(a.masses[i]);
        }
        return stable_sum(parts);
    }
    const auto& d = density();
    const auto w = region.weights(*d.grid);
    std::vector<double> parts(d.values.size());
    for (std::size_t i = 0; i < parts.size(); ++i) parts[i] = w[i] * d.values[i];
    return stable_sum(parts);
}

double SphericalMeasure::min_value() const
{
    const auto& v = is_atomic() ? atomic().masses : density().values;
    return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
}

double SphericalMeasure::max_value() const
{
    const auto& v = is_atomic() ? atomic().masses : density().values;
    return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

Json SphericalMeasure::to_json() const
{
    Json doc;
    Json rows = Json::array();
    if (is_atomic()) {
        doc["kind"] = "atomic";
        const auto& a = atomic();
        for (std::size_t i = 0; i < a.points.size(); ++i) {
            rows.push_back(Json::array({a.points[i].x(), a.points[i].y(), a.points[i].z(), a.masses[i]}));
        }
        doc["columns"] = Json::array({"x", "y", "z", "mass"});
    } else {
        doc["kind"] = "density";
        const auto& d = density();
        doc["level"] = d.grid->level();
        for (std::size_t i = 0; i < d.values.size(); ++i) {
            rows.push_back(Json::array({i, d.values[i], d.grid->weights()[i]}));
        }
        doc["columns"] = Json::array({"node", "value", "weight"});
    }
    Json summary;
    summary["total"] = total();
    summary["min"] = min_value();
    summary["max"] = max_value();
    if (!is_atomic() && min_value() > 0.0) {
        summary["lambda"] = std::max(max_value(), 1.0 / min_value());
    } else {
        summary["lambda"] = nullptr;
    }
    doc["summary"] = summary;
    doc["rows"] = rows;
    return doc;
}

// ---------------------------------------------------------------------------------------

namespace {

/// Solid angle of the spherical triangle with unit vertices a, b, c.
double solid_angle(const Vec3& a, const Vec3& b, const Vec3& c)
{
    const double num = std::abs(a.dot(b.cross(c)));
    const double den = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    return 2.0 * std::atan2(num, den);
}

using SphereFn = std::function<double(const Vec3&)>;

double sphere_rule(const Vec3& a, const Vec3& b, const Vec3& c, const SphereFn& g)
{
    const double area = solid_angle(a, b, c);
    const Vec3 p0 = (4.0 * a + b + c).normalized();
    const Vec3 p1 = (a + 4.0 * b + c).normalized();
    const Vec3 p2 = (a + b + 4.0 * c).normalized();
    return area * (g(p0) + g(p1) + g(p2)) / 3.0;
}

/// Adaptive midpoint subdivision with Richardson correction of the O(h^2) rule.
double integrate_sphere_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const SphereFn& g, double coarse,
                                 double tol, int depth)
{
    const Vec3 ab = (a + b).normalized();
    const Vec3 bc = (b + c).normalized();
    const Vec3 ca = (c + a).normalized();
    const double i0 = sphere_rule(a, ab, ca, g);
    const double i1 = sphere_rule(ab, b, bc, g);
    const double i2 = sphere_rule(ca, bc, c, g);
    const double i3 = sphere_rule(ab, bc, ca, g);
    const double fine = i0 + i1 + i2 + i3;
    if (depth <= 0 || std::abs(fine - coarse) <= tol) return fine + (fine - coarse) / 3.0;
    const double sub_tol = tol / 2.0;
    return integrate_sphere_triangle(a, ab, ca, g, i0, sub_tol, depth - 1) +
           integrate_sphere_triangle(ab, b, bc, g, i1, sub_tol, depth - 1) +
           integrate_sphere_triangle(ca, bc, c, g, i2, sub_tol, depth - 1) +
           integrate_sphere_triangle(ab, bc, ca, g, i3, sub_tol, depth - 1);
}

using PlaneFn = std::function<double(const Vec3&)>;

/// 7-point degree-5 rule on a planar triangle embedded in R^3.
double plane_rule(const Vec3& a, const Vec3& b, const Vec3& c, const PlaneFn& g)
{
    static const double s15 = std::sqrt(15.0);
    static const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
    static const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
    const double area = 0.5 * (b - a).cross(c - a).norm();
    auto at = [&](double x, double y, double z) { return g(x * a + y * b + z * c); };
    double s = 0.225 * at(1.0 / 3, 1.0 / 3, 1.0 / 3);
    s += w1 * (at(a1, a1, b1) + at(a1, b1, a1) + at(b1, a1, a1));
    s += w2 * (at(a2, a2, b2) + at(a2, b2, a2) + at(b2, a2, a2));
    return area * s;
}

double integrate_plane_triangle(const Vec3& a, const Vec3& b, const Vec3& c, const PlaneFn& g, double coarse,
                                double tol, int depth)
{
    const Vec3 ab = 0.5 * (a + b);
    const Vec3 bc = 0.5 * (b + c);
    const Vec3 ca = 0.5 * (c + a);
    const double i0 = plane_rule(a, ab, ca, g);
    const double i1 = plane_rule(ab, b, bc, g);
    const double i2 = plane_rule(ca, bc, c, g);
    const double i3 = plane_rule(ab, bc, ca, g);
    const double fine = i0 + i1 + i2 + i3;
    if (depth <= 0 || std::abs(fine - coarse) <= tol) return fine;
    const double sub_tol = tol / 2.0;
    return integrate_plane_triangle(a, ab, ca, g, i0, sub_tol, depth - 1) +
           integrate_plane_triangle(ab, b, bc, g, i1, sub_tol, depth - 1) +
           integrate_plane_triangle(ca, bc, c, g, i2, sub_tol, depth - 1) +
           integrate_plane_triangle(ab, bc, ca, g, i3, sub_tol, depth - 1);
}

constexpr double kQuadRelTol = 1e-12;
constexpr int kQuadDepth = 14;

/// b^(1-p) * integral over the facet of |x|^(q-3).
double polytope_boundary_facet(const Polytope& poly, const HullFacet& f, double p, double q)
{
    const double e = q - 3.0;
    auto g = [e](const Vec3& x) { return std::pow(x.squaredNorm(), 0.5 * e); };
    double sum = 0.0;
    for (const auto& t : f.triangles) {
        const Vec3& a = poly.vertices[t[0]];
        const Vec3& b = poly.vertices[t[1]];
        const Vec3& c = poly.vertices[t[2]];
        const double coarse = plane_rule(a, b, c, g);
        sum += integrate_plane_triangle(a, b, c, g, coarse, kQuadRelTol * std::abs(coarse), kQuadDepth);
    }
    return std::pow(f.offset, 1.0 - p) * sum;
}

/// Integral of rho^q over the radial cone of the facet.
double polytope_radial_facet(const Polytope& poly, const HullFacet& f, double q)
{
    auto g = [&](const Vec3& w) { return std::pow(f.offset / f.normal.dot(w), q); };
    double sum = 0.0;
    for (const auto& t : f.triangles) {
        const Vec3 a = poly.vertices[t[0]].normalized();
        const Vec3 b = poly.vertices[t[1]].normalized();
        const Vec3 c = poly.vertices[t[2]].normalized();
        const double coarse = sphere_rule(a, b, c, g);
        sum += integrate_sphere_triangle(a, b, c, g, coarse, kQuadRelTol * std::abs(coarse), kQuadDepth);
    }
    return sum;
}

void require_exponent(double q)
{
    if (!(q > 0.0) || !std::isfinite(q)) throw ConfigError("q must be a positive number");
}

/// Per-node boundary integrand |Dh|^(q-3) h^(1-p) det(Hess h + h I) of a smooth body.
std::vector<double> smooth_boundary_integrand(const ConvexBody& body, double p, double q, const GridPtr& grid)
{
    const auto h = sample_support(body, grid);
    const auto det = curvature_density(body, grid);
    std::vector<double> out(grid->size());
    parallel_for(grid->size(), [&](std::size_t i) {
        const Vec3 g = support_tangent_gradient(body, *grid, i);
        const double r2 = g.squaredNorm() + h[i] * h[i];
        out[i] = std::pow(r2, 0.5 * (q - 3.0)) * std::pow(h[i], 1.0 - p) * det[i];
    });
    return out;
}

double ellipsoid_boundary_integrand(const Ellipsoid& e, double p, double q, const Vec3& v)
{
    const double h = ellipsoid_support(e, v);
    const double r2 = ellipsoid_gradient(e, v).squaredNorm();
    return std::pow(r2, 0.5 * (q - 3.0)) * std::pow(h, 1.0 - p) * ellipsoid_curvature(e, v);
}

} // namespace

GridPtr measure_grid(const ConvexBody& body, GridPtr grid)
{
    if (body.kind() == ConvexBody::Kind::SupportGrid) return body.as_support_grid().u.grid_ptr();
    return grid ? grid : build_geodesic_grid(4);
}

SphericalMeasure surface_area_measure(const ConvexBody& body, GridPtr grid)
{
    if (body.kind() == ConvexBody::Kind::Polytope) {
        SphericalMeasure::Atomic a;
        for (const auto& f : body.as_polytope().facets) {
            a.points.push_back(f.normal);
            a.masses.push_back(f.area);
        }
        return SphericalMeasure(std::move(a));
    }
    grid = measure_grid(body, grid);
    const auto det = curvature_density(body, grid);
    return SphericalMeasure(SphericalMeasure::Density{grid, {det.values().begin(), det.values().end()}});
}

SphericalMeasure cone_volume_measure(const ConvexBody& body, GridPtr grid)
{
    if (body.kind() == ConvexBody::Kind::Polytope) {
        SphericalMeasure::Atomic a;
        for (const auto& f : body.as_polytope().facets) {
            a.points.push_back(f.normal);
            a.masses.push_back(f.offset * f.area / 3.0);
        }
        return SphericalMeasure(std::move(a));
    }
    grid = measure_grid(body, grid);
    const auto det = curvature_density(body, grid);
    const auto h = sample_support(body, grid);
    std::vector<double> vals(grid->size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = h[i] * det[i] / 3.0;
    return SphericalMeasure(SphericalMeasure::Density{grid, std::move(vals)});
}

double dual_curvature_radial(const ConvexBody& body, double q, const RegionSpec& region, GridPtr grid)
{
    require_exponent(q);
    if (body.kind() == ConvexBody::Kind::Polytope) {
        const auto& poly = body.as_polytope();
        std::vector<double> parts;
        for (const auto& f : poly.facets) {
            if (region.contains(f.normal)) parts.push_back(polytope_radial_facet(poly, f, q));
        }
        return stable_sum(parts);
    }
    grid = measure_grid(body, grid);
    if (body.kind() == ConvexBody::Kind::Ellipsoid) {
        const auto& e = body.as_ellipsoid();
        return integrate_over(
            *grid, [&](const Vec3& w) { return std::pow(ellipsoid_radial(e, w), q); },
            [&](const Vec3& w) { return region.contains(ellipsoid_normal(e, ellipsoid_radial(e, w) * w)); });
    }
    if (region.is_full()) {
        std::vector<double> vals(grid->size());
        parallel_for(grid->size(), [&](std::size_t i) {
            vals[i] = std::pow(radial(body, grid->node(i)), q) * grid->weights()[i];
        });
        return stable_sum(vals);
    }
    // The Gauss image of a Wulff facet cone is its node; each cone carries the share of the
    // node's weight that lies in the region, so both forms see the same region boundary.
    auto share = region.weights(*grid);
    for (std::size_t j = 0; j < share.size(); ++j) share[j] = std::clamp(share[j] / grid->weights()[j], 0.0, 1.0);
    return integrate_over(
        *grid,
        [&](const Vec3& w) {
            const auto hit = radial_gauss(body, w);
            double s = 0.0;
            for (const auto& n : hit.normals) s += share[grid->nearest_node(n)];
            return std::pow(hit.point.norm(), q) * s / static_cast<double>(hit.normals.size());
        },
        [](const Vec3&) { return true; });
}

double lp_dual_curvature(const ConvexBody& body, double p, double q, const RegionSpec& region, GridPtr grid)
{
    require_exponent(q);
    if (!std::isfinite(p)) throw ConfigError("p must be finite");
    if (body.kind() == ConvexBody::Kind::Polytope) {
        const auto& poly = body.as_polytope();
        std::vector<double> parts;
        for (const auto& f : poly.facets) {
            if (region.contains(f.normal)) parts.push_back(polytope_boundary_facet(poly, f, p, q));
        }
        return stable_sum(parts);
    }
    grid = measure_grid(body, grid);
    if (body.kind() == ConvexBody::Kind::Ellipsoid) {
        const auto& e = body.as_ellipsoid();
        return integrate_over(
            *grid, [&](const Vec3& v) { return ellipsoid_boundary_integrand(e, p, q, v); },
            [&](const Vec3& v) { return region.contains(v); });
    }
    auto vals = smooth_boundary_integrand(body, p, q, grid);
    const auto w = region.weights(*grid);
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] *= w[i];
    return stable_sum(vals);
}

double dual_curvature_boundary(const ConvexBody& body, double q, const RegionSpec& region, GridPtr grid)
{
    return lp_dual_curvature(body, 0.0, q, region, std::move(grid));
}

double density_lambda(const ScalarField& f)
{
    const double lo = f.min();
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return std::max(f.max(), 1.0 / lo);
}

DensityResult lp_dual_density(const ConvexBody& body, double p, double q, GridPtr grid)
{
    if (body.kind() == ConvexBody::Kind::Polytope) throw ConfigError("density requires a smooth body");
    grid = measure_grid(body, grid);
    auto vals = smooth_boundary_integrand(body, p, q, grid);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        if (!(vals[i] > 0.0)) throw DegeneracyError("L_p dual curvature density is not positive", i);
    }
    DensityResult r{ScalarField(grid, std::move(vals)), 1.0};
    r.lambda = density_lambda(r.f);
    return r;
}

std::pair<double, double> equivariance_pushforward(const ConvexBody& polytope, const Mat3& phi,
                                                   const RegionSpec& region)
{
    if (polytope.kind() != ConvexBody::Kind::Polytope) throw ConfigError("equivariance check requires a polytope");
    const double det = phi.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-14 * std::pow(phi.norm(), 3)) {
        throw ConfigError("linear map is singular");
    }
    const auto image = polytope.transformed(phi);
    std::vector<double> lhs;
    for (const auto& f : image.as_polytope().facets) {
        const Vec3 back = (phi.transpose() * f.normal).normalized();
        if (region.contains(back)) lhs.push_back(f.offset * f.area / 3.0);
    }
    std::vector<double> rhs;
    for (const auto& f : polytope.as_polytope().facets) {
        if (region.contains(f.normal)) rhs.push_back(f.offset * f.area / 3.0);
    }
    return {stable_sum(lhs), std::abs(det) * stable_sum(rhs)};
}

// ---------------------------------------------------------------------------------------
// Planar Monge-Ampere

bool polygon_contains(const Polygon& poly, const Vec2& x, double tol)
{
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 e = poly[(i + 1) % n] - poly[i];
        const Vec2 d = x - poly[i];
        if (e.x() * d.y() - e.y() * d.x() < -tol * e.norm()) return false;
    }
    return true;
}

double hull_area(std::vector<Vec2> pts)
{
    if (pts.size() < 3) return 0.0;
    std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
        return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
    });
    auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
        return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
    };
    std::vector<Vec2> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    double area = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const Vec2& a = h[i];
        const Vec2& b = h[(i + 1) % h.size()];
        area += a.x() * b.y() - a.y() * b.x();
    }
    return 0.5 * std::abs(area);
}

double monge_ampere_measure_pl(std::span<const AffinePiece> pieces, const Polygon& domain, const Polygon& region)
{
    if (pieces.empty()) throw ConfigError("piecewise-linear function needs at least one piece");
    if (domain.size() < 3 || region.size() < 3) throw ConfigError("polygons need at least 3 vertices");
    const std::size_t n = pieces.size();
    double scale = 1.0;
    for (const auto& pc : pieces) scale = std::max({scale, pc.gradient.norm(), std::abs(pc.offset)});
    for (const auto& x : domain) scale = std::max(scale, x.norm());
    const double tol = 1e-10 * scale;

    auto value = [&](const Vec2& x) {
        double v = -std::numeric_limits<double>::infinity();
        for (const auto& pc : pieces) v = std::max(v, pc.gradient.dot(x) + pc.offset);
        return v;
    };

    std::vector<Vec2> vertices;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            for (std::size_t k = j + 1; k < n; ++k) {
                Mat2 m;
                m.row(0) = (pieces[i].gradient - pieces[j].gradient).transpose();
                m.row(1) = (pieces[i].gradient - pieces[k].gradient).transpose();
                const double det = m.determinant();
                if (std::abs(det) < 1e-14 * scale * scale) continue;
                const Vec2 rhs(pieces[j].offset - pieces[i].offset, pieces[k].offset - pieces[i].offset);
                const Vec2 x = m.inverse() * rhs;
                if (!x.allFinite()) continue;
                if (pieces[i].gradient.dot(x) + pieces[i].offset < value(x) - tol) continue;
                if (!polygon_contains(domain, x) || !polygon_contains(region, x)) continue;
                const bool seen = std::any_of(vertices.begin(), vertices.end(),
                                              [&](const Vec2& y) { return (y - x).norm() <= 1e3 * tol; });
                if (!seen) vertices.push_back(x);
            }
        }
    }

    double total = 0.0;
    for (const auto& x : vertices) {
        const double v = value(x);
        std::vector<Vec2> active;
        for (const auto& pc : pieces) {
            if (pc.gradient.dot(x) + pc.offset >= v - tol) active.push_back(pc.gradient);
        }
        total += hull_area(std::move(active));
    }
    return total;
}

} // namespace dualmink
