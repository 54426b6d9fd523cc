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
#include <dualmink/body.hpp>
#include <dualmink/errors.hpp>
#include <dualmink/parallel.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dualmink {

namespace {

constexpr int kSampleLevel = 4;

} // namespace

Mat3 shape_matrix(const Ellipsoid& e)
{
    return e.axes * e.half_axes.asDiagonal();
}

double ellipsoid_support(const Ellipsoid& e, const Vec3& v)
{
    return e.center.dot(v) + (shape_matrix(e).transpose() * v).norm();
}

Vec3 ellipsoid_gradient(const Ellipsoid& e, const Vec3& v)
{
    const Mat3 a = shape_matrix(e);
    const Vec3 at = a.transpose() * v;
    return e.center + a * at / at.norm();
}

double ellipsoid_radial(const Ellipsoid& e, const Vec3& w)
{
    // |A^-1 (t w - X)| = 1, larger root.
    const Mat3 inv = e.half_axes.cwiseInverse().asDiagonal() * e.axes.transpose();
    const Vec3 a = inv * w;
    const Vec3 c = inv * e.center;
    const double aa = a.squaredNorm();
    const double ac = a.dot(c);
    const double disc = ac * ac - aa * (c.squaredNorm() - 1.0);
    return (ac + std::sqrt(std::max(disc, 0.0))) / aa;
}

Vec3 ellipsoid_normal(const Ellipsoid& e, const Vec3& x)
{
    const Mat3 inv = e.half_axes.cwiseInverse().asDiagonal() * e.axes.transpose();
    return (inv.transpose() * (inv * (x - e.center))).normalized();
}

double ellipsoid_curvature(const Ellipsoid& e, const Vec3& v)
{
    const double prod = e.half_axes.prod();
    const double n = (shape_matrix(e).transpose() * v).norm();
    return prod * prod / (n * n * n * n);
}

namespace {

double polytope_scale(const Polytope& p)
{
    double s = 0.0;
    for (const auto& v : p.vertices) s = std::max(s, v.norm());
    return std::max(s, 1.0);
}

double polytope_support(const Polytope& p, const Vec3& v)
{
    double h = -std::numeric_limits<double>::infinity();
    for (const auto& x : p.vertices) h = std::max(h, x.dot(v));
    return h;
}

double polytope_radial(const Polytope& p, const Vec3& w)
{
    double t = std::numeric_limits<double>::infinity();
    for (const auto& f : p.facets) {
        const double c = f.normal.dot(w);
        if (c > 0.0) t = std::min(t, f.offset / c);
    }
    return t;
}

double grid_radial(const ScalarField& u, const Vec3& w, std::vector<std::size_t>* argmin = nullptr)
{
    const auto& g = u.grid();
    double t = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double c = g.node(i).dot(w);
        if (c > 0.0) t = std::min(t, u[i] / c);
    }
    if (argmin) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double c = g.node(i).dot(w);
            if (c > 0.0 && u[i] / c <= t * (1.0 + 1e-12)) argmin->push_back(i);
        }
    }
    return t;
}

/// Unnormalized barycentric weights of v in a grid triangle: v = sum lam_k v_k.
std::pair<Triangle, Vec3> grid_cell(const SphericalGrid& g, const Vec3& v)
{
    const auto [t, lam_normalized] = g.locate(v);
    (void)lam_normalized;
    const Triangle tri = g.triangles()[t];
    Mat3 m;
    for (int k = 0; k < 3; ++k) m.col(k) = g.node(tri[k]);
    return {tri, m.partialPivLu().solve(v)};
}

Vec3 grid_node_gradient(const ScalarField& u, std::size_t i)
{
    return spherical_gradient_ambient(u, i) + u[i] * u.grid().node(i);
}

void require_unit(const Vec3& v, const char* what)
{
    if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-9) {
        throw ConfigError(std::string(what) + " must be a unit vector");
    }
}

} // namespace

ConvexBody::ConvexBody(Rep rep, const BodyOptions& opts)
    : m_rep(std::move(rep))
    , m_opts(opts)
{
    validate();
}

ConvexBody ConvexBody::ellipsoid(const Vec3& half_axes, const Vec3& center, const Mat3& axes,
                                 const BodyOptions& opts)
{
    return ConvexBody(Ellipsoid{center, half_axes, axes}, opts);
}

ConvexBody ConvexBody::ball(double radius, const BodyOptions& opts)
{
    return ellipsoid(Vec3::Constant(radius), Vec3::Zero(), Mat3::Identity(), opts);
}

ConvexBody ConvexBody::polytope(std::span<const Vec3> points, const BodyOptions& opts)
{
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!points[i].allFinite()) throw InvalidBodyError("vertex " + std::to_string(i) + " is not finite");
    }
    ConvexHull hull;
    try {
        hull = convex_hull(points);
    } catch (const NumericalError& e) {
        throw InvalidBodyError(std::string("polytope is not full-dimensional: ") + e.what());
    }
    Polytope p;
    std::vector<std::uint32_t> remap(points.size(), 0);
    for (auto idx : hull.vertices) {
        remap[idx] = static_cast<std::uint32_t>(p.vertices.size());
        p.vertices.push_back(points[idx]);
    }
    p.facets = merge_coplanar(hull);
    for (auto& f : p.facets) {
        for (auto& t : f.triangles) {
            for (auto& k : t) k = remap[k];
        }
    }
    return ConvexBody(std::move(p), opts);
}

ConvexBody ConvexBody::cube(double half_side, const BodyOptions& opts)
{
    std::vector<Vec3> pts;
    for (int i = 0; i < 8; ++i) {
        pts.emplace_back(i & 1 ? half_side : -half_side, i & 2 ? half_side : -half_side, i & 4 ? half_side : -half_side);
    }
    return polytope(pts, opts);
}

ConvexBody ConvexBody::support_grid(ScalarField u, const BodyOptions& opts)
{
    return ConvexBody(SupportGrid{std::move(u)}, opts);
}

void ConvexBody::validate() const
{
    switch (kind()) {
    case Kind::Ellipsoid: {
        const auto& e = as_ellipsoid();
        if (!e.half_axes.allFinite() || e.half_axes.minCoeff() <= 0.0) {
            throw InvalidBodyError("ellipsoid half-axes must be positive");
        }
        if (!e.center.allFinite()) throw InvalidBodyError("ellipsoid center is not finite");
        if (!e.axes.allFinite() || (e.axes.transpose() * e.axes - Mat3::Identity()).norm() > 1e-9) {
            throw InvalidBodyError("ellipsoid axes are not orthonormal");
        }
        const Mat3 inv = e.half_axes.cwiseInverse().asDiagonal() * e.axes.transpose();
        if ((inv * e.center).norm() >= 1.0) throw InvalidBodyError("origin is not interior to the ellipsoid");
        const auto grid = build_geodesic_grid(kSampleLevel);
        double hmin = std::numeric_limits<double>::infinity();
        for (const auto& v : grid->nodes()) hmin = std::min(hmin, ellipsoid_support(e, v));
        if (hmin < m_opts.rho_min) {
            throw InvalidBodyError("origin margin " + std::to_string(hmin) + " is below rho_min");
        }
        break;
    }
    case Kind::Polytope: {
        double bmin = std::numeric_limits<double>::infinity();
        for (const auto& f : as_polytope().facets) bmin = std::min(bmin, f.offset);
        if (!(bmin >= m_opts.rho_min)) {
            throw InvalidBodyError("origin margin " + std::to_string(bmin) + " is below rho_min");
        }
        break;
    }
    case Kind::SupportGrid: {
        const auto& u = as_support_grid().u;
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!(u[i] >= m_opts.rho_min)) {
                throw InvalidBodyError("support value " + std::to_string(u[i]) + " at node " + std::to_string(i) +
                                       " is below rho_min");
            }
        }
        const double lam = min_curvature_eigenvalue(u);
        if (lam < -m_opts.tol_convex) {
            throw InvalidBodyError("support field fails the convexity check (min eigenvalue " + std::to_string(lam) +
                                   ")");
        }
        break;
    }
    }
}

ConvexBody ConvexBody::scaled(double s) const
{
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("scale factor must be positive");
    switch (kind()) {
    case Kind::Ellipsoid: {
        auto e = as_ellipsoid();
        e.center *= s;
        e.half_axes *= s;
        return ConvexBody(e, m_opts);
    }
    case Kind::Polytope: {
        auto p = as_polytope();
        for (auto& v : p.vertices) v *= s;
        for (auto& f : p.facets) {
            f.offset *= s;
            f.area *= s * s;
        }
        return ConvexBody(std::move(p), m_opts);
    }
    case Kind::SupportGrid: {
        const auto& u = as_support_grid().u;
        std::vector<double> vals(u.values().begin(), u.values().end());
        for (auto& x : vals) x *= s;
        return ConvexBody(SupportGrid{ScalarField(u.grid_ptr(), std::move(vals))}, m_opts);
    }
    }
    throw ConfigError("unknown body kind");
}

ConvexBody ConvexBody::transformed(const Mat3& phi) const
{
    if (!phi.allFinite() || std::abs(phi.determinant()) < 1e-14) throw ConfigError("linear map is singular");
    switch (kind()) {
    case Kind::Ellipsoid: {
        const auto& e = as_ellipsoid();
        Eigen::JacobiSVD<Mat3> svd(phi * shape_matrix(e), Eigen::ComputeFullU);
        Mat3 axes = svd.matrixU();
        if (axes.determinant() < 0) axes.col(2) *= -1.0;
        return ConvexBody(Ellipsoid{phi * e.center, svd.singularValues(), axes}, m_opts);
    }
    case Kind::Polytope: {
        std::vector<Vec3> pts;
        for (const auto& v : as_polytope().vertices) pts.push_back(phi * v);
        return polytope(pts, m_opts);
    }
    case Kind::SupportGrid:
        throw ConfigError("linear images of support-grid bodies are not supported");
    }
    throw ConfigError("unknown body kind");
}

double support(const ConvexBody& body, const Vec3& v)
{
    require_unit(v, "support direction");
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid:
        return ellipsoid_support(body.as_ellipsoid(), v);
    case ConvexBody::Kind::Polytope:
        return polytope_support(body.as_polytope(), v);
    case ConvexBody::Kind::SupportGrid: {
        const auto& u = body.as_support_grid().u;
        const auto [tri, lam] = grid_cell(u.grid(), v);
        return lam[0] * u[tri[0]] + lam[1] * u[tri[1]] + lam[2] * u[tri[2]];
    }
    }
    return 0.0;
}

double radial(const ConvexBody& body, const Vec3& w)
{
    require_unit(w, "radial direction");
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid:
        return ellipsoid_radial(body.as_ellipsoid(), w);
    case ConvexBody::Kind::Polytope:
        return polytope_radial(body.as_polytope(), w);
    case ConvexBody::Kind::SupportGrid:
        return grid_radial(body.as_support_grid().u, w);
    }
    return 0.0;
}

Vec3 support_gradient(const ConvexBody& body, const Vec3& v)
{
    require_unit(v, "support direction");
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid:
        return ellipsoid_gradient(body.as_ellipsoid(), v);
    case ConvexBody::Kind::Polytope: {
        const auto& p = body.as_polytope();
        const double h = polytope_support(p, v);
        const double tol = 1e-12 * polytope_scale(p);
        std::size_t best = 0;
        int count = 0;
        for (std::size_t i = 0; i < p.vertices.size(); ++i) {
            if (p.vertices[i].dot(v) >= h - tol) {
                best = i;
                ++count;
            }
        }
        if (count > 1) {
            std::ostringstream msg;
            msg << "support function is not differentiable at (" << v.x() << ", " << v.y() << ", " << v.z()
                << "): " << count << " vertices attain the maximum";
            throw AmbiguityError(msg.str());
        }
        return p.vertices[best];
    }
    case ConvexBody::Kind::SupportGrid: {
        const auto& u = body.as_support_grid().u;
        const auto [tri, lam] = grid_cell(u.grid(), v);
        Vec3 x = Vec3::Zero();
        for (int k = 0; k < 3; ++k) {
            if (std::abs(lam[k]) > 1e-14) x += lam[k] * grid_node_gradient(u, tri[k]);
        }
        return x / lam.sum();
    }
    }
    return Vec3::Zero();
}

RadialGaussHit radial_gauss(const ConvexBody& body, const Vec3& w)
{
    require_unit(w, "radial direction");
    RadialGaussHit hit;
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid: {
        const auto& e = body.as_ellipsoid();
        hit.point = ellipsoid_radial(e, w) * w;
        hit.normals.push_back(ellipsoid_normal(e, hit.point));
        break;
    }
    case ConvexBody::Kind::Polytope: {
        const auto& p = body.as_polytope();
        hit.point = polytope_radial(p, w) * w;
        const double tol = 1e-10 * polytope_scale(p);
        for (const auto& f : p.facets) {
            if (std::abs(f.normal.dot(hit.point) - f.offset) <= tol) hit.normals.push_back(f.normal);
        }
        break;
    }
    case ConvexBody::Kind::SupportGrid: {
        const auto& u = body.as_support_grid().u;
        std::vector<std::size_t> active;
        hit.point = grid_radial(u, w, &active) * w;
        for (auto i : active) hit.normals.push_back(u.grid().node(i));
        break;
    }
    }
    return hit;
}

double volume(const ConvexBody& body)
{
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid:
        return 4.0 * std::numbers::pi / 3.0 * body.as_ellipsoid().half_axes.prod();
    case ConvexBody::Kind::Polytope: {
        const auto& p = body.as_polytope();
        std::vector<double> parts;
        for (const auto& f : p.facets) {
            for (const auto& t : f.triangles) {
                parts.push_back(p.vertices[t[0]].dot(p.vertices[t[1]].cross(p.vertices[t[2]])) / 6.0);
            }
        }
        return stable_sum(parts);
    }
    case ConvexBody::Kind::SupportGrid: {
        const auto& u = body.as_support_grid().u;
        const auto det = ma_operator(u);
        std::vector<double> vals(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) vals[i] = u[i] * det[i] / 3.0;
        return quadrature(u.grid(), vals);
    }
    }
    return 0.0;
}

ScalarField sample_support(const ConvexBody& body, GridPtr grid)
{
    if (body.kind() == ConvexBody::Kind::SupportGrid && body.as_support_grid().u.grid_ptr() == grid) {
        return body.as_support_grid().u;
    }
    std::vector<double> vals(grid->size());
    parallel_for(grid->size(), [&](std::size_t i) { vals[i] = support(body, grid->node(i)); });
    return ScalarField(std::move(grid), std::move(vals));
}

ScalarField curvature_density(const ConvexBody& body, GridPtr grid)
{
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid: {
        const auto& e = body.as_ellipsoid();
        return ScalarField::sample(std::move(grid), [&](const Vec3& v) { return ellipsoid_curvature(e, v); });
    }
    case ConvexBody::Kind::SupportGrid:
        if (body.as_support_grid().u.grid_ptr() != grid) {
            throw ConfigError("support-grid body queried on a different grid");
        }
        return ma_operator(body.as_support_grid().u);
    case ConvexBody::Kind::Polytope:
        break;
    }
    throw ConfigError("curvature density requires a smooth body");
}

Vec3 support_tangent_gradient(const ConvexBody& body, const SphericalGrid& grid, std::size_t i)
{
    const Vec3& v = grid.node(i);
    switch (body.kind()) {
    case ConvexBody::Kind::Ellipsoid: {
        const auto& e = body.as_ellipsoid();
        return ellipsoid_gradient(e, v) - ellipsoid_support(e, v) * v;
    }
    case ConvexBody::Kind::SupportGrid: {
        const auto& u = body.as_support_grid().u;
        if (&u.grid() != &grid) throw ConfigError("support-grid body queried on a different grid");
        return spherical_gradient_ambient(u, i);
    }
    case ConvexBody::Kind::Polytope:
        break;
    }
    throw ConfigError("support gradient field requires a smooth body");
}

// ---------------------------------------------------------------------------------------
// John ellipsoid

double JohnEllipsoid::volume() const
{
    return 4.0 * std::numbers::pi / 3.0 * half_axes.prod();
}

namespace {

using Vec9 = Eigen::Matrix<double, 9, 1>;
using Mat9 = Eigen::Matrix<double, 9, 9>;

struct Halfspace
{
    Vec3 a;
    double b;
};

const std::array<Mat3, 6>& sym_basis()
{
    static const std::array<Mat3, 6> basis = [] {
        std::array<Mat3, 6> e;
        for (auto& m : e) m.setZero();
        e[0](0, 0) = 1;
        e[1](1, 1) = 1;
        e[2](2, 2) = 1;
        e[3](0, 1) = e[3](1, 0) = 1;
        e[4](0, 2) = e[4](2, 0) = 1;
        e[5](1, 2) = e[5](2, 1) = 1;
        return e;
    }();
    return basis;
}

Mat3 unpack_m(const Vec9& z)
{
    Mat3 m;
    m << z[0], z[3], z[4], z[3], z[1], z[5], z[4], z[5], z[2];
    return m;
}

class JohnProblem
{
public:
    explicit JohnProblem(std::vector<Halfspace> cons)
        : m_cons(std::move(cons))
    {}

    /// t * (-log det M) - sum log s_j; +inf outside the domain.
    double value(const Vec9& z, double t) const
    {
        const Mat3 m = unpack_m(z);
        Eigen::LLT<Mat3> llt(m);
        if (llt.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
        const Mat3 l = llt.matrixL();
        double f = -t * 2.0 * l.diagonal().array().log().sum();
        const Vec3 x = z.tail<3>();
        for (const auto& c : m_cons) {
            const double s = c.b - c.a.dot(x) - (m * c.a).norm();
            if (!(s > 0.0)) return std::numeric_limits<double>::infinity();
            f -= std::log(s);
        }
        return f;
    }

    void derivatives(const Vec9& z, double t, Vec9& grad, Mat9& hess) const
    {
        const Mat3 m = unpack_m(z);
        const Mat3 minv = m.inverse();
        const auto& e = sym_basis();
        grad.setZero();
        hess.setZero();
        for (int a = 0; a < 6; ++a) {
            grad[a] = -t * (minv * e[a]).trace();
            for (int b = 0; b < 6; ++b) hess(a, b) = t * (minv * e[a] * minv * e[b]).trace();
        }
        const Vec3 x = z.tail<3>();
        for (const auto& c : m_cons) {
            const Vec3 y = m * c.a;
            const double ny = y.norm();
            const Vec3 g = y / ny;
            const double s = c.b - c.a.dot(x) - ny;
            Eigen::Matrix<double, 3, 6> jac;
            for (int a = 0; a < 6; ++a) jac.col(a) = e[a] * c.a;
            Vec9 ds;
            ds.head<6>() = -(g.transpose() * jac).transpose();
            ds.tail<3>() = -c.a;
            grad -= ds / s;
            hess += ds * ds.transpose() / (s * s);
            const Mat3 proj = Mat3::Identity() - g * g.transpose();
            hess.topLeftCorner<6, 6>() += jac.transpose() * proj * jac / (ny * s);
        }
    }

    std::size_t size() const { return m_cons.size(); }

private:
    std::vector<Halfspace> m_cons;
};

std::vector<Halfspace> john_constraints(const ConvexBody& body)
{
    std::vector<Halfspace> cons;
    if (body.kind() == ConvexBody::Kind::Polytope) {
        for (const auto& f : body.as_polytope().facets) cons.push_back({f.normal, f.offset});
    } else {
        const auto& u = body.as_support_grid().u;
        for (std::size_t i = 0; i < u.size(); ++i) cons.push_back({u.grid().node(i), u[i]});
    }
    return cons;
}

} // namespace

JohnEllipsoid john_ellipsoid(const ConvexBody& body, const JohnOptions& opts)
{
    if (body.kind() == ConvexBody::Kind::Ellipsoid) {
        const auto& e = body.as_ellipsoid();
        JohnEllipsoid out;
        out.center = e.center;
        std::array<int, 3> order = {0, 1, 2};
        std::sort(order.begin(), order.end(), [&](int a, int b) { return e.half_axes[a] < e.half_axes[b]; });
        for (int k = 0; k < 3; ++k) {
            out.half_axes[k] = e.half_axes[order[k]];
            out.axes.col(k) = e.axes.col(order[k]);
        }
        return out;
    }

    auto cons = john_constraints(body);
    double bmin = std::numeric_limits<double>::infinity();
    for (const auto& c : cons) bmin = std::min(bmin, c.b);
    JohnProblem problem(cons);

    Vec9 z = Vec9::Zero();
    z[0] = z[1] = z[2] = 0.5 * bmin;
    const double m = static_cast<double>(problem.size());
    const double gap_target = 1e-3 * opts.tol;
    double t = 1.0;
    int newton_total = 0;
    for (;;) {
        for (int it = 0;; ++it) {
            if (++newton_total > opts.max_newton * 20) {
                std::ostringstream msg;
                msg << "John ellipsoid barrier method did not converge (t = " << t << ", constraints = " << m << ")";
                throw NumericalError(msg.str());
            }
            Vec9 grad;
            Mat9 hess;
            problem.derivatives(z, t, grad, hess);
            const Vec9 step = hess.ldlt().solve(-grad);
            const double dec2 = -grad.dot(step);
            if (!std::isfinite(dec2)) throw NumericalError("John ellipsoid Newton system is singular");
            if (dec2 / 2.0 < 1e-12 || it >= opts.max_newton) break;
            const double f0 = problem.value(z, t);
            double alpha = 1.0;
            Vec9 trial = z + step;
            while (problem.value(trial, t) > f0 - 0.25 * alpha * dec2) {
                alpha *= 0.5;
                if (alpha < 1e-14) break;
                trial = z + alpha * step;
            }
            if (alpha < 1e-14) break;
            z = trial;
        }
        if (m / t < gap_target) break;
        t *= 20.0;
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(unpack_m(z));
    JohnEllipsoid out;
    out.center = z.tail<3>();
    out.half_axes = eig.eigenvalues();
    out.axes = eig.eigenvectors();
    if (out.axes.determinant() < 0) out.axes.col(0) *= -1.0;
    return out;
}

JohnContainment john_containment(const ConvexBody& body, const JohnEllipsoid& e)
{
    const Mat3 shape = e.shape();
    const Mat3 inv = shape.inverse();
    JohnContainment c;
    c.inner_excess = -std::numeric_limits<double>::infinity();
    c.outer_excess = -std::numeric_limits<double>::infinity();
    auto support_e = [&](const Vec3& v) { return e.center.dot(v) + (shape * v).norm(); };

    if (body.kind() == ConvexBody::Kind::Polytope) {
        const auto& p = body.as_polytope();
        for (const auto& f : p.facets) c.inner_excess = std::max(c.inner_excess, support_e(f.normal) - f.offset);
        for (const auto& x : p.vertices) c.outer_excess = std::max(c.outer_excess, (inv * (x - e.center)).norm() - 3.0);
        return c;
    }
    const auto grid = body.kind() == ConvexBody::Kind::SupportGrid ? body.as_support_grid().u.grid_ptr()
                                                                    : build_geodesic_grid(kSampleLevel);
    const auto h = sample_support(body, grid);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const Vec3& v = grid->node(i);
        c.inner_excess = std::max(c.inner_excess, support_e(v) - h[i]);
        // h_K(v) <= <X, v> + 3 |M v| in normalized form.
        c.outer_excess = std::max(c.outer_excess, (h[i] - e.center.dot(v)) / (shape * v).norm() - 3.0);
    }
    return c;
}

} // namespace dualmink
