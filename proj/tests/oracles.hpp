// Test-only reference computations. Nothing here calls into the library's numerical paths.
#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;

/// 1-homogeneous support function of the axis-aligned ellipsoid with half-axes (a, b, c).
inline double ellipsoid_support(const Vec3& half_axes, const Vec3& x)
{
    return std::sqrt((half_axes.array().square() * x.array().square()).sum());
}

/// Tangent basis at v built independently from the library's frames.
inline std::pair<Vec3, Vec3> tangent_basis(const Vec3& v)
{
    Vec3 ref = std::abs(v.x()) < 0.8 ? Vec3::UnitX() : Vec3::UnitY();
    Vec3 t1 = (ref - ref.dot(v) * v).normalized();
    return {t1, v.cross(t1)};
}

/// Central-difference gradient of a 1-homogeneous function on R^3, projected to T_v S^2.
inline Vec3 fd_spherical_gradient(const std::function<double(const Vec3&)>& h, const Vec3& v, double step = 1e-5)
{
    Vec3 g;
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e[k] = step;
        g[k] = (h(v + e) - h(v - e)) / (2 * step);
    }
    return g - g.dot(v) * v;
}

/// det(Hess u + u I) via central differences of the 1-homogeneous extension on T_v S^2.
inline double fd_ma(const std::function<double(const Vec3&)>& h, const Vec3& v, double step = 1e-4)
{
    auto [t1, t2] = tangent_basis(v);
    const Vec3 dirs[2] = {t1, t2};
    Mat2 m;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const Vec3 a = step * dirs[i];
            const Vec3 b = step * dirs[j];
            m(i, j) = (h(v + a + b) - h(v + a - b) - h(v - a + b) + h(v - a - b)) / (4 * step * step);
        }
    }
    return m.determinant();
}

/// Surface area of the axis-aligned ellipsoid by tensor Gauss-Kronrod over (theta, phi).
inline double ellipsoid_surface_area(const Vec3& r)
{
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [&](double theta) {
        auto f = [&](double phi) {
            Vec3 dt(r.x() * std::cos(theta) * std::cos(phi), r.y() * std::cos(theta) * std::sin(phi),
                    -r.z() * std::sin(theta));
            Vec3 dp(-r.x() * std::sin(theta) * std::sin(phi), r.y() * std::sin(theta) * std::cos(phi), 0.0);
            return dt.cross(dp).norm();
        };
        return gauss_kronrod<double, 61>::integrate(f, 0.0, 2 * std::numbers::pi, 10, 1e-13);
    };
    return gauss_kronrod<double, 61>::integrate(inner, 0.0, std::numbers::pi, 10, 1e-13);
}

/// Adaptive 2-D integral over a rectangle.
inline double integrate_rect(const std::function<double(double, double)>& f, double x0, double x1, double y0,
                             double y1)
{
    using boost::math::quadrature::gauss_kronrod;
    auto inner = [&](double x) {
        return gauss_kronrod<double, 31>::integrate([&](double y) { return f(x, y); }, y0, y1, 15, 1e-14);
    };
    return gauss_kronrod<double, 31>::integrate(inner, x0, x1, 15, 1e-14);
}

/// Radial function of an axis-aligned centered ellipsoid by bisection on membership.
inline double ellipsoid_radial_bisect(const Vec3& r, const Vec3& w)
{
    auto inside = [&](double t) { return ((t * w).array() / r.array()).square().sum() <= 1.0; };
    double lo = 0.0;
    double hi = r.maxCoeff() * 2;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (inside(mid) ? lo : hi) = mid;
    }
    return lo;
}

/// Maximal inscribed ellipsoid volume for {x : <a_j, x> <= b_j}, by a barrier method whose
/// Hessian is taken by finite differences of the gradient, started from `x0` with a small ball.
inline double john_volume_multistart(const std::vector<Vec3>& a, const std::vector<double>& b, const Vec3& x0)
{
    using Vec9 = Eigen::Matrix<double, 9, 1>;
    using Mat3 = Eigen::Matrix3d;
    auto unpack = [](const Vec9& z) {
        Mat3 m;
        m << z[0], z[3], z[4], z[3], z[1], z[5], z[4], z[5], z[2];
        return m;
    };
    double smin = 1e300;
    for (std::size_t j = 0; j < a.size(); ++j) smin = std::min(smin, b[j] - a[j].dot(x0));
    Vec9 z = Vec9::Zero();
    z[0] = z[1] = z[2] = 0.1 * smin;
    z.tail<3>() = x0;
    auto value = [&](const Vec9& y, double t) {
        Mat3 m = unpack(y);
        Eigen::SelfAdjointEigenSolver<Mat3> es(m);
        if (es.eigenvalues().minCoeff() <= 0) return 1e300;
        double f = -t * std::log(es.eigenvalues().prod());
        for (std::size_t j = 0; j < a.size(); ++j) {
            double s = b[j] - a[j].dot(y.tail<3>()) - (m * a[j]).norm();
            if (s <= 0) return 1e300;
            f -= std::log(s);
        }
        return f;
    };
    auto gradient = [&](const Vec9& y, double t) {
        const Mat3 m = unpack(y);
        const Mat3 mi = m.inverse();
        Vec9 g = Vec9::Zero();
        const int rows[6] = {0, 1, 2, 0, 0, 1};
        const int cols[6] = {0, 1, 2, 1, 2, 2};
        for (int k = 0; k < 6; ++k) g[k] = -t * (k < 3 ? mi(rows[k], cols[k]) : 2 * mi(rows[k], cols[k]));
        for (std::size_t j = 0; j < a.size(); ++j) {
            const Vec3 ma = m * a[j];
            const Vec3 dir = ma.normalized();
            const double s = b[j] - a[j].dot(y.tail<3>()) - ma.norm();
            for (int k = 0; k < 6; ++k) {
                Mat3 e = Mat3::Zero();
                e(rows[k], cols[k]) = e(cols[k], rows[k]) = 1.0;
                g[k] += dir.dot(e * a[j]) / s;
            }
            g.tail<3>() += a[j] / s;
        }
        return g;
    };
    for (double t = 1.0; t < 1e9; t *= 8.0) {
        for (int it = 0; it < 100; ++it) {
            Vec9 g = gradient(z, t);
            Eigen::Matrix<double, 9, 9> hess;
            for (int k = 0; k < 9; ++k) {
                double h = 1e-8 * std::max(1.0, std::abs(z[k]));
                Vec9 p = z, q = z;
                p[k] += h;
                q[k] -= h;
                hess.col(k) = (gradient(p, t) - gradient(q, t)) / (2 * h);
            }
            hess = 0.5 * (hess + hess.transpose()).eval();
            Vec9 step = hess.ldlt().solve(-g);
            if (-g.dot(step) < 1e-10) break;
            double alpha = 1.0;
            double f0 = value(z, t);
            while (value(z + alpha * step, t) > f0 + 0.25 * alpha * g.dot(step) && alpha > 1e-12) alpha *= 0.5;
            z += alpha * step;
        }
    }
    return 4.0 / 3.0 * std::numbers::pi * unpack(z).determinant();
}

///
/// Area of the gradient image of v_eps = eps log sum exp((<g_i,x> + b_i) / eps) over a
/// rectangle: midpoint sampling of det D^2 v_eps on an n x n lattice. Approaches the
/// Monge-Ampere measure of max_i(<g_i,x> + b_i) as eps -> 0 with eps >> lattice spacing.
///
inline double mollified_ma_area(const std::vector<Eigen::Vector2d>& g, const std::vector<double>& b, double x0,
                                double x1, double y0, double y1, double eps, int n)
{
    const double hx = (x1 - x0) / n;
    const double hy = (y1 - y0) / n;
    std::vector<double> s(g.size());
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) {
            const Eigen::Vector2d x(x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy);
            double top = -INFINITY;
            for (std::size_t k = 0; k < g.size(); ++k) {
                s[k] = (g[k].dot(x) + b[k]) / eps;
                top = std::max(top, s[k]);
            }
            double z = 0.0;
            for (auto& v : s) z += (v = std::exp(v - top));
            Eigen::Vector2d mean = Eigen::Vector2d::Zero();
            Mat2 second = Mat2::Zero();
            for (std::size_t k = 0; k < g.size(); ++k) {
                mean += s[k] / z * g[k];
                second += s[k] / z * g[k] * g[k].transpose();
            }
            row += (second - mean * mean.transpose()).determinant();
        }
        total += row;
    }
    return total * hx * hy / (eps * eps);
}

} // namespace oracle
