#include <doctest.h>

#include "oracles.hpp"

#include <dualmink/errors.hpp>
#include <dualmink/sphere_grid.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace dualmink;
constexpr double kPi = std::numbers::pi;

TEST_CASE("geodesic grid node counts and levels")
{
    CHECK(build_geodesic_grid(0)->size() == 12);
    CHECK(build_geodesic_grid(3)->size() == 642);
    for (int level = 0; level <= 5; ++level) {
        CHECK(build_geodesic_grid(level)->size() == 10u * (1u << (2 * level)) + 2u);
    }
    CHECK_THROWS_AS(build_geodesic_grid(-1), ConfigError);
    CHECK_THROWS_AS(build_geodesic_grid(8), ConfigError);
    CHECK(build_geodesic_grid(2) == build_geodesic_grid(2));
}

TEST_CASE("grid invariants: unit nodes, weights, frames, stencils")
{
    for (int level = 1; level <= 5; ++level) {
        auto g = build_geodesic_grid(level);
        double total = 0.0;
        for (std::size_t i = 0; i < g->size(); ++i) {
            const Vec3& v = g->node(i);
            CHECK(std::abs(v.norm() - 1.0) < 1e-12);
            const auto& f = g->frame(i);
            CHECK(std::abs(f.e1.dot(f.e2)) < 1e-12);
            CHECK(std::abs(f.e1.dot(v)) < 1e-12);
            CHECK(std::abs(f.e2.dot(v)) < 1e-12);
            CHECK(std::abs(f.e1.norm() - 1.0) < 1e-12);
            CHECK(std::abs(f.e2.norm() - 1.0) < 1e-12);
            CHECK(g->stencil(i).size() >= 6);
            CHECK(g->weights()[i] > 0.0);
            total += g->weights()[i];
        }
        CHECK(std::abs(total - 4 * kPi) / (4 * kPi) < 1e-6);
    }
}

TEST_CASE("quadrature of constants, quadratics, and exp")
{
    auto g = build_geodesic_grid(3);
    CHECK(quadrature(ScalarField::constant(g, 1.0)) == doctest::Approx(4 * kPi).epsilon(1e-12));
    auto z2 = ScalarField::sample(g, [](const Vec3& v) { return v.z() * v.z(); });
    CHECK(std::abs(quadrature(z2) - 4 * kPi / 3) < 1e-4);
    auto xy = ScalarField::sample(g, [](const Vec3& v) { return v.x() * v.y() + 0.5 * v.x() * v.x(); });
    CHECK(std::abs(quadrature(xy) - 2 * kPi / 3) < 1e-4);

    // Polar-angle reduction: int exp(<v,e1>) = 2 pi int_{-1}^{1} e^t dt.
    double reference = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [](double t) { return 2 * kPi * std::exp(t); }, -1.0, 1.0);
    for (int level : {3, 4, 5}) {
        auto ex = ScalarField::sample(build_geodesic_grid(level), [](const Vec3& v) { return std::exp(v.x()); });
        CHECK(std::abs(quadrature(ex) - reference) / reference < 1e-8);
    }
}

TEST_CASE("quadrature is deterministic across repeated evaluation")
{
    auto g = build_geodesic_grid(4);
    auto f = ScalarField::sample(g, [](const Vec3& v) { return std::sin(3 * v.x()) + v.y() * v.z(); });
    CHECK(quadrature(f) == quadrature(f));
}

TEST_CASE("spherical gradient: constants and linear restrictions")
{
    auto g = build_geodesic_grid(4);
    auto c = ScalarField::constant(g, 2.5);
    const Vec3 a(0.3, -0.7, 1.1);
    auto lin = ScalarField::sample(g, [&](const Vec3& v) { return v.dot(a); });
    double worst_const = 0.0;
    double worst_lin = 0.0;
    for (std::size_t i = 0; i < g->size(); ++i) {
        worst_const = std::max(worst_const, spherical_gradient(c, i).norm());
        const Vec3& v = g->node(i);
        Vec3 expected = a - v.dot(a) * v;
        worst_lin = std::max(worst_lin, (spherical_gradient_ambient(lin, i) - expected).norm());
    }
    CHECK(worst_const < 1e-12);
    CHECK(worst_lin < 1e-6);
}

TEST_CASE("spherical gradient of an ellipsoid support function vs finite differences")
{
    const Vec3 r(1.0, 1.2, 1.5);
    auto h = [&](const Vec3& x) { return oracle::ellipsoid_support(r, x); };
    auto g = build_geodesic_grid(4);
    auto u = ScalarField::sample(g, h);

    std::size_t pole = g->nearest_node(Vec3::UnitZ());
    REQUIRE((g->node(pole) - Vec3::UnitZ()).norm() < 1e-14);
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); i += 7) {
        Vec3 fd = oracle::fd_spherical_gradient(h, g->node(i));
        worst = std::max(worst, (spherical_gradient_ambient(u, i) - fd).norm());
    }
    CHECK(worst < 1e-4);
    // Frame-invariant check at v = e3.
    Vec3 fd = oracle::fd_spherical_gradient(h, g->node(pole));
    CHECK(std::abs(spherical_gradient(u, pole).norm() - fd.norm()) < 1e-4);
}

TEST_CASE("ma_operator on balls")
{
    auto g = build_geodesic_grid(4);
    for (double r : {1.0, 0.3, 2.7}) {
        auto ma = ma_operator(ScalarField::constant(g, r));
        double worst = 0.0;
        for (double m : ma.values()) worst = std::max(worst, std::abs(m - r * r));
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("ma_operator of an ellipsoid support function vs finite differences")
{
    const Vec3 r(1.0, 1.2, 1.5);
    auto h = [&](const Vec3& x) { return oracle::ellipsoid_support(r, x); };
    auto g = build_geodesic_grid(4);
    auto ma = ma_operator(ScalarField::sample(g, h));
    double worst = 0.0;
    for (std::size_t i = 0; i < g->size(); i += 3) {
        double fd = oracle::fd_ma(h, g->node(i));
        worst = std::max(worst, std::abs(ma[i] - fd) / fd);
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("convexity indicator is nonnegative for sampled support functions")
{
    auto g = build_geodesic_grid(4);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> axis(0.6, 1.6);
    for (int trial = 0; trial < 5; ++trial) {
        Vec3 r(axis(rng), axis(rng), axis(rng));
        Vec3 c(0.1 * trial, -0.05 * trial, 0.02);
        auto u = ScalarField::sample(g, [&](const Vec3& v) { return oracle::ellipsoid_support(r, v) + c.dot(v); });
        CHECK(min_curvature_eigenvalue(u) >= -1e-6);
        for (double m : ma_operator(u).values()) CHECK(m >= -1e-6);
    }
}

TEST_CASE("derivatives are unavailable on the level-0 grid")
{
    auto g = build_geodesic_grid(0);
    CHECK_THROWS_AS(ma_operator(ScalarField::constant(g, 1.0)), NumericalError);
}

TEST_CASE("field validation and point location")
{
    auto g = build_geodesic_grid(2);
    CHECK_THROWS_AS(ScalarField(g, std::vector<double>(3, 1.0)), ConfigError);
    std::vector<double> bad(g->size(), 1.0);
    bad[5] = std::nan("");
    CHECK_THROWS_AS(ScalarField(g, bad), NumericalError);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (int k = 0; k < 50; ++k) {
        Vec3 v(n(rng), n(rng), n(rng));
        v.normalize();
        auto [tri, bary] = g->locate(v);
        CHECK(bary.minCoeff() >= -1e-12);
        CHECK(std::abs(bary.sum() - 1.0) < 1e-12);
        Vec3 p = Vec3::Zero();
        for (int j = 0; j < 3; ++j) p += bary[j] * g->node(g->triangles()[tri][j]);
        CHECK((p.normalized() - v).norm() < 1e-12);
    }
}
