#include <doctest.h>

#include "oracles.hpp"

#include <dualmink/errors.hpp>
#include <dualmink/measures.hpp>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace dualmink;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<Vec3> random_polytope_points(std::mt19937_64& rng, int n = 20)
{
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> r(0.8, 1.2);
    std::vector<Vec3> pts;
    for (int i = 0; i < n; ++i) pts.push_back(Vec3(g(rng), g(rng), g(rng)).normalized() * r(rng));
    return pts;
}

Mat3 random_map(std::mt19937_64& rng, double max_cond)
{
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        Mat3 m;
        for (int i = 0; i < 9; ++i) m.data()[i] = g(rng);
        Eigen::JacobiSVD<Mat3> svd(m);
        const auto s = svd.singularValues();
        if (s[0] / s[2] <= max_cond) return m;
    }
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST_CASE("cube measures are facet atoms")
{
    auto cube = ConvexBody::cube();
    auto s = surface_area_measure(cube);
    auto v = cone_volume_measure(cube);
    REQUIRE(s.is_atomic());
    REQUIRE(s.atomic().points.size() == 6);
    for (double m : s.atomic().masses) CHECK(m == doctest::Approx(4.0).epsilon(1e-12));
    for (double m : v.atomic().masses) CHECK(m == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(v.total() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(v(RegionSpec::cap(Vec3::UnitZ(), 0.1)) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("ball measures are constant densities")
{
    auto ball = ConvexBody::ball();
    auto s = surface_area_measure(ball);
    auto v = cone_volume_measure(ball);
    CHECK(s.min_value() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.max_value() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(s.total() == doctest::Approx(4 * kPi).epsilon(1e-6));
    CHECK(v.total() == doctest::Approx(4 * kPi / 3).epsilon(1e-6));
}

TEST_CASE("ellipsoid total masses")
{
    const Vec3 r(1.0, 1.2, 1.5);
    auto ell = ConvexBody::ellipsoid(r);
    CHECK(rel(surface_area_measure(ell).total(), oracle::ellipsoid_surface_area(r)) < 5e-3);
    CHECK(rel(cone_volume_measure(ell).total(), volume(ell)) < 5e-3);
}

TEST_CASE("random polytope cone volume equals volume")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
        auto body = ConvexBody::polytope(random_polytope_points(rng));
        CHECK(rel(cone_volume_measure(body).total(), volume(body)) < 1e-9);
    }
}

TEST_CASE("q = 3 dual curvature is three times the volume")
{
    std::vector<ConvexBody> bodies = {ConvexBody::ball(), ConvexBody::cube(),
                                      ConvexBody::ellipsoid(Vec3(1.0, 1.2, 1.5)),
                                      ConvexBody::ellipsoid(Vec3(0.6, 1.0, 1.8), Vec3(0.1, -0.2, 0.05)),
                                      ConvexBody::ellipsoid(Vec3(0.9, 1.1, 1.3), Vec3::Zero(),
                                                            Eigen::AngleAxisd(0.7, Vec3(1, 1, 0).normalized())
                                                                .toRotationMatrix())};
    for (const auto& b : bodies) {
        const double target = 3 * volume(b);
        CHECK(rel(dual_curvature_boundary(b, 3.0, RegionSpec::full()), target) < 5e-3);
        CHECK(rel(dual_curvature_radial(b, 3.0, RegionSpec::full()), target) < 5e-3);
    }
}

TEST_CASE("unit ball dual curvature is the sphere area")
{
    auto ball = ConvexBody::ball();
    for (double q : {0.5, 2.0, 3.7}) {
        CHECK(dual_curvature_radial(ball, q, RegionSpec::full()) == doctest::Approx(4 * kPi).epsilon(1e-6));
        CHECK(lp_dual_curvature(ball, 0.4, q, RegionSpec::full()) == doctest::Approx(4 * kPi).epsilon(1e-6));
    }
}

TEST_CASE("cube facet dual curvature")
{
    auto cube = ConvexBody::cube();
    const auto top = RegionSpec::cap(Vec3::UnitZ(), 1e-3);
    CHECK(dual_curvature_radial(cube, 3.0, top) == doctest::Approx(4.0).epsilon(1e-10));
    CHECK(dual_curvature_boundary(cube, 3.0, top) == doctest::Approx(4.0).epsilon(1e-10));
    const double expect =
        oracle::integrate_rect([](double x, double y) { return 1.0 / std::sqrt(x * x + y * y + 1); }, -1, 1, -1, 1);
    CHECK(dual_curvature_boundary(cube, 2.0, top) == doctest::Approx(expect).epsilon(1e-9));
    CHECK(dual_curvature_radial(cube, 2.0, top) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("radial and boundary forms agree on caps")
{
    std::vector<ConvexBody> bodies = {
        ConvexBody::ellipsoid(Vec3(1.0, 1.2, 1.5)),
        ConvexBody::ellipsoid(Vec3(0.8, 1.0, 1.6), Vec3(0.1, -0.05, 0.2),
                              (Eigen::AngleAxisd(0.4, Vec3::UnitZ()) * Eigen::AngleAxisd(0.3, Vec3::UnitY()))
                                  .toRotationMatrix())};
    std::vector<RegionSpec> regions = {RegionSpec::hemisphere(Vec3::UnitZ()),
                                       RegionSpec::hemisphere(Vec3(1, -1, 0.5).normalized()),
                                       RegionSpec::cap(Vec3::UnitZ(), 0.6), RegionSpec::cap(Vec3(1, 2, -1).normalized(), 1.0)};
    for (const auto& b : bodies) {
        for (double q : {2.5, 3.0, 4.0}) {
            for (const auto& r : regions) {
                CHECK(rel(dual_curvature_radial(b, q, r), dual_curvature_boundary(b, q, r)) < 5e-3);
            }
        }
    }
    std::mt19937_64 rng(5);
    auto poly = ConvexBody::polytope(random_polytope_points(rng));
    for (const auto& r : regions) {
        CHECK(rel(dual_curvature_radial(poly, 2.5, r), dual_curvature_boundary(poly, 2.5, r)) < 1e-8);
    }
}

TEST_CASE("support-grid radial and boundary forms agree")
{
    const Vec3 r(1.0, 1.2, 1.5);
    auto grid = build_geodesic_grid(4);
    auto body = ConvexBody::support_grid(ScalarField::sample(grid, [&](const Vec3& v) { return oracle::ellipsoid_support(r, v); }));
    const auto hemi = RegionSpec::hemisphere(Vec3::UnitZ());
    CHECK(rel(dual_curvature_radial(body, 3.0, hemi), dual_curvature_boundary(body, 3.0, hemi)) < 1e-2);
    CHECK(rel(dual_curvature_boundary(body, 3.0, RegionSpec::full()), 3 * volume(ConvexBody::ellipsoid(r))) < 5e-3);
}

TEST_CASE("scaling law on a fixed grid")
{
    auto grid = build_geodesic_grid(4);
    auto ell = ConvexBody::ellipsoid(Vec3(1.0, 1.2, 1.5), Vec3(0.05, 0, -0.1));
    auto cube = ConvexBody::cube(0.7);
    const auto hemi = RegionSpec::hemisphere(Vec3(0.3, 0.1, 1).normalized());
    for (auto [p, q] : {std::pair{0.0, 3.0}, std::pair{0.5, 3.5}}) {
        for (const auto* body : {&ell, &cube}) {
            for (const auto& region : {RegionSpec::full(), hemi}) {
                const double base = lp_dual_curvature(*body, p, q, region, grid);
                const double big = lp_dual_curvature(body->scaled(2.0), p, q, region, grid);
                CHECK(rel(big, std::pow(2.0, q - p) * base) < 1e-10);
            }
        }
    }
    auto sg = ConvexBody::support_grid(sample_support(ell, grid));
    const double base = lp_dual_curvature(sg, 0.5, 3.5, hemi);
    CHECK(rel(lp_dual_curvature(sg.scaled(2.0), 0.5, 3.5, hemi), std::pow(2.0, 3.0) * base) < 1e-10);
}

TEST_CASE("p = 0 is the dual curvature measure")
{
    auto ell = ConvexBody::ellipsoid(Vec3(1.0, 1.2, 1.5));
    const auto cap = RegionSpec::cap(Vec3::UnitX(), 0.8);
    CHECK(lp_dual_curvature(ell, 0.0, 2.5, cap) == dual_curvature_boundary(ell, 2.5, cap));
}

TEST_CASE("density matches finite differences")
{
    const Vec3 r(1.0, 1.2, 1.5);
    auto ell = ConvexBody::ellipsoid(r);
    auto grid = build_geodesic_grid(3);
    const double p = 0.5;
    const double q = 3.5;
    auto d = lp_dual_density(ell, p, q, grid);
    auto h = [&](const Vec3& x) { return oracle::ellipsoid_support(r, x); };
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->size(); i += 7) {
        const Vec3 v = grid->node(i);
        const double u = h(v);
        const double g2 = oracle::fd_spherical_gradient(h, v).squaredNorm();
        const double f = std::pow(g2 + u * u, 0.5 * (q - 3)) * std::pow(u, 1 - p) * oracle::fd_ma(h, v);
        worst = std::max(worst, rel(d.f[i], f));
    }
    CHECK(worst < 1e-3);
    CHECK(d.lambda >= 1.0);
    CHECK(rel(quadrature(d.f), lp_dual_curvature(ell, p, q, RegionSpec::full(), grid)) < 5e-3);
}

TEST_CASE("ball densities follow the scaling law")
{
    for (double radius : {1.0, 0.7, 1.6}) {
        auto d = lp_dual_density(ConvexBody::ball(radius), 0.3, 3.2);
        const double expect = std::pow(radius, 2.9);
        CHECK(d.f.min() == doctest::Approx(expect).epsilon(1e-8));
        CHECK(d.f.max() == doctest::Approx(expect).epsilon(1e-8));
        CHECK(d.lambda == doctest::Approx(std::max(expect, 1 / expect)).epsilon(1e-8));
    }
    CHECK_THROWS_AS(lp_dual_density(ConvexBody::cube(), 0.0, 3.0), ConfigError);
}

TEST_CASE("cone volume equivariance")
{
    auto cube = ConvexBody::cube();
    const auto top = RegionSpec::cap(Vec3::UnitZ(), 0.1);
    auto [a, b] = equivariance_pushforward(cube, Mat3::Identity(), top);
    CHECK(a == doctest::Approx(b).epsilon(1e-15));
    auto [c, d] = equivariance_pushforward(cube, 2.0 * Mat3::Identity(), top);
    CHECK(c == doctest::Approx(8 * 4.0 / 3.0).epsilon(1e-12));
    CHECK(d == doctest::Approx(8 * 4.0 / 3.0).epsilon(1e-12));

    std::mt19937_64 rng(23);
    for (int t = 0; t < 20; ++t) {
        auto body = ConvexBody::polytope(random_polytope_points(rng));
        const Mat3 phi = random_map(rng, 10.0);
        std::normal_distribution<double> g(0.0, 1.0);
        const auto region = RegionSpec::hemisphere(Vec3(g(rng), g(rng), g(rng)).normalized());
        auto [lhs, rhs] = equivariance_pushforward(body, phi, region);
        CHECK(rel(lhs, rhs) < 1e-9);
    }
    CHECK_THROWS_AS(equivariance_pushforward(cube, Mat3::Zero(), top), ConfigError);
}

TEST_CASE("region monotonicity")
{
    auto ell = ConvexBody::ellipsoid(Vec3(1.0, 1.2, 1.5));
    auto cube = ConvexBody::cube();
    double prev_d = 0.0;
    double prev_a = 0.0;
    for (double angle : {0.3, 0.6, 1.0, 1.5, 2.2, 3.0}) {
        const auto cap = RegionSpec::cap(Vec3(0.2, 0.3, 1).normalized(), angle);
        const double d = dual_curvature_boundary(ell, 2.5, cap);
        const double a = cone_volume_measure(cube)(cap);
        CHECK(d >= prev_d);
        CHECK(a >= prev_a);
        prev_d = d;
        prev_a = a;
    }
}

TEST_CASE("region specs")
{
    const auto r = RegionSpec::parse("cap:0,0,1,0.5+hemisphere:1,0,0");
    CHECK(r.contains(Vec3::UnitZ()));
    CHECK(r.contains(Vec3::UnitX()));
    CHECK_FALSE(r.contains(-Vec3::UnitX()));
    CHECK(RegionSpec::parse("full").is_full());
    CHECK(RegionSpec::from_json(r.to_json()).contains(Vec3(0.9, 0, -0.4).normalized()));
    CHECK_THROWS_AS(RegionSpec::parse("cap:0,0,1"), ConfigError);
    CHECK_THROWS_AS(RegionSpec::parse("disk:0,0,1"), ConfigError);

    auto grid = build_geodesic_grid(3);
    const auto mask = RegionSpec::hemisphere(Vec3::UnitZ()).realize(*grid);
    for (std::size_t i = 0; i < grid->size(); ++i) CHECK((mask[i] != 0) == (grid->node(i).z() >= -1e-12));
    const auto w = RegionSpec::full().weights(*grid);
    for (std::size_t i = 0; i < grid->size(); ++i) CHECK(w[i] == grid->weights()[i]);
    const auto hw = RegionSpec::hemisphere(Vec3::UnitZ()).weights(*grid);
    CHECK(std::accumulate(hw.begin(), hw.end(), 0.0) == doctest::Approx(2 * kPi).epsilon(1e-3));
}

TEST_CASE("measure export")
{
    auto m = cone_volume_measure(ConvexBody::cube());
    const auto doc = m.to_json();
    CHECK(doc["summary"]["total"].get<double>() == doctest::Approx(8.0));
    auto d = surface_area_measure(ConvexBody::ball(), build_geodesic_grid(2));
    CHECK(d.to_json()["rows"].size() == 162);
}

TEST_CASE("piecewise-linear Monge-Ampere measure")
{
    const Polygon square = {Vec2(0, 0), Vec2(1, 0), Vec2(1, 1), Vec2(0, 1)};
    const std::vector<AffinePiece> one = {{Vec2(0.3, -0.2), 0.1}};
    CHECK(monge_ampere_measure_pl(one, square, square) == 0.0);

    const Polygon centered = {Vec2(-1, -1), Vec2(1, -1), Vec2(1, 1), Vec2(-1, 1)};
    const Polygon near_apex = {Vec2(-0.1, -0.1), Vec2(0.1, -0.1), Vec2(0.1, 0.1), Vec2(-0.1, 0.1)};
    const std::vector<AffinePiece> l1 = {{Vec2(1, 0), 0}, {Vec2(-1, 0), 0}, {Vec2(0, 1), 0}, {Vec2(0, -1), 0}};
    CHECK(monge_ampere_measure_pl(l1, centered, near_apex) == doctest::Approx(2.0).epsilon(1e-12));
    const Polygon away = {Vec2(0.2, 0.2), Vec2(0.5, 0.2), Vec2(0.5, 0.5), Vec2(0.2, 0.5)};
    CHECK(monge_ampere_measure_pl(l1, centered, away) == 0.0);
    CHECK_THROWS_AS(monge_ampere_measure_pl(std::vector<AffinePiece>{}, square, square), ConfigError);

    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 3; ++t) {
        std::vector<AffinePiece> pieces;
        std::vector<Vec2> g;
        std::vector<double> b;
        for (int k = 0; k < 12; ++k) {
            pieces.push_back({Vec2(u(rng), u(rng)), 0.3 * u(rng)});
            g.push_back(pieces.back().gradient);
            b.push_back(pieces.back().offset);
        }
        const double exact = monge_ampere_measure_pl(pieces, square, square);
        const double approx = oracle::mollified_ma_area(g, b, 0, 1, 0, 1, 1.5e-3, 2000);
        CHECK(std::abs(exact - approx) <= 1e-2 * std::max(exact, 1e-2));
    }
}
