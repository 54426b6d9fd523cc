#include <doctest.h>

#include "oracles.hpp"

#include <dualmink/errors.hpp>
#include <dualmink/measures.hpp>
#include <dualmink/solver.hpp>

#include <cmath>
#include <random>

using namespace dualmink;

namespace {

double sup_diff(const ScalarField& a, const ScalarField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sup_rel(const ScalarField& a, const ScalarField& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] / b[i] - 1.0));
    return m;
}

double sup_abs(const ScalarField& a)
{
    double m = 0.0;
    for (double x : a.values()) m = std::max(m, std::abs(x));
    return m;
}

ScalarField bump_density(const GridPtr& grid)
{
    return ScalarField::sample(grid, [](const Vec3& v) { return 1.0 + 0.02 * std::exp(4.0 * (v.z() - 1.0)); });
}

bool non_increasing(const std::vector<double>& h)
{
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i] > h[i - 1]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("residual examples")
{
    auto grid = build_geodesic_grid(3);
    const auto one = ScalarField::constant(grid, 1.0);
    CHECK(sup_abs(residual(one, one, 0.5, 3.5)) < 1e-12);
    const auto r = residual(ScalarField::constant(grid, 1.7), one, 0.5, 3.5);
    for (double x : r.values()) CHECK(x == doctest::Approx(3.0 * std::log(1.7)).epsilon(1e-10));

    auto body = ConvexBody::support_grid(
        ScalarField::sample(grid, [](const Vec3& v) { return oracle::ellipsoid_support(Vec3(1, 1.2, 1.5), v); }));
    const auto f = lp_dual_density(body, 0.3, 3.2).f;
    CHECK(sup_abs(residual(body.as_support_grid().u, f, 0.3, 3.2)) < 1e-9);

    std::vector<double> bad(grid->size(), 1.0);
    bad[7] = 0.5;
    CHECK_THROWS_AS(residual(ScalarField(grid, bad), one, 0.0, 3.0), DegeneracyError);
    CHECK_THROWS_AS(residual(one, ScalarField::constant(build_geodesic_grid(2), 1.0), 0.0, 3.0), ConfigError);
}

TEST_CASE("convexify")
{
    auto grid = build_geodesic_grid(4);
    const auto one = ScalarField::constant(grid, 1.0);
    CHECK(sup_diff(convexify(one), one) == 0.0);

    std::vector<double> spiked(grid->size(), 1.0);
    spiked[100] += 0.5;
    const auto c = convexify(ScalarField(grid, spiked));
    CHECK(c[100] < 1.01);
    for (std::size_t i = 0; i < grid->size(); ++i) {
        if (i != 100) CHECK(std::abs(c[i] - 1.0) <= 1e-9);
    }

    const auto h = sample_support(ConvexBody::ellipsoid(Vec3(1, 1.2, 1.5)), grid);
    CHECK(sup_diff(convexify(h), h) == 0.0);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> noise(0.0, 1.0);
    std::vector<double> rough(grid->size());
    for (std::size_t i = 0; i < rough.size(); ++i) rough[i] = 0.9 * h[i] + 0.1 * noise(rng);
    const ScalarField u(grid, rough);
    const auto ub = convexify(u);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(ub[i] <= u[i]);
    CHECK(sup_diff(convexify(ub), ub) <= 1e-12);

    std::vector<double> mild(grid->size());
    for (std::size_t i = 0; i < mild.size(); ++i) mild[i] = 0.9 * h[i] + 1e-3 * noise(rng);
    CHECK(min_curvature_eigenvalue(convexify(ScalarField(grid, mild))) >= -1e-6);

    std::vector<double> neg(grid->size(), 1.0);
    neg[3] = -0.1;
    CHECK_THROWS_AS(convexify(ScalarField(grid, neg)), DegeneracyError);
}

TEST_CASE("isotropic fixed point")
{
    auto grid = build_geodesic_grid(4);
    SolverConfig cfg;
    cfg.init.radius = 2.0;
    const auto rep = solve(ScalarField::constant(grid, 1.0), 0.5, 3.5, cfg);
    REQUIRE(rep.converged());
    CHECK(rep.iterations <= 500);
    CHECK(std::abs(rep.u.min() - 1.0) <= 1e-3);
    CHECK(std::abs(rep.u.max() - 1.0) <= 1e-3);
    CHECK(rep.lambda == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(non_increasing(rep.residual_history));

    const double c = 1.8;
    const auto scaled = solve(ScalarField::constant(grid, c), 0.5, 3.5, {});
    REQUIRE(scaled.converged());
    CHECK(std::abs(scaled.u.max() / std::pow(c, 1.0 / 3.0) - 1.0) <= 1e-3);
    CHECK(std::abs(scaled.u.min() / std::pow(c, 1.0 / 3.0) - 1.0) <= 1e-3);

    cfg.scheme = SolverConfig::Scheme::Multiplicative;
    const auto mult = solve(ScalarField::constant(grid, 1.0), 0.5, 3.5, cfg);
    REQUIRE(mult.converged());
    CHECK(std::abs(mult.u.max() - 1.0) <= 1e-3);
}

TEST_CASE("ellipsoid round trip")
{
    auto grid = build_geodesic_grid(4);
    auto ell = ConvexBody::ellipsoid(Vec3(1, 1.2, 1.5));
    const auto f = lp_dual_density(ell, 0.3, 3.2, grid).f;
    const auto rep = solve(f, 0.3, 3.2, {});
    REQUIRE(rep.converged());
    CHECK(rep.residual_history.back() <= 1e-3);
    CHECK(sup_rel(rep.u, sample_support(ell, grid)) <= 1e-2);
    CHECK(non_increasing(rep.residual_history));
    CHECK(min_curvature_eigenvalue(rep.u) >= -1e-6);

    // solve(s^(q-p) f) = s solve(f)
    std::vector<double> big(f.values().begin(), f.values().end());
    for (auto& x : big) x *= std::pow(1.3, 2.9);
    const auto rep2 = solve(ScalarField(grid, big), 0.3, 3.2, {});
    REQUIRE(rep2.converged());
    double worst = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) worst = std::max(worst, std::abs(rep2.u[i] / (1.3 * rep.u[i]) - 1));
    CHECK(worst <= 1e-3);
}

TEST_CASE("seeded starts agree near the isotropic data")
{
    auto grid = build_geodesic_grid(4);
    const auto f = bump_density(grid);
    std::vector<ScalarField> sols;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        SolverConfig cfg;
        cfg.init.kind = InitSpec::Kind::Random;
        cfg.init.seed = seed;
        const auto rep = solve(f, 0.3, 3.05, cfg);
        REQUIRE(rep.converged());
        sols.push_back(rep.u);
    }
    for (std::size_t a = 0; a < sols.size(); ++a) {
        for (std::size_t b = a + 1; b < sols.size(); ++b) CHECK(sup_diff(sols[a], sols[b]) <= 5e-3);
    }
    CHECK(sup_rel(lp_density_of_field(sols[0], 0.3, 3.05), f) <= 1e-2);
}

TEST_CASE("random starts are reproducible")
{
    auto grid = build_geodesic_grid(3);
    InitSpec init;
    init.kind = InitSpec::Kind::Random;
    init.seed = 42;
    const auto a = initial_field(init, grid);
    const auto b = initial_field(init, grid);
    CHECK(sup_diff(a, b) == 0.0);
    init.seed = 43;
    CHECK(sup_diff(a, initial_field(init, grid)) > 1e-3);
    const auto p = random_smooth_field(grid, 7);
    CHECK(std::max(std::abs(p.min()), std::abs(p.max())) == doctest::Approx(1.0));
}

TEST_CASE("solver preconditions")
{
    auto grid = build_geodesic_grid(3);
    const auto one = ScalarField::constant(grid, 1.0);
    CHECK_THROWS_AS(solve(one, -0.5, 3.0, {}), ConfigError);
    CHECK_THROWS_AS(solve(one, 0.5, 2.4, {}), ConfigError);
    SolverConfig bad;
    bad.tau = 1.5;
    CHECK_THROWS_AS(solve(one, 0.0, 3.0, bad), ConfigError);
    std::vector<double> neg(grid->size(), 1.0);
    neg[0] = 0.0;
    CHECK_THROWS_AS(solve(ScalarField(grid, neg), 0.0, 3.0, {}), ConfigError);

    SolverConfig loose;
    loose.allow_unsupported = true;
    CHECK(solve(one, -0.5, 3.0, loose).converged());

    SolverConfig few;
    few.max_iter = 0;
    few.init.radius = 2.0;
    const auto rep = solve(one, 0.0, 3.0, few);
    CHECK(rep.status == SolveStatus::MaxIter);
    CHECK(rep.residual_history.size() == 1);
}

TEST_CASE("solver config documents")
{
    SolverConfig c;
    c.tau = 0.5;
    c.max_iter = 17;
    c.init.kind = InitSpec::Kind::Random;
    c.init.seed = 9;
    c.scheme = SolverConfig::Scheme::Multiplicative;
    const auto back = SolverConfig::from_json(c.to_json());
    CHECK(back.tau == 0.5);
    CHECK(back.max_iter == 17);
    CHECK(back.init.kind == InitSpec::Kind::Random);
    CHECK(back.init.seed == 9);
    CHECK(back.scheme == SolverConfig::Scheme::Multiplicative);
    CHECK(back.to_json() == c.to_json());

    CHECK_THROWS_AS(SolverConfig::from_json(Json{{"tua", 0.5}}), DocumentError);
    CHECK_THROWS_AS(SolverConfig::from_json(Json{{"tau", 0.0}}), DocumentError);
    CHECK_THROWS_AS(SolverConfig::from_json(Json{{"init", {{"type", "cube"}}}}), DocumentError);

    auto grid = build_geodesic_grid(3);
    const auto rep = solve(ScalarField::constant(grid, 1.0), 0.0, 3.0, {});
    const auto doc = rep.to_json();
    CHECK(doc["status"] == "converged");
    auto body = body_from_json(doc["solution"]);
    CHECK(body.kind() == ConvexBody::Kind::SupportGrid);
    CHECK(volume(body) == doctest::Approx(4.0 * std::numbers::pi / 3.0).epsilon(1e-2));
}
