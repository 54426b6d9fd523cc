import math

import numpy as np
import pytest

import dualmink as dm


def test_grid():
    nodes = dm.grid_nodes(3)
    assert nodes.shape == (642, 3)
    assert np.allclose(np.linalg.norm(nodes, axis=1), 1.0)
    assert dm.grid_weights(3).sum() == pytest.approx(4 * math.pi)


def test_bodies_and_measures():
    ball = dm.ConvexBody.ball()
    assert ball.kind == "ellipsoid"
    assert ball.volume() == pytest.approx(4 * math.pi / 3)
    assert dm.lp_dual_curvature(ball, 0.0, 3.0) == pytest.approx(4 * math.pi, rel=1e-6)

    cube = dm.ConvexBody.cube()
    assert dm.cone_volume(cube) == pytest.approx(8.0)
    assert dm.dual_curvature_radial(cube, 3.0, "cap:0,0,1,0.001") == pytest.approx(4.0, rel=1e-10)

    ell = dm.ConvexBody.ellipsoid([1.0, 1.2, 1.5])
    assert dm.dual_curvature_boundary(ell, 3.0) == pytest.approx(3 * ell.volume(), rel=5e-3)
    r = dm.dual_curvature_radial(ell, 2.5, "hemisphere:0,0,1")
    b = dm.dual_curvature_boundary(ell, 2.5, "hemisphere:0,0,1")
    assert r == pytest.approx(b, rel=5e-3)
    assert dm.lp_dual_curvature(ell.scaled(2.0), 0.5, 3.5) == pytest.approx(
        8.0 * dm.lp_dual_curvature(ell, 0.5, 3.5), rel=1e-10
    )

    poly = dm.ConvexBody.polytope(np.array(cube_vertices()))
    assert poly.kind == "polytope"
    assert dm.ConvexBody.from_json(ell.to_json()).volume() == pytest.approx(ell.volume())


def cube_vertices():
    return [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]


def test_density_and_john():
    f, lam = dm.lp_dual_density(dm.ConvexBody.ball(1.1), 0.0, 3.5, level=3)
    assert f.shape == (642,)
    assert np.allclose(f, 1.1**3.5)
    assert lam == pytest.approx(1.1**3.5)

    e = dm.john_ellipsoid(dm.ConvexBody.cube())
    assert np.allclose(e["half_axes"], 1.0, atol=1e-3)
    assert np.allclose(e["center"], 0.0, atol=1e-3)
    assert e["inner_excess"] <= 1e-6


def test_solver_round_trip():
    ell = dm.ConvexBody.ellipsoid([1.0, 1.2, 1.5])
    f, _ = dm.lp_dual_density(ell, 0.3, 3.2, level=4)
    rep = dm.solve(f, 0.3, 3.2)
    assert rep["status"] == "converged"
    u = np.array(rep["solution"]["values"])
    h = ell.sample_support(4)
    assert np.max(np.abs(u / h - 1.0)) <= 1e-2
    assert np.max(np.abs(dm.residual(u, f, 0.3, 3.2))) <= 1e-3
    body = dm.ConvexBody.support_grid(u)
    assert body.volume() == pytest.approx(ell.volume(), rel=1e-2)


def test_isotropic_fixed_point():
    ones = np.ones(2562)
    rep = dm.solve(ones, 0.5, 3.5, {"init": {"type": "ball", "radius": 2.0}})
    assert rep["status"] == "converged"
    assert np.allclose(rep["solution"]["values"], 1.0, atol=1e-3)


def test_suites_and_probes():
    rep = dm.run_suite(
        "basic-estimate",
        {"family": {"kind": "balls", "range": [0.8, 1.2], "count": 3}, "p": 0.0, "q": 3.2},
    )
    assert rep["verdict"]["status"] == "pass"
    for row in rep["rows"]:
        assert row["ratio"] == pytest.approx(row["r3"] ** 3.2, rel=1e-6)

    u = dm.uniqueness_probe(dm.bump_density(3), n_starts=2)
    assert u["verdict"]["status"] == "pass"

    d = dm.degeneration_probe(p=0.5)
    assert d["summary"]["lambda_strictly_increasing"]
    assert d["verdict"]["status"] == "observational"


def test_errors():
    with pytest.raises(dm.ConfigError):
        dm.degeneration_probe()
    with pytest.raises(dm.ConfigError):
        dm.run_suite("nothing")
    with pytest.raises(dm.ConfigError):
        dm.solve(np.ones(100), 0.5, 3.5)
    with pytest.raises(ValueError):
        dm.ConvexBody.ellipsoid([1.0, -1.0, 1.0])
    with pytest.raises(dm.ConfigError):
        dm.solve(np.ones(642), 0.5, 3.5, {"tua": 1.0})
