# Copyright 2026 The dualmink Authors.
# This file is licensed to you under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License. You may obtain a copy
# of the License at http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under
# the License is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR REPRESENTATIONS
# OF ANY KIND, either express or implied. See the License for the specific language
# governing permissions and limitations under the License.
"""L_p dual curvature measures, the dual Minkowski solver, and estimate suites."""

import json

from ._core import (
    AmbiguityError,
    ConfigError,
    ConvexBody,
    InvalidBodyError,
    NumericalError,
    bump_density,
    cone_volume,
    convexify,
    dual_curvature_boundary,
    dual_curvature_radial,
    grid_nodes,
    grid_weights,
    john_ellipsoid,
    lp_dual_curvature,
    lp_dual_density,
    max_threads,
    residual,
    set_max_threads,
    surface_area,
)
from . import _core

__all__ = [
    "AmbiguityError",
    "ConfigError",
    "ConvexBody",
    "InvalidBodyError",
    "NumericalError",
    "bump_density",
    "cone_volume",
    "convexify",
    "degeneration_probe",
    "dual_curvature_boundary",
    "dual_curvature_radial",
    "grid_nodes",
    "grid_weights",
    "john_ellipsoid",
    "lp_dual_curvature",
    "lp_dual_density",
    "max_threads",
    "residual",
    "run_suite",
    "set_max_threads",
    "solve",
    "surface_area",
    "uniqueness_probe",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def solve(f, p, q, config=None):
    """Solve for nodal support values with density f; returns the report as a dict.

    The solution is under report["solution"] as a support_grid body document.
    """
    return json.loads(_core.solve(f, p, q, _dump(config)))


def run_suite(name, config=None):
    """Run "c0", "basic-estimate" or "proposition" with a suite configuration dict."""
    return json.loads(_core.run_suite(name, _dump(config)))


def uniqueness_probe(f, p=0.3, q=3.05, n_starts=5, seed=1, epsilon=0.1, delta=0.2, agree_tol=5e-3, solver=None):
    """Multi-start solves near the isotropic data; returns the report as a dict."""
    return json.loads(_core.uniqueness_probe(f, p, q, n_starts, seed, epsilon, delta, agree_tol, _dump(solver)))


def degeneration_probe(p=-2.0, q=3.0, schedule=None, level=4, allow_unsupported=False):
    """Flattening ellipsoid schedule (observational); returns the report as a dict."""
    return json.loads(_core.degeneration_probe(p, q, schedule, level, allow_unsupported))
