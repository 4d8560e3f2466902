"""The metric family used for distances: isotropic Euclidean on R^n, the
xi-isotropic Riemannian metric on SE(n), and the (epsilon-relaxed)
sub-Riemannian metric, together with the vesselness cost model and the
projective (unsigned-orientation) distance wrapper.

Tangent vectors are given by their control coefficients in the left-invariant
frame, ordered as in :mod:`rototrack.se2` / :mod:`rototrack.se3`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import ConfigError
from .se2 import SE2Element, wrap_angle
from .se3 import OrientedPoint3D

MANIFOLDS = ("R2", "R3", "SE2", "SE3")
MODES = ("euclidean", "riemannian", "subriemannian")

TANGENT_DIM = {"R2": 2, "R3": 3, "SE2": 3, "SE3": 6}
SPATIAL_DIM = {"R2": 2, "R3": 3, "SE2": 2, "SE3": 3}


@dataclass(frozen=True)
class MetricSpec:
    """Selector for one row of the metric family.

    xi balances spatial against angular motion (units 1/length); epsilon is
    the Riemannian relaxation of the sub-Riemannian tensor (the relaxed
    metric converges to the sub-Riemannian one as epsilon -> 0); lam and p
    shape the vesselness cost.
    """

    manifold: str
    mode: str
    xi: float = 1.0
    epsilon: float = 0.1
    lam: float = 100.0
    p: float = 1.0

    def __post_init__(self):
        if self.manifold not in MANIFOLDS:
            raise ConfigError(f"unknown manifold {self.manifold!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.mode == "subriemannian" and self.manifold not in ("SE2", "SE3"):
            raise ConfigError("subriemannian mode requires a lifted manifold (SE2/SE3)")
        if self.mode == "euclidean" and self.manifold not in ("R2", "R3"):
            raise ConfigError("euclidean mode applies to R2/R3 only")
        if self.xi <= 0:
            raise ConfigError("xi must be positive")
        if not (0 < self.epsilon <= 1):
            raise ConfigError("epsilon must lie in (0, 1]")
        if self.lam < 0 or self.p <= 0:
            raise ConfigError("cost parameters require lambda >= 0 and p > 0")

    @property
    def lifted(self) -> bool:
        return self.manifold in ("SE2", "SE3")

    def to_json(self) -> str:
        return json.dumps(
            {
                "manifold": self.manifold,
                "mode": self.mode,
                "xi": self.xi,
                "epsilon": self.epsilon,
                "lambda": self.lam,
                "p": self.p,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "MetricSpec":
        d = json.loads(text)
        return cls(
            manifold=d["manifold"],
            mode=d["mode"],
            xi=float(d.get("xi", 1.0)),
            epsilon=float(d.get("epsilon", 0.1)),
            lam=float(d.get("lambda", 100.0)),
            p=float(d.get("p", 1.0)),
        )


def tangent_weights(spec: MetricSpec) -> np.ndarray:
    """Squared frame weights of the metric tensor, one per control.

    In subriemannian mode the non-horizontal controls (u3 for SE(2); u1, u2,
    u6 for SE(3)) carry the relaxation weight 1/epsilon^2.  The Riemannian
    SE(3) metric lives on oriented points, so the roll control u6 gets weight
    zero there (quotient direction).
    """
    xi2 = spec.xi * spec.xi
    if spec.manifold == "R2":
        return np.ones(2)
    if spec.manifold == "R3":
        return np.ones(3)
    if spec.manifold == "SE2":
        if spec.mode == "riemannian":
            return np.array([1.0, xi2, xi2])
        return np.array([1.0, xi2, xi2 / spec.epsilon**2])
    if spec.mode == "riemannian":
        return np.array([xi2, xi2, xi2, 1.0, 1.0, 0.0])
    inv_e2 = 1.0 / spec.epsilon**2
    return np.array([xi2 * inv_e2, xi2 * inv_e2, xi2, 1.0, 1.0, inv_e2])


def metric_norm(t, spec: MetricSpec, cost_value: float = 1.0) -> float:
    """Metric length of a tangent vector given by its frame controls."""
    t = np.asarray(t, dtype=float)
    if t.shape != (TANGENT_DIM[spec.manifold],):
        raise ValueError(
            f"tangent dimension {t.shape} does not match manifold {spec.manifold}"
        )
    w = tangent_weights(spec)
    return float(cost_value) * math.sqrt(float(np.dot(w, t * t)))


def cost_from_vesselness(V, lam: float = 100.0, p: float = 1.0):
    """Cost 1 / (1 + lam * V^p); accepts scalars or arrays with V in [0, 1]."""
    V = np.asarray(V, dtype=float)
    if np.any(V < 0) or np.any(V > 1):
        raise ValueError("vesselness values must lie in [0, 1]")
    if lam < 0 or p <= 0:
        raise ValueError("cost parameters require lambda >= 0 and p > 0")
    out = 1.0 / (1.0 + lam * V**p)
    return float(out) if out.ndim == 0 else out


@dataclass
class CostField:
    """Per-node cost values on a grid; all values must lie in (0, 1]."""

    grid: object
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.size and (self.values.min() <= 0 or self.values.max() > 1):
            raise ValueError("cost values must lie in (0, 1]")


def antipode(target):
    """The same oriented point with the orientation reversed."""
    if isinstance(target, SE2Element):
        return SE2Element(target.x, target.y, wrap_angle(target.theta + math.pi))
    if isinstance(target, OrientedPoint3D):
        return OrientedPoint3D(target.y, -target.n)
    raise TypeError(f"no antipode for {type(target).__name__}")


def projective_distance(d, g, target) -> float:
    """Distance on the projective line bundle: the minimum of the backend
    distance to the target and to its orientation-reversed copy."""
    return min(d(g, target), d(g, antipode(target)))


def se2_flat_distance(g: SE2Element, h: SE2Element, xi: float = 1.0) -> float:
    """Product-metric distance sqrt(xi^2 |dx|^2 + dtheta^2) on positions and
    orientations.  Like the exact xi-isotropic Riemannian distance it is
    invariant under rotating the displacement about the source, which makes
    it a cheap stand-in when only that symmetry matters."""
    dx = g.x - h.x
    dy = g.y - h.y
    dt = wrap_angle(h.theta - g.theta)
    return math.sqrt(xi * xi * (dx * dx + dy * dy) + dt * dt)
