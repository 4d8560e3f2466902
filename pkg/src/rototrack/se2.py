"""Rigid motions of the plane: group operations, exp/log, and the nilpotent
approximation group with its homogeneous gauge norm.

Conventions
-----------
A planar rigid motion is stored as ``(x, y, theta)`` with ``theta`` wrapped to
``(-pi, pi]``.  Lie-algebra coefficient vectors ``(c1, c2, c3)`` are ordered
rotation-first: ``c1`` multiplies the rotation generator, ``c2``/``c3`` the
translation generators, so ``c1`` is in radians and ``c2``, ``c3`` in length
units.  Tangent controls ``(u1, u2, u3)`` follow the same ordering: ``u1`` is
angular velocity, ``u2`` motion along the heading, ``u3`` sideways motion.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import CutLocusWarning, NumericalError

# Below this rotation magnitude the 0/0 terms of log/exp switch to series.
_SMALL_ANGLE = 1e-6

DEFAULT_XI = 1.0
DEFAULT_ZETA = 44.0


def wrap_angle(theta: float) -> float:
    """Wrap an angle to the canonical branch (-pi, pi]."""
    t = math.fmod(theta, 2.0 * math.pi)
    if t > math.pi:
        t -= 2.0 * math.pi
    elif t <= -math.pi:
        t += 2.0 * math.pi
    return t


@dataclass(frozen=True)
class SE2Element:
    """A planar rigid motion (x, y, theta); theta always in (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])

    def matrix(self) -> np.ndarray:
        """3x3 homogeneous matrix representation."""
        c, s = math.cos(self.theta), math.sin(self.theta)
        return np.array([[c, -s, self.x], [s, c, self.y], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class SE2Coords:
    """First-kind coordinates (c1, c2, c3) on the principal branch |c1| <= pi."""

    c1: float
    c2: float
    c3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3])


SE2_IDENTITY = SE2Element(0.0, 0.0, 0.0)


def se2_compose(g: SE2Element, h: SE2Element) -> SE2Element:
    """Group product: rotate h's translation by g and add the angles."""
    c, s = math.cos(g.theta), math.sin(g.theta)
    return SE2Element(
        c * h.x - s * h.y + g.x,
        s * h.x + c * h.y + g.y,
        g.theta + h.theta,
    )


def se2_inverse(g: SE2Element) -> SE2Element:
    """Group inverse (-R^-1 x, -theta)."""
    c, s = math.cos(g.theta), math.sin(g.theta)
    return SE2Element(-(c * g.x + s * g.y), -(-s * g.x + c * g.y), -g.theta)


def _half_cot_half(theta: float) -> float:
    """(theta/2) * cot(theta/2), with series near 0 (value 1 - theta^2/12 - ...)."""
    if abs(theta) < _SMALL_ANGLE:
        t2 = theta * theta
        return 1.0 - t2 / 12.0 - t2 * t2 / 720.0
    return 0.5 * theta / math.tan(0.5 * theta)


def se2_log(g: SE2Element) -> SE2Coords:
    """First-kind coordinates of a group element (principal branch).

    Warns when theta is at the branch boundary pi, where the logarithm is
    still defined but the element sits near the cut locus.
    """
    theta = g.theta
    if abs(abs(theta) - math.pi) < 1e-12:
        warnings.warn("se2_log at theta = pi: near the cut locus", CutLocusWarning)
    a = _half_cot_half(theta)
    h = 0.5 * theta
    return SE2Coords(theta, a * g.x + h * g.y, -h * g.x + a * g.y)


def se2_exp(c: SE2Coords) -> SE2Element:
    """Group element of a first-kind coordinate vector (inverse of se2_log)."""
    theta = c.c1
    if abs(theta) < _SMALL_ANGLE:
        t2 = theta * theta
        sa = 1.0 - t2 / 6.0  # sin(theta)/theta
        sb = 0.5 * theta * (1.0 - t2 / 12.0)  # (1-cos(theta))/theta
    else:
        sa = math.sin(theta) / theta
        sb = (1.0 - math.cos(theta)) / theta
    return SE2Element(sa * c.c2 - sb * c.c3, sb * c.c2 + sa * c.c3, theta)


def se2_frame(g: SE2Element):
    """Left-invariant frame at g as three tangent vectors in (x, y, theta) order."""
    c, s = math.cos(g.theta), math.sin(g.theta)
    return (
        np.array([0.0, 0.0, 1.0]),
        np.array([c, s, 0.0]),
        np.array([-s, c, 0.0]),
    )


def se2_nilpotent_compose(a: SE2Coords, b: SE2Coords) -> SE2Coords:
    """Step-2 truncated product on first-kind coordinates (Heisenberg law)."""
    return SE2Coords(
        a.c1 + b.c1,
        a.c2 + b.c2,
        a.c3 + b.c3 + 0.5 * (a.c1 * b.c2 - a.c2 * b.c1),
    )


def se2_dilate(s: float, c: SE2Coords) -> SE2Coords:
    """Anisotropic dilation with weights (1, 1, 2); group automorphism."""
    if s <= 0:
        raise ValueError(f"dilation factor must be positive, got {s}")
    return SE2Coords(s * c.c1, s * c.c2, s * s * c.c3)


def se2_gauge_norm(c: SE2Coords, xi: float = DEFAULT_XI, zeta: float = DEFAULT_ZETA) -> float:
    """Homogeneous gauge ((|c1|^2 + xi^2 |c2|^2)^2 + zeta xi^2 |c3|^2)^(1/4)."""
    if xi <= 0 or zeta <= 0:
        raise ValueError("xi and zeta must be positive")
    quad = c.c1 * c.c1 + xi * xi * c.c2 * c.c2
    return (quad * quad + zeta * xi * xi * c.c3 * c.c3) ** 0.25


def se2_approx_distance(
    g: SE2Element, h: SE2Element, xi: float = DEFAULT_XI, zeta: float = DEFAULT_ZETA
) -> float:
    """Left-invariant approximation of the sub-Riemannian distance: the gauge
    norm of the logarithm of the relative motion g^-1 h."""
    return se2_gauge_norm(se2_log(se2_compose(se2_inverse(g), h)), xi, zeta)


def se2_fundamental_gauge(c: SE2Coords) -> float:
    """Gauge-based estimate ||c||_16^(2-Q) of the sub-Laplacian fundamental
    solution; Q = 4 is the homogeneous dimension (dilation weights 1+1+2)."""
    n = se2_gauge_norm(c, 1.0, 16.0)
    if n == 0.0:
        raise NumericalError("fundamental solution is singular at the origin")
    return n ** (2 - 4)


def se2_algebra_basis() -> list[np.ndarray]:
    """Matrix generators (3x3 homogeneous) in rotation-first order."""
    a1 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    a2 = np.zeros((3, 3))
    a2[0, 2] = 1.0
    a3 = np.zeros((3, 3))
    a3[1, 2] = 1.0
    return [a1, a2, a3]


def se2_coords_to_matrix(c: SE2Coords) -> np.ndarray:
    """Lie-algebra element as a 3x3 matrix."""
    a1, a2, a3 = se2_algebra_basis()
    return c.c1 * a1 + c.c2 * a2 + c.c3 * a3


def se2_matrix_to_coords(m: np.ndarray) -> SE2Coords:
    """Coefficients of a 3x3 Lie-algebra matrix in the rotation-first basis."""
    return SE2Coords(float(m[1, 0]), float(m[0, 2]), float(m[1, 2]))
