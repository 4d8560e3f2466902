"""Rigid motions of 3-space: group operations, rotation and group exp/log,
the lift of oriented points, and the nilpotent approximation with its gauge.

Conventions
-----------
Rotations are stored as 3x3 matrices.  Lie-algebra coefficient vectors
``c = (c1..c6)`` put the three translation generators first and the three
rotation generators last, so ``c[:3]`` is spatial (length units) and
``c[3:]`` rotational (radians).  The distinguished spatial direction of the
frame is the third column of R (the heading ``n = R e_z``); the two cheap
rotational controls are ``u4``, ``u5`` and the roll ``u6`` is the quotient
direction when working with oriented points.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import CutLocusWarning, NumericalError

_SMALL_ANGLE = 1e-6
_ORTHO_TOL = 1e-8

DEFAULT_XI = 1.0
DEFAULT_ZETA = 100.0

E_Z = np.array([0.0, 0.0, 1.0])


def _check_rotation(R: np.ndarray, tol: float = _ORTHO_TOL) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got {R.shape}")
    err = np.abs(R.T @ R - np.eye(3)).max()
    if err > tol or np.linalg.det(R) < 0:
        raise ValueError(f"matrix is not a rotation (orthonormality error {err:.2e})")
    return R


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Project a near-rotation onto SO(3) (use after long composition chains)."""
    u, _, vt = np.linalg.svd(np.asarray(R, dtype=float))
    out = u @ vt
    if np.linalg.det(out) < 0:
        out = u @ np.diag([1.0, 1.0, -1.0]) @ vt
    return out


@dataclass(frozen=True)
class SE3Element:
    """A rigid motion (x, R) with x a 3-vector and R a rotation matrix."""

    x: np.ndarray
    R: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float).reshape(3))
        object.__setattr__(self, "R", _check_rotation(self.R))

    def matrix(self) -> np.ndarray:
        """4x4 homogeneous matrix representation."""
        m = np.eye(4)
        m[:3, :3] = self.R
        m[:3, 3] = self.x
        return m


@dataclass(frozen=True)
class SE3Coords:
    """First-kind coefficients, spatial (c1..c3) then rotational (c4..c6)."""

    c: np.ndarray = field(default_factory=lambda: np.zeros(6))

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).reshape(6))

    @property
    def spatial(self) -> np.ndarray:
        return self.c[:3]

    @property
    def rotational(self) -> np.ndarray:
        return self.c[3:]


@dataclass(frozen=True)
class OrientedPoint3D:
    """A position with a unit orientation vector on the sphere."""

    y: np.ndarray
    n: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float).reshape(3))
        n = np.asarray(self.n, dtype=float).reshape(3)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("orientation must be a unit vector")
        object.__setattr__(self, "n", n)


SE3_IDENTITY = SE3Element(np.zeros(3), np.eye(3))


def se3_compose(g: SE3Element, h: SE3Element) -> SE3Element:
    return SE3Element(g.x + g.R @ h.x, g.R @ h.R)


def se3_inverse(g: SE3Element) -> SE3Element:
    return SE3Element(-(g.R.T @ g.x), g.R.T)


def skew(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector (hat operator)."""
    w = np.asarray(w, dtype=float)
    return np.array(
        [[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]]
    )


def rot_exp(w: np.ndarray) -> np.ndarray:
    """Rotation matrix of a rotation vector, by the Rodrigues formula."""
    w = np.asarray(w, dtype=float).reshape(3)
    q = np.linalg.norm(w)
    K = skew(w)
    if q < _SMALL_ANGLE:
        q2 = q * q
        a = 1.0 - q2 / 6.0
        b = 0.5 - q2 / 24.0
    else:
        a = math.sin(q) / q
        b = (1.0 - math.cos(q)) / (q * q)
    return np.eye(3) + a * K + b * (K @ K)


def rot_log(R: np.ndarray) -> np.ndarray:
    """Rotation vector of a rotation matrix on the principal branch.

    At rotation angle pi the axis is extracted from the symmetric part
    (R + I)/2; the sign convention is that the axis component of largest
    magnitude is taken positive.  A cut-locus warning is emitted there since
    the branch is not unique.
    """
    R = _check_rotation(R)
    tr = float(np.trace(R))
    cos_q = max(-1.0, min(1.0, 0.5 * (tr - 1.0)))
    q = math.acos(cos_q)
    vee = 0.5 * np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    if q < _SMALL_ANGLE:
        return vee * (1.0 + q * q / 6.0)
    if tr <= -1.0 + 1e-9:
        warnings.warn("rot_log at angle pi: axis sign fixed by convention", CutLocusWarning)
        # acos is ill-conditioned near pi; ||vee|| = sin(q) is not
        q = math.pi - math.asin(min(1.0, float(np.linalg.norm(vee))))
        B = 0.5 * (R + np.eye(3))
        axis = np.sqrt(np.clip(np.diag(B), 0.0, None))
        k = int(np.argmax(axis))
        # Off-diagonal entries of B are n_i * n_j: recover relative signs.
        for i in range(3):
            if i != k and B[k, i] < 0:
                axis[i] = -axis[i]
        axis /= np.linalg.norm(axis)
        return q * axis
    return vee * (q / math.sin(q))


def _vinv_coeff(q: float) -> float:
    """(1 - (q/2) cot(q/2)) / q^2 with its q -> 0 series 1/12 + q^2/720 + ..."""
    if q < _SMALL_ANGLE:
        return 1.0 / 12.0 + q * q / 720.0
    return (1.0 - 0.5 * q / math.tan(0.5 * q)) / (q * q)


def se3_log(g: SE3Element) -> SE3Coords:
    """First-kind coefficients of a group element (rotation angle < pi)."""
    w = rot_log(g.R)
    q = float(np.linalg.norm(w))
    if abs(q - math.pi) < 1e-9:
        warnings.warn("se3_log at rotation angle pi: near the cut locus", CutLocusWarning)
    Om = skew(w)
    vinv = np.eye(3) - 0.5 * Om + _vinv_coeff(q) * (Om @ Om)
    return SE3Coords(np.concatenate([vinv @ g.x, w]))


def se3_exp(c: SE3Coords) -> SE3Element:
    """Group element of a first-kind coefficient vector (inverse of se3_log)."""
    w = c.rotational
    q = float(np.linalg.norm(w))
    Om = skew(w)
    if q < _SMALL_ANGLE:
        q2 = q * q
        b = 0.5 - q2 / 24.0
        d = 1.0 / 6.0 - q2 / 120.0
    else:
        b = (1.0 - math.cos(q)) / (q * q)
        d = (q - math.sin(q)) / (q * q * q)
    V = np.eye(3) + b * Om + d * (Om @ Om)
    return SE3Element(V @ c.spatial, rot_exp(w))


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def lift_to_se3(p: OrientedPoint3D) -> SE3Element:
    """Section of the oriented-point quotient: the rotation about the heading
    axis is fixed by compensating the azimuth (third Euler angle = -gamma),
    which preserves the rotational symmetry about e_z.

    The antipode n = -e_z maps to the rotation by pi about e_y (gamma = 0).
    """
    n = p.n
    beta = math.acos(max(-1.0, min(1.0, n[2])))
    gamma = math.atan2(n[1], n[0])
    R = rot_z(gamma) @ rot_y(beta) @ rot_z(-gamma)
    return SE3Element(p.y, R)


def se3_algebra_basis() -> list[np.ndarray]:
    """Matrix generators (4x4 homogeneous), translations first."""
    basis = []
    for i in range(3):
        m = np.zeros((4, 4))
        m[i, 3] = 1.0
        basis.append(m)
    for i in range(3):
        m = np.zeros((4, 4))
        w = np.zeros(3)
        w[i] = 1.0
        m[:3, :3] = skew(w)
        basis.append(m)
    return basis


def se3_frame(g: SE3Element) -> list[np.ndarray]:
    """Left-invariant frame at g as six 4x4 tangent matrices g X_i.

    The translational parts of the first three are the columns of R; in
    particular the third one is the heading R e_z.
    """
    gm = g.matrix()
    return [gm @ X for X in se3_algebra_basis()]


def se3_nilpotent_compose(a: SE3Coords, b: SE3Coords) -> SE3Coords:
    """Step-2 truncated product on first-kind coordinates (free nilpotent,
    rank 3, step 2); the inverse is negation."""
    x, y = a.c, b.c
    out = x + y
    out[0] += 0.5 * (x[4] * y[2] - x[2] * y[4])
    out[1] += 0.5 * (x[2] * y[3] - x[3] * y[2])
    out[5] += 0.5 * (x[3] * y[4] - x[4] * y[3])
    return SE3Coords(out)


DILATION_WEIGHTS = np.array([2, 2, 1, 1, 1, 2])


def se3_dilate(s: float, c: SE3Coords) -> SE3Coords:
    """Dilation with weight 1 on the horizontal directions (c3, c4, c5) and
    weight 2 on the commutator directions (c1, c2, c6)."""
    if s <= 0:
        raise ValueError(f"dilation factor must be positive, got {s}")
    return SE3Coords(c.c * (s ** DILATION_WEIGHTS.astype(float)))


def se3_gauge_norm(c: SE3Coords, xi: float = DEFAULT_XI, zeta: float = DEFAULT_ZETA) -> float:
    """Homogeneous gauge with the horizontal block (xi^2 c3^2 + c4^2 + c5^2)
    squared plus zeta times the commutator block xi^2 (c1^2 + c2^2) + c6^2."""
    if xi <= 0 or zeta <= 0:
        raise ValueError("xi and zeta must be positive")
    v = c.c
    horiz = xi * xi * v[2] * v[2] + v[3] * v[3] + v[4] * v[4]
    vert = xi * xi * (v[0] * v[0] + v[1] * v[1]) + v[5] * v[5]
    return (horiz * horiz + zeta * vert) ** 0.25


def se3_approx_distance(
    g: SE3Element | OrientedPoint3D,
    h: SE3Element | OrientedPoint3D,
    xi: float = DEFAULT_XI,
    zeta: float = DEFAULT_ZETA,
) -> float:
    """Left-invariant approximation of the sub-Riemannian distance: the gauge
    norm of the logarithm of g^-1 h.  Oriented points are lifted first."""
    if isinstance(g, OrientedPoint3D):
        g = lift_to_se3(g)
    if isinstance(h, OrientedPoint3D):
        h = lift_to_se3(h)
    return se3_gauge_norm(se3_log(se3_compose(se3_inverse(g), h)), xi, zeta)


def se3_fundamental_gauge(c: SE3Coords) -> float:
    """Gauge-based fundamental-solution estimate ||c||_{1,16}^(2-Q) with
    homogeneous dimension Q = 9 (three weight-1 and three weight-2 directions)."""
    n = se3_gauge_norm(c, 1.0, 16.0)
    if n == 0.0:
        raise NumericalError("fundamental solution is singular at the origin")
    return n ** (2 - 9)
