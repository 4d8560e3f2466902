"""Orientation sample sets shared by the lifting, fast-marching and
validation code: a uniform circle for the planar case and a ZYZ Euler-angle
grid on the sphere (poles excluded by a half-step offset) for the 3D case."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .se3 import rot_y, rot_z


def se2_angles(n_theta: int) -> np.ndarray:
    """n_theta equally spaced angles starting at 0, covering the full circle."""
    if n_theta < 4:
        raise ValueError("need at least 4 orientation samples")
    return np.arange(n_theta) * (2.0 * math.pi / n_theta)


@dataclass(frozen=True)
class S2Grid:
    """Euler-angle sphere sampling: beta rows offset by half a step from the
    poles, gamma columns covering the full circle.

    The flat orientation index is ``o = i_beta * n_gamma + i_gamma``.
    """

    n_beta: int

    @property
    def n_gamma(self) -> int:
        return 2 * self.n_beta

    @property
    def count(self) -> int:
        return self.n_beta * self.n_gamma

    @property
    def beta_step(self) -> float:
        return math.pi / self.n_beta

    @property
    def gamma_step(self) -> float:
        return math.pi / self.n_beta

    def betas(self) -> np.ndarray:
        off = 0.5 * math.pi / self.n_beta
        return off + np.arange(self.n_beta) * self.beta_step

    def gammas(self) -> np.ndarray:
        return np.arange(self.n_gamma) * self.gamma_step

    def index(self, i_beta: int, i_gamma: int) -> int:
        return i_beta * self.n_gamma + (i_gamma % self.n_gamma)

    def angles(self, o: int) -> tuple[float, float]:
        return float(self.betas()[o // self.n_gamma]), float(self.gammas()[o % self.n_gamma])

    def vectors(self) -> np.ndarray:
        """Unit orientation vectors, shape (count, 3)."""
        b = self.betas()[:, None]
        g = self.gammas()[None, :]
        n = np.empty((self.n_beta, self.n_gamma, 3))
        n[..., 0] = np.sin(b) * np.cos(g)
        n[..., 1] = np.sin(b) * np.sin(g)
        n[..., 2] = np.cos(b) * np.ones_like(g)
        return n.reshape(-1, 3)

    def rotation(self, o: int) -> np.ndarray:
        """Lift of the sample: R_z(gamma) R_y(beta) R_z(-gamma)."""
        beta, gamma = self.angles(o)
        return rot_z(gamma) @ rot_y(beta) @ rot_z(-gamma)

    def nearest(self, n: np.ndarray) -> int:
        """Index of the sample closest (greatest dot product) to direction n."""
        return int(np.argmax(self.vectors() @ np.asarray(n, dtype=float)))

    def nearest_k(self, n: np.ndarray, k: int) -> np.ndarray:
        dots = self.vectors() @ np.asarray(n, dtype=float)
        return np.argsort(-dots)[:k]
