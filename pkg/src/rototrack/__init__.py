"""Sub-Riemannian distances on SE(2)/SE(3) and perceptual grouping of vessels.

The package provides exact rigid-motion group operations, nilpotent-group
distance approximations, anisotropic fast marching on lifted grids, minimal
path tracking with key points, and the greedy perceptual grouping algorithm,
together with a CLI frontend (``rototrack``).
"""

__version__ = "0.1.0"


class ConfigError(ValueError):
    """Invalid configuration or parameters (CLI exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure such as a singular input or a stalled descent (exit code 3)."""


class CutLocusWarning(UserWarning):
    """Emitted when a logarithm is evaluated at or near the cut locus."""


from .se2 import SE2Element, SE2Coords  # noqa: E402
from .se3 import SE3Element, SE3Coords, OrientedPoint3D  # noqa: E402
from .metrics import MetricSpec, CostField  # noqa: E402

__all__ = [
    "ConfigError",
    "NumericalError",
    "CutLocusWarning",
    "SE2Element",
    "SE2Coords",
    "SE3Element",
    "SE3Coords",
    "OrientedPoint3D",
    "MetricSpec",
    "CostField",
]
