"""Seeded evaluation points: Gaussian, exponential, uniform and mapped-uniform.

All draws come from NumPy's Philox4x64-10 counter-based generator keyed
directly by the 64-bit seed. Raw 64-bit words are converted to floats by
hand, so a (distribution, seed, m, d) tuple reproduces the same matrix on
any platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import DomainError

__all__ = [
    "RNG_ALGORITHM",
    "Distribution",
    "MappingSpec",
    "SampleSet",
    "sample",
    "open_uniforms",
    "map_point",
    "inverse_map",
    "derive_trial_seed",
]

RNG_ALGORITHM = "philox4x64-10/open52/box-muller"

_MASK64 = (1 << 64) - 1


class Distribution(str, Enum):
    GAUSSIAN = "gaussian"          # density proportional to exp(-y^2), i.e. N(0, 1/2)
    EXPONENTIAL = "exponential"    # density exp(-y) on (0, inf)
    UNIFORM_SYM = "uniform-sym"    # (-1, 1)
    UNIFORM_POS = "uniform-pos"    # (0, 1)
    MAPPED_UNIFORM = "mapped-uniform"


@dataclass(frozen=True)
class MappingSpec:
    """Algebraic/logarithmic map from a bounded interval to an unbounded one.

    ``r = 0``: (-1, 1) -> R, ``y = (L/2) log((1+xi)/(1-xi))``.
    ``r = 1``: [0, 1) -> [0, inf), ``y = L xi / sqrt(1 - xi^2)``.
    """

    r: int
    L: float

    def __post_init__(self):
        if self.r not in (0, 1):
            raise ValueError(f"mapping family r must be 0 or 1, got {self.r}")
        if not self.L > 0:
            raise ValueError(f"mapping parameter L must be positive, got {self.L}")


def map_point(xi, spec: MappingSpec):
    xi = np.asarray(xi, dtype=float)
    if spec.r == 0:
        if np.any(np.abs(xi) >= 1):
            raise DomainError("logarithmic map needs |xi| < 1")
        y = spec.L * np.arctanh(xi)
    else:
        if np.any((xi < 0) | (xi >= 1)):
            raise DomainError("algebraic map needs 0 <= xi < 1")
        y = spec.L * xi / np.sqrt((1.0 - xi) * (1.0 + xi))
    return float(y) if y.ndim == 0 else y


def inverse_map(y, spec: MappingSpec):
    y = np.asarray(y, dtype=float)
    if spec.r == 0:
        xi = np.tanh(y / spec.L)
    else:
        if np.any(y < 0):
            raise DomainError("algebraic map is defined for y >= 0")
        s = y / spec.L
        xi = s / np.sqrt(s * s + 1.0)
    return float(xi) if xi.ndim == 0 else xi


def derive_trial_seed(base_seed: int, trial_index: int) -> int:
    """SplitMix64 finalizer applied to ``base ^ (index * golden)``."""
    z = (int(base_seed) ^ (int(trial_index) * 0x9E3779B97F4A7C15)) & _MASK64
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def open_uniforms(seed: int, n: int) -> np.ndarray:
    """``n`` uniforms on the open interval (0, 1).

    Each uses the top 52 bits ``k`` of a raw word as ``(k + 0.5) / 2**52``.
    That value is exact in double precision (with 53 bits the largest
    pattern would round up to 1.0), so neither endpoint can occur and
    ``2u - 1`` never hits +-1 either.
    """
    bitgen = np.random.Philox(key=int(seed) & _MASK64)
    raw = bitgen.random_raw(n)
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0 ** -52


@dataclass(frozen=True)
class SampleSet:
    """An ``m x d`` matrix of points with enough provenance to regenerate it.

    ``scale`` records a per-coordinate factor applied after drawing (used
    when points are dilated by ``1/alpha`` for a scaled fit).
    """

    points: np.ndarray
    distribution: Distribution
    seed: int
    mapping: MappingSpec | None = None
    scale: np.ndarray | None = field(default=None)
    algorithm: str = RNG_ALGORITHM

    @property
    def m(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def rescaled(self, factor) -> "SampleSet":
        factor = np.broadcast_to(np.asarray(factor, dtype=float), (self.d,))
        base = np.ones(self.d) if self.scale is None else self.scale
        pts = self.points * factor
        pts.setflags(write=False)
        return replace(self, points=pts, scale=base * factor)

    def redraw(self, m: int, seed: int) -> "SampleSet":
        """Fresh points from the same law (including any rescaling)."""
        new = sample(self.distribution, m, self.d, seed, mapping=self.mapping)
        return new if self.scale is None else new.rescaled(self.scale)


def sample(distribution, m: int, d: int, seed: int, mapping: MappingSpec | None = None) -> SampleSet:
    """Draw ``m`` i.i.d. points in ``d`` dimensions, filled row-major."""
    distribution = Distribution(distribution)
    if m < 1 or d < 1:
        raise ValueError(f"need m >= 1 and d >= 1, got m={m}, d={d}")
    n = m * d
    if distribution is Distribution.GAUSSIAN:
        u = open_uniforms(seed, 2 * ((n + 1) // 2)).reshape(-1, 2)
        rad = np.sqrt(-2.0 * np.log(u[:, 0]))
        ang = 2.0 * np.pi * u[:, 1]
        z = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)]).ravel()[:n]
        pts = z * np.sqrt(0.5)
    else:
        u = open_uniforms(seed, n)
        if distribution is Distribution.EXPONENTIAL:
            pts = -np.log1p(-u)
        elif distribution is Distribution.UNIFORM_SYM:
            pts = 2.0 * u - 1.0
        elif distribution is Distribution.UNIFORM_POS:
            pts = u
        else:
            if mapping is None:
                raise ValueError("mapped-uniform sampling needs a MappingSpec")
            pts = map_point(2.0 * u - 1.0 if mapping.r == 0 else u, mapping)
    if distribution is not Distribution.MAPPED_UNIFORM:
        mapping = None
    pts = np.asarray(pts, dtype=float).reshape(m, d)
    pts.setflags(write=False)
    return SampleSet(pts, distribution, int(seed) & _MASK64, mapping)
