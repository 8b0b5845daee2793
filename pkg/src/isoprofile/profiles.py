"""Exact isoperimetric profiles of model spaces and sampled profiles.

A :class:`SampledProfile` is the common currency of the checkers: strictly
increasing volumes with strictly positive profile values.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .model_space import (
    ComparisonParams,
    cos_k,
    model_area,
    model_diameter,
    model_volume,
    omega,
    sin_k,
)

# volumes closer than this (relative) to the total volume of a sphere are rejected
CAP_MARGIN = 1e-9


@dataclass(frozen=True)
class SpaceForm:
    """Simply connected model space with Ricci bound ``K`` and dimension ``N``."""

    params: ComparisonParams

    @classmethod
    def from_KN(cls, K: float, N: float) -> "SpaceForm":
        return cls(ComparisonParams(K, N))

    @property
    def K(self) -> float:
        return self.params.K

    @property
    def N(self) -> float:
        return self.params.N

    @property
    def k(self) -> float:
        return self.params.k

    @property
    def total_volume(self) -> float:
        if self.k > 0:
            return model_volume(self.N, self.k, model_diameter(self.k))
        return math.inf

    def volume(self, r: float) -> float:
        return model_volume(self.N, self.k, r)

    def area(self, r: float) -> float:
        return model_area(self.N, self.k, r)


@dataclass(frozen=True)
class ConeModel:
    """Euclidean cone with asymptotic volume ratio ``avr``; ``avr = 1`` is flat space."""

    N: float
    avr: float

    def __post_init__(self) -> None:
        if not self.N > 1:
            raise ValueError("N must exceed 1")
        if not 0 < self.avr <= 1:
            raise ValueError(f"avr must lie in (0, 1], got {self.avr}")

    @property
    def total_volume(self) -> float:
        return math.inf

    @property
    def density_constant(self) -> float:
        """Limit of ``I(v) / v^((N-1)/N)``, which is also its value everywhere."""
        return self.N * (omega(self.N) * self.avr) ** (1.0 / self.N)


ProfileSource = Union[SpaceForm, ConeModel]


def _check_volume(form: SpaceForm, v: float) -> None:
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"volume must be positive and finite, got {v}")
    total = form.total_volume
    if math.isfinite(total) and v >= total * (1.0 - CAP_MARGIN):
        raise ValueError(f"volume {v} is not below the total volume {total}")


def radius_for_volume(form: SpaceForm, v: float) -> float:
    """Radius of the model ball of volume ``v``.

    Bisection keeps a bracket; Newton steps (with the area as derivative) are
    taken whenever they stay inside it, and iteration continues until the
    step is at rounding level.
    """
    _check_volume(form, v)
    N, k = form.N, form.k
    r = (v / omega(N)) ** (1.0 / N)
    if k > 0:
        lo, hi = 0.0, model_diameter(k)
        r = min(r, 0.5 * hi)
    else:
        lo, hi = 0.0, r
        while model_volume(N, k, hi) < v:
            lo, hi = hi, 2.0 * hi
        r = 0.5 * (lo + hi) if lo > 0 else r
    for _ in range(200):
        f = model_volume(N, k, r) - v
        if f > 0:
            hi = r
        elif f < 0:
            lo = r
        else:
            return r
        area = model_area(N, k, r)
        step = f / area if area > 0 else math.inf
        nxt = r - step
        if not (lo < nxt < hi):
            nxt = 0.5 * (lo + hi)
        if abs(nxt - r) <= 4.0 * math.ulp(r):
            return nxt
        r = nxt
    return r


def model_profile(form: SpaceForm, v: float) -> float:
    """Perimeter of the model ball of volume ``v``."""
    return form.area(radius_for_volume(form, v))


def model_barrier(form: SpaceForm, v: float) -> float:
    """Mean curvature ``(N-1) cos_k(r) / sin_k(r)`` of the model sphere enclosing volume ``v``.

    Coincides with the derivative of :func:`model_profile` at ``v``.
    """
    r = radius_for_volume(form, v)
    return (form.N - 1.0) * cos_k(form.k, r) / sin_k(form.k, r)


def cone_profile(cone: ConeModel, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"volume must be positive and finite, got {v}")
    return cone.density_constant * v ** ((cone.N - 1.0) / cone.N)


def profile_value(source: ProfileSource, v: float) -> float:
    if isinstance(source, ConeModel):
        return cone_profile(source, v)
    return model_profile(source, v)


@dataclass(frozen=True)
class ProfileMeta:
    K: Optional[float] = None
    N: Optional[float] = None
    v0: Optional[float] = None
    total_volume: Optional[float] = None


@dataclass(frozen=True)
class SampledProfile:
    """Profile values on a strictly increasing volume grid (immutable)."""

    volumes: np.ndarray
    values: np.ndarray
    meta: ProfileMeta = field(default_factory=ProfileMeta)

    def __post_init__(self) -> None:
        vols = np.array(self.volumes, dtype=float)
        vals = np.array(self.values, dtype=float)
        if vols.ndim != 1 or vals.ndim != 1 or vols.shape != vals.shape:
            raise ValueError("volumes and values must be 1-D sequences of equal length")
        if vols.size < 3:
            raise ValueError("a sampled profile needs at least 3 points")
        if not (np.all(np.isfinite(vols)) and np.all(np.isfinite(vals))):
            raise ValueError("non-finite entries in sampled profile")
        if vols[0] <= 0:
            raise ValueError("volumes must be positive")
        if np.any(np.diff(vols) <= 0):
            raise ValueError("volumes must be strictly increasing")
        if np.any(vals <= 0):
            raise ValueError("profile values must be strictly positive")
        total = self.meta.total_volume
        if total is not None and math.isfinite(total) and vols[-1] >= total:
            raise ValueError("largest volume must stay below the total volume")
        vols.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "volumes", vols)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return int(self.volumes.size)

    @property
    def step(self) -> float:
        """Mean spacing; meaningful for uniform grids."""
        return float((self.volumes[-1] - self.volumes[0]) / (len(self) - 1))

    def is_uniform(self, rtol: float = 1e-9) -> bool:
        gaps = np.diff(self.volumes)
        return bool(np.max(np.abs(gaps - self.step)) <= rtol * self.step)

    def with_values(self, values: np.ndarray) -> "SampledProfile":
        return SampledProfile(self.volumes, values, self.meta)


@dataclass(frozen=True)
class GridSpec:
    kind: str  # "uniform" | "geometric"
    v_min: float
    v_max: float
    n: int

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "geometric"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        if not (math.isfinite(self.v_min) and math.isfinite(self.v_max)):
            raise ValueError("grid bounds must be finite")
        if not 0 < self.v_min < self.v_max:
            raise ValueError("grid bounds must satisfy 0 < v_min < v_max")
        if self.n < 3:
            raise ValueError("grid needs n >= 3")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``kind:v_min:v_max:n``, e.g. ``uniform:1:2:3``."""
        m = re.fullmatch(r"(uniform|geometric):([^:]+):([^:]+):(\d+)", text.strip())
        if not m:
            raise ValueError(f"malformed grid spec {text!r}; expected kind:v_min:v_max:n")
        return cls(m.group(1), float(m.group(2)), float(m.group(3)), int(m.group(4)))

    def volumes(self) -> np.ndarray:
        i = np.arange(self.n, dtype=float)
        last = self.n - 1.0
        if self.kind == "uniform":
            vols = ((last - i) * self.v_min + i * self.v_max) / last
        else:
            vols = self.v_min * (self.v_max / self.v_min) ** (i / last)
            vols[-1] = self.v_max
        vols[0] = self.v_min
        return vols


def sample_profile(source: ProfileSource, grid: GridSpec) -> SampledProfile:
    """Evaluate an exact model profile on a grid."""
    vols = grid.volumes()
    if isinstance(source, SpaceForm):
        total = source.total_volume
        if math.isfinite(total) and grid.v_max >= total * (1.0 - CAP_MARGIN):
            raise ValueError("grid reaches the total volume of the space form")
        meta = ProfileMeta(K=source.K, N=source.N, total_volume=total)
    else:
        meta = ProfileMeta(K=0.0, N=source.N, total_volume=math.inf)
    values = np.array([profile_value(source, float(v)) for v in vols])
    return SampledProfile(vols, values, meta)


def derivative_bracket(p: SampledProfile, index: int) -> tuple[float, float]:
    """Forward and backward difference quotients ``(right, left)`` at an interior point."""
    if not 1 <= index <= len(p) - 2:
        raise IndexError(f"index {index} is not an interior grid index")
    v, I = p.volumes, p.values
    right = (I[index + 1] - I[index]) / (v[index + 1] - v[index])
    left = (I[index] - I[index - 1]) / (v[index] - v[index - 1])
    return float(right), float(left)


def _richardson_at_zero(x: np.ndarray, y: np.ndarray) -> float:
    """Value at ``x = 0`` of the quadratic through three points."""
    (x0, x1, x2), (y0, y1, y2) = x, y
    l0 = x1 * x2 / ((x0 - x1) * (x0 - x2))
    l1 = x0 * x2 / ((x1 - x0) * (x1 - x2))
    l2 = x0 * x1 / ((x2 - x0) * (x2 - x1))
    return float(l0 * y0 + l1 * y1 + l2 * y2)


@dataclass(frozen=True)
class DensityLimit:
    limit: float
    smallest_ratio: float


def small_volume_density_limit(
    p: SampledProfile, N: float, extrapolate: bool = True
) -> DensityLimit:
    """Estimate ``lim_{v -> 0} I(v) / v^((N-1)/N)``.

    The ratio at the three smallest volumes is extrapolated to zero with a
    quadratic in ``v^(2/N)``, matching the model expansion
    ``theta (1 + O(v^(2/N)))``. With ``extrapolate=False`` the smallest-point
    ratio is returned as the limit.
    """
    v, I = p.volumes, p.values
    if np.count_nonzero(v < v[-1] / 100.0) < 3:
        raise ValueError("grid too coarse: need 3 points below v_max / 100")
    ratios = I[:3] / v[:3] ** ((N - 1.0) / N)
    raw = float(ratios[0])
    if not extrapolate:
        return DensityLimit(raw, raw)
    return DensityLimit(_richardson_at_zero(v[:3] ** (2.0 / N), ratios), raw)
