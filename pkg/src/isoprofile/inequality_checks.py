"""Grid-scale checks of second-order differential inequalities for profiles.

Every checker produces a :class:`CheckReport` whose residuals are oriented
so that a point passes when ``residual >= -tolerance``.

Two stencils are available for the viscosity inequalities:

``central``
    Central first difference and second incremental quotient.
``touching-parabola``
    At each point the quadratic with the largest curvature that touches the
    samples from below on a 5-point window is used as the test function.
    Staying below the samples costs O(h) in curvature, so this mode converges
    at first order and errs towards passing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .profiles import SampledProfile, small_volume_density_limit

CENTRAL = "central-difference"
TOUCHING = "touching-parabola"
_METHODS = {"central": CENTRAL, CENTRAL: CENTRAL, "touching": TOUCHING, TOUCHING: TOUCHING}


@dataclass(frozen=True)
class CheckReport:
    volumes: np.ndarray
    residuals: np.ndarray
    tolerance: float
    method: str
    resampled: bool = False

    @property
    def passed(self) -> np.ndarray:
        return self.residuals >= -self.tolerance

    @property
    def pass_count(self) -> int:
        return int(np.count_nonzero(self.passed))

    @property
    def fail_count(self) -> int:
        return int(self.residuals.size - self.pass_count)

    @property
    def ok(self) -> bool:
        return self.fail_count == 0

    @property
    def min_residual(self) -> float:
        return float(np.min(self.residuals))

    @property
    def argmin_v(self) -> float:
        return float(self.volumes[int(np.argmin(self.residuals))])

    def summary(self) -> dict:
        return {
            "method": self.method,
            "tolerance": self.tolerance,
            "min_residual": self.min_residual,
            "argmin_v": self.argmin_v,
            "passed": self.pass_count,
            "failed": self.fail_count,
            "resampled": self.resampled,
        }


def default_tolerance(h: float, scale: float) -> float:
    """``max(1e-9, 10 h^2 scale)``: the O(h^2) truncation budget of the stencils."""
    return max(1e-9, 10.0 * h * h * scale)


def _method(name: str) -> str:
    try:
        return _METHODS[name]
    except KeyError:
        raise ValueError(f"unknown method {name!r}") from None


def as_uniform(p: SampledProfile, rtol: float = 1e-9) -> tuple[np.ndarray, np.ndarray, float, bool]:
    """Return ``(volumes, values, h, resampled)`` on a uniform grid.

    Non-uniform grids are resampled with a monotone piecewise-cubic
    interpolant onto the uniform grid with the same endpoints and size.
    """
    if p.is_uniform(rtol):
        return p.volumes, p.values, p.step, False
    n = len(p)
    vols = np.linspace(p.volumes[0], p.volumes[-1], n)
    vals = PchipInterpolator(p.volumes, p.values)(vols)
    return vols, vals, float(vols[1] - vols[0]), True


def second_incremental_quotient(
    values: Sequence[float], index: int, h: float, volumes: Optional[Sequence[float]] = None
) -> float:
    """``(f(x+h) + f(x-h) - 2 f(x)) / h^2`` at a grid index."""
    f = np.asarray(values, dtype=float)
    if not 1 <= index <= f.size - 2:
        raise IndexError(f"index {index} is not interior")
    if volumes is not None:
        v = np.asarray(volumes, dtype=float)
        gaps = v[index + 1] - v[index], v[index] - v[index - 1]
        if abs(gaps[0] - h) > 1e-9 * h or abs(gaps[1] - h) > 1e-9 * h:
            raise ValueError("grid is not uniform with step h around this index")
    return float((f[index + 1] + f[index - 1] - 2.0 * f[index]) / (h * h))


def upper_second_quotient(values: Sequence[float], index: int, h: float) -> float:
    """Largest second quotient over the steps ``h, 2h, 4h`` that fit on the grid.

    A finite stand-in for the limsup in the upper second derivative; it can
    only under-approximate that limsup.
    """
    f = np.asarray(values, dtype=float)
    best = -math.inf
    for mult in (1, 2, 4):
        if index - mult < 0 or index + mult >= f.size:
            break
        q = (f[index + mult] + f[index - mult] - 2.0 * f[index]) / (mult * h) ** 2
        best = max(best, q)
    if best == -math.inf:
        raise IndexError(f"index {index} is not interior")
    return float(best)


def touching_parabola(values: Sequence[float], index: int, h: float) -> tuple[float, float]:
    """Slope and curvature of the most curved parabola below the samples at ``index``.

    Solves ``max a`` subject to ``f0 + b d + a d^2 / 2 <= f(x0 + d)`` for the
    offsets ``d`` in a window of up to two steps on each side.
    """
    f = np.asarray(values, dtype=float)
    if not 1 <= index <= f.size - 2:
        raise IndexError(f"index {index} is not interior")
    reach = min(2, index, f.size - 1 - index)
    offsets = [j for j in range(-reach, reach + 1) if j != 0]
    d = np.array(offsets, dtype=float) * h
    delta = f[index + np.array(offsets)] - f[index]

    def curvature_cap(b: float) -> float:
        return float(np.min(2.0 * (delta - b * d) / d**2))

    best_a, best_b = -math.inf, 0.0
    for p in np.flatnonzero(d > 0):
        for q in np.flatnonzero(d < 0):
            # intersection of the two active constraints
            det = d[p] * d[q] ** 2 / 2.0 - d[q] * d[p] ** 2 / 2.0
            b = (delta[p] * d[q] ** 2 / 2.0 - delta[q] * d[p] ** 2 / 2.0) / det
            a = curvature_cap(b)
            if a > best_a:
                best_a, best_b = a, b
    return float(best_b), float(best_a)


def _derivatives(f: np.ndarray, h: float, method: str) -> tuple[np.ndarray, np.ndarray]:
    if method == CENTRAL:
        d1 = (f[2:] - f[:-2]) / (2.0 * h)
        d2 = (f[2:] + f[:-2] - 2.0 * f[1:-1]) / (h * h)
        return d1, d2
    pairs = [touching_parabola(f, i, h) for i in range(1, f.size - 1)]
    return np.array([b for b, _ in pairs]), np.array([a for _, a in pairs])


def check_bp(
    p: SampledProfile,
    K: float,
    N: float,
    tol: Optional[float] = None,
    method: str = "central",
) -> CheckReport:
    """Pointwise residual of ``-I'' I >= K + I'^2 / (N - 1)``."""
    method = _method(method)
    if not N > 1:
        raise ValueError("N must exceed 1")
    vols, I, h, resampled = as_uniform(p)
    d1, d2 = _derivatives(I, h, method)
    residual = -d2 * I[1:-1] - K - d1**2 / (N - 1.0)
    if tol is None:
        tol = default_tolerance(h, float(np.max(np.abs(I))))
    return CheckReport(vols[1:-1], residual, tol, method, resampled)


def check_bayle(
    p: SampledProfile,
    K: float,
    N: float,
    alpha: float,
    tol: Optional[float] = None,
    method: str = "central",
) -> CheckReport:
    """Residual of the inequality for ``xi = I^(alpha/(alpha-1))``, ``alpha >= N``.

    Checks ``-xi'' >= alpha/(alpha-1) xi^((2-alpha)/alpha)
    ((1/(N-1) - 1/(alpha-1)) I'^2 + K)``; at ``alpha = N`` this is
    ``-psi'' >= K N/(N-1) psi^((2-N)/N)`` for ``psi = I^(N/(N-1))``.
    """
    method = _method(method)
    if not N > 1:
        raise ValueError("N must exceed 1")
    if alpha < N:
        raise ValueError(f"alpha must be >= N, got alpha={alpha}, N={N}")
    vols, I, h, resampled = as_uniform(p)
    expo = alpha / (alpha - 1.0)
    xi = I**expo
    coeff = 1.0 / (N - 1.0) - 1.0 / (alpha - 1.0)
    if method == CENTRAL:
        dI = (I[2:] - I[:-2]) / (2.0 * h)
        _, xi2 = _derivatives(xi, h, CENTRAL)
        slope_sq = dI**2
    else:
        xi1, xi2 = _derivatives(xi, h, TOUCHING)
        slope_sq = ((alpha - 1.0) / alpha) ** 2 * xi[1:-1] ** (-2.0 / alpha) * xi1**2
    rhs = expo * xi[1:-1] ** ((2.0 - alpha) / alpha) * (coeff * slope_sq + K)
    residual = -xi2 - rhs
    if tol is None:
        tol = default_tolerance(h, float(np.max(np.abs(xi))))
    return CheckReport(vols[1:-1], residual, tol, method, resampled)


def concavity_transform(I: np.ndarray, v: np.ndarray, N: float, C: float, variant: str) -> np.ndarray:
    if variant == "eta":
        return I ** (N / (N - 1.0)) - C * v ** ((2.0 + N) / N)
    if variant == "eta_tilde":
        return I - C * v ** ((1.0 + N) / N)
    raise ValueError(f"unknown variant {variant!r}; use 'eta' or 'eta_tilde'")


def check_concavity_transform(
    p: SampledProfile,
    N: float,
    C: float,
    variant: str = "eta",
    v1: Optional[float] = None,
    tol: Optional[float] = None,
) -> CheckReport:
    """Midpoint concavity of ``I^(N/(N-1)) - C v^((2+N)/N)`` (``eta``) or ``I - C v^((1+N)/N)`` (``eta_tilde``) on ``(0, v1]``.

    Residuals are ``-D2 g`` with ``D2`` the largest dyadic second quotient.
    """
    vols, I, h, resampled = as_uniform(p)
    if v1 is None:
        v1 = float(vols[-1])
    if v1 < vols[0]:
        raise ValueError("range (0, v1] does not meet the grid")
    keep = vols <= v1 * (1.0 + 1e-12)
    if np.count_nonzero(keep) < 3:
        raise ValueError("fewer than 3 grid points in (0, v1]")
    v, f = vols[keep], I[keep]
    g = concavity_transform(f, v, N, C, variant)
    residual = np.array([-upper_second_quotient(g, i, h) for i in range(1, g.size - 1)])
    if tol is None:
        tol = default_tolerance(h, float(np.max(np.abs(g))))
    return CheckReport(v[1:-1], residual, tol, CENTRAL, resampled)


def choose_concavity_constant(K: float, N: float, theta: Optional[float] = None) -> float:
    """Constant ``C`` making ``I^(N/(N-1)) - C v^((2+N)/N)`` concave for small volumes.

    ``-K`` when ``N = 2``; ``-K N^3 theta^((2-N)/(N-1)) / (2 (N-1)(N+2))`` when ``N > 2``.
    """
    if K > 0:
        raise ValueError("the concavity constant is only available for K <= 0")
    if N == 2:
        return 0.0 if K == 0 else float(-K)
    if not N > 2:
        raise ValueError("need N = 2 or N > 2")
    if theta is None or not theta > 0:
        raise ValueError("theta > 0 is required for N > 2")
    if K == 0:
        return 0.0
    return float(-K) * N**3 * theta ** ((2.0 - N) / (N - 1.0)) / (2.0 * (N - 1.0) * (N + 2.0))


def _range_mask(v: np.ndarray, v_range: tuple[float, float]) -> np.ndarray:
    lo, hi = v_range
    return (v >= lo) & (v <= hi)


def lipschitz_constant(p: SampledProfile, power: float, v_range: tuple[float, float]) -> float:
    """Largest slope of ``I^power`` between consecutive grid points inside ``v_range``."""
    v = p.volumes
    mask = _range_mask(v, v_range)
    both = mask[:-1] & mask[1:]
    if not np.any(both):
        raise ValueError("no pair of consecutive grid points inside the range")
    f = p.values**power
    slopes = np.abs(np.diff(f) / np.diff(v))[both]
    return float(np.max(slopes))


def check_ratio_bounds(
    p: SampledProfile,
    N: float,
    theta: float,
    C1: float,
    v1: float,
    tol: float = 0.0,
) -> CheckReport:
    """``theta <= I(v) / v^((N-1)/N) <= C1`` for grid volumes ``v <= v1``."""
    keep = p.volumes <= v1
    if not np.any(keep):
        raise ValueError("no grid volume in (0, v1]")
    v = p.volumes[keep]
    ratio = p.values[keep] / v ** ((N - 1.0) / N)
    residual = np.minimum(ratio - theta, C1 - ratio)
    return CheckReport(v, residual, tol, "ratio")


@dataclass(frozen=True)
class DerivativeAsymptotics:
    theta_est: float
    slope_limit_est: float
    ratio_of_limits: float


def check_derivative_asymptotics(p: SampledProfile, N: float) -> DerivativeAsymptotics:
    """Estimate ``theta`` and ``lim I'_+(v) / v^(-1/N)``; their ratio should be ``(N-1)/N``.

    Forward differences are taken in the variable ``u = v^((N-1)/N)``, i.e.
    the forward quotient of ``I`` is divided by the forward quotient of the
    exact power law, which removes the leading bias of coarse geometric grids.
    The three smallest quotients are extrapolated to ``v = 0`` like the
    density limit.
    """
    theta = small_volume_density_limit(p, N).limit
    v, I = p.volumes, p.values
    if v.size < 4:
        raise ValueError("grid too coarse")
    u = v ** ((N - 1.0) / N)
    q = (N - 1.0) / N * np.diff(I[:4]) / np.diff(u[:4])
    x = v[:3] ** (2.0 / N)
    (x0, x1, x2), (y0, y1, y2) = x, q
    slope = (
        y0 * x1 * x2 / ((x0 - x1) * (x0 - x2))
        + y1 * x0 * x2 / ((x1 - x0) * (x1 - x2))
        + y2 * x0 * x1 / ((x2 - x0) * (x2 - x1))
    )
    return DerivativeAsymptotics(theta, float(slope), float(slope / theta))


# ---------------------------------------------------------------------------
# min-plus combination and subadditivity


def _lattice_units(volumes: np.ndarray, h: float) -> np.ndarray:
    units = volumes / h
    rounded = np.rint(units)
    if np.max(np.abs(units - rounded)) > 1e-6:
        raise ValueError("grid volumes are not integer multiples of the grid step")
    return rounded.astype(int)


@dataclass(frozen=True)
class Split:
    """One optimal decomposition: ``(profile_index, volume)`` per part."""

    parts: tuple[tuple[int, float], ...]

    @property
    def n_parts(self) -> int:
        return len(self.parts)

    def describe(self) -> str:
        return "+".join(f"{j}:{vol:.17g}" for j, vol in self.parts)


@dataclass(frozen=True)
class MinPlusTable:
    volumes: np.ndarray
    values: np.ndarray
    splits: tuple[Split, ...]


def _common_grid(profiles: Sequence[SampledProfile]) -> np.ndarray:
    if not profiles:
        raise ValueError("need at least one profile")
    base = profiles[0].volumes
    for q in profiles[1:]:
        if q.volumes.shape != base.shape or not np.allclose(q.volumes, base, rtol=1e-12, atol=0):
            raise ValueError("profiles do not share a common grid")
    if not profiles[0].is_uniform():
        raise ValueError("min-plus combination needs a uniform grid")
    return base


def minplus_table(
    profiles: Sequence[SampledProfile], max_parts: int = 2, tie_rtol: float = 1e-12
) -> MinPlusTable:
    """Generalized profile ``inf sum_j I_j(v_j)`` over splits ``sum v_j = v`` at every grid volume.

    Parts are grid volumes, each assigned to one of the profiles, at most
    ``max_parts`` of them. Computed by iterated min-plus convolution on the
    lattice of grid-step multiples. A split with more parts replaces a
    cheaper-in-parts one only when it is better by more than
    ``tie_rtol * scale``; among near-ties the smallest new part wins.
    """
    if max_parts < 1:
        raise ValueError("max_parts must be >= 1")
    vols = _common_grid(profiles)
    h = profiles[0].step
    units = _lattice_units(vols, h)
    stack = np.vstack([q.values for q in profiles])
    best_profile = np.argmin(stack, axis=0)
    single = stack[best_profile, np.arange(vols.size)]
    scale = float(np.max(single))
    tie = tie_rtol * scale

    size = int(units[-1]) + 1
    G = np.full(size, np.inf)
    G[units] = single
    G_owner = np.full(size, -1)
    G_owner[units] = best_profile

    cur = G.copy()
    parts: list[tuple[tuple[int, int], ...]] = [()] * size
    for u, j in zip(units, best_profile):
        parts[u] = ((int(u), int(j)),)

    for _ in range(2, max_parts + 1):
        nxt = cur.copy()
        nxt_parts = list(parts)
        for u in range(size):
            a = units[units < u]
            if a.size == 0:
                continue
            cand = cur[u - a] + G[a]
            i = int(np.argmin(cand))
            low = cand[i]
            if not np.isfinite(low) or not low < cur[u] - tie:
                continue
            i = int(np.flatnonzero(cand <= low + tie)[0])
            au = int(a[i])
            new = parts[u - au] + ((au, int(G_owner[au])),)
            nxt[u] = cand[i]
            nxt_parts[u] = tuple(sorted(new))
        cur, parts = nxt, nxt_parts

    values = cur[units]
    vol_of = {int(u): float(x) for u, x in zip(units, vols)}
    splits = tuple(Split(tuple((j, vol_of[uu]) for uu, j in parts[u])) for u in units)
    return MinPlusTable(vols.copy(), values, splits)


def minplus_combine(
    profiles: Sequence[SampledProfile], v: float, max_parts: int = 2
) -> tuple[float, Split]:
    """Generalized profile value and one optimal split at a grid volume ``v``."""
    table = minplus_table(profiles, max_parts)
    hits = np.flatnonzero(np.isclose(table.volumes, v, rtol=1e-12, atol=0))
    if hits.size == 0:
        raise ValueError(f"volume {v} is not a grid volume")
    i = int(hits[0])
    return float(table.values[i]), table.splits[i]


def check_strict_subadditivity(
    p: SampledProfile, eps: float, tol: float = 1e-9
) -> tuple[bool, Optional[tuple[float, float]]]:
    """Is ``I(a+b) < I(a) + I(b) - tol * max I`` for all grid pairs with ``a + b <= eps``?

    ``a + b`` must itself be a grid volume on lattice grids; on other grids
    ``I(a + b)`` is read off a monotone cubic interpolant when inside the grid.
    Returns ``(True, None)`` or ``(False, (a, b))`` for the first failing pair.
    """
    v, I = p.volumes, p.values
    margin = tol * float(np.max(np.abs(I)))
    lattice = None
    if p.is_uniform():
        try:
            lattice = _lattice_units(v, p.step)
        except ValueError:
            lattice = None
    interp = None if lattice is not None else PchipInterpolator(v, I)
    index_of = {int(u): i for i, u in enumerate(lattice)} if lattice is not None else None
    for i in range(v.size):
        a = v[i]
        if 2 * a > eps * (1 + 1e-12):
            break
        for j in range(i, v.size):
            b = v[j]
            s = a + b
            if s > eps * (1 + 1e-12):
                break
            if lattice is not None:
                k = index_of.get(int(lattice[i] + lattice[j]))
                if k is None:
                    continue
                Is = I[k]
            else:
                if s > v[-1]:
                    break
                Is = float(interp(s))
            if not Is < I[i] + I[j] - margin:
                return False, (float(a), float(b))
    return True, None
