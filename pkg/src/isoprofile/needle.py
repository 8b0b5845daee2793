"""One-dimensional weighted segments ("needles") with CD(K, N) densities.

A needle is an interval ``[a, b]`` carrying a density ``h``. This module checks
the curvature-dimension condition on ``h``, runs the Riccati comparison, and
solves the weighted isoperimetric problem on the segment by exhaustive search
over unions of grid-aligned intervals.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .inequality_checks import CENTRAL, CheckReport
from .model_space import cos_k_array, max_domain, s_lambda, sin_k_array
from .profiles import GridSpec, ProfileMeta, SampledProfile

FAMILIES = ("s_lambda", "sin_k")
# cells above which the exact two-interval search is skipped
TWO_INTERVAL_CAP = 5000
# fine quadrature segments per needle cell when building equal-mass edges
_SUBCELLS = 16


@dataclass(frozen=True)
class NeedleDensity:
    """Density on ``[a, b]``.

    Closed forms: ``scale * s_{k,lam}(t - origin)^(N-1)`` (family ``s_lambda``)
    or ``scale * sin_k(t - origin)^(N-1)`` (family ``sin_k``), with ``origin``
    defaulting to ``a``. Sampled densities hold values on a uniform grid and
    are evaluated by linear interpolation.
    """

    a: float
    b: float
    N: float
    K: Optional[float] = None
    family: Optional[str] = None
    k: float = 0.0
    lam: float = 0.0
    scale: float = 1.0
    origin: Optional[float] = None
    t_samples: Optional[np.ndarray] = field(default=None, repr=False)
    h_samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        for x in (self.a, self.b, self.N, self.k, self.lam, self.scale):
            if not math.isfinite(x):
                raise ValueError(f"non-finite needle parameter {x!r}")
        if not self.a < self.b:
            raise ValueError("needle needs a < b")
        if not self.N > 1:
            raise ValueError("N must exceed 1")
        if self.family is None:
            self._validate_samples()
            return
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        origin = self.a if self.origin is None else self.origin
        object.__setattr__(self, "origin", float(origin))
        lo, hi = self.a - origin, self.b - origin
        if self.family == "s_lambda":
            if lo < 0:
                raise ValueError("s_lambda family needs a >= origin")
            end = max_domain(self.k, self.lam)
            if hi > end * (1.0 + 1e-12):
                raise ValueError(
                    f"interval length {hi} exceeds max_domain(k, lambda) = {end}; "
                    "the density would turn negative"
                )
        else:
            if lo < 0:
                raise ValueError("sin_k family needs a >= origin")
            if self.k > 0 and hi > math.pi / math.sqrt(self.k) * (1.0 + 1e-12):
                raise ValueError("sin_k family extends past its first zero pi/sqrt(k)")

    def _validate_samples(self) -> None:
        if self.t_samples is None or self.h_samples is None:
            raise ValueError("a needle needs either a family or samples")
        t = np.array(self.t_samples, dtype=float)
        h = np.array(self.h_samples, dtype=float)
        if t.ndim != 1 or t.shape != h.shape or t.size < 5:
            raise ValueError("sampled density needs matching 1-D arrays of >= 5 points")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(h))):
            raise ValueError("non-finite density samples")
        gaps = np.diff(t)
        if np.any(gaps <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        if np.max(np.abs(gaps - gaps.mean())) > 1e-9 * gaps.mean():
            raise ValueError("density samples must lie on a uniform grid")
        if t[0] != self.a or t[-1] != self.b:
            raise ValueError("sample abscissae must span exactly [a, b]")
        if np.any(h[1:-1] <= 0) or np.any(h < 0):
            raise ValueError("density must be positive inside (a, b)")
        t.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "t_samples", t)
        object.__setattr__(self, "h_samples", h)

    @classmethod
    def closed_form(
        cls,
        family: str,
        k: float,
        N: float,
        a: float,
        b: float,
        lam: float = 0.0,
        scale: float = 1.0,
        origin: Optional[float] = None,
        K: Optional[float] = None,
    ) -> "NeedleDensity":
        return cls(a=a, b=b, N=N, K=K, family=family, k=k, lam=lam, scale=scale, origin=origin)

    @classmethod
    def from_samples(
        cls, t: Sequence[float], h: Sequence[float], N: float, K: Optional[float] = None
    ) -> "NeedleDensity":
        t = np.asarray(t, dtype=float)
        return cls(a=float(t[0]), b=float(t[-1]), N=N, K=K, t_samples=t, h_samples=np.asarray(h, dtype=float))

    @classmethod
    def from_function(
        cls, f: Callable[[np.ndarray], np.ndarray], a: float, b: float, n: int, N: float,
        K: Optional[float] = None,
    ) -> "NeedleDensity":
        """Sample a vectorized callable on ``n`` uniform points of ``[a, b]``."""
        t = uniform_points(a, b, n)
        return cls.from_samples(t, np.asarray(f(t), dtype=float), N, K)

    @property
    def is_sampled(self) -> bool:
        return self.family is None

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.is_sampled:
            return np.interp(t, self.t_samples, self.h_samples)
        x = t - self.origin
        if self.family == "s_lambda":
            base = cos_k_array(self.k, x) - self.lam * sin_k_array(self.k, x)
        else:
            base = sin_k_array(self.k, x)
        return self.scale * np.maximum(base, 0.0) ** (self.N - 1.0)


def uniform_points(a: float, b: float, n: int) -> np.ndarray:
    """``n`` points of ``[a, b]`` from the closed-form index formula, endpoints exact."""
    if n < 2:
        raise ValueError("need at least 2 points")
    i = np.arange(n, dtype=float)
    last = n - 1.0
    return ((last - i) * a + i * b) / last


def parse_config(text: str) -> dict:
    """Parse ``key=value`` pairs separated by whitespace, commas or newlines."""
    out: dict = {}
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    for raw in body.replace(",", " ").split():
        if "=" not in raw:
            raise ValueError(f"expected key=value, got {raw!r}")
        key, val = raw.split("=", 1)
        out[key.strip()] = val.strip()
    return out


_CONFIG_KEYS = {"family", "k", "lambda", "N", "scale", "a", "b", "K", "origin"}


def density_from_config(cfg: dict) -> NeedleDensity:
    unknown = set(cfg) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown density keys: {sorted(unknown)}")
    missing = {"family", "k", "N", "a", "b"} - set(cfg)
    if missing:
        raise ValueError(f"missing density keys: {sorted(missing)}")

    def num(key: str, default: Optional[float] = None) -> Optional[float]:
        if key not in cfg:
            return default
        try:
            return float(cfg[key])
        except ValueError:
            raise ValueError(f"key {key!r} is not a number: {cfg[key]!r}") from None

    return NeedleDensity.closed_form(
        family=str(cfg["family"]),
        k=num("k"),
        N=num("N"),
        a=num("a"),
        b=num("b"),
        lam=num("lambda", 0.0),
        scale=num("scale", 1.0),
        origin=num("origin"),
        K=num("K"),
    )


def read_density_csv(path: str, N: float, K: Optional[float] = None) -> NeedleDensity:
    """Read a two-column ``t,h`` CSV with a header line."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["t", "h"]:
        raise ValueError(f"{path}:1: expected header 't,h'")
    t, h = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        for col, cell in enumerate(row, start=1):
            try:
                val = float(cell)
            except ValueError:
                raise ValueError(f"{path}:{lineno}:{col}: not a number: {cell!r}") from None
            (t if col == 1 else h).append(val)
    return NeedleDensity.from_samples(t, h, N, K)


# ---------------------------------------------------------------------------
# curvature-dimension condition and Riccati comparison


def _evaluation_grid(h: NeedleDensity, n: int) -> tuple[np.ndarray, np.ndarray]:
    if h.is_sampled:
        return h.t_samples, h.h_samples
    if n < 5:
        raise ValueError("need at least 5 grid points")
    t = uniform_points(h.a, h.b, n)
    return t, h(t)


def cd_density_check(
    h: NeedleDensity,
    K: Optional[float] = None,
    N: Optional[float] = None,
    n: int = 1001,
    tol: Optional[float] = None,
) -> CheckReport:
    """Check ``(h^(1/(N-1)))'' + K/(N-1) h^(1/(N-1)) <= 0`` at interior grid points.

    Residuals are ``-(g'' + k g)`` with ``g = h^(1/(N-1))`` so that a point
    passes when ``residual >= -tol``. Closed forms are sampled on ``n``
    uniform points; sampled densities use their own grid.
    """
    K = h.K if K is None else K
    N = h.N if N is None else N
    if K is None:
        raise ValueError("no CD parameter K given")
    t, vals = _evaluation_grid(h, n)
    if t.size < 5:
        raise ValueError("need at least 5 grid points")
    if np.any(vals[1:-1] <= 0) or np.any(vals < 0):
        raise ValueError("density must be positive at interior grid points")
    g = vals ** (1.0 / (N - 1.0))
    dt = float(t[1] - t[0])
    g2 = (g[2:] + g[:-2] - 2.0 * g[1:-1]) / (dt * dt)
    residual = -(g2 + K / (N - 1.0) * g[1:-1])
    if tol is None:
        tol = max(1e-9, 10.0 * dt * dt * float(np.max(np.abs(g))))
    return CheckReport(t[1:-1], residual, tol, CENTRAL)


class RiccatiPreconditionError(ValueError):
    """Input to :func:`riccati_compare` does not meet the hypotheses of the comparison."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


@dataclass(frozen=True)
class RiccatiResult:
    ok: bool
    violation: Optional[str]
    focal_end: float
    max_gap: float


def riccati_compare(
    u: Sequence[float], b: float, d: float, k: float, tol: Optional[float] = None
) -> RiccatiResult:
    """Compare a subsolution ``u`` of ``u'' + k u <= 0`` with ``s_{k,-d}``.

    ``u`` holds samples on the uniform grid of ``[0, b]``. Preconditions
    (``u(0) = 1``, initial slope ``<= d``, discrete subsolution) raise
    :class:`RiccatiPreconditionError`; comparison failures are returned.
    The checks are ``u <= s_{k,-d}``, the same for the forward log-difference
    quotients, and ``b <= bbar + dt`` where ``bbar`` is the first zero of
    ``s_{k,-d}``.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 5:
        raise ValueError("need at least 5 samples")
    if not (math.isfinite(b) and b > 0):
        raise ValueError("b must be positive")
    t = uniform_points(0.0, b, u.size)
    dt = float(t[1])
    if tol is None:
        tol = max(1e-9, 10.0 * dt * dt * float(np.max(np.abs(u))))

    if abs(u[0] - 1.0) > 1e-9:
        raise RiccatiPreconditionError("initial_value", f"u(0) = {u[0]!r}, expected 1")
    slope0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dt)
    if slope0 > d + tol:
        raise RiccatiPreconditionError("initial_slope", f"u'(0) ~ {slope0!r} exceeds d = {d!r}")
    defect = (u[2:] + u[:-2] - 2.0 * u[1:-1]) / (dt * dt) + k * u[1:-1]
    if np.max(defect) > tol:
        i = int(np.argmax(defect)) + 1
        raise RiccatiPreconditionError(
            "not_subsolution", f"u'' + k u = {defect[i - 1]!r} > 0 at t = {t[i]!r}"
        )

    bbar = max_domain(k, -d)
    if b > bbar + dt:
        return RiccatiResult(False, f"b = {b!r} exceeds the focal distance {bbar!r}", bbar, math.nan)
    inside = t < min(b, bbar)
    model = np.array([s_lambda(k, -d, float(x)) for x in t[inside]])
    gap = u[inside] - model
    max_gap = float(np.max(gap))
    if max_gap > tol:
        i = int(np.argmax(gap))
        return RiccatiResult(False, f"u exceeds the model at t = {t[inside][i]!r}", bbar, max_gap)

    # forward log-difference quotients where both sides stay positive
    m = int(np.count_nonzero(inside))
    uu, mm = u[:m], model
    pos = (uu[:-1] > 0) & (uu[1:] > 0) & (mm[:-1] > 0) & (mm[1:] > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        lu = np.diff(np.log(np.where(uu > 0, uu, 1.0))) / dt
        lm = np.diff(np.log(np.where(mm > 0, mm, 1.0))) / dt
        # relative slack: the log of an O(tol) perturbation of u
        slack = tol + tol / np.minimum(uu[:-1], uu[1:]) / dt
    bad = pos & (lu > lm + slack)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        return RiccatiResult(False, f"log-derivative exceeds the model at t = {t[i]!r}", bbar, max_gap)
    return RiccatiResult(True, None, bbar, max_gap)


# ---------------------------------------------------------------------------
# weighted isoperimetric problem on the needle


@dataclass(frozen=True)
class NeedleGrid:
    """Equal-mass cells of a needle: edges ``t_0 = a < ... < t_n = b``."""

    edges: np.ndarray
    weights: np.ndarray  # perimeter charged to each edge, 0 at both ends
    total_mass: float

    @property
    def n(self) -> int:
        return int(self.edges.size - 1)

    @property
    def cell_mass(self) -> float:
        return self.total_mass / self.n


def _simpson_partial(h: NeedleDensity, t0: np.ndarray, f0: np.ndarray, t: np.ndarray) -> np.ndarray:
    return (t - t0) / 6.0 * (f0 + 4.0 * h(0.5 * (t0 + t)) + h(t))


def build_grid(h: NeedleDensity, n: int) -> NeedleGrid:
    """Split ``[a, b]`` into ``n`` cells of equal weighted mass.

    Cumulative mass comes from composite Simpson on ``16 n`` uniform
    segments; each quantile is then located by bisection inside its segment.
    """
    if n < 100:
        raise ValueError("grid resolution n must be >= 100")
    fine = uniform_points(h.a, h.b, _SUBCELLS * n + 1)
    f = h(fine)
    fm = h(0.5 * (fine[:-1] + fine[1:]))
    seg = np.diff(fine) / 6.0 * (f[:-1] + 4.0 * fm + f[1:])
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    total = float(cum[-1])
    if not total > 0:
        raise ValueError("density has zero mass")

    targets = total * np.arange(1, n) / n
    j = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, fine.size - 2)
    lo, hi = fine[j].copy(), fine[j + 1].copy()
    t0, f0, c0 = fine[j], f[j], cum[j]
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        below = c0 + _simpson_partial(h, t0, f0, mid) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    inner = 0.5 * (lo + hi)
    edges = np.concatenate(([h.a], inner, [h.b]))
    weights = np.concatenate(([0.0], h(inner), [0.0]))
    edges.setflags(write=False)
    weights.setflags(write=False)
    return NeedleGrid(edges, weights, total)


@dataclass(frozen=True)
class NeedleResult:
    value: float
    intervals: tuple[tuple[float, float], ...]
    volume: float  # measure of the returned set, a multiple of the cell mass
    requested_volume: float
    single_interval_value: float
    budget_exceeded: bool

    @property
    def slack(self) -> float:
        return abs(self.volume - self.requested_volume)


def _cells_for_volume(grid: NeedleGrid, v: float) -> int:
    if not (math.isfinite(v) and 0 < v < grid.total_mass):
        raise ValueError(f"volume {v} outside (0, {grid.total_mass})")
    cells = int(round(v / grid.cell_mass))
    return min(max(cells, 1), grid.n - 1)


def _best_single(c: np.ndarray, cells: int, n: int) -> tuple[float, int]:
    costs = c[: n - cells + 1] + c[cells:]
    i = int(np.argmin(costs))
    return float(costs[i]), i


def _best_pair(c: np.ndarray, cells: int, n: int) -> tuple[float, tuple[int, int, int]]:
    """Cheapest pair of disjoint, non-touching intervals with ``cells`` cells in total.

    Returns the cost and ``(start1, k1, start2)``; the first interval lies
    left of the second.
    """
    best = math.inf
    arg = (-1, -1, -1)
    for k1 in range(1, cells):
        k2 = cells - k1
        a1 = c[: n - k1 + 1] + c[k1:]
        a2 = c[: n - k2 + 1] + c[k2:]
        # second start e2 >= e1 + k1 + 1
        lo = k1 + 1
        if lo > n - k2:
            continue
        prefix = np.minimum.accumulate(a1[: n - k2 - k1])
        pos = np.arange(lo, n - k2 + 1)
        total = prefix[pos - lo] + a2[pos]
        i = int(np.argmin(total))
        if total[i] < best:
            best = float(total[i])
            e2 = int(pos[i])
            e1 = int(np.argmin(a1[: e2 - k1]))
            arg = (e1, k1, e2)
    return best, arg


def needle_isoperimetric(
    h: NeedleDensity,
    v: float,
    n: int = 2000,
    m: int = 2,
    grid: Optional[NeedleGrid] = None,
) -> NeedleResult:
    """Least weighted perimeter of a union of at most ``m`` grid intervals of measure ``v``.

    Cells carry equal mass, so the set's measure is a whole number of cells
    and differs from ``v`` by at most half a cell mass. Boundary points at
    the ends of the needle cost nothing. The single-interval sweep is always
    exact; two intervals are searched exhaustively when ``n <= 5000``, and
    ``m >= 3`` is not searched (``budget_exceeded`` is set).
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if grid is None:
        grid = build_grid(h, n)
    n = grid.n
    cells = _cells_for_volume(grid, v)
    c = np.asarray(grid.weights)
    edges = grid.edges

    value1, i1 = _best_single(c, cells, n)
    value = value1
    intervals = ((float(edges[i1]), float(edges[i1 + cells])),)
    budget_exceeded = m >= 3 or (m >= 2 and n > TWO_INTERVAL_CAP)
    if m >= 2 and n <= TWO_INTERVAL_CAP and cells >= 2:
        value2, (e1, k1, e2) = _best_pair(c, cells, n)
        if value2 < value1 - 1e-12 * max(1.0, value1):
            value = value2
            intervals = (
                (float(edges[e1]), float(edges[e1 + k1])),
                (float(edges[e2]), float(edges[e2 + cells - k1])),
            )
    return NeedleResult(
        value=value,
        intervals=intervals,
        volume=cells * grid.cell_mass,
        requested_volume=float(v),
        single_interval_value=value1,
        budget_exceeded=budget_exceeded,
    )


def needle_profile(h: NeedleDensity, grid_spec: GridSpec, n: int = 2000, m: int = 2) -> SampledProfile:
    """Sampled weighted profile of the needle on a volume grid."""
    grid = build_grid(h, n)
    vols = grid_spec.volumes()
    if vols[-1] >= grid.total_mass:
        raise ValueError(f"volume grid reaches the total mass {grid.total_mass}")
    values = np.array([needle_isoperimetric(h, float(v), grid=grid, m=m).value for v in vols])
    meta = ProfileMeta(K=h.K, N=h.N, total_volume=grid.total_mass)
    return SampledProfile(vols, values, meta)
