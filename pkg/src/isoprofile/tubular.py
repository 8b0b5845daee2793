"""Tube perimeter and volume bounds and the Laplacian comparison for distance functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .model_space import jacobian, max_domain, s_lambda, s_lambda_prime
from .profiles import SpaceForm, model_barrier
from .quadrature import adaptive_simpson

EXTERIOR = "exterior"
INTERIOR = "interior"


def _side(side: str) -> str:
    if side not in (EXTERIOR, INTERIOR):
        raise ValueError(f"side must be 'exterior' or 'interior', got {side!r}")
    return side


@dataclass(frozen=True)
class TubeBoundInput:
    """Perimeter ``per0`` of a set, its mean-curvature barrier ``c``, and ``(K, N)``."""

    per0: float
    c: float
    K: float
    N: float

    def __post_init__(self) -> None:
        for x in (self.per0, self.c, self.K, self.N):
            if not math.isfinite(x):
                raise ValueError(f"non-finite tube input {x!r}")
        if not self.per0 > 0:
            raise ValueError("per0 must be positive")
        if not self.N > 1:
            raise ValueError("N must exceed 1")

    def barrier(self, side: str) -> float:
        return self.c if _side(side) == EXTERIOR else -self.c

    def support_end(self, side: str) -> float:
        """First zero of the Jacobian on the given side."""
        k = self.K / (self.N - 1.0)
        return max_domain(k, -self.barrier(side) / (self.N - 1.0))


def laplacian_bound(f: float, c: float, K: float, N: float, side: str = EXTERIOR) -> float:
    """Comparison bound for the Laplacian of the signed distance ``f`` from a set with barrier ``c``.

    Exterior (``f >= 0``): upper bound ``(N-1) s'/s`` with ``s = s_{k, -c/(N-1)}``
    evaluated at ``f``. Interior (``f <= 0``): lower bound ``-(N-1) s'/s`` with
    ``s = s_{k, c/(N-1)}`` evaluated at ``-f``. Here ``k = K/(N-1)``.

    For the unit disk (``c = 1``, ``K = 0``, ``N = 2``) the interior bound at
    ``f = -1/2`` is ``1 / (1 - 1/2) = 2``, the curvature of the circle of radius
    one half.

    Raises:
        ValueError: if ``|f|`` reaches the first zero of ``s`` (focal distance).
    """
    for x in (f, c, K, N):
        if not math.isfinite(x):
            raise ValueError(f"non-finite input {x!r}")
    if not N > 1:
        raise ValueError("N must exceed 1")
    k = K / (N - 1.0)
    if _side(side) == EXTERIOR:
        if f < 0:
            raise ValueError("exterior bound needs f >= 0")
        lam = -c / (N - 1.0)
        x, sign = f, 1.0
    else:
        if f > 0:
            raise ValueError("interior bound needs f <= 0")
        lam = c / (N - 1.0)
        x, sign = -f, -1.0
    end = max_domain(k, lam)
    if not x < end:
        raise ValueError(f"|f| = {x} reaches the focal distance {end}")
    return sign * (N - 1.0) * s_lambda_prime(k, lam, x) / s_lambda(k, lam, x)


def tube_perimeter_bound(inp: TubeBoundInput, t: float, side: str = EXTERIOR) -> float:
    """``J_{+-c,K,N}(t) * per0``; zero past the support of the Jacobian."""
    if not (math.isfinite(t) and t >= 0):
        raise ValueError("t must be finite and non-negative")
    return jacobian(inp.barrier(side), inp.K, inp.N, t) * inp.per0


def tube_volume_bound(inp: TubeBoundInput, t: float, side: str = EXTERIOR) -> float:
    """``per0 * int_0^t J_{+-c,K,N}``, saturating past the support of the Jacobian."""
    if not (math.isfinite(t) and t >= 0):
        raise ValueError("t must be finite and non-negative")
    if t == 0:
        return 0.0
    H, K, N = inp.barrier(side), inp.K, inp.N
    upper = min(t, inp.support_end(side))
    if K == 0:
        if H == 0:
            return inp.per0 * upper
        base = max(1.0 + H * upper / (N - 1.0), 0.0)
        return inp.per0 * (N - 1.0) / (H * N) * (base**N - 1.0)
    return inp.per0 * adaptive_simpson(lambda r: jacobian(H, K, N, r), 0.0, upper)


def jacobian_derivatives_at_zero(c: float, K: float, N: float) -> tuple[float, float]:
    """``(J'(0), J''(0)) = (c, -K + (N-2)/(N-1) c^2)``."""
    if not N > 1:
        raise ValueError("N must exceed 1")
    return float(c), -K + (N - 2.0) / (N - 1.0) * c * c


def jacobian_derivatives_fd(c: float, K: float, N: float, step: float = 1e-4) -> tuple[float, float]:
    """Central-difference estimates of ``(J'(0), J''(0))``."""
    jp = jacobian(c, K, N, step)
    jm = jacobian(c, K, N, -step)
    j0 = jacobian(c, K, N, 0.0)
    return (jp - jm) / (2.0 * step), (jp + jm - 2.0 * j0) / (step * step)


@dataclass(frozen=True)
class OracleRow:
    K: float
    N: float
    r: float
    t: float
    lhs: float
    rhs: float

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)


def model_ball_tube_oracle(form: SpaceForm, r: float, t: float) -> OracleRow:
    """Area growth of a model ball versus the Jacobian of its boundary barrier.

    ``lhs = area(r + t) / area(r)`` and ``rhs = J_{c,K,N}(t)`` with ``c`` the
    barrier of the ball of radius ``r``; the two agree exactly in the model.
    """
    if not (r > 0 and t > 0):
        raise ValueError("need r > 0 and t > 0")
    if form.k > 0 and r + t > math.pi / math.sqrt(form.k):
        raise ValueError("r + t exceeds the model diameter")
    lhs = form.area(r + t) / form.area(r)
    c = model_barrier(form, form.volume(r))
    rhs = jacobian(c, form.K, form.N, t)
    return OracleRow(form.K, form.N, r, t, lhs, rhs)


def oracle_sweep(
    Ks: Iterable[float], Ns: Iterable[float], rs: Iterable[float], ts: Iterable[float]
) -> Iterator[OracleRow]:
    """Oracle rows in (K, N, r, t) lexicographic order; pairs leaving the diameter are skipped."""
    rs, ts = list(rs), list(ts)
    for K in Ks:
        for N in Ns:
            form = SpaceForm.from_KN(K, N)
            for r in rs:
                for t in ts:
                    if form.k > 0 and r + t > math.pi / math.sqrt(form.k):
                        continue
                    yield model_ball_tube_oracle(form, r, t)
