"""Generalized trigonometric functions and model-space volumes.

Everything here is scalar and pure. ``k`` always denotes a *sectional*
curvature parameter; a Ricci lower bound ``K`` in dimension ``N`` corresponds
to ``k = K / (N - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import adaptive_simpson

# below this value of |k| r^2 the trigonometric branches lose digits to 0/0
SERIES_THRESHOLD = 1e-8
# the volume series in z = k r^2 is used for |z| up to this value
VOLUME_SERIES_RADIUS = 1.0
_VOLUME_SERIES_TERMS = 40


def _check_finite(*values: float) -> None:
    for x in values:
        if not math.isfinite(x):
            raise ValueError(f"non-finite input: {x!r}")


def omega(N: float) -> float:
    """Volume of the Euclidean unit ball in dimension ``N`` (real ``N`` allowed)."""
    _check_finite(N)
    if N <= 0:
        raise ValueError("omega(N) needs N > 0")
    return math.pi ** (N / 2.0) / math.gamma(N / 2.0 + 1.0)


@dataclass(frozen=True)
class ComparisonParams:
    """Ricci lower bound ``K`` and dimension parameter ``N > 1``."""

    K: float
    N: float

    def __post_init__(self) -> None:
        _check_finite(self.K, self.N)
        if not self.N > 1:
            raise ValueError(f"dimension parameter must satisfy N > 1, got {self.N}")

    @property
    def k(self) -> float:
        return self.K / (self.N - 1.0)

    @property
    def omega_N(self) -> float:
        return omega(self.N)


def cos_k(k: float, r: float) -> float:
    """Solution of ``u'' + k u = 0`` with ``u(0) = 1``, ``u'(0) = 0``."""
    _check_finite(k, r)
    z = k * r * r
    if abs(z) < SERIES_THRESHOLD:
        return 1.0 - z / 2.0 + z * z / 24.0
    if k > 0:
        return math.cos(math.sqrt(k) * r)
    return math.cosh(math.sqrt(-k) * r)


def sin_k(k: float, r: float) -> float:
    """Solution of ``u'' + k u = 0`` with ``u(0) = 0``, ``u'(0) = 1``."""
    _check_finite(k, r)
    z = k * r * r
    if abs(z) < SERIES_THRESHOLD:
        return r * (1.0 - z / 6.0 + z * z / 120.0)
    if k > 0:
        sk = math.sqrt(k)
        return math.sin(sk * r) / sk
    sk = math.sqrt(-k)
    return math.sinh(sk * r) / sk


def s_lambda(k: float, lam: float, r: float) -> float:
    """``cos_k(r) - lam * sin_k(r)``: initial value 1, initial slope ``-lam``."""
    _check_finite(lam)
    return cos_k(k, r) - lam * sin_k(k, r)


def s_lambda_prime(k: float, lam: float, r: float) -> float:
    """Derivative in ``r`` of :func:`s_lambda`."""
    _check_finite(lam)
    return -k * sin_k(k, r) - lam * cos_k(k, r)


def _bisect_first_zero(k: float, lam: float) -> float:
    # bracket the first sign change by doubling, then bisect
    step = 1e-3
    lo, hi = 0.0, step
    while s_lambda(k, lam, hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e12:
            return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if s_lambda(k, lam, mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def max_domain(k: float, lam: float) -> float:
    """First positive zero of ``s_{k,lam}``, or ``inf`` if there is none."""
    _check_finite(k, lam)
    if k == 0.0:
        return 1.0 / lam if lam > 0 else math.inf
    if k > 0:
        sk = math.sqrt(k)
        r = math.atan2(sk, lam) / sk
    else:
        sk = math.sqrt(-k)
        if lam <= sk:
            return math.inf
        r = math.atanh(sk / lam) / sk
    if abs(s_lambda(k, lam, r)) > 1e-10:
        r = _bisect_first_zero(k, lam)
    return r


@dataclass(frozen=True)
class SLambda:
    """The comparison function ``s_{k,lam}`` together with its positivity domain."""

    k: float
    lam: float

    @property
    def max_domain_end(self) -> float:
        return max_domain(self.k, self.lam)

    def __call__(self, r: float) -> float:
        return s_lambda(self.k, self.lam, r)

    def derivative(self, r: float) -> float:
        return s_lambda_prime(self.k, self.lam, r)


def sn(K: float, r: float) -> float:
    """Three-case ``sn_K``: ``sin``, identity or ``sinh`` branch by sign of ``K``."""
    _check_finite(K, r)
    if r < 0:
        raise ValueError("sn is defined for r >= 0")
    return sin_k(K, r)


def model_diameter(k: float) -> float:
    """``pi / sqrt(k)`` for ``k > 0``, otherwise ``inf``."""
    return math.pi / math.sqrt(k) if k > 0 else math.inf


def _check_radius(k: float, r: float) -> None:
    _check_finite(k, r)
    if r < 0:
        raise ValueError(f"radius must be non-negative, got {r}")
    if k > 0 and r > model_diameter(k) * (1.0 + 1e-14):
        raise ValueError(
            f"radius {r} exceeds the model diameter {model_diameter(k)} for k={k}"
        )


def model_area(N: float, k: float, r: float) -> float:
    """Boundary measure ``N omega_N sn_k(r)^(N-1)`` of a model ball."""
    _check_radius(k, r)
    if N <= 1:
        raise ValueError("N must exceed 1")
    s = max(sin_k(k, r), 0.0)
    return N * omega(N) * s ** (N - 1.0)


@lru_cache(maxsize=64)
def _power_series_coeffs(m: float) -> tuple[float, ...]:
    """Coefficients of ``(sin_k(t) / t)^m`` as a series in ``k t^2``."""
    a = [(-1.0) ** i / math.factorial(2 * i + 1) for i in range(_VOLUME_SERIES_TERMS)]
    b = [1.0]
    for j in range(1, _VOLUME_SERIES_TERMS):
        acc = 0.0
        for i in range(1, j + 1):
            acc += ((m + 1.0) * i - j) * a[i] * b[j - i]
        b.append(acc / j)
    return tuple(b)


def _integral_sn_power_series(m: float, k: float, r: float) -> float:
    z = k * r * r
    total = 0.0
    zj = 1.0
    for j, bj in enumerate(_power_series_coeffs(m)):
        term = bj * zj / (m + 2 * j + 1.0)
        total += term
        if abs(term) < 1e-18 * abs(total):
            break
        zj *= z
    return r ** (m + 1.0) * total


def _integral_trig_power(m: int, X: float, hyperbolic: bool) -> float:
    """Closed form of the integral of ``sin^m`` (or ``sinh^m``) over ``[0, X]``."""
    if hyperbolic:
        s, c = math.sinh(X), math.cosh(X)
        lower = [X, 2.0 * math.sinh(X / 2.0) ** 2]
    else:
        s, c = math.sin(X), math.cos(X)
        lower = [X, 2.0 * math.sin(X / 2.0) ** 2]
    if m < 2:
        return lower[m]
    prev2 = lower[m % 2]
    for p in range(m % 2 + 2, m + 1, 2):
        if hyperbolic:
            prev2 = s ** (p - 1) * c / p - (p - 1) / p * prev2
        else:
            prev2 = -(s ** (p - 1)) * c / p + (p - 1) / p * prev2
    return prev2


def _integral_sn_power(m: float, k: float, r: float) -> float:
    """``int_0^r sn_k(t)^m dt``."""
    if r == 0.0:
        return 0.0
    z = k * r * r
    if abs(z) <= VOLUME_SERIES_RADIUS:
        return _integral_sn_power_series(m, k, r)
    if float(m).is_integer():
        mi = int(m)
        sk = math.sqrt(abs(k))
        return _integral_trig_power(mi, sk * r, hyperbolic=k < 0) / sk ** (mi + 1)
    return adaptive_simpson(lambda t: max(sin_k(k, t), 0.0) ** m, 0.0, r)


def model_volume(N: float, k: float, r: float) -> float:
    """Volume ``int_0^r N omega_N sn_k^(N-1)`` of a model ball of radius ``r``.

    Uses a power series in ``k r^2`` for ``|k| r^2 <= 1``, the classical
    reduction formula for integer ``N`` beyond that, and adaptive Simpson
    quadrature otherwise.
    """
    _check_radius(k, r)
    if N <= 1:
        raise ValueError("N must exceed 1")
    return N * omega(N) * _integral_sn_power(N - 1.0, k, r)


def jacobian(H: float, K: float, N: float, t: float) -> float:
    """Model area distortion ``(s_{K/(N-1), -H/(N-1)}(t))_+^(N-1)``.

    Zero from the first zero of the comparison function onwards (on either
    side of the origin), even where ``s`` turns positive again for ``K > 0``.
    """
    _check_finite(H, K, N, t)
    if not N > 1:
        raise ValueError("N must exceed 1")
    k = K / (N - 1.0)
    lam = -H / (N - 1.0)
    if t >= 0:
        if t >= max_domain(k, lam):
            return 0.0
    elif -t >= max_domain(k, -lam):
        return 0.0
    s = s_lambda(k, lam, t)
    return max(s, 0.0) ** (N - 1.0)


def cos_k_array(k: float, r):
    """Vectorized :func:`cos_k` over an array of ``r``."""
    r = np.asarray(r, dtype=float)
    z = k * r * r
    series = 1.0 - z / 2.0 + z * z / 24.0
    if k > 0:
        exact = np.cos(math.sqrt(k) * r)
    elif k < 0:
        exact = np.cosh(math.sqrt(-k) * r)
    else:
        return np.ones_like(r)
    return np.where(np.abs(z) < SERIES_THRESHOLD, series, exact)


def sin_k_array(k: float, r):
    """Vectorized :func:`sin_k` over an array of ``r``."""
    r = np.asarray(r, dtype=float)
    z = k * r * r
    series = r * (1.0 - z / 6.0 + z * z / 120.0)
    if k > 0:
        sk = math.sqrt(k)
        exact = np.sin(sk * r) / sk
    elif k < 0:
        sk = math.sqrt(-k)
        exact = np.sinh(sk * r) / sk
    else:
        return r.copy()
    return np.where(np.abs(z) < SERIES_THRESHOLD, series, exact)
