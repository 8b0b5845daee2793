"""Explicit constants: diameter bounds for isoperimetric regions and the decomposition count."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .model_space import omega

# relative slack when checking the admissibility inequalities on the inputs
_ADMISSIBLE_RTOL = 1e-12


def _positive(name: str, x: float) -> None:
    if not (math.isfinite(x) and x > 0):
        raise ValueError(f"{name} must be positive and finite, got {x!r}")


@dataclass(frozen=True)
class SmallVolumeConstants:
    """Small-volume isoperimetric data valid for all volumes ``v <= v1``.

    ``theta v^((N-1)/N) <= I(v) <= C1 v^((N-1)/N)``.
    """

    theta: float
    v1: float
    C1: float

    def __post_init__(self) -> None:
        _positive("theta", self.theta)
        _positive("v1", self.v1)
        _positive("C1", self.C1)
        if self.theta > self.C1 * (1.0 + _ADMISSIBLE_RTOL):
            raise ValueError(f"theta = {self.theta} exceeds C1 = {self.C1}")

    def vbar(self, N: float) -> float:
        """Largest volume for which the isoperimetric branch of ``r0`` is guaranteed active."""
        return min(self.v1, 4.0**N * self.v1, (self.theta / self.C1) ** (N / 2.0))

    def small_volume_constant(self, N: float) -> float:
        """``C`` with ``diam E <= C v_E^(1/N)`` for ``v_E <= vbar``."""
        w = omega(N)
        c_prime = 4.0 * (8.0 * N) ** N * (4.0 * w ** (1.0 / N)) ** (N - 1.0) / self.theta ** (2.0 * N - 1.0)
        return c_prime * self.C1 ** (N - 1.0)


def cone_constants(N: float, avr: float, v1: float = 1.0) -> SmallVolumeConstants:
    """Preset for a Euclidean cone: its profile is the exact power law, so ``theta = C1``.

    The power law holds at every volume, so ``v1`` is free; the default makes
    the reference volume ``vbar`` equal to 1.
    """
    if not 0 < avr <= 1:
        raise ValueError(f"avr must lie in (0, 1], got {avr}")
    density = N * (omega(N) * avr) ** (1.0 / N)
    return SmallVolumeConstants(theta=density, v1=v1, C1=density)


@dataclass(frozen=True)
class DiameterBound:
    r0: float
    branch: str  # "v1" | "isoperimetric" | "ratio": which term attains the min in r0
    bound: float
    small_volume_constant: float
    simplified: Optional[float]  # C v_E^(1/N), reported on the isoperimetric branch
    vbar: float


def diameter_bound(
    N: float, consts: SmallVolumeConstants, v_E: float, I_vE: float
) -> DiameterBound:
    """Covering-argument diameter bound for an isoperimetric region of volume ``v_E``.

    ``r0 = omega_N^(-1/N) min(v1^(1/N), theta v_E / (4 I_vE), theta / (4 C1 v_E^(1/N)))``
    and ``diam <= 4 (8N)^N v_E / (theta^N r0^(N-1))``.

    Raises:
        ValueError: if ``v_E > v1`` or ``I_vE`` violates
            ``theta v_E^((N-1)/N) <= I_vE <= C1 v_E^((N-1)/N)``.
    """
    if not N > 1:
        raise ValueError("N must exceed 1")
    _positive("v_E", v_E)
    _positive("I_vE", I_vE)
    if v_E > consts.v1:
        raise ValueError(f"v_E = {v_E} exceeds v1 = {consts.v1}")
    ratio = I_vE / v_E ** ((N - 1.0) / N)
    if ratio < consts.theta * (1.0 - _ADMISSIBLE_RTOL):
        raise ValueError(f"I(v_E) / v_E^((N-1)/N) = {ratio} is below theta = {consts.theta}")
    if ratio > consts.C1 * (1.0 + _ADMISSIBLE_RTOL):
        raise ValueError(f"I(v_E) / v_E^((N-1)/N) = {ratio} exceeds C1 = {consts.C1}")

    theta = consts.theta
    terms = {
        "v1": consts.v1 ** (1.0 / N),
        "isoperimetric": theta * v_E / (4.0 * I_vE),
        "ratio": theta / (4.0 * consts.C1 * v_E ** (1.0 / N)),
    }
    branch = min(terms, key=terms.__getitem__)
    r0 = terms[branch] / omega(N) ** (1.0 / N)
    bound = 4.0 * (8.0 * N) ** N * v_E / (theta**N * r0 ** (N - 1.0))
    C = consts.small_volume_constant(N)
    simplified = C * v_E ** (1.0 / N) if branch == "isoperimetric" else None
    return DiameterBound(r0, branch, bound, C, simplified, consts.vbar(N))


def avr_diameter_bound(
    N: float, A: float, v_E: float, base: Optional[SmallVolumeConstants] = None
) -> float:
    """``C_tilde v_E^(1/N)`` for every isoperimetric region in a space with ``K = 0`` and AVR ``A``.

    ``C_tilde`` is the larger of the small-volume constants for the base
    data and for unit-ball volume ``A omega_N``; the latter uses the cone
    preset. Without ``base`` the cone preset serves for both. Regions above
    the reference volume are handled by rescaling the distance so that the
    region has the reference volume, which leaves the bound ``C v_E^(1/N)``.
    """
    if not 0 < A <= 1:
        raise ValueError(f"A must lie in (0, 1], got {A}")
    _positive("v_E", v_E)
    cone = cone_constants(N, A)
    base = cone if base is None else base
    c_tilde = max(_constant_at_reference(N, base), _constant_at_reference(N, cone))
    return c_tilde * v_E ** (1.0 / N)


def _constant_at_reference(N: float, consts: SmallVolumeConstants) -> float:
    """Small-volume constant, cross-checked against :func:`diameter_bound` at ``vbar``."""
    C = consts.small_volume_constant(N)
    v_ref = consts.vbar(N)
    # worst admissible perimeter at the reference volume
    result = diameter_bound(N, consts, v_ref, consts.C1 * v_ref ** ((N - 1.0) / N))
    if result.simplified is not None and result.bound > C * v_ref ** (1.0 / N) * (1.0 + 1e-9):
        raise ArithmeticError("small-volume constant inconsistent with the diameter bound")
    return C


def decomposition_count_bound(V: float, eps: float) -> int:
    """``floor(1 + V / eps)``: how many pieces of volume at least ``eps`` fit in total volume ``V``."""
    _positive("V", V)
    _positive("eps", eps)
    return int(math.floor(1.0 + V / eps))
