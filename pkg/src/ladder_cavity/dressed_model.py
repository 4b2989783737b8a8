"""Bare-to-dressed parameter derivations for the driven ladder atom in a cavity.

All rates are dimensionless multiples of a user-chosen reference rate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

#: Ratio at or above which a smallness condition is reported as violated.
VALIDITY_THRESHOLD = 0.1


@dataclass(frozen=True)
class BareParams:
    """Physical rates and couplings of the driven atom-cavity system.

    ``delta_c`` is the cavity-laser detuning. It is only read by the full
    dressed-Hamiltonian oracle; ``None`` means the upper outer sideband,
    ``delta_c = 2 * Omega``, which the projected equations assume.
    """

    gamma32: float
    gamma21: float
    kappa: float
    g1: float
    g2: float
    omega1: float
    omega2: float
    delta_c: Optional[float] = None

    def __post_init__(self):
        for name in ("gamma32", "gamma21", "g1", "g2", "omega1", "omega2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")
        if not math.isfinite(self.kappa) or self.kappa <= 0:
            raise ValueError(f"kappa must be finite and > 0, got {self.kappa!r}")
        if self.omega1 == 0 and self.omega2 == 0:
            raise ValueError("omega1 and omega2 both zero: mixing angle undefined")
        if self.delta_c is not None and not math.isfinite(self.delta_c):
            raise ValueError("delta_c must be finite")

    @property
    def big_omega(self) -> float:
        return math.hypot(self.omega1, self.omega2)

    @property
    def detuning(self) -> float:
        """Cavity-laser detuning, resolving the sideband default."""
        return 2.0 * self.big_omega if self.delta_c is None else self.delta_c

    def with_ratio(self, ratio: float) -> "BareParams":
        """Same generalized Rabi frequency, with ``omega2 / omega1 = ratio``."""
        if ratio < 0 or not math.isfinite(ratio):
            raise ValueError(f"ratio must be finite and >= 0, got {ratio!r}")
        big = self.big_omega
        omega1 = big / math.sqrt(1.0 + ratio * ratio)
        return replace(self, omega1=omega1, omega2=ratio * omega1)


@dataclass(frozen=True)
class DressedParams:
    theta: float
    big_omega: float
    g_eff: float
    alpha: float
    beta: float
    zeta: float
    gamma32: float
    gamma21: float

    @property
    def cos2(self) -> float:
        return math.cos(self.theta) ** 2

    @property
    def sin2(self) -> float:
        return math.sin(self.theta) ** 2


def effective_coupling(g1: float, g2: float, theta: float) -> float:
    """Signed interference coupling on the outer sideband transition.

    Vanishes exactly when ``tan(theta) = g1 / g2``.
    """
    return 0.5 * (g2 * math.sin(theta) - g1 * math.cos(theta))


def dressed_rates(theta: float, gamma32: float, gamma21: float) -> tuple[float, float, float]:
    """Return ``(alpha, beta, zeta)`` for mixing angle ``theta``."""
    c2 = math.cos(theta) ** 2
    s2 = math.sin(theta) ** 2
    alpha = gamma21 * s2 + 2.0 * gamma32 * c2
    beta = gamma21 + gamma32 * s2
    zeta = (gamma21 * (2.0 + c2) + 3.0 * gamma32 * s2) / 4.0
    return alpha, beta, zeta


def derive_dressed(p: BareParams) -> DressedParams:
    big = p.big_omega
    # atan2 is better conditioned than arccos(omega1 / big) near theta = 0
    theta = math.atan2(p.omega2, p.omega1)
    alpha, beta, zeta = dressed_rates(theta, p.gamma32, p.gamma21)
    return DressedParams(
        theta=theta,
        big_omega=big,
        g_eff=effective_coupling(p.g1, p.g2, theta),
        alpha=alpha,
        beta=beta,
        zeta=zeta,
        gamma32=p.gamma32,
        gamma21=p.gamma21,
    )


def dressed_decomposition(theta: float) -> np.ndarray:
    """Coefficients of the bare states in the dressed basis.

    Row ``k`` holds the ``(|->, |0>, |+>)`` amplitudes of bare level ``|k+1>``.
    The matrix is real orthogonal.
    """
    c, s = math.cos(theta), math.sin(theta)
    r = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [-r * c, -s, r * c],
            [r, 0.0, r],
            [-r * s, c, r * s],
        ]
    )


def validity_report(p: BareParams, threshold: float = VALIDITY_THRESHOLD) -> list[str]:
    """Warnings for each violated secular / weak-coupling smallness condition."""
    big = p.big_omega
    warnings = []
    for name in ("gamma32", "gamma21", "g1", "g2"):
        ratio = getattr(p, name) / big
        if ratio >= threshold:
            warnings.append(f"{name}/Omega = {ratio:.3g} >= {threshold:g}")
    return warnings
