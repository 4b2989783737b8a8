"""Physical observables from a solved Fock-block state."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .fock_system import FockBlockState

#: ``<n>`` below which g2(0) is reported as undefined (0/0 at the exact dip).
G2_MEAN_FLOOR = 1e-9


@dataclass(frozen=True)
class ObservableRecord:
    mean_n: float
    g2_zero: Optional[float]  # None when <n> is below the floor
    r_plus: float
    r_minus: float
    r_zero: float
    s33: float

    def as_dict(self) -> dict:
        return asdict(self)


def _moments(p0: np.ndarray) -> tuple[float, float]:
    n = np.arange(len(p0), dtype=float)
    return float(np.dot(n, p0)), float(np.dot(n * (n - 1.0), p0))


def mean_photon_number(x) -> float:
    """``sum_n n P0[n]``. Accepts a block state or a bare photon distribution."""
    p0 = x.p0 if isinstance(x, FockBlockState) else np.asarray(x, dtype=float)
    return _moments(p0)[0]


def g2_from_distribution(p0, floor: float = G2_MEAN_FLOOR) -> Optional[float]:
    mean, pairs = _moments(np.asarray(p0, dtype=float))
    if mean < floor:
        return None
    return pairs / mean**2


def g2_zero(x: FockBlockState, floor: float = G2_MEAN_FLOOR) -> Optional[float]:
    """Zero-delay intensity correlation ``<a+a+aa> / <n>^2``, or ``None``."""
    return g2_from_distribution(x.p0, floor)


def dressed_populations(x: FockBlockState) -> tuple[float, float, float]:
    """``(r_plus, r_minus, r_zero)``; ``r_zero`` comes from completeness."""
    s1 = float(x.p1.sum())
    s2 = float(x.p2.sum())
    r_plus = 0.5 * (s1 + s2)
    r_minus = 0.5 * (s1 - s2)
    return r_plus, r_minus, 1.0 - r_plus - r_minus


def upper_bare_population(theta: float, x: FockBlockState) -> float:
    c2 = math.cos(theta) ** 2
    return c2 + (1.0 - 3.0 * c2) * float(x.p1.sum()) / 2.0


def observe(theta: float, x: FockBlockState, floor: float = G2_MEAN_FLOOR) -> ObservableRecord:
    r_plus, r_minus, r_zero = dressed_populations(x)
    return ObservableRecord(
        mean_n=mean_photon_number(x),
        g2_zero=g2_zero(x, floor),
        r_plus=r_plus,
        r_minus=r_minus,
        r_zero=r_zero,
        s33=upper_bare_population(theta, x),
    )
