"""Weak-coupling asymptotics of the impurity-bound exciton energy.

For small impurity charge the ground state sits a distance ``beta(sigma) * kappa**4``
below the exciton threshold ``-1/(4(1 - sigma))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuarticFit",
    "beta",
    "beta_limit0",
    "asymptotic_energy",
    "exciton_threshold",
    "fit_quartic",
    "SIGMA_MAX",
]

#: upper end of the mass-fraction range where the principal tan^-1 branch applies
SIGMA_MAX = 1.0 / math.sqrt(2.0)


def beta_limit0() -> float:
    """kappa^4 coefficient for an infinitely heavy impurity, ``16 (4/pi - 1)^2``."""
    return 16.0 * (4.0 / math.pi - 1.0) ** 2


def beta(sigma: float) -> float:
    """kappa^4 coefficient of the binding energy for mass fraction ``0 < sigma < 1/sqrt(2)``.

    Use :func:`beta_limit0` at ``sigma = 0``; the closed form is 0/0 there.
    """
    s = float(sigma)
    if not 0.0 < s < SIGMA_MAX:
        raise ValueError(f"beta is defined for 0 < sigma < 1/sqrt(2), got {s}")
    bracket = (
        6.0 * s * math.sqrt(1.0 - s * s)
        - (2.0 - s) * s * math.pi
        - 8.0 * s * s * math.acos(math.sqrt(1.0 + s) / math.sqrt(2.0))
        + math.atan(2.0 * s * (1.0 - s * s) / (1.0 - 2.0 * s * s))
    )
    return 4.0 * bracket ** 2 / ((1.0 + s) * (1.0 - s) ** 2 * math.pi ** 2 * s * s)


def _coefficient(sigma: float) -> float:
    return beta_limit0() if sigma == 0 else beta(sigma)


def exciton_threshold(sigma: float) -> float:
    return -1.0 / (4.0 * (1.0 - sigma))


def asymptotic_energy(kappa: float, sigma: float = 0.0) -> float:
    """Leading-order ground state energy ``-1/(4(1-sigma)) - beta(sigma) kappa^4``."""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if not 0.0 <= sigma < SIGMA_MAX:
        raise ValueError(f"sigma must lie in [0, 1/sqrt(2)), got {sigma}")
    return exciton_threshold(sigma) - _coefficient(sigma) * kappa ** 4


@dataclass(frozen=True)
class QuarticFit:
    coefficient: float
    stderr: float
    samples: tuple[tuple[float, float], ...]
    sigma: float

    @property
    def relative_error(self) -> float:
        """Deviation from the closed-form coefficient, relative to it."""
        target = _coefficient(self.sigma)
        return abs(self.coefficient - target) / target


def fit_quartic(samples, sigma: float = 0.0, max_kappa: float = 0.15) -> QuarticFit:
    """Least-squares fit of the binding energy against ``kappa^4`` through the origin.

    ``samples`` is an iterable of ``(kappa, energy)`` pairs.
    """
    pairs = tuple((float(k), float(e)) for k, e in samples)
    if len(pairs) < 3:
        raise ValueError("need at least 3 samples")
    kap = np.array([k for k, _ in pairs])
    energy = np.array([e for _, e in pairs])
    if np.any(kap <= 0) or np.any(kap > max_kappa):
        raise ValueError(f"sample charges must lie in (0, {max_kappa}]")
    if np.ptp(kap) == 0:
        raise ValueError("degenerate fit: all charges are equal")
    x = kap ** 4
    y = exciton_threshold(sigma) - energy
    sxx = float(x @ x)
    coef = float(x @ y) / sxx
    resid = y - coef * x
    dof = len(pairs) - 1
    stderr = math.sqrt(float(resid @ resid) / dof / sxx)
    return QuarticFit(coefficient=coef, stderr=stderr, samples=pairs, sigma=float(sigma))
