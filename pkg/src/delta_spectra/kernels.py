"""Momentum-space kernels of the free resolvent sandwiched between trace operators.

Channel 1 is the trace on the line ``y = 0`` (impurity-electron contact),
channel 2 the trace on ``x = 0`` (impurity-hole contact) and channel 3 the
trace on the diagonal ``x = y`` (electron-hole contact).  The blocks of the
3x3 operator matrix are

    [[T0, T1, T2*],
     [T1, T0, T2*],
     [T2, T2, T3 ]]

where T0 and T3 act as multiplication operators and T1, T2 are integral
operators with the kernels below.  All functions accept scalars or numpy
arrays and broadcast.

The spectral parameter is restricted to real energies below zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DomainError",
    "CouplingTriple",
    "check_sigma",
    "t0_hat",
    "t1_hat",
    "t2_hat",
    "t2_hat_adjoint",
    "t3_hat",
    "bottom_essential",
    "two_body_energies",
    "threshold",
]


class DomainError(ValueError):
    """A kernel was evaluated outside the region where it is finite and positive."""


def check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not 0.0 <= sigma < 1.0:
        raise DomainError(f"mass fraction must satisfy 0 <= sigma < 1, got {sigma}")
    return sigma


@dataclass(frozen=True)
class CouplingTriple:
    """Signed contact strengths ``g = diag(a, b, c)``.

    ``a`` multiplies the contact on ``y = 0``, ``b`` the contact on ``x = 0``
    and ``c`` the electron-hole contact.  The impurity model with charge
    kappa is ``(-kappa, kappa, -1)``.
    """

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            value = float(getattr(self, name))
            if value == 0.0 or not math.isfinite(value):
                raise ValueError(f"coupling {name} must be finite and nonzero, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def impurity(cls, kappa: float, kappa_tilde: float | None = None) -> "CouplingTriple":
        """Couplings of the exciton-impurity operator, optionally with a distinct hole charge."""
        if kappa_tilde is None:
            kappa_tilde = kappa
        return cls(-kappa, kappa_tilde, -1.0)

    def inverse(self) -> tuple[float, float, float]:
        return (1.0 / self.a, 1.0 / self.b, 1.0 / self.c)

    def swapped(self) -> "CouplingTriple":
        """Exchange the two impurity channels."""
        return CouplingTriple(self.b, self.a, self.c)

    def scaled(self, factor: float) -> "CouplingTriple":
        return CouplingTriple(self.a * factor, self.b * factor, self.c * factor)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.a, self.b, self.c)


def _positive(value, what: str):
    value = np.asarray(value, dtype=float)
    if not np.all(value > 0.0):
        raise DomainError(f"{what} must be positive (energy at or above a threshold?)")
    return value


def _out(value):
    return float(value) if np.ndim(value) == 0 else value


def t0_hat(s, E: float, sigma: float = 0.0):
    """Symbol of T0: ``1/sqrt((1 - sigma^2) s^2 - 2E)``."""
    s = np.asarray(s, dtype=float)
    rad = _positive((1.0 - sigma * sigma) * s * s - 2.0 * E, "T0 radicand")
    return _out(1.0 / np.sqrt(rad))


def t1_hat(s, t, E: float, sigma: float = 0.0):
    """Kernel of T1 coupling the two impurity channels; symmetric in ``(s, t)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    # s * t first, so swapping the arguments reproduces the value bit for bit
    den = _positive(s * s + t * t + 2.0 * sigma * (s * t) - 2.0 * E, "T1 denominator")
    return _out((1.0 / np.pi) / den)


def t2_hat(s, t, E: float, sigma: float = 0.0):
    """Kernel of T2, mapping an impurity channel (momentum ``t``) into the exciton channel (momentum ``s``)."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    u = s - t
    den = _positive(t * t + u * u + 2.0 * sigma * t * u - 2.0 * E, "T2 denominator")
    return _out((1.0 / np.pi) / den)


def t2_hat_adjoint(s, t, E: float, sigma: float = 0.0):
    """Kernel of T2*, written out independently: ``t2_hat_adjoint(s, t) == t2_hat(t, s)``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    den = _positive(
        s * s + (t - s) ** 2 + 2.0 * sigma * s * (t - s) - 2.0 * E, "T2* denominator"
    )
    return _out((1.0 / np.pi) / den)


def t3_hat(s, E: float, sigma: float = 0.0):
    """Symbol of T3: ``1/sqrt((1 - sigma^2) s^2 - 4 (1 - sigma) E)``."""
    s = np.asarray(s, dtype=float)
    rad = _positive(
        (1.0 - sigma * sigma) * s * s - 4.0 * (1.0 - sigma) * E, "T3 radicand"
    )
    return _out(1.0 / np.sqrt(rad))


def bottom_essential(kappa: float, sigma: float = 0.0) -> float:
    """Bottom of the essential spectrum of the impurity-exciton operator."""
    sigma = check_sigma(sigma)
    return min(-1.0 / (4.0 * (1.0 - sigma)), -kappa * kappa / 2.0)


def two_body_energies(kappa: float, sigma: float = 0.0) -> tuple[float, float]:
    """Return ``(impurity-particle, exciton)`` two-body binding energies."""
    sigma = check_sigma(sigma)
    return (-kappa * kappa / 2.0, -1.0 / (4.0 * (1.0 - sigma)))


def threshold(couplings: CouplingTriple, sigma: float = 0.0) -> float:
    """Bottom of the essential spectrum for arbitrary signed couplings.

    Only attractive (negative) contacts carry a two-body bound state; the
    three-body continuum starts at the lowest of them, or at 0 if none is
    attractive.
    """
    sigma = check_sigma(sigma)
    levels = [0.0]
    for g in (couplings.a, couplings.b):
        if g < 0:
            levels.append(-g * g / 2.0)
    if couplings.c < 0:
        levels.append(-couplings.c ** 2 / (4.0 * (1.0 - sigma)))
    return min(levels)
