"""Quadrature on the real line and Nystrom discretization of momentum-space operators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "QuadratureGrid",
    "build_grid",
    "discretize_multiplication",
    "discretize_integral",
]


@dataclass(frozen=True)
class QuadratureGrid:
    """Mapped Gauss-Legendre rule for integrals over the whole real line.

    Nodes are ``scale * tan(u_i)`` with ``u_i`` the Gauss-Legendre nodes on
    ``(-pi/2, pi/2)``; weights carry the Jacobian ``scale / cos(u_i)^2``.
    """

    n: int
    scale: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def sqrt_weights(self) -> np.ndarray:
        return np.sqrt(self.weights)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def rescaled(self, factor: float) -> "QuadratureGrid":
        """Same rule with the map stretched by ``factor``."""
        return build_grid(self.n, self.scale * factor)


def build_grid(n: int = 400, scale: float = 1.0) -> QuadratureGrid:
    if int(n) != n or n < 16 or n % 2:
        raise ValueError(f"node count must be an even integer >= 16, got {n}")
    if not scale > 0:
        raise ValueError(f"map scale must be positive, got {scale}")
    n = int(n)
    u, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * np.pi * u
    w = 0.5 * np.pi * w
    # leggauss is symmetric up to rounding; make it exact
    u = 0.5 * (u - u[::-1])
    w = 0.5 * (w + w[::-1])
    nodes = scale * np.tan(u)
    weights = w * scale / np.cos(u) ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureGrid(n=n, scale=float(scale), nodes=nodes, weights=weights)


def discretize_multiplication(f, grid: QuadratureGrid) -> np.ndarray:
    """Diagonal matrix of a multiplication operator; no weights enter."""
    values = np.broadcast_to(np.asarray(f(grid.nodes), dtype=float), grid.nodes.shape)
    return np.diag(values)


def discretize_integral(kernel, grid: QuadratureGrid) -> np.ndarray:
    """Symmetrically weighted Nystrom matrix ``sqrt(w_i) K(s_i, s_j) sqrt(w_j)``.

    ``kernel(S, T)`` must broadcast over a column of row momenta and a row of
    column momenta.  The weight factor is a single outer product so a
    symmetric kernel gives a bitwise symmetric matrix.
    """
    s = grid.nodes
    values = np.asarray(kernel(s[:, None], s[None, :]), dtype=float)
    values = np.broadcast_to(values, (grid.n, grid.n))
    r = grid.sqrt_weights
    return values * np.outer(r, r)
