"""Brute-force real-space cross-check of the pencil solver.

The Hamiltonian ``-1/2 Laplacian - sigma d_x d_y + a delta(y) + b delta(x) + c delta(x - y)``
is discretized by finite differences on a Dirichlet box ``[-L, L]^2``.  Each
contact line becomes ``coupling / h`` on the grid nodes it passes through,
the consistent one-dimensional rule for a delta function.  The lowest
eigenvalue comes from ARPACK in shift-invert mode.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .kernels import CouplingTriple, check_sigma
from .pencil import EigensolverError

__all__ = [
    "BoxDiscretization",
    "BoxTooSmallWarning",
    "box_hamiltonian",
    "oracle_ground_state",
    "oracle_convergence",
    "delta_well_1d",
    "richardson",
]


class BoxTooSmallWarning(UserWarning):
    pass


def _triple(couplings) -> tuple[float, float, float]:
    if isinstance(couplings, CouplingTriple):
        return couplings.as_tuple()
    a, b, c = (float(x) for x in couplings)
    return a, b, c


@dataclass(frozen=True)
class BoxDiscretization:
    """Uniform Dirichlet grid on ``[-box_half_width, box_half_width]^2``.

    ``couplings`` may contain zeros here (a switched-off contact).
    """

    box_half_width: float = 20.0
    spacing: float = 0.1
    couplings: tuple[float, float, float] = (-0.5, 0.5, -1.0)
    sigma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "couplings", _triple(self.couplings))
        check_sigma(self.sigma)
        if self.spacing <= 0 or self.box_half_width <= 0:
            raise ValueError("spacing and box half-width must be positive")
        ratio = self.box_half_width / self.spacing
        if abs(ratio - round(ratio)) > 1e-9 * ratio:
            raise ValueError("box half-width must be an integer multiple of the spacing")
        if self.points < 100:
            raise ValueError(f"need at least 100 interior points per axis, got {self.points}")

    @property
    def half_points(self) -> int:
        return int(round(self.box_half_width / self.spacing))

    @property
    def points(self) -> int:
        """Interior points per axis; the boundary nodes carry the Dirichlet zeros."""
        return 2 * self.half_points - 1

    @property
    def axis(self) -> np.ndarray:
        m = self.half_points
        return np.arange(-m + 1, m) * self.spacing


def box_hamiltonian(box: BoxDiscretization) -> sp.csr_matrix:
    """Sparse symmetric finite-difference Hamiltonian, row-major over ``(x_i, y_j)``."""
    h = box.spacing
    N = box.points
    a, b, c = box.couplings
    eye = sp.identity(N, format="csr")
    ones = np.ones(N - 1)
    d2 = sp.diags([ones, -2.0 * np.ones(N), ones], [-1, 0, 1], format="csr") / h ** 2
    d1 = sp.diags([-ones, ones], [-1, 1], format="csr") / (2.0 * h)

    H = -0.5 * (sp.kron(d2, eye) + sp.kron(eye, d2))
    if box.sigma:
        H = H - box.sigma * sp.kron(d1, d1)

    idx = np.arange(N)
    center = N // 2  # axis[center] == 0 exactly
    pot = np.zeros((N, N))
    pot[:, center] += a / h  # y = 0
    pot[center, :] += b / h  # x = 0
    pot[idx, idx] += c / h   # x = y
    H = H + sp.diags(pot.ravel())
    return sp.csr_matrix(H)


def _lowest(H, shift: float, k: int = 3, seed: int = 0):
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(H.shape[0])
    try:
        vals, vecs = sla.eigsh(H.tocsc(), k=k, sigma=shift, which="LM", v0=v0)
    except sla.ArpackNoConvergence as exc:
        raise EigensolverError(f"ARPACK did not converge: {exc}") from exc
    i = int(np.argmin(vals))
    return float(vals[i]), vecs[:, i]


def _default_shift(couplings, sigma: float = 0.0) -> float:
    a, b, c = couplings
    # roughly twice the deepest two-body energy: below every state of interest
    levels = [-(g * g) / 2.0 for g in (a, b) if g < 0]
    if c < 0:
        levels.append(-(c * c) / (4.0 * (1.0 - sigma)))
    deepest = min(levels, default=-0.1)
    return 2.0 * deepest - 0.05


def oracle_ground_state(couplings=None, sigma: float | None = None,
                        box: BoxDiscretization | None = None, *, shift: float | None = None,
                        boundary_tol: float = 1e-3) -> float:
    """Lowest eigenvalue of the finite-difference Hamiltonian.

    Pass either a complete ``box`` or ``couplings``/``sigma`` (with default
    box geometry).  Emits :class:`BoxTooSmallWarning` when the eigenvector
    keeps more than ``boundary_tol`` of its peak amplitude on the outermost
    interior ring.
    """
    if box is None:
        box = BoxDiscretization(couplings=couplings if couplings is not None else (-0.5, 0.5, -1.0),
                                sigma=sigma or 0.0)
    elif couplings is not None or sigma is not None:
        box = BoxDiscretization(box.box_half_width, box.spacing,
                                couplings if couplings is not None else box.couplings,
                                box.sigma if sigma is None else sigma)
    if shift is None:
        shift = _default_shift(box.couplings, box.sigma)
    value, vec = _lowest(box_hamiltonian(box), shift)
    psi = np.abs(vec).reshape(box.points, box.points)
    ring = max(psi[0].max(), psi[-1].max(), psi[:, 0].max(), psi[:, -1].max())
    if ring > boundary_tol * psi.max():
        warnings.warn(f"eigenvector reaches the box edge (ratio {ring / psi.max():.2e}); "
                      "enlarge box_half_width", BoxTooSmallWarning, stacklevel=2)
    return value


def oracle_convergence(couplings, sigma: float = 0.0, h_values=(0.2, 0.1, 0.05),
                       box_half_width: float = 20.0) -> list[tuple[float, float, float]]:
    """Rows ``(h, energy, change from previous h)`` for decreasing spacings."""
    h_values = [float(h) for h in h_values]
    if any(b >= a for a, b in zip(h_values, h_values[1:])):
        raise ValueError("h_values must be decreasing")
    rows = []
    prev = math.nan
    for h in h_values:
        box = BoxDiscretization(box_half_width, h, couplings, sigma)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BoxTooSmallWarning)
            e = oracle_ground_state(box=box)
        rows.append((h, e, e - prev))
        prev = e
    return rows


def richardson(rows, order: float = 1.0) -> float:
    """Extrapolate the two finest rows of :func:`oracle_convergence` to ``h -> 0``.

    The cross-derivative stencil meeting the diagonal contact line converges
    only to first order in ``h`` once ``sigma > 0``.
    """
    (h1, e1, _), (h2, e2, _) = rows[-2], rows[-1]
    r = (h1 / h2) ** order
    return (r * e2 - e1) / (r - 1.0)


def delta_well_1d(strength: float = -1.0, spacing: float = 0.01, half_width: float = 20.0) -> float:
    """Lowest eigenvalue of ``-1/2 d^2/dx^2 + strength * delta(x)`` on a Dirichlet interval."""
    m = int(round(half_width / spacing))
    N = 2 * m - 1
    ones = np.ones(N - 1)
    H = sp.diags([-0.5 * ones / spacing ** 2, np.full(N, 1.0 / spacing ** 2), -0.5 * ones / spacing ** 2],
                 [-1, 0, 1], format="lil")
    H[m - 1, m - 1] += strength / spacing
    shift = -strength * strength if strength < 0 else -1.0
    value, _ = _lowest(H.tocsr(), shift, k=1)
    return value
