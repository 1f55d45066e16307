"""Discretized operator pencil ``G(E) = g^-1 + tau R0(E) tau*`` and its spectral diagnostics.

A real energy ``E`` below the essential spectrum is a discrete eigenvalue of
the three-body operator exactly when ``G(E)`` has a zero eigenvalue.  Every
eigenvalue branch of ``G(E)`` is nondecreasing in ``E``, so the number of
negative eigenvalues can only drop as ``E`` grows; each drop marks a bound
state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from . import kernels
from .grid import QuadratureGrid, discretize_integral, discretize_multiplication
from .kernels import CouplingTriple, check_sigma

__all__ = [
    "EigensolverError",
    "PencilMatrix",
    "SpectralDiagnostics",
    "assemble",
    "assemble_single_channel",
    "diagnostics",
    "negative_count",
    "branch_value",
    "min_abs_eigenvalue",
    "branch_slope",
]


class EigensolverError(RuntimeError):
    """A dense or iterative eigensolver failed to converge."""


@dataclass(frozen=True)
class PencilMatrix:
    entries: np.ndarray
    energy: float
    couplings: CouplingTriple
    sigma: float
    grid: QuadratureGrid

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        n = self.grid.n
        return self.entries[i * n:(i + 1) * n, j * n:(j + 1) * n]


@dataclass(frozen=True)
class SpectralDiagnostics:
    eigenvalues: np.ndarray
    neg_count: int
    min_abs: float


def assemble(E: float, couplings: CouplingTriple, sigma: float, grid: QuadratureGrid) -> PencilMatrix:
    """Assemble the 3n x 3n symmetric pencil at energy ``E``.

    Raises :class:`~delta_spectra.kernels.DomainError` if ``E`` is not low
    enough for every kernel to be finite on the grid.
    """
    sigma = check_sigma(sigma)
    E = float(E)
    n = grid.n
    ia, ib, ic = couplings.inverse()

    t0 = discretize_multiplication(lambda s: kernels.t0_hat(s, E, sigma), grid)
    t3 = discretize_multiplication(lambda s: kernels.t3_hat(s, E, sigma), grid)
    t1 = discretize_integral(lambda s, t: kernels.t1_hat(s, t, E, sigma), grid)
    # rows: exciton-channel momentum, columns: impurity-channel momentum
    t2 = discretize_integral(lambda s, t: kernels.t2_hat(s, t, E, sigma), grid)

    M = np.empty((3 * n, 3 * n))
    eye = np.eye(n)
    M[:n, :n] = t0 + ia * eye
    M[n:2 * n, n:2 * n] = t0 + ib * eye
    M[2 * n:, 2 * n:] = t3 + ic * eye
    M[:n, n:2 * n] = t1
    M[n:2 * n, :n] = t1.T
    M[2 * n:, :n] = t2
    M[2 * n:, n:2 * n] = t2
    M[:n, 2 * n:] = t2.T
    M[n:2 * n, 2 * n:] = t2.T
    if not np.all(np.isfinite(M)):
        raise kernels.DomainError(f"non-finite pencil entries at E={E}")
    # mirror the lower triangle so symmetry holds bit for bit
    M = np.tril(M) + np.tril(M, -1).T
    M.setflags(write=False)
    return PencilMatrix(entries=M, energy=E, couplings=couplings, sigma=sigma, grid=grid)


def assemble_single_channel(E: float, coupling: float, channel: int, sigma: float,
                            grid: QuadratureGrid) -> np.ndarray:
    """Diagonal ``1/g + T`` of one isolated contact channel (0, 1: impurity; 2: exciton)."""
    sigma = check_sigma(sigma)
    if channel in (0, 1):
        symbol = kernels.t0_hat(grid.nodes, E, sigma)
    elif channel == 2:
        symbol = kernels.t3_hat(grid.nodes, E, sigma)
    else:
        raise ValueError(f"channel must be 0, 1 or 2, got {channel}")
    return np.diag(symbol + 1.0 / coupling)


def _matrix(M) -> np.ndarray:
    return M.entries if isinstance(M, PencilMatrix) else np.asarray(M, dtype=float)


def diagnostics(M) -> SpectralDiagnostics:
    """Full symmetric eigendecomposition of a pencil (or any symmetric matrix)."""
    A = _matrix(M)
    try:
        ev = scipy.linalg.eigvalsh(A, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    ev = np.sort(ev)
    return SpectralDiagnostics(
        eigenvalues=ev,
        neg_count=int(np.count_nonzero(ev < 0)),
        min_abs=float(np.min(np.abs(ev))),
    )


def negative_count(M) -> int:
    """Number of negative eigenvalues, from the inertia of a Bunch-Kaufman LDL^T factorization."""
    A = _matrix(M)
    try:
        _, d, _ = scipy.linalg.ldl(A, lower=True, hermitian=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    diag = np.diag(d)
    sub = np.diag(d, -1)
    count = 0
    i = 0
    size = diag.size
    while i < size:
        if i + 1 < size and sub[i] != 0.0:
            a, b, c = diag[i], sub[i], diag[i + 1]
            det = a * c - b * b
            if det < 0:
                count += 1
            elif det > 0 and a + c < 0:
                count += 2
            i += 2
        else:
            count += diag[i] < 0
            i += 1
    return int(count)


def _nearest_to_zero(A: np.ndarray, which: str) -> float:
    try:
        vals = scipy.sparse.linalg.eigsh(A, k=1, sigma=0.0, which=which,
                                         return_eigenvectors=False)
    except (scipy.sparse.linalg.ArpackNoConvergence, RuntimeError) as exc:
        raise EigensolverError(str(exc)) from exc
    return float(vals[0])


def branch_value(M, index: int, neg: int | None = None) -> float:
    """Value of the ``index``-th smallest eigenvalue.

    When the branch is the eigenvalue closest to zero on its side of the
    origin (``neg == index + 1`` or ``neg == index``), shift-invert at zero
    gets it from one LU factorization; otherwise falls back to a partial
    dense solve.
    """
    A = _matrix(M)
    if neg is None:
        neg = negative_count(A)
    try:
        if neg == index + 1:
            # in shift-invert mode 'SA' picks the smallest 1/lambda: the largest negative lambda
            return _nearest_to_zero(A, "SA")
        if neg == index:
            return _nearest_to_zero(A, "LA")
    except EigensolverError:
        pass
    try:
        vals = scipy.linalg.eigh(A, eigvals_only=True, subset_by_index=[index, index],
                                 check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    return float(vals[0])


def min_abs_eigenvalue(M) -> float:
    """Smallest eigenvalue magnitude, by shift-invert about zero."""
    A = _matrix(M)
    try:
        return abs(_nearest_to_zero(A, "LM"))
    except EigensolverError:
        return diagnostics(A).min_abs


def branch_slope(E: float, couplings: CouplingTriple, sigma: float, grid: QuadratureGrid,
                 h: float = 1e-4) -> np.ndarray:
    """Forward-difference slopes of the sorted eigenvalues between ``E`` and ``E + h``."""
    lo = diagnostics(assemble(E, couplings, sigma, grid)).eigenvalues
    hi = diagnostics(assemble(E + h, couplings, sigma, grid)).eigenvalues
    return (hi - lo) / h
