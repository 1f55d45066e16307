"""Bound states of the three-body contact operator from sign changes of the pencil.

Energies are located by counting negative eigenvalues of the discretized
pencil (Sylvester inertia of an LDL^T factorization) on a geometric energy
ladder that runs from deep below the spectrum up to a small margin under the
continuum threshold.  A drop in the count brackets a crossing, which is then
polished with Brent's method on the crossing eigenvalue branch.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .asymptotics import SIGMA_MAX, asymptotic_energy
from .grid import QuadratureGrid, build_grid
from .kernels import CouplingTriple, bottom_essential, check_sigma, threshold
from .pencil import assemble, branch_value, min_abs_eigenvalue, negative_count

__all__ = [
    "SolverError",
    "BracketError",
    "GridSpec",
    "BoundStateResult",
    "CriticalChargeResult",
    "SweepRecord",
    "SweepTable",
    "ConvergenceTable",
    "ground_state_energy",
    "count_bound_states",
    "bound_state_exists",
    "critical_charge",
    "sweep_energy",
    "scaling_check",
    "convergence_study",
]

log = logging.getLogger(__name__)

DEEP_FACTOR = 50.0
DEFAULT_MARGIN = 1e-6
REFINE_WINDOW = 4e-3
LADDER_RATIO = 4.0


class SolverError(RuntimeError):
    """Root search failed; ``bracket`` holds the last energy (or charge) interval."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class BracketError(SolverError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """Grid recipe tied to the problem's own momentum scale.

    The tangent map stretch is ``rel_scale * sqrt(2 |threshold|)``, so the
    grid follows the couplings under dilations and keeps nodes dense where
    near-threshold states live.
    """

    n: int = 400
    rel_scale: float = 0.1

    def build(self, couplings: CouplingTriple, sigma: float) -> QuadratureGrid:
        k = math.sqrt(2.0 * abs(threshold(couplings, sigma)))
        return build_grid(self.n, self.rel_scale * k)

    def doubled(self) -> "GridSpec":
        return replace(self, n=2 * self.n)


def _grid_for(grid, couplings, sigma) -> QuadratureGrid:
    if grid is None:
        grid = GridSpec()
    if isinstance(grid, GridSpec):
        return grid.build(couplings, sigma)
    return grid


def _doubled(grid):
    if grid is None:
        grid = GridSpec()
    if isinstance(grid, GridSpec):
        return grid.doubled()
    return build_grid(2 * grid.n, grid.scale)


@dataclass(frozen=True)
class BoundStateResult:
    energy: float
    residual: float
    n: int
    scale: float
    refined: bool
    converged: bool
    bottom: float
    couplings: CouplingTriple
    sigma: float

    @property
    def binding(self) -> float:
        return self.bottom - self.energy


@dataclass(frozen=True)
class CriticalChargeResult:
    kappa_c: float
    bracket: tuple[float, float]
    margin: float
    sigma: float
    n: int


def _energy_window(bottom: float, margin: float) -> tuple[float, float]:
    return DEEP_FACTOR * bottom, bottom - margin * abs(bottom)


def _count(E, couplings, sigma, grid) -> int:
    return negative_count(assemble(E, couplings, sigma, grid))


def _ladder(bottom: float, margin: float) -> np.ndarray:
    top_gap = margin * abs(bottom)
    deep_gap = (DEEP_FACTOR - 1.0) * abs(bottom)
    steps = max(2, math.ceil(math.log(deep_gap / top_gap) / math.log(LADDER_RATIO)) + 1)
    gaps = np.geomspace(deep_gap, top_gap, steps)
    return bottom - gaps


def _bracket_near(guess, couplings, sigma, grid, margin):
    """Bracket of the lowest crossing close to ``guess``, or ``None`` if it does not hold."""
    bottom = threshold(couplings, sigma)
    deep, top = _energy_window(bottom, margin)
    gap = bottom - guess
    lo = guess - 0.25 * gap
    hi = min(guess + 0.25 * gap, top)
    if not deep < lo < hi:
        return None
    nu_deep = _count(deep, couplings, sigma, grid)
    nu_lo = _count(lo, couplings, sigma, grid)
    if nu_lo != nu_deep:
        return None
    nu_hi = _count(hi, couplings, sigma, grid)
    if nu_hi >= nu_lo:
        return None
    return lo, hi, nu_lo, nu_hi


def _locate(couplings, sigma, grid, tol, margin, max_iter=200, guess=None):
    bottom = threshold(couplings, sigma)
    lo = hi = None
    if guess is not None:
        near = _bracket_near(guess, couplings, sigma, grid, margin)
        if near is not None:
            lo, hi, nu_lo, nu_hi = near
    energies = _ladder(bottom, margin) if lo is None else np.empty(0)
    if lo is None:
        counts = [_count(energies[0], couplings, sigma, grid)]
        if _count(energies[-1], couplings, sigma, grid) == counts[0]:
            return None
    for E_prev, E in zip(energies[:-1], energies[1:]):
        c = _count(E, couplings, sigma, grid)
        if c > counts[-1]:
            raise SolverError(
                f"negative count rose from {counts[-1]} to {c}; pencil not monotone on this grid",
                (float(E_prev), float(E)))
        if c < counts[-1]:
            lo, hi = float(E_prev), float(E)
            nu_lo, nu_hi = counts[-1], c
            break
        counts.append(c)
    if lo is None:
        return None

    # shrink the upper end until exactly one branch crosses in [lo, hi]
    for _ in range(max_iter):
        if nu_lo - nu_hi == 1:
            break
        mid = 0.5 * (lo + hi)
        nu_mid = _count(mid, couplings, sigma, grid)
        if nu_mid < nu_lo:
            hi, nu_hi = mid, nu_mid
        else:
            lo = mid
    else:
        raise SolverError("could not isolate the lowest crossing", (lo, hi))

    index = nu_lo - 1

    def branch(E):
        return branch_value(assemble(E, couplings, sigma, grid), index)

    try:
        root, info = brentq(branch, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                            maxiter=max_iter, full_output=True, disp=False)
    except ValueError as exc:
        raise SolverError(f"root polishing failed: {exc}", (lo, hi)) from exc
    if not info.converged:
        raise SolverError(f"root polishing did not converge ({info.flag})", (lo, hi))
    residual = min_abs_eigenvalue(assemble(root, couplings, sigma, grid))
    return float(root), residual


def ground_state_energy(couplings: CouplingTriple, sigma: float = 0.0, grid=None,
                        tol: float = 1e-10, *, margin: float = DEFAULT_MARGIN,
                        refine: bool = True, confirm_tol: float | None = None
                        ) -> BoundStateResult | None:
    """Lowest discrete eigenvalue, or ``None`` when the window below threshold is empty.

    ``grid`` is a :class:`GridSpec` (default) or a fixed
    :class:`~delta_spectra.grid.QuadratureGrid`.  States binding less than
    ``margin * |threshold|`` are invisible.  A root within
    ``4e-3 * |threshold|`` of the threshold is re-solved with twice the nodes;
    ``converged`` reports whether the two agree to ``confirm_tol``.
    """
    sigma = check_sigma(sigma)
    if tol <= 0:
        raise ValueError("tol must be positive")
    bottom = threshold(couplings, sigma)
    if bottom >= 0:
        return None
    if confirm_tol is None:
        confirm_tol = 1e-8 * abs(bottom)

    qgrid = _grid_for(grid, couplings, sigma)
    found = _locate(couplings, sigma, qgrid, tol, margin)
    if found is None:
        return None
    energy, residual = found
    refined = False
    converged = True
    if refine and bottom - energy < REFINE_WINDOW * abs(bottom):
        finer = _grid_for(_doubled(grid), couplings, sigma)
        again = _locate(couplings, sigma, finer, tol, margin, guess=energy)
        refined = True
        qgrid = finer
        if again is None:
            converged = False
            log.warning("state at %.12g vanished on the refined grid", energy)
        else:
            converged = abs(again[0] - energy) <= confirm_tol
            energy, residual = again
    return BoundStateResult(energy=energy, residual=residual, n=qgrid.n, scale=qgrid.scale,
                            refined=refined, converged=converged, bottom=bottom,
                            couplings=couplings, sigma=sigma)


def count_bound_states(couplings: CouplingTriple, sigma: float = 0.0, grid=None,
                       margin: float = DEFAULT_MARGIN) -> int:
    """Number of pencil branches crossing zero between the deep anchor and the threshold margin."""
    sigma = check_sigma(sigma)
    bottom = threshold(couplings, sigma)
    if bottom >= 0:
        return 0
    qgrid = _grid_for(grid, couplings, sigma)
    deep, top = _energy_window(bottom, margin)
    return _count(deep, couplings, sigma, qgrid) - _count(top, couplings, sigma, qgrid)


def bound_state_exists(kappa: float, kappa_tilde: float | None = None, sigma: float = 0.0,
                       grid=None, margin: float = DEFAULT_MARGIN) -> bool:
    if kappa <= 0 or (kappa_tilde is not None and kappa_tilde <= 0):
        raise ValueError("charges must be positive")
    return count_bound_states(CouplingTriple.impurity(kappa, kappa_tilde), sigma, grid, margin) >= 1


def critical_charge(sigma: float = 0.0, tol: float = 1e-3, grid=None,
                    margin: float = DEFAULT_MARGIN,
                    bracket: tuple[float, float] = (1.0 / math.sqrt(2.0), 4.0)
                    ) -> CriticalChargeResult:
    """Bisect on the charge for the point where the discrete spectrum empties."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    if grid is None:
        grid = GridSpec(n=800)
    lo, hi = map(float, bracket)
    if not bound_state_exists(lo, lo, sigma, grid, margin):
        raise BracketError(f"no bound state at the lower end kappa={lo}", (lo, hi))
    if bound_state_exists(hi, hi, sigma, grid, margin):
        raise BracketError(f"bound state persists at the upper end kappa={hi}", (lo, hi))
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if bound_state_exists(mid, mid, sigma, grid, margin):
            lo = mid
        else:
            hi = mid
    n = grid.n
    return CriticalChargeResult(kappa_c=0.5 * (lo + hi), bracket=(lo, hi), margin=margin,
                                sigma=sigma, n=n)


@dataclass(frozen=True)
class SweepRecord:
    kappa: float
    energy: float | None
    bottom_essential: float
    asymptote: float | None
    residual: float | None
    status: str


@dataclass
class SweepTable:
    records: list[SweepRecord]
    axis: str = "kappa"
    fixed: dict = field(default_factory=dict)

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.records]

    def existing(self) -> list[SweepRecord]:
        return [r for r in self.records if r.energy is not None]


def _sweep_point(args) -> SweepRecord:
    kappa, sigma, grid, tol, with_asymptote, margin = args
    bottom = bottom_essential(kappa, sigma)
    asym = None
    if with_asymptote and sigma < SIGMA_MAX:
        asym = asymptotic_energy(kappa, sigma)
    try:
        res = ground_state_energy(CouplingTriple.impurity(kappa), sigma, grid, tol, margin=margin)
    except Exception as exc:  # one bad point must not end the sweep
        log.warning("kappa=%g failed: %s", kappa, exc)
        return SweepRecord(kappa, None, bottom, asym, None, f"error: {exc}")
    if res is None:
        return SweepRecord(kappa, None, bottom, asym, None, "none")
    status = "ok" if res.converged else "unconverged"
    return SweepRecord(kappa, res.energy, bottom, asym, res.residual, status)


def sweep_energy(kappa_values, sigma: float = 0.0, grid=None, tol: float = 1e-10, *,
                 with_asymptote: bool = False, margin: float = DEFAULT_MARGIN,
                 workers: int = 1) -> SweepTable:
    """Ground state energy along a strictly increasing list of charges.

    Rows come back in charge order regardless of ``workers``.
    """
    kappas = [float(k) for k in kappa_values]
    if not kappas:
        raise ValueError("empty charge list")
    if any(k <= 0 for k in kappas) or any(b <= a for a, b in zip(kappas, kappas[1:])):
        raise ValueError("charges must be positive and strictly increasing")
    sigma = check_sigma(sigma)
    jobs = [(k, sigma, grid, tol, with_asymptote, margin) for k in kappas]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_sweep_point, jobs))
    else:
        records = [_sweep_point(j) for j in jobs]
    fixed = {"sigma": sigma, "tol": tol, "margin": margin, "grid": repr(grid or GridSpec())}
    return SweepTable(records=records, axis="kappa", fixed=fixed)


def scaling_check(kappa: float, sigma: float = 0.0, grid=None, lam: float | None = None,
                  tol: float = 1e-12) -> tuple[float, float]:
    """Compare ``E(-k, k, -1)`` with ``lam^2 E(-k/lam, k/lam, -1/lam)``.

    A fixed grid is stretched by ``1/lam`` for the second problem; a
    :class:`GridSpec` follows the threshold by itself.
    """
    if lam is None:
        lam = kappa
    if kappa <= 0 or lam <= 0:
        raise ValueError("kappa and lam must be positive")
    base = CouplingTriple.impurity(kappa)
    first = ground_state_energy(base, sigma, grid, tol)
    if first is None:
        raise SolverError(f"no bound state at kappa={kappa}")
    other_grid = grid.rescaled(1.0 / lam) if isinstance(grid, QuadratureGrid) else grid
    second = ground_state_energy(base.scaled(1.0 / lam), sigma, other_grid, tol / lam ** 2)
    if second is None:
        raise SolverError(f"no bound state for the dilated couplings (lam={lam})")
    return first.energy, lam ** 2 * second.energy


@dataclass
class ConvergenceTable:
    rows: list[tuple[int, float, float]]
    differences: dict
    extrapolated: float
    error: float
    history: list[float]


def _aitken(seq) -> float:
    e1, e2, e3 = seq[-3:]
    d1, d2 = e2 - e1, e3 - e2
    denom = d2 - d1
    if denom == 0 or abs(d2) >= abs(d1) or abs(d2) < 1e-15 * max(1.0, abs(e3)):
        return e3
    return e3 - d2 * d2 / denom


def convergence_study(couplings: CouplingTriple, sigma: float = 0.0, n_values=(200, 400, 800),
                      scale_values=(1.0,), tol: float = 1e-13) -> ConvergenceTable:
    """Ground state energy on fixed tangent-map grids for every ``(n, scale)`` pair.

    Successive differences run along ``n`` at each scale.  The extrapolated
    value comes from an Aitken step on the last three levels of the first
    scale (plain last value with fewer than three); ``history`` holds the
    extrapolation computed from each prefix of the ``n`` list.
    """
    n_values = [int(n) for n in n_values]
    scale_values = [float(s) for s in scale_values]
    if not n_values or not scale_values:
        raise ValueError("n_values and scale_values must be nonempty")
    if any(b <= a for a, b in zip(n_values, n_values[1:])):
        raise ValueError("n_values must be increasing")
    rows = []
    by_scale: dict[float, list[float]] = {}
    for scale in scale_values:
        for n in n_values:
            res = ground_state_energy(couplings, sigma, build_grid(n, scale), tol, refine=False)
            if res is None:
                raise SolverError(f"no bound state on grid n={n}, scale={scale}")
            rows.append((n, scale, res.energy))
            by_scale.setdefault(scale, []).append(res.energy)
    differences = {s: list(np.diff(e)) for s, e in by_scale.items()}
    seq = by_scale[scale_values[0]]
    history = []
    for k in range(1, len(seq) + 1):
        history.append(_aitken(seq[:k]) if k >= 3 else seq[k - 1])
    extrapolated = history[-1]
    error = abs(extrapolated - seq[-1]) if len(seq) >= 3 else (
        abs(seq[-1] - seq[-2]) if len(seq) == 2 else float("nan"))
    if len(seq) >= 2:
        error = max(error, abs(seq[-1] - seq[-2]))
    return ConvergenceTable(rows=rows, differences=differences, extrapolated=extrapolated,
                            error=error, history=history)
