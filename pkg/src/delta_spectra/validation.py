"""Invariant checks run by ``delta-spectra validate``."""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .grid import build_grid
from .kernels import CouplingTriple
from .oracle import BoxDiscretization, BoxTooSmallWarning, oracle_ground_state
from .pencil import assemble, assemble_single_channel, diagnostics
from .solver import GridSpec, ground_state_energy

__all__ = ["CheckResult", "run_checks", "CHECKS"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    limit: float
    detail: str
    seconds: float = 0.0

    def as_dict(self) -> dict:
        return asdict(self)


def _result(name, value, limit, detail) -> CheckResult:
    value = float(value)
    return CheckResult(name, bool(math.isfinite(value) and value <= limit), value, limit, detail)


def check_two_body_poles(fast: bool) -> CheckResult:
    worst = 0.0
    for sigma in (0.0, 0.3):
        for kappa in (0.5, 1.0, 1.5):
            E = -kappa ** 2 / 2
            worst = max(worst, abs(1 / kappa - kernels.t0_hat(0.0, E, sigma)))
            coupling = CouplingTriple(-kappa, 1.0, 1.0)
            grid = GridSpec(n=400).build(coupling, sigma)
            top = lambda e: assemble_single_channel(e, -kappa, 0, sigma, grid).diagonal().max()
            root = brentq(top, 2 * E, 0.5 * E, xtol=1e-15)
            worst = max(worst, abs(root - E))
        E = -1 / (4 * (1 - sigma))
        worst = max(worst, abs(1 - kernels.t3_hat(0.0, E, sigma)))
        grid = GridSpec(n=400).build(CouplingTriple(1.0, 1.0, -1.0), sigma)
        top = lambda e: assemble_single_channel(e, -1.0, 2, sigma, grid).diagonal().max()
        root = brentq(top, 2 * E, 0.5 * E, xtol=1e-15)
        worst = max(worst, abs(root - E))
    return _result("two-body-poles", worst, 1e-6,
                   "closed-form and discretized single-channel singular energies vs -k^2/2, -1/(4(1-s))")


def check_kernel_symmetry(fast: bool) -> CheckResult:
    rng = np.random.default_rng(7)
    s, t = rng.uniform(-20, 20, (2, 500))
    E = -rng.uniform(0.01, 5, 500)
    sigma = rng.uniform(0, 0.95, 500)
    t1 = kernels.t1_hat(s, t, E, sigma)
    dev_t1 = np.max(np.abs(t1 - kernels.t1_hat(t, s, E, sigma)) / np.abs(t1))
    t2 = kernels.t2_hat(s, t, E, sigma)
    dev_t2 = np.max(np.abs(t2 - kernels.t2_hat_adjoint(t, s, E, sigma)) / np.abs(t2))
    positive = all(np.all(np.asarray(v) > 0) for v in (
        kernels.t0_hat(s, E, sigma), t1, t2, kernels.t3_hat(s, E, sigma)))
    value = max(dev_t1, dev_t2) if positive else math.inf
    return _result("kernel-symmetry", value, 1e-13,
                   "T1 swap symmetry, T2 against its adjoint, positivity of all kernels")


def check_pencil_symmetry(fast: bool) -> CheckResult:
    n = 100 if fast else 200
    grid = build_grid(n, 1.0)
    worst = 0.0
    for sigma in (0.0, 0.4):
        c = CouplingTriple.impurity(0.6)
        M = assemble(-0.4, c, sigma, grid)
        asym = np.max(np.abs(M.entries - M.entries.T))
        ev = diagnostics(M).eigenvalues
        ev_swap = diagnostics(assemble(-0.4, c.swapped(), sigma, grid)).eigenvalues
        worst = max(worst, asym, np.max(np.abs(ev - ev_swap)))
    return _result("pencil-symmetry", worst, 1e-12,
                   "exact transpose symmetry and 1<->2 channel swap spectrum")


def deep_deviation(E: float, n: int, kappa: float = 0.5, sigma: float = 0.0) -> float:
    """Largest distance of a pencil eigenvalue from the nearest inverse coupling."""
    c = CouplingTriple.impurity(kappa)
    ev = diagnostics(assemble(E, c, sigma, build_grid(n, 1.0))).eigenvalues
    targets = np.array(c.inverse())
    return float(np.max(np.min(np.abs(ev[:, None] - targets[None, :]), axis=1)))


def check_deep_limit(fast: bool) -> CheckResult:
    n = 100 if fast else 200
    energies = (-1e2, -1e3, -1e4)
    devs = [deep_deviation(E, n) for E in energies]
    # T0 alone reaches 1/sqrt(2|E|) at s = 0, so 1/sqrt(|E|) is the natural yardstick
    ratio = max(d * math.sqrt(abs(E)) for d, E in zip(devs, energies))
    value = ratio if devs[0] > devs[1] > devs[2] else math.inf
    return _result("deep-energy-limit", value, 1.0,
                   "max |eig - g^-1| * sqrt(|E|) over E in {-1e2,-1e3,-1e4}, decreasing in |E|")


def check_branch_monotonicity(fast: bool) -> CheckResult:
    n = 100 if fast else 200
    grid = build_grid(n, 1.0)
    rng = np.random.default_rng(11)
    worst = -math.inf
    h = 1e-3
    for _ in range(3 if fast else 6):
        E = -rng.uniform(0.3, 3.0)
        sigma = rng.uniform(0.0, 0.6)
        c = CouplingTriple.impurity(rng.uniform(0.1, 0.7))
        lo = diagnostics(assemble(E, c, sigma, grid)).eigenvalues
        hi = diagnostics(assemble(E + h, c, sigma, grid)).eigenvalues
        noise = 64 * np.finfo(float).eps * np.max(np.abs(hi)) / h
        worst = max(worst, np.max(-(hi - lo) / h) - noise)
    return _result("branch-monotonicity", max(worst, 0.0), 0.0,
                   "sorted pencil eigenvalues nondecreasing in E (beyond rounding noise)")


def check_sign_flip(fast: bool) -> CheckResult:
    spec = GridSpec(n=200 if fast else 400)
    e1 = ground_state_energy(CouplingTriple(-0.5, 0.5, -1.0), 0.0, spec, 1e-13).energy
    e2 = ground_state_energy(CouplingTriple(0.5, -0.5, -1.0), 0.0, spec, 1e-13).energy
    return _result("sign-flip", abs(e1 - e2), 1e-10, "E(kappa) = E(-kappa)")


def check_dilation(fast: bool) -> CheckResult:
    spec = GridSpec(n=200 if fast else 400)
    c = CouplingTriple.impurity(0.5)
    base = ground_state_energy(c, 0.0, spec, 1e-13).energy
    worst = 0.0
    for lam in (0.5, 2.0):
        e = ground_state_energy(c.scaled(lam), 0.0, spec, 1e-13).energy
        worst = max(worst, abs(e - lam ** 2 * base))
    return _result("dilation", worst, 1e-6, "E(lam c) = lam^2 E(c)")


def check_grid_convergence(fast: bool) -> CheckResult:
    n1, n2 = (200, 400) if fast else (400, 800)
    c = CouplingTriple.impurity(0.5)
    e1 = ground_state_energy(c, 0.0, GridSpec(n=n1), 1e-13, refine=False).energy
    e2 = ground_state_energy(c, 0.0, GridSpec(n=n2), 1e-13, refine=False).energy
    return _result("grid-convergence", abs(e2 - e1), 1e-6, f"|E(n={n2}) - E(n={n1})| at kappa=0.5")


def check_oracle(fast: bool) -> CheckResult:
    h, half, limit = (0.2, 12.0, 0.05) if fast else (0.1, 20.0, 0.02)
    pencil = ground_state_energy(CouplingTriple.impurity(0.5), 0.0).energy
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoxTooSmallWarning)
        fd = oracle_ground_state(box=BoxDiscretization(half, h, (-0.5, 0.5, -1.0), 0.0))
    binding = -0.25 - pencil
    return _result("oracle-agreement", abs(fd - pencil) / binding, limit,
                   f"finite differences h={h}, L={half} vs pencil, relative to binding")


CHECKS = [
    check_two_body_poles,
    check_kernel_symmetry,
    check_pencil_symmetry,
    check_deep_limit,
    check_branch_monotonicity,
    check_sign_flip,
    check_dilation,
    check_grid_convergence,
    check_oracle,
]


def run_checks(fast: bool = False) -> list[CheckResult]:
    results = []
    for check in CHECKS:
        start = time.perf_counter()
        try:
            res = check(fast)
        except Exception as exc:
            res = CheckResult(check.__name__.removeprefix("check_").replace("_", "-"),
                              False, math.nan, math.nan, f"raised {type(exc).__name__}: {exc}")
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results
