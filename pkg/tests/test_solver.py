import math

import numpy as np
import pytest

from delta_spectra.grid import build_grid
from delta_spectra.kernels import CouplingTriple, bottom_essential
from delta_spectra.pencil import assemble, min_abs_eigenvalue
from delta_spectra.solver import (
    BracketError,
    GridSpec,
    bound_state_exists,
    convergence_study,
    count_bound_states,
    critical_charge,
    ground_state_energy,
    scaling_check,
    sweep_energy,
)

KAPPA_HALF_ENERGY = -0.2897879282851


def test_reference_energy(impurity_half):
    res = ground_state_energy(impurity_half, tol=1e-13)
    assert res.energy == pytest.approx(KAPPA_HALF_ENERGY, abs=1e-12)
    assert res.energy < res.bottom == -0.25
    assert res.binding == pytest.approx(-0.25 - res.energy)
    assert res.residual < 1e-10
    assert not res.refined and res.converged


def test_residual_is_pencil_singularity(impurity_half):
    res = ground_state_energy(impurity_half, tol=1e-13)
    grid = GridSpec().build(impurity_half, 0.0)
    assert min_abs_eigenvalue(assemble(res.energy, impurity_half, 0.0, grid)) < 1e-10


def test_small_charge_near_asymptote():
    res = ground_state_energy(CouplingTriple.impurity(0.2))
    assert res.energy == pytest.approx(-0.25191, abs=3e-4)
    res = ground_state_energy(CouplingTriple.impurity(0.05))
    assert res.refined and res.converged
    binding = -0.25 - res.energy
    assert binding == pytest.approx(1.194557 * 0.05 ** 4, rel=0.1)


def test_existence_examples():
    assert ground_state_energy(CouplingTriple.impurity(0.7)).energy < -0.25
    assert ground_state_energy(CouplingTriple.impurity(2.0)) is None
    assert count_bound_states(CouplingTriple.impurity(0.2)) == 1
    assert count_bound_states(CouplingTriple.impurity(2.0)) == 0
    assert count_bound_states(CouplingTriple(-10.0, 0.5, -1.0)) >= 1
    assert bound_state_exists(0.5, 0.5)
    assert bound_state_exists(1 / math.sqrt(2))
    assert bound_state_exists(10, 0.5)
    assert not bound_state_exists(10, 2)
    with pytest.raises(ValueError):
        bound_state_exists(-1.0)


def test_counting_consistency():
    for kappa in (0.3, 1.0, 1.5, 1.6, 2.5):
        c = CouplingTriple.impurity(kappa)
        assert (count_bound_states(c) >= 1) == (ground_state_energy(c) is not None)


def test_sign_flip(impurity_half):
    e1 = ground_state_energy(impurity_half, tol=1e-13).energy
    e2 = ground_state_energy(impurity_half.swapped(), tol=1e-13).energy
    assert abs(e1 - e2) < 1e-10


@pytest.mark.parametrize("lam", [0.5, 2.0])
def test_dilation(impurity_half, lam):
    e1 = ground_state_energy(impurity_half, tol=1e-13).energy
    e2 = ground_state_energy(impurity_half.scaled(lam), tol=1e-13).energy
    assert abs(e2 - lam ** 2 * e1) < 1e-6


def test_scaling_check_variants():
    a, b = scaling_check(1.0, lam=2.0)
    assert abs(a - b) < 1e-6
    a, b = scaling_check(1.2)
    assert abs(a - b) < 1e-6
    a, b = scaling_check(1.0, lam=1.0)
    assert a == b
    # a fixed grid is stretched along with the couplings
    a, b = scaling_check(0.8, grid=build_grid(400, 0.1), lam=2.0)
    assert abs(a - b) < 1e-9


def test_monotone_in_kappa():
    table = sweep_energy([0.2, 0.35, 0.5, 0.6, 0.7])
    energies = table.column("energy")
    assert all(b <= a + 1e-10 for a, b in zip(energies, energies[1:]))
    for r in table.records:
        assert r.energy < r.bottom_essential
        assert r.status == "ok"
        assert r.asymptote is None


def test_sweep_records_absence_and_asymptote():
    table = sweep_energy([0.1, 2.0], with_asymptote=True)
    assert [r.status for r in table.records] == ["ok", "none"]
    assert table.records[1].bottom_essential == bottom_essential(2.0, 0.0)
    assert table.records[0].asymptote == pytest.approx(-0.25 - 1.1945575809 * 1e-4)
    assert len(table.existing()) == 1
    with pytest.raises(ValueError):
        sweep_energy([0.3, 0.2])
    with pytest.raises(ValueError):
        sweep_energy([])


def test_sweep_parallel_order():
    kappas = [0.3, 0.4, 0.5]
    serial = sweep_energy(kappas)
    parallel = sweep_energy(kappas, workers=2)
    assert serial.column("kappa") == parallel.column("kappa") == kappas
    assert serial.column("energy") == parallel.column("energy")


def test_convergence_study(impurity_half):
    table = convergence_study(impurity_half, 0.0, (200, 400, 800), (0.5, 1.0, 2.0))
    energies = {(n, s): e for n, s, e in table.rows}
    assert abs(energies[(800, 1.0)] - energies[(400, 1.0)]) < 1e-6
    assert max(energies[(400, s)] for s in (0.5, 1, 2)) - min(energies[(400, s)] for s in (0.5, 1, 2)) < 1e-5
    assert abs(table.history[-1] - table.history[-2]) < 1e-7
    assert table.error < 1e-7
    with pytest.raises(ValueError):
        convergence_study(impurity_half, 0.0, (400, 200))


def test_critical_charge_coarse():
    res = critical_charge(0.0, tol=1e-2, grid=GridSpec(n=400))
    lo, hi = res.bracket
    assert hi - lo <= 1e-2
    assert lo <= res.kappa_c <= hi
    assert bound_state_exists(lo, grid=GridSpec(n=400))
    assert not bound_state_exists(hi, grid=GridSpec(n=400))
    assert 1.52 < res.kappa_c < 1.57
    assert res.margin == 1e-6


def test_critical_charge_bad_bracket():
    with pytest.raises(BracketError) as info:
        critical_charge(0.0, grid=GridSpec(n=200), bracket=(2.0, 4.0))
    assert info.value.bracket == (2.0, 4.0)


def test_weak_state_below_margin_is_invisible():
    c = CouplingTriple.impurity(0.02)
    assert ground_state_energy(c, margin=1e-4) is None
    res = ground_state_energy(c, margin=1e-8)
    assert res is not None and -0.25 - res.energy < 1e-4 * 0.25


def test_bad_arguments(impurity_half):
    with pytest.raises(ValueError):
        ground_state_energy(impurity_half, tol=0.0)
    with pytest.raises(ValueError):
        ground_state_energy(impurity_half, sigma=1.0)
    assert ground_state_energy(CouplingTriple(1.0, 1.0, 1.0)) is None


def test_second_state_near_threshold_crossing():
    # where the impurity-electron and exciton thresholds cross, a second state appears;
    # the finite-difference spectrum shows it too
    import scipy.sparse.linalg as sla

    from delta_spectra.oracle import BoxDiscretization, box_hamiltonian

    assert count_bound_states(CouplingTriple.impurity(0.7)) == 2
    assert count_bound_states(CouplingTriple.impurity(0.5)) == 1
    assert count_bound_states(CouplingTriple.impurity(0.9)) == 1
    H = box_hamiltonian(BoxDiscretization(20.0, 0.1, (-0.7, 0.7, -1.0), 0.0))
    v0 = np.random.default_rng(0).standard_normal(H.shape[0])
    vals = np.sort(sla.eigsh(H.tocsc(), k=3, sigma=-0.5, which="LM", v0=v0, return_eigenvectors=False))
    assert vals[1] < -0.255
    assert vals[2] > -0.25  # box continuum above the threshold
