import math

import numpy as np
import pytest
from scipy.integrate import quad

from delta_spectra.grid import build_grid, discretize_integral, discretize_multiplication
from delta_spectra.kernels import t1_hat, t2_hat, t3_hat


def test_grid_invariants():
    g = build_grid(64, 1.5)
    assert np.all(np.diff(g.nodes) > 0)
    assert np.array_equal(g.nodes, -g.nodes[::-1])
    assert np.array_equal(g.weights, g.weights[::-1])
    assert np.all(g.weights > 0)
    with pytest.raises(ValueError):
        g.nodes[0] = 1.0


@pytest.mark.parametrize("n, scale", [(15, 1.0), (17, 1.0), (8, 1.0), (64, 0.0), (64, -1.0)])
def test_invalid_grids(n, scale):
    with pytest.raises(ValueError):
        build_grid(n, scale)


def test_calibration_integrals():
    assert build_grid(200, 1).integrate(lambda s: 1 / (s * s + 1)) == pytest.approx(math.pi, abs=1e-10)
    assert build_grid(200, 1).integrate(lambda s: np.exp(-s * s)) == pytest.approx(math.sqrt(math.pi), abs=1e-8)
    assert build_grid(400, 1).integrate(lambda s: 1 / (s * s + 2) ** 2) == pytest.approx(
        math.pi / (4 * math.sqrt(2)), abs=1e-10)


def test_rescaled_grid():
    g = build_grid(32, 1.0).rescaled(3.0)
    assert g.scale == 3.0
    assert np.allclose(g.nodes, 3.0 * build_grid(32, 1.0).nodes)


def test_multiplication():
    g = build_grid(32)
    assert np.array_equal(discretize_multiplication(lambda s: np.ones_like(s), g), np.eye(32))
    D = discretize_multiplication(lambda s: t3_hat(s, -0.5, 0.0), g)
    assert np.allclose(np.diag(D), 1 / np.sqrt(g.nodes ** 2 + 2), rtol=1e-15)
    assert np.allclose(np.sort(np.linalg.eigvalsh(D)), np.sort(np.diag(D)))


def test_integral_zero_and_symmetry():
    g = build_grid(64)
    assert not discretize_integral(lambda s, t: 0.0 * s * t, g).any()
    M = discretize_integral(lambda s, t: t1_hat(s, t, -0.5, 0.3), g)
    assert np.array_equal(M, M.T)


def test_adjoint_consistency():
    g = build_grid(64, 0.7)
    forward = discretize_integral(lambda s, t: t2_hat(s, t, -0.4, 0.35), g)
    swapped = discretize_integral(lambda s, t: t2_hat(t, s, -0.4, 0.35), g)
    assert np.allclose(forward.T, swapped, rtol=1e-15, atol=0)


def test_largest_eigenvalue_cauchy():
    top = [np.linalg.eigvalsh(discretize_integral(lambda s, t: t1_hat(s, t, -0.5, 0.0), build_grid(n)))[-1]
           for n in (400, 800)]
    assert abs(top[1] - top[0]) < 1e-8


def test_row_sum_identity():
    # with the weights undone the row sum is the plain quadrature of the kernel row
    g = build_grid(400)
    M = discretize_integral(lambda s, t: t1_hat(s, t, -0.5, 0.0), g)
    r = g.sqrt_weights
    rows = (M * r[None, :]).sum(axis=1) / r
    # the outermost tangent-map nodes sit far out (|s| ~ 1e4) where rows are under-resolved
    for i in np.flatnonzero(np.abs(g.nodes) <= 10)[::15]:
        s = g.nodes[i]
        direct = quad(lambda t: t1_hat(s, t, -0.5, 0.0), -np.inf, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
        assert rows[i] == pytest.approx(direct, abs=1e-8)
