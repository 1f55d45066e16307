import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from delta_spectra.asymptotics import (
    SIGMA_MAX,
    asymptotic_energy,
    beta,
    beta_limit0,
    exciton_threshold,
    fit_quartic,
)

mpmath = pytest.importorskip("mpmath")


def beta_mp(sigma, dps=50):
    """Independent high-precision evaluation of the closed form."""
    with mpmath.workdps(dps):
        s = mpmath.mpf(sigma)
        bracket = (6 * s * mpmath.sqrt(1 - s ** 2) - (2 - s) * s * mpmath.pi
                   - 8 * s ** 2 * mpmath.acos(mpmath.sqrt((1 + s) / 2))
                   + mpmath.atan(2 * s * (1 - s ** 2) / (1 - 2 * s ** 2)))
        return 4 * bracket ** 2 / ((1 + s) * (1 - s) ** 2 * mpmath.pi ** 2 * s ** 2)


def test_beta_limit0():
    assert beta_limit0() == pytest.approx(1.1945575809, rel=1e-10)
    with mpmath.workdps(30):
        assert beta_limit0() == pytest.approx(float(16 * (4 / mpmath.pi - 1) ** 2), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 0.7))
def test_beta_matches_high_precision(sigma):
    assert beta(sigma) == pytest.approx(float(beta_mp(sigma)), rel=1e-10)


def test_beta_limit_from_small_sigma():
    # the leading correction is linear in sigma, so Richardson on a 10x ladder removes it
    b = [beta(s) for s in (1e-2, 1e-3, 1e-4)]
    assert abs(b[-1] - beta_limit0()) / beta_limit0() < 1e-3
    limit = b[-1] + (b[-1] - b[-2]) / 9
    assert limit == pytest.approx(beta_limit0(), rel=1e-5)
    with mpmath.workdps(60):
        assert float(beta_mp(mpmath.mpf("1e-20"), 60)) == pytest.approx(beta_limit0(), rel=1e-12)


def test_beta_decreasing():
    values = [beta(s) for s in np.arange(0.05, 0.651, 0.05)]
    assert all(b < a for a, b in zip(values, values[1:]))
    assert beta(0.05) < beta_limit0()


@pytest.mark.parametrize("sigma", [0.0, -0.1, SIGMA_MAX, 0.9])
def test_beta_domain(sigma):
    with pytest.raises(ValueError):
        beta(sigma)


def test_asymptotic_energy():
    assert asymptotic_energy(0.2, 0.0) == pytest.approx(-0.2519112921, abs=1e-10)
    assert asymptotic_energy(0.1, 0.3) == pytest.approx(exciton_threshold(0.3) - beta(0.3) * 1e-4)
    with pytest.raises(ValueError):
        asymptotic_energy(-0.1, 0.0)
    with pytest.raises(ValueError):
        asymptotic_energy(0.1, 0.8)


def test_fit_recovers_exact_quartic():
    kappas = [0.05, 0.075, 0.1, 0.125, 0.15]
    samples = [(k, -0.25 - beta_limit0() * k ** 4) for k in kappas]
    fit = fit_quartic(samples)
    assert fit.coefficient == pytest.approx(beta_limit0(), rel=1e-12)
    assert fit.stderr < 1e-10
    assert fit.relative_error < 1e-12


def test_fit_with_noise_and_sigma():
    rng = np.random.default_rng(3)
    kappas = np.linspace(0.05, 0.15, 6)
    energy = exciton_threshold(0.3) - 0.5 * kappas ** 4 * (1 + 1e-3 * rng.standard_normal(6))
    fit = fit_quartic(zip(kappas, energy), sigma=0.3)
    assert fit.coefficient == pytest.approx(0.5, rel=5e-3)
    assert fit.stderr > 0


@pytest.mark.parametrize("samples", [
    [(0.1, -0.26), (0.12, -0.27)],
    [(0.1, -0.26)] * 3,
    [(0.1, -0.26), (0.12, -0.27), (0.3, -0.3)],
    [(-0.1, -0.26), (0.12, -0.27), (0.14, -0.3)],
])
def test_fit_rejects_bad_input(samples):
    with pytest.raises(ValueError):
        fit_quartic(samples)
