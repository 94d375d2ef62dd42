import mpmath
import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from wedgeshock.errors import DomainError
from wedgeshock.gas import GasModel


@pytest.fixture
def air():
    return GasModel(1.4)


def test_stagnation_density_is_one(air):
    assert air.density(0.0) == 1.0


def test_density_vanishes_at_q_max(air):
    assert air.q_max_sq == pytest.approx(5.0)
    assert air.density(air.q_max_sq) == pytest.approx(0.0, abs=1e-300)


def test_density_matches_high_precision_power(air):
    # independent oracle: mpmath evaluation of (1 - 0.2*0.5)^2.5
    expected = float(mpmath.power(mpmath.mpf(1) - mpmath.mpf("0.1"), mpmath.mpf("2.5")))
    assert air.density(0.5) == pytest.approx(expected, rel=1e-15)


def test_cavitation_raises(air):
    with pytest.raises(DomainError):
        air.density(5.0001)


def test_sound_speed_at_rest(air):
    assert air.sound_speed_sq(0.0) == 1.0


def test_sonic_speed_solves_q_equals_c(air):
    # q = c(q^2) has the closed-form solution q^2 = 2/(gamma+1)
    q_cr = np.sqrt(2.0 / 2.4)
    assert air.q_cr == pytest.approx(q_cr, rel=1e-15)
    assert air.mach(np.array([q_cr, 0.0])) == pytest.approx(1.0, rel=1e-14)


def test_mach_above_sonic(air):
    assert air.mach(np.array([1.3, 0.0])) > 1.0
    assert 1.3 > air.q_cr


def test_density_strictly_decreasing(air):
    q_sq = np.linspace(0.0, air.q_max_sq, 200)
    rho = air.density(q_sq)
    assert np.all(np.diff(rho) < 0)
    # finite-difference slope check in the interior
    h = 1e-7
    for s in (0.1, 0.7, 2.3, 4.0):
        fd = (air.density(s + h) - air.density(s - h)) / (2 * h)
        assert fd < 0
        assert fd == pytest.approx(air.density_dq_sq(s), rel=1e-6)


@pytest.mark.parametrize("gamma", [1.2, 1.4, 5.0 / 3.0])
def test_mass_flux_peaks_at_q_cr(gamma):
    gas = GasModel(gamma)
    res = minimize_scalar(
        lambda q: -gas.mass_flux(q),
        bounds=(1e-6, gas.q_max - 1e-6),
        method="bounded",
        options={"xatol": 1e-12},
    )
    assert res.x == pytest.approx(gas.q_cr, abs=1e-8)


def test_coefficient_matrix_at_rest_is_identity(air):
    assert np.allclose(air.coefficient_matrix(np.zeros(3)), np.eye(3))


def test_coefficient_matrix_axis_aligned_eigenvalues(air):
    q = 0.8  # subsonic
    a = air.coefficient_matrix(np.array([q, 0.0, 0.0]))
    c_sq = air.sound_speed_sq(q * q)
    eig = np.sort(np.linalg.eigvalsh(a))
    assert eig[0] == pytest.approx(c_sq - q * q, rel=1e-12)
    assert np.all(eig > 0)
    assert eig[-1] == pytest.approx(c_sq, rel=1e-12)


def test_coefficient_matrix_loses_definiteness_past_sonic(air):
    q = air.q_cr + 1e-3
    a = air.coefficient_matrix(np.array([q, 0.0]))
    assert np.min(np.linalg.eigvalsh(a)) < 0


def test_definiteness_iff_subsonic_random(air):
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = rng.integers(2, 5)
        v = rng.normal(size=n)
        v *= rng.uniform(0.05, 0.999 * air.q_max) / np.linalg.norm(v)
        a = air.coefficient_matrix(v)
        assert np.allclose(a, a.T)
        min_eig = np.min(np.linalg.eigvalsh(a))
        if np.linalg.norm(v) < air.q_cr:
            assert min_eig > 0
        else:
            assert min_eig < 0
