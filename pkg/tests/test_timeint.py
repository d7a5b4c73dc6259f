import math

import numpy as np
import pytest

from invcone import MechanicalSystem, to_lure
from invcone.errors import NotSettledError
from invcone.linalg import expm
from invcone.model import augment_autonomous
from invcone.timeint import integrate, next_crossing, oscillation_periods, propagate, region_of, steady_state_amplitude


def one_dof(kn=3.0, delta=0.0):
    s = MechanicalSystem(M=[[1.0]], K=[[1.0]], w=[1.0], kn=kn, delta=delta)
    L = to_lure(s)
    aug = augment_autonomous(L, 0.0)
    return s, L, aug


def test_oscillation_periods():
    A = np.array([[0.0, 1.0], [-4.0, 0.0]])
    assert oscillation_periods(A) == pytest.approx((math.pi, math.pi))
    assert oscillation_periods(np.diag([-1.0, -2.0])) == (None, None)


def test_region_of_uses_higher_derivatives():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    s = np.array([1.0, 0.0])
    assert region_of(np.array([-1.0, 0.0]), A, s) == -1
    assert region_of(np.array([0.0, 1.0]), A, s) == 1
    # on the plane at rest the second derivative -x decides, and here it is zero
    assert region_of(np.zeros(2), A, s) == 0


def test_identical_regions_reduce_to_expm(rng):
    A = rng.standard_normal((4, 4)) * 0.3
    x = rng.standard_normal(4)
    tr = integrate(x, A, A, 7.0)
    assert np.allclose(tr.final, expm(7.0 * A) @ x, atol=1e-12)


def test_one_dof_half_periods():
    _, L, aug = one_dof(kn=3.0)
    y0 = np.array([-1.0, 0.0, 0.0])
    tr = integrate(y0, aug.At_minus, aug.At_plus, 30.0)
    t = np.array([c[0] for c in tr.crossings])
    d = np.array([c[1] for c in tr.crossings])
    gaps = np.diff(t)
    # plus region: stiffness 1 + 3 -> half period pi / 2
    assert np.allclose(gaps[d[:-1] == 1], math.pi / 2, atol=1e-10)
    assert np.allclose(gaps[d[:-1] == -1], math.pi, atol=1e-10)
    assert np.all(d[1:] == -d[:-1])


def test_short_excursion_is_detected():
    # the orbit enters contact for ~3e-3 time units, far below the sample step
    _, L, aug = one_dof(kn=3.0, delta=1.0)
    x = L.from_physical(np.array([0.0]), np.array([1.0 + 1e-6]), 1.0)
    y0 = np.concatenate([x, [1.0]])
    tr = integrate(y0, aug.At_minus, aug.At_plus, 4.0)
    assert len(tr.crossings) == 2
    (t1, d1), (t2, d2) = tr.crossings
    assert (d1, d2) == (1, -1)
    assert 0 < t2 - t1 < 0.01
    assert (t1 + t2) / 2 == pytest.approx(math.pi / 2, abs=1e-4)


def test_energy_conserved_over_many_crossings(jiang_lure):
    L = jiang_lure
    aug = augment_autonomous(L, 0.0)
    x = L.from_physical(np.array([-2.0, 0.5]), np.array([0.0, 0.3]))
    y0 = np.concatenate([x, [L.delta]])
    tr = integrate(y0, aug.At_minus, aug.At_plus, 700.0)
    assert len(tr.crossings) >= 100
    E = np.array([L.energy(c[:4], c[4]) for c in tr.crossing_states[:100]])
    E0 = E[0]
    assert np.max(np.abs(E - E0)) / E0 <= 1e-9
    assert np.all(np.abs([c[0] for c in tr.crossing_states]) < 1e-10)


def test_time_reversal(jiang_lure):
    L = jiang_lure
    aug = augment_autonomous(L, 0.0)
    x = L.from_physical(np.array([-2.0, 0.5]), np.array([0.0, 0.3]))
    y0 = np.concatenate([x, [L.delta]])
    flip = np.diag([1.0, 1.0, -1.0, -1.0, 1.0])
    y1 = integrate(y0, aug.At_minus, aug.At_plus, 40.0).final
    back = flip @ integrate(flip @ y1, aug.At_minus, aug.At_plus, 40.0).final
    assert np.allclose(back, y0, atol=1e-9)


def test_transition_matrix_fd(jiang_lure):
    aug = augment_autonomous(jiang_lure, 0.0)
    y0 = np.array([-0.5, 0.2, 0.3, -0.4, 1.0])
    yT, Phi, _ = propagate(y0, aug.At_minus, aug.At_plus, 9.0)
    h = 1e-7
    for k in range(4):
        e = np.eye(5)[k]
        fd = (propagate(y0 + h * e, aug.At_minus, aug.At_plus, 9.0)[0]
              - propagate(y0 - h * e, aug.At_minus, aug.At_plus, 9.0)[0]) / (2 * h)
        # a fixed-time map of a continuous field is differentiable across crossings
        assert np.allclose(Phi[:, k], fd, atol=1e-6)


def test_dense_samples_include_events():
    _, L, aug = one_dof()
    tr = integrate(np.array([-1.0, 0.0, 0.0]), aug.At_minus, aug.At_plus, 10.0, sample_dt=0.1)
    assert tr.times[0] == 0 and tr.times[-1] == 10.0
    assert np.all(np.diff(tr.times) > 0)
    for t, _ in tr.crossings:
        assert np.min(np.abs(tr.times - t)) == 0


def test_next_crossing_none_within_horizon():
    A = np.array([[0.0, 1.0], [-1.0, 0.0]])
    t, _ = next_crossing(np.array([-1.0, 0.0]), A, np.array([1.0, 0.0]), -1, 1.0)
    assert t is None


def test_steady_state_linear_oscillator():
    # damped forced oscillator that never reaches the contact
    k, c, Om = 1.0, 0.1, 0.8
    A = np.array([[0.0, 1.0, 0.0, 0.0], [-k, -c, 1.0, 0.0], [0.0, 0.0, 0.0, -Om], [0.0, 0.0, Om, 0.0]])
    A = np.pad(A, ((0, 1), (0, 1)))
    s = np.array([1.0, 0, 0, 0, -1.0])
    y0 = np.array([0.0, 0.0, 1.0, 0.0, 100.0])
    amp = steady_state_amplitude(y0, A, A, Om, np.eye(5)[0], state_dim=2, switch=s, n_transient_periods=60)
    assert amp == pytest.approx(1 / abs(k - Om**2 + 1j * c * Om), rel=1e-6)
    with pytest.raises(NotSettledError):
        steady_state_amplitude(y0, A, A, Om, np.eye(5)[0], state_dim=2, switch=s,
                               n_transient_periods=5, drift_tol=1e-14, max_periods=6)
