import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invcone import jiang_system, to_lure
from invcone.cone import (ConeSolution, Side, attractivity, classify_side, first_return_time,
                          poincare_jacobian, poincare_map, solve_classic_cone)
from invcone.errors import NoReturnError

HOM = to_lure(jiang_system(delta=0.0))


def plane_point(r):
    x = np.concatenate([[0.0], r])
    # pick the sign so that the flow enters the minus region
    if classify_side(x, HOM.A_minus) is not Side.MINUS:
        x = -x
    return x


def test_classify_side():
    assert classify_side(np.array([0.0, 0.0, -1.0, 0.0]), HOM.A_minus) is Side.MINUS
    assert classify_side(np.array([0.0, 0.0, 1.0, 0.0]), HOM.A_minus) is Side.PLUS
    with pytest.raises(ValueError):
        first_return_time(np.zeros(4), HOM.A_minus)


def test_no_return_without_oscillation():
    with pytest.raises(NoReturnError):
        first_return_time(np.array([0.0, -1.0]), np.array([[-1.0, 1.0], [0.0, -1.0]]))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.2),
       st.floats(0.01, 100))
def test_return_map_is_positively_homogeneous(r, beta):
    x = plane_point(np.array(r))
    chi, tm, tp = poincare_map(x, HOM.A_minus, HOM.A_plus)
    chi_b, tm_b, tp_b = poincare_map(beta * x, HOM.A_minus, HOM.A_plus)
    assert tm_b == pytest.approx(tm, rel=1e-10)
    assert tp_b == pytest.approx(tp, rel=1e-10)
    assert np.allclose(chi_b, beta * chi, rtol=0, atol=1e-10 * beta * np.linalg.norm(chi))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.2))
def test_euler_identity(r):
    x = plane_point(np.array(r))
    chi, tm, tp = poincare_map(x, HOM.A_minus, HOM.A_plus)
    J = poincare_jacobian(x, tm, tp, HOM.A_minus, HOM.A_plus)
    assert np.allclose(J @ x, chi, rtol=0, atol=1e-8 * max(1.0, np.linalg.norm(chi)))


def test_jacobian_finite_difference():
    x = plane_point(np.array([0.3, -0.8, 0.2]))
    chi, tm, tp = poincare_map(x, HOM.A_minus, HOM.A_plus)
    J = poincare_jacobian(x, tm, tp, HOM.A_minus, HOM.A_plus)
    h = 1e-6
    for k in range(1, 4):
        e = np.eye(4)[k]
        fd = (poincare_map(x + h * e, HOM.A_minus, HOM.A_plus)[0]
              - poincare_map(x - h * e, HOM.A_minus, HOM.A_plus)[0]) / (2 * h)
        assert np.allclose(J[:, k], fd, atol=1e-6)


def test_classic_cone_of_bilinear_oscillator():
    # damped homogeneous system; start from the contact-free mode 1 half orbit
    L = to_lure(jiang_system(delta=0.0, damping=0.005))
    om = jiang_system().linear_modes()[0][0]
    guess = ConeSolution(xi=np.array([0.0, 1.0, -1.0, -0.5]), t_minus=np.pi / om, t_plus=2.0, mu=1.0)
    sol = solve_classic_cone(L.A_minus, L.A_plus, guess)
    chi, tm, tp = poincare_map(sol.xi, L.A_minus, L.A_plus)
    assert np.allclose(chi, sol.mu * sol.xi, atol=1e-9)
    assert (tm, tp) == pytest.approx((sol.t_minus, sol.t_plus), rel=1e-9)
    assert 0 < sol.mu < 1
    assert np.linalg.norm(sol.xi) == pytest.approx(1.0)
    ok, spectrum = attractivity(sol, L.A_minus, L.A_plus)
    assert len(spectrum) == 2
    assert ok == bool(np.all(spectrum.moduli < min(1.0, sol.mu)))
    with pytest.raises(ValueError):
        solve_classic_cone(L.A_minus, L.A_plus, ConeSolution(guess.xi, -1.0, 1.0, 1.0))
