import math

import numpy as np
import pytest

from invcone import jiang_system
from invcone import shooting as sh
from invcone.frc import linear_response
from invcone.linalg import expm
from invcone.timeint import integrate


def test_linear_mode_needs_at_most_two_iterations(jiang):
    psys = sh.physical_system(jiang)
    for mode in (1, 2):
        z, T = sh.linear_mode_state(jiang, mode, 0.3)
        st = sh.shoot(sh.ShootingState(z * (1 + 1e-6), T * (1 + 1e-6)), psys)
        assert st.iterations <= 2
        assert st.omega == pytest.approx(jiang.linear_modes()[0][mode - 1], rel=1e-9)


def test_monodromy_is_product_of_exponentials(shooting_branches):
    psys, br = shooting_branches
    st = br[1][1][-1]
    y0 = psys.extend(st.zp0)
    tr = integrate(y0, psys.A_minus, psys.A_plus, st.T, switch=psys.switch)
    assert len(tr.crossings) == 2
    (t1, d1), (t2, _) = tr.crossings
    A1, A2 = (psys.A_plus, psys.A_minus) if d1 == -1 else (psys.A_minus, psys.A_plus)
    P = expm((st.T - t2) * A1) @ expm((t2 - t1) * A2) @ expm(t1 * A1)
    m = psys.n_phys
    assert np.allclose(st.monodromy, P[:m, :m], atol=1e-9 * np.abs(P).max())


def test_conservative_orbit_has_unit_multipliers(shooting_branches):
    _, br = shooting_branches
    for _, states, _ in br.values():
        for st in states[::20]:
            lam = np.linalg.eigvals(st.monodromy)
            assert np.min(np.abs(lam - 1.0)) <= 1e-6
            # area preservation
            assert abs(np.prod(lam)) == pytest.approx(1.0, abs=1e-8)


def test_phase_anchor_removes_time_shift(jiang):
    psys = sh.physical_system(jiang)
    z, T = sh.linear_mode_state(jiang, 1, 0.3)
    # slide the guess along the orbit and perturb it; the anchored solve stays put
    y = integrate(psys.extend(z), psys.A_minus, psys.A_plus, 0.2 * T, switch=psys.switch).final
    st = sh.shoot(sh.ShootingState(y[:4] + 1e-4, T), psys)
    assert np.linalg.norm(st.zp0 - y[:4]) <= 1e-3
    assert st.residual <= 1e-10
    # without the anchor (and no energy row) the Newton system is underdetermined
    with pytest.raises(ValueError):
        sh.shoot(sh.ShootingState(y[:4] + 1e-4, T), psys, anchor=False)


def test_tangents_are_unit_and_continuous(shooting_branches):
    psys, br = shooting_branches
    for _, states, info in br.values():
        P = np.array([t.as_vector() for t in info["tangents"]])
        assert np.allclose(np.linalg.norm(P, axis=1), 1.0)
        assert np.all(np.sum(P[1:] * P[:-1], axis=1) > 0)
        for st, t in list(zip(states, info["tangents"]))[::40]:
            _, J, _ = sh._bordered(psys, st.zp0, st.T)
            assert np.linalg.norm(J @ t.as_vector()) <= 1e-6


def test_energy_increases_along_branch(shooting_branches):
    _, br = shooting_branches
    for start, states, info in br.values():
        E = np.array([s.energy for s in states])
        assert np.all(np.diff(E) > 0)
        assert info["reason"] == "stop"


def test_corrector_iterations_first_mode(shooting_branches):
    _, br = shooting_branches
    it = np.array(br[1][2]["corrector_iterations"])
    assert np.mean((it >= 2) & (it <= 10)) >= 0.9


def test_energy_constrained_solve(shooting_branches, backbones):
    psys, br = shooting_branches
    _, states, _ = br[1]
    p = backbones[1].points[150]
    k = int(np.argmin([abs(math.log(s.energy / p.energy_a)) for s in states]))
    st = sh.shoot(states[k], psys, energy=p.energy_a)
    assert st.energy == pytest.approx(p.energy_a, rel=1e-10)
    assert st.omega == pytest.approx(p.omega, abs=1e-9)


def test_forced_shooting_below_contact():
    s = jiang_system(f_amp=0.01, damping=0.005)
    Om = 0.4
    Q = linear_response(s, Om)
    z, info = sh.shoot_nonautonomous(np.zeros(4), Om, s)
    assert np.allclose(z[:2], Q.real, atol=1e-10)
    assert np.allclose(z[2:], (1j * Om * Q).real, atol=1e-10)
    assert info["iterations"] <= 2
    assert info["response_amplitude"] == pytest.approx(abs(Q[0]), rel=1e-8)
    assert not info["trajectory"].crossings


def test_physical_system_layout(jiang):
    ps = sh.physical_system(jiang)
    assert ps.dimension == 5
    y = np.array([-2.0, 0.0, 0.0, 0.0, 1.0])
    assert ps.switch @ y == pytest.approx(1.0)
    # continuity across the contact plane
    y0 = np.array([-1.0, 0.3, 0.2, 0.1, 1.0])
    assert np.allclose(ps.A_minus @ y0, ps.A_plus @ y0)
    with pytest.raises(ValueError):
        sh.physical_forced_system(jiang, -1.0)
    with pytest.raises(ValueError):
        sh.shoot(sh.ShootingState(np.zeros(4), -1.0), ps)
