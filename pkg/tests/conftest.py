import numpy as np
import pytest

from invcone import jiang_system, to_lure
from invcone import backbone as bb
from invcone import frc as fr

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def jiang():
    return jiang_system()


@pytest.fixture(scope="session")
def jiang_lure(jiang):
    return to_lure(jiang)


@pytest.fixture(scope="session")
def backbones(jiang, jiang_lure):
    """Refined backbones of both modes over four decades above crossing."""
    out = {}
    for mode in (1, 2):
        seed, e_cross, om = bb.seed_from_lnm(mode, jiang_lure, jiang)
        out[mode] = bb.trace_backbone(seed, jiang_lure, jiang, mode_index=mode, linear_frequency=om,
                                      crossing_energy=e_cross)
    return out


@pytest.fixture(scope="session")
def forced():
    s = jiang_system(f_amp=0.05, damping=0.005)
    return s, to_lure(s)


@pytest.fixture(scope="session")
def forced_branch(forced):
    s, lure = forced
    # seeded just past first contact, the branch runs over the peak down to grazing
    seed = fr.find_frc_seed(s, lure, (0.3, 1.2))
    return fr.trace_frc(seed, lure, (0.3, 1.2))


@pytest.fixture(scope="session")
def homogeneous():
    s = jiang_system(delta=0.0, f_amp=0.05, damping=0.005)
    return s, to_lure(s)


@pytest.fixture(scope="session")
def homogeneous_branch(homogeneous):
    s, lure = homogeneous
    # start between the peaks, where the period-1 orbit switches only twice
    seed = fr.find_frc_seed(s, lure, (0.9, 1.0))
    return fr.trace_frc_both_ways(seed, lure, (0.6, 2.3))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def shooting_branches(jiang, backbones):
    """Shooting continuation of both modes from half the grazing amplitude
    up to the top energy of the matching cone backbone."""
    from invcone import shooting as sh

    psys = sh.physical_system(jiang)
    omegas, phis = jiang.linear_modes()
    out = {}
    for mode in (1, 2):
        phi = phis[:, mode - 1]
        z, T = sh.linear_mode_state(jiang, mode, 0.5 * jiang.delta / abs(jiang.w @ phi))
        start = sh.shoot(sh.ShootingState(z, T), psys)
        e_max = backbones[mode].points[-1].energy_a
        states, info = sh.continue_branch(start, psys, lambda s: s.energy > e_max)
        out[mode] = (start, states, info)
    return psys, out
