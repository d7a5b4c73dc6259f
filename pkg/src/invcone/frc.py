"""Period-1 forced responses from the extended invariant cone problem.

The forcing ``f cos(Omega t)`` and the gap are carried by the extra states
``(z_c, z_s, z_delta)`` so that the forced system is homogeneous in
``z = (x, z_c, z_s, z_delta)``. Unknowns ``X = (z0, phi0, t-, t+)`` at a
given ``Omega`` satisfy::

    [I 0] (expm(t+ A+) expm(t- A-) z0 - z0) = 0
    z0_c = cos(phi0),  z0_s = sin(phi0),  z0_delta = delta
    z0[0] = 0,  (expm(t- A-) z0)[0] = 0
    t- + t+ = 2 pi / Omega
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from . import continuation
from .backbone import stability_from_monodromy
from .cone import GRAZING_RATIO
from .errors import ConfigError, ConvergenceError, GrazingError
from .linalg import Spectrum, expm, expm_frechet
from .model import AugmentedForcedSystem, augment_forced
from .timeint import MINUS, integrate, max_abs_output, region_of

__all__ = [
    "FrcPoint",
    "FrcBranch",
    "forced_residual",
    "solve_forced_cone",
    "trace_frc",
    "seed_frc_from_linear",
    "linear_response",
    "forced_output_row",
    "find_frc_seed",
    "trace_frc_both_ways",
]

TWO_PI = 2 * math.pi


@dataclass(frozen=True, eq=False)
class FrcPoint:
    z0: np.ndarray
    phi0: float
    t_minus: float
    t_plus: float
    Omega: float
    stable: bool = None
    response_amplitude: float = None
    floquet: Spectrum = None
    multi_crossing: bool = False
    residual: float = None
    iterations: int = None

    @property
    def period(self):
        return self.t_minus + self.t_plus

    def unknowns(self):
        return np.concatenate([self.z0, [self.phi0, self.t_minus, self.t_plus, self.Omega]])


@dataclass
class FrcBranch:
    points: list
    excluded: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def Omegas(self):
        return np.array([p.Omega for p in self.points])

    @property
    def amplitudes(self):
        return np.array([p.response_amplitude for p in self.points])

    @property
    def stable(self):
        return np.array([p.stable for p in self.points])


def _require_damped(lure):
    if not lure.alpha > 0:
        raise ConfigError("forced responses need a positive damping multiplier", field="alpha")


def forced_output_row(lure, component=0):
    """Row giving physical ``q[component]`` from an extended state ``z``."""
    r5 = lure.physical_row(component)
    r = np.zeros(lure.n + 3)
    r[: lure.n] = r5[: lure.n]
    r[lure.n + 2] = r5[-1]
    return r


def forced_residual(u, lure, delta):
    """Residual ``(n+6)`` and Jacobian ``(n+6, n+7)`` in
    ``u = (z0, phi0, t-, t+, Omega)``."""
    n = lure.n
    z0 = u[: n + 3]
    phi, tm, tp, Om = u[n + 3], u[n + 4], u[n + 5], u[n + 6]
    if not Om > 0:
        raise ValueError("excitation frequency left the positive axis")
    ext = augment_forced(lure, lure.alpha, Om)
    Am, Ap = ext.Aext_minus, ext.Aext_plus
    D = AugmentedForcedSystem.omega_direction(n)
    Pm, Lm = expm_frechet(tm * Am, tm * D)
    Pp, Lp = expm_frechet(tp * Ap, tp * D)
    v1 = Pm @ z0
    v2 = Pp @ v1
    R = np.empty(n + 6)
    J = np.zeros((n + 6, n + 7))
    R[:n] = v2[:n] - z0[:n]
    R[n] = z0[n] - math.cos(phi)
    R[n + 1] = z0[n + 1] - math.sin(phi)
    R[n + 2] = z0[n + 2] - delta
    R[n + 3] = z0[0]
    R[n + 4] = v1[0]
    R[n + 5] = tm + tp - TWO_PI / Om
    J[:n, : n + 3] = (Pp @ Pm)[:n]
    J[:n, :n] -= np.eye(n)
    J[:n, n + 4] = (Pp @ (Am @ v1))[:n]
    J[:n, n + 5] = (Ap @ v2)[:n]
    J[:n, n + 6] = (Lp @ v1 + Pp @ (Lm @ z0))[:n]
    J[n, n] = 1.0
    J[n, n + 3] = math.sin(phi)
    J[n + 1, n + 1] = 1.0
    J[n + 1, n + 3] = -math.cos(phi)
    J[n + 2, n + 2] = 1.0
    J[n + 3, 0] = 1.0
    J[n + 4, : n + 3] = Pm[0]
    J[n + 4, n + 4] = (Am @ v1)[0]
    J[n + 4, n + 6] = (Lm @ z0)[0]
    J[n + 5, n + 4] = 1.0
    J[n + 5, n + 5] = 1.0
    J[n + 5, n + 6] = TWO_PI / Om**2
    return R, J


def _single_crossing(z0, tm, T, Am, Ap):
    # exactly one interior switch (minus -> plus at t-) before closing at T
    if region_of(z0, Am, np.eye(z0.size)[0]) != MINUS:
        return False
    tr = integrate(z0, Am, Ap, T)
    inner = [c for c in tr.crossings if c[0] < T * (1 - 1e-7)]
    return len(inner) == 1 and abs(inner[0][0] - tm) <= 1e-7 * T


def _finalize(u, lure, delta, residual=None, iterations=None):
    n = lure.n
    z0 = u[: n + 3].copy()
    phi, tm, tp, Om = (float(v) for v in u[n + 3:])
    if tm <= 0 or tp <= 0:
        raise ConvergenceError(f"non-positive return time (t-={tm:.3g}, t+={tp:.3g})", iterations, residual)
    T = tm + tp
    if tp < GRAZING_RATIO * T:
        raise GrazingError(f"forced orbit grazes the contact plane (t+/T={tp / T:.3g})")
    if residual is None:
        residual = float(np.linalg.norm(forced_residual(u, lure, delta)[0], np.inf))
    phi = phi % TWO_PI
    ext = augment_forced(lure, lure.alpha, Om)
    Am, Ap = ext.Aext_minus, ext.Aext_plus
    Pm = expm(tm * Am)
    Phi = expm(tp * Ap) @ Pm
    stable, spectrum, _ = stability_from_monodromy(Phi, 0, 3)
    amp = max_abs_output(forced_output_row(lure, 0), [(Am, z0, tm), (Ap, Pm @ z0, tp)])
    multi = not _single_crossing(z0, tm, T, Am, Ap)
    return FrcPoint(z0, phi, tm, tp, Om, stable=stable, response_amplitude=amp, floquet=spectrum,
                    multi_crossing=multi, residual=residual, iterations=iterations)


def solve_forced_cone(guess, lure, delta=None, tol=1e-10, maxiter=50):
    """Converge a forced period-1 orbit at the fixed ``guess.Omega``."""
    _require_damped(lure)
    delta = lure.delta if delta is None else delta
    u = guess.unknowns().copy()
    n = lure.n
    u[n] = math.cos(guess.phi0)
    u[n + 1] = math.sin(guess.phi0)
    u[n + 2] = delta
    Om = u[-1]

    def sq(v):
        R, J = forced_residual(np.append(v, Om), lure, delta)
        return R, J[:, :-1]

    v, it = continuation.newton(sq, u[:-1], tol=tol, maxiter=maxiter)
    u = np.append(v, Om)
    R, _ = forced_residual(u, lure, delta)
    return _finalize(u, lure, delta, residual=float(np.linalg.norm(R, np.inf)), iterations=it)


def linear_response(sys, Omega, alpha=None):
    """Complex amplitude ``Q`` of the contact-free steady state
    ``q(t) = Re(Q exp(i Omega t))``."""
    alpha = sys.alpha if alpha is None else alpha
    C = sys.C if sys.C is not None else np.zeros_like(sys.K)
    H = sys.K - Omega**2 * sys.M + 1j * Omega * alpha * C
    return np.linalg.solve(H, sys.f.astype(complex))


def _seed_at(sys, lure, Omega, theta, delta):
    # start where the linear gap leaves zero downwards; theta is half the
    # angle spent with a positive gap
    Q = linear_response(sys, Omega)
    p = sys.w @ Q
    psi = np.angle(p)
    t0 = (theta - psi) / Omega
    q = np.real(Q * np.exp(1j * Omega * t0))
    qd = np.real(1j * Omega * Q * np.exp(1j * Omega * t0))
    x0 = lure.from_physical(q, qd, delta)
    x0[0] = 0.0
    phi0 = (Omega * t0) % TWO_PI
    z0 = np.concatenate([x0, [math.cos(phi0), math.sin(phi0), delta]])
    T = TWO_PI / Omega
    tp = 2 * theta / Omega
    return FrcPoint(z0, phi0, T - tp, tp, Omega)


def seed_frc_from_linear(sys, lure, Omega_start, Omega_stop=None, plus_fraction=1e-3, n_scan=2000):
    """Guess on the forced branch just past the first contact of the linear
    steady state, scanning upwards from ``Omega_start`` (by default up to
    1.5 times the highest linear frequency).

    For ``delta = 0`` every response crosses, and the guess is built at
    ``Omega_start`` with half the period spent in contact. Raises
    :class:`ConvergenceError` when the scan finds no contact.
    """
    delta = sys.delta
    if sys.f is None or not np.any(sys.f):
        raise ConfigError("forcing amplitude is zero", field="f")
    if delta == 0:
        return _seed_at(sys, lure, Omega_start, math.pi / 2, delta)
    theta = math.pi * plus_fraction
    target = delta / math.cos(theta)
    if Omega_stop is None:
        Omega_stop = 1.5 * sys.linear_modes()[0].max()
    if Omega_stop <= Omega_start:
        raise ValueError("empty frequency scan")
    h = lambda Om: abs(sys.w @ linear_response(sys, Om)) - target
    grid = np.linspace(Omega_start, Omega_stop, n_scan + 1)
    if h(grid[0]) >= 0:
        raise ConvergenceError(f"linear response already in contact at Omega={Omega_start:g}")
    prev = grid[0]
    for Om in grid[1:]:
        if h(Om) >= 0:
            Og = brentq(h, prev, Om, xtol=1e-14)
            return _seed_at(sys, lure, Og, theta, delta)
        prev = Om
    raise ConvergenceError(
        f"linear response stays clear of the contact on [{Omega_start:g}, {Omega_stop:g}]"
    )


def trace_frc(seed, lure, Omega_range, control=None, delta=None, direction=1):
    """Pseudo-arclength continuation of a forced branch in ``Omega``.

    Tracing starts at ``seed`` (converged first if needed) with ``Omega``
    increasing (``direction=1``) or decreasing and stops when the branch
    leaves ``Omega_range`` or grazes. Points whose orbit switches more than
    twice per period are moved to ``excluded``.
    """
    delta = lure.delta if delta is None else delta
    lo, hi = Omega_range
    first = solve_forced_cone(seed, lure, delta)
    n = lure.n
    if control is None:
        control = continuation.StepControl(initial=1e-3, maximum=0.05, max_param_step=(hi - lo) / 200)
    fun = lambda u: forced_residual(u, lure, delta)

    def accept(u, J):
        tm, tp, Om = u[n + 4], u[n + 5], u[n + 6]
        if tm <= 0 or tp <= 0:
            return "reject: negative return time"
        if tp < GRAZING_RATIO * (tm + tp):
            return "grazing"
        if not lo <= Om <= hi:
            return "range"
        return None

    d = np.zeros(n + 7)
    d[-1] = float(np.sign(direction))
    raw, info = continuation.follow(fun, first.unknowns(), control, accept=accept, direction=d)
    pts, excluded = [], []
    for k, u in enumerate(raw):
        try:
            p = first if k == 0 else _finalize(np.asarray(u), lure, delta)
        except GrazingError:
            info["reason"] = "grazing"
            continue
        if not lo <= p.Omega <= hi:
            continue
        (excluded if p.multi_crossing else pts).append(p)
    return FrcBranch(pts, excluded, info)


def find_frc_seed(sys, lure, Omega_range, n_tries=50):
    """Converged single-crossing start point inside ``Omega_range``.

    With a gap this is the point just past the first contact of the linear
    response. Without a gap the linear guess is tried from the low end of
    the range upwards until it converges to a single-crossing orbit.
    """
    lo, hi = Omega_range
    if sys.delta > 0:
        return solve_forced_cone(seed_frc_from_linear(sys, lure, lo, Omega_stop=hi), lure)
    last = None
    for Om in np.linspace(lo, hi, n_tries + 1):
        try:
            p = solve_forced_cone(_seed_at(sys, lure, Om, math.pi / 2, 0.0), lure)
        except (ConvergenceError, GrazingError, ValueError) as exc:
            last = exc
            continue
        if not p.multi_crossing:
            return p
    raise ConvergenceError(f"no single-crossing start point found on [{lo:g}, {hi:g}] ({last})")


def trace_frc_both_ways(seed, lure, Omega_range, control=None, delta=None):
    """Trace from ``seed`` towards both ends of ``Omega_range`` and join the
    two halves into one branch ordered along the arclength."""
    down = trace_frc(seed, lure, Omega_range, control=control, delta=delta, direction=-1)
    up = trace_frc(seed, lure, Omega_range, control=control, delta=delta, direction=1)
    pts = down.points[::-1] + (up.points[1:] if up.points and down.points else up.points)
    info = {
        "reason": {"low": down.info["reason"], "high": up.info["reason"]},
        "corrector_iterations": down.info["corrector_iterations"][::-1] + up.info["corrector_iterations"],
    }
    return FrcBranch(pts, down.excluded[::-1] + up.excluded, info)
