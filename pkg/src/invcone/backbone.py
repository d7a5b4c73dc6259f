"""Backbone curves of the conservative system with a clearance gap.

A point on the crossing part of a backbone solves, for the unknowns
``(x0, t-, t+, alpha)`` at a given energy ``a``::

    [I 0] expm(t+ At+) expm(t- At-) (x0, delta) - x0 = 0
    x0[0] = 0
    (expm(t- At-) (x0, delta))[0] = 0
    E(x0, delta) - a = 0

where ``At`` are the gap-augmented matrices. The damping multiplier
``alpha`` regularises the system (a free periodic orbit of the damped
system can only exist for ``alpha = 0``). The energy is continued on a
log10 scale.
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from . import continuation
from .cone import GRAZING_RATIO, ConeSolution, Side, first_return_time, solve_classic_cone
from .errors import ConvergenceError, GrazingError
from .linalg import Spectrum, eig, expm, expm_frechet
from .model import augment_autonomous
from .timeint import integrate, max_abs_output

__all__ = [
    "BackbonePoint",
    "BackboneBranch",
    "ScaledOrbit",
    "solve_mic",
    "solve_mic_at_frequency",
    "seed_from_lnm",
    "trace_backbone",
    "monodromy",
    "stability_from_monodromy",
    "reconstruct_cone",
    "beta_approx",
    "mic_residual",
    "linear_segment",
    "bilinear_limit",
]

ALPHA_TOL = 1e-8
STABILITY_TOL = 1e-6
SEED_PLUS_FRACTION = 1e-3


@dataclass(frozen=True, eq=False)
class BackbonePoint:
    x0: np.ndarray
    t_minus: float
    t_plus: float
    alpha: float
    energy_a: float
    floquet: Spectrum = None
    stable: bool = None
    max_abs_q1: float = None
    residual: float = None
    iterations: int = None

    @property
    def period(self):
        return self.t_minus + self.t_plus

    @property
    def omega(self):
        return 2 * math.pi / self.period

    @property
    def log10_energy(self):
        return math.log10(self.energy_a)

    def unknowns(self):
        return np.concatenate([self.x0, [self.t_minus, self.t_plus, self.alpha, self.log10_energy]])


@dataclass
class BackboneBranch:
    points: list
    mode_index: int
    linear_frequency: float
    crossing_energy: float
    transitions: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    @property
    def omegas(self):
        return np.array([p.omega for p in self.points])

    @property
    def log10_energies(self):
        return np.array([p.log10_energy for p in self.points])

    @property
    def stable(self):
        return np.array([p.stable for p in self.points])


def _aug(lure, alpha):
    aug = augment_autonomous(lure, alpha)
    D = np.zeros((lure.n + 1, lure.n + 1))
    D[: lure.n, : lure.n] = lure.damping_direction
    return aug.At_minus, aug.At_plus, D


def mic_residual(u, lure, delta, closure="energy", omega=None):
    """Residual and Jacobian of the modified cone problem.

    ``u = (x0, t-, t+, alpha, log10 a)``; with ``closure="frequency"`` the
    last equation is ``t- + t+ - 2 pi / omega`` and ``log10 a`` is ignored.
    The Jacobian has shape ``(n+3, n+4)``.
    """
    n = lure.n
    x0, tm, tp, al, lam = u[:n], u[n], u[n + 1], u[n + 2], u[n + 3]
    Am, Ap, D = _aug(lure, al)
    Pm, Lm = expm_frechet(tm * Am, tm * D)
    Pp, Lp = expm_frechet(tp * Ap, tp * D)
    v0 = np.append(x0, delta)
    v1 = Pm @ v0
    v2 = Pp @ v1
    R = np.empty(n + 3)
    J = np.zeros((n + 3, n + 4))
    R[:n] = v2[:n] - x0
    R[n] = x0[0]
    R[n + 1] = v1[0]
    J[:n, :n] = (Pp @ Pm)[:n, :n] - np.eye(n)
    J[:n, n] = (Pp @ (Am @ v1))[:n]
    J[:n, n + 1] = (Ap @ v2)[:n]
    J[:n, n + 2] = (Lp @ v1 + Pp @ (Lm @ v0))[:n]
    J[n, 0] = 1.0
    J[n + 1, :n] = Pm[0, :n]
    J[n + 1, n] = (Am @ v1)[0]
    J[n + 1, n + 2] = (Lm @ v0)[0]
    if closure == "energy":
        E = lure.energy(x0, delta)
        if not E > 0:
            raise ValueError("non-positive energy in backbone residual")
        R[n + 2] = math.log10(E) - lam
        J[n + 2, :n] = lure.energy_gradient(x0, delta) / (E * math.log(10.0))
        J[n + 2, n + 3] = -1.0
    else:
        R[n + 2] = tm + tp - 2 * math.pi / omega
        J[n + 2, n] = 1.0
        J[n + 2, n + 1] = 1.0
    return R, J


def monodromy(point, lure, delta):
    """expm(t+ At+) expm(t- At-) of the gap-augmented system at ``point.alpha``."""
    Am, Ap, _ = _aug(lure, point.alpha)
    return expm(point.t_plus * Ap) @ expm(point.t_minus * Am)


def stability_from_monodromy(Phi, n_trivial, extra_states):
    """Stability verdict ignoring structural multipliers.

    The trailing ``extra_states`` rows of ``Phi`` belong to augmentation
    states (block-triangular), and ``n_trivial`` further multipliers closest
    to 1 are removed from the physical block before testing
    ``|lambda| <= 1 + 1e-6``. Returns ``(stable, full spectrum, remaining)``.
    """
    full = eig(Phi)
    m = Phi.shape[0] - extra_states
    lam = eig(Phi[:m, :m]).eigenvalues
    for _ in range(n_trivial):
        if lam.size == 0:
            break
        lam = np.delete(lam, int(np.argmin(np.abs(lam - 1.0))))
    stable = bool(np.all(np.abs(lam) <= 1.0 + STABILITY_TOL))
    return stable, full, lam


def _q1_amplitude(x0, t_minus, t_plus, alpha, lure, delta):
    Am, Ap, _ = _aug(lure, alpha)
    v0 = np.append(x0, delta)
    v1 = expm(t_minus * Am) @ v0
    row = lure.physical_row(0)
    return max_abs_output(row, [(Am, v0, t_minus), (Ap, v1, t_plus)])


def _check_first_crossings(x0, t_minus, t_plus, alpha, lure, delta, tol=1e-7):
    Am, Ap, _ = _aug(lure, alpha)
    v0 = np.append(x0, delta)
    v0[0] = 0.0
    horizon = 1.5 * (t_minus + t_plus)
    tm = first_return_time(v0, Am, horizon=horizon, side=Side.MINUS)
    v1 = expm(t_minus * Am) @ v0
    v1[0] = 0.0
    tp = first_return_time(v1, Ap, horizon=horizon, side=Side.PLUS)
    scale = t_minus + t_plus
    return abs(tm - t_minus) <= tol * scale and abs(tp - t_plus) <= tol * scale


def _finalize(u, lure, delta, residual=None, iterations=None, check_crossings=True):
    n = lure.n
    x0 = u[:n].copy()
    tm, tp, al = float(u[n]), float(u[n + 1]), float(u[n + 2])
    if tm <= 0 or tp <= 0:
        raise ConvergenceError(f"non-positive return time (t-={tm:.3g}, t+={tp:.3g})", iterations, residual)
    if abs(al) > ALPHA_TOL:
        raise ConvergenceError(f"damping multiplier did not vanish (alpha={al:.3g})", iterations, residual)
    if tp < GRAZING_RATIO * (tm + tp):
        raise GrazingError(f"orbit grazes the contact plane (t+/T={tp / (tm + tp):.3g})")
    if residual is None:
        residual = float(np.linalg.norm(mic_residual(u, lure, delta)[0], np.inf))
    if check_crossings and not _check_first_crossings(x0, tm, tp, al, lure, delta):
        raise ConvergenceError("solution is not a single-crossing orbit", iterations, residual)
    pt = BackbonePoint(x0, tm, tp, al, lure.energy(x0, delta), residual=residual, iterations=iterations)
    stable, spectrum, _ = stability_from_monodromy(monodromy(pt, lure, delta), 2, 1)
    amp = _q1_amplitude(x0, tm, tp, al, lure, delta)
    return replace(pt, floquet=spectrum, stable=stable, max_abs_q1=amp)


def solve_mic(guess, lure, delta=None, tol=1e-10, maxiter=50):
    """Converge a backbone point at the fixed energy ``guess.energy_a``."""
    delta = lure.delta if delta is None else delta
    if not delta > 0:
        raise ValueError("the modified cone problem needs a positive gap; use the classic cone for delta = 0")
    u = guess.unknowns()
    lam = u[-1]
    n = lure.n

    def sq(v):
        R, J = mic_residual(np.append(v, lam), lure, delta)
        return R, J[:, : n + 3]

    v, it = continuation.newton(sq, u[:-1], tol=tol, maxiter=maxiter)
    u = np.append(v, lam)
    R, _ = mic_residual(u, lure, delta)
    return _finalize(u, lure, delta, residual=float(np.linalg.norm(R, np.inf)), iterations=it)


def solve_mic_at_frequency(guess, lure, omega, delta=None, tol=1e-10, maxiter=50):
    """Backbone point with prescribed frequency (energy left free)."""
    delta = lure.delta if delta is None else delta
    u = guess.unknowns()
    n = lure.n

    def sq(v):
        R, J = mic_residual(np.append(v, 0.0), lure, delta, closure="frequency", omega=omega)
        return R, J[:, : n + 3]

    v, it = continuation.newton(sq, u[:-1], tol=tol, maxiter=maxiter)
    u = np.append(v, math.log10(lure.energy(v[:n], delta)))
    R, _ = mic_residual(u, lure, delta, closure="frequency", omega=omega)
    return _finalize(u, lure, delta, residual=float(np.linalg.norm(R, np.inf)), iterations=it)


def seed_from_lnm(mode_index, lure, sys, delta=None):
    """Initial guess just above the energy where linear mode ``mode_index``
    (1-based) first touches the contact plane.

    Returns ``(guess, crossing_energy, linear_frequency)``. The guess departs
    into the contact-free region and spends ``1e-3`` of the linear period in
    contact.
    """
    delta = lure.delta if delta is None else delta
    if not 1 <= mode_index <= sys.N:
        raise ValueError(f"mode index must lie in 1..{sys.N}")
    if not delta > 0:
        raise ValueError("linear modes never reach the contact for delta = 0")
    omegas, phis = sys.linear_modes()
    om = omegas[mode_index - 1]
    phi = phis[:, mode_index - 1]
    p = sys.w @ phi
    if abs(p) < 1e-12 * np.linalg.norm(sys.w) * np.linalg.norm(phi):
        raise ValueError(f"mode {mode_index} does not load the contact")
    amp = delta / abs(p) * np.sign(p)
    crossing_energy = 0.5 * amp**2 * om**2
    T = 2 * math.pi / om
    theta = math.pi * SEED_PLUS_FRACTION
    scale = 1.0 / math.cos(theta)
    q = amp * phi
    qd = -amp * scale * om * math.sin(theta) * phi
    x0 = lure.from_physical(q, qd, delta)
    x0[0] = 0.0
    tp = 2 * theta / om
    guess = BackbonePoint(x0, T - tp, tp, 0.0, lure.energy(x0, delta))
    return guess, crossing_energy, om


def trace_backbone(seed, lure, sys=None, energy_max=None, decades=4.0, control=None,
                   delta=None, refine=True, mode_index=0, linear_frequency=None,
                   crossing_energy=None, transition_tol=1e-4):
    """Pseudo-arclength continuation of a backbone in log10 energy.

    Stops when the energy reaches ``energy_max`` (default: ``decades``
    above the seed) or when the orbit starts grazing. Stability changes are
    localised by bisection along the branch to ``transition_tol`` in omega.
    """
    delta = lure.delta if delta is None else delta
    first = solve_mic(seed, lure, delta)
    lam0 = first.log10_energy
    lam_max = math.log10(energy_max) if energy_max is not None else lam0 + decades
    if control is None:
        control = continuation.StepControl(
            initial=1e-3, maximum=5.0, max_param_step=(lam_max - lam0) / 250.0, tol=1e-10,
        )
    n = lure.n
    fun = lambda u: mic_residual(u, lure, delta)

    def accept(u, J):
        tm, tp = u[n], u[n + 1]
        if tm <= 0 or tp <= 0:
            return "reject: negative return time"
        if tp < GRAZING_RATIO * (tm + tp):
            return "grazing"
        if u[-1] >= lam_max:
            return "energy-max"
        return None

    raw, info = continuation.follow(fun, first.unknowns(), control, accept=accept,
                                    direction=np.eye(n + 4)[-1])
    if info["reason"] == "energy-max" and raw[-1][-1] > lam_max:
        end = BackbonePoint(raw[-1][:n], raw[-1][n], raw[-1][n + 1], raw[-1][n + 2], 10.0**lam_max)
        raw[-1] = solve_mic(end, lure, delta).unknowns()
    points = [first]
    for u in raw[1:]:
        try:
            points.append(_finalize(np.asarray(u), lure, delta))
        except GrazingError:
            info["reason"] = "grazing"
            break
    branch = BackboneBranch(points, mode_index, linear_frequency, crossing_energy, info=info)
    if refine:
        _refine_transitions(branch, fun, lure, delta, transition_tol)
    return branch


def _refine_transitions(branch, fun, lure, delta, tol):
    pts = branch.points
    i = 0
    while i < len(pts) - 1:
        a, b = pts[i], pts[i + 1]
        if a.stable == b.stable:
            i += 1
            continue
        inserted = []
        lo, hi = a, b
        while abs(hi.omega - lo.omega) > tol:
            ua, ub = lo.unknowns(), hi.unknowns()
            d = ub - ua
            t = d / np.linalg.norm(d)
            um, _, _ = continuation.correct(fun, 0.5 * (ua + ub), t, 1e-10, 20)
            mid = _finalize(um, lure, delta)
            inserted.append(mid)
            if mid.stable == lo.stable:
                lo = mid
            else:
                hi = mid
        branch.transitions.append({
            "omega": 0.5 * (lo.omega + hi.omega),
            "log10_energy": 0.5 * (lo.log10_energy + hi.log10_energy),
            "from_stable": bool(a.stable),
            "to_stable": bool(b.stable),
            "bracket": (lo.omega, hi.omega),
        })
        inserted.sort(key=lambda p: np.linalg.norm(p.unknowns() - a.unknowns()))
        pts[i + 1:i + 1] = inserted
        i += len(inserted) + 1


@dataclass(frozen=True, eq=False)
class ScaledOrbit:
    beta: float
    x0: np.ndarray
    delta: float
    period: float
    closure: float


def reconstruct_cone(point, betas, lure, delta=None):
    """Members ``beta * (x0, delta)`` of the augmented cone through ``point``.

    Each is a periodic orbit of the system with gap ``beta * delta`` sharing
    the period of ``point``; ``closure`` is the relative return error found
    by event-exact integration over that period.
    """
    delta = lure.delta if delta is None else delta
    Am, Ap, _ = _aug(lure, point.alpha)
    out = []
    for beta in betas:
        if not beta > 0:
            raise ValueError("cone scaling factors must be positive")
        v0 = beta * np.append(point.x0, delta)
        v0[0] = 0.0
        vT = integrate(v0, Am, Ap, point.period).final
        closure = np.linalg.norm(vT - v0) / np.linalg.norm(v0)
        out.append(ScaledOrbit(beta, v0[:-1], beta * delta, point.period, float(closure)))
    return out


def beta_approx(log10_energy_real, log10_energy_cone):
    """Cone scaling that matches the energy of a target orbit."""
    return math.sqrt(10.0**log10_energy_real / 10.0**log10_energy_cone)


def linear_segment(mode_index, lure, sys, crossing_energy, decades_below=2.0, n_points=21, delta=None):
    """Contact-free part of a backbone below ``crossing_energy``.

    The frequency is the linear one; the reported state is the turning
    point of largest gap, so ``x0`` is not on the switching plane here.
    Returns a list of dicts with the branch record fields.
    """
    delta = lure.delta if delta is None else delta
    omegas, phis = sys.linear_modes()
    om = omegas[mode_index - 1]
    phi = phis[:, mode_index - 1]
    sgn = np.sign(sys.w @ phi) or 1.0
    rows = []
    for lam in np.linspace(math.log10(crossing_energy) - decades_below, math.log10(crossing_energy), n_points):
        amp = math.sqrt(2 * 10.0**lam) / om
        q = sgn * amp * phi
        qd = np.zeros_like(q)
        rows.append({
            "log10_energy": float(lam),
            "omega": float(om),
            "t_minus": 2 * math.pi / om,
            "t_plus": 0.0,
            "stable": True,
            "x0": lure.from_physical(q, qd, delta),
            "q0": q,
            "max_abs_q1": abs(amp * phi[0]),
        })
    return rows


def bilinear_limit(mode_index, lure, sys):
    """Classic cone of the gap-free system continuing linear mode
    ``mode_index``; its frequency is the high-energy limit of the backbone.

    The guess leaves the plane along the contact-free mode, with half
    periods of the contact-free and the contact-loaded mode in the two
    regions.
    """
    omegas, phis = sys.linear_modes()
    om = omegas[mode_index - 1]
    phi = phis[:, mode_index - 1]
    loaded = sys.replace(K=sys.K + sys.kn * np.outer(sys.w, sys.w))
    om_plus = loaded.linear_modes()[0][mode_index - 1]
    qd = -om * np.sign(sys.w @ phi) * phi
    xi = lure.from_physical(np.zeros(sys.N), qd, 0.0)
    Am, Ap = lure.matrices(0.0)
    sol = solve_classic_cone(Am, Ap, ConeSolution(xi, math.pi / om, math.pi / om_plus, 1.0))
    if not sol.mu > 0:
        raise ConvergenceError(f"cone iteration settled on a flip cone (mu={sol.mu:.3g})")
    return sol
