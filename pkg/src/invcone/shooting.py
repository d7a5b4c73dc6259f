"""Shooting solver for periodic orbits in physical coordinates.

This is deliberately independent of the transformed cone formulation: the
system matrices are assembled directly from ``M, C, K, w, kn`` with the gap
stored as a constant extra state, and periodic orbits are found as zeros of
the shooting function ``H(z0, T) = z(T; z0) - z0``. Trajectories and the
monodromy come from the event-exact propagator.

Autonomous orbits use a phase anchor ``f(z0) . dz = 0``; families are
followed by pseudo-arclength continuation in ``(z0, T)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import ContinuationStall, ConvergenceError
from .linalg import solve_least_squares
from .timeint import MINUS, PLUS, integrate, max_abs_output, region_of

__all__ = [
    "PhysicalSystem",
    "ShootingState",
    "TangentVector",
    "physical_system",
    "physical_forced_system",
    "shoot",
    "continue_branch",
    "shoot_nonautonomous",
    "linear_mode_state",
]


@dataclass(frozen=True, eq=False)
class PhysicalSystem:
    """Homogeneous two-region form of the mechanical system.

    The state is ``(q, q', delta)`` for autonomous systems and
    ``(q, q', z_c, z_s, delta)`` for forced ones; ``switch . y`` is the gap
    ``w . q - delta``.
    """

    A_minus: np.ndarray
    A_plus: np.ndarray
    switch: np.ndarray
    N: int
    mech: object
    Omega: float = None

    @property
    def n_phys(self):
        return 2 * self.N

    @property
    def dimension(self):
        return self.A_minus.shape[0]

    def extend(self, zp):
        """Append the constant (and clock) states to a physical state."""
        zp = np.asarray(zp, dtype=float)
        if self.Omega is None:
            return np.append(zp, self.mech.delta)
        return np.concatenate([zp, [1.0, 0.0, self.mech.delta]])

    def vector_field(self, y):
        side = PLUS if self.switch @ y >= 0 else MINUS
        return (self.A_plus if side == PLUS else self.A_minus) @ y

    def energy(self, zp):
        N = self.N
        return self.mech.energy(zp[:N], zp[N: 2 * N])

    def energy_gradient(self, zp):
        N = self.N
        q, qd = zp[:N], zp[N: 2 * N]
        s = self.mech
        g = s.w @ q - s.delta
        gq = s.K @ q + s.kn * max(g, 0.0) * s.w
        return np.concatenate([gq, s.M @ qd])


def _blocks(sys, alpha):
    N = sys.N
    Minv = np.linalg.inv(sys.M)
    C = sys.C if sys.C is not None else np.zeros_like(sys.K)
    Kc = sys.K + sys.kn * np.outer(sys.w, sys.w)
    return N, Minv, C, Kc


def physical_system(sys, alpha=0.0):
    """Autonomous system in the state ``(q, q', delta)``."""
    N, Minv, C, Kc = _blocks(sys, alpha)
    dim = 2 * N + 1
    Am = np.zeros((dim, dim))
    Am[:N, N: 2 * N] = np.eye(N)
    Am[N: 2 * N, :N] = -Minv @ sys.K
    Am[N: 2 * N, N: 2 * N] = -alpha * Minv @ C
    Ap = Am.copy()
    Ap[N: 2 * N, :N] = -Minv @ Kc
    Ap[N: 2 * N, -1] = sys.kn * Minv @ sys.w
    s = np.concatenate([sys.w, np.zeros(N), [-1.0]])
    return PhysicalSystem(Am, Ap, s, N, sys)


def physical_forced_system(sys, Omega, alpha=None):
    """Forced system in the state ``(q, q', z_c, z_s, delta)`` with
    ``z_c = cos(Omega t + phase)``."""
    if not Omega > 0:
        raise ValueError("excitation frequency must be positive")
    alpha = sys.alpha if alpha is None else alpha
    N, Minv, C, Kc = _blocks(sys, alpha)
    dim = 2 * N + 3
    Am = np.zeros((dim, dim))
    Am[:N, N: 2 * N] = np.eye(N)
    Am[N: 2 * N, :N] = -Minv @ sys.K
    Am[N: 2 * N, N: 2 * N] = -alpha * Minv @ C
    Am[N: 2 * N, 2 * N] = Minv @ sys.f
    Am[2 * N, 2 * N + 1] = -Omega
    Am[2 * N + 1, 2 * N] = Omega
    Ap = Am.copy()
    Ap[N: 2 * N, :N] = -Minv @ Kc
    Ap[N: 2 * N, -1] = sys.kn * Minv @ sys.w
    s = np.concatenate([sys.w, np.zeros(N + 2), [-1.0]])
    return PhysicalSystem(Am, Ap, s, N, sys, Omega=float(Omega))


@dataclass
class ShootingState:
    zp0: np.ndarray
    T: float
    residual: float = math.inf
    monodromy: np.ndarray = None
    iterations: int = 0
    energy: float = None

    @property
    def omega(self):
        return 2 * math.pi / self.T


@dataclass
class TangentVector:
    pz: np.ndarray
    pT: float

    def as_vector(self):
        return np.append(self.pz, self.pT)


def _flow(psys, zp0, T, y0=None):
    y0 = psys.extend(zp0) if y0 is None else y0
    tr = integrate(y0, psys.A_minus, psys.A_plus, T, switch=psys.switch, with_transition=True)
    m = psys.n_phys
    yT = tr.final
    return yT[:m] - zp0, tr.transition[:m, :m], psys.vector_field(yT)[:m], psys.vector_field(y0)[:m], tr


def linear_mode_state(sys, mode_index, amplitude):
    """Start state ``(amplitude * phi, 0)`` and period of a linear mode."""
    omegas, phis = sys.linear_modes()
    phi = phis[:, mode_index - 1]
    return np.concatenate([amplitude * phi, np.zeros(sys.N)]), 2 * math.pi / omegas[mode_index - 1]


def shoot(guess, psys, anchor=True, energy=None, tol=1e-10, maxiter=30):
    """Newton iteration on the shooting function.

    Each step solves (least squares)::

        [ Phi - I   f(z(T)) ] [dz]   [ -H ]
        [ f(z0)^T   0       ] [dT] = [  0 ]
        [ dE/dz^T   0       ]        [a - E]

    where the anchor row is dropped with ``anchor=False`` and the energy row
    is present only if ``energy`` is given. Returns a converged
    :class:`ShootingState` with the monodromy of the final iterate.
    """
    if not guess.T > 0:
        raise ValueError("shooting period must be positive")
    z = np.asarray(guess.zp0, dtype=float).copy()
    T = float(guess.T)
    m = psys.n_phys
    for it in range(maxiter + 1):
        H, Phi, fT, f0, _ = _flow(psys, z, T)
        rows = [np.hstack([Phi - np.eye(m), fT[:, None]])]
        rhs = [-H]
        res = np.linalg.norm(H, np.inf)
        if anchor:
            rows.append(np.append(f0, 0.0)[None, :])
            rhs.append([0.0])
        if energy is not None:
            E = psys.energy(z)
            rows.append(np.append(psys.energy_gradient(z), 0.0)[None, :])
            rhs.append([energy - E])
            res = max(res, abs(energy - E) / max(energy, 1e-300))
        if res <= tol:
            return ShootingState(z, T, float(np.linalg.norm(H, np.inf)), Phi, it, psys.energy(z))
        if it == maxiter:
            break
        d = solve_least_squares(np.vstack(rows), np.concatenate(rhs), allow_rank_deficient=energy is None)
        z = z + d[:m]
        T = T + d[m]
        if not T > 0:
            raise ConvergenceError("shooting period became non-positive", it, res)
    raise ConvergenceError(f"shooting did not converge (residual {res:.3g})", maxiter, res)


def _bordered(psys, z, T):
    H, Phi, fT, f0, _ = _flow(psys, z, T)
    m = psys.n_phys
    J = np.zeros((m + 1, m + 1))
    J[:m, :m] = Phi - np.eye(m)
    J[:m, m] = fT
    J[m, :m] = f0
    return H, J, Phi


def _tangent(J, previous):
    # fix the component that dominated the previous tangent, least-squares for the rest
    k = int(np.argmax(np.abs(previous)))
    cols = [j for j in range(J.shape[1]) if j != k]
    rest = solve_least_squares(J[:, cols], -J[:, k], rcond=1e-10)
    p = np.empty(J.shape[1])
    p[k] = 1.0
    p[cols] = rest
    p /= np.linalg.norm(p)
    if p @ previous < 0:
        p = -p
    return p


def continue_branch(start, psys, stop, step=1e-2, min_step=1e-8, max_step=0.5,
                    target_iterations=4, max_iterations=10, tol=1e-10, max_points=5000,
                    initial_direction=None):
    """Pseudo-arclength continuation of an autonomous family in ``(z0, T)``.

    ``stop(state) -> bool`` ends the trace after the accepted point for which
    it returns True. The first tangent is the null vector of the bordered
    Jacobian oriented along ``initial_direction`` (default: increasing
    energy); later tangents fix the largest component of their predecessor.

    Returns ``(states, info)`` with the tangents and corrector iteration
    counts in ``info``.
    """
    m = psys.n_phys
    u = np.append(start.zp0, start.T)
    _, J, Phi = _bordered(psys, start.zp0, start.T)
    # no previous tangent yet: take the null vector of the bordered Jacobian
    p = np.linalg.svd(J)[2][-1]
    if initial_direction is None:
        initial_direction = np.append(psys.energy_gradient(start.zp0), 0.0)
    if p @ initial_direction < 0:
        p = -p
    states = [start]
    tangents = [TangentVector(p[:m], p[m])]
    iters = []
    s = step
    while len(states) < max_points:
        u_pred = u + s * p
        v = u_pred.copy()
        ok = False
        for k in range(1, max_iterations + 1):
            H, J, Phi = _bordered(psys, v[:m], v[m])
            A = np.vstack([J, p])
            rhs = np.concatenate([-H, [0.0], [-(p @ (v - u_pred))]])
            try:
                d = solve_least_squares(A, rhs)
            except Exception:
                break
            v = v + d
            if not v[m] > 0:
                break
            if np.linalg.norm(d, np.inf) <= tol * max(1.0, np.linalg.norm(v, np.inf)):
                H, J, Phi = _bordered(psys, v[:m], v[m])
                if np.linalg.norm(H, np.inf) <= 10 * tol:
                    ok = True
                    break
        if not ok:
            s *= 0.5
            if s < min_step:
                raise ContinuationStall(f"shooting step below {min_step:g}")
            continue
        iters.append(k)
        st = ShootingState(v[:m].copy(), float(v[m]), float(np.linalg.norm(H, np.inf)), Phi, k,
                           psys.energy(v[:m]))
        p = _tangent(J, p)
        u = v
        states.append(st)
        tangents.append(TangentVector(p[:m], p[m]))
        if stop(st):
            return states, {"reason": "stop", "corrector_iterations": iters, "tangents": tangents}
        s = float(np.clip(s * np.clip(target_iterations / k, 0.5, 2.0), min_step, max_step))
    return states, {"reason": "max-points", "corrector_iterations": iters, "tangents": tangents}


def shoot_nonautonomous(zp0, Omega, sys, phase=0.0, tol=1e-10, maxiter=30, alpha=None):
    """Period-``2 pi / Omega`` steady state of the forced system.

    ``phase`` sets the forcing clock at the start, ``f cos(Omega t + phase)``.
    Returns ``(zp0, info)`` with the monodromy, residual and the
    response amplitude ``max |q_1|``.
    """
    psys = physical_forced_system(sys, Omega, alpha)
    T = 2 * math.pi / Omega
    m = psys.n_phys
    clock = np.array([math.cos(phase), math.sin(phase)])
    z = np.asarray(zp0, dtype=float).copy()
    for it in range(maxiter + 1):
        y0 = np.concatenate([z, clock, [sys.delta]])
        H, Phi, _, _, tr = _flow(psys, z, T, y0=y0)
        res = np.linalg.norm(H, np.inf)
        if res <= tol:
            amp = _amplitude(psys, tr, 0)
            return z, {"residual": res, "monodromy": Phi, "iterations": it,
                       "response_amplitude": amp, "trajectory": tr}
        if it == maxiter:
            break
        try:
            z = z + np.linalg.solve(Phi - np.eye(m), -H)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError(f"singular shooting matrix: {exc}", it, res) from exc
    raise ConvergenceError(f"nonautonomous shooting did not converge (residual {res:.3g})", maxiter, res)


def _amplitude(psys, tr, component):
    row = np.zeros(psys.dimension)
    row[component] = 1.0
    events = [0.0] + [c[0] for c in tr.crossings] + [tr.times[-1]]
    starts = [tr.states[0]] + list(tr.crossing_states)
    side = region_of(tr.states[0], psys.A_minus, psys.switch) or MINUS
    segs = []
    for j in range(len(starts)):
        segs.append((psys.A_plus if side == PLUS else psys.A_minus, starts[j], events[j + 1] - events[j]))
        side = -side
    return max_abs_output(row, segs)
