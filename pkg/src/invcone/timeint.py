"""Event-exact simulation of two-region continuous piecewise-linear systems.

Inside a region the state is propagated exactly with ``expm(t A)``; the
switching instants are roots of the scalar ``s . expm(t A) y`` located by
dense bracketing followed by Brent's method and a Newton polish. Because the
vector field is continuous, no state jump or saltation is applied at a
crossing.

All systems here are homogeneous: inhomogeneous terms (gap, forcing) are
expected to be carried by augmented constant or rotating states.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import CrossingAccumulation, NoReturnError, NotSettledError
from .linalg import expm

__all__ = [
    "Trajectory",
    "oscillation_periods",
    "next_crossing",
    "region_of",
    "integrate",
    "propagate",
    "max_abs_output",
    "steady_state_amplitude",
]

MINUS, PLUS = -1, 1
_EXCLUDE = 1e-9
_SAMPLES_PER_PERIOD = 64


def oscillation_periods(A):
    """(shortest, longest) oscillation period 2 pi / |Im lambda| of ``A``.

    Returns ``(None, None)`` when ``A`` has no complex eigenvalues.
    """
    im = np.abs(np.linalg.eigvals(A).imag)
    im = im[im > 1e-12 * max(1.0, np.max(np.abs(A)))]
    if im.size == 0:
        return None, None
    return 2 * math.pi / im.max(), 2 * math.pi / im.min()


def _sample_step(A):
    shortest, _ = oscillation_periods(A)
    if shortest is None:
        rate = max(np.linalg.norm(A, 2), 1e-12)
        shortest = 2 * math.pi / rate
    return shortest / _SAMPLES_PER_PERIOD


def region_of(y, A, s, tol=1e-12):
    """Region entered by the flow from ``y``: MINUS, PLUS, or 0 when every
    derivative of ``s . y(t)`` up to order ``len(y) - 1`` vanishes."""
    y = np.asarray(y, dtype=float)
    scale = np.linalg.norm(y)
    if scale == 0.0:
        return 0
    h = s @ y
    if abs(h) > tol * scale * np.linalg.norm(s):
        return PLUS if h > 0 else MINUS
    normA = max(np.linalg.norm(A, 2), 1e-300)
    v = y
    for k in range(1, len(y)):
        v = A @ v
        hk = s @ v
        if abs(hk) > tol * scale * normA**k:
            return PLUS if hk > 0 else MINUS
    return 0


def _polish(A, y, s, t, lo, hi):
    # Newton on the scalar crossing function, kept inside the bracket
    for _ in range(3):
        yt = expm(t * A) @ y
        h = s @ yt
        dh = s @ (A @ yt)
        if dh == 0.0:
            break
        tn = t - h / dh
        if not lo <= tn <= hi:
            break
        if abs(tn - t) < 1e-16 * max(1.0, t):
            t = tn
            break
        t = tn
    return t


def _dip(A, s, side, y0, width):
    """Time of an interior extremum of side * s.y(t) on (0, width) where the
    function turns back before the next sample, or None."""
    sA = s @ A
    g = lambda tau: sA @ (expm(tau * A) @ y0)
    g0, g1 = g(0.0), g(width)
    if not (side * g0 < 0.0 < side * g1):
        return None
    return brentq(g, 0.0, width, xtol=1e-15, maxiter=200)


def next_crossing(y, A, s, side, horizon, step=None, exclude=_EXCLUDE, cache=None):
    """First ``t`` in ``(exclude, horizon]`` where ``s . expm(t A) y`` leaves
    the region ``side``.

    Sign changes are looked for at sampling instants and, when the function
    approaches the plane and turns back within one step, at the interior
    extremum as well. Returns ``(t, y(t))``, or ``(None, y(horizon))`` if the
    region is not left. A tangential touch that does not change the sign is
    not a crossing.
    """
    step = _sample_step(A) if step is None else step
    key = (id(A), step)
    E = None if cache is None else cache.get(key)
    if E is None:
        E = expm(step * A)
        if cache is not None:
            cache[key] = E
    sA = s @ A
    t, ycur = 0.0, y
    while t < horizon:
        dt = min(step, horizon - t)
        y_next = E @ ycur if dt == step else expm(dt * A) @ ycur
        lo = max(t, exclude)
        if lo < t + dt:
            base = ycur if lo == t else expm((lo - t) * A) @ ycur
            width = t + dt - lo
            hi = None
            if side * (s @ y_next) < 0.0:
                hi = width
            elif side * (sA @ base) < 0.0 < side * (sA @ y_next):
                tau = _dip(A, s, side, base, width)
                if tau is not None and side * (s @ (expm(tau * A) @ base)) < 0.0:
                    hi = tau
            if hi is not None:
                f = lambda tau: s @ (expm(tau * A) @ base)
                f0 = f(0.0)
                if f0 == 0.0 or side * f0 < 0.0:
                    return lo, base
                tau = brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
                tau = _polish(A, base, s, tau, 0.0, hi)
                return lo + tau, expm(tau * A) @ base
        t += dt
        ycur = y_next
    return None, ycur


@dataclass
class Trajectory:
    """Dense samples plus the located switching events.

    ``crossings`` holds ``(time, direction)`` with direction +1 for entry
    into the plus region; ``crossing_states`` the corresponding states.
    ``transition`` is the state-transition matrix over the whole run.
    """

    times: np.ndarray
    states: np.ndarray
    crossings: list = field(default_factory=list)
    crossing_states: list = field(default_factory=list)
    transition: np.ndarray = None

    @property
    def final(self):
        return self.states[-1]


def _default_switch(dim):
    s = np.zeros(dim)
    s[0] = 1.0
    return s


def integrate(x0, A_minus, A_plus, t_end, sample_dt=None, switch=None,
              max_events=1_000_000, with_transition=False):
    """Simulate ``y' = A_minus y`` for ``s.y < 0`` and ``A_plus y`` otherwise.

    Dense output is on the grid ``k * sample_dt`` (omitted if ``sample_dt``
    is None) merged with every crossing instant and ``t_end``.
    """
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    y = np.asarray(x0, dtype=float).copy()
    dim = y.shape[0]
    s = _default_switch(dim) if switch is None else np.asarray(switch, dtype=float)
    mats = {MINUS: np.asarray(A_minus, dtype=float), PLUS: np.asarray(A_plus, dtype=float)}
    steps = {k: _sample_step(A) for k, A in mats.items()}
    cache = {}
    side = region_of(y, mats[MINUS], s) or MINUS
    t = 0.0
    times, states = [0.0], [y.copy()]
    crossings, cstates = [], []
    Phi = np.eye(dim) if with_transition else None

    def dense(t0, y0, t1, A):
        if sample_dt is None:
            return
        k0 = math.floor(t0 / sample_dt) + 1
        tk = k0 * sample_dt
        if tk >= t1:
            return
        yk = expm((tk - t0) * A) @ y0
        Edt = expm(sample_dt * A)
        while tk < t1 - 1e-14 * max(1.0, t1):
            times.append(tk)
            states.append(yk)
            k0 += 1
            tk = k0 * sample_dt
            yk = Edt @ yk

    while t < t_end:
        A = mats[side]
        on_plane = abs(s @ y) <= 1e-12 * np.linalg.norm(s) * np.linalg.norm(y)
        tc, yc = next_crossing(
            y, A, s, side, t_end - t, step=steps[side],
            exclude=_EXCLUDE if on_plane else 0.0, cache=cache,
        )
        if tc is None:
            tseg = t_end - t
        else:
            tseg = tc
        dense(t, y, t + tseg, A)
        y_new = expm(tseg * A) @ y if tc is None else yc
        if with_transition:
            Phi = expm(tseg * A) @ Phi
        t += tseg
        y = y_new
        if tc is None:
            break
        side = -side
        crossings.append((t, side))
        cstates.append(y.copy())
        times.append(t)
        states.append(y.copy())
        if len(crossings) > max_events:
            raise CrossingAccumulation(f"more than {max_events} crossings before t={t:.6g}")
    if times[-1] != t_end:
        times.append(t_end)
        states.append(y.copy())
    return Trajectory(np.array(times), np.array(states), crossings, cstates, Phi)


def propagate(x0, A_minus, A_plus, t_end, switch=None):
    """Final state and state-transition matrix after ``t_end``."""
    tr = integrate(x0, A_minus, A_plus, t_end, switch=switch, with_transition=True)
    return tr.final, tr.transition, tr


def max_abs_output(row, segments, n_samples=200):
    """max |row . y(t)| over consecutive exact segments.

    ``segments`` is a list of ``(A, y_start, duration)``. Each segment is
    sampled and the best sample refined by bounded scalar minimisation.
    """
    best = -1.0
    for A, y0, dur in segments:
        if dur <= 0:
            continue
        ts = np.linspace(0.0, dur, n_samples + 1)
        E = expm(ts[1] * A)
        vals = np.empty_like(ts)
        yk = np.asarray(y0, dtype=float)
        for k in range(ts.size):
            vals[k] = row @ yk
            yk = E @ yk
        a = np.abs(vals)
        best = max(best, a.max())
        # refine every sampled local maximum (ties at both ends are common on
        # closed orbits, so argmax alone can pick the wrong bracket)
        pad = np.concatenate([[-1.0], a, [-1.0]])
        peaks = np.flatnonzero((pad[1:-1] >= pad[:-2]) & (pad[1:-1] >= pad[2:]))
        for k in peaks:
            if a[k] < 0.9 * a.max():
                continue
            lo, hi = ts[max(k - 1, 0)], ts[min(k + 1, ts.size - 1)]
            res = minimize_scalar(
                lambda tau: -abs(row @ (expm(tau * A) @ y0)),
                bounds=(lo, hi), method="bounded", options={"xatol": 1e-12 * max(1.0, dur)},
            )
            best = max(best, -res.fun)
    return best


def steady_state_amplitude(y0, A_minus, A_plus, Omega, output_row, state_dim=None,
                           n_transient_periods=300, drift_tol=1e-6, max_periods=20000,
                           switch=None):
    """Brute-force steady-state amplitude ``max |output_row . y|`` of a forced
    system written in an augmented homogeneous form.

    The first ``n_transient_periods`` forcing periods are discarded; after
    that, integration continues period by period until the stroboscopic
    relative drift of the first ``state_dim`` components drops below
    ``drift_tol``.
    """
    T = 2 * math.pi / Omega
    y = np.asarray(y0, dtype=float)
    m = y.shape[0] if state_dim is None else state_dim
    s = _default_switch(y.shape[0]) if switch is None else switch
    drift = math.inf
    for k in range(max_periods):
        y_next = integrate(y, A_minus, A_plus, T, switch=s).final
        # re-impose the forcing clock exactly so round-off cannot drift its phase
        y_next[m:] = y[m:]
        if k + 1 >= n_transient_periods:
            ref = max(np.linalg.norm(y_next[:m]), 1e-300)
            drift = np.linalg.norm(y_next[:m] - y[:m]) / ref
            if drift < drift_tol:
                tr = integrate(y_next, A_minus, A_plus, T, switch=s)
                segs = []
                mats = {MINUS: A_minus, PLUS: A_plus}
                events = [0.0] + [c[0] for c in tr.crossings] + [T]
                starts = [y_next] + list(tr.crossing_states)
                side = region_of(y_next, A_minus, s) or MINUS
                for j in range(len(starts)):
                    segs.append((mats[side], starts[j], events[j + 1] - events[j]))
                    side = -side
                return max_abs_output(output_row, segs)
        y = y_next
    raise NotSettledError(f"no steady state after {max_periods} periods (drift {drift:.3g})", drift)
