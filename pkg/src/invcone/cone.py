"""Poincare half-maps on the switching plane ``x[0] = 0`` and the classic
invariant cone problem of homogeneous two-region systems.

A cone is a half-line ``beta * xi`` on the plane that the return map sends
to itself: ``expm(t+ A+) expm(t- A-) xi = mu xi``.
"""

from dataclasses import dataclass
import enum

import numpy as np

from .errors import ConvergenceError, GrazingError, NoReturnError, SingularJacobianError
from .linalg import Spectrum, eig, expm
from .timeint import next_crossing, oscillation_periods, region_of

__all__ = [
    "Side",
    "ConeSolution",
    "classify_side",
    "first_return_time",
    "poincare_map",
    "poincare_jacobian",
    "solve_classic_cone",
    "attractivity",
    "GRAZING_RATIO",
]

GRAZING_RATIO = 1e-6


class Side(enum.Enum):
    MINUS = -1
    PLUS = 1
    DEGENERATE = 0


def _e1(n):
    e = np.zeros(n)
    e[0] = 1.0
    return e


def classify_side(x, A):
    """Which region the flow of ``A`` enters from the plane point ``x``.

    Looks at the first non-vanishing derivative of ``x1(t)`` at ``t = 0``.
    """
    x = np.asarray(x, dtype=float)
    return Side(region_of(x, A, _e1(x.shape[0])))


def first_return_time(x0, A, horizon=None, side=None):
    """Smallest ``t > 0`` with ``e1 . expm(t A) x0 = 0`` for ``x0`` on the plane.

    Raises :class:`NoReturnError` if the trajectory has not come back within
    ``horizon`` (default: ten times the longest oscillation period of ``A``).
    """
    x0 = np.asarray(x0, dtype=float)
    if side is None:
        side = classify_side(x0, A)
        if side is Side.DEGENERATE:
            raise ValueError("degenerate start point: all derivatives vanish on the plane")
    side = Side(side)
    if horizon is None:
        _, longest = oscillation_periods(A)
        if longest is None:
            raise NoReturnError("matrix has no oscillatory eigenvalues; no return expected")
        horizon = 10.0 * longest
    t, _ = next_crossing(x0, A, _e1(x0.shape[0]), side.value, horizon)
    if t is None:
        raise NoReturnError(f"no return to the switching plane within t={horizon:.6g}")
    return t


def poincare_map(x0, A_minus, A_plus):
    """Full return map for ``x0`` in the minus half of the plane.

    Returns ``(image, t_minus, t_plus)``.
    """
    x0 = np.asarray(x0, dtype=float)
    t_m = first_return_time(x0, A_minus, side=Side.MINUS)
    eta = expm(t_m * A_minus) @ x0
    eta[0] = 0.0
    t_p = first_return_time(eta, A_plus, side=Side.PLUS)
    chi = expm(t_p * A_plus) @ eta
    return chi, t_m, t_p


def poincare_jacobian(xi, t_minus, t_plus, A_minus, A_plus):
    """Derivative of the return map at ``xi`` including the return-time
    sensitivities ``dt/dx = -e1^T Phi / (e1^T A eta)``."""
    n = len(xi)
    e1 = _e1(n)
    Pm = expm(t_minus * A_minus)
    Pp = expm(t_plus * A_plus)
    eta = Pm @ xi
    chi = Pp @ eta
    fm = A_minus @ eta
    fp = A_plus @ chi
    Dm = Pm - np.outer(fm, e1 @ Pm) / (e1 @ fm)
    Dp = Pp - np.outer(fp, e1 @ Pp) / (e1 @ fp)
    return Dp @ Dm


@dataclass(frozen=True, eq=False)
class ConeSolution:
    xi: np.ndarray
    t_minus: float
    t_plus: float
    mu: float
    iterations: int = 0
    residual: float = 0.0
    grazing: bool = False

    @property
    def period(self):
        return self.t_minus + self.t_plus

    @property
    def omega(self):
        return 2 * np.pi / self.period


def _cone_residual(u, Am, Ap):
    n = Am.shape[0]
    xi, tm, tp, mu = u[:n], u[n], u[n + 1], u[n + 2]
    Pm = expm(tm * Am)
    Pp = expm(tp * Ap)
    eta = Pm @ xi
    chi = Pp @ eta
    R = np.empty(n + 3)
    R[:n] = chi - mu * xi
    R[n] = eta[0]
    R[n + 1] = xi[0]
    R[n + 2] = xi @ xi - 1.0
    J = np.zeros((n + 3, n + 3))
    J[:n, :n] = Pp @ Pm - mu * np.eye(n)
    J[:n, n] = Pp @ (Am @ eta)
    J[:n, n + 1] = Ap @ chi
    J[:n, n + 2] = -xi
    J[n, :n] = Pm[0]
    J[n, n] = (Am @ eta)[0]
    J[n + 1, 0] = 1.0
    J[n + 2, :n] = 2.0 * xi
    return R, J


def solve_classic_cone(A_minus, A_plus, guess, tol=1e-10, maxiter=50):
    """Newton solve of the (n+3) cone equations for ``(xi, t-, t+, mu)``.

    ``guess`` is a :class:`ConeSolution`; its ``xi`` need not be normalised.
    """
    Am = np.asarray(A_minus, dtype=float)
    Ap = np.asarray(A_plus, dtype=float)
    n = Am.shape[0]
    xi0 = np.asarray(guess.xi, dtype=float).copy()
    xi0[0] = 0.0
    xi0 /= np.linalg.norm(xi0)
    if not (guess.t_minus > 0 and guess.t_plus > 0):
        raise ValueError("initial return times must be positive")
    u = np.concatenate([xi0, [guess.t_minus, guess.t_plus, guess.mu]])
    for it in range(1, maxiter + 1):
        R, J = _cone_residual(u, Am, Ap)
        res = np.linalg.norm(R, np.inf)
        if res <= tol:
            break
        cond = np.linalg.cond(J)
        if not np.isfinite(cond) or cond > 1e14:
            raise SingularJacobianError(f"cone Jacobian singular (cond={cond:.3g})", condition=cond)
        du = np.linalg.solve(J, -R)
        # damp steps that would flip the sign of a return time
        lam = 1.0
        while (u[n] + lam * du[n] <= 0 or u[n + 1] + lam * du[n + 1] <= 0) and lam > 1e-4:
            lam *= 0.5
        u = u + lam * du
    else:
        R, _ = _cone_residual(u, Am, Ap)
        res = np.linalg.norm(R, np.inf)
        if res > tol:
            raise ConvergenceError(f"cone Newton did not converge (residual {res:.3g})", maxiter, res)
        it = maxiter
    xi, tm, tp, mu = u[:n].copy(), u[n], u[n + 1], u[n + 2]
    if tm <= 0 or tp <= 0:
        raise ConvergenceError("converged to non-positive return times", it, res)
    return ConeSolution(xi, tm, tp, mu, iterations=it, residual=res,
                        grazing=tp < GRAZING_RATIO * (tm + tp))


def attractivity(sol, A_minus, A_plus):
    """Attractivity of a cone: all transverse eigenvalues of the return-map
    Jacobian (restricted to the plane, cone direction removed) lie strictly
    inside ``min(1, mu)``.

    Returns ``(attractive, transverse spectrum)``.
    """
    J = poincare_jacobian(sol.xi, sol.t_minus, sol.t_plus, A_minus, A_plus)
    lam = eig(J[1:, 1:]).eigenvalues
    k = int(np.argmin(np.abs(lam - sol.mu)))
    rest = np.delete(lam, k)
    attractive = bool(np.all(np.abs(rest) < min(1.0, sol.mu)))
    return attractive, Spectrum(rest)
