"""Mechanical oscillators with one unilateral elastic contact and their
first-order piecewise-linear (Lure-like) representation.

Physical model::

    M q'' + alpha C q' + K q = w lam + f cos(Omega t),
    -lam = max(kn g, 0),   g = w.q - delta

The transformed coordinates ``qt = V P q - delta e1`` put the contact
displacement in the first component, so the switching plane is ``x[0] = 0``
for the state ``x = (qt, qt')``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

__all__ = [
    "MechanicalSystem",
    "LureSystem",
    "AugmentedAutonomousSystem",
    "AugmentedForcedSystem",
    "to_lure",
    "augment_autonomous",
    "augment_forced",
    "energy",
    "contact_gap",
    "jiang_system",
]

_SYM_TOL = 1e-12


def _check_symmetric(A, name):
    scale = max(1.0, np.max(np.abs(A)))
    if np.max(np.abs(A - A.T)) > _SYM_TOL * scale:
        raise ConfigError("matrix must be symmetric", field=name)


def _check_pd(A, name):
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise ConfigError("matrix must be positive definite", field=name) from None


@dataclass(frozen=True, eq=False)
class MechanicalSystem:
    M: np.ndarray
    K: np.ndarray
    w: np.ndarray
    kn: float
    delta: float
    C: np.ndarray = None
    f: np.ndarray = None
    alpha: float = 0.0

    def __post_init__(self):
        M = np.atleast_2d(np.asarray(self.M, dtype=float))
        K = np.atleast_2d(np.asarray(self.K, dtype=float))
        N = M.shape[0]
        if M.shape != (N, N) or K.shape != (N, N):
            raise ConfigError(f"M and K must both be square N x N, got {M.shape} and {K.shape}", field="K")
        C = np.zeros((N, N)) if self.C is None else np.atleast_2d(np.asarray(self.C, dtype=float))
        f = np.zeros(N) if self.f is None else np.asarray(self.f, dtype=float).reshape(-1)
        w = np.asarray(self.w, dtype=float).reshape(-1)
        if C.shape != (N, N):
            raise ConfigError(f"expected shape {(N, N)}, got {C.shape}", field="C")
        if w.shape != (N,):
            raise ConfigError(f"expected length {N}, got {w.shape[0]}", field="w")
        if f.shape != (N,):
            raise ConfigError(f"expected length {N}, got {f.shape[0]}", field="f")
        for name, A in (("M", M), ("K", K), ("C", C)):
            if not np.all(np.isfinite(A)):
                raise ConfigError("non-finite entries", field=name)
            _check_symmetric(A, name)
        _check_pd(M, "M")
        _check_pd(K, "K")
        if not np.any(w != 0.0):
            raise ConfigError("contact direction must be nonzero", field="w")
        if not (np.isfinite(self.kn) and self.kn > 0):
            raise ConfigError("unilateral stiffness must be positive", field="kn")
        if not (np.isfinite(self.delta) and self.delta >= 0):
            raise ConfigError("gap must be non-negative", field="delta")
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise ConfigError("damping multiplier must be non-negative", field="alpha")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "kn", float(self.kn))
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def N(self):
        return self.M.shape[0]

    @property
    def has_damping(self):
        return bool(np.any(self.C != 0.0))

    def replace(self, **changes):
        return replace(self, **changes)

    def linear_modes(self):
        """Eigenfrequencies and mass-normalised mode shapes of the contact-free
        subsystem, ascending in frequency."""
        lam, phi = _sym_gen_eig(self.K, self.M)
        return np.sqrt(lam), phi

    def energy(self, q, qd):
        """Total mechanical energy including the contact spring."""
        q = np.asarray(q, dtype=float)
        qd = np.asarray(qd, dtype=float)
        g = self.w @ q - self.delta
        return 0.5 * q @ self.K @ q + 0.5 * qd @ self.M @ qd + 0.5 * self.kn * max(g, 0.0) ** 2


def _sym_gen_eig(K, M):
    L = np.linalg.cholesky(M)
    Li = np.linalg.inv(L)
    lam, U = np.linalg.eigh(Li @ K @ Li.T)
    return lam, Li.T @ U


@dataclass(frozen=True, eq=False)
class LureSystem:
    """First-order form ``x' = A(alpha) x + c max(x1, 0) + b delta + b_t cos(Omega t)``.

    ``A_minus``/``A_plus`` are assembled at ``self.alpha``; use
    :meth:`matrices` for other damping multipliers. ``T = V P`` maps the
    user's coordinates to the transformed ones (``P`` reorders so that the
    contact direction has a nonzero first entry).
    """

    A_minus: np.ndarray
    A_plus: np.ndarray
    c: np.ndarray
    b: np.ndarray
    b_t: np.ndarray
    V: np.ndarray
    perm: np.ndarray
    Mt: np.ndarray
    Ct: np.ndarray
    Kt: np.ndarray
    alpha: float
    delta: float
    _stiff: np.ndarray = field(repr=False, default=None)
    _damp: np.ndarray = field(repr=False, default=None)

    @property
    def n(self):
        return 2 * self.N

    @property
    def N(self):
        return self.Kt.shape[0]

    @property
    def T(self):
        P = np.eye(self.N)[self.perm]
        return self.V @ P

    @property
    def T_inv(self):
        return np.linalg.inv(self.T)

    @property
    def damping_direction(self):
        """dA/dalpha (identical for both subsystems)."""
        D = np.zeros((self.n, self.n))
        D[self.N:, self.N:] = -self._damp
        return D

    def matrices(self, alpha):
        N = self.N
        A = np.zeros((self.n, self.n))
        A[:N, N:] = np.eye(N)
        A[N:, :N] = -self._stiff
        A[N:, N:] = -alpha * self._damp
        Ap = A.copy()
        Ap[:, 0] += self.c
        return A, Ap

    def to_physical(self, x, delta=None):
        """Map ``x = (qt, qt')`` (or an (m, n) array of states) to ``(q, q')``."""
        delta = self.delta if delta is None else delta
        x = np.asarray(x, dtype=float)
        N = self.N
        Ti = self.T_inv
        qt = x[..., :N].copy()
        qt[..., 0] += delta
        return qt @ Ti.T, x[..., N:] @ Ti.T

    def from_physical(self, q, qd, delta=None):
        delta = self.delta if delta is None else delta
        T = self.T
        qt = np.asarray(q, dtype=float) @ T.T
        qt[..., 0] -= delta
        return np.concatenate([qt, np.asarray(qd, dtype=float) @ T.T], axis=-1)

    def energy(self, x, delta=None):
        delta = self.delta if delta is None else delta
        x = np.asarray(x, dtype=float)
        N = self.N
        qs = x[:N].copy()
        qs[0] += delta
        v = x[N:]
        return 0.5 * qs @ self.Kt @ qs + 0.5 * v @ self.Mt @ v

    def energy_gradient(self, x, delta=None):
        delta = self.delta if delta is None else delta
        N = self.N
        qs = np.asarray(x[:N], dtype=float).copy()
        qs[0] += delta
        return np.concatenate([self.Kt @ qs, self.Mt @ x[N:]])

    def physical_row(self, component=0):
        """Row ``r`` with ``q[component] = r @ (x, v_delta)`` for augmented states."""
        Ti = self.T_inv
        N = self.N
        r = np.zeros(self.n + 1)
        r[:N] = Ti[component]
        r[-1] = Ti[component, 0]
        return r


def to_lure(sys, alpha=None):
    """Transform ``sys`` to Lure-like first-order form.

    When ``sys.C`` vanishes the damping direction defaults to ``M`` so that
    the damping multiplier remains a meaningful unknown for
    the autonomous cone problem.
    """
    alpha = sys.alpha if alpha is None else float(alpha)
    N = sys.N
    w = sys.w
    if w[0] != 0.0:
        perm = np.arange(N)
    else:
        k = int(np.argmax(np.abs(w)))
        perm = np.arange(N)
        perm[[0, k]] = perm[[k, 0]]
    wp = w[perm]
    V = np.eye(N)
    V[0, :] = wp
    P = np.eye(N)[perm]
    T = V @ P
    Ti = np.linalg.inv(T)
    Mt = Ti.T @ sys.M @ Ti
    Kt = Ti.T @ sys.K @ Ti
    C = sys.C if sys.has_damping else sys.M
    Ct = Ti.T @ C @ Ti
    Mt, Kt, Ct = (0.5 * (X + X.T) for X in (Mt, Kt, Ct))
    e1 = np.zeros(N)
    e1[0] = 1.0
    ft = -Kt @ e1
    ftt = Ti.T @ sys.f
    Minv = np.linalg.inv(Mt)
    if not np.all(np.isfinite(Minv)):
        raise ConfigError("transformed mass matrix is singular", field="M")
    n = 2 * N
    c = np.zeros(n)
    c[N:] = -sys.kn * Minv @ e1
    b = np.zeros(n)
    b[N:] = Minv @ ft
    b_t = np.zeros(n)
    b_t[N:] = Minv @ ftt
    lure = LureSystem(
        A_minus=None, A_plus=None, c=c, b=b, b_t=b_t, V=V, perm=perm,
        Mt=Mt, Ct=Ct, Kt=Kt, alpha=alpha, delta=sys.delta,
        _stiff=Minv @ Kt, _damp=Minv @ Ct,
    )
    Am, Ap = lure.matrices(alpha)
    object.__setattr__(lure, "A_minus", Am)
    object.__setattr__(lure, "A_plus", Ap)
    return lure


@dataclass(frozen=True, eq=False)
class AugmentedAutonomousSystem:
    """Homogeneous (n+1)-dimensional form with the gap carried as a constant state."""

    At_minus: np.ndarray
    At_plus: np.ndarray
    alpha: float

    @property
    def dimension(self):
        return self.At_minus.shape[0]


def _bordered(A, col):
    n = A.shape[0]
    out = np.zeros((n + 1, n + 1))
    out[:n, :n] = A
    out[:n, n] = col
    return out


def augment_autonomous(lure, alpha):
    Am, Ap = lure.matrices(alpha)
    return AugmentedAutonomousSystem(_bordered(Am, lure.b), _bordered(Ap, lure.b), float(alpha))


@dataclass(frozen=True, eq=False)
class AugmentedForcedSystem:
    """(n+3)-dimensional homogeneous form for the state ``(x, z_c, z_s, z_delta)``."""

    Aext_minus: np.ndarray
    Aext_plus: np.ndarray
    Omega: float
    alpha: float

    @property
    def dimension(self):
        return self.Aext_minus.shape[0]

    @staticmethod
    def omega_direction(n):
        """d(Aext)/d(Omega), common to both subsystems."""
        D = np.zeros((n + 3, n + 3))
        D[n, n + 1] = -1.0
        D[n + 1, n] = 1.0
        return D


def _forced_block(A, b_t, b, Omega):
    n = A.shape[0]
    out = np.zeros((n + 3, n + 3))
    out[:n, :n] = A
    out[:n, n] = b_t
    out[:n, n + 2] = b
    out[n, n + 1] = -Omega
    out[n + 1, n] = Omega
    return out


def augment_forced(lure, alpha, Omega):
    if not Omega > 0:
        raise ValueError(f"excitation frequency must be positive, got {Omega}")
    Am, Ap = lure.matrices(alpha)
    return AugmentedForcedSystem(
        _forced_block(Am, lure.b_t, lure.b, Omega),
        _forced_block(Ap, lure.b_t, lure.b, Omega),
        float(Omega),
        float(alpha),
    )


def energy(x, delta, lure, sys=None):
    """Total energy of a transformed state in the contact-free region
    (exact on the switching plane, where the contact spring is unloaded)."""
    return lure.energy(x, delta)


def contact_gap(q, sys):
    return float(sys.w @ np.asarray(q, dtype=float) - sys.delta)


def jiang_system(delta=1.0, f_amp=0.0, damping=0.0, alpha=None):
    """Two-mass oscillator with a unilateral spring on the first mass.

    ``damping`` sets ``C = damping * K``; ``f_amp`` loads the first mass.
    """
    k1, k2, kn = 1.5, 1.0, 1.5
    K = np.array([[k1, -k1], [-k1, k1 + k2]])
    if alpha is None:
        alpha = 1.0 if damping else 0.0
    return MechanicalSystem(
        M=np.eye(2),
        K=K,
        w=np.array([-1.0, 0.0]),
        kn=kn,
        delta=delta,
        C=damping * K,
        f=np.array([f_amp, 0.0]),
        alpha=alpha,
    )
