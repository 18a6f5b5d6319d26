"""State-space models for fractional-order reset control loops.

Closed-loop layout (plant, linear controller, reset controller)::

    D^a x = A_cl x + B_cl r,    x not on the reset surface
    x+    = A_R x,              x on the reset surface
    y     = C_cl x

with

    A_cl = [[ A_p,       B_p C_c, 0      ],
            [ 0,         A_c,     B_c C_r],
            [-B_r C_p,   0,       A_r    ]]

and ``A_R = blockdiag(I, I, A_Rr)``, ``A_Rr = blockdiag(I, 0)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import numpy as np
from scipy.linalg import block_diag

from .errors import (
    AlreadyFractional,
    DimensionMismatch,
    InvalidOrder,
    NonReciprocalOrder,
    OrderMismatch,
)


def _mat(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim == 1:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {a.shape}")
    a = a.copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class StateSpaceModel:
    """``D^alpha x = A x + B u``, ``y = C x``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    alpha: float = 1.0

    def __post_init__(self):
        A, B, C = _mat(self.A, "A"), _mat(self.B, "B"), _mat(self.C, "C")
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape[0] != n:
            raise DimensionMismatch(f"B has {B.shape[0]} rows, expected {n}")
        if C.shape[1] != n:
            raise DimensionMismatch(f"C has {C.shape[1]} columns, expected {n}")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidOrder(f"alpha must lie in (0, 1], got {self.alpha}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "alpha", float(self.alpha))

    @property
    def n(self):
        return self.A.shape[0]

    def frequency_response(self, omega):
        """``C ((j w)^alpha I - A)^-1 B`` for SISO models, vectorised over ``omega``."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        s_a = (1j * omega) ** self.alpha
        I = np.eye(self.n)
        out = np.empty(omega.shape, dtype=complex)
        for k, sk in enumerate(s_a):
            out[k] = (self.C @ np.linalg.solve(sk * I - self.A, self.B))[0, 0]
        return out


def tf_to_ss(num, den, alpha=1.0):
    """Controllable canonical realisation of a strictly proper ``num/den``.

    ``A`` is the companion matrix with the negated, normalised denominator
    coefficients in its last row; ``C`` carries the numerator coefficients in
    ascending powers.
    """
    num = np.trim_zeros(np.atleast_1d(np.asarray(num, dtype=float)), "f")
    den = np.trim_zeros(np.atleast_1d(np.asarray(den, dtype=float)), "f")
    if den.size < 2:
        raise DimensionMismatch("denominator must have degree >= 1")
    if num.size >= den.size:
        raise DimensionMismatch(
            f"transfer function is not strictly proper (deg num {num.size - 1} "
            f">= deg den {den.size - 1})")
    n = den.size - 1
    a = den / den[0]
    b = np.zeros(n)
    if num.size:
        b[n - num.size:] = num / den[0]
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -a[:0:-1]
    B = np.zeros((n, 1))
    B[-1, 0] = 1.0
    C = b[::-1].reshape(1, n)
    return StateSpaceModel(A, B, C, alpha)


@dataclass(frozen=True)
class ResetRule:
    """Reset matrix ``A_Rr = blockdiag(I_{n_keep}, 0_{n_reset})``."""

    n_reset: int
    n_keep: int = 0

    def __post_init__(self):
        if self.n_reset < 0 or self.n_keep < 0:
            raise DimensionMismatch("state counts must be non-negative")

    @property
    def matrix(self):
        return block_diag(np.eye(self.n_keep), np.zeros((self.n_reset, self.n_reset))) \
            if self.n_keep + self.n_reset else np.zeros((0, 0))

    @classmethod
    def from_matrix(cls, A_R):
        A_R = np.asarray(A_R, dtype=float)
        n = A_R.shape[0]
        d = np.diag(A_R)
        n_keep = int(np.sum(d == 1.0))
        rule = cls(n_reset=n - n_keep, n_keep=n_keep)
        if not np.array_equal(rule.matrix, A_R):
            raise DimensionMismatch(
                "reset matrix must be blockdiag(I, 0) with entries in {0, 1}")
        return rule


@dataclass(frozen=True)
class ClosedLoopResetSystem:
    """Assembled loop.

    ``layout`` maps block names (``plant``, ``controller``, ``reset``) to
    state slices; ``C_ur`` reads the reset controller output ``u_r`` off the
    full state.
    """

    A_cl: np.ndarray
    B_cl: np.ndarray
    C_cl: np.ndarray
    A_R: np.ndarray
    alpha: float
    layout: dict = field(default_factory=dict)
    C_ur: np.ndarray = None

    def __post_init__(self):
        for name in ("A_cl", "B_cl", "C_cl", "A_R"):
            object.__setattr__(self, name, _mat(getattr(self, name), name))
        n = self.A_cl.shape[0]
        if self.C_ur is None:
            object.__setattr__(self, "C_ur", _mat(np.zeros((1, n)), "C_ur"))
        else:
            object.__setattr__(self, "C_ur", _mat(self.C_ur, "C_ur"))
        if self.A_cl.shape != (n, n) or self.A_R.shape != (n, n):
            raise DimensionMismatch("A_cl and A_R must be n x n")
        if self.B_cl.shape != (n, 1) or self.C_cl.shape != (1, n):
            raise DimensionMismatch("B_cl must be n x 1 and C_cl 1 x n")
        if not np.all(np.isin(self.A_R, (0.0, 1.0))) or \
                not np.array_equal(self.A_R @ self.A_R, self.A_R):
            raise DimensionMismatch("A_R must be an idempotent 0/1 matrix")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidOrder(f"alpha must lie in (0, 1], got {self.alpha}")

    @property
    def n(self):
        return self.A_cl.shape[0]

    @property
    def reset_indices(self):
        return np.flatnonzero(np.diag(self.A_R) == 0.0)

    @property
    def flow_model(self):
        return StateSpaceModel(self.A_cl, self.B_cl, self.C_cl, self.alpha)

    def block(self, row, col):
        return self.A_cl[self.layout[row], self.layout[col]]

    def without_reset(self):
        """Same flow with resets disabled (``A_R = I``)."""
        return ClosedLoopResetSystem(self.A_cl, self.B_cl, self.C_cl,
                                     np.eye(self.n), self.alpha, dict(self.layout),
                                     self.C_ur)


def reciprocal_order(alpha):
    """Return ``p = 1/alpha`` if it is a positive integer, else raise."""
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")
    p = round(1.0 / alpha)
    if p < 1 or abs(p * alpha - 1.0) > 1e-12:
        raise NonReciprocalOrder(f"1/alpha = {1.0 / alpha:g} is not an integer")
    return p


def augment_integer_order(sys, target_alpha):
    """Rewrite an integer-order model as a commensurate order-``target_alpha`` one.

    With ``p = 1/target_alpha`` the augmented state is ``[x, x_a1, ..., x_a(p-1)]``::

        A_aug = [[0, I, 0, ..., 0],
                 [0, 0, I, ..., 0],
                 ...
                 [0, 0, 0, ..., I],
                 [A, 0, 0, ..., 0]]

    ``B_aug = [0; ...; 0; B]`` and ``C_aug = [C, 0, ..., 0]``.
    """
    if sys.alpha != 1.0:
        raise AlreadyFractional(f"model already has order {sys.alpha}")
    p = reciprocal_order(target_alpha)
    if p == 1:
        return sys
    n = sys.n
    m = sys.B.shape[1]
    A = np.zeros((p * n, p * n))
    A[: (p - 1) * n, n:] = np.eye((p - 1) * n)
    A[(p - 1) * n:, :n] = sys.A
    B = np.zeros((p * n, m))
    B[(p - 1) * n:, :] = sys.B
    C = np.zeros((sys.C.shape[0], p * n))
    C[:, :n] = sys.C
    return StateSpaceModel(A, B, C, target_alpha)


def common_order(*orders):
    """Finest commensurate order ``1/lcm(1/alpha_i)`` of the given orders."""
    ps = [reciprocal_order(a) for a in orders]
    return float(Fraction(1, lcm(*ps)))


def to_order(sys, alpha):
    """Bring ``sys`` to order ``alpha`` (augmenting integer-order models)."""
    if sys.alpha == alpha:
        return sys
    if sys.alpha == 1.0:
        return augment_integer_order(sys, alpha)
    # fractional model of order a to order a/q: D^a = (D^{a/q})^q
    q = round(sys.alpha / alpha)
    if q < 1 or abs(q * alpha - sys.alpha) > 1e-12:
        raise OrderMismatch(f"cannot bring order {sys.alpha} to {alpha}")
    base = StateSpaceModel(sys.A, sys.B, sys.C, 1.0)
    aug = augment_integer_order(base, 1.0 / q)
    return StateSpaceModel(aug.A, aug.B, aug.C, alpha)


def assemble_closed_loop(plant, lin_ctrl, reset_ctrl, rule):
    """Assemble the closed loop from plant, optional linear controller and reset element.

    All three models must share the same order (augment beforehand). With
    ``lin_ctrl=None`` the reset controller drives the plant directly and the
    middle block row/column disappears.
    """
    models = [m for m in (plant, lin_ctrl, reset_ctrl) if m is not None]
    orders = {m.alpha for m in models}
    if len(orders) != 1:
        raise OrderMismatch(f"subsystems have different orders {sorted(orders)}")
    alpha = orders.pop()
    if reset_ctrl.n == 0:
        raise DimensionMismatch("reset controller has no states")
    if rule.n_reset + rule.n_keep != reset_ctrl.n:
        raise DimensionMismatch(
            f"reset rule covers {rule.n_reset + rule.n_keep} states, controller has {reset_ctrl.n}")
    for m in models:
        if m.B.shape[1] != 1 or m.C.shape[0] != 1:
            raise DimensionMismatch("only SISO subsystems are supported")

    n_p = plant.n
    n_c = lin_ctrl.n if lin_ctrl is not None else 0
    n_r = reset_ctrl.n
    n = n_p + n_c + n_r
    sp = slice(0, n_p)
    sc = slice(n_p, n_p + n_c)
    sr = slice(n_p + n_c, n)

    A = np.zeros((n, n))
    A[sp, sp] = plant.A
    A[sr, sp] = -reset_ctrl.B @ plant.C
    A[sr, sr] = reset_ctrl.A
    if lin_ctrl is not None:
        A[sp, sc] = plant.B @ lin_ctrl.C
        A[sc, sc] = lin_ctrl.A
        A[sc, sr] = lin_ctrl.B @ reset_ctrl.C
    else:
        A[sp, sr] = plant.B @ reset_ctrl.C

    B = np.zeros((n, 1))
    B[sr] = reset_ctrl.B
    C = np.zeros((1, n))
    C[:, sp] = plant.C
    C_ur = np.zeros((1, n))
    C_ur[:, sr] = reset_ctrl.C
    A_R = block_diag(np.eye(n_p + n_c), rule.matrix)
    layout = {"plant": sp, "controller": sc, "reset": sr}
    return ClosedLoopResetSystem(A, B, C, A_R, alpha, layout, C_ur)


def on_reset_surface(sys, x, tol=1e-9):
    """True iff ``|C_cl x| <= tol`` and ``||(I - A_R) x||_inf > tol``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != sys.n:
        raise DimensionMismatch(f"state has {x.size} entries, expected {sys.n}")
    out = abs(float((sys.C_cl @ x)[0]))
    jump = np.max(np.abs(x - sys.A_R @ x), initial=0.0)
    return bool(out <= tol and jump > tol)


RESET_KINDS = ("CI", "FORE", "FCI")
ELEMENT_KINDS = ("CI", "FORE", "FCI", "FI", "II")


@dataclass(frozen=True)
class ResetElement:
    """One-state compensator ``K / (s^alpha + b)``, with or without Clegg reset.

    ``CI``   Clegg integrator, ``K/s`` with reset.
    ``FORE`` first-order reset element, ``K/(s + b)`` with reset.
    ``FCI``  fractional Clegg integrator, ``K/s^alpha`` with reset.
    ``FI``   fractional integrator ``K/s^alpha`` (linear).
    ``II``   integer integrator ``K/s`` (linear).
    """

    kind: str
    K: float = 1.0
    b: float = 0.0
    alpha: float = 1.0

    def __post_init__(self):
        kind = self.kind.upper()
        if kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind in ("CI", "FORE", "II"):
            object.__setattr__(self, "alpha", 1.0)
        if kind != "FORE":
            object.__setattr__(self, "b", 0.0)
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidOrder(f"alpha must lie in (0, 1], got {self.alpha}")
        if self.K == 0:
            raise ValueError("gain K must be nonzero")

    @property
    def resets(self):
        return self.kind in RESET_KINDS

    def model(self):
        return StateSpaceModel([[-self.b]], [[1.0]], [[self.K]], self.alpha)

    def rule(self):
        return ResetRule(n_reset=1) if self.resets else ResetRule(n_reset=0, n_keep=1)

    def open_loop(self):
        """The element on its own, driven directly by the reference.

        ``C_cl`` is zero so the error seen by the reset law is the input
        itself; the element output is read through ``C_ur``.
        """
        m = self.model()
        return ClosedLoopResetSystem(m.A, m.B, np.zeros((1, 1)), self.rule().matrix,
                                     m.alpha, {"reset": slice(0, 1)}, m.C)
