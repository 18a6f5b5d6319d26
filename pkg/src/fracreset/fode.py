"""Grünwald-Letnikov time stepping for ``D^alpha x = A x + B u``.

The explicit scheme used throughout is

    x[k+1] = h**alpha * (A x[k] + B u[k]) - sum_{i>=1} w[i] x[k+1-i]

with ``w[i] = (-1)**i * binom(alpha, i)``. At ``alpha = 1`` only ``w[1] = -1``
is nonzero and the scheme is forward Euler.

Reset states need a rule for what happens to their fractional memory when
they jump to zero; see :class:`MemoryMode`.
"""

import enum
from dataclasses import dataclass

import numpy as np

from .errors import HistoryMismatch, IndexOutOfRange, InvalidOrder


class MemoryMode(enum.Enum):
    """How a reset treats the Grünwald-Letnikov history of a reset state.

    ``OFFSET``
        The fractional integral keeps its full memory; the reset subtracts
        the value accumulated so far, so the state restarts from zero while
        its dynamics keep responding to the whole input history. This is the
        convention under which the closed-form FCI describing function holds.
    ``CLEAR``
        All past samples of the reset components are zeroed: the fractional
        integral restarts with its lower terminal at the reset instant.
    ``KEEP``
        Only the newest sample is zeroed; older history is untouched.

    At ``alpha = 1`` the three modes coincide.
    """

    OFFSET = "offset"
    CLEAR = "clear"
    KEEP = "keep"


def _check_order(alpha):
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")


@dataclass(frozen=True)
class GLWeights:
    alpha: float
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)


def gl_weights(alpha, L):
    """Binomial weights ``w_0..w_L`` via ``w_i = w_{i-1} (1 - (alpha+1)/i)``."""
    _check_order(alpha)
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    i = np.arange(1, L + 1, dtype=float)
    w = np.empty(L + 1)
    w[0] = 1.0
    w[1:] = np.cumprod(1.0 - (alpha + 1.0) / i)
    w.flags.writeable = False
    return GLWeights(float(alpha), w)


class GLState:
    """History buffer for one fixed-step fractional simulation.

    Parameters
    ----------
    alpha : float
        Common differentiation order.
    h : float
        Step size in seconds.
    x0 : array_like
        Initial state (sample ``k = 0``).
    memory : int or None
        Number of past samples used by the GL sum. ``None`` keeps the full
        history (exact); a finite value truncates with an O(t**-alpha) tail
        error.
    capacity : int
        Initial buffer length; grows on demand.
    """

    def __init__(self, alpha, h, x0, memory=None, capacity=1024):
        _check_order(alpha)
        if h <= 0:
            raise ValueError(f"step must be positive, got {h}")
        if memory is not None and memory < 1:
            raise ValueError(f"memory length must be >= 1, got {memory}")
        self.alpha = float(alpha)
        self.h = float(h)
        self.memory = memory
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        self.n = x0.size
        self._cap = 0
        self._raw = np.zeros((0, self.n))
        self._grow(max(int(capacity), 2))
        self._raw[0] = x0
        self.count = 1
        # per-component offset subtracted from the raw GL variable (OFFSET mode)
        self.offsets = np.zeros(self.n)

    def _grow(self, cap):
        raw = np.zeros((cap, self.n))
        raw[: self._cap] = self._raw[: self._cap]
        self._raw = raw
        self._cap = cap
        w = gl_weights(self.alpha, cap).weights
        self.weights = w
        # wrev[j] = w[cap - j] so that a trailing slice lines up with history
        self._wrev = np.ascontiguousarray(w[cap:0:-1])

    @property
    def span(self):
        """Number of past samples entering the next GL sum."""
        if self.alpha == 1.0:
            return 1
        m = self.count
        return m if self.memory is None else min(m, self.memory)

    @property
    def history(self):
        """Stored samples in time order (oldest first), as seen by the state."""
        lo = 0 if self.memory is None else max(0, self.count - self.memory)
        return self._raw[lo: self.count] - self.offsets

    @property
    def current(self):
        return self._raw[self.count - 1] - self.offsets

    def memory_sum(self):
        m = self.span
        c = self.count
        return self._wrev[self._cap - m:] @ self._raw[c - m: c]

    def append_raw(self, z):
        if self.count >= self._cap:
            self._grow(2 * self._cap)
        self._raw[self.count] = z
        self.count += 1


def gl_step(model, state, u):
    """Advance ``state`` by one step of ``model`` under input ``u``.

    Appends the new sample to the history and returns the new state vector.
    """
    if abs(model.alpha - state.alpha) > 0.0 or model.A.shape[0] != state.n:
        raise HistoryMismatch(
            f"model (alpha={model.alpha}, n={model.A.shape[0]}) does not match "
            f"history (alpha={state.alpha}, n={state.n})")
    x = state.current
    f = model.A @ x + model.B @ np.atleast_1d(np.asarray(u, dtype=float))
    z = state.h ** state.alpha * f - state.memory_sum()
    state.append_raw(z)
    return z - state.offsets


def reset_history(state, indices, mode=MemoryMode.OFFSET):
    """Zero the listed state components of the newest sample.

    What happens to older samples depends on ``mode``; see
    :class:`MemoryMode`. Mutates and returns ``state``.
    """
    idx = np.asarray(sorted(set(int(i) for i in indices)), dtype=int)
    if idx.size == 0:
        return state
    if idx.min() < 0 or idx.max() >= state.n:
        raise IndexOutOfRange(f"indices {idx.tolist()} outside 0..{state.n - 1}")
    mode = MemoryMode(mode)
    newest = state.count - 1
    if state.alpha == 1.0 or mode is MemoryMode.KEEP:
        state._raw[newest, idx] = state.offsets[idx]
    elif mode is MemoryMode.CLEAR:
        state._raw[: state.count, idx] = 0.0
        state.offsets[idx] = 0.0
    else:
        state.offsets[idx] = state._raw[newest, idx]
    return state
