"""Fixed-step simulation of closed-loop reset systems and step-response metrics."""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import Divergence, EmptyTrajectory
from .fode import GLState, MemoryMode, gl_step, reset_history

DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class Sinusoid:
    """Reference ``amplitude * sin(omega * t)``."""

    amplitude: float
    omega: float

    def __call__(self, t):
        return self.amplitude * np.sin(self.omega * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SimulationConfig:
    step: float = 1e-3
    horizon: float = 30.0
    reference: object = 1.0
    memory_mode: MemoryMode = MemoryMode.OFFSET
    tolerance: float = 1e-9
    memory: int = None

    def __post_init__(self):
        if not 0.0 < self.step < self.horizon:
            raise ValueError(f"need 0 < step < horizon, got step={self.step}, horizon={self.horizon}")
        if self.horizon / self.step > 1e7:
            raise ValueError("horizon/step exceeds 1e7 steps")
        object.__setattr__(self, "memory_mode", MemoryMode(self.memory_mode))

    @property
    def n_steps(self):
        return int(round(self.horizon / self.step))

    def reference_samples(self, t):
        if callable(self.reference):
            return np.asarray(self.reference(t), dtype=float)
        return np.full(np.shape(t), float(self.reference))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    y: np.ndarray
    u_r: np.ndarray
    reset_times: list = field(default_factory=list)
    reset_steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.times)

    def to_csv(self, path):
        """Write ``t,y,u_r,x_0..x_{n-1}`` rows with 17 significant digits."""
        n = self.states.shape[1]
        header = ",".join(["t", "y", "u_r"] + [f"x_{i}" for i in range(n)])
        data = np.column_stack([self.times, self.y, self.u_r, self.states])
        np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="")

    def resets_to_json(self, path):
        with open(path, "w") as fh:
            json.dump([float(f"{t:.17g}") for t in self.reset_times], fh)


def simulate(sys, cfg=SimulationConfig()):
    """Simulate ``sys`` on the fixed grid ``t_k = k * cfg.step``.

    Between resets the state advances by one Grünwald-Letnikov step. A reset
    fires at ``t_{k+1}`` when the error ``e = r - y`` changes sign over
    ``[t_k, t_{k+1}]`` or ``|e(t_{k+1})| <= cfg.tolerance``, provided some reset
    component is nonzero and no reset fired at ``t_k``.

    Raises
    ------
    Divergence
        ``max|x| > 1e12``; the partial trajectory is attached to the error.
    """
    h = cfg.step
    N = cfg.n_steps
    n = sys.n
    times = np.arange(N + 1) * h
    ref = cfg.reference_samples(times)
    model = sys.flow_model
    C = sys.C_cl[0]
    Cu = sys.C_ur[0]
    ridx = sys.reset_indices
    jump_mask = np.diag(sys.A_R) == 0.0

    X = np.zeros((N + 1, n))
    state = GLState(sys.alpha, h, X[0], memory=cfg.memory, capacity=N + 2)
    reset_times, reset_steps = [], []
    e_prev = ref[0] - C @ X[0]
    last = -2

    for k in range(N):
        x = gl_step(model, state, ref[k])
        e = ref[k + 1] - C @ x
        crossing = e_prev * e < 0.0 or abs(e) <= cfg.tolerance
        if ridx.size and crossing and k + 1 - last > 1 and np.any(x[jump_mask] != 0.0):
            reset_history(state, ridx, cfg.memory_mode)
            x = state.current
            reset_times.append(times[k + 1])
            reset_steps.append(k + 1)
            last = k + 1
        X[k + 1] = x
        e_prev = ref[k + 1] - C @ x
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            part = _trajectory(times[: k + 2], X[: k + 2], C, Cu, reset_times, reset_steps)
            raise Divergence(f"state exceeded {DIVERGENCE_LIMIT:g} at t = {times[k + 1]:g}", part)

    return _trajectory(times, X, C, Cu, reset_times, reset_steps)


def _trajectory(times, X, C, Cu, reset_times, reset_steps):
    return Trajectory(times, X, X @ C, X @ Cu, list(reset_times), list(reset_steps))


@dataclass(frozen=True)
class StepMetrics:
    overshoot: float
    peak_time: float
    settling_time: float
    steady_state_error: float
    settled: bool
    final_value: float


def step_metrics(traj, r=1.0, band=0.02, tail=0.05):
    """Overshoot, peak time, settling time and steady-state error of a step response.

    The final value is the mean of the trailing ``tail`` fraction of samples.
    Settling time is the first grid time after which ``y`` stays within
    ``band * |y_final|`` of the final value; if the last sample is outside
    the band, ``settled`` is False and the settling time is ``nan``.
    """
    y = np.asarray(traj.y, dtype=float)
    t = np.asarray(traj.times, dtype=float)
    if y.size == 0:
        raise EmptyTrajectory("trajectory has no samples")
    n_tail = max(1, int(round(tail * y.size)))
    y_inf = float(np.mean(y[-n_tail:]))
    k_peak = int(np.argmax(y))
    if y_inf != 0.0:
        overshoot = max(0.0, (y[k_peak] - y_inf) / y_inf)
    else:
        overshoot = np.inf if y[k_peak] > 0 else 0.0
    outside = np.flatnonzero(np.abs(y - y_inf) > band * abs(y_inf))
    if outside.size == 0:
        settling, settled = float(t[0]), True
    elif outside[-1] == y.size - 1:
        settling, settled = float("nan"), False
    else:
        settling, settled = float(t[outside[-1] + 1]), True
    return StepMetrics(
        overshoot=float(overshoot),
        peak_time=float(t[k_peak]),
        settling_time=settling,
        steady_state_error=float(r - y_inf),
        settled=settled,
        final_value=y_inf,
    )
