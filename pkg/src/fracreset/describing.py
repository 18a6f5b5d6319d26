"""Describing functions of Clegg-type reset elements.

Closed forms for FORE, CI and FCI, the linear references FI and II, and a
simulation-based first-harmonic estimate used to cross-check them.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InvalidOrder, NotPeriodic
from .fode import MemoryMode
from .models import ResetElement
from .simreset import SimulationConfig, Sinusoid, simulate


def _check(alpha):
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")


def df_fore(K, b, omega):
    """FORE ``K/(s+b)`` with zero-crossing reset."""
    omega = np.asarray(omega, dtype=float)
    corr = 2.0 * omega**2 * (1.0 + np.exp(-b * np.pi / omega)) / (np.pi * (b**2 + omega**2))
    return K / (b + 1j * omega) * (1.0 + 1j * corr)


def df_ci(omega):
    omega = np.asarray(omega, dtype=float)
    return 4.0 / (np.pi * omega) * (1.0 - 1j * np.pi / 4.0)


def df_fci(alpha, omega):
    _check(alpha)
    omega = np.asarray(omega, dtype=float)
    half = alpha * np.pi / 2.0
    return 4.0 / (np.pi * omega**alpha) * (np.sin(half) + np.pi / 4.0 * np.exp(-1j * half))


def df_fi(alpha, omega):
    """Frequency response of the linear fractional integrator ``1/s^alpha``."""
    _check(alpha)
    return (1j * np.asarray(omega, dtype=float)) ** (-alpha)


def describing_function(element, omega):
    """Closed-form describing function of ``element`` at ``omega``."""
    kind = element.kind
    if kind == "FORE":
        return df_fore(element.K, element.b, omega)
    if kind == "CI":
        return element.K * df_ci(omega)
    if kind == "FCI":
        return element.K * df_fci(element.alpha, omega)
    if kind == "FI":
        return element.K * df_fi(element.alpha, omega)
    return element.K * df_fi(1.0, omega)


def phase_lead(kind, alpha):
    """Phase advance over the integer integrator, in degrees.

    FCI: ``90 + arg N_FCI`` (independent of frequency). FI: ``(1 - alpha) * 90``.
    """
    _check(alpha)
    kind = kind.upper()
    if kind == "FCI":
        return 90.0 + float(np.degrees(np.angle(df_fci(alpha, 1.0))))
    if kind == "FI":
        return (1.0 - alpha) * 90.0
    raise ValueError(f"phase lead defined for FCI and FI, not {kind!r}")


def numerical_df(element, amplitude, omega, step=None, cycles=10,
                 memory_mode=MemoryMode.OFFSET, rms_tol=0.01):
    """First-harmonic describing function from a simulated response.

    Drives ``element`` with ``amplitude * sin(omega t)`` for ``cycles``
    periods and integrates the output of the last complete period that
    starts at a rising zero crossing of the input (a reset instant for
    reset elements)::

        N = (j omega / (pi A)) * integral_{t0}^{t0 + 2 pi/omega} y(t) exp(-j omega (t - t0)) dt

    For half-wave symmetric outputs this equals the usual half-period
    formula; the full period also rejects the DC offset that linear
    integrators carry.

    Raises
    ------
    NotPeriodic
        RMS of the last two periods differs by more than ``rms_tol``.
    """
    period = 2.0 * np.pi / omega
    if step is None:
        step = period / 2000.0
    if step > period / 1000.0:
        raise ValueError(f"step {step:g} too coarse; need <= 2*pi/(1000*omega)")
    cfg = SimulationConfig(step=step, horizon=cycles * period,
                           reference=Sinusoid(amplitude, omega),
                           memory_mode=memory_mode)
    traj = simulate(element.open_loop(), cfg)
    t, y = traj.times, traj.u_r
    per = int(round(period / step))
    if len(t) < 2 * per + 1:
        raise NotPeriodic("need at least two full periods")

    n_full = int(np.floor(t[-1] / period + 1e-9))
    k0 = int(round((n_full - 1) * period / step))
    if element.resets and traj.reset_steps:
        # nearest reset to the rising crossing, keeps the origin on a reset instant
        cand = [k for k in traj.reset_steps if k + per < len(t)]
        rising = [k for k in cand if np.sin(omega * t[k] + 0.5 * omega * step) > 0]
        if rising:
            k0 = rising[-1]
    seg = slice(k0, k0 + per + 1)
    prev = slice(k0 - per, k0 + 1)
    rms_last = np.sqrt(np.trapezoid(y[seg] ** 2, t[seg]) / period)
    rms_prev = np.sqrt(np.trapezoid(y[prev] ** 2, t[prev]) / period)
    if abs(rms_last - rms_prev) > rms_tol * max(rms_last, 1e-300):
        raise NotPeriodic(f"RMS changed by {abs(rms_last - rms_prev) / rms_last:.2%} "
                          "over the last two periods")
    tt = t[seg] - t[k0]
    integrand = y[seg] * np.exp(-1j * omega * tt)
    return complex(1j * omega / (np.pi * amplitude) * np.trapezoid(integrand, tt))


@dataclass(frozen=True)
class DescribingFunctionPoint:
    kind: str
    alpha: float
    amplitude: float
    omega: float
    value: complex

    @property
    def mag_db(self):
        return 20.0 * np.log10(abs(self.value))

    @property
    def phase_deg(self):
        return float(np.degrees(np.angle(self.value)))


def df_table(elements, omegas, amplitude=1.0):
    """Closed-form describing-function points for each element and frequency."""
    rows = []
    for el in elements:
        for w in np.atleast_1d(omegas):
            rows.append(DescribingFunctionPoint(el.kind, el.alpha, amplitude, float(w),
                                                complex(describing_function(el, w))))
    return rows


def write_df_csv(points, path):
    """CSV with columns ``kind,alpha,omega,re,im,mag_db,phase_deg``."""
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["kind", "alpha", "omega", "re", "im", "mag_db", "phase_deg"])
        for p in points:
            wr.writerow([p.kind, f"{p.alpha:.17g}", f"{p.omega:.17g}",
                         f"{p.value.real:.17g}", f"{p.value.imag:.17g}",
                         f"{p.mag_db:.17g}", f"{p.phase_deg:.17g}"])


__all__ = [
    "ResetElement", "df_fore", "df_ci", "df_fci", "df_fi", "describing_function",
    "phase_lead", "numerical_df", "DescribingFunctionPoint", "df_table", "write_df_csv",
]
