"""Stability certificates for fractional-order reset loops.

The operative test is the H_beta condition: with the flow matrix mapped to an
integer-order equivalent ``T = -(-A_cl)**(1/(2-alpha))``, the loop is certified
asymptotically stable if, for some ``beta``, the transfer function

    H_beta(s) = [beta C_p, 0, P_R] (sI - T)^-1 [0; 0; I_R]

is strictly positive real. A Lyapunov probe with ``Q = I`` is provided as a
cheaper (and strictly weaker) sufficient check.
"""

import csv
import json
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import (
    DimensionMismatch,
    ImproperTransferFunction,
    NonHurwitzDenominator,
    UnstableFlow,
)
from .numcore import (
    RationalFunction,
    eval_rational,
    lyapunov_solve,
    matrix_fractional_power,
    poly_roots,
    resolvent_expansion,
)

HURWITZ_MARGIN = 1e-9
OMEGA_GRID = np.logspace(-4, 4, 2000)


def transformed_flow(sys):
    """``-(-A_cl)**(1/(2-alpha))``, required to be real and Hurwitz."""
    T = matrix_fractional_power(sys.A_cl, sys.alpha)
    if np.iscomplexobj(T):
        raise UnstableFlow("transformed flow matrix is genuinely complex")
    lam = np.linalg.eigvals(T)
    if np.any(lam.real >= -HURWITZ_MARGIN):
        raise UnstableFlow(
            f"transformed flow matrix is not Hurwitz (max Re = {lam.real.max():.4g})")
    return T


def _p_r(P_R):
    P = np.atleast_2d(np.asarray(1.0 if P_R is None else P_R, dtype=float))
    if P.shape != (1, 1):
        raise DimensionMismatch("only single reset-state loops are supported (P_R must be 1x1)")
    if P[0, 0] <= 0:
        raise ValueError("P_R must be positive definite")
    return float(P[0, 0])


@dataclass(frozen=True)
class HBeta:
    """``H_beta = (num0 + beta * num1) / den``."""

    num0: tuple
    num1: tuple
    den: tuple
    flow: np.ndarray = field(repr=False, compare=False, default=None)

    def num(self, beta):
        n = max(len(self.num0), len(self.num1))
        a = np.pad(np.asarray(self.num0), (n - len(self.num0), 0))
        b = np.pad(np.asarray(self.num1), (n - len(self.num1), 0))
        return a + beta * b

    def at(self, beta):
        return RationalFunction(self.num(beta), self.den)


def h_beta_affine(sys, P_R=None):
    """Affine-in-beta pieces of ``H_beta`` via the Leverrier-Faddeev resolvent."""
    p = _p_r(P_R)
    ridx = sys.reset_indices
    if ridx.size != 1:
        raise DimensionMismatch(f"expected one reset state, got {ridx.size}")
    T = transformed_flow(sys)
    den, mats = resolvent_expansion(T)
    n = sys.n
    col = np.zeros(n)
    col[ridx[0]] = 1.0
    row0 = np.zeros(n)
    row0[ridx[0]] = p
    row1 = np.zeros(n)
    plant = sys.layout.get("plant", slice(0, 0))
    row1[plant] = sys.C_cl[0, plant]
    num0 = np.array([row0 @ M @ col for M in mats])
    num1 = np.array([row1 @ M @ col for M in mats])
    return HBeta(_trim(num0), _trim(num1), tuple(den), T)


def _trim(c, rel=1e-12):
    """Drop leading coefficients that are zero up to rounding."""
    c = np.asarray(c, dtype=float)
    big = np.flatnonzero(np.abs(c) > rel * max(np.max(np.abs(c)), 1e-300))
    return tuple(c[big[0]:]) if big.size else (0.0,)


def build_h_beta(sys, beta, P_R=None):
    return h_beta_affine(sys, P_R).at(beta)


@dataclass(frozen=True)
class SPRResult:
    is_spr: bool
    margin_deg: float
    worst_omega: float


def _check_tf(H):
    if H.relative_degree < 1:
        raise ImproperTransferFunction(
            f"H must be strictly proper (relative degree {H.relative_degree})")
    roots = poly_roots(H.den)
    if np.any(roots.real >= -HURWITZ_MARGIN):
        raise NonHurwitzDenominator(f"denominator roots {roots} not all in Re < 0")


def spr_check(H, omega_grid=None):
    """Phase test ``|arg H(jw)| < 90 deg`` on a grid plus the w -> 0, inf limits."""
    _check_tf(H)
    w = OMEGA_GRID if omega_grid is None else np.asarray(omega_grid, dtype=float)
    phase = np.degrees(np.angle(eval_rational(H, 1j * w)))
    k = int(np.argmax(np.abs(phase)))
    margin = 90.0 - abs(phase[k])
    lead_sign = np.sign(H.num[0] * H.den[0])
    ok = bool(np.all(np.abs(phase) < 90.0) and H.dc_gain > 0.0
              and H.relative_degree == 1 and lead_sign > 0)
    return SPRResult(ok, float(margin), float(w[k]))


def phase_curve(H, omega_grid=None):
    w = OMEGA_GRID if omega_grid is None else np.asarray(omega_grid, dtype=float)
    return w, np.degrees(np.angle(eval_rational(H, 1j * w)))


def _jw_poly(coeffs):
    """Coefficients (in w, descending) of ``p(jw)``."""
    c = np.asarray(coeffs, dtype=float)
    deg = np.arange(len(c) - 1, -1, -1)
    return c * (1j ** deg)


def _real_part_poly(num, den):
    """Coefficients of ``Re[num(jw) conj(den(jw))]`` as a polynomial in w."""
    return np.real(np.polymul(_jw_poly(num), np.conj(_jw_poly(den))))


def _leading_sign(c, tol=1e-12):
    c = np.asarray(c, dtype=float)
    scale = max(np.max(np.abs(c), initial=0.0), 1e-300)
    nz = np.flatnonzero(np.abs(c) > tol * scale)
    return 0.0 if nz.size == 0 else float(np.sign(c[nz[0]]))


@dataclass(frozen=True)
class BetaInterval:
    lo: float = None
    hi: float = None
    runs: tuple = ()

    @property
    def empty(self):
        return self.lo is None

    def __contains__(self, beta):
        return not self.empty and self.lo <= beta <= self.hi

    def as_list(self):
        return None if self.empty else [self.lo, self.hi]


class _ReTest:
    """``Re H_beta(jw) > 0`` test; the beta-free parts are evaluated once."""

    def __init__(self, hb, omega_grid):
        w = np.asarray(omega_grid, dtype=float)
        jw = 1j * w
        D = eval_rational(RationalFunction([1.0], hb.den), jw)  # 1/den(jw)
        self.g0 = np.real(np.polyval(hb.num(0.0), jw) * D)
        self.g1 = np.real(np.polyval(hb.num(1.0) - hb.num(0.0), jw) * D)
        self.hb = hb
        self.w = w
        R0 = _real_part_poly(hb.num(0.0), hb.den)
        R1 = _real_part_poly(hb.num(1.0) - hb.num(0.0), hb.den)
        n = max(len(R0), len(R1))
        self.R0 = np.pad(R0, (n - len(R0), 0))
        self.R1 = np.pad(R1, (n - len(R1), 0))

    def __call__(self, beta):
        hb = self.hb
        if not np.all(self.g0 + beta * self.g1 > 0.0):
            return False
        dc = (hb.num(beta)[-1]) / hb.den[-1]
        if not dc > 0.0:
            return False
        return _leading_sign(self.R0 + beta * self.R1) > 0.0

    def phase_ok(self, beta):
        H = self.hb.at(beta)
        return spr_check(H, self.w).is_spr


def _refine(test, good, bad, tol):
    while abs(bad - good) > tol:
        mid = 0.5 * (good + bad)
        if test(mid):
            good = mid
        else:
            bad = mid
    return good


def beta_interval(sys, P_R=None, beta_range=(-5.0, 5.0), omega_grid=None,
                  step=0.01, tol=1e-4):
    """Feasible beta set of the H_beta condition.

    Scans ``beta_range`` with spacing ``step`` using ``Re H_beta(jw) > 0`` on
    ``omega_grid`` (plus the w -> 0 and w -> inf limits), then bisects each
    endpoint of every passing run down to ``tol``. The widest run is
    reported as ``(lo, hi)``; all runs are kept in ``runs``.

    Raises
    ------
    UnstableFlow
        Propagated from :func:`h_beta_affine` when the flow is not stable.
    """
    hb = h_beta_affine(sys, P_R)
    w = OMEGA_GRID if omega_grid is None else omega_grid
    test = _ReTest(hb, w)
    lo_b, hi_b = beta_range
    betas = np.linspace(lo_b, hi_b, int(round((hi_b - lo_b) / step)) + 1)
    passed = np.array([test(b) for b in betas])

    mismatch = [float(b) for b, ok in zip(betas, passed) if ok != test.phase_ok(b)]
    if mismatch:
        warnings.warn(f"Re-part and phase tests disagree at beta = {mismatch[:5]}",
                      RuntimeWarning, stacklevel=2)

    runs = []
    k = 0
    while k < len(betas):
        if not passed[k]:
            k += 1
            continue
        j = k
        while j + 1 < len(betas) and passed[j + 1]:
            j += 1
        lo = betas[k] if k == 0 else _refine(test, betas[k], betas[k - 1], tol)
        hi = betas[j] if j == len(betas) - 1 else _refine(test, betas[j], betas[j + 1], tol)
        runs.append((float(lo), float(hi)))
        k = j + 1
    if not runs:
        return BetaInterval()
    lo, hi = max(runs, key=lambda r: r[1] - r[0])
    return BetaInterval(lo, hi, tuple(runs))


@dataclass(frozen=True)
class LyapunovResult:
    verdict: bool
    P: np.ndarray = None
    note: str = ""


def lyapunov_check(sys):
    """Probe the Lyapunov conditions with ``Q = I``.

    Solves ``T.T P + P T = -I`` and accepts if ``P > 0`` and
    ``A_R.T P A_R - P <= 0``. A negative answer is inconclusive: only one
    ``Q`` is tried.
    """
    try:
        T = transformed_flow(sys)
    except (UnstableFlow, ArithmeticError) as exc:
        return LyapunovResult(False, None, f"flow not stable: {exc}")
    P = lyapunov_solve(T, np.eye(sys.n))
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        return LyapunovResult(False, P, "inconclusive (Q=I probe): P not positive definite")
    jump = sys.A_R.T @ P @ sys.A_R - P
    if np.max(np.linalg.eigvalsh(0.5 * (jump + jump.T))) <= 1e-9:
        return LyapunovResult(True, P, "certified (Q=I probe)")
    return LyapunovResult(False, P, "inconclusive (Q=I probe): jump condition fails")


STABLE = "stable (H_beta)"
NOT_CERTIFIED = "stability cannot be guaranteed"


@dataclass
class StabilityReport:
    h_beta: HBeta
    interval: BetaInterval
    phase_margins: dict
    lyapunov: LyapunovResult
    verdict: str
    notes: list = field(default_factory=list)

    def to_dict(self):
        hb = None if self.h_beta is None else {
            "num0": list(self.h_beta.num0),
            "num1": list(self.h_beta.num1),
            "den": list(self.h_beta.den),
        }
        return {
            "verdict": self.verdict,
            "h_beta": hb,
            "beta_interval": self.interval.as_list(),
            "beta_runs": [list(r) for r in self.interval.runs],
            "phase_margins": {f"{b:g}": m for b, m in self.phase_margins.items()},
            "lyapunov": {
                "verdict": self.lyapunov.verdict,
                "note": self.lyapunov.note,
                "P": None if self.lyapunov.P is None else self.lyapunov.P.tolist(),
            },
            "notes": list(self.notes),
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }

    def to_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)

    def phase_csv(self, path, betas, omega_grid=None):
        """Phase of ``H_beta(jw)`` in degrees, one column per beta."""
        if self.h_beta is None:
            raise UnstableFlow("no H_beta available for an unstable flow")
        cols = []
        for b in betas:
            w, ph = phase_curve(self.h_beta.at(b), omega_grid)
            cols.append(ph)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["omega"] + [f"phase_deg_beta={b:g}" for b in betas])
            for i, wi in enumerate(w):
                wr.writerow([f"{wi:.17g}"] + [f"{c[i]:.17g}" for c in cols])


def stability_report(sys, P_R=None, beta_range=(-5.0, 5.0), sample_betas=(),
                     omega_grid=None):
    """Run the H_beta search and the Lyapunov probe, and cross-check them."""
    notes = []
    try:
        hb = h_beta_affine(sys, P_R)
        interval = beta_interval(sys, P_R, beta_range, omega_grid)
    except UnstableFlow as exc:
        hb, interval = None, BetaInterval()
        notes.append(f"H_beta unavailable: {exc}")
    margins = {}
    if hb is not None:
        for b in sample_betas:
            margins[float(b)] = spr_check(hb.at(b), omega_grid).margin_deg
    lyap = lyapunov_check(sys)
    verdict = STABLE if not interval.empty else NOT_CERTIFIED
    if lyap.verdict and interval.empty:
        notes.append("Lyapunov probe certifies stability but no feasible beta was found")
    elif not lyap.verdict and not interval.empty:
        notes.append(f"Lyapunov probe {lyap.note}; H_beta condition certifies stability")
    return StabilityReport(hb, interval, margins, lyap, verdict, notes)
