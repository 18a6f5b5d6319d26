"""Small dense linear-algebra kernels.

Everything here targets the handful-of-states systems that appear in reset
control loops (n <= 10 in practice, hard cap 32). Functions are pure; inputs
are never modified.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BranchCutViolation,
    ConvergenceFailure,
    IllConditionedEigenbasis,
    InvalidOrder,
    NonSquare,
    PoleHit,
    SingularLyapunovOperator,
)

MAX_DIM = 32
REALIFY_TOL = 1e-8
COND_LIMIT = 1e12


def _square(M, name="matrix"):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"{name} must be square, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise ValueError(f"{name} has dimension {M.shape[0]} > {MAX_DIM}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def eig(M):
    """Eigen-decomposition with a deterministic ordering.

    Eigenvalues are sorted by real part (descending), ties broken by
    imaginary part (descending). Eigenvectors are the matching columns of
    ``V``, each with unit 2-norm.

    Returns
    -------
    eigenvalues : ndarray, complex, shape (n,)
    V : ndarray, complex, shape (n, n)
    """
    M = _square(M)
    try:
        lam, V = np.linalg.eig(M.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    # round before ordering so conjugate pairs don't swap on 1-ulp noise
    key_re = np.round(lam.real, 12)
    key_im = np.round(lam.imag, 12)
    order = np.lexsort((-key_im, -key_re))
    lam = lam[order]
    V = V[:, order]
    V = V / np.linalg.norm(V, axis=0)
    return lam, V


def principal_power(M, p):
    """``M**p`` on the principal branch, via eigendecomposition.

    ``M`` must have no eigenvalue on the closed negative real axis.
    The result is complex; see :func:`matrix_fractional_power` for the
    realified transform used by the stability analysis.
    """
    M = _square(M)
    scale = max(1.0, np.linalg.norm(M, 1))
    lam, V = eig(M)
    on_cut = (np.abs(lam.imag) <= 1e-10 * scale) & (lam.real <= 1e-10 * scale)
    if np.any(on_cut):
        raise BranchCutViolation(
            f"eigenvalue(s) {lam[on_cut]} on the principal-log branch cut")
    if np.linalg.cond(V) > COND_LIMIT:
        raise IllConditionedEigenbasis(
            f"eigenvector condition number {np.linalg.cond(V):.3g} exceeds {COND_LIMIT:g}")
    mapped = np.exp(np.log(lam) * p)
    # V diag(mapped) V^-1 computed as solve(V^T, (V diag)^T)^T
    return np.linalg.solve(V.T, (V * mapped).T).T


def _realify(R):
    norm = np.linalg.norm(R, 1)
    if np.max(np.abs(R.imag), initial=0.0) < REALIFY_TOL * max(norm, np.finfo(float).tiny):
        return R.real.copy()
    return R


def matrix_fractional_power(A, alpha):
    """Return ``-(-A)**(1/(2-alpha))`` (principal branch).

    This is the transform that maps a commensurate order-``alpha`` system
    matrix onto an integer-order matrix with equivalent stability. For
    ``alpha == 1`` the exponent is one and ``A`` is returned unchanged.

    The result is returned real when its imaginary residue is below
    ``1e-8`` times its 1-norm, complex otherwise.

    Raises
    ------
    BranchCutViolation
        ``A`` has an eigenvalue on ``[0, inf)``.
    IllConditionedEigenbasis
        ``A`` is (numerically) defective.
    """
    A = _square(A, "A")
    if not 0.0 < alpha <= 1.0:
        raise InvalidOrder(f"alpha must lie in (0, 1], got {alpha}")
    if alpha == 1.0:
        return np.array(A, dtype=float if np.isrealobj(A) else complex, copy=True)
    return _realify(-principal_power(-A, 1.0 / (2.0 - alpha)))


def lyapunov_solve(A, Q):
    """Solve ``A.T @ P + P @ A = -Q`` by Kronecker vectorisation.

    ``P`` is returned symmetrised. Intended for n <= 10 (the linear system
    has n**2 unknowns).
    """
    A = np.real_if_close(_square(A, "A"))
    Q = np.asarray(Q, dtype=float)
    n = A.shape[0]
    if Q.shape != (n, n):
        raise ValueError(f"Q must be {n}x{n}, got {Q.shape}")
    lam = np.linalg.eigvals(A)
    scale = max(1.0, np.linalg.norm(A, 1))
    sums = np.abs(lam[:, None] + lam[None, :])
    if np.min(sums) <= 1e-10 * scale:
        raise SingularLyapunovOperator(
            "A has eigenvalues summing to zero; Lyapunov operator is singular")
    I = np.eye(n)
    # column-major vec: vec(A^T P) = (I kron A^T) vec P, vec(P A) = (A^T kron I) vec P
    K = np.kron(I, A.T) + np.kron(A.T, I)
    vecP = np.linalg.solve(K, -Q.reshape(-1, order="F"))
    P = vecP.reshape((n, n), order="F")
    return 0.5 * (P + P.T)


def resolvent_expansion(A):
    """Leverrier-Faddeev expansion of ``(sI - A)^-1``.

    Returns ``(den, mats)`` with ``den`` the monic characteristic polynomial
    (descending powers) and ``mats`` a list of n matrices such that
    ``adj(sI - A) = sum(mats[k] * s**(n-1-k))``.
    """
    A = np.asarray(_square(A, "A"), dtype=float)
    n = A.shape[0]
    den = np.empty(n + 1)
    den[0] = 1.0
    mats = []
    Mk = np.zeros((n, n))
    I = np.eye(n)
    for k in range(1, n + 1):
        Mk = A @ Mk + den[k - 1] * I
        mats.append(Mk)
        den[k] = -np.trace(A @ Mk) / k
    return den, mats


@dataclass(frozen=True)
class RationalFunction:
    """``num(s) / den(s)`` with real coefficients in descending powers."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = np.trim_zeros(np.atleast_1d(np.asarray(self.num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(self.den, dtype=float)), "f")
        if den.size == 0:
            raise ValueError("denominator is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        object.__setattr__(self, "num", tuple(num.tolist()))
        object.__setattr__(self, "den", tuple(den.tolist()))

    @property
    def relative_degree(self):
        return (len(self.den) - 1) - (len(self.num) - 1)

    @property
    def dc_gain(self):
        if self.den[-1] == 0.0:
            return np.inf
        return self.num[-1] / self.den[-1]

    def __call__(self, s):
        return eval_rational(self, s)


def _horner(coeffs, s):
    acc = np.zeros_like(s, dtype=complex)
    for c in coeffs:
        acc = acc * s + c
    return acc


def eval_rational(H, s):
    """Evaluate ``H`` at complex ``s`` (scalar or array) by Horner's rule."""
    scalar = np.isscalar(s)
    s = np.asarray(s, dtype=complex)
    den = _horner(H.den, s)
    hit = np.abs(den) < 1e-300
    if np.any(hit):
        raise PoleHit(f"denominator vanishes at s = {np.atleast_1d(s)[np.atleast_1d(hit)]}")
    val = _horner(H.num, s) / den
    return complex(val) if scalar else val


def poly_roots(coeffs):
    """Roots of a polynomial via companion-matrix eigenvalues."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=float), "f")
    if c.size <= 1:
        return np.zeros(0, dtype=complex)
    n = c.size - 1
    C = np.zeros((n, n))
    C[0, :] = -c[1:] / c[0]
    C[1:, :-1] = np.eye(n - 1)
    return np.linalg.eigvals(C)


def is_hurwitz_poly(coeffs, margin=1e-9):
    return bool(np.all(poly_roots(coeffs).real < -margin))
