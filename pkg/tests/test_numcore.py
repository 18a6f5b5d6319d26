import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fracreset.errors import (BranchCutViolation, InvalidOrder, NonSquare, PoleHit,
                              SingularLyapunovOperator)
from fracreset.numcore import (RationalFunction, eig, eval_rational, is_hurwitz_poly,
                               lyapunov_solve, matrix_fractional_power, poly_roots,
                               principal_power, resolvent_expansion)

EX2_ACL = np.array([[0.0, 1, 0], [0, 0, 1], [-1, 0, 0]])

# entries on a 0.1 grid: LAPACK geev balancing loses eigenvectors when most
# entries sit near the underflow threshold, which is not what we test here
finite = st.integers(-30, 30).map(lambda k: k / 10.0)


def square(n):
    return arrays(float, (n, n), elements=finite)


def stable_matrix(n, rng):
    """Random matrix with spectrum in Re < -0.5."""
    M = rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(M).real) + 0.5 + rng.uniform()
    return M - shift * np.eye(n)


class TestEig:
    def test_diagonal(self):
        w, V = eig(np.diag([2.0, 3.0]))
        np.testing.assert_allclose(w, [3, 2])
        np.testing.assert_allclose(np.abs(V), np.eye(2)[:, ::-1], atol=1e-15)

    def test_rotation_generator(self):
        w, _ = eig([[0.0, 1], [-1, 0]])
        np.testing.assert_allclose(w, [1j, -1j], atol=1e-15)

    def test_cube_roots_of_minus_one(self):
        w, _ = eig(EX2_ACL)
        want = [0.5 + np.sqrt(3) / 2 * 1j, 0.5 - np.sqrt(3) / 2 * 1j, -1.0]
        np.testing.assert_allclose(w, want, atol=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(NonSquare):
            eig(np.zeros((2, 3)))

    @given(square(4))
    def test_residual_and_unit_columns(self, M):
        w, V = eig(M)
        scale = max(1.0, np.abs(M).max())
        assert np.max(np.abs(M @ V - V * w)) <= 1e-9 * scale * 4
        np.testing.assert_allclose(np.linalg.norm(V, axis=0), 1.0, atol=1e-12)


class TestFractionalPower:
    def test_minus_identity(self):
        np.testing.assert_allclose(matrix_fractional_power(-np.eye(3), 0.5), -np.eye(3),
                                   atol=1e-14)

    def test_alpha_one_is_identity_map(self):
        A = np.diag([-1.0, -8.0])
        assert np.array_equal(matrix_fractional_power(A, 1.0), A)

    def test_square_root_branch(self):
        np.testing.assert_allclose(principal_power(np.diag([1.0, 8.0]), 0.5).real,
                                   np.diag([1.0, np.sqrt(8.0)]), atol=1e-14)

    def test_example2_transform(self):
        T = matrix_fractional_power(EX2_ACL, 0.5)
        assert T.dtype == float
        want = [[-0.45, 0.84, 0.29], [-0.29, -0.45, 0.84], [-0.84, -0.29, -0.45]]
        np.testing.assert_allclose(T, want, atol=0.01)
        den, _ = resolvent_expansion(T)
        np.testing.assert_allclose(den, [1, 1.35, 1.35, 1.0], atol=0.01)

    def test_branch_cut(self):
        with pytest.raises(BranchCutViolation):
            matrix_fractional_power(np.diag([-1.0, 0.5]), 0.5)

    def test_order_outside_range(self):
        with pytest.raises(InvalidOrder):
            matrix_fractional_power(-np.eye(2), 1.5)

    @pytest.mark.parametrize("alpha", [0.2, 0.5, 0.75, 0.9])
    def test_against_scipy(self, alpha, rng):
        for _ in range(5):
            A = stable_matrix(4, rng)
            want = -sla.fractional_matrix_power(-A, 1.0 / (2.0 - alpha))
            np.testing.assert_allclose(matrix_fractional_power(A, alpha), want.real,
                                       atol=1e-9 * np.abs(want).max())

    @given(st.integers(0, 10_000), st.floats(0.05, 1.0))
    def test_spectrum_mapping(self, seed, alpha):
        A = stable_matrix(3, np.random.default_rng(seed))
        F = matrix_fractional_power(A, alpha)
        lam = np.linalg.eigvals(A).astype(complex)
        want = np.sort_complex(-((-lam) ** (1.0 / (2.0 - alpha))))
        got = np.sort_complex(np.linalg.eigvals(F).astype(complex))
        assert np.max(np.abs(got - want)) <= 1e-9 * max(1.0, np.abs(want).max())


class TestLyapunov:
    def test_scalar_balance(self):
        np.testing.assert_allclose(lyapunov_solve(-np.eye(2), np.eye(2)), 0.5 * np.eye(2))

    def test_jordan_block(self):
        P = lyapunov_solve([[-1.0, 1], [0, -1]], np.eye(2))
        np.testing.assert_allclose(P, [[0.5, 0.25], [0.25, 0.75]], atol=1e-14)

    def test_singular_operator(self):
        with pytest.raises(SingularLyapunovOperator):
            lyapunov_solve([[0.0, 1], [-1, 0]], np.eye(2))

    @given(st.integers(0, 10_000), st.integers(1, 6))
    def test_residual_and_scipy(self, seed, n):
        rng = np.random.default_rng(seed)
        A = stable_matrix(n, rng)
        G = rng.normal(size=(n, n))
        Q = G @ G.T + np.eye(n)
        P = lyapunov_solve(A, Q)
        scale = np.abs(Q).max()
        assert np.max(np.abs(A.T @ P + P @ A + Q)) <= 1e-9 * scale
        np.testing.assert_allclose(P, sla.solve_continuous_lyapunov(A.T, -Q),
                                   atol=1e-8 * np.abs(P).max())
        np.testing.assert_allclose(P, P.T)


class TestRational:
    def test_dc_gain(self):
        assert eval_rational(RationalFunction([1.0], [1.0, 1.0]), 0j) == 1.0

    def test_example2_beta_point(self):
        b = 0.3
        H = RationalFunction(np.polyadd([1, 0.9, 0.45], b * np.array([0.29, 0.84])),
                             [1, 1.35, 1.35, 1])
        assert abs(np.angle(eval_rational(H, 1j))) < np.pi / 2

    def test_pole_hit(self):
        with pytest.raises(PoleHit):
            eval_rational(RationalFunction([1.0, 0.0], [1.0, 0.0, 1.0]), 1j)

    def test_relative_degree(self):
        assert RationalFunction([0.0, 1.0, 2.0], [1.0, 3.0, 2.0]).relative_degree == 1

    def test_polydiv_oracle(self, rng):
        num, den = rng.normal(size=4), np.r_[1.0, rng.normal(size=4)]
        H = RationalFunction(num, den)
        s = rng.normal(size=1000) + 1j * rng.normal(size=1000)
        q, r = np.polydiv(num, den)
        want = np.polyval(q, s) + np.polyval(r, s) / np.polyval(den, s)
        np.testing.assert_allclose(eval_rational(H, s), want, rtol=1e-10)

    def test_roots_and_hurwitz(self):
        np.testing.assert_allclose(np.sort(poly_roots([1.0, 3.0, 2.0]).real), [-2, -1])
        assert is_hurwitz_poly([1.0, 1.2, 1.2, 1.0])
        assert not is_hurwitz_poly([1.0, 0.0, 1.0])


@given(st.integers(0, 10_000), st.integers(1, 5))
def test_resolvent_expansion_matches_inverse(seed, n):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    den, mats = resolvent_expansion(A)
    np.testing.assert_allclose(den, np.poly(A), atol=1e-9 * max(1, np.abs(np.poly(A)).max()))
    s = 2.5 + 1.5j
    adj = sum(M * s ** (n - 1 - k) for k, M in enumerate(mats))
    np.testing.assert_allclose(adj / np.polyval(den, s), np.linalg.inv(s * np.eye(n) - A),
                               atol=1e-9)
