import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import gamma, rgamma

from fracreset.errors import HistoryMismatch, IndexOutOfRange, InvalidOrder
from fracreset.fode import GLState, MemoryMode, gl_step, gl_weights, reset_history
from fracreset.models import StateSpaceModel

orders = st.floats(0.01, 1.0, allow_nan=False)


def integrator(alpha, n=1):
    return StateSpaceModel(np.zeros((n, n)), np.ones((n, 1)), np.ones((1, n)), alpha)


class TestWeights:
    def test_first_difference(self):
        np.testing.assert_array_equal(gl_weights(1.0, 3).weights, [1, -1, 0, 0])

    def test_half_order(self):
        np.testing.assert_allclose(gl_weights(0.5, 3).weights, [1, -0.5, -0.125, -0.0625],
                                   atol=1e-15)

    def test_recursion_value(self):
        np.testing.assert_allclose(gl_weights(0.3, 2).weights, [1, -0.3, -0.105], atol=1e-15)

    def test_invalid(self):
        with pytest.raises(InvalidOrder):
            gl_weights(0.0, 3)
        with pytest.raises(InvalidOrder):
            gl_weights(1.2, 3)

    @given(orders)
    def test_gamma_oracle(self, a):
        k = np.arange(101)
        ref = (-1.0) ** k * gamma(a + 1) * rgamma(k + 1) * rgamma(a - k + 1)
        np.testing.assert_allclose(gl_weights(a, 100).weights, ref, atol=1e-12)

    @given(orders)
    def test_signs_and_sum(self, a):
        w = gl_weights(a, 10_000).weights
        assert w[0] == 1.0
        assert np.all(w[1:] <= 0.0)
        # partial sums decay to zero like L^-a / Gamma(1 - a)
        assert 0.0 <= w.sum() <= 10_000.0 ** (-a) / gamma(1 - a) * 1.05 + 1e-12 or a == 1.0


class TestStep:
    def test_euler_integrator(self):
        st_ = GLState(1.0, 0.01, np.zeros(1))
        assert gl_step(integrator(1.0), st_, 1.0)[0] == 0.01

    @given(st.integers(0, 1000))
    def test_alpha_one_is_forward_euler(self, seed):
        rng = np.random.default_rng(seed)
        A, B = rng.normal(size=(3, 3)), rng.normal(size=(3, 1))
        m = StateSpaceModel(A, B, np.ones((1, 3)), 1.0)
        h = 0.01
        x = rng.normal(size=3)
        state = GLState(1.0, h, x)
        for k in range(50):
            u = np.sin(k * h)
            expect = x + h * (A @ x + B[:, 0] * u)
            x = gl_step(m, state, u)
            assert np.array_equal(x, expect)

    def test_half_integrator_step_response(self):
        h = 1e-4
        state = GLState(0.5, h, np.zeros(1), capacity=10_002)
        for _ in range(10_000):
            y = gl_step(integrator(0.5), state, 1.0)[0]
        assert abs(y - 2 / np.sqrt(np.pi)) < 1e-2

    def test_first_order_convergence(self):
        def err(h):
            n = int(round(1 / h))
            state = GLState(0.5, h, np.zeros(1), capacity=n + 2)
            for _ in range(n):
                y = gl_step(integrator(0.5), state, 1.0)[0]
            return abs(y - 2 / np.sqrt(np.pi))
        ratio = err(5e-4) / err(1e-3)
        assert 0.4 <= ratio <= 0.6

    def test_short_memory_window(self):
        h = 1e-3
        full = GLState(0.5, h, np.zeros(1))
        short = GLState(0.5, h, np.zeros(1), memory=50)
        for _ in range(40):
            a = gl_step(integrator(0.5), full, 1.0)
            b = gl_step(integrator(0.5), short, 1.0)
        np.testing.assert_array_equal(a, b)

    def test_history_mismatch(self):
        with pytest.raises(HistoryMismatch):
            gl_step(integrator(0.5), GLState(0.7, 0.01, np.zeros(1)), 1.0)
        with pytest.raises(HistoryMismatch):
            gl_step(integrator(0.5, 2), GLState(0.5, 0.01, np.zeros(1)), 1.0)


def driven_state(alpha=0.5, steps=20, n=2):
    state = GLState(alpha, 0.01, np.zeros(n))
    for _ in range(steps):
        gl_step(integrator(alpha, n), state, 1.0)
    return state


class TestReset:
    def test_clear_all_gives_zero_history(self):
        state = driven_state()
        reset_history(state, [0, 1], MemoryMode.CLEAR)
        assert not np.any(state.history)

    def test_keep_with_no_indices_is_identity(self):
        state = driven_state()
        before = state.history.copy()
        reset_history(state, [], MemoryMode.KEEP)
        np.testing.assert_array_equal(state.history, before)

    @pytest.mark.parametrize("mode", list(MemoryMode))
    def test_reset_component_reads_zero(self, mode):
        state = driven_state()
        other = state.current[1]
        reset_history(state, [0], mode)
        assert state.current[0] == 0.0
        assert state.current[1] == other

    def test_keep_touches_only_newest(self):
        state = driven_state()
        before = state.history.copy()
        reset_history(state, [0], MemoryMode.KEEP)
        np.testing.assert_array_equal(state.history[:-1], before[:-1])

    @pytest.mark.parametrize("mode", list(MemoryMode))
    def test_modes_agree_at_integer_order(self, mode):
        a, b = driven_state(1.0), driven_state(1.0)
        reset_history(a, [0], MemoryMode.KEEP)
        reset_history(b, [0], mode)
        for _ in range(5):
            np.testing.assert_array_equal(gl_step(integrator(1.0, 2), a, 1.0),
                                          gl_step(integrator(1.0, 2), b, 1.0))

    def test_offset_continues_raw_integral(self):
        # after an offset reset the output is the raw integral minus its value at the reset
        ref, state = driven_state(steps=0), driven_state(steps=0)
        for _ in range(20):
            gl_step(integrator(0.5, 2), ref, 1.0)
            gl_step(integrator(0.5, 2), state, 1.0)
        c = ref.current[0]
        reset_history(state, [0], MemoryMode.OFFSET)
        for _ in range(10):
            r = gl_step(integrator(0.5, 2), ref, 1.0)
            x = gl_step(integrator(0.5, 2), state, 1.0)
        assert x[0] == pytest.approx(r[0] - c, abs=1e-15)

    def test_bad_index(self):
        with pytest.raises(IndexOutOfRange):
            reset_history(driven_state(), [2])
