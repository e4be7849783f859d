"""Tests for the Kronecker-structured linear algebra."""

import math
from functools import reduce

import numpy as np
import pytest

from tensorlaplace.linalg import (
    NotPositiveDefiniteError,
    SpdMatrix,
    kron_logdet,
    materialize_kron,
    mode_multiply,
    tensor_quadratic_form,
    trace_quadratic_form,
    unvec,
    vec,
)


def random_spd(rng, n):
    a = rng.standard_normal((n, n))
    return a @ a.T + n * np.eye(n)


SMALL_DIM_SETS = [(2,), (3,), (2, 3), (4, 2), (2, 2, 2), (3, 2, 2), (2, 2, 2, 2)]


class TestSpdMatrix:
    def test_identity_cholesky(self):
        s = SpdMatrix(np.eye(3))
        np.testing.assert_array_equal(s.cholesky, np.eye(3))
        assert s.log_det == 0.0

    def test_hand_worked_factor(self):
        s = SpdMatrix([[4.0, 2.0], [2.0, 3.0]])
        expected = np.array([[2.0, 0.0], [1.0, math.sqrt(2.0)]])
        np.testing.assert_allclose(s.cholesky, expected, rtol=1e-15)

    def test_indefinite_rejected(self):
        with pytest.raises(NotPositiveDefiniteError):
            SpdMatrix([[1.0, 2.0], [2.0, 1.0]])

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError, match="symmetric"):
            SpdMatrix([[1.0, 0.5], [0.2, 1.0]])

    def test_reconstruction(self):
        rng = np.random.default_rng(11)
        for n in [1, 2, 5, 8]:
            a = random_spd(rng, n)
            s = SpdMatrix(a)
            np.testing.assert_allclose(s.cholesky @ s.cholesky.T, a, rtol=1e-10)

    def test_entries_immutable(self):
        s = SpdMatrix(np.eye(2))
        with pytest.raises(ValueError):
            s.entries[0, 0] = 5.0


class TestVec:
    def test_column_stacking(self):
        x = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(vec(x), [1.0, 3.0, 2.0, 4.0])

    def test_order_one_identity(self):
        x = np.array([5.0, 6.0, 7.0])
        np.testing.assert_array_equal(vec(x), x)

    def test_mode_one_fastest_enumeration(self):
        # entries enumerated mode-1-fastest linearize to the same sequence
        flat = np.arange(8.0)
        x = unvec(flat, (2, 2, 2))
        np.testing.assert_array_equal(vec(x), flat)
        assert x[1, 0, 0] == 1.0 and x[0, 1, 0] == 2.0 and x[0, 0, 1] == 4.0

    def test_unvec_round_trip(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((3, 2, 4))
        np.testing.assert_array_equal(unvec(vec(x), x.shape), x)


class TestModeMultiply:
    def test_identity_factor(self):
        rng = np.random.default_rng(1)
        x = rng.standard_normal((2, 3, 2))
        for mode, n in enumerate(x.shape):
            np.testing.assert_array_equal(mode_multiply(x, np.eye(n), mode), x)

    def test_matrix_case_is_sandwich(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((2, 2))
        a = rng.standard_normal((2, 2))
        b = rng.standard_normal((2, 2))
        out = mode_multiply(mode_multiply(x, a, 0), b, 1)
        np.testing.assert_allclose(out, a @ x @ b.T, rtol=1e-14)

    def test_mode_three_ones_sums(self):
        x = unvec(np.arange(8.0), (2, 2, 2))
        out = mode_multiply(x, np.ones((1, 2)), 2)
        assert out.shape == (2, 2, 1)
        np.testing.assert_allclose(out[:, :, 0], x[:, :, 0] + x[:, :, 1])

    def test_shape_mismatch(self):
        x = np.zeros((2, 3))
        with pytest.raises(ValueError):
            mode_multiply(x, np.eye(2), 1)

    def test_composition_equals_kron_chain(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((2, 3, 2))
        mats = [rng.standard_normal((d, d)) for d in x.shape]
        out = x
        for mode, a in enumerate(mats):
            out = mode_multiply(out, a, mode)
        chain = reduce(np.kron, reversed(mats))
        np.testing.assert_allclose(vec(out), chain @ vec(x), atol=1e-12)


class TestTraceQuadraticForm:
    def test_identity_scales_frobenius(self):
        rng = np.random.default_rng(4)
        x = rng.standard_normal((3, 4))
        q = trace_quadratic_form(SpdMatrix(np.eye(4)), SpdMatrix(np.eye(3)), x, x)
        assert q == pytest.approx(np.sum(x * x), rel=1e-14)

    def test_diagonal_example(self):
        sigma = SpdMatrix(np.diag([2.0, 1.0]))
        psi = SpdMatrix(np.eye(2))
        ones = np.ones((2, 2))
        assert trace_quadratic_form(psi, sigma, ones, ones) == pytest.approx(3.0, rel=1e-14)

    def test_zero_argument(self):
        rng = np.random.default_rng(5)
        sigma = SpdMatrix(random_spd(rng, 2))
        psi = SpdMatrix(random_spd(rng, 3))
        a = rng.standard_normal((2, 3))
        assert trace_quadratic_form(psi, sigma, a, np.zeros((2, 3))) == 0.0

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(6)
        sigma = SpdMatrix(random_spd(rng, 3))
        psi = SpdMatrix(random_spd(rng, 2))
        a = rng.standard_normal((3, 2))
        b = rng.standard_normal((3, 2))
        q_ab = trace_quadratic_form(psi, sigma, a, b)
        q_ba = trace_quadratic_form(psi, sigma, b, a)
        assert q_ab == pytest.approx(q_ba, rel=1e-12)

    def test_positive_definite(self):
        rng = np.random.default_rng(7)
        sigma = SpdMatrix(random_spd(rng, 2))
        psi = SpdMatrix(random_spd(rng, 2))
        for _ in range(10):
            a = rng.standard_normal((2, 2))
            assert trace_quadratic_form(psi, sigma, a, a) > 0.0
        assert trace_quadratic_form(psi, sigma, np.zeros((2, 2)), np.zeros((2, 2))) == 0.0

    def test_dimension_mismatch(self):
        sigma = SpdMatrix(np.eye(2))
        psi = SpdMatrix(np.eye(3))
        with pytest.raises(ValueError):
            trace_quadratic_form(psi, sigma, np.zeros((3, 2)), np.zeros((3, 2)))


class TestTensorQuadraticForm:
    def test_identity_scales_dot(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((2, 2, 2))
        y = rng.standard_normal((2, 2, 2))
        q = tensor_quadratic_form(x, y, [SpdMatrix(np.eye(2))] * 3)
        assert q == pytest.approx(np.sum(x * y), rel=1e-14)

    def test_order_two_matches_trace_form(self):
        rng = np.random.default_rng(9)
        sigma = SpdMatrix(random_spd(rng, 3))
        psi = SpdMatrix(random_spd(rng, 2))
        x = rng.standard_normal((3, 2))
        y = rng.standard_normal((3, 2))
        q_tensor = tensor_quadratic_form(x, y, [sigma, psi])
        q_trace = trace_quadratic_form(psi, sigma, x, y)
        assert q_tensor == pytest.approx(q_trace, rel=1e-12)

    @pytest.mark.parametrize("dims", SMALL_DIM_SETS)
    def test_matches_materialized_inverse(self, dims):
        rng = np.random.default_rng(sum(dims))
        sigmas = [SpdMatrix(random_spd(rng, d)) for d in dims]
        x = rng.standard_normal(dims)
        y = rng.standard_normal(dims)
        q = tensor_quadratic_form(x, y, sigmas)
        full = materialize_kron(sigmas).entries
        expected = float(vec(x) @ np.linalg.solve(full, vec(y)))
        assert q == pytest.approx(expected, rel=1e-10)

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            tensor_quadratic_form(
                np.zeros((2, 2)), np.zeros((2, 2)), [SpdMatrix(np.eye(3)), SpdMatrix(np.eye(2))]
            )


class TestKronLogdet:
    def test_identities(self):
        sigmas = [SpdMatrix(np.eye(d)) for d in (2, 3, 2)]
        assert kron_logdet(sigmas, [2, 3, 2]) == 0.0

    def test_diagonal_example(self):
        sigma = SpdMatrix(np.diag([2.0, 1.0]))
        psi = SpdMatrix([[3.0]])
        assert kron_logdet([sigma, psi], [2, 1]) == pytest.approx(math.log(18.0), rel=1e-14)

    def test_exponent_rule(self):
        s1 = SpdMatrix(np.diag([2.0, 1.0]))  # det 2, mode length 2
        s2 = SpdMatrix(np.diag([5.0, 1.0, 1.0]))  # det 5, mode length 3
        expected = 3.0 * math.log(2.0) + 2.0 * math.log(5.0)
        assert kron_logdet([s1, s2], [2, 3]) == pytest.approx(expected, rel=1e-14)

    @pytest.mark.parametrize("dims", SMALL_DIM_SETS)
    def test_matches_materialized(self, dims):
        rng = np.random.default_rng(100 + sum(dims))
        sigmas = [SpdMatrix(random_spd(rng, d)) for d in dims]
        _, expected = np.linalg.slogdet(materialize_kron(sigmas).entries)
        assert kron_logdet(sigmas, dims) == pytest.approx(expected, rel=1e-10)

    def test_dims_mismatch(self):
        with pytest.raises(ValueError):
            kron_logdet([SpdMatrix(np.eye(2))], [3])


class TestMaterializeKron:
    def test_identity_factors(self):
        out = materialize_kron([SpdMatrix(np.eye(2)), SpdMatrix(np.eye(3))])
        np.testing.assert_array_equal(out.entries, np.eye(6))

    def test_declared_factor_order(self):
        # factor list in mode order [row scale, column scale] composes as
        # column (x) row
        out = materialize_kron([SpdMatrix(np.diag([2.0, 1.0])), SpdMatrix([[3.0]])])
        np.testing.assert_allclose(out.entries, np.diag([6.0, 3.0]))

    def test_two_factor_textbook_formula(self):
        rng = np.random.default_rng(12)
        a = random_spd(rng, 2)
        b = random_spd(rng, 2)
        out = materialize_kron([SpdMatrix(a), SpdMatrix(b)])
        np.testing.assert_allclose(out.entries, np.kron(b, a), rtol=1e-14)

    def test_size_guard(self):
        with pytest.raises(ValueError, match="cap"):
            materialize_kron([SpdMatrix(np.eye(9)), SpdMatrix(np.eye(9))])
