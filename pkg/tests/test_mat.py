"""Kernel tests: Schur/eigenvalue/solve against numpy oracles.

numpy.linalg is used here as an independent reference implementation
only; the package itself never calls it.
"""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qsyn import mat
from qsyn.errors import DimensionError, ImaginaryAxisError, NumericalError, SingularMatrixError
from qsyn.mat import _pure


def assert_spectra_close(computed, reference, atol):
    """Match two eigenvalue multisets greedily within ``atol``."""
    left = list(computed)
    right = list(reference)
    assert len(left) == len(right)
    for value in left:
        gaps = [abs(value - other) for other in right]
        best = int(np.argmin(gaps))
        assert gaps[best] <= atol, f"eigenvalue {value} unmatched (gap {gaps[best]:.3e})"
        right.pop(best)


def random_complex(rng, n):
    return rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))


@st.composite
def square_matrices(draw, max_side=6, complex_entries=False):
    n = draw(st.integers(min_value=1, max_value=max_side))
    finite = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)
    entries = draw(st.lists(finite, min_size=n * n, max_size=n * n))
    a = np.array(entries).reshape(n, n)
    if complex_entries:
        imag = draw(st.lists(finite, min_size=n * n, max_size=n * n))
        a = a + 1j * np.array(imag).reshape(n, n)
    return a


class TestSchur:
    @settings(max_examples=60, deadline=None)
    @given(square_matrices(complex_entries=True))
    def test_triangular_unitary_reconstruction(self, a):
        t, q = mat.schur_decomposition(a)
        n = a.shape[0]
        scale = max(1.0, mat.frobenius(a))
        assert np.abs(np.tril(t, -1)).max(initial=0.0) <= 1e-10 * scale
        assert_allclose(q.conj().T @ q, np.eye(n), atol=1e-10)
        assert_allclose(q @ t @ q.conj().T, a, atol=1e-9 * scale)

    def test_eigenvalues_match_numpy_on_gaussian_batch(self):
        rng = np.random.default_rng(2024)
        for n in (1, 2, 3, 5, 8, 12):
            for _ in range(6):
                a = random_complex(rng, n)
                mine = mat.eigenvalues(a)
                ref = np.linalg.eigvals(a)
                assert_spectra_close(mine, ref, atol=1e-8 * max(1.0, mat.frobenius(a)))

    def test_real_input_eigenvalues(self):
        rng = np.random.default_rng(11)
        for n in (2, 4, 7):
            a = rng.normal(size=(n, n))
            assert_spectra_close(
                mat.eigenvalues(a), np.linalg.eigvals(a), atol=1e-8 * mat.frobenius(a)
            )

    def test_defective_matrix(self):
        # nilpotent Jordan block: all eigenvalues zero, inherently ill-conditioned
        a = np.diag(np.ones(3), k=1)
        eigs = mat.eigenvalues(a)
        assert np.abs(eigs).max() < 1e-3

    def test_empty_and_scalar(self):
        assert mat.eigenvalues(np.array([[4.2]]))[0] == pytest.approx(4.2)
        t, q = mat.schur_decomposition(np.array([[2.0, 1.0], [0.0, 3.0]]))
        assert_allclose(np.sort(t.diagonal().real), [2.0, 3.0], atol=1e-12)


class TestSolve:
    @settings(max_examples=60, deadline=None)
    @given(square_matrices(max_side=5))
    def test_residual_small_or_singular_flagged(self, a):
        rng = np.random.default_rng(1)
        b = rng.normal(size=(a.shape[0], 2))
        with np.errstate(over="ignore"):
            try:
                x = mat.raw_solve(a, b)
            except SingularMatrixError:
                assert np.linalg.matrix_rank(a, tol=1e-7 * max(1.0, np.abs(a).max())) < a.shape[0]
                return
            residual = mat.frobenius(a @ x - b)
            assert residual <= 1e-6 * max(1.0, mat.frobenius(a)) * max(1.0, mat.frobenius(x))

    def test_matches_numpy(self):
        rng = np.random.default_rng(5)
        for n in (1, 3, 6, 10):
            a = random_complex(rng, n)
            b = random_complex(rng, n)[:, : max(1, n // 2)]
            assert_allclose(mat.raw_solve(a, b), np.linalg.solve(a, b), atol=1e-9)

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularMatrixError):
            mat.raw_solve(a, np.eye(2))

    def test_condition_limit(self):
        a = np.diag([1.0, 1e-14])
        with pytest.raises(SingularMatrixError):
            mat.solve_linear(a, np.eye(2))
        # raw_solve has no condition guard and happily inverts
        assert np.isfinite(mat.raw_solve(a, np.eye(2))).all()

    def test_vector_rhs(self):
        a = np.array([[2.0, 0.0], [0.0, 4.0]])
        assert_allclose(mat.solve_linear(a, np.array([2.0, 8.0])), [1.0, 2.0])


class TestStableSubspace:
    def test_invariance_and_dimension(self):
        rng = np.random.default_rng(77)
        for n in (2, 4, 6):
            for _ in range(5):
                a = rng.normal(size=(n, n))
                eigs = np.linalg.eigvals(a)
                if np.abs(eigs.real).min() < 1e-3:
                    continue
                u = mat.stable_subspace(a)
                k = int((eigs.real < 0).sum())
                assert u.shape == (n, k)
                assert_allclose(u.T @ u, np.eye(k), atol=1e-10)
                # A U = U (U^T A U): the span is A-invariant
                compressed = u.T @ a @ u
                assert_allclose(a @ u, u @ compressed, atol=1e-8 * mat.frobenius(a))
                if k:
                    assert np.linalg.eigvals(compressed).real.max() < 0

    def test_imaginary_axis_rejected(self):
        rotation = np.array([[0.0, 1.0], [-1.0, 0.0]])
        with pytest.raises(ImaginaryAxisError):
            mat.stable_subspace(rotation)

    def test_real_matrix_gives_real_basis(self):
        a = np.array([[-1.0, 5.0, 0.0], [-5.0, -1.0, 0.0], [0.0, 0.0, 2.0]])
        u = mat.stable_subspace(a)
        assert u.shape == (3, 2)
        assert np.isrealobj(u)


class TestNorms:
    @settings(max_examples=40, deadline=None)
    @given(square_matrices(max_side=5, complex_entries=True))
    def test_max_singular_value_matches_svd(self, a):
        ref = np.linalg.svd(a, compute_uv=False)[0] if a.size else 0.0
        assert mat.max_singular_value(a) == pytest.approx(ref, abs=1e-9 * max(1.0, ref))

    def test_rectangular(self):
        rng = np.random.default_rng(3)
        for shape in ((2, 5), (5, 2), (1, 4)):
            a = rng.normal(size=shape)
            assert mat.max_singular_value(a) == pytest.approx(
                np.linalg.svd(a, compute_uv=False)[0], rel=1e-10
            )

    def test_frobenius(self):
        a = np.array([[3.0, 0.0], [0.0, 4.0]])
        assert mat.frobenius(a) == pytest.approx(5.0)


class TestValidation:
    def test_rejects_non_matrix(self):
        with pytest.raises(DimensionError):
            mat.as_matrix(np.ones(3), "v")
        with pytest.raises(DimensionError):
            mat.as_matrix(np.ones((2, 3)), "m", square=True)

    def test_rejects_non_finite(self):
        bad = np.array([[1.0, np.nan], [0.0, 1.0]])
        with pytest.raises(ValueError):
            mat.as_matrix(bad, "m")


class TestBackends:
    def test_backend_reported(self):
        assert mat.BACKEND in ("pure", "compiled")
        assert "pure" in mat.available_backends()

    @pytest.mark.skipif(mat.BACKEND != "compiled", reason="compiled backend not built")
    def test_pure_and_compiled_agree(self):
        rng = np.random.default_rng(9)
        for n in (1, 3, 5, 8):
            a = random_complex(rng, n)
            t_c, q_c = mat.schur_decomposition(a)
            rows = [[complex(v) for v in row] for row in a]
            t_p, q_p = _pure.schur(rows)
            assert_allclose(np.array(t_p), t_c, atol=1e-12 * max(1.0, mat.frobenius(a)))
            assert_allclose(np.array(q_p), q_c, atol=1e-12)
            b = random_complex(rng, n)[:, :1]
            x_p = _pure.solve(rows, [[complex(v) for v in row] for row in b])
            assert_allclose(np.array(x_p), mat.raw_solve(a, b), atol=1e-12)

    def test_force_pure_env(self):
        code = "from qsyn import mat; print(mat.BACKEND)"
        env = dict(os.environ, QSYN_PURE="1")
        out = subprocess.run(
            [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
        )
        assert out.stdout.strip() == "pure"
