"""Dense matrix kernel facade.

Small self-contained linear-algebra core shared by the whole package:
eigenvalues, Schur form, stable invariant subspaces, linear solves and
largest singular values for matrices of the sizes this problem produces
(plant/controller blocks of dimension 2-8, Hamiltonians up to 16).

Two interchangeable backends implement the decomposition work:

* ``qsyn.mat._speedups`` — Cython-compiled kernels (preferred);
* ``qsyn.mat._pure``    — pure-Python fallback, same algorithms.

The compiled backend is selected automatically when importable; setting
the environment variable ``QSYN_PURE=1`` forces the fallback.  All
functions here are pure (no hidden state) and thread-safe.
"""

from __future__ import annotations

import math
import os

import numpy as np

from ..errors import (
    DimensionError,
    ImaginaryAxisError,
    NumericalError,
    SingularMatrixError,
)
from . import _pure

try:  # pragma: no cover - exercised through the import-time selection
    from . import _speedups as _compiled
except ImportError:  # pragma: no cover
    _compiled = None

_FORCE_PURE = os.environ.get("QSYN_PURE", "").strip() not in ("", "0")
_impl = _pure if (_FORCE_PURE or _compiled is None) else _compiled

#: Name of the active kernel backend: "compiled" or "pure".
BACKEND = "pure" if _impl is _pure else "compiled"

#: Relative spectral-gap tolerance: eigenvalues with |Re| <= tol * ||m||_F
#: count as sitting on the imaginary axis.
IMAG_AXIS_RTOL = 1e-9

#: Linear solves reject systems whose estimated condition number exceeds this.
COND_LIMIT = 1e12


def available_backends() -> dict[str, object]:
    """Importable backend modules keyed by name (used by the benchmark)."""
    out: dict[str, object] = {"pure": _pure}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out


def as_matrix(m, name: str = "matrix", *, square: bool = False) -> np.ndarray:
    """Validate and return ``m`` as a 2-D array with finite entries."""
    arr = np.asarray(m)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {arr.shape}")
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def frobenius(m) -> float:
    """Frobenius norm (works for real and complex arrays)."""
    arr = np.asarray(m)
    return math.sqrt(float((arr * arr.conjugate()).real.sum()))


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a square matrix, sorted by (real, imag).

    Accuracy is that of a backward-stable shifted QR iteration; at the
    dimensions used here the eigenvalue backward error is well below
    1e-10 * ||m||_F.
    """
    arr = as_matrix(m, "m", square=True)
    return np.sort_complex(_impl.eig(arr))


def schur_decomposition(m) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form ``(t, q)`` with ``m = q t q^H``."""
    arr = as_matrix(m, "m", square=True)
    t, q = _impl.schur(arr, want_q=True)
    return t, q


def _swap_adjacent(t: np.ndarray, q: np.ndarray, i: int) -> None:
    """Unitary swap of the adjacent diagonal entries t[i,i] and t[i+1,i+1]."""
    lam1 = t[i, i]
    lam2 = t[i + 1, i + 1]
    tt = t[i, i + 1]
    # first column of the rotation is the (unit) eigenvector of the 2x2
    # block for lam2
    v0, v1 = tt, lam2 - lam1
    nv = math.hypot(abs(v0), abs(v1))
    if nv == 0.0:  # equal eigenvalues, block already diagonal
        return
    c, s = v0 / nv, v1 / nv
    g = np.array([[c, -s.conjugate()], [s, c.conjugate()]])
    idx = [i, i + 1]
    t[idx, :] = g.conjugate().T @ t[idx, :]
    t[:, idx] = t[:, idx] @ g
    q[:, idx] = q[:, idx] @ g
    t[i + 1, i] = 0.0
    t[i, i] = lam2
    t[i + 1, i + 1] = lam1


def stable_subspace(m, *, axis_rtol: float = IMAG_AXIS_RTOL) -> np.ndarray:
    """Orthonormal basis for the invariant subspace of eigenvalues with
    negative real part.

    Returns an (n, k) array where k is the count of stable eigenvalues;
    real when ``m`` is real (the stable spectrum of a real matrix is
    conjugation-closed).  Raises :class:`ImaginaryAxisError` when any
    eigenvalue lies within ``axis_rtol * ||m||_F`` of the imaginary axis,
    where the split is undefined.
    """
    arr = as_matrix(m, "m", square=True)
    scale = frobenius(arr)
    t, q = _impl.schur(arr, want_q=True)
    n = arr.shape[0]
    diag = np.diag(t)
    if np.min(np.abs(diag.real), initial=np.inf) <= axis_rtol * scale:
        worst = diag[np.argmin(np.abs(diag.real))] if n else 0.0
        raise ImaginaryAxisError(
            f"eigenvalue {worst:.6g} within {axis_rtol:g}*||m|| of the imaginary axis"
        )
    # bubble stable eigenvalues to the leading positions
    target = 0
    for _ in range(n):
        j = target
        while j < n and t[j, j].real >= 0.0:
            j += 1
        if j >= n:
            break
        while j > target:
            _swap_adjacent(t, q, j - 1)
            j -= 1
        target += 1
    k = target
    u = q[:, :k]
    if np.iscomplexobj(np.asarray(m)) and np.asarray(m).imag.any():
        return u.copy()
    if k == 0:
        return np.zeros((n, 0))
    # the subspace is conjugation-closed: extract a real orthonormal basis
    w = np.hstack([u.real, u.imag])
    return _orthonormal_columns(w, k)


def _orthonormal_columns(w: np.ndarray, k: int) -> np.ndarray:
    """Rank-k orthonormal basis of span(w) via column-pivoted Gram-Schmidt."""
    w = w.astype(float, copy=True)
    cols: list[np.ndarray] = []
    norms2 = (w * w).sum(axis=0)
    floor = 1e-10 * math.sqrt(float(norms2.max(initial=0.0)) + 1e-300)
    for _ in range(k):
        j = int(np.argmax(norms2))
        nj = math.sqrt(max(norms2[j], 0.0))
        if nj <= floor:
            raise NumericalError("rank-deficient basis while realifying subspace")
        v = w[:, j] / nj
        for b in cols:  # re-orthogonalization pass ("twice is enough")
            v -= b * (b @ v)
        v /= math.sqrt(float(v @ v))
        cols.append(v)
        w -= np.outer(v, v @ w)
        norms2 = (w * w).sum(axis=0)
    return np.column_stack(cols)


def raw_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Backend linear solve without the condition-number estimate.

    Internal hot-path variant (frequency scans); ``b`` must be 2-D.
    Result is complex.
    """
    return _impl.solve(a, b)


def solve_linear(a, b, *, cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Solve the square system ``a @ x = b``.

    Accepts 1-D or 2-D ``b``; the result dtype is real when both inputs
    are real.  Rejects singular systems and systems whose estimated
    condition number (Frobenius-norm based) exceeds ``cond_limit``.
    """
    a_arr = as_matrix(a, "a", square=True)
    b_arr = np.asarray(b)
    vector = b_arr.ndim == 1
    if vector:
        b_arr = b_arr[:, None]
    b_arr = as_matrix(b_arr, "b")
    if b_arr.shape[0] != a_arr.shape[0]:
        raise DimensionError(
            f"rhs has {b_arr.shape[0]} rows, expected {a_arr.shape[0]}"
        )
    n = a_arr.shape[0]
    augmented = np.hstack([b_arr, np.eye(n)])
    solution = _impl.solve(a_arr, augmented)
    x, a_inv = solution[:, : b_arr.shape[1]], solution[:, b_arr.shape[1]:]
    cond = frobenius(a_arr) * frobenius(a_inv)
    if cond > cond_limit:
        raise SingularMatrixError(
            f"ill-conditioned system: estimated condition {cond:.3e} > {cond_limit:g}"
        )
    if not (np.iscomplexobj(np.asarray(a)) or np.iscomplexobj(np.asarray(b))):
        x = x.real
    return x[:, 0] if vector else x


def max_singular_value(m) -> float:
    """Largest singular value of a (possibly rectangular, possibly
    complex) matrix, via the largest eigenvalue of the smaller Gram
    matrix."""
    arr = as_matrix(m, "m")
    if arr.size == 0:
        return 0.0
    if arr.shape[0] >= arr.shape[1]:
        gram = arr.conjugate().T @ arr
    else:
        gram = arr @ arr.conjugate().T
    lam = _impl.eig(gram).real
    return math.sqrt(max(float(lam.max(initial=0.0)), 0.0))
