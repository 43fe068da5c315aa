"""Pure-Python dense matrix kernels (fallback backend).

Implements the same three primitives as the compiled backend
(``qsyn.mat._speedups``) with identical semantics:

``schur(a, want_q)``
    Complex Schur decomposition A = Q T Q^H via unitary Householder
    reduction to upper-Hessenberg form followed by an explicitly shifted
    QR iteration (Wilkinson shifts, deflation, occasional exceptional
    shifts).  The classical dense route, adequate and backward-stable at
    the problem sizes this package handles (n <= ~16).

``eig(a)``
    Eigenvalues only (Schur without accumulating Q).

``solve(a, b)``
    Gaussian elimination with partial pivoting for AX = B.

Complex arithmetic uses Python's native ``complex`` (a pair of machine
reals).  Matrices cross the boundary as numpy ``complex128`` arrays and
are unpacked into lists of lists internally; numpy is used only as the
container, never for the decomposition work.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from ..errors import NumericalError, SingularMatrixError

_EPS = 2.220446049250313e-16

# QR iteration budgets: per-eigenvalue cap and an overall cap scaling with n.
_MAX_WINDOW_ITERS = 50
_TOTAL_ITER_FACTOR = 60


def _to_rows(a: np.ndarray) -> list[list[complex]]:
    return [[complex(v) for v in row] for row in np.asarray(a, dtype=complex)]


def _from_rows(rows: list[list[complex]]) -> np.ndarray:
    return np.array(rows, dtype=complex)


def _hessenberg(h: list[list[complex]], q: list[list[complex]] | None) -> None:
    """Reduce h to upper-Hessenberg form in place; accumulate the unitary
    transform into q (also in place) when q is not None."""
    n = len(h)
    for k in range(n - 2):
        xnorm = math.sqrt(sum(abs(h[i][k]) ** 2 for i in range(k + 1, n)))
        if xnorm == 0.0:
            continue
        x0 = h[k + 1][k]
        phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
        alpha = -phase * xnorm
        v = [h[i][k] for i in range(k + 1, n)]
        v[0] -= alpha
        vnorm2 = sum(abs(vi) ** 2 for vi in v)
        if vnorm2 == 0.0:
            continue
        tau = 2.0 / vnorm2
        m = len(v)
        # left: H <- (I - tau v v^H) H on rows k+1..n-1, columns k..n-1
        for j in range(k, n):
            s = tau * sum(v[i].conjugate() * h[k + 1 + i][j] for i in range(m))
            if s != 0:
                for i in range(m):
                    h[k + 1 + i][j] -= s * v[i]
        # right: H <- H (I - tau v v^H) on columns k+1..n-1, all rows
        for i in range(n):
            row = h[i]
            s = tau * sum(row[k + 1 + j] * v[j] for j in range(m))
            if s != 0:
                for j in range(m):
                    row[k + 1 + j] -= s * v[j].conjugate()
        if q is not None:
            for i in range(n):
                row = q[i]
                s = tau * sum(row[k + 1 + j] * v[j] for j in range(m))
                if s != 0:
                    for j in range(m):
                        row[k + 1 + j] -= s * v[j].conjugate()
        h[k + 1][k] = alpha
        for i in range(k + 2, n):
            h[i][k] = 0.0 + 0.0j


def _wilkinson_shift(a: complex, b: complex, c: complex, d: complex) -> complex:
    """Eigenvalue of [[a, b], [c, d]] closer to d (stable formulation)."""
    half = (a - d) / 2.0
    prod = b * c
    disc = cmath.sqrt(half * half + prod)
    # pick the sign giving the larger |half + disc| (avoids cancellation)
    if (half.real * disc.real + half.imag * disc.imag) < 0.0:
        disc = -disc
    den = half + disc
    if den == 0:
        return d
    return d - prod / den


def _qr_iterate(h: list[list[complex]], q: list[list[complex]] | None) -> None:
    """Shifted QR iteration on an upper-Hessenberg matrix, in place.

    On return h is upper triangular (the Schur factor T); q accumulates
    the unitary similarity when given.
    """
    n = len(h)
    scale = math.sqrt(sum(abs(v) ** 2 for row in h for v in row))
    total = 0
    its = 0
    hi = n - 1
    while hi > 0:
        # deflation scan: find the start of the active window
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1][lo - 1]) + abs(h[lo][lo])
            if s == 0.0:
                s = scale
            if abs(h[lo][lo - 1]) <= _EPS * s:
                h[lo][lo - 1] = 0.0 + 0.0j
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            its = 0
            continue

        total += 1
        its += 1
        if its > _MAX_WINDOW_ITERS or total > _TOTAL_ITER_FACTOR * n:
            raise NumericalError(
                f"QR iteration failed to converge after {total} sweeps (n={n})"
            )
        if its % 10 == 0:
            # exceptional shift to break cycling
            shift = 0.75 * abs(h[hi][hi - 1]) + h[hi][hi]
        else:
            shift = _wilkinson_shift(
                h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi]
            )

        for i in range(lo, hi + 1):
            h[i][i] -= shift
        # QR step via Givens rotations: R = G_{hi-1}...G_lo H
        rotations: list[tuple[complex, complex]] = []
        for i in range(lo, hi):
            a = h[i][i]
            b = h[i + 1][i]
            r = math.hypot(abs(a), abs(b))
            if r == 0.0:
                c, s = 1.0 + 0.0j, 0.0 + 0.0j
            else:
                c, s = a / r, b / r
            rotations.append((c, s))
            cc, sc = c.conjugate(), s.conjugate()
            for j in range(i, n):
                t1, t2 = h[i][j], h[i + 1][j]
                h[i][j] = cc * t1 + sc * t2
                h[i + 1][j] = -s * t1 + c * t2
            h[i + 1][i] = 0.0 + 0.0j
        # RQ step: H <- R G_lo^H ... G_{hi-1}^H  (restores Hessenberg form)
        for idx, i in enumerate(range(lo, hi)):
            c, s = rotations[idx]
            cc, sc = c.conjugate(), s.conjugate()
            for row in range(0, i + 2):
                t1, t2 = h[row][i], h[row][i + 1]
                h[row][i] = c * t1 + s * t2
                h[row][i + 1] = -sc * t1 + cc * t2
            if q is not None:
                for row in range(n):
                    t1, t2 = q[row][i], q[row][i + 1]
                    q[row][i] = c * t1 + s * t2
                    q[row][i + 1] = -sc * t1 + cc * t2
        for i in range(lo, hi + 1):
            h[i][i] += shift


def schur(a: np.ndarray, want_q: bool = True):
    """Complex Schur decomposition.

    Returns ``(t, q)`` with ``a = q @ t @ q.conj().T``, ``t`` upper
    triangular and ``q`` unitary; ``q`` is None when ``want_q`` is False.
    """
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return a.copy(), (np.eye(0, dtype=complex) if want_q else None)
    h = _to_rows(a)
    q = [[1.0 + 0.0j if i == j else 0.0 + 0.0j for j in range(n)] for i in range(n)] if want_q else None
    if n > 1:
        _hessenberg(h, q)
        _qr_iterate(h, q)
    t = _from_rows(h)
    # zero out the (numerically negligible) strict lower part
    for i in range(1, n):
        t[i, :i] = 0.0
    return t, (_from_rows(q) if want_q else None)


def eig(a: np.ndarray) -> np.ndarray:
    """All eigenvalues of a square matrix, in Schur (deflation) order."""
    t, _ = schur(a, want_q=False)
    return np.diag(t).copy()


def solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve AX = B by Gaussian elimination with partial pivoting."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = a.shape[0]
    m = b.shape[1]
    rows = _to_rows(a)
    rhs = _to_rows(b)
    scale = max((abs(v) for row in rows for v in row), default=0.0)
    pivot_floor = n * _EPS * scale
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(rows[i][k]))
        if abs(rows[p][k]) <= pivot_floor:
            raise SingularMatrixError(
                f"singular system: pivot {abs(rows[p][k]):.3e} at column {k}"
            )
        if p != k:
            rows[k], rows[p] = rows[p], rows[k]
            rhs[k], rhs[p] = rhs[p], rhs[k]
        inv = 1.0 / rows[k][k]
        for i in range(k + 1, n):
            f = rows[i][k] * inv
            if f != 0:
                rowi, rowk = rows[i], rows[k]
                for j in range(k + 1, n):
                    rowi[j] -= f * rowk[j]
                bi, bk = rhs[i], rhs[k]
                for j in range(m):
                    bi[j] -= f * bk[j]
            rows[i][k] = 0.0 + 0.0j
    for k in range(n - 1, -1, -1):
        inv = 1.0 / rows[k][k]
        rowk = rows[k]
        bk = rhs[k]
        for j in range(m):
            acc = bk[j]
            for i in range(k + 1, n):
                acc -= rowk[i] * rhs[i][j]
            bk[j] = acc * inv
    return _from_rows(rhs)
