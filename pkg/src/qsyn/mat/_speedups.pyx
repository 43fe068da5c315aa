# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled dense matrix kernels.

Same algorithms as qsyn.mat._pure (unitary Hessenberg reduction + shifted
QR iteration for the complex Schur form; partially pivoted Gaussian
elimination), translated to C-typed loops.  Either backend can serve the
facade in qsyn.mat; this one is ~two orders of magnitude faster on the
8x8-16x16 matrices that dominate sweeps and norm bisections.
"""

import numpy as np

from qsyn.errors import NumericalError, SingularMatrixError

from libc.math cimport copysign, fabs, hypot, sqrt

cdef double _EPS = 2.220446049250313e-16
cdef int _MAX_WINDOW_ITERS = 50
cdef int _TOTAL_ITER_FACTOR = 60


cdef inline double _cabs(double complex z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef double complex _csqrt(double complex z) noexcept nogil:
    cdef double re = z.real
    cdef double im = z.imag
    cdef double m, u
    if re == 0.0 and im == 0.0:
        return 0.0
    m = hypot(re, im)
    u = sqrt(0.5 * (m + fabs(re)))
    if re >= 0.0:
        return u + (im / (2.0 * u)) * 1j
    return fabs(im) / (2.0 * u) + copysign(u, im) * 1j


cdef int _hessenberg(double complex[:, ::1] h, double complex[:, ::1] q,
                     bint want_q, double complex[::1] v) except -1:
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t k, i, j, m
    cdef double xnorm, vnorm2, tau
    cdef double complex x0, phase, alpha, s
    for k in range(n - 2):
        xnorm = 0.0
        for i in range(k + 1, n):
            xnorm += _cabs(h[i, k]) ** 2
        xnorm = sqrt(xnorm)
        if xnorm == 0.0:
            continue
        x0 = h[k + 1, k]
        if x0 != 0:
            phase = x0 / _cabs(x0)
        else:
            phase = 1.0
        alpha = -phase * xnorm
        m = n - k - 1
        for i in range(m):
            v[i] = h[k + 1 + i, k]
        v[0] = v[0] - alpha
        vnorm2 = 0.0
        for i in range(m):
            vnorm2 += _cabs(v[i]) ** 2
        if vnorm2 == 0.0:
            continue
        tau = 2.0 / vnorm2
        for j in range(k, n):
            s = 0.0
            for i in range(m):
                s = s + v[i].conjugate() * h[k + 1 + i, j]
            s = tau * s
            if s != 0:
                for i in range(m):
                    h[k + 1 + i, j] = h[k + 1 + i, j] - s * v[i]
        for i in range(n):
            s = 0.0
            for j in range(m):
                s = s + h[i, k + 1 + j] * v[j]
            s = tau * s
            if s != 0:
                for j in range(m):
                    h[i, k + 1 + j] = h[i, k + 1 + j] - s * v[j].conjugate()
        if want_q:
            for i in range(n):
                s = 0.0
                for j in range(m):
                    s = s + q[i, k + 1 + j] * v[j]
                s = tau * s
                if s != 0:
                    for j in range(m):
                        q[i, k + 1 + j] = q[i, k + 1 + j] - s * v[j].conjugate()
        h[k + 1, k] = alpha
        for i in range(k + 2, n):
            h[i, k] = 0.0
    return 0


cdef inline double complex _wilkinson_shift(double complex a, double complex b,
                                            double complex c, double complex d) noexcept nogil:
    cdef double complex half = (a - d) / 2.0
    cdef double complex prod = b * c
    cdef double complex disc = _csqrt(half * half + prod)
    cdef double complex den
    if (half.real * disc.real + half.imag * disc.imag) < 0.0:
        disc = -disc
    den = half + disc
    if den == 0:
        return d
    return d - prod / den


cdef int _qr_iterate(double complex[:, ::1] h, double complex[:, ::1] q,
                     bint want_q, double complex[::1] cs,
                     double complex[::1] ss) except -1:
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t hi, lo, i, j, row, idx
    cdef int total = 0, its = 0
    cdef double scale = 0.0, s_abs, r
    cdef double complex shift, a, b, c, s, cc, sc, t1, t2
    for i in range(n):
        for j in range(n):
            scale += _cabs(h[i, j]) ** 2
    scale = sqrt(scale)
    hi = n - 1
    while hi > 0:
        lo = hi
        while lo > 0:
            s_abs = _cabs(h[lo - 1, lo - 1]) + _cabs(h[lo, lo])
            if s_abs == 0.0:
                s_abs = scale
            if _cabs(h[lo, lo - 1]) <= _EPS * s_abs:
                h[lo, lo - 1] = 0.0
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
            shift = 0.75 * _cabs(h[hi, hi - 1]) + h[hi, hi]
        else:
            shift = _wilkinson_shift(h[hi - 1, hi - 1], h[hi - 1, hi],
                                     h[hi, hi - 1], h[hi, hi])

        for i in range(lo, hi + 1):
            h[i, i] = h[i, i] - shift
        for i in range(lo, hi):
            a = h[i, i]
            b = h[i + 1, i]
            r = hypot(_cabs(a), _cabs(b))
            if r == 0.0:
                c = 1.0
                s = 0.0
            else:
                c = a / r
                s = b / r
            cs[i] = c
            ss[i] = s
            cc = c.conjugate()
            sc = s.conjugate()
            for j in range(i, n):
                t1 = h[i, j]
                t2 = h[i + 1, j]
                h[i, j] = cc * t1 + sc * t2
                h[i + 1, j] = -s * t1 + c * t2
            h[i + 1, i] = 0.0
        for i in range(lo, hi):
            c = cs[i]
            s = ss[i]
            cc = c.conjugate()
            sc = s.conjugate()
            for row in range(0, i + 2):
                t1 = h[row, i]
                t2 = h[row, i + 1]
                h[row, i] = c * t1 + s * t2
                h[row, i + 1] = -sc * t1 + cc * t2
            if want_q:
                for row in range(n):
                    t1 = q[row, i]
                    t2 = q[row, i + 1]
                    q[row, i] = c * t1 + s * t2
                    q[row, i + 1] = -sc * t1 + cc * t2
        for i in range(lo, hi + 1):
            h[i, i] = h[i, i] + shift
    return 0


def schur(a, bint want_q=True):
    """Complex Schur decomposition (t, q) with a = q t q^H; q is None
    when want_q is False."""
    t = np.array(a, dtype=np.complex128, order="C")
    cdef Py_ssize_t n = t.shape[0]
    cdef Py_ssize_t i
    q = np.eye(n, dtype=np.complex128) if want_q else None
    if n > 1:
        work = np.empty(max(n - 1, 1), dtype=np.complex128)
        cs = np.empty(n, dtype=np.complex128)
        ss = np.empty(n, dtype=np.complex128)
        _hessenberg(t, q if want_q else t, want_q, work)
        _qr_iterate(t, q if want_q else t, want_q, cs, ss)
    for i in range(1, n):
        t[i, :i] = 0.0
    return t, q


def eig(a):
    """All eigenvalues of a square matrix, in Schur (deflation) order."""
    t, _ = schur(a, want_q=False)
    return np.diag(t).copy()


def solve(a, b):
    """Solve AX = B by Gaussian elimination with partial pivoting."""
    cdef double complex[:, ::1] u = np.array(a, dtype=np.complex128, order="C")
    x_arr = np.array(b, dtype=np.complex128, order="C")
    cdef double complex[:, ::1] x = x_arr
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef Py_ssize_t i, j, k, p
    cdef double scale = 0.0, best, cur
    cdef double complex inv, f, acc, tmp
    for i in range(n):
        for j in range(n):
            cur = _cabs(u[i, j])
            if cur > scale:
                scale = cur
    cdef double pivot_floor = n * _EPS * scale
    for k in range(n):
        p = k
        best = _cabs(u[k, k])
        for i in range(k + 1, n):
            cur = _cabs(u[i, k])
            if cur > best:
                best = cur
                p = i
        if best <= pivot_floor:
            raise SingularMatrixError(
                f"singular system: pivot {best:.3e} at column {k}"
            )
        if p != k:
            for j in range(n):
                tmp = u[k, j]
                u[k, j] = u[p, j]
                u[p, j] = tmp
            for j in range(m):
                tmp = x[k, j]
                x[k, j] = x[p, j]
                x[p, j] = tmp
        inv = 1.0 / u[k, k]
        for i in range(k + 1, n):
            f = u[i, k] * inv
            if f != 0:
                for j in range(k + 1, n):
                    u[i, j] = u[i, j] - f * u[k, j]
                for j in range(m):
                    x[i, j] = x[i, j] - f * x[k, j]
            u[i, k] = 0.0
    for k in range(n - 1, -1, -1):
        inv = 1.0 / u[k, k]
        for j in range(m):
            acc = x[k, j]
            for i in range(k + 1, n):
                acc = acc - u[k, i] * x[i, j]
            x[k, j] = acc * inv
    return x_arr
