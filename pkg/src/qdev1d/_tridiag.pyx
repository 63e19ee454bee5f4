# cython: boundscheck=False, wraparound=False, cdivision=True
"""Pivoted LU solver for complex tridiagonal systems.

Gaussian elimination with partial pivoting restricted to the tridiagonal
band (adjacent-row interchanges), which introduces at most one extra
superdiagonal of fill-in:

        | d0 u0 .  .  |        after elimination rows hold
        | l1 d1 u1 .  |   ->   (diag, upper, upper2) plus the
        | .  l2 d2 u2 |        multipliers applied to the rhs
        | .  .  l3 d3 |        on the fly.

Pivot comparisons use the |re| + |im| magnitude (the same measure LAPACK's
complex tridiagonal driver uses); a pivot below ``rtol`` times the largest
input magnitude reports the offending row instead of dividing by it.
"""

from libc.math cimport fabs


cdef inline double _mag(double complex z) noexcept:
    return fabs(z.real) + fabs(z.imag)


cpdef int factor_solve(double complex[::1] lower,
                       double complex[::1] diag,
                       double complex[::1] upper,
                       double complex[::1] rhs,
                       double complex[::1] upper2,
                       double rtol) except? -1:
    """Solve in place; ``rhs`` receives the solution.

    ``lower[i]`` is the entry left of the diagonal in row i (``lower[0]``
    unused); ``upper[i]`` sits right of the diagonal (``upper[n-1]`` unused);
    ``upper2`` is scratch for pivoting fill-in.  All five views are mutated.

    Returns 0 on success, or the 1-based row of a pivot whose magnitude
    falls below ``rtol * max input magnitude``.
    """
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double amax = 0.0, m
    cdef double thresh
    cdef double complex fact, tmp

    if n == 0:
        return 0

    for i in range(n):
        m = _mag(diag[i])
        if m > amax:
            amax = m
        if i > 0:
            m = _mag(lower[i])
            if m > amax:
                amax = m
        if i < n - 1:
            m = _mag(upper[i])
            if m > amax:
                amax = m
    if amax == 0.0:
        return 1
    thresh = rtol * amax

    for i in range(n - 1):
        if _mag(diag[i]) >= _mag(lower[i + 1]):
            # keep row order; eliminate the subdiagonal entry below
            if _mag(diag[i]) <= thresh:
                return <int>(i + 1)
            fact = lower[i + 1] / diag[i]
            diag[i + 1] = diag[i + 1] - fact * upper[i]
            rhs[i + 1] = rhs[i + 1] - fact * rhs[i]
            upper2[i] = 0.0
        else:
            # interchange rows i and i+1 (|lower| > |diag| >= 0, so no zero division)
            fact = diag[i] / lower[i + 1]
            diag[i] = lower[i + 1]
            tmp = diag[i + 1]
            diag[i + 1] = upper[i] - fact * tmp
            if i < n - 2:
                upper2[i] = upper[i + 1]
                upper[i + 1] = -fact * upper[i + 1]
            else:
                upper2[i] = 0.0
            upper[i] = tmp
            tmp = rhs[i]
            rhs[i] = rhs[i + 1]
            rhs[i + 1] = tmp - fact * rhs[i + 1]

    if _mag(diag[n - 1]) <= thresh:
        return <int>n

    rhs[n - 1] = rhs[n - 1] / diag[n - 1]
    if n > 1:
        rhs[n - 2] = (rhs[n - 2] - upper[n - 2] * rhs[n - 1]) / diag[n - 2]
    for i in range(n - 3, -1, -1):
        rhs[i] = (rhs[i] - upper[i] * rhs[i + 1] - upper2[i] * rhs[i + 2]) / diag[i]
    return 0
