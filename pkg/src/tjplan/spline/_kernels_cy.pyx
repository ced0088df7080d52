# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled B-spline kernels (hot backend).

Mirrors _kernels_py.py operation-for-operation; duals are rows of
length 1+P (value followed by partials).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


cdef int c_find_span(double[::1] knots, int degree, double t) noexcept nogil:
    cdef int n = knots.shape[0] - degree - 2
    cdef int lo, hi, mid, i
    if t >= knots[n + 1]:
        i = n
        while knots[i] == knots[i + 1]:
            i -= 1
        return i
    lo = degree
    hi = n + 1
    mid = (lo + hi) // 2
    while t < knots[mid] or t >= knots[mid + 1]:
        if t < knots[mid]:
            hi = mid
        else:
            lo = mid
        mid = (lo + hi) // 2
    return mid


def find_span(knots, int degree, double t):
    cdef double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    return c_find_span(kv, degree, t)


cdef void c_ders_basis(double[::1] knots, int degree, double t, int n_ders,
                       int i, double[:, ::1] ders,
                       double[:, ::1] ndu, double[::1] left, double[::1] right,
                       double[:, ::1] a) noexcept nogil:
    cdef int p = degree
    cdef int j, r, k, rk, pk, j1, j2, s1, s2, tmp
    cdef double saved, temp, d, fac

    ndu[0, 0] = 1.0
    for j in range(1, p + 1):
        left[j] = t - knots[i + 1 - j]
        right[j] = knots[i + j] - t
        saved = 0.0
        for r in range(j):
            ndu[j, r] = right[r + 1] + left[j - r]
            temp = ndu[r, j - 1] / ndu[j, r]
            ndu[r, j] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        ndu[j, j] = saved

    for j in range(p + 1):
        for k in range(n_ders + 1):
            ders[k, j] = 0.0
        ders[0, j] = ndu[j, p]
    for r in range(p + 1):
        s1 = 0
        s2 = 1
        a[0, 0] = 1.0
        for k in range(1, n_ders + 1):
            d = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if r <= pk:
                a[s2, k] = -a[s1, k - 1] / ndu[pk + 1, r]
                d += a[s2, k] * ndu[r, pk]
            ders[k, r] = d
            tmp = s1
            s1 = s2
            s2 = tmp

    fac = p
    for k in range(1, n_ders + 1):
        for j in range(p + 1):
            ders[k, j] *= fac
        fac *= p - k


def ders_basis(knots, int degree, double t, int n_ders):
    cdef double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef int i = c_find_span(kv, degree, t)
    ders = np.zeros((n_ders + 1, degree + 1))
    ndu = np.zeros((degree + 1, degree + 1))
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    a = np.zeros((2, degree + 1))
    c_ders_basis(kv, degree, t, n_ders, i, ders, ndu, left, right, a)
    return i, ders


def basis_grid(knots, int degree, times, int n_ders):
    cdef double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0]
    spans = np.empty(nt, dtype=np.int64)
    ders = np.empty((nt, n_ders + 1, degree + 1))
    cdef long long[::1] sp = spans
    cdef double[:, :, ::1] dv = ders
    ndu = np.zeros((degree + 1, degree + 1))
    left = np.zeros(degree + 1)
    right = np.zeros(degree + 1)
    a = np.zeros((2, degree + 1))
    cdef double[:, ::1] ndu_v = ndu
    cdef double[::1] l_v = left
    cdef double[::1] r_v = right
    cdef double[:, ::1] a_v = a
    cdef Py_ssize_t q
    cdef int i
    with nogil:
        for q in range(nt):
            i = c_find_span(kv, degree, tv[q])
            sp[q] = i
            c_ders_basis(kv, degree, tv[q], n_ders, i, dv[q], ndu_v, l_v, r_v, a_v)
    return spans, ders


# Dual arithmetic on rows of length m = 1 + P.

cdef inline void dual_mul(double* out, double* x, double* y, int m) noexcept nogil:
    cdef int q
    out[0] = x[0] * y[0]
    for q in range(1, m):
        out[q] = x[0] * y[q] + y[0] * x[q]


cdef inline void dual_div(double* out, double* x, double* y, int m) noexcept nogil:
    cdef int q
    out[0] = x[0] / y[0]
    for q in range(1, m):
        out[q] = (x[q] - out[0] * y[q]) / y[0]


cdef void c_ders_basis_dual(double[:, ::1] U, int degree, double* u, int n_ders,
                            int i, double[:, :, ::1] ders, int m,
                            double[:, :, ::1] ndu, double[:, ::1] left,
                            double[:, ::1] right, double[:, :, ::1] a,
                            double[::1] saved, double[::1] temp,
                            double[::1] d, double[::1] scratch) noexcept nogil:
    cdef int p = degree
    cdef int j, r, k, rk, pk, j1, j2, s1, s2, q, swp
    cdef double fac

    for j in range(p + 1):
        for r in range(p + 1):
            for q in range(m):
                ndu[j, r, q] = 0.0
    ndu[0, 0, 0] = 1.0
    for j in range(1, p + 1):
        for q in range(m):
            left[j, q] = u[q] - U[i + 1 - j, q]
            right[j, q] = U[i + j, q] - u[q]
        for q in range(m):
            saved[q] = 0.0
        for r in range(j):
            for q in range(m):
                ndu[j, r, q] = right[r + 1, q] + left[j - r, q]
            dual_div(&temp[0], &ndu[r, j - 1, 0], &ndu[j, r, 0], m)
            dual_mul(&scratch[0], &right[r + 1, 0], &temp[0], m)
            for q in range(m):
                ndu[r, j, q] = saved[q] + scratch[q]
            dual_mul(&saved[0], &left[j - r, 0], &temp[0], m)
        for q in range(m):
            ndu[j, j, q] = saved[q]

    for k in range(n_ders + 1):
        for j in range(p + 1):
            for q in range(m):
                ders[k, j, q] = 0.0
    for j in range(p + 1):
        for q in range(m):
            ders[0, j, q] = ndu[j, p, q]

    for r in range(p + 1):
        s1 = 0
        s2 = 1
        for q in range(m):
            a[0, 0, q] = 0.0
        a[0, 0, 0] = 1.0
        for k in range(1, n_ders + 1):
            for q in range(m):
                d[q] = 0.0
            rk = r - k
            pk = p - k
            if r >= k:
                dual_div(&a[s2, 0, 0], &a[s1, 0, 0], &ndu[pk + 1, rk, 0], m)
                dual_mul(&d[0], &a[s2, 0, 0], &ndu[rk, pk, 0], m)
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                for q in range(m):
                    scratch[q] = a[s1, j, q] - a[s1, j - 1, q]
                dual_div(&a[s2, j, 0], &scratch[0], &ndu[pk + 1, rk + j, 0], m)
                dual_mul(&scratch[0], &a[s2, j, 0], &ndu[rk + j, pk, 0], m)
                for q in range(m):
                    d[q] += scratch[q]
            if r <= pk:
                for q in range(m):
                    scratch[q] = -a[s1, k - 1, q]
                dual_div(&a[s2, k, 0], &scratch[0], &ndu[pk + 1, r, 0], m)
                dual_mul(&scratch[0], &a[s2, k, 0], &ndu[r, pk, 0], m)
                for q in range(m):
                    d[q] += scratch[q]
            for q in range(m):
                ders[k, r, q] = d[q]
            swp = s1
            s1 = s2
            s2 = swp

    fac = p
    for k in range(1, n_ders + 1):
        for j in range(p + 1):
            for q in range(m):
                ders[k, j, q] *= fac
        fac *= p - k


def ders_basis_dual(knots, dknots, int degree, double t, dt, int n_ders):
    spans, ders, dders = basis_grid_dual(
        knots, dknots, degree,
        np.asarray([t], dtype=np.float64),
        np.ascontiguousarray(dt, dtype=np.float64).reshape(1, -1),
        n_ders,
    )
    return int(spans[0]), ders[0], dders[0]


def basis_grid_dual(knots, dknots, int degree, times, dtimes, int n_ders):
    cdef double[::1] kv = np.ascontiguousarray(knots, dtype=np.float64)
    cdef double[:, ::1] dk = np.ascontiguousarray(dknots, dtype=np.float64)
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef double[:, ::1] dtv = np.ascontiguousarray(dtimes, dtype=np.float64)
    cdef Py_ssize_t nt = tv.shape[0]
    cdef int P = dtv.shape[1]
    cdef int m = P + 1
    cdef int p = degree
    cdef Py_ssize_t N = kv.shape[0]

    # knots and evaluation time as dual rows
    U_arr = np.empty((N, m))
    U_arr[:, 0] = np.asarray(knots, dtype=np.float64)
    U_arr[:, 1:] = np.asarray(dknots, dtype=np.float64)
    cdef double[:, ::1] U = U_arr

    spans = np.empty(nt, dtype=np.int64)
    ders = np.empty((nt, n_ders + 1, p + 1))
    dders = np.empty((nt, n_ders + 1, p + 1, P))
    cdef long long[::1] sp = spans
    cdef double[:, :, ::1] out_v = ders
    cdef double[:, :, :, ::1] dout_v = dders

    work = np.zeros((n_ders + 1, p + 1, m))
    ndu = np.zeros((p + 1, p + 1, m))
    left = np.zeros((p + 1, m))
    right = np.zeros((p + 1, m))
    a = np.zeros((2, p + 1, m))
    saved = np.zeros(m)
    temp = np.zeros(m)
    d = np.zeros(m)
    scratch = np.zeros(m)
    u = np.zeros(m)
    cdef double[:, :, ::1] work_v = work
    cdef double[:, :, ::1] ndu_v = ndu
    cdef double[:, ::1] left_v = left
    cdef double[:, ::1] right_v = right
    cdef double[:, :, ::1] a_v = a
    cdef double[::1] saved_v = saved
    cdef double[::1] temp_v = temp
    cdef double[::1] d_v = d
    cdef double[::1] scratch_v = scratch
    cdef double[::1] u_v = u

    cdef Py_ssize_t w
    cdef int i, k, j, q
    with nogil:
        for w in range(nt):
            i = c_find_span(kv, p, tv[w])
            sp[w] = i
            u_v[0] = tv[w]
            for q in range(P):
                u_v[q + 1] = dtv[w, q]
            c_ders_basis_dual(U, p, &u_v[0], n_ders, i, work_v, m,
                              ndu_v, left_v, right_v, a_v,
                              saved_v, temp_v, d_v, scratch_v)
            for k in range(n_ders + 1):
                for j in range(p + 1):
                    out_v[w, k, j] = work_v[k, j, 0]
                    for q in range(P):
                        dout_v[w, k, j, q] = work_v[k, j, q + 1]
    return spans, ders, dders
