"""Pure-numpy B-spline kernels (fallback backend).

Implements Cox-de Boor basis evaluation with derivatives (NURBS book
A2.3) and a forward-mode variant that carries partial derivatives with
respect to an arbitrary parameter vector through the recursion.  Duals
are stored as arrays of length 1+P: slot 0 is the value, slots 1..P the
partials.  The compiled backend mirrors this code operation-for-operation.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def find_span(knots: np.ndarray, degree: int, t: float) -> int:
    """Index i with knots[i] <= t < knots[i+1]; t == T maps to the last span."""
    n = len(knots) - degree - 2  # last control point index
    if t >= knots[n + 1]:
        i = n
        while knots[i] == knots[i + 1]:
            i -= 1
        return i
    lo, hi = degree, n + 1
    mid = (lo + hi) // 2
    while t < knots[mid] or t >= knots[mid + 1]:
        if t < knots[mid]:
            hi = mid
        else:
            lo = mid
        mid = (lo + hi) // 2
    return mid


def ders_basis(knots: np.ndarray, degree: int, t: float, n_ders: int):
    """Nonzero basis functions and derivatives at t.

    Returns (span, ders) where ders[r, j] is the r-th derivative of basis
    function span-degree+j at t, r = 0..n_ders.
    """
    p = degree
    i = find_span(knots, p, t)
    ndu = np.zeros((p + 1, p + 1))
    left = np.zeros(p + 1)
    right = np.zeros(p + 1)
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

    ders = np.zeros((n_ders + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.zeros((2, p + 1))
    for r in range(p + 1):
        s1, s2 = 0, 1
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
            s1, s2 = s2, s1

    fac = float(p)
    for k in range(1, n_ders + 1):
        ders[k, :] *= fac
        fac *= p - k
    return i, ders


def _dmul(a, b):
    out = a[0] * b
    out[1:] += b[0] * a[1:]
    return out


def _ddiv(a, b):
    out = np.empty_like(a)
    out[0] = a[0] / b[0]
    out[1:] = (a[1:] - out[0] * b[1:]) / b[0]
    return out


def ders_basis_dual(knots, dknots, degree: int, t: float, dt, n_ders: int):
    """Forward-mode ders_basis: also returns partials w.r.t. P parameters.

    dknots is (N, P) with the partials of each knot, dt is (P,) with the
    partials of the evaluation time.  Returns (span, ders, dders) with
    dders of shape (n_ders+1, degree+1, P).
    """
    p = degree
    P = len(dt)
    i = find_span(knots, p, t)

    def dual(val, grad):
        out = np.empty(P + 1)
        out[0] = val
        out[1:] = grad
        return out

    u = dual(t, dt)
    U = [dual(knots[j], dknots[j]) for j in range(len(knots))]

    zero = np.zeros(P + 1)
    ndu = [[zero.copy() for _ in range(p + 1)] for _ in range(p + 1)]
    left = [zero.copy() for _ in range(p + 1)]
    right = [zero.copy() for _ in range(p + 1)]
    ndu[0][0] = dual(1.0, np.zeros(P))
    for j in range(1, p + 1):
        left[j] = u - U[i + 1 - j]
        right[j] = U[i + j] - u
        saved = zero.copy()
        for r in range(j):
            ndu[j][r] = right[r + 1] + left[j - r]
            temp = _ddiv(ndu[r][j - 1], ndu[j][r])
            ndu[r][j] = saved + _dmul(right[r + 1], temp)
            saved = _dmul(left[j - r], temp)
        ndu[j][j] = saved

    ders = [[zero.copy() for _ in range(p + 1)] for _ in range(n_ders + 1)]
    for j in range(p + 1):
        ders[0][j] = ndu[j][p].copy()
    a = [[zero.copy() for _ in range(p + 1)] for _ in range(2)]
    for r in range(p + 1):
        s1, s2 = 0, 1
        a[0][0] = dual(1.0, np.zeros(P))
        for k in range(1, n_ders + 1):
            d = zero.copy()
            rk = r - k
            pk = p - k
            if r >= k:
                a[s2][0] = _ddiv(a[s1][0], ndu[pk + 1][rk])
                d = _dmul(a[s2][0], ndu[rk][pk])
            j1 = 1 if rk >= -1 else -rk
            j2 = k - 1 if r - 1 <= pk else p - r
            for j in range(j1, j2 + 1):
                a[s2][j] = _ddiv(a[s1][j] - a[s1][j - 1], ndu[pk + 1][rk + j])
                d = d + _dmul(a[s2][j], ndu[rk + j][pk])
            if r <= pk:
                a[s2][k] = _ddiv(-a[s1][k - 1], ndu[pk + 1][r])
                d = d + _dmul(a[s2][k], ndu[r][pk])
            ders[k][r] = d
            s1, s2 = s2, s1

    out = np.zeros((n_ders + 1, p + 1))
    dout = np.zeros((n_ders + 1, p + 1, P))
    fac = 1.0
    for k in range(n_ders + 1):
        if k > 0:
            fac *= p - k + 1
        for j in range(p + 1):
            out[k, j] = fac * ders[k][j][0]
            dout[k, j, :] = fac * ders[k][j][1:]
    return i, out, dout


def basis_grid(knots, degree: int, times, n_ders: int):
    """ders_basis over a vector of times.

    Returns (spans (nt,), ders (nt, n_ders+1, degree+1)).
    """
    nt = len(times)
    spans = np.empty(nt, dtype=np.int64)
    ders = np.empty((nt, n_ders + 1, degree + 1))
    for a in range(nt):
        spans[a], ders[a] = ders_basis(knots, degree, float(times[a]), n_ders)
    return spans, ders


def basis_grid_dual(knots, dknots, degree: int, times, dtimes, n_ders: int):
    """Forward-mode basis_grid; dtimes is (nt, P).

    Returns (spans, ders, dders) with dders of shape (nt, n_ders+1, degree+1, P).
    """
    nt = len(times)
    P = dtimes.shape[1]
    spans = np.empty(nt, dtype=np.int64)
    ders = np.empty((nt, n_ders + 1, degree + 1))
    dders = np.empty((nt, n_ders + 1, degree + 1, P))
    for a in range(nt):
        spans[a], ders[a], dders[a] = ders_basis_dual(
            knots, dknots, degree, float(times[a]), dtimes[a], n_ders
        )
    return spans, ders, dders
