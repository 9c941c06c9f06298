# cython: language_level=3
"""Compiled kernels for the K x B bootstrap loops.

Signatures and semantics mirror :mod:`simboot._fallback` exactly.
"""

import numpy as np

cimport cython


cdef inline int _ldl3_quadform(double* a, double* g, double rel_tol, double* out) noexcept nogil:
    # a: row-major 3x3 (overwritten), g: rhs (overwritten)
    cdef double d[3]
    cdef double l[3]
    cdef int j, i, k, q
    cdef double tmp, dj, quad = 0.0, dmin, dmax
    for j in range(3):
        q = j
        for i in range(j + 1, 3):
            if a[i * 4] > a[q * 4]:
                q = i
        if q != j:
            for k in range(3):
                tmp = a[j * 3 + k]; a[j * 3 + k] = a[q * 3 + k]; a[q * 3 + k] = tmp
            for k in range(3):
                tmp = a[k * 3 + j]; a[k * 3 + j] = a[k * 3 + q]; a[k * 3 + q] = tmp
            tmp = g[j]; g[j] = g[q]; g[q] = tmp
        dj = a[j * 4]
        if not dj > 0.0:
            return 0
        d[j] = dj
        for i in range(j + 1, 3):
            l[i] = a[i * 3 + j] / dj
        for i in range(j + 1, 3):
            g[i] -= l[i] * g[j]
            for k in range(j + 1, 3):
                a[i * 3 + k] -= dj * l[i] * l[k]
        quad += g[j] * g[j] / dj
    dmin = d[0]; dmax = d[0]
    for j in range(1, 3):
        if d[j] < dmin:
            dmin = d[j]
        if d[j] > dmax:
            dmax = d[j]
    if dmin < rel_tol * dmax:
        return 0
    out[0] = quad
    return 1


@cython.boundscheck(False)
@cython.wraparound(False)
def sym3_quadform(a00, a01, a02, a11, a12, a22, g0, g1, g2, double rel_tol):
    """``g^T A^{-1} g`` elementwise over arrays of symmetric 3x3 systems."""
    shape = np.shape(a00)
    cdef const double[::1] v00 = np.ascontiguousarray(a00, dtype=np.float64).reshape(-1)
    cdef const double[::1] v01 = np.ascontiguousarray(a01, dtype=np.float64).reshape(-1)
    cdef const double[::1] v02 = np.ascontiguousarray(a02, dtype=np.float64).reshape(-1)
    cdef const double[::1] v11 = np.ascontiguousarray(a11, dtype=np.float64).reshape(-1)
    cdef const double[::1] v12 = np.ascontiguousarray(a12, dtype=np.float64).reshape(-1)
    cdef const double[::1] v22 = np.ascontiguousarray(a22, dtype=np.float64).reshape(-1)
    cdef const double[::1] w0 = np.ascontiguousarray(g0, dtype=np.float64).reshape(-1)
    cdef const double[::1] w1 = np.ascontiguousarray(g1, dtype=np.float64).reshape(-1)
    cdef const double[::1] w2 = np.ascontiguousarray(g2, dtype=np.float64).reshape(-1)
    cdef Py_ssize_t m = v00.shape[0], i
    q_arr = np.zeros(m)
    ok_arr = np.zeros(m, dtype=np.uint8)
    cdef double[::1] q = q_arr
    cdef unsigned char[::1] ok = ok_arr
    cdef double a[9]
    cdef double g[3]
    cdef double res
    with nogil:
        for i in range(m):
            a[0] = v00[i]; a[1] = v01[i]; a[2] = v02[i]
            a[3] = v01[i]; a[4] = v11[i]; a[5] = v12[i]
            a[6] = v02[i]; a[7] = v12[i]; a[8] = v22[i]
            g[0] = w0[i]; g[1] = w1[i]; g[2] = w2[i]
            if _ldl3_quadform(a, g, rel_tol, &res):
                q[i] = res
                ok[i] = 1
    return q_arr.reshape(shape), ok_arr.astype(bool).reshape(shape)


@cython.boundscheck(False)
@cython.wraparound(False)
def qt_lr_batch(ys, us, taus, theta_hat, split_hat):
    """Bootstrap check-loss likelihood ratios.

    ``ys``: ascending responses (n,); ``us``: multipliers in the same order,
    replicate-major (B, n); ``split_hat[k]`` = #{y < theta_hat[k]}.
    Returns ``2 (L_b(theta_b) - L_b(theta_hat))`` as (K, B) and a (B,) mask of
    replicates with positive total weight.
    """
    cdef const double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(us, dtype=np.float64)
    cdef const double[::1] tau = np.ascontiguousarray(taus, dtype=np.float64)
    cdef const double[::1] th = np.ascontiguousarray(theta_hat, dtype=np.float64)
    cdef const long long[::1] sh = np.ascontiguousarray(split_hat, dtype=np.int64)
    cdef Py_ssize_t n = y.shape[0], nb = u.shape[0], nk = tau.shape[0]
    out_arr = np.zeros((nk, nb))
    ok_arr = np.zeros(nb, dtype=np.uint8)
    pu_arr = np.zeros(n + 1)
    cdef double[:, ::1] out = out_arr
    cdef unsigned char[::1] ok = ok_arr
    cdef double[::1] pu = pu_arr
    cdef Py_ssize_t b, i, k, lo, hi, mid, sl, sh_
    cdef double total, target, tb, ta, tl, th_, c, between, tk, lr
    with nogil:
        for b in range(nb):
            pu[0] = 0.0
            for i in range(n):
                pu[i + 1] = pu[i] + u[b, i]
            total = pu[n]
            if not total > 0.0:
                continue
            ok[b] = 1
            for k in range(nk):
                tk = tau[k]
                target = tk * total
                lo = 0
                hi = n - 1
                while lo < hi:
                    mid = (lo + hi) // 2
                    if pu[mid + 1] >= target:
                        hi = mid
                    else:
                        lo = mid + 1
                tb = y[lo]
                ta = th[k]
                if ta <= tb:
                    tl = ta; th_ = tb; sl = sh[k]; sh_ = lo
                else:
                    tl = tb; th_ = ta; sl = lo; sh_ = sh[k]
                c = tk * tl + (1.0 - tk) * th_
                between = 0.0
                for i in range(sl, sh_):
                    between += u[b, i] * (y[i] - c)
                lr = (1.0 - tk) * (tl - th_) * pu[sl] + tk * (th_ - tl) * (total - pu[sh_]) + between
                if ta > tb:
                    lr = -lr
                out[k, b] = 2.0 * lr
    return out_arr, ok_arr.astype(bool)


@cython.boundscheck(False)
@cython.wraparound(False)
def union_count(s, z):
    """Number of columns b with ``s[k, b] > z[k]`` for some k."""
    cdef const double[:, ::1] sv = np.ascontiguousarray(s, dtype=np.float64)
    cdef const double[::1] zv = np.ascontiguousarray(z, dtype=np.float64)
    cdef Py_ssize_t nk = sv.shape[0], nb = sv.shape[1], k, b
    hit_arr = np.zeros(nb, dtype=np.uint8)
    cdef unsigned char[::1] hit = hit_arr
    cdef Py_ssize_t count = 0
    cdef double zk
    with nogil:
        for k in range(nk):
            zk = zv[k]
            for b in range(nb):
                if sv[k, b] > zk:
                    hit[b] = 1
        for b in range(nb):
            count += hit[b]
    return int(count)
