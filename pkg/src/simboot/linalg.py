"""Small dense symmetric linear algebra: pivoted LDL^T and cyclic Jacobi.

Everything here works on tiny matrices (p <= 3 in practice). The batched
LDL^T routine is vectorised over a leading axis so it doubles as the NumPy
fallback for the compiled 3x3 kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveCurvature, NumericalFailure

PIVOT_RTOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 30


def ldl_batch(a, rel_tol=PIVOT_RTOL):
    """Diagonally pivoted LDL^T of a stack of symmetric matrices.

    Returns ``(perm, L, d, ok)`` with ``A[perm][:, perm] = L diag(d) L^T`` for
    every system where ``ok`` is true. A system is rejected when a pivot is not
    strictly positive or the smallest pivot falls below ``rel_tol`` times the
    largest one.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    if a.ndim == 2:
        a = a[None]
    n_sys, p, _ = a.shape
    rows = np.arange(n_sys)
    perm = np.tile(np.arange(p), (n_sys, 1))
    lower = np.zeros_like(a)
    lower[:, np.arange(p), np.arange(p)] = 1.0
    d = np.empty((n_sys, p))
    ok = np.ones(n_sys, dtype=bool)

    for j in range(p):
        diag = a[:, np.arange(j, p), np.arange(j, p)]
        q = j + np.argmax(diag, axis=1)
        swap = q != j
        if swap.any():
            r, qs = rows[swap], q[swap]
            _swap_sym(a, r, j, qs)
            perm[r, j], perm[r, qs] = perm[r, qs], perm[r, j].copy()
            if j > 0:
                tmp = lower[r, j, :j].copy()
                lower[r, j, :j] = lower[r, qs, :j]
                lower[r, qs, :j] = tmp
        dj = a[:, j, j].copy()
        bad = ~(dj > 0.0)
        ok &= ~bad
        dj[bad] = 1.0
        d[:, j] = dj
        col = a[:, j + 1:, j] / dj[:, None]
        lower[:, j + 1:, j] = col
        a[:, j + 1:, j + 1:] -= dj[:, None, None] * col[:, :, None] * col[:, None, :]

    ok &= d.min(axis=1) >= rel_tol * d.max(axis=1)
    return perm, lower, d, ok


def _swap_sym(a, r, j, qs):
    row_j = a[r, j, :].copy()
    a[r, j, :] = a[r, qs, :]
    a[r, qs, :] = row_j
    col_j = a[r, :, j].copy()
    a[r, :, j] = a[r, :, qs]
    a[r, :, qs] = col_j


def _forward(lower, b):
    z = b.copy()
    p = z.shape[1]
    for i in range(1, p):
        z[:, i] -= np.einsum("nj,nj->n", lower[:, i, :i], z[:, :i])
    return z


def ldl_quadform_batch(a, g, rel_tol=PIVOT_RTOL):
    """``g_n^T A_n^{-1} g_n`` for each system, plus the acceptance mask."""
    perm, lower, d, ok = ldl_batch(a, rel_tol)
    g = np.asarray(g, dtype=np.float64).reshape(len(d), -1)
    z = _forward(lower, np.take_along_axis(g, perm, axis=1))
    return np.sum(z * z / d, axis=1), ok


@dataclass(frozen=True)
class LDLFactor:
    perm: np.ndarray
    lower: np.ndarray
    d: np.ndarray

    def solve(self, b):
        """Solve ``A x = b``; ``b`` may be a vector or a ``(p, m)`` matrix."""
        b = np.asarray(b, dtype=np.float64)
        vec = b.ndim == 1
        rhs = b[:, None] if vec else b
        y = rhs[self.perm]
        p = len(self.d)
        for i in range(1, p):
            y[i] -= self.lower[i, :i] @ y[:i]
        y /= self.d[:, None]
        for i in range(p - 2, -1, -1):
            y[i] -= self.lower[i + 1:, i] @ y[i + 1:]
        x = np.empty_like(y)
        x[self.perm] = y
        return x[:, 0] if vec else x

    def inverse(self):
        return self.solve(np.eye(len(self.d)))


def ldl_factor(a, rel_tol=PIVOT_RTOL):
    """Factor one symmetric matrix; raises ``NonPositiveCurvature`` if rejected."""
    perm, lower, d, ok = ldl_batch(np.asarray(a, dtype=np.float64)[None], rel_tol)
    if not ok[0]:
        raise NonPositiveCurvature(
            f"matrix is not safely positive definite (pivots {d[0].tolist()})"
        )
    return LDLFactor(perm[0], lower[0], d[0])


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi.

    Returns eigenvalues in ascending order and the matching eigenvectors as
    columns. Sweeps stop once the off-diagonal Frobenius mass drops below
    ``tol`` times the full Frobenius norm.
    """
    a = np.array(a, dtype=np.float64, copy=True)
    p = a.shape[0]
    v = np.eye(p)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(p), v
    offdiag = ~np.eye(p, dtype=bool)
    for _ in range(max_sweeps):
        if np.linalg.norm(a[offdiag]) <= tol * scale:
            break
        for i in range(p - 1):
            for j in range(i + 1, p):
                aij = a[i, j]
                if aij == 0.0:
                    continue
                g = 100.0 * abs(aij)
                if abs(a[i, i]) + g == abs(a[i, i]) and abs(a[j, j]) + g == abs(a[j, j]):
                    # negligible next to both diagonals
                    a[i, j] = a[j, i] = 0.0
                    continue
                theta = (a[j, j] - a[i, i]) / (2.0 * aij)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                ai, aj = a[:, i].copy(), a[:, j].copy()
                a[:, i] = c * ai - s * aj
                a[:, j] = s * ai + c * aj
                ai, aj = a[i, :].copy(), a[j, :].copy()
                a[i, :] = c * ai - s * aj
                a[j, :] = s * ai + c * aj
                vi, vj = v[:, i].copy(), v[:, j].copy()
                v[:, i] = c * vi - s * vj
                v[:, j] = s * vi + c * vj
    else:
        if np.linalg.norm(a[offdiag]) > tol * scale:
            raise NumericalFailure("Jacobi eigensolver did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w)
    return w[order], v[:, order]


def spectral_norm_sym(a):
    w, _ = jacobi_eigh(a)
    return float(np.max(np.abs(w)))


def sym_inv_sqrt(a, rel_tol=1e-14):
    """``A^{-1/2}`` for symmetric positive definite ``A``; ``None`` if not PD."""
    w, v = jacobi_eigh(a)
    if not w[0] > rel_tol * max(w[-1], 0.0):
        return None
    return (v / np.sqrt(w)) @ v.T
