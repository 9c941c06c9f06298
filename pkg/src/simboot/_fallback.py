"""Pure NumPy versions of the compiled kernels in ``_core.pyx``."""

import numpy as np

from .linalg import ldl_quadform_batch


def sym3_quadform(a00, a01, a02, a11, a12, a22, g0, g1, g2, rel_tol):
    shape = np.shape(a00)
    cols = [np.asarray(v, dtype=np.float64).reshape(-1) for v in (a00, a01, a02, a11, a12, a22)]
    v00, v01, v02, v11, v12, v22 = cols
    a = np.stack(
        [
            np.stack([v00, v01, v02], axis=-1),
            np.stack([v01, v11, v12], axis=-1),
            np.stack([v02, v12, v22], axis=-1),
        ],
        axis=1,
    )
    g = np.stack([np.asarray(v, dtype=np.float64).reshape(-1) for v in (g0, g1, g2)], axis=-1)
    q, ok = ldl_quadform_batch(a, g, rel_tol)
    q = np.where(ok, q, 0.0)
    return q.reshape(shape), ok.reshape(shape)


def qt_lr_batch(ys, us, taus, theta_hat, split_hat):
    ys = np.asarray(ys, dtype=np.float64)
    us = np.asarray(us, dtype=np.float64)
    taus = np.asarray(taus, dtype=np.float64)
    ta = np.asarray(theta_hat, dtype=np.float64)
    sa = np.asarray(split_hat, dtype=np.int64)
    n = ys.size
    nb = us.shape[0]
    out = np.zeros((taus.size, nb))
    ok = np.zeros(nb, dtype=bool)
    for b in range(nb):
        pu = np.concatenate([[0.0], np.cumsum(us[b])])
        total = pu[-1]
        if not total > 0.0:
            continue
        ok[b] = True
        puy = np.concatenate([[0.0], np.cumsum(us[b] * ys)])
        j = np.minimum(np.searchsorted(pu[1:], taus * total, side="left"), n - 1)
        tb = ys[j]
        low_is_hat = ta <= tb
        tl = np.where(low_is_hat, ta, tb)
        th = np.where(low_is_hat, tb, ta)
        sl = np.where(low_is_hat, sa, j)
        sh = np.where(low_is_hat, j, sa)
        c = taus * tl + (1.0 - taus) * th
        between = (puy[sh] - puy[sl]) - c * (pu[sh] - pu[sl])
        lr = (1.0 - taus) * (tl - th) * pu[sl] + taus * (th - tl) * (total - pu[sh]) + between
        out[:, b] = 2.0 * np.where(low_is_hat, lr, -lr)
    return out, ok


def union_count(s, z):
    s = np.asarray(s, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    return int(np.count_nonzero(np.any(s > z[:, None], axis=0)))
