import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simboot.errors import NonPositiveCurvature
from simboot.linalg import jacobi_eigh, ldl_factor, ldl_quadform_batch, spectral_norm_sym, sym_inv_sqrt


def random_spd(rng, p=3):
    a = rng.normal(size=(p, p))
    return a @ a.T + 0.1 * np.eye(p)


def cubic_roots_sym(a):
    """Eigenvalues of a symmetric 3x3 matrix from its characteristic polynomial (trigonometric form)."""
    q = np.trace(a) / 3.0
    b = a - q * np.eye(3)
    p = np.sqrt(np.sum(b * b) / 6.0)
    if p == 0.0:
        return np.full(3, q)
    r = np.clip(np.linalg.det(b / p) / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    e1 = q + 2 * p * np.cos(phi)
    e3 = q + 2 * p * np.cos(phi + 2 * np.pi / 3)
    return np.sort([e1, 3 * q - e1 - e3, e3])


def test_ldl_solve_matches_numpy(nprng):
    for _ in range(200):
        a = random_spd(nprng)
        b = nprng.normal(size=3)
        x = ldl_factor(a).solve(b)
        np.testing.assert_allclose(a @ x, b, atol=1e-9 * np.abs(b).max() * np.linalg.cond(a))


def test_ldl_matrix_rhs_and_inverse(nprng):
    a = random_spd(nprng)
    f = ldl_factor(a)
    np.testing.assert_allclose(f.inverse() @ a, np.eye(3), atol=1e-10)
    rhs = nprng.normal(size=(3, 4))
    np.testing.assert_allclose(a @ f.solve(rhs), rhs, atol=1e-9)


def test_ldl_rejects_indefinite_and_ill_conditioned():
    with pytest.raises(NonPositiveCurvature):
        ldl_factor(np.diag([1.0, -1.0, 2.0]))
    with pytest.raises(NonPositiveCurvature):
        ldl_factor(np.diag([1.0, 1.0, 1e-12]))
    ldl_factor(np.diag([1.0, 1.0, 1e-9]))


def test_ldl_pivots_past_zero_leading_entry():
    a = np.array([[0.0, 1.0, 0.0], [1.0, 5.0, 0.0], [0.0, 0.0, 3.0]])
    # indefinite despite a pivotable layout
    with pytest.raises(NonPositiveCurvature):
        ldl_factor(a)
    a = np.array([[1e-3, 0.0, 0.0], [0.0, 5.0, 1.0], [0.0, 1.0, 3.0]])
    np.testing.assert_allclose(ldl_factor(a).solve([1.0, 2.0, 3.0]), np.linalg.solve(a, [1.0, 2.0, 3.0]))


def test_batch_quadform(nprng):
    a = np.stack([random_spd(nprng) for _ in range(50)])
    g = nprng.normal(size=(50, 3))
    q, ok = ldl_quadform_batch(a, g)
    assert ok.all()
    expected = np.einsum("ni,ni->n", g, np.linalg.solve(a, g[..., None])[..., 0])
    np.testing.assert_allclose(q, expected, rtol=1e-10)


def test_jacobi_vs_characteristic_polynomial(nprng):
    worst = 0.0
    for _ in range(500):
        a = nprng.normal(size=(3, 3))
        a = a + a.T
        w, v = jacobi_eigh(a)
        worst = max(worst, np.max(np.abs(w - cubic_roots_sym(a))))
        np.testing.assert_allclose(a @ v, v * w, atol=1e-10)
    assert worst < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=6, max_size=6))
def test_jacobi_eigenvalues_property(vals):
    a = np.zeros((3, 3))
    a[np.triu_indices(3)] = vals
    a = a + a.T - np.diag(np.diag(a))
    w, v = jacobi_eigh(a)
    np.testing.assert_allclose(v.T @ v, np.eye(3), atol=1e-10)
    np.testing.assert_allclose(np.sort(w), np.linalg.eigvalsh(a), atol=1e-9 * max(1.0, np.abs(a).max()))


def test_spectral_norm_and_inverse_sqrt(nprng):
    a = random_spd(nprng)
    h = sym_inv_sqrt(a)
    np.testing.assert_allclose(h @ a @ h, np.eye(3), atol=1e-10)
    assert spectral_norm_sym(-3 * np.eye(3)) == pytest.approx(3.0)
    assert sym_inv_sqrt(np.diag([1.0, 0.0, 1.0])) is None
