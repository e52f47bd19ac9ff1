import numpy as np
import pytest

from cmiflow import linalg
from cmiflow.errors import (
    DimensionMismatch,
    EmptyKeepSet,
    NotDensityMatrix,
    NotHermitian,
)

import oracles


def rand_herm(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def test_kron_identities():
    i2 = np.eye(2)
    assert np.array_equal(linalg.kron(i2, i2), np.eye(4))
    a = np.diag([1.0, 0.0])
    b = np.diag([0.0, 1.0])
    assert np.array_equal(linalg.kron(a, b), np.diag([0.0, 1.0, 0.0, 0.0]))


def test_kron_sigma_x_involution():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    k = linalg.kron(sx, sx)
    assert np.allclose(k @ k, np.eye(4))


def test_kron_associative(rng):
    # float multiplication is not associative, so "exact" here means a few ulp
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    lhs = linalg.kron(linalg.kron(a, b), c)
    rhs = linalg.kron(a, linalg.kron(b, c))
    assert np.allclose(lhs, rhs, rtol=1e-15, atol=0.0)
    # exact on exactly-representable entries
    p0 = np.diag([1.0, 0.0])
    assert np.array_equal(
        linalg.kron(linalg.kron(p0, np.eye(3)), p0), linalg.kron(p0, linalg.kron(np.eye(3), p0))
    )


def test_hermitian_eig_diagonal():
    w, v = linalg.hermitian_eig(np.diag([0.25, 0.75]))
    assert np.allclose(w, [0.25, 0.75])
    assert np.allclose(np.abs(v), np.eye(2))


def test_hermitian_eig_projector():
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    w, _ = linalg.hermitian_eig((np.eye(2) + sx) / 2)
    assert np.allclose(w, [0.0, 1.0], atol=1e-12)


def test_hermitian_eig_reconstruction(rng):
    for n in (3, 8, 24):
        h = rand_herm(rng, n)
        w, v = linalg.hermitian_eig(h)
        assert np.all(np.diff(w) >= -1e-14)
        rec = (v * w) @ v.conj().T
        assert np.linalg.norm(rec - h) / np.linalg.norm(h) < 1e-10
        assert np.linalg.norm(v.conj().T @ v - np.eye(n)) < 1e-10
        # eigenvalue sum = trace
        assert abs(w.sum() - np.trace(h).real) < 1e-10 * max(1, abs(np.trace(h).real))


def test_hermitian_eig_rejects_nonhermitian(rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    with pytest.raises(NotHermitian):
        linalg.hermitian_eig(m)


def test_permute_factors_swap():
    v = np.zeros(4)
    v[0 * 2 + 1] = 1.0  # |01>
    rho = np.outer(v, v)
    out = linalg.permute_factors(rho, [2, 2], [1, 0])
    w = np.zeros(4)
    w[1 * 2 + 0] = 1.0  # |10>
    assert np.allclose(out, np.outer(w, w))


def test_permute_factors_identity_and_roundtrip(rng):
    dims = [2, 3, 2]
    d = int(np.prod(dims))
    rho = oracles.random_density(rng, d)
    assert np.array_equal(linalg.permute_factors(rho, dims, [0, 1, 2]), rho)
    once = linalg.permute_factors(rho, dims, [2, 0, 1])
    back = linalg.permute_factors(once, [dims[2], dims[0], dims[1]], [1, 2, 0])
    assert np.allclose(back, rho, atol=1e-14)


def test_permute_preserves_spectrum(rng):
    dims = [2, 2, 3]
    rho = rand_herm(rng, 12)
    w0 = np.sort(np.linalg.eigvalsh(rho))
    out = linalg.permute_factors(rho, dims, [2, 1, 0])
    assert np.allclose(np.sort(np.linalg.eigvalsh(out)), w0, atol=1e-10)


def test_partial_trace_bell():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    rho = np.outer(v, v)
    assert np.allclose(linalg.partial_trace(rho, [2, 2], [0]), np.eye(2) / 2)


def test_partial_trace_product(rng):
    a = oracles.random_density(rng, 2)
    b = oracles.random_density(rng, 3)
    got = linalg.partial_trace(np.kron(a, b), [2, 3], [0])
    assert np.allclose(got, a, atol=1e-12)
    # tr(b) * a when both kept dims requested
    assert np.allclose(linalg.partial_trace(np.kron(a, b), [2, 3], [1]), b, atol=1e-12)


def test_partial_trace_ghz():
    v = np.zeros(8)
    v[0] = v[7] = 1 / np.sqrt(2)
    rho = np.outer(v, v)
    got = linalg.partial_trace(rho, [2, 2, 2], [0, 1])
    want = np.zeros((4, 4))
    want[0, 0] = want[3, 3] = 0.5
    assert np.allclose(got, want)


def test_partial_trace_errors():
    with pytest.raises(EmptyKeepSet):
        linalg.partial_trace(np.eye(4), [2, 2], [])
    with pytest.raises(DimensionMismatch):
        linalg.partial_trace(np.eye(4), [2, 3], [0])


def test_purify_pure_and_mixed(rng):
    pure = np.zeros((2, 2), dtype=complex)
    pure[0, 0] = 1.0
    psi = linalg.purify(pure)
    assert psi.size == 2  # rank-1 purifier
    assert abs(abs(psi[0]) - 1.0) < 1e-12

    half = np.eye(2) / 2
    psi = linalg.purify(half)
    assert psi.size == 4
    rho = np.outer(psi, psi.conj())
    assert np.allclose(linalg.partial_trace(rho, [2, 2], [0]), half, atol=1e-9)

    qutrit = oracles.random_density(rng, 3, rank=3)
    psi = linalg.purify(qutrit)
    rho = np.outer(psi, psi.conj())
    assert np.linalg.norm(linalg.partial_trace(rho, [3, 3], [0]) - qutrit) < 1e-9


def test_purify_rejects_invalid():
    with pytest.raises(NotDensityMatrix):
        linalg.purify(np.diag([1.2, -0.2]))
