"""Dense complex-matrix kernel: products, Kronecker products, Hermitian
eigendecomposition, tensor-factor permutation, partial trace, purification.

Matrices are numpy complex128 arrays, row-major (each entry stored as an
interleaved (re, im) pair). All functions are pure.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from . import backend
from .errors import (
    DimensionMismatch,
    EmptyKeepSet,
    NoConvergence,
    NotDensityMatrix,
    NotHermitian,
)
from .tolerances import EIG_NEG_TOL, HERM_TOL, PURIFY_RANK_TOL, TRACE_TOL


class HermitianSpectrum(NamedTuple):
    eigenvalues: np.ndarray   # ascending, real
    eigenvectors: np.ndarray  # unitary, columns are eigenvectors


def dagger(m):
    """Conjugate transpose."""
    return np.conj(np.swapaxes(m, -1, -2))


def as_cmatrix(m):
    """Coerce to a C-contiguous complex128 2-D array."""
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={a.ndim}")
    return a


def kron(a, b):
    """Kronecker product, (a (x) b)[i*rb+k, j*cb+l] = a[i,j] b[k,l]."""
    return np.kron(as_cmatrix(a), as_cmatrix(b))


def hermiticity_defect(m):
    """Relative Frobenius distance of m from its Hermitian part."""
    m = as_cmatrix(m)
    scale = np.linalg.norm(m)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(m - dagger(m)) / scale)


def hermitian_eig(m, tol: float = HERM_TOL) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    Raises NotHermitian when ||m - m^dag||_F > tol ||m||_F, and NoConvergence
    when the backend eigensolver fails to converge.
    """
    m = as_cmatrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix is {m.shape}, expected square")
    if hermiticity_defect(m) > tol:
        raise NotHermitian(f"hermiticity defect {hermiticity_defect(m):.3e} > {tol:.3e}")
    h = (m + dagger(m)) / 2
    try:
        w, v = backend.eigh_herm(h)
    except (RuntimeError, np.linalg.LinAlgError) as exc:
        raise NoConvergence(str(exc)) from exc
    return HermitianSpectrum(w, v)


def permute_factors(m, dims: Sequence[int], perm: Sequence[int]):
    """Conjugate an operator on a tensor product by a factor permutation.

    ``perm`` uses transpose semantics: output factor k is input factor perm[k].
    """
    m = as_cmatrix(m)
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionMismatch(f"dims {dims} do not match matrix shape {m.shape}")
    if sorted(perm) != list(range(n)):
        raise DimensionMismatch(f"{perm} is not a permutation of 0..{n - 1}")
    perm = list(perm)
    t = m.reshape(dims + dims)
    t = t.transpose(perm + [p + n for p in perm])
    return np.ascontiguousarray(t.reshape(total, total))


def partial_trace(m, dims: Sequence[int], keep):
    """Trace out every tensor factor not in ``keep`` (kept factors stay in
    their original order)."""
    m = as_cmatrix(m)
    dims = list(dims)
    n = len(dims)
    total = int(np.prod(dims))
    if m.shape != (total, total):
        raise DimensionMismatch(f"dims {dims} do not match matrix shape {m.shape}")
    keep = sorted(set(keep))
    if not keep:
        raise EmptyKeepSet("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise DimensionMismatch(f"keep indices {keep} out of range for {n} factors")
    t = m.reshape(dims + dims)
    for ax in reversed([i for i in range(n) if i not in keep]):
        t = np.trace(t, axis1=ax, axis2=ax + t.ndim // 2)
    d = int(np.prod([dims[i] for i in keep]))
    return np.ascontiguousarray(t.reshape(d, d))


def density_defects(rho, tol: float = EIG_NEG_TOL):
    """(hermiticity defect, trace defect, min eigenvalue) of a candidate
    density matrix."""
    rho = as_cmatrix(rho)
    herm = hermiticity_defect(rho)
    tr = float(abs(np.trace(rho) - 1.0))
    w = backend.eigvalsh_herm((rho + dagger(rho)) / 2)
    return herm, tr, float(w[0])


def purify(rho, tol: float = -EIG_NEG_TOL):
    """Purification vector on H (x) H_P with dim(P) = rank(rho).

    Eigenvalues below PURIFY_RANK_TOL are treated as zero rank.
    """
    rho = as_cmatrix(rho)
    herm, tr, wmin = density_defects(rho)
    if herm > HERM_TOL or tr > max(TRACE_TOL, tol) or wmin < -tol:
        raise NotDensityMatrix(
            f"hermiticity defect {herm:.2e}, trace defect {tr:.2e}, min eigenvalue {wmin:.2e}"
        )
    w, v = hermitian_eig((rho + dagger(rho)) / 2)
    sel = w > PURIFY_RANK_TOL
    w = w[sel]
    v = v[:, sel]
    rank = int(w.size)
    n = rho.shape[0]
    psi = np.zeros(n * rank, dtype=np.complex128)
    for k in range(rank):
        psi += np.sqrt(w[k]) * np.kron(v[:, k], _basis(rank, k))
    return psi / np.linalg.norm(psi)


def _basis(d, k):
    e = np.zeros(d, dtype=np.complex128)
    e[k] = 1.0
    return e
