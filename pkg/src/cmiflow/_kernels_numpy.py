"""Pure-numpy kernel backend (LAPACK eigensolvers, einsum contractions).

Selected via CMIFLOW_BACKEND=numpy; otherwise used as fallback when numba
is unavailable. Signatures match ``_kernels_numba``.
"""

import numpy as np

from .tolerances import EIG_ZERO_TOL

NAME = "numpy"


def eigvalsh_herm(a):
    """Ascending eigenvalues of a Hermitian complex matrix."""
    return np.linalg.eigvalsh(a)


def eigh_herm(a):
    """Ascending eigenvalues and eigenvector columns of a Hermitian matrix."""
    w, v = np.linalg.eigh(a)
    return w, v


def entropy_psd(a):
    """Von Neumann entropy of a PSD matrix plus the total clamped weight."""
    w = np.linalg.eigvalsh(a)
    keep = w >= EIG_ZERO_TOL
    clamped = float(np.abs(w[~keep]).sum())
    w = w[keep]
    if w.size == 0:
        return 0.0, clamped
    return float(-(w * np.log(w)).sum()), clamped


def gram_entropy(m):
    """Entropy of m @ m^dag, evaluated on the smaller Gram factor."""
    if m.shape[0] <= m.shape[1]:
        g = m @ m.conj().T
    else:
        g = m.conj().T @ m
    return entropy_psd(g)[0]


def _row_entropies(w):
    # clamped eigenvalues are replaced by 1.0, which contributes exactly 0
    w = np.where(w >= EIG_ZERO_TOL, w, 1.0)
    return -(w * np.log(w)).sum(axis=-1)


def ensemble_term(psi, vecs, d_a, d_s):
    """Sum_i p_i (S(rho_i^S) - S(rho_i^{AS})) for rank-1 measurement vectors.

    psi:  (d_a*d_s, d_m, d_g) pure global vector, measured factor in the middle,
          purifying remainder last.
    vecs: (k, d_m) with sum_i |v_i><v_i| = identity on the measured factor.
    """
    w = np.einsum("im,amg->iag", vecs.conj(), psi)
    p = np.einsum("iag,iag->i", w, w.conj()).real
    keep = p > 1e-14
    if not np.any(keep):
        return 0.0
    w = w[keep]
    p = p[keep]
    blocks = np.einsum("iag,ibg->iab", w, w.conj()) / p[:, None, None]
    s_as = _row_entropies(np.linalg.eigvalsh(blocks))
    k = blocks.shape[0]
    sblocks = np.einsum("iasat->ist", blocks.reshape(k, d_a, d_s, d_a, d_s))
    s_s = _row_entropies(np.linalg.eigvalsh(sblocks))
    return float((p * (s_s - s_as)).sum())
