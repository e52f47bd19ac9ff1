"""Numba-jitted kernel backend.

Hot paths: the cyclic Jacobi eigensolver for Hermitian complex matrices and
the fused measurement-ensemble objective used inside the optimizers. A pure
numpy twin lives in ``_kernels_numpy``; select with CMIFLOW_BACKEND.
"""

import math

import numpy as np
from numba import njit

from . import _kernels_numpy
from .tolerances import EIG_ZERO_TOL, JACOBI_OFF_TOL, JACOBI_SWEEP_CAP

NAME = "numba"

# the jitted cyclic Jacobi beats LAPACK only below this size (call overhead
# dominates there); larger standalone eigenproblems go to the numpy kernels
JACOBI_CROSSOVER = 5


@njit(cache=True)
def _jacobi(a, want_vectors):  # pragma: no cover - exercised via wrappers
    n = a.shape[0]
    A = a.copy()
    V = np.eye(n, dtype=np.complex128)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j].real ** 2 + A[i, j].imag ** 2
    fro = math.sqrt(fro)
    thr = JACOBI_OFF_TOL * fro
    converged = n <= 1 or fro == 0.0
    if not converged:
        skip = thr / (n * n)
        for _ in range(JACOBI_SWEEP_CAP):
            off = 0.0
            for p in range(n - 1):
                for q in range(p + 1, n):
                    off += A[p, q].real ** 2 + A[p, q].imag ** 2
            if math.sqrt(2.0 * off) <= thr:
                converged = True
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = A[p, q]
                    m = abs(apq)
                    if m <= skip:
                        continue
                    phi = math.atan2(apq.imag, apq.real)
                    theta = 0.5 * math.atan2(2.0 * m, A[q, q].real - A[p, p].real)
                    c = math.cos(theta)
                    s = math.sin(theta) * complex(math.cos(phi), math.sin(phi))
                    sc = s.conjugate()
                    for r in range(n):
                        arp = A[r, p]
                        arq = A[r, q]
                        A[r, p] = c * arp - sc * arq
                        A[r, q] = s * arp + c * arq
                    for r in range(n):
                        apr = A[p, r]
                        aqr = A[q, r]
                        A[p, r] = c * apr - s * aqr
                        A[q, r] = sc * apr + c * aqr
                    if want_vectors:
                        for r in range(n):
                            vrp = V[r, p]
                            vrq = V[r, q]
                            V[r, p] = c * vrp - sc * vrq
                            V[r, q] = s * vrp + c * vrq
    w = np.empty(n, dtype=np.float64)
    for i in range(n):
        w[i] = A[i, i].real
    order = np.argsort(w)
    return w[order], V[:, order], converged


@njit(cache=True)
def _entropy_from_vals(w):  # pragma: no cover
    s = 0.0
    clamped = 0.0
    for i in range(w.shape[0]):
        x = w[i]
        if x >= EIG_ZERO_TOL:
            s -= x * math.log(x)
        else:
            clamped += abs(x)
    return s, clamped


def eigvalsh_herm(a):
    """Ascending eigenvalues of a Hermitian complex matrix (cyclic Jacobi
    below the crossover size, LAPACK above)."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] > JACOBI_CROSSOVER:
        return _kernels_numpy.eigvalsh_herm(a)
    w, _, ok = _jacobi(a, False)
    if not ok:
        raise RuntimeError("jacobi sweep cap exceeded")
    return w


def eigh_herm(a):
    """Ascending eigenvalues and eigenvector columns."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] > JACOBI_CROSSOVER:
        return _kernels_numpy.eigh_herm(a)
    w, v, ok = _jacobi(a, True)
    if not ok:
        raise RuntimeError("jacobi sweep cap exceeded")
    return w, v


@njit(cache=True)
def _entropy_psd(a):  # pragma: no cover
    w, _, ok = _jacobi(a, False)
    s, clamped = _entropy_from_vals(w)
    return s, clamped, ok


def entropy_psd(a):
    """Von Neumann entropy of a PSD matrix plus the total clamped weight."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if a.shape[0] > JACOBI_CROSSOVER:
        return _kernels_numpy.entropy_psd(a)
    s, clamped, ok = _entropy_psd(a)
    if not ok:
        raise RuntimeError("jacobi sweep cap exceeded")
    return s, clamped


@njit(cache=True)
def _gram_entropy(m):  # pragma: no cover
    r, c = m.shape
    if r <= c:
        g = m @ m.conj().T
    else:
        g = m.conj().T @ m
    s, _, ok = _entropy_psd(np.ascontiguousarray(g))
    return s, ok


def gram_entropy(m):
    """Entropy of m @ m^dag, evaluated on the smaller Gram factor."""
    m = np.ascontiguousarray(m, dtype=np.complex128)
    if min(m.shape) > JACOBI_CROSSOVER:
        return _kernels_numpy.gram_entropy(m)
    s, ok = _gram_entropy(m)
    if not ok:
        raise RuntimeError("jacobi sweep cap exceeded")
    return s


@njit(cache=True)
def _ensemble_term(psi, vecs, d_a, d_s):  # pragma: no cover
    d_as = psi.shape[0]
    d_m = psi.shape[1]
    d_g = psi.shape[2]
    k = vecs.shape[0]
    w = np.empty((d_as, d_g), dtype=np.complex128)
    blk = np.empty((d_as, d_as), dtype=np.complex128)
    sblk = np.empty((d_s, d_s), dtype=np.complex128)
    total = 0.0
    for i in range(k):
        p = 0.0
        for a in range(d_as):
            for g in range(d_g):
                acc = 0.0 + 0.0j
                for m in range(d_m):
                    acc += vecs[i, m].conjugate() * psi[a, m, g]
                w[a, g] = acc
                p += acc.real ** 2 + acc.imag ** 2
        if p < 1e-14:
            continue
        for a in range(d_as):
            for b in range(d_as):
                acc = 0.0 + 0.0j
                for g in range(d_g):
                    acc += w[a, g] * w[b, g].conjugate()
                blk[a, b] = acc / p
        for s1 in range(d_s):
            for s2 in range(d_s):
                acc = 0.0 + 0.0j
                for a in range(d_a):
                    acc += blk[a * d_s + s1, a * d_s + s2]
                sblk[s1, s2] = acc
        s_as, _, ok1 = _entropy_psd(np.ascontiguousarray(blk))
        s_s, _, ok2 = _entropy_psd(np.ascontiguousarray(sblk))
        if not (ok1 and ok2):
            return np.nan
        total += p * (s_s - s_as)
    return total


def ensemble_term(psi, vecs, d_a, d_s):
    """Sum_i p_i (S(rho_i^S) - S(rho_i^{AS})) for rank-1 measurement vectors.

    psi:  (d_a*d_s, d_m, d_g) pure global vector, measured factor in the middle,
          purifying remainder last.
    vecs: (k, d_m) with sum_i |v_i><v_i| = identity on the measured factor.
    """
    if psi.shape[0] > 16:
        # conditional blocks too large for the in-kernel Jacobi to pay off
        return _kernels_numpy.ensemble_term(psi, vecs, d_a, d_s)
    out = _ensemble_term(
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.ascontiguousarray(vecs, dtype=np.complex128),
        d_a,
        d_s,
    )
    if np.isnan(out):
        raise RuntimeError("jacobi sweep cap exceeded")
    return float(out)


def warmup():
    """Trigger compilation of every jitted kernel on tiny inputs."""
    a = np.array([[0.75, 0.1j], [-0.1j, 0.25]], dtype=np.complex128)
    eigh_herm(a)
    entropy_psd(a)
    gram_entropy(a)
    psi = np.zeros((2, 2, 1), dtype=np.complex128)
    psi[0, 0, 0] = psi[1, 1, 0] = 1 / math.sqrt(2)
    ensemble_term(psi, np.eye(2, dtype=np.complex128), 1, 2)
