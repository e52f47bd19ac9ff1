"""Benchmark the jitted kernels against the pure-numpy fallback.

Times the three hot kernels (Hermitian eigenvalues, PSD entropy, the fused
measurement-ensemble objective) and one end-to-end measured-CMI optimization
on each backend. Run:

    python bench/bench_backends.py
"""

import time

import numpy as np

from cmiflow import _kernels_numba as numba_impl
from cmiflow import _kernels_numpy as numpy_impl
from cmiflow.discord import MeasurementParametrization, MeasuredCmiProblem
from cmiflow.rand import rand_state


def timeit(fn, min_time=0.4):
    fn()  # warmup / jit compile
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        dt = time.perf_counter() - t0
        if dt > min_time:
            return dt / n
        n = max(n + 1, int(n * min_time / max(dt, 1e-9)))


def rand_herm(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (g + g.conj().T) / 2


def rand_psd(rng, n, rank):
    g = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def row(name, t_numba, t_numpy):
    speedup = t_numpy / t_numba
    print(f"{name:<44s} {t_numba * 1e6:>10.1f} {t_numpy * 1e6:>10.1f} {speedup:>8.2f}x")


def main():
    rng = np.random.default_rng(1)
    print(f"{'kernel':<44s} {'numba us':>10s} {'numpy us':>10s} {'ratio':>9s}")

    for n in (4, 8, 16, 32):
        h = rand_herm(rng, n)
        row(
            f"eigvalsh_herm {n}x{n}",
            timeit(lambda: numba_impl.eigvalsh_herm(h)),
            timeit(lambda: numpy_impl.eigvalsh_herm(h)),
        )

    for n in (4, 8, 24):
        m = rand_psd(rng, n, max(1, n // 2))
        row(
            f"entropy_psd {n}x{n}",
            timeit(lambda: numba_impl.entropy_psd(m)),
            timeit(lambda: numpy_impl.entropy_psd(m)),
        )

    # fused measurement objective at the worked example's scale:
    # 4-dim retained block, 6-dim measured factor, 6 outcomes
    psi = rng.normal(size=(4, 6, 4)) + 1j * rng.normal(size=(4, 6, 4))
    psi /= np.linalg.norm(psi)
    q, _ = np.linalg.qr(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
    vecs = np.ascontiguousarray(q.T.conj())
    row(
        "ensemble_term (4 | 6 | 4), 6 outcomes",
        timeit(lambda: numba_impl.ensemble_term(psi, vecs, 2, 2)),
        timeit(lambda: numpy_impl.ensemble_term(psi, vecs, 2, 2)),
    )

    # qubit-measurement scale, the monogamy batteries' inner loop
    psi2 = rng.normal(size=(4, 2, 2)) + 1j * rng.normal(size=(4, 2, 2))
    psi2 /= np.linalg.norm(psi2)
    q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    vecs2 = np.ascontiguousarray(q.T.conj())
    row(
        "ensemble_term (4 | 2 | 2), 2 outcomes",
        timeit(lambda: numba_impl.ensemble_term(psi2, vecs2, 2, 2)),
        timeit(lambda: numpy_impl.ensemble_term(psi2, vecs2, 2, 2)),
    )

    # end-to-end measured-CMI objective sweep (decode + kernel), one restart
    s = rand_state(np.random.default_rng(7), ["A", "S", "E"], [2, 2, 3], rank=4)
    prob = MeasuredCmiProblem(s, ("E",))
    par = MeasurementParametrization(3)
    params = [rng.uniform(0, 2 * np.pi, par.param_count) for _ in range(64)]

    def sweep(term):
        def run():
            for p in params:
                term(prob.psi, par.decode(p), prob.d_x, prob.d_z)
        return run

    row(
        "j objective sweep, 64 evals (2,2,3)",
        timeit(sweep(numba_impl.ensemble_term)),
        timeit(sweep(numpy_impl.ensemble_term)),
    )


if __name__ == "__main__":
    main()
