"""Measured conditional quantities J, C, r, R and bipartite discord via
deterministic multi-start derivative-free optimization over parametrized
rank-1 measurements.

C values are certified lower bounds on the supremum, R values upper bounds
on the minimum; both are flagged as such in the results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize

from . import backend, linalg
from .channels import Povm, measure_to_cq
from .entropy import cmi, entropy_matrix, mutual_information
from .errors import DimensionMismatch
from .rand import rng_for
from .states import LabeledState, marginal_matrix

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 32
    max_evals: int = 2000       # per restart
    obj_tol: float = 1e-8
    seed: int = 0
    outcomes: int | None = None  # measurement outcomes; None -> projective

    def __post_init__(self):
        if self.restarts < 1 or self.max_evals < 1:
            raise DimensionMismatch("restarts and max_evals must be >= 1")

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return replace(self, seed=seed)


@dataclass(frozen=True)
class OptResult:
    value: float
    params: np.ndarray
    evaluations: int
    budget_hit: bool


class MeasurementParametrization:
    """Continuous parameters -> rank-1 measurement vectors.

    outcomes == dim: projective, a product of Givens rotations with phases,
    d(d-1) angles plus d-1 column phases. outcomes > dim: rank-1 POVM from
    the QR-orthonormalized rows of a parametrized complex matrix. Decoding
    yields sum_i |v_i><v_i| = I for every finite parameter vector.
    """

    def __init__(self, dim: int, outcomes: int | None = None):
        outcomes = dim if outcomes is None else int(outcomes)
        if outcomes < dim:
            raise DimensionMismatch("rank-1 POVM needs at least dim outcomes")
        if outcomes > dim * dim:
            raise DimensionMismatch("more than dim^2 outcomes is never needed")
        self.dim = dim
        self.outcomes = outcomes
        self.projective = outcomes == dim
        if self.projective:
            self.param_count = dim * (dim - 1) + (dim - 1)
        else:
            self.param_count = 2 * outcomes * dim

    def decode(self, params) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise DimensionMismatch(
                f"expected {self.param_count} parameters, got {params.shape}"
            )
        d = self.dim
        if self.projective:
            u = np.eye(d, dtype=np.complex128)
            idx = 0
            for i in range(d - 1):
                for j in range(i + 1, d):
                    th, ph = params[idx], params[idx + 1]
                    idx += 2
                    g = np.eye(d, dtype=np.complex128)
                    c, s = math.cos(th), math.sin(th)
                    e = complex(math.cos(ph), math.sin(ph))
                    g[i, i] = c
                    g[i, j] = -e * s
                    g[j, i] = e.conjugate() * s
                    g[j, j] = c
                    u = u @ g
            for m in range(1, d):
                u[:, m] *= complex(math.cos(params[idx]), math.sin(params[idx]))
                idx += 1
            return np.ascontiguousarray(u.T)
        m = params[: self.outcomes * d] + 1j * params[self.outcomes * d:]
        m = m.reshape(self.outcomes, d) + np.eye(self.outcomes, d)
        q, r = np.linalg.qr(m)
        diag = np.diag(r)
        phase = np.divide(
            diag, np.abs(diag), out=np.ones_like(diag), where=np.abs(diag) > 1e-300
        )
        return np.ascontiguousarray(q * phase.conj())

    def povm(self, params, target) -> Povm:
        vecs = self.decode(params)
        return Povm([np.outer(v, v.conj()) for v in vecs], target)


def _first_primes(n):
    primes = []
    c = 2
    while len(primes) < n:
        if all(c % p for p in primes):
            primes.append(c)
        c += 1
    return primes


def _halton(index, base):
    f, r = 1.0, 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


def start_points(count, dim, seed):
    """Deterministic low-discrepancy restart points in [0, 2pi)^dim.

    The first point is the origin (computational-basis measurement / trivial
    extension); the rest are a seed-shifted Halton sequence.
    """
    pts = np.zeros((count, dim))
    if count > 1:
        primes = _first_primes(dim)
        shift = rng_for(seed, 7).uniform(size=dim)
        for r in range(1, count):
            pts[r] = [( _halton(r, p) + shift[k]) % 1.0 for k, p in enumerate(primes)]
        pts[1:] *= TWO_PI
    return pts


def maximize(fn, n_params, cfg: OptimizerConfig, polish_rounds: int = 0) -> OptResult:
    """Multi-start Nelder-Mead maximization; deterministic for a fixed seed.

    Restarts are reduced by (value, restart index) lexicographic order, so
    the result does not depend on evaluation scheduling. polish_rounds > 0
    re-launches Nelder-Mead at the incumbent, which rebuilds the simplex and
    typically gains several digits on stalled high-dimensional runs.
    """
    if n_params == 0:
        return OptResult(float(fn(np.zeros(0))), np.zeros(0), 1, False)
    starts = start_points(cfg.restarts, n_params, cfg.seed)
    best_val = -math.inf
    best_x = starts[0]
    total = 0
    budget_hit = False

    def run(x0, fatol):
        return minimize(
            lambda x: -fn(x),
            x0,
            method="Nelder-Mead",
            options={
                "maxfev": cfg.max_evals,
                "fatol": fatol,
                "xatol": 1e-6,
                "adaptive": n_params >= 8,
            },
        )

    for x0 in starts:
        res = run(x0, cfg.obj_tol)
        total += res.nfev
        if res.nfev >= cfg.max_evals:
            budget_hit = True
        if -res.fun > best_val:
            best_val = -res.fun
            best_x = res.x
    for _ in range(polish_rounds):
        res = run(best_x, min(cfg.obj_tol, 1e-12))
        total += res.nfev
        if -res.fun > best_val:
            best_val = -res.fun
            best_x = res.x
    return OptResult(float(best_val), best_x, total, budget_hit)


class MeasuredCmiProblem:
    """Measured-CMI objective J(x;e|z) over rank-1 measurements on e.

    Precomputes a purification arranged as (x z | e | rest+purifier) so each
    objective evaluation is one fused kernel call.
    """

    def __init__(self, s: LabeledState, e_labels, x=("A",), given=("S",)):
        self.x = (x,) if isinstance(x, str) else tuple(x)
        self.given = (given,) if isinstance(given, str) else tuple(given)
        self.e_labels = (e_labels,) if isinstance(e_labels, str) else tuple(e_labels)
        groups = self.x + self.given + self.e_labels
        if len(set(groups)) != len(groups):
            raise DimensionMismatch("x, given and e labels must be disjoint")
        rest = [l for l in s.labels if l not in groups]
        order = list(self.x) + list(self.given) + list(self.e_labels) + rest

        psi = linalg.purify(s.matrix)
        rank = psi.size // s.layout.total_dim
        perm = s.layout.positions(order)
        dims = list(s.dims) + [rank]
        t = psi.reshape(dims).transpose(perm + [len(s.dims)])

        self.d_x = int(np.prod(s.layout.dims_of(self.x)))
        self.d_z = int(np.prod(s.layout.dims_of(self.given))) if self.given else 1
        self.d_e = int(np.prod(s.layout.dims_of(self.e_labels)))
        d_g = (t.size // (self.d_x * self.d_z * self.d_e))
        self.psi = np.ascontiguousarray(
            t.reshape(self.d_x * self.d_z, self.d_e, d_g), dtype=np.complex128
        )
        self.s_xz = entropy_matrix(marginal_matrix(s, self.x + self.given)).value
        self.s_z = (
            entropy_matrix(marginal_matrix(s, self.given)).value if self.given else 0.0
        )

    def j_value(self, vecs) -> float:
        return self.s_xz - self.s_z + backend.ensemble_term(
            self.psi, vecs, self.d_x, self.d_z
        )


@dataclass(frozen=True)
class MeasuredResult:
    value: float
    povm: Povm
    bound: str           # "lower" for C-type, "upper" for R-type results
    budget_hit: bool
    evaluations: int


def j_conditional(s: LabeledState, povm: Povm, x=("A",), given=("S",)) -> float:
    """J = I(x : measurement record | given) of the measured state."""
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    keep = x + given + tuple(povm.target)
    from .states import reduce as reduce_state
    cq = measure_to_cq(reduce_state(s, keep), povm, register_label="#reg")
    return cmi(cq, x, ("#reg",), given)


def classical_cmi(s: LabeledState, e_labels, cfg: OptimizerConfig | None = None,
                  x=("A",), given=("S",)) -> MeasuredResult:
    """C(x;e|z) = sup_M J: measurement-maximized conditional information.

    Lower-bound certified: the value is J at the returned POVM.
    """
    cfg = cfg or OptimizerConfig()
    problem = MeasuredCmiProblem(s, e_labels, x, given)
    param = MeasurementParametrization(problem.d_e, cfg.outcomes)
    opt = maximize(lambda p: problem.j_value(param.decode(p)), param.param_count, cfg)
    povm = param.povm(opt.params, problem.e_labels)
    return MeasuredResult(opt.value, povm, "lower", opt.budget_hit, opt.evaluations)


def r_conditional(s: LabeledState, povm: Povm, x=("A",), given=("S",)) -> float:
    """Conditional tripartite discord at a fixed measurement."""
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    return cmi(s, x, tuple(povm.target), given) - j_conditional(s, povm, x, given)


def big_r(s: LabeledState, e_labels, cfg: OptimizerConfig | None = None,
          x=("A",), given=("S",)) -> MeasuredResult:
    """R(x;e|z) = I(x:e|z) - C(x;e|z), an upper bound on the true minimum."""
    c = classical_cmi(s, e_labels, cfg, x, given)
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    e_labels = (e_labels,) if isinstance(e_labels, str) else tuple(e_labels)
    i_cond = cmi(s, x, e_labels, given)
    return MeasuredResult(i_cond - c.value, c.povm, "upper", c.budget_hit, c.evaluations)


def bipartite_classical_corr(s: LabeledState, b_labels,
                             cfg: OptimizerConfig | None = None) -> MeasuredResult:
    """C(a;b) over measurements on b, with a = all remaining labels."""
    b = (b_labels,) if isinstance(b_labels, str) else tuple(b_labels)
    a = tuple(l for l in s.labels if l not in b)
    return classical_cmi(s, b, cfg, x=a, given=())


def discord(s: LabeledState, b_labels, cfg: OptimizerConfig | None = None) -> MeasuredResult:
    """D(a;b) = I(a:b) - C(a;b), measurement on b."""
    b = (b_labels,) if isinstance(b_labels, str) else tuple(b_labels)
    a = tuple(l for l in s.labels if l not in b)
    c = bipartite_classical_corr(s, b, cfg)
    return MeasuredResult(
        mutual_information(s, a, b) - c.value, c.povm, "upper", c.budget_hit, c.evaluations
    )
