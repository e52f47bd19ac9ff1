"""Extension searches and monogamy checks: the extension-minimized measured
remainder (an entanglement-like quantity for conditional correlations), the
discord-of-extensions entanglement bound, entanglement of formation, the
decomposition supremum W, and the Koashi-Winter identities.

Every searched quantity is one-sided: extension/decomposition searches over
bounded dimensions return flagged upper or lower bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend, linalg
from .channels import Povm
from .discord import (
    MeasurementParametrization,
    OptimizerConfig,
    classical_cmi,
    maximize,
)
from .entropy import capacity_identity, cmi, entropy_matrix, mutual_information
from .errors import CmiflowError, DimensionMismatch, NotDensityMatrix
from .rand import rng_for
from .states import LabeledState, from_matrix, marginal_matrix, reduce

SEARCH_DEFAULTS = OptimizerConfig(restarts=16, max_evals=3000)


def _qr_isometry(params: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Isometry (rows x cols, rows >= cols) from 2*rows*cols real parameters.

    QR-orthonormalization with the R-diagonal phase fixed; the all-zero
    parameter vector decodes to the padded identity."""
    m = params[: rows * cols] + 1j * params[rows * cols:]
    m = m.reshape(rows, cols) + np.eye(rows, cols)
    q, r = np.linalg.qr(m)
    diag = np.diag(r)
    phase = np.divide(
        diag, np.abs(diag), out=np.ones_like(diag), where=np.abs(diag) > 1e-300
    )
    return q * phase.conj()


class ExtensionParametrization:
    """Channel-on-purifier extensions X' of a state.

    Decodes an isometry V from the purifier register into X' (x) garbage;
    tracing the garbage yields an extension with the exact original marginal.
    """

    def __init__(self, purifier_dim: int, ext_dim: int = 2, garbage_dim: int | None = None):
        if ext_dim < 1:
            raise DimensionMismatch("ext_dim must be >= 1")
        if garbage_dim is None:
            # at least ext_dim, so mixed X' marginals stay reachable even for
            # pure (rank-1) inputs
            garbage_dim = max(purifier_dim, ext_dim)
        garbage_dim = int(garbage_dim)
        if ext_dim * garbage_dim < purifier_dim:
            raise DimensionMismatch("ext_dim * garbage_dim must cover the purifier")
        self.purifier_dim = purifier_dim
        self.ext_dim = ext_dim
        self.garbage_dim = garbage_dim
        self.param_count = 2 * ext_dim * garbage_dim * purifier_dim

    def decode(self, params) -> np.ndarray:
        """(ext_dim * garbage_dim, purifier_dim) isometry."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise DimensionMismatch(f"expected {self.param_count} parameters")
        return _qr_isometry(params, self.ext_dim * self.garbage_dim, self.purifier_dim)


class DecompositionParametrization:
    """Pure-state decompositions of a state via its purification.

    Rank-1 vectors on the purifier register with sum_i |v_i><v_i| = I select
    ensemble members; ensemble_size defaults to rank + 1.
    """

    def __init__(self, purifier_dim: int, ensemble_size: int | None = None):
        ensemble_size = purifier_dim + 1 if ensemble_size is None else int(ensemble_size)
        if ensemble_size < purifier_dim:
            raise DimensionMismatch("ensemble must be at least as long as the rank")
        self.purifier_dim = purifier_dim
        self.ensemble_size = ensemble_size
        self.param_count = 2 * ensemble_size * purifier_dim

    def decode(self, params) -> np.ndarray:
        """(ensemble_size, purifier_dim) measurement vectors on the purifier."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.param_count,):
            raise DimensionMismatch(f"expected {self.param_count} parameters")
        return _qr_isometry(params, self.ensemble_size, self.purifier_dim)


@dataclass(frozen=True)
class SearchResult:
    value: float
    bound: str          # "upper" or "lower"
    budget_hit: bool
    evaluations: int
    ext_dim: int = 0


def _purified_tensor(s: LabeledState, order):
    """Purification of s as an array (dims in label order..., purifier)."""
    psi = linalg.purify(s.matrix)
    rank = psi.size // s.layout.total_dim
    perm = s.layout.positions(order)
    t = psi.reshape(list(s.dims) + [rank]).transpose(perm + [len(s.dims)])
    return np.ascontiguousarray(t, dtype=np.complex128), rank


def extend(s: LabeledState, ext: ExtensionParametrization, params,
           ext_label: str = "X'") -> LabeledState:
    """Materialize the extension: output marginal on the original labels
    equals s (within numerical precision)."""
    t, rank = _purified_tensor(s, list(s.labels))
    if rank != ext.purifier_dim:
        raise DimensionMismatch(f"state rank {rank} != parametrization purifier {ext.purifier_dim}")
    v = ext.decode(params).reshape(ext.ext_dim, ext.garbage_dim, rank)
    d = s.layout.total_dim
    psi = np.einsum("ap,xgp->axg", t.reshape(d, rank), v)
    m = psi.reshape(d * ext.ext_dim, ext.garbage_dim)
    rho = m @ m.conj().T
    return from_matrix(
        list(s.labels) + [ext_label], list(s.dims) + [ext.ext_dim], rho, check=False
    )


class _RemainderProblem:
    """I(x:eX'|z) - J(x;eX'|z) as a joint function of extension and
    measurement parameters, evaluated from the purified global vector."""

    def __init__(self, s: LabeledState, e_labels, x, given, ext_dim, garbage_dim, outcomes):
        self.x = (x,) if isinstance(x, str) else tuple(x)
        self.given = (given,) if isinstance(given, str) else tuple(given)
        self.e = (e_labels,) if isinstance(e_labels, str) else tuple(e_labels)
        body = reduce(s, self.x + self.given + self.e)
        order = list(self.x) + list(self.given) + list(self.e)
        t, rank = _purified_tensor(body, order)
        self.d_x = int(np.prod(body.layout.dims_of(self.x)))
        self.d_z = int(np.prod(body.layout.dims_of(self.given))) if self.given else 1
        self.d_e = int(np.prod(body.layout.dims_of(self.e)))
        self.rank = rank
        self.base = t.reshape(self.d_x * self.d_z, self.d_e, rank)
        self.ext = ExtensionParametrization(rank, ext_dim, garbage_dim)
        self.meas = MeasurementParametrization(self.d_e * ext_dim, outcomes)
        self.param_count = self.ext.param_count + self.meas.param_count
        self.body = body

    def split(self, params):
        return params[: self.ext.param_count], params[self.ext.param_count:]

    def extended_vector(self, ext_params):
        v = self.ext.decode(ext_params).reshape(self.ext.ext_dim, self.ext.garbage_dim, self.rank)
        # (xz, e, x', g)
        return np.einsum("aep,xgp->aexg", self.base, v)

    def remainder(self, params) -> float:
        ext_params, meas_params = self.split(params)
        psi = self.extended_vector(ext_params)
        d_xz, d_e, d_xp, d_g = psi.shape
        d_m = d_e * d_xp
        # I(x:eX'|z) - J(x;eX'|z); the S(xz) and S(z) terms cancel
        s_zexp = backend.gram_entropy(
            psi.reshape(self.d_x, self.d_z, d_m, d_g)
            .transpose(1, 2, 0, 3)
            .reshape(self.d_z * d_m, self.d_x * d_g)
        )
        s_all = backend.gram_entropy(psi.reshape(d_xz * d_m, d_g))
        vecs = self.meas.decode(meas_params)
        term = backend.ensemble_term(
            np.ascontiguousarray(psi.reshape(d_xz, d_m, d_g)), vecs, self.d_x, self.d_z
        )
        return s_zexp - s_all - term


def _min_remainder(s, e_labels, x, given, cfg, ext_dim, garbage_dim, refine=True):
    cfg = cfg or SEARCH_DEFAULTS
    problem = _RemainderProblem(s, e_labels, x, given, ext_dim, garbage_dim, cfg.outcomes)
    opt = maximize(lambda p: -problem.remainder(p), problem.param_count, cfg, polish_rounds=3)
    best = -opt.value
    evals = opt.evaluations
    budget = opt.budget_hit
    if refine:
        # measurement-only polish at the best extension found
        ext_params, _ = problem.split(opt.params)
        extended = extend(problem.body, problem.ext, ext_params, ext_label="#X")
        inner = classical_cmi(extended, problem.e + ("#X",), cfg, x=problem.x, given=problem.given)
        i_cond = cmi(extended, problem.x, problem.e + ("#X",), problem.given)
        best = min(best, i_cond - inner.value)
        evals += inner.evaluations
        budget = budget or inner.budget_hit
        # trivial-extension baseline, so the result never exceeds the plain
        # measured remainder at matched budgets
        inner0 = classical_cmi(problem.body, problem.e, cfg, x=problem.x, given=problem.given)
        i_cond0 = cmi(problem.body, problem.x, problem.e, problem.given)
        best = min(best, i_cond0 - inner0.value)
        evals += inner0.evaluations
    return SearchResult(float(best), "upper", budget, evals, ext_dim), problem, opt


def r_ex(s: LabeledState, cfg: OptimizerConfig | None = None, ext_dim: int = 2,
         garbage_dim: int | None = None, x=("A",), given=("S",), e_labels=None) -> SearchResult:
    """Extension-minimized measured remainder min_ext R(x;eX'|z).

    Upper bound: every evaluation is an exact remainder of a concrete
    extension/measurement pair, so the minimum found dominates the true value.
    """
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    if e_labels is None:
        e_labels = tuple(l for l in s.labels if l not in x + given)
    result, _, _ = _min_remainder(s, e_labels, x, given, cfg, ext_dim, garbage_dim)
    return result


def e_a(s: LabeledState, b_labels=None, cfg: OptimizerConfig | None = None,
        ext_dim: int = 2, garbage_dim: int | None = None) -> SearchResult:
    """Extension-minimized discord min_ext D(a; bX), an entanglement upper
    bound for the bipartite split (a | b)."""
    b = (b_labels,) if isinstance(b_labels, str) else tuple(
        b_labels if b_labels is not None else s.labels[-1:]
    )
    a = tuple(l for l in s.labels if l not in b)
    result, _, _ = _min_remainder(s, b, a, (), cfg, ext_dim, garbage_dim)
    return result


# ---------------------------------------------------------------------------
# Entanglement of formation
# ---------------------------------------------------------------------------

def concurrence(s: LabeledState) -> float:
    """Two-qubit concurrence (Wootters)."""
    if tuple(s.dims) != (2, 2):
        raise DimensionMismatch(f"concurrence needs a 2x2 qubit pair, got dims {s.dims}")
    rho = s.matrix
    yy = np.array([[0, 0, 0, -1], [0, 0, 1, 0], [0, 1, 0, 0], [-1, 0, 0, 0]], dtype=np.complex128)
    tilde = yy @ rho.conj() @ yy
    w, v = linalg.hermitian_eig((rho + linalg.dagger(rho)) / 2)
    root = (v * np.sqrt(np.clip(w, 0.0, None))) @ linalg.dagger(v)
    k = root @ tilde @ root
    vals = linalg.hermitian_eig((k + linalg.dagger(k)) / 2).eigenvalues
    vals = np.clip(vals, 0.0, None)
    # sqrt amplifies eigensolver noise near zero; drop relative dust
    vals[vals < 1e-13 * max(vals.max(), 1e-300)] = 0.0
    lam = np.sqrt(vals)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-(x * math.log(x) + (1 - x) * math.log(1 - x)))


def entanglement_of_formation(s: LabeledState) -> float:
    """Two-qubit entanglement of formation in nats (concurrence formula)."""
    c = concurrence(s)
    return _binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


def eof_general(s: LabeledState, b_labels, cfg: OptimizerConfig | None = None,
                ensemble_size: int | None = None) -> SearchResult:
    """Decomposition-minimized average marginal entropy, min sum P_i S(Tr_b psi_i).

    Upper bound on the entanglement of formation of the (a | b) split.
    """
    cfg = cfg or SEARCH_DEFAULTS
    b = (b_labels,) if isinstance(b_labels, str) else tuple(b_labels)
    a = tuple(l for l in s.labels if l not in b)
    t, rank = _purified_tensor(s, list(a) + list(b))
    d_a = int(np.prod(s.layout.dims_of(a)))
    d_b = int(np.prod(s.layout.dims_of(b)))
    psi = np.ascontiguousarray(
        t.reshape(d_a, d_b, rank).transpose(0, 2, 1), dtype=np.complex128
    )
    decomp = DecompositionParametrization(rank, ensemble_size)
    opt = maximize(
        lambda p: backend.ensemble_term(psi, decomp.decode(p), d_a, 1),
        decomp.param_count,
        cfg,
    )
    return SearchResult(float(-opt.value), "upper", opt.budget_hit, opt.evaluations)


# ---------------------------------------------------------------------------
# The decomposition supremum W and the monogamy identities
# ---------------------------------------------------------------------------

def w_quantity(s: LabeledState, c_labels, cfg: OptimizerConfig | None = None,
               ensemble_size: int | None = None, x=("A",), given=("S",)) -> SearchResult:
    """W(x;c|z) = S(xz) - S(z) + sup_decompositions sum P_i (S(z_i) - S(xz_i)),
    the supremum over pure-state decompositions of the full state.

    Lower bound (the decomposition search may miss the supremum).
    """
    cfg = cfg or SEARCH_DEFAULTS
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    c = (c_labels,) if isinstance(c_labels, str) else tuple(c_labels)
    body = reduce(s, x + given + c)
    t, rank = _purified_tensor(body, list(x) + list(given) + list(c))
    d_x = int(np.prod(body.layout.dims_of(x)))
    d_z = int(np.prod(body.layout.dims_of(given))) if given else 1
    d_c = int(np.prod(body.layout.dims_of(c)))
    psi = np.ascontiguousarray(
        t.reshape(d_x * d_z, d_c, rank).transpose(0, 2, 1), dtype=np.complex128
    )
    decomp = DecompositionParametrization(rank, ensemble_size)
    opt = maximize(
        lambda p: backend.ensemble_term(psi, decomp.decode(p), d_x, d_z),
        decomp.param_count,
        cfg,
    )
    s_xz = entropy_matrix(marginal_matrix(body, x + given)).value
    s_z = entropy_matrix(marginal_matrix(body, given)).value if given else 0.0
    return SearchResult(float(s_xz - s_z + opt.value), "lower", opt.budget_hit, opt.evaluations)


@dataclass(frozen=True)
class KoashiWinterReport:
    residual: float
    eof_ab: float
    classical_ac: float
    s_a: float


def koashi_winter_check(phi: LabeledState, cfg: OptimizerConfig | None = None,
                        a="A", b="B", c="C") -> KoashiWinterReport:
    """|E_f(A:B) + C(A;C) - S(A)| for a pure tripartite state (B a qubit)."""
    w = linalg.hermitian_eig(phi.matrix).eigenvalues
    if abs(w[-1] - 1.0) > 1e-8:
        raise NotDensityMatrix("global state must be pure within 1e-8")
    ef = entanglement_of_formation(reduce(phi, (a, b)))
    c_res = classical_cmi(reduce(phi, (a, c)), (c,), cfg, x=(a,), given=())
    s_a = entropy_matrix(marginal_matrix(phi, (a,))).value
    return KoashiWinterReport(abs(ef + c_res.value - s_a), ef, c_res.value, s_a)


@dataclass(frozen=True)
class MonogamyReport:
    residual: float           # worst four-term residual over the probe set
    i_e_tot_given_s: float    # 2 S(A) - I(A:S)
    i_ac: float
    probes: tuple             # per-probe (r, w, residual)


def _member_ensemble(psi_t, vecs):
    """Conditional pure members (probabilities, vectors on the unmeasured part)
    of a rank-1 measurement on the middle factor of psi (l, m, r)."""
    members = np.einsum("im,lmr->ilr", vecs.conj(), psi_t)
    probs = np.einsum("ilr,ilr->i", members, members.conj()).real
    return probs, members


def generalized_kw_check(s: LabeledState, e_labels, cfg: OptimizerConfig | None = None,
                         x="A", given="S", n_probes: int = 3, seed: int = 0) -> MonogamyReport:
    """Four-term monogamy residual |r_M + I(A:C) + W_M - (2S(A) - I(A:S))|.

    The measured remainder r_M and the decomposition value W_M are evaluated
    at the same measurement, linked through the purification: rank-1 outcomes
    on the measured environment part induce the matched pure-state
    decomposition of the complementary (A, S, C) state. r_M goes through the
    generic measure-then-CMI route on the mixed state; W_M goes through the
    purification members, so the identity cross-checks two independent paths.
    Probes: the computational basis, seeded random bases, and the optimized
    measurement. Requires a setting-compliant state (capacity residual < 1e-6).
    """
    cfg = cfg or OptimizerConfig()
    x = (x,) if isinstance(x, str) else tuple(x)
    given = (given,) if isinstance(given, str) else tuple(given)
    e = (e_labels,) if isinstance(e_labels, str) else tuple(e_labels)
    cap = capacity_identity(s, x[0], given[0]).residual
    if cap > 1e-6:
        raise CmiflowError(f"state is not setting-compliant (capacity residual {cap:.2e})")

    c = tuple(l for l in s.labels if l not in x + given + e)
    order = list(x) + list(given) + list(e) + list(c)
    t, rank = _purified_tensor(s, order)
    d_x = int(np.prod(s.layout.dims_of(x)))
    d_z = int(np.prod(s.layout.dims_of(given)))
    d_e = int(np.prod(s.layout.dims_of(e)))
    d_c = t.size // (d_x * d_z * d_e)
    psi = t.reshape(d_x * d_z, d_e, d_c)  # C role = bystander labels + purifier

    s_a = entropy_matrix(marginal_matrix(s, x)).value
    i_as = mutual_information(s, x, given)
    i_e_tot = 2.0 * s_a - i_as
    # I(A : C-role) from the pure global vector
    psi4 = psi.reshape(d_x, d_z, d_e, d_c)
    rho_ac = np.einsum("azec,bzef->acbf", psi4, psi4.conj()).reshape(d_x * d_c, d_x * d_c)
    s_ac = entropy_matrix(rho_ac).value
    s_c = backend.gram_entropy(psi4.transpose(3, 0, 1, 2).reshape(d_c, d_x * d_z * d_e))
    i_ac = s_a + s_c - s_ac

    i_cond = cmi(s, x, e, given)
    s_xz = entropy_matrix(marginal_matrix(s, x + given)).value
    s_z = entropy_matrix(marginal_matrix(s, given)).value

    param = MeasurementParametrization(d_e, cfg.outcomes)
    probe_params = [np.zeros(param.param_count)]
    rng = rng_for(seed, 21)
    for _ in range(max(0, n_probes - 2)):
        probe_params.append(rng.uniform(0.0, 2 * math.pi, param.param_count))
    opt = classical_cmi(s, e, cfg, x=x, given=given)
    vec_sets = [param.decode(p) for p in probe_params]
    vec_sets.append(np.array([_effect_vector(m) for m in opt.povm.effects]))

    from .discord import j_conditional
    results = []
    for vecs in vec_sets:
        povm = Povm([np.outer(v, v.conj()) for v in vecs], e)
        r_m = i_cond - j_conditional(s, povm, x=x, given=given)
        w_m = s_xz - s_z + _decomposition_term(psi, vecs, d_x, d_z)
        results.append((r_m, w_m, abs(r_m + i_ac + w_m - i_e_tot)))
    worst = max(r[2] for r in results)
    return MonogamyReport(worst, i_e_tot, i_ac, tuple(results))


def _effect_vector(m):
    w, v = linalg.hermitian_eig((m + linalg.dagger(m)) / 2)
    return v[:, -1] * math.sqrt(max(w[-1], 0.0))


def _decomposition_term(psi, vecs, d_x, d_z):
    """sum_i P_i (S(z part) - S(xz part)) over the matched decomposition of
    the complementary state, built member by member."""
    probs, members = _member_ensemble(psi, vecs)
    term = 0.0
    for p, member in zip(probs, members):
        if p < 1e-14:
            continue
        blk = (member @ member.conj().T) / p
        s_xz_i = entropy_matrix(blk).value
        s_z_i = entropy_matrix(linalg.partial_trace(blk, [d_x, d_z], [1])).value
        term += p * (s_z_i - s_xz_i)
    return term
