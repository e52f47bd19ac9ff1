"""Setting-compliant open-system evolutions, CMI flow tracking, the
u-parametrized worked example, and the property/broadcast test batteries.

A Scenario is a pure AS state, an environment state, and a family
t -> U(t) of unitaries acting on S and the environment only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .channels import broadcast, naimark_extend
from .entropy import capacity_identity, cmi, mutual_information
from .errors import CmiflowError, NonUnitary, NotDensityMatrix, RangeError
from .rand import rand_channel, rand_povm, rand_state, rand_unitary, rng_for
from .states import (
    LabeledState,
    classical_state,
    from_matrix,
    from_vector,
    maximally_entangled,
    reduce,
    tensor,
)


@dataclass(frozen=True)
class Scenario:
    initial_as: LabeledState                      # pure on (A, S)
    initial_env: LabeledState                     # on the E labels
    unitary_family: Callable[[float], np.ndarray]  # t -> U on S (x) E
    name: str = "custom"

    def __post_init__(self):
        w = linalg.hermitian_eig(self.initial_as.matrix).eigenvalues
        if abs(w[-1] - 1.0) > 1e-10:
            raise NotDensityMatrix("initial AS state must be pure within 1e-10")

    @property
    def env_labels(self):
        return self.initial_env.labels


@dataclass(frozen=True)
class TrajectoryReport:
    times: np.ndarray
    i_as: np.ndarray
    i_ae_given_s: np.ndarray
    i_a_se: np.ndarray
    capacity_residuals: np.ndarray
    backflow: np.ndarray  # per interval: True where I(A:E|S) decreased


def evolve(sc: Scenario, t: float) -> LabeledState:
    """(1_A (x) U(t)) (rho_AS (x) rho_E) (1_A (x) U(t))^dag."""
    u = np.ascontiguousarray(sc.unitary_family(t), dtype=np.complex128)
    d_se = sc.initial_as.dims[1] * sc.initial_env.layout.total_dim
    if u.shape != (d_se, d_se):
        raise NonUnitary(f"unitary shape {u.shape} does not match S+E dim {d_se}")
    if np.linalg.norm(u.conj().T @ u - np.eye(d_se)) > 1e-10:
        raise NonUnitary(f"family({t}) is not unitary within 1e-10")
    full = tensor(sc.initial_as, sc.initial_env)
    big = np.kron(np.eye(sc.initial_as.dims[0]), u)
    out = big @ full.matrix @ big.conj().T
    return LabeledState(full.layout, out, check=False)


def trajectory(sc: Scenario, times: Sequence[float]) -> TrajectoryReport:
    """Entropic record along the evolution, with backflow interval flags."""
    times = np.asarray(list(times), dtype=float)
    if times.size == 0 or np.any(np.diff(times) <= 0):
        raise RangeError("times must be nonempty and strictly ascending")
    env = sc.env_labels
    i_as, i_cond, i_ase, cap = [], [], [], []
    for t in times:
        s = evolve(sc, float(t))
        i_as.append(mutual_information(s, "A", "S"))
        i_cond.append(cmi(s, ("A",), env, ("S",)))
        i_ase.append(mutual_information(s, ("A",), ("S",) + env))
        cap.append(capacity_identity(s).residual)
    i_as = np.array(i_as)
    i_cond = np.array(i_cond)
    i_ase = np.array(i_ase)
    if np.max(np.abs(i_ase - i_ase[0])) > 1e-9:
        raise CmiflowError("I(A:SE) drifted along a unitary trajectory")
    if np.max(np.abs(i_as + i_cond - i_ase)) > 1e-10:
        raise CmiflowError("I(A:S) + I(A:E|S) != I(A:SE) along trajectory")
    return TrajectoryReport(
        times, i_as, i_cond, i_ase, np.array(cap), np.diff(i_cond) < -1e-12
    )


# ---------------------------------------------------------------------------
# Worked example: two-branch state on (A, S, E1, E2), dims (2, 2, 2, 3)
# ---------------------------------------------------------------------------

def example_state(u: float) -> LabeledState:
    """sqrt(u/2)(|0000> + |1111>) + sqrt(1-u) |Psi+>_{AS} |02>_{E1E2}."""
    if not 0.0 <= u <= 1.0:
        raise RangeError(f"u must be in [0, 1], got {u}")
    vec = np.zeros(24, dtype=np.complex128)

    def idx(a, s, e1, e2):
        return ((a * 2 + s) * 2 + e1) * 3 + e2

    vec[idx(0, 0, 0, 0)] += np.sqrt(u / 2)
    vec[idx(1, 1, 1, 1)] += np.sqrt(u / 2)
    vec[idx(0, 0, 0, 2)] += np.sqrt((1 - u) / 2)
    vec[idx(1, 1, 0, 2)] += np.sqrt((1 - u) / 2)
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-12:
        raise CmiflowError(f"example state norm {norm} != 1; transcription error")
    return from_vector(["A", "S", "E1", "E2"], [2, 2, 2, 3], vec, check=False)


def _example_unitary(u: float) -> np.ndarray:
    """Unitary on S (x) E1 (x) E2 mapping the u=0 joint state to the u state."""
    def idx(s, e1, e2):
        return (s * 2 + e1) * 3 + e2

    chi0 = np.zeros(12, dtype=np.complex128)
    chi0[idx(0, 0, 0)] = np.sqrt(u)
    chi0[idx(0, 0, 2)] = np.sqrt(1 - u)
    chi1 = np.zeros(12, dtype=np.complex128)
    chi1[idx(1, 1, 1)] = np.sqrt(u)
    chi1[idx(1, 0, 2)] = np.sqrt(1 - u)
    w = np.stack([chi0, chi1], axis=1)
    uu, _, _ = np.linalg.svd(w)
    null = uu[:, 2:]
    full = np.zeros((12, 12), dtype=np.complex128)
    full[:, idx(0, 0, 2)] = chi0
    full[:, idx(1, 0, 2)] = chi1
    slots = [c for c in range(12) if c not in (idx(0, 0, 2), idx(1, 0, 2))]
    for col, slot in enumerate(slots):
        full[:, slot] = null[:, col]
    return full


def example_scenario() -> Scenario:
    """Scenario whose time parameter is u itself: evolve(sc, u) = example_state(u)."""
    e1 = from_matrix(["E1"], [2], np.diag([1.0, 0.0]), check=False)
    e2 = from_matrix(["E2"], [3], np.diag([0.0, 0.0, 1.0]), check=False)
    return Scenario(
        maximally_entangled(2, "A", "S"), tensor(e1, e2), _example_unitary, name="example"
    )


def partial_swap_scenario() -> Scenario:
    """exp(-i t (pi/2) SWAP) on qubit S, E: full swap at t = 1, oscillating flow."""
    swap = np.zeros((4, 4), dtype=np.complex128)
    for i in range(2):
        for j in range(2):
            swap[j * 2 + i, i * 2 + j] = 1.0

    def family(t):
        ang = t * np.pi / 2
        return np.cos(ang) * np.eye(4) - 1j * np.sin(ang) * swap

    env = np.zeros((2, 2), dtype=np.complex128)
    env[0, 0] = 1.0
    return Scenario(
        maximally_entangled(2, "A", "S"),
        from_matrix(["E"], [2], env, check=False),
        family,
        name="partial_swap",
    )


def dephasing_scenario() -> Scenario:
    """exp(-i t sigma_z (x) sigma_z): commuting coupling, monotone I(A:S) loss
    (Markovian window t in [0, pi/4])."""
    z = np.diag([1.0, -1.0]).astype(np.complex128)
    h = np.kron(z, z)

    def family(t):
        return np.diag(np.exp(-1j * t * np.diag(h)))

    plus = 0.5 * np.ones((2, 2), dtype=np.complex128)
    return Scenario(
        maximally_entangled(2, "A", "S"),
        from_matrix(["E"], [2], plus, check=False),
        family,
        name="dephasing",
    )


BUILTIN_SCENARIOS = {
    "partial_swap": partial_swap_scenario,
    "dephasing": dephasing_scenario,
    "paper_example": example_scenario,
}


# ---------------------------------------------------------------------------
# Test batteries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst: float
    tol: float
    detail: str = ""


@dataclass(frozen=True)
class SuiteReport:
    name: str
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "worst": c.worst,
                    "tol": c.tol,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }


def _setting_state(rng, dims):
    """Random state of the compliant form (1 (x) U_SE)(pure AS (x) rho_E)."""
    d_a, d_s = dims[0], dims[1]
    env_dims = list(dims[2:])
    d_e = int(np.prod(env_dims))
    g = rng.normal(size=d_a * d_s) + 1j * rng.normal(size=d_a * d_s)
    init_as = from_vector(["A", "S"], [d_a, d_s], g / np.linalg.norm(g), check=False)
    env_labels = [f"E{i+1}" for i in range(len(env_dims))] if len(env_dims) > 1 else ["E"]
    env = rand_state(rng, env_labels, env_dims)
    u = rand_unitary(rng, d_s * d_e)
    full = tensor(init_as, env)
    big = np.kron(np.eye(d_a), u)
    return LabeledState(full.layout, big @ full.matrix @ big.conj().T, check=False)


def property_suite(trials: int = 100, dims=(2, 2, 2), seed: int = 0) -> SuiteReport:
    """Numerical battery for the four CMI properties of the setting."""
    if int(np.prod(dims)) > 64:
        raise RangeError("property_suite dims capped at total dimension 64")
    env_labels = tuple(f"E{i+1}" for i in range(len(dims) - 2)) if len(dims) > 3 else ("E",)
    checks = []

    # Property 1: no increase under channels on E
    rng = rng_for(seed, 1)
    worst = -np.inf
    for _ in range(trials):
        s = rand_state(rng, ("A", "S") + env_labels, list(dims))
        before = cmi(s, ("A",), env_labels, ("S",))
        pick = env_labels[int(rng.integers(len(env_labels)))]
        ch = rand_channel(rng, pick, s.layout.dim_of(pick), kraus_count=2)
        from .channels import apply_channel
        after = cmi(apply_channel(s, ch), ("A",), env_labels, ("S",))
        worst = max(worst, after - before)
    checks.append(CheckResult("P1 channels on E never increase CMI", worst <= 1e-8, worst, 1e-8))

    # Property 2: discard-and-replace on S raises CMI from 0 to ln 2
    fixture = classical_state(
        ["A", "E", "S"], [2, 2, 2], [0.5, 0.5], [(0, 0, 0), (1, 1, 1)]
    )
    before = cmi(fixture, ("A",), ("E",), ("S",))
    ae = reduce(fixture, ("A", "E"))
    fresh = np.zeros((2, 2), dtype=np.complex128)
    fresh[0, 0] = 1.0
    replaced = tensor(ae, from_matrix(["S"], [2], fresh, check=False))
    after = cmi(replaced, ("A",), ("E",), ("S",))
    err = max(abs(before), abs(after - np.log(2)))
    checks.append(CheckResult("P2 LOCC on S raises CMI 0 -> ln2", err <= 1e-9, err, 1e-9))

    # Properties 3 and 4: extensions built as channel(rho_0^{EX}) evolving with U_SE
    rng = rng_for(seed, 3)
    worst3 = -np.inf
    worst4 = -np.inf
    d_a, d_s = dims[0], dims[1]
    env_dims = list(dims[2:])
    d_e = int(np.prod(env_dims))
    d_x = 2
    for _ in range(trials):
        g = rng.normal(size=d_a * d_s) + 1j * rng.normal(size=d_a * d_s)
        init_as = from_vector(["A", "S"], [d_a, d_s], g / np.linalg.norm(g), check=False)
        env_ext = rand_state(rng, list(env_labels) + ["X"], env_dims + [d_x])
        env_base = reduce(env_ext, env_labels)
        nx = rand_channel(rng, "X", d_x, kraus_count=2)
        u1 = rand_unitary(rng, d_s * d_e)
        u2 = rand_unitary(rng, d_s * d_e)
        vals = {}
        for tag, u in (("t1", u1), ("t2", u2)):
            base = tensor(init_as, env_base)
            big = np.kron(np.eye(d_a), u)
            base = LabeledState(base.layout, big @ base.matrix @ big.conj().T, check=False)
            ext = tensor(init_as, env_ext)
            bigx = np.kron(np.eye(d_a), np.kron(u, np.eye(d_x)))
            ext = LabeledState(ext.layout, bigx @ ext.matrix @ bigx.conj().T, check=False)
            from .channels import apply_channel
            ext = apply_channel(ext, nx)
            vals[tag] = (
                cmi(base, ("A",), env_labels, ("S",)),
                cmi(ext, ("A",), env_labels + ("X",), ("S",)),
                mutual_information(ext, ("A",), ("S",)),
            )
        for tag in ("t1", "t2"):
            worst3 = max(worst3, vals[tag][1] - vals[tag][0])
        d_base = vals["t2"][0] - vals["t1"][0]
        d_ext = vals["t2"][1] - vals["t1"][1]
        d_as = vals["t2"][2] - vals["t1"][2]
        worst4 = max(worst4, abs(d_ext - d_base), abs(d_ext + d_as))
    checks.append(CheckResult("P3 extensions never increase CMI", worst3 <= 1e-8, worst3, 1e-8))
    checks.append(CheckResult("P4 CMI flow unchanged under extensions", worst4 <= 1e-9, worst4, 1e-9))

    return SuiteReport("properties", tuple(checks))


def broadcast_suite(seed: int = 0, trials: int = 20) -> SuiteReport:
    """Broadcasting equalities on classical fixtures, violations on entangled
    ones, Naimark invariance and the redundancy bound."""
    checks = []

    # classical fixture: after one-side broadcast of A, both copies carry the
    # original CMI (the copies also agree with each other identically, since
    # the |ii><i| copier output is A <-> A' symmetric)
    rng = rng_for(seed, 10)
    worst = -np.inf
    for _ in range(trials):
        p = rng.dirichlet(np.ones(4))
        assigns = [(i, i, j) for i in range(2) for j in range(2)]  # A,S,E values
        s = classical_state(["A", "S", "E"], [2, 2, 2], p, assigns)
        base = cmi(s, ("A",), ("E",), ("S",))
        sig = broadcast(s, "A", "A'")
        lhs = cmi(sig, ("A",), ("E",), ("S",))
        rhs = cmi(sig, ("A'",), ("E",), ("S",))
        worst = max(worst, abs(lhs - rhs), abs(lhs - base), abs(rhs - base))
    checks.append(CheckResult("broadcast equality on classical states", worst <= 1e-9, worst, 1e-9))

    # entangled fixture: no copy can reproduce the original CMI
    s = example_state(1.0)
    base = cmi(s, ("A",), ("E1", "E2"), ("S",))
    sig = broadcast(s, "A", "A'")
    gap = min(
        abs(cmi(sig, ("A",), ("E1", "E2"), ("S",)) - base),
        abs(cmi(sig, ("A'",), ("E1", "E2"), ("S",)) - base),
    )
    checks.append(CheckResult("broadcast fails to copy entangled CMI", gap > 1e-3, gap, 1e-3))

    # classical-quantum fixture: broadcast of the classical register E
    rng = rng_for(seed, 11)
    worst = -np.inf
    for _ in range(trials):
        p = rng.dirichlet(np.ones(2))
        blocks = [rand_state(rng, ["A", "S"], [2, 2], rank=2) for _ in range(2)]
        m = np.zeros((8, 8), dtype=np.complex128)
        for i, (pi, blk) in enumerate(zip(p, blocks)):
            reg = np.zeros((2, 2)); reg[i, i] = 1.0
            m += pi * np.kron(blk.matrix, reg)
        s = from_matrix(["A", "S", "E"], [2, 2, 2], m, check=False)
        base = cmi(s, ("A",), ("E",), ("S",))
        sig = broadcast(s, "E", "E'")
        d1 = abs(cmi(sig, ("A",), ("E", "E'"), ("S",)) - base)
        d2 = abs(cmi(sig, ("A",), ("E'",), ("S",)) - base)
        worst = max(worst, d1, d2)
    checks.append(CheckResult("cq broadcast triple equality", worst <= 1e-9, worst, 1e-9))

    # Naimark invariance and redundancy
    rng = rng_for(seed, 12)
    worst_inv = -np.inf
    for _ in range(trials):
        s = rand_state(rng, ["A", "S", "E"], [2, 2, 2])
        povm = rand_povm(rng, ("E",), 2, 3)
        pvm, embed = naimark_extend(povm)
        eta = embed(s)
        worst_inv = max(
            worst_inv,
            abs(cmi(eta, ("A",), ("E", "E'"), ("S",)) - cmi(s, ("A",), ("E",), ("S",))),
        )
    checks.append(CheckResult("Naimark extension leaves CMI unchanged", worst_inv <= 1e-9, worst_inv, 1e-9))

    rng = rng_for(seed, 13)
    worst_red = -np.inf
    for _ in range(max(5, trials // 2)):
        p = rng.dirichlet(np.ones(2))
        blocks = [rand_state(rng, ["A", "S"], [2, 2], rank=2) for _ in range(2)]
        m = np.zeros((8, 8), dtype=np.complex128)
        for i, (pi, blk) in enumerate(zip(p, blocks)):
            reg = np.zeros((2, 2)); reg[i, i] = 1.0
            m += pi * np.kron(blk.matrix, reg)
        s = from_matrix(["A", "S", "E"], [2, 2, 2], m, check=False)
        from .channels import Povm as _Povm
        # slightly smeared register measurement: non-projective, so the
        # dilation uses a genuine ancilla
        eps = 0.1
        effects = [
            (1 - eps) * np.diag([1.0, 0.0]) + eps / 2 * np.eye(2),
            (1 - eps) * np.diag([0.0, 1.0]) + eps / 2 * np.eye(2),
        ]
        pvm, embed = naimark_extend(_Povm(effects, ("E",)))
        eta = embed(s)
        worst_red = max(worst_red, abs(cmi(eta, ("A",), ("E'",), ("S", "E"))))
    checks.append(CheckResult("redundancy I(A:E'|SE) vanishes on cq fixtures", worst_red <= 1e-8, worst_red, 1e-8))

    return SuiteReport("broadcast", tuple(checks))
