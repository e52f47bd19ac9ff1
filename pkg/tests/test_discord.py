import math

import numpy as np

from cmiflow import states
from cmiflow.channels import Povm
from cmiflow.discord import (
    MeasurementParametrization,
    MeasuredCmiProblem,
    OptimizerConfig,
    big_r,
    bipartite_classical_corr,
    classical_cmi,
    discord,
    j_conditional,
    r_conditional,
)
from cmiflow.dynamics import example_state
from cmiflow.entropy import cmi, mutual_information
from cmiflow.rand import rand_povm, rand_state, rand_unitary

import oracles

FAST = OptimizerConfig(restarts=8, max_evals=800, seed=11)


def test_parametrization_validity(rng):
    for dim, outcomes in ((2, None), (3, None), (2, 4), (3, 7)):
        par = MeasurementParametrization(dim, outcomes)
        for _ in range(10):
            vecs = par.decode(rng.uniform(-7, 7, par.param_count))
            acc = np.zeros((dim, dim), dtype=complex)
            for v in vecs:
                acc += np.outer(v, v.conj())
            assert np.linalg.norm(acc - np.eye(dim)) < 1e-10
        # zero parameters decode to the computational basis family
        vecs = par.decode(np.zeros(par.param_count))
        acc = sum(np.outer(v, v.conj()) for v in vecs)
        assert np.linalg.norm(acc - np.eye(dim)) < 1e-10


def test_parametrization_povm_valid(rng):
    par = MeasurementParametrization(3)
    povm = par.povm(rng.uniform(0, 2 * np.pi, par.param_count), ("E",))
    assert isinstance(povm, Povm)


def test_j_classical_state_computational():
    s = states.classical_state(["A", "S", "E"], [2, 2, 2], [0.25, 0.25, 0.25, 0.25],
                               [(0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)])
    pvm = Povm([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], ("E",))
    assert abs(j_conditional(s, pvm) - cmi(s, "A", "E", "S")) < 1e-10


def test_j_bounded_by_cmi(rng):
    for _ in range(20):
        s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=3)
        povm = rand_povm(rng, ("E",), 2, int(rng.integers(2, 5)))
        j = j_conditional(s, povm)
        assert -1e-10 <= j <= cmi(s, "A", "E", "S") + 1e-8


def test_kernel_matches_oracle(rng):
    for _ in range(5):
        s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=4)
        prob = MeasuredCmiProblem(s, ("E",))
        par = MeasurementParametrization(2)
        p = rng.uniform(0, 2 * np.pi, par.param_count)
        vecs = par.decode(p)
        want = oracles.measured_j(s.matrix, [2, 2, 2], [0], [1], [2], vecs)
        assert abs(prob.j_value(vecs) - want) < 1e-10


def test_u_example_measurement_family():
    """On the u=1 state, the family cos(t)|00> + e^{ip} sin(t)|11> gives
    J = h(cos^2 t): zero at t = 0, ln 2 at t = pi/4 (entangled basis)."""
    s = example_state(1.0)
    e00 = np.eye(6, dtype=complex)[0]
    e11 = np.eye(6, dtype=complex)[4]
    others = [np.eye(6, dtype=complex)[i] for i in (1, 2, 3, 5)]
    for theta, phi in ((0.0, 0.3), (np.pi / 8, 1.1), (np.pi / 4, 2.0)):
        v1 = np.cos(theta) * e00 + np.exp(1j * phi) * np.sin(theta) * e11
        v2 = -np.exp(-1j * phi) * np.sin(theta) * e00 + np.cos(theta) * e11
        povm = Povm([np.outer(v, v.conj()) for v in [v1, v2] + others], ("E1", "E2"))
        got = j_conditional(s, povm)
        c2 = np.cos(theta) ** 2
        want = 0.0 if theta == 0.0 else -(c2 * np.log(c2) + (1 - c2) * np.log(1 - c2))
        assert abs(got - want) < 1e-10


def test_classical_cmi_on_cq_states():
    # the reduced example state on (A,S,E1) is classical-quantum, so the
    # optimum equals the full CMI
    for u in (0.25, 0.5, 0.75):
        s = states.reduce(example_state(u), ("A", "S", "E1"))
        res = classical_cmi(s, ("E1",), FAST)
        assert abs(res.value - cmi(s, "A", "E1", "S")) < 1e-6
        assert res.bound == "lower"


def test_classical_cmi_u1_full_environment_is_swappable():
    """The entangled measurement basis on E1E2 extracts the full CMI at u=1,
    so C = ln 2 and R = 0 (the block-aligned bases give J = 0, but they are
    not optimal). Verified against the explicit Bell-basis value."""
    s = example_state(1.0)
    res = classical_cmi(s, ("E1", "E2"), OptimizerConfig(restarts=12, max_evals=1500, seed=3))
    assert res.value >= math.log(2) - 1e-4
    assert res.value <= math.log(2) + 1e-8
    r = big_r(s, ("E1", "E2"), OptimizerConfig(restarts=12, max_evals=1500, seed=3))
    assert r.value <= 1e-4
    assert r.bound == "upper"


def test_big_r_zero_on_cq_family():
    for u in (0.0, 0.5, 1.0):
        s = states.reduce(example_state(u), ("A", "S", "E1"))
        res = big_r(s, ("E1",), FAST)
        assert -1e-8 <= res.value <= 1e-4


def test_restart_monotonicity(rng):
    s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=4)
    cfg4 = OptimizerConfig(restarts=4, max_evals=400, seed=5)
    cfg8 = OptimizerConfig(restarts=8, max_evals=400, seed=5)
    v4 = classical_cmi(s, ("E",), cfg4).value
    v8 = classical_cmi(s, ("E",), cfg8).value
    assert v8 >= v4 - 1e-12


def test_deterministic_given_seed(rng):
    s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=3)
    a = classical_cmi(s, ("E",), FAST)
    b = classical_cmi(s, ("E",), FAST)
    assert a.value == b.value
    for ma, mb in zip(a.povm.effects, b.povm.effects):
        assert np.array_equal(ma, mb)


def test_local_unitary_covariance(rng):
    s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=3)
    u = rand_unitary(rng, 2)
    big = np.kron(np.eye(4), u)
    s_rot = states.LabeledState(s.layout, big @ s.matrix @ big.conj().T, check=False)
    # at a fixed POVM, and at the optimizer's argmax POVM
    povm = rand_povm(rng, ("E",), 2, 3)
    povm_rot = Povm([u @ m @ u.conj().T for m in povm.effects], ("E",))
    assert abs(j_conditional(s_rot, povm_rot) - j_conditional(s, povm)) < 1e-10
    best = classical_cmi(s, ("E",), FAST)
    best_rot = Povm([u @ m @ u.conj().T for m in best.povm.effects], ("E",))
    assert abs(j_conditional(s_rot, best_rot) - best.value) < 1e-10


def test_r_conditional_chain_rules(rng):
    s = rand_state(rng, ["A", "A2", "S", "E"], [2, 2, 2, 2], rank=3)
    povm = rand_povm(rng, ("E",), 2, 3)
    lhs = r_conditional(s, povm, x=("A", "A2"), given=("S",))
    rhs = (r_conditional(s, povm, x=("A",), given=("S", "A2"))
           + r_conditional(s, povm, x=("A2",), given=("S",)))
    assert abs(lhs - rhs) < 1e-8

    s3 = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=3)
    povm = rand_povm(rng, ("E",), 2, 3)
    r = r_conditional(s3, povm)
    d_as = (mutual_information(s3, ("A", "S"), ("E",))
            - j_conditional(s3, povm, x=("A", "S"), given=()))
    d_s = (mutual_information(s3, ("S",), ("E",))
           - j_conditional(s3, povm, x=("S",), given=()))
    assert abs(r - (d_as - d_s)) < 1e-8


def test_discord_examples(rng):
    bell = states.maximally_entangled(2, "A", "B")
    res = discord(bell, ("B",), FAST)
    assert abs(res.value - math.log(2)) < 1e-4

    prod = states.tensor(rand_state(rng, ["A"], [2]), rand_state(rng, ["B"], [2]))
    assert abs(mutual_information(prod, "A", "B")) < 1e-10
    res = bipartite_classical_corr(prod, ("B",), FAST)
    assert abs(res.value) < 1e-8
    assert abs(discord(prod, ("B",), FAST).value) < 1e-8

    cq = states.classical_state(["A", "B"], [2, 2], [0.5, 0.5], [(0, 0), (1, 1)])
    assert discord(cq, ("B",), FAST).value < 1e-6


def test_optimizer_matches_grid_oracle():
    for k in range(3):
        rng = np.random.default_rng(400 + k)
        s = rand_state(rng, ["A", "S", "E"], [2, 2, 2], rank=4)
        grid = oracles.grid_classical_cmi(s.matrix, [2, 2, 2], [0], [1], [2], 40, 80)
        got = classical_cmi(s, ("E",), OptimizerConfig(restarts=8, max_evals=1000, seed=k)).value
        assert abs(got - grid) < 1e-4
