import math

import numpy as np
import pytest

from cmiflow import states
from cmiflow.discord import OptimizerConfig, big_r
from cmiflow.dynamics import (
    Scenario,
    broadcast_suite,
    dephasing_scenario,
    evolve,
    example_scenario,
    example_state,
    partial_swap_scenario,
    property_suite,
    trajectory,
)
from cmiflow.entropy import capacity_identity, cmi, mutual_information
from cmiflow.errors import NonUnitary, NotDensityMatrix, RangeError


def test_example_state_values():
    s = example_state(1.0)
    assert abs(cmi(s, ("A",), ("E1", "E2"), ("S",)) - math.log(2)) < 1e-9
    assert abs(cmi(s, ("A",), ("E1",), ("S",))) < 1e-9
    s = example_state(0.0)
    assert abs(cmi(s, ("A",), ("E1", "E2"), ("S",))) < 1e-12
    with pytest.raises(RangeError):
        example_state(1.2)


def test_example_state_reduced_form():
    u = 0.37
    s = states.reduce(example_state(u), ("A", "S", "E1"))
    psip = np.zeros(4, dtype=complex)
    psip[0] = psip[3] = 1 / math.sqrt(2)
    blk0 = u / 2 * np.diag([1.0, 0, 0, 0]) + (1 - u) * np.outer(psip, psip.conj())
    blk1 = u / 2 * np.diag([0.0, 0, 0, 1.0])
    want = np.zeros((4, 2, 4, 2), dtype=complex)
    want[:, 0, :, 0] = blk0
    want[:, 1, :, 1] = blk1
    got = states.permuted(s, ["A", "S", "E1"]).matrix
    assert np.linalg.norm(got - want.reshape(8, 8)) < 1e-12


def test_example_reduced_is_cq():
    cfg = OptimizerConfig(restarts=6, max_evals=600, seed=9)
    for u in (0.0, 0.25, 0.5, 0.75, 1.0):
        s = states.reduce(example_state(u), ("A", "S", "E1"))
        assert big_r(s, ("E1",), cfg).value <= 1e-4


def test_example_scenario_reproduces_family():
    sc = example_scenario()
    for u in (0.0, 0.31, 0.8, 1.0):
        a = evolve(sc, u)
        b = example_state(u)
        assert np.linalg.norm(a.matrix - b.matrix) < 1e-12


def test_evolve_identity_and_swap():
    sc = partial_swap_scenario()
    s0 = evolve(sc, 0.0)
    i_as0 = mutual_information(s0, "A", "S")
    assert abs(i_as0 - 2 * math.log(2)) < 1e-12
    assert abs(cmi(s0, ("A",), ("E",), ("S",))) < 1e-12
    s1 = evolve(sc, 1.0)
    assert abs(mutual_information(s1, "A", "S")) < 1e-9
    assert abs(cmi(s1, ("A",), ("E",), ("S",)) - 2 * math.log(2)) < 1e-9
    for t in (0.0, 0.4, 1.3):
        s = evolve(sc, t)
        assert abs(mutual_information(s, ("A",), ("S", "E")) - 2 * math.log(2)) < 1e-9
        assert capacity_identity(s).residual < 1e-9


def test_evolve_rejects_nonunitary():
    sc = partial_swap_scenario()
    bad = Scenario(sc.initial_as, sc.initial_env, lambda t: np.eye(4) * 2.0)
    with pytest.raises(NonUnitary):
        evolve(bad, 0.5)
    with pytest.raises(NotDensityMatrix):
        Scenario(
            states.from_matrix(["A", "S"], [2, 2], np.eye(4) / 4),
            sc.initial_env,
            sc.unitary_family,
        )


def test_trajectory_invariants_and_backflow():
    sc = partial_swap_scenario()
    rep = trajectory(sc, np.linspace(0.0, 2.0, 21))
    assert np.max(np.abs(rep.i_a_se - rep.i_a_se[0])) < 1e-9
    assert np.max(np.abs(rep.i_as + rep.i_ae_given_s - rep.i_a_se)) < 1e-10
    assert np.max(rep.capacity_residuals) < 1e-9
    # flow reverses halfway: flags off then on
    assert not rep.backflow[:9].any()
    assert rep.backflow[10:].all()
    # per-step backflow bound
    drops = -np.diff(rep.i_ae_given_s)
    assert np.all(drops <= rep.i_ae_given_s[:-1] + 1e-9)
    with pytest.raises(RangeError):
        trajectory(sc, [])
    with pytest.raises(RangeError):
        trajectory(sc, [0.3, 0.1])


def test_trajectory_flat_and_dephasing():
    sc = partial_swap_scenario()
    flat = Scenario(sc.initial_as, sc.initial_env, lambda t: np.eye(4, dtype=complex))
    rep = trajectory(flat, [0.0, 0.5, 1.0])
    assert np.allclose(rep.i_ae_given_s, 0.0, atol=1e-12)
    assert not rep.backflow.any()

    rep = trajectory(dephasing_scenario(), np.linspace(0.0, np.pi / 4, 12))
    assert np.all(np.diff(rep.i_as) <= 1e-12)
    assert not rep.backflow.any()


def test_example_trajectory_setting_compliant():
    rep = trajectory(example_scenario(), np.linspace(0.0, 1.0, 11))
    assert np.max(rep.capacity_residuals) < 1e-9
    assert np.max(np.abs(rep.i_a_se - 2 * math.log(2))) < 1e-9


def test_property_suite_passes():
    rep = property_suite(trials=30, dims=(2, 2, 2), seed=1)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    rep = property_suite(trials=10, dims=(2, 2, 2, 3), seed=2)
    assert rep.passed, [c for c in rep.checks if not c.passed]


def test_broadcast_suite_passes():
    rep = broadcast_suite(seed=3, trials=10)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    d = rep.as_dict()
    assert d["suite"] == "broadcast" and d["passed"]
