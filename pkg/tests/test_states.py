import json

import numpy as np
import pytest

from cmiflow import states
from cmiflow.entropy import cmi, vn_entropy
from cmiflow.errors import (
    BadProbabilities,
    DuplicateLabel,
    IndexOutOfRange,
    NotDensityMatrix,
    UnknownLabel,
)
from cmiflow.rand import rand_pure, rand_state


def test_validate_passes_and_fails():
    ok = states.from_matrix(["Q"], [2], np.eye(2) / 2)
    assert states.validate(ok).passed

    with pytest.raises(NotDensityMatrix):
        states.from_matrix(["Q"], [2], np.eye(2))  # trace 2
    with pytest.raises(NotDensityMatrix):
        states.from_matrix(["Q"], [2], np.diag([1.2, -0.2]))

    # diagnostic path without raising
    s = states.from_matrix(["Q"], [2], np.diag([1.2, -0.2]), check=False)
    rep = states.validate(s)
    assert not rep.passed
    assert rep.min_eigenvalue < -0.1
    assert abs(rep.trace_defect) < 1e-12


def test_tensor_disjoint_and_entropy_additivity(rng):
    s1 = rand_state(rng, ["A", "S"], [2, 2], rank=3)
    s2 = rand_state(rng, ["E"], [3], rank=2)
    both = states.tensor(s1, s2)
    assert both.labels == ("A", "S", "E")
    assert abs(np.trace(both.matrix) - 1) < 1e-12
    s_sum = vn_entropy(s1).value + vn_entropy(s2).value
    assert abs(vn_entropy(both).value - s_sum) < 1e-9
    with pytest.raises(DuplicateLabel):
        states.tensor(s1, rand_state(rng, ["S"], [2]))


def test_tensor_with_trivial_factor(rng):
    s = rand_state(rng, ["A"], [2])
    triv = states.from_matrix(["T"], [1], np.eye(1))
    out = states.tensor(s, triv)
    assert np.allclose(out.matrix, s.matrix)


def test_reduce_bell_and_roundtrip(rng):
    bell = states.maximally_entangled(2, "A", "S")
    assert np.allclose(states.reduce(bell, "A").matrix, np.eye(2) / 2)

    s1 = rand_state(rng, ["A", "S"], [2, 2])
    s2 = rand_state(rng, ["E"], [3])
    both = states.tensor(s1, s2)
    back = states.reduce(both, ("A", "S"))
    assert np.allclose(back.matrix, s1.matrix, atol=1e-12)
    with pytest.raises(UnknownLabel):
        states.reduce(both, ("A", "Z"))


def test_reduce_commutes(rng):
    s = rand_state(rng, ["A", "S", "E"], [2, 2, 3], rank=4)
    one = states.reduce(states.reduce(s, ("A", "S")), ("A",))
    two = states.reduce(s, ("A",))
    assert np.allclose(one.matrix, two.matrix, atol=1e-12)


def test_maximally_entangled_values():
    for d in (2, 3):
        s = states.maximally_entangled(d, "A", "S")
        assert abs(np.trace(s.matrix @ s.matrix).real - 1.0) < 1e-12  # purity
        assert abs(vn_entropy(s, "A").value - np.log(d)) < 1e-12
    bell = states.maximally_entangled(2, "A", "S")
    from cmiflow.entropy import mutual_information
    assert abs(mutual_information(bell, "A", "S") - 2 * np.log(2)) < 1e-12


def test_classical_state_examples():
    s = states.classical_state(["A", "E", "S"], [2, 2, 2], [0.5, 0.5], [(0, 0, 0), (1, 1, 1)])
    assert np.allclose(s.matrix, np.diag(s.matrix.diagonal()))
    assert abs(cmi(s, "A", "E", "S")) < 1e-12

    one = states.classical_state(["A", "B"], [2, 3], [1.0], [(1, 2)])
    assert one.matrix[5, 5] == 1.0

    with pytest.raises(BadProbabilities):
        states.classical_state(["A"], [2], [0.7, 0.7], [(0,), (1,)])
    with pytest.raises(IndexOutOfRange):
        states.classical_state(["A"], [2], [1.0], [(5,)])


def test_constructor_outputs_validate(rng):
    for k in range(100):
        r = np.random.default_rng(1000 + k)
        s = rand_state(r, ["A", "B"], [2, 3], rank=int(r.integers(1, 7)))
        assert states.validate(s).passed
        p = rand_pure(r, ["A", "B"], [2, 2])
        assert states.validate(p).passed


def test_json_roundtrip(rng):
    s = rand_state(rng, ["A", "S", "E1"], [2, 2, 3], rank=2)
    blob = json.dumps(states.state_to_json(s))
    back = states.state_from_json(json.loads(blob))
    assert back.labels == s.labels
    assert back.dims == s.dims
    assert np.allclose(back.matrix, s.matrix, atol=1e-15)


def test_json_vector_form():
    obj = {
        "labels": ["A", "S"],
        "dims": [2, 2],
        "vector": {"re": [1 / np.sqrt(2), 0, 0, 1 / np.sqrt(2)], "im": [0, 0, 0, 0]},
    }
    s = states.state_from_json(obj)
    bell = states.maximally_entangled(2, "A", "S")
    assert np.allclose(s.matrix, bell.matrix)
    bad = dict(obj, vector={"re": [1, 0, 0, 1], "im": [0, 0, 0, 0]})
    with pytest.raises(NotDensityMatrix):
        states.state_from_json(bad)


def test_purify_state(rng):
    s = rand_state(rng, ["A", "B"], [2, 2], rank=3)
    phi = states.purify_state(s, "C")
    assert phi.labels == ("A", "B", "C")
    assert phi.dims[2] == 3
    back = states.reduce(phi, ("A", "B"))
    assert np.allclose(back.matrix, s.matrix, atol=1e-9)
