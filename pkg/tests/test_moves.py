import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clifford_guidance.moves import (
    Move,
    WeightScheme,
    build_moveset,
    expected_move_count,
    line_topology,
    moveset_from_config,
    neighbors,
    weight_from_fidelity,
)
from clifford_guidance.tableau import GateKind, identity_tableau, is_symplectic


@pytest.mark.parametrize("n,count", [(2, 15), (3, 27), (4, 42), (5, 60), (6, 81)])
def test_all_to_all_counts(n, count):
    ms = build_moveset(n)
    assert len(ms) == count == expected_move_count(n)
    assert len({(m.kind, m.qubits) for m in ms}) == count


@given(st.integers(1, 8), st.data())
def test_count_law_on_random_topologies(n, data):
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    if n >= 2:
        edges = data.draw(st.lists(st.sampled_from(pairs), min_size=1, unique=True))
    else:
        edges = []
    ms = build_moveset(n, edges if n >= 2 else None)
    assert len(ms) == 6 * n + 3 * len(set(edges))


def test_ordering_and_labels():
    ms = build_moveset(2)
    labels = [m.label for m in ms]
    assert labels[:6] == ["x 0", "y 0", "z 0", "h 0", "s 0", "sdg 0"]
    assert labels[12:] == ["cnot 0 1", "cnot 1 0", "swap 0 1"]
    assert ms.index("cnot", 1, 0) == 13
    assert ms.find("swap", 1, 0).qubits == (0, 1)
    with pytest.raises(KeyError):
        ms.find("cnot", 0, 0 + 5)


def test_weight_schemes():
    unit = build_moveset(3)
    assert set(unit.weights()) == {1.0}
    cc = build_moveset(3, weight_scheme="cnot_count")
    for m in cc:
        assert m.weight == {GateKind.CNOT: 1.0, GateKind.SWAP: 3.0}.get(m.kind, 0.0)
    assert unit.fingerprint != cc.fingerprint


def test_line_topology():
    ms = build_moveset(4, line_topology(4))
    assert len(ms) == 6 * 4 + 3 * 3
    assert ms.topology == ((0, 1), (1, 2), (2, 3))
    with pytest.raises(ValueError):
        build_moveset(3, [(0, 3)])
    with pytest.raises(ValueError):
        build_moveset(3, [])


def test_fidelity_weights():
    # ln(0.99) / ln(0.999), evaluated independently
    assert weight_from_fidelity(0.99, 0.999) == pytest.approx(10.045309847627674, rel=1e-12)
    assert weight_from_fidelity(0.99, 0.999, "displayed") == pytest.approx(1 / 10.045309847627674)
    assert weight_from_fidelity(0.999, 0.999) == 1.0
    assert weight_from_fidelity(1.0, 0.999) == 0.0
    for bad in [(0.0, 0.9), (0.9, 1.0), (1.2, 0.9)]:
        with pytest.raises(ValueError):
            weight_from_fidelity(*bad)


def test_moveset_from_config_fidelity():
    doc = {
        "n": 2,
        "edges": [[0, 1]],
        "weights": {
            "scheme": "fidelity",
            "reference": "h",
            "fidelities": {"x": 0.999, "y": 0.999, "z": 1.0, "h": 0.999, "s": 0.999,
                           "sdg": 0.999, "cnot": [[0, 1, 0.99], [1, 0, 0.98]], "swap": 0.97},
        },
    }
    ms = moveset_from_config(doc)
    assert ms.weight_scheme is WeightScheme.FIDELITY
    assert ms.find("h", 0).weight == 1.0
    assert ms.find("z", 1).weight == 0.0
    assert ms.find("cnot", 0, 1).weight == pytest.approx(math.log(0.99) / math.log(0.999))
    assert ms.find("cnot", 1, 0).weight > ms.find("cnot", 0, 1).weight
    del doc["weights"]["fidelities"]["swap"]
    with pytest.raises(ValueError):
        moveset_from_config(doc)


def test_prune_and_move_validation():
    ms = build_moveset(2, prune_trivial_moves=True)
    assert len(ms) == 15 - 6
    with pytest.raises(ValueError):
        Move(GateKind.CNOT, (1, 1))
    with pytest.raises(ValueError):
        Move(GateKind.H, (0,), -1.0)
    with pytest.raises(ValueError):
        Move(GateKind.H, (0, 1))
    assert Move(GateKind.S, (0,)).inverse_kind() is GateKind.SDG


def test_neighbors():
    ms = build_moveset(2)
    nb = neighbors(identity_tableau(2), ms)
    assert len(nb) == 15
    # X, Y, Z fix the identity when phases are dropped
    assert sum(t == identity_tableau(2) for _, t in nb) == 6
    with pytest.raises(ValueError):
        neighbors(identity_tableau(3), ms)


def test_line_topology_three_qubits():
    assert len(build_moveset(3, line_topology(3))) == 24


@pytest.mark.parametrize("mode", ["phases", "phaseless"])
def test_neighbors_are_symplectic(mode):
    ms = build_moveset(3)
    t = identity_tableau(3, mode)
    for m, nb in neighbors(t, ms):
        assert is_symplectic(nb)
        if mode == "phaseless" and m.kind in (GateKind.X, GateKind.Y, GateKind.Z):
            assert nb == t
