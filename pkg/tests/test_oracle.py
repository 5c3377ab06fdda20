import numpy as np
import pytest

from clifford_guidance.moves import MoveSet, build_moveset
from clifford_guidance.oracle import (
    CapacityError,
    ExactGuidance,
    OracleLookupError,
    apply_move_keys,
    bfs_table,
    bucket_dijkstra_table,
    build_distance_table,
    check_capacity,
    exact_distance,
    gods_number,
    heap_dijkstra_table,
    is_inverse_closed,
    load_table,
    save_table,
)
from clifford_guidance.tableau import (
    PhaseMode,
    Tableau,
    apply_gate,
    clifford_group_size,
    gate_tableau,
    identity_tableau,
    inverse,
)

# Frozen from the first exhaustive runs, cross-checked by the heap Dijkstra builder.
HIST_N2_PHASES = [1, 15, 108, 492, 1597, 3307, 3924, 1960, 116]
HIST_N2_PHASELESS = [1, 7, 28, 85, 173, 222, 158, 46]


def test_n2_with_phases(table2_phases):
    assert table2_phases.node_count == 11520 == clifford_group_size(2)
    assert gods_number(table2_phases) == 8.0
    assert [c for _, c in table2_phases.histogram()] == HIST_N2_PHASES
    assert table2_phases.distance(identity_tableau(2, "phases")) == 0.0


def test_n2_phaseless(table2_phaseless):
    assert table2_phaseless.node_count == 720
    assert gods_number(table2_phaseless) == 7.0
    assert [c for _, c in table2_phaseless.histogram()] == HIST_N2_PHASELESS
    assert table2_phaseless.histogram_csv().splitlines()[:3] == ["distance,count", "0,1", "1,7"]


@pytest.mark.parametrize("mode", list(PhaseMode))
def test_n1_regression(mode):
    table = build_distance_table(build_moveset(1), mode)
    assert table.node_count == clifford_group_size(1, mode is PhaseMode.WITH_PHASES)
    assert gods_number(table) == 3.0


def test_n3_phaseless(table3_phaseless):
    assert table3_phaseless.node_count == 1451520
    assert gods_number(table3_phaseless) == 11.0


@pytest.mark.parametrize("mode", list(PhaseMode))
@pytest.mark.parametrize("scheme", ["unit", "cnot_count"])
def test_builders_agree(mode, scheme):
    ms = build_moveset(2, weight_scheme=scheme)
    heap = heap_dijkstra_table(ms, mode)
    fast = bfs_table(ms, mode) if scheme == "unit" else bucket_dijkstra_table(ms, mode)
    assert np.array_equal(heap.keys, fast.keys)
    assert np.array_equal(heap.distances, fast.distances)
    if scheme == "cnot_count":
        assert gods_number(fast) == 3.0


def test_cnot_count_regressions():
    assert set(build_distance_table(build_moveset(1, weight_scheme="cnot_count")).distances) == {0.0}


def test_single_generators(ms2, table2_phases):
    for m in ms2:
        assert exact_distance(gate_tableau(m.kind, m.qubits, 2, "phases"), table2_phases) == 1.0
    cc = build_distance_table(build_moveset(2, weight_scheme="cnot_count"), "phases")
    assert cc.distance(gate_tableau("h", (1,), 2, "phases")) == 0.0
    assert cc.distance(gate_tableau("cnot", (1, 0), 2, "phases")) == 1.0
    # a SWAP is three CNOTs, so never worth more than 3
    assert cc.distance(gate_tableau("swap", (0, 1), 2, "phases")) == 3.0


@pytest.mark.parametrize("fixture", ["table2_phases", "table2_phaseless"])
def test_lipschitz_exhaustive(fixture, ms2, request):
    table = request.getfixturevalue(fixture)
    for m in ms2:
        nb = apply_move_keys(table.keys, m, 2, table.phase_mode)
        diff = np.abs(table.lookup_keys(nb) - table.distances)
        assert diff.max() <= m.weight


def test_vectorised_moves_match_scalar(ms2, table2_phases):
    rng = np.random.default_rng(0)
    keys = table2_phases.keys[rng.choice(table2_phases.node_count, 50, replace=False)]
    for m in ms2:
        out = apply_move_keys(keys, m, 2, PhaseMode.WITH_PHASES)
        for k, o in zip(keys, out):
            t = Tableau.from_key(int(k), 2, "phases")
            assert apply_gate(t, m).key() == int(o)


def test_monotone_under_subsets():
    full = build_moveset(2)
    no_swap = MoveSet(2, full.moves[:-1], full.topology, full.weight_scheme, "subset")
    g_full = gods_number(bfs_table(full, "phases"))
    g_sub = gods_number(bfs_table(no_swap, "phases"))
    assert g_full <= g_sub


def test_exact_guidance_inverse_handling():
    # the full generator set is inverse-closed, so the table is read directly
    ms = build_moveset(2, weight_scheme="cnot_count")
    assert is_inverse_closed(ms)
    table = build_distance_table(ms, "phases")
    g = ExactGuidance(table, ms)
    rng = np.random.default_rng(3)
    for k in table.keys[rng.choice(table.node_count, 100, replace=False)]:
        t = Tableau.from_key(int(k), 2, "phases")
        assert g.remaining(t) == table.distance(inverse(t))

    sub = MoveSet(2, tuple(m for m in ms if m.kind.value != "sdg"), ms.topology, ms.weight_scheme, "nosdg")
    assert not is_inverse_closed(sub)
    fwd = build_distance_table(sub, "phases")
    inv = build_distance_table(sub, "phases", inverse_moves=True)
    g_fwd, g_inv = ExactGuidance(fwd, sub), ExactGuidance(inv, sub)
    for k in fwd.keys[rng.choice(fwd.node_count, 200, replace=False)]:
        t = Tableau.from_key(int(k), 2, "phases")
        assert g_fwd.remaining(t) == g_inv.remaining(t)


def test_lookup_errors(table2_phases):
    with pytest.raises(OracleLookupError):
        table2_phases.distance(identity_tableau(2))
    with pytest.raises(OracleLookupError):
        table2_phases.distance(identity_tableau(1, "phases"))
    with pytest.raises(OracleLookupError):
        table2_phases.lookup_keys(np.array([3], dtype=np.uint64))
    with pytest.raises(ValueError):
        ExactGuidance(table2_phases, build_moveset(3))


def test_capacity():
    check_capacity(2, "phases")
    with pytest.raises(CapacityError):
        check_capacity(3, "phaseless")
    check_capacity(3, "phaseless", allow_large=True)
    with pytest.raises(CapacityError):
        check_capacity(3, "phases", allow_large=True)
    with pytest.raises(CapacityError):
        build_distance_table(build_moveset(5), "phaseless", allow_large=True)
    incomplete = bfs_table(build_moveset(2), "phases", max_nodes=20000)
    incomplete.keys = incomplete.keys[:-1]
    with pytest.raises(ValueError):
        gods_number(incomplete)


def test_table_round_trip(tmp_path, table2_phases):
    path = tmp_path / "t.bin"
    save_table(table2_phases, path)
    back = load_table(path)
    assert np.array_equal(back.keys, table2_phases.keys)
    assert np.array_equal(back.distances, table2_phases.distances)
    assert (back.n, back.phase_mode, back.fingerprint) == (2, PhaseMode.WITH_PHASES, table2_phases.fingerprint)
    data = path.read_bytes()
    (tmp_path / "short.bin").write_bytes(data[:-5])
    with pytest.raises(ValueError):
        load_table(tmp_path / "short.bin")
    (tmp_path / "bad.bin").write_bytes(b"NOTATABLE" + data[9:])
    with pytest.raises(ValueError):
        load_table(tmp_path / "bad.bin")
