import math

import numpy as np
import pytest

from clifford_guidance.guidance import GuidanceModel
from clifford_guidance.moves import Move, build_moveset
from clifford_guidance.oracle import ExactGuidance
from clifford_guidance.search import (
    GuidanceSource,
    LearnedGuidance,
    SynthesisResult,
    beam_synthesize,
    greedy_synthesize,
    hamming_guidance,
    parse_gate_lines,
    verify_decomposition,
)
from clifford_guidance.tableau import GateKind, Tableau, TableauError, apply_gate, gate_tableau, identity_tableau
from clifford_guidance.walker import WalkConfig, sample_instances

HAMMING = GuidanceSource(hamming_guidance, "hamming")


def test_identity_input(ms2):
    ident = identity_tableau(2)
    for r in (greedy_synthesize(ident, ms2, HAMMING), beam_synthesize(ident, ms2, HAMMING, 1)):
        assert r.success and r.gates == [] and r.weighted_cost == 0.0
    assert SynthesisResult(True).to_text() == "# cost=0.0 cnots=0 steps=0\n"


def test_single_generator_with_exact(ms2, table2_phases):
    g = ExactGuidance(table2_phases, ms2)
    r = greedy_synthesize(gate_tableau("h", (0,), 2, "phases"), ms2, g)
    assert r.success and [m.label for m in r.gates] == ["h 0"]
    assert r.to_text() == "h 0\n# cost=1.0 cnots=0 steps=1\n"
    r = beam_synthesize(gate_tableau("cnot", (1, 0), 2, "phases"), ms2, g, 3)
    assert [m.label for m in r.gates] == ["cnot 1 0"]


def test_verify_decomposition():
    ident = identity_tableau(2)
    assert verify_decomposition(ident, [])
    swap = gate_tableau("swap", (0, 1), 2)
    assert verify_decomposition(swap, [Move(GateKind.CNOT, q) for q in [(0, 1), (1, 0), (0, 1)]])
    assert not verify_decomposition(gate_tableau("h", (0,), 2), [Move(GateKind.S, (0,))])
    assert not verify_decomposition(ident, [Move(GateKind.H, (5,))])


def test_greedy_on_exact_descends(ms2, table2_phases):
    g = ExactGuidance(table2_phases, ms2)
    rng = np.random.default_rng(0)
    for k in table2_phases.keys[rng.choice(table2_phases.node_count, 300, replace=False)]:
        x = Tableau.from_key(int(k), 2, "phases")
        r = greedy_synthesize(x, ms2, g, rng=rng)
        assert r.success and verify_decomposition(x, r.gates)
        assert len(r.gates) == table2_phases.distance(x) <= 8


def test_beam_infinite_width_is_bfs(ms2, table2_phaseless):
    # every n=2 phaseless tableau, with an uninformative constant guidance
    const = GuidanceSource(lambda ts: np.ones(len(ts)), "const")
    for t in table2_phaseless.tableaus():
        r = beam_synthesize(t, ms2, const, math.inf)
        assert r.success and verify_decomposition(t, r.gates)
        assert len(r.gates) == table2_phaseless.distance(t)


def test_searches_are_sound_and_seeded():
    ms = build_moveset(3)
    model = GuidanceModel.initialize(3)
    guide = LearnedGuidance(model)
    for s in sample_instances(WalkConfig(3, l_max_override=6, seed=1), ms, 20):
        r1 = beam_synthesize(s.tableau, ms, guide, 3, 50, np.random.default_rng(5))
        r2 = beam_synthesize(s.tableau, ms, guide, 3, 50, np.random.default_rng(5))
        assert r1.to_record() == r2.to_record()
        if r1.success:
            assert verify_decomposition(s.tableau, r1.gates)
            assert r1.weighted_cost == len(r1.gates)
        g = greedy_synthesize(s.tableau, ms, HAMMING, 30, np.random.default_rng(5))
        if g.success:
            assert verify_decomposition(s.tableau, g.gates)


def test_failure_paths(ms2):
    x = gate_tableau("cnot", (0, 1), 2)
    far = apply_gate(apply_gate(x, ms2.find("h", 0)), ms2.find("s", 1))
    r = greedy_synthesize(far, ms2, HAMMING, max_steps=1)
    assert not r.success and r.steps_taken == 1 and "1 steps" in r.message
    r = beam_synthesize(far, ms2, HAMMING, 1, max_steps=10, visited_cap=5)
    assert not r.success and "cap" in r.message
    with pytest.raises(ValueError):
        greedy_synthesize(identity_tableau(3), ms2, HAMMING)
    with pytest.raises(ValueError):
        greedy_synthesize(x, ms2, HAMMING, max_steps=0)
    with pytest.raises(ValueError):
        beam_synthesize(x, ms2, HAMMING, 0)
    broken = Tableau(2, [1, 1, 4, 8])
    with pytest.raises(TableauError):
        greedy_synthesize(broken, ms2, HAMMING)


def test_result_records():
    ms = build_moveset(2, weight_scheme="cnot_count")
    gates = [ms.find("swap", 0, 1), ms.find("cnot", 0, 1), ms.find("h", 1)]
    r = SynthesisResult(True, gates, 4.0, 1, 3)
    assert r.swap_count == 1 and r.effective_cnots == 4
    assert r.to_text().splitlines() == ["swap 0 1", "cnot 0 1", "h 1", "# cost=4.0 cnots=1 steps=3"]
    assert "wall_time" not in r.to_record()
    assert parse_gate_lines(r.to_text(), ms) == gates
    assert [m.label for m in parse_gate_lines("H 0\n\n# comment\ncnot 1 0\n")] == ["h 0", "cnot 1 0"]


def test_hamming_guidance():
    assert list(hamming_guidance([identity_tableau(2), gate_tableau("h", (0,), 2)])) == [0.0, 4.0]
