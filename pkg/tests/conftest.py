import numpy as np
import pytest
from hypothesis import strategies as st

from clifford_guidance.moves import build_moveset
from clifford_guidance.oracle import build_distance_table
from clifford_guidance.tableau import PhaseMode, apply_gate, identity_tableau


def random_walk_tableau(ms, length, rng, phase_mode=PhaseMode.PHASELESS):
    t = identity_tableau(ms.n, phase_mode)
    for i in rng.integers(0, len(ms), size=length):
        t = apply_gate(t, ms.moves[i])
    return t


@st.composite
def walk_tableaus(draw, n_values=(1, 2, 3, 4), modes=("phaseless", "phases"), max_len=40):
    n = draw(st.sampled_from(n_values))
    mode = PhaseMode.parse(draw(st.sampled_from(modes)))
    ms = build_moveset(n)
    idx = draw(st.lists(st.integers(0, len(ms) - 1), max_size=max_len))
    t = identity_tableau(n, mode)
    for i in idx:
        t = apply_gate(t, ms.moves[i])
    return t


@pytest.fixture(scope="session")
def ms2():
    return build_moveset(2)


@pytest.fixture(scope="session")
def table2_phases(ms2):
    return build_distance_table(ms2, PhaseMode.WITH_PHASES)


@pytest.fixture(scope="session")
def table2_phaseless(ms2):
    return build_distance_table(ms2, PhaseMode.PHASELESS)


@pytest.fixture(scope="session")
def table3_phaseless():
    return build_distance_table(build_moveset(3), PhaseMode.PHASELESS, allow_large=True)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# Acceptance criteria register one line each here; printed after the run.
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
