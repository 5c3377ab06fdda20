"""Clifford synthesis guided by a learned distance-to-identity function."""

__version__ = "0.1.0"

from .tableau import (
    GateKind,
    PhaseMode,
    Tableau,
    apply_gate,
    clifford_group_size,
    compose,
    gate_tableau,
    identity_tableau,
    inverse,
    is_symplectic,
)
from .moves import Move, MoveSet, WeightScheme, build_moveset, neighbors, weight_from_fidelity
from .walker import Scaling, WalkConfig, WalkSample, sample_batch, sample_walk
from .guidance import GuidanceModel, TrainConfig, load_model, pearson, save_model, train
from .search import (
    GuidanceSource,
    LearnedGuidance,
    SynthesisResult,
    beam_synthesize,
    greedy_synthesize,
    verify_decomposition,
)
from .oracle import DistanceTable, ExactGuidance, build_distance_table, exact_distance, gods_number
from .baseline import baseline_synthesize, benchmark_compare
