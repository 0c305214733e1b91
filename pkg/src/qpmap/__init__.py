"""Approximate MAP estimation in pairwise MRFs via QP message passing."""

from .common import SolverConfig, SolveReport, TraceRecord
from .generators import IsingSpec, gen_ising_grid, gen_random_mrf
from .model import (
    DegenerateNodeError,
    InvalidAssignmentError,
    ModelError,
    ObjectiveOffset,
    PairwiseMRF,
    UnsupportedModelError,
    absorb_unary,
    decode,
    evaluate_assignment,
    normalize_nonnegative,
    prepare_model,
    qp_objective,
)
from .uai import UaiParseError, parse_uai, write_uai
from .cccp import solve
from .convex import solve_convex
from .gpem import solve_gp
from .maxproduct import solve_mp

__all__ = [
    "SolverConfig",
    "SolveReport",
    "TraceRecord",
    "IsingSpec",
    "gen_ising_grid",
    "gen_random_mrf",
    "DegenerateNodeError",
    "InvalidAssignmentError",
    "ModelError",
    "ObjectiveOffset",
    "PairwiseMRF",
    "UnsupportedModelError",
    "absorb_unary",
    "decode",
    "evaluate_assignment",
    "normalize_nonnegative",
    "prepare_model",
    "qp_objective",
    "UaiParseError",
    "parse_uai",
    "write_uai",
    "solve",
    "solve_convex",
    "solve_gp",
    "solve_mp",
]

__version__ = "0.1.0"
