"""Sparse state-feedback synthesis for linear-quadratic control.

The package trades closed-loop performance against controller sparsity:
an elementwise l1 penalty on the feedback gain is folded into an SDP
restriction of the LQ problem, solved sequentially around shrinking
linearization budgets.  Alongside the synthesis loop it ships dense LQR
baselines, instance generators, a closed-form analyzer for cyclic
systems, and a benchmarking harness with a command line.
"""

from .backend import SolveOutcome, SolveStatus, solve
from .densela import GainEvaluation, evaluate_gain, lqr_gain, norms, solve_lyapunov
from .driver import (
    IterationRecord,
    SynthesisParams,
    SynthesisResult,
    SynthesisStatus,
    epsilon_schedule,
    initial_point,
    synthesize,
)
from .formulation import (
    Candidate,
    ConicProgram,
    FeasibilityReport,
    build_program,
    linearize_N,
    restriction_chain_check,
    verify_feasibility,
)
from .harness import SweepRecord, cli, emit_spectrum, sweep
from .model import (
    CyclicSpec,
    DecayingSpec,
    PlantModel,
    PlantValidationError,
    SecantBounds,
    gen_cyclic,
    gen_decaying,
    generate,
    identity_plant,
    secant_bounds,
    validate_plant,
)
from .rng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "ConicProgram",
    "CyclicSpec",
    "DecayingSpec",
    "FeasibilityReport",
    "GainEvaluation",
    "IterationRecord",
    "PlantModel",
    "PlantValidationError",
    "SecantBounds",
    "SolveOutcome",
    "SplitMix64",
    "SolveStatus",
    "SweepRecord",
    "SynthesisParams",
    "SynthesisResult",
    "SynthesisStatus",
    "build_program",
    "cli",
    "emit_spectrum",
    "epsilon_schedule",
    "evaluate_gain",
    "gen_cyclic",
    "gen_decaying",
    "generate",
    "identity_plant",
    "initial_point",
    "linearize_N",
    "lqr_gain",
    "norms",
    "restriction_chain_check",
    "secant_bounds",
    "solve",
    "solve_lyapunov",
    "sweep",
    "synthesize",
    "validate_plant",
    "verify_feasibility",
]
