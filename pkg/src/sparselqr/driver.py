"""Sequential restriction loop producing sparse feedback gains.

Each pass linearizes the quadratic coupling around the previous solution,
solves the resulting SDP restriction, and tightens the linearization
budget epsilon geometrically.  The loop starts from the dense LQR point,
which is feasible for every budget, and stops once the solution movement
and the gap between Y and its quadratic both fall below eps2 in relative
Frobenius norm.  Because every iterate is feasible for its own
restriction, the reported Tr(X) is a certified upper bound on the true
closed-loop cost up to an epsilon-sized slack at any stopping point.

A failed solve is retried at the previous, larger budget (the schedule
index backs up one step); three consecutive failures abandon the run and
return the last accepted iterate, or the LQR initializer when nothing was
ever accepted.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import backend
from .densela import evaluate_gain, lqr_gain
from .formulation import Candidate, InvalidParams, build_program
from .model import PlantModel

FloatArray = np.ndarray

#: Solver accuracy must stay in this closed interval.
_ACCURACY_RANGE = (1e-10, 1e-4)


class SynthesisStatus(enum.Enum):
    CONVERGED = "converged"
    ITERATION_CAP = "iteration_cap"
    STALLED_INFEASIBLE = "stalled_infeasible"


@dataclass(frozen=True)
class SynthesisParams:
    """Scalar knobs of the synthesis loop.

    ``alpha1`` weights the elementwise l1 penalty (0 reproduces dense LQR);
    ``alpha`` and ``beta`` define the budget schedule epsilon_i =
    n * alpha * beta^(i-1); ``delta`` is the coupling regularizer; ``eps1``
    the floor on X; ``eps2`` the relative stopping tolerance; ``tau`` the
    magnitude below which a gain entry counts as zero.
    """

    alpha1: float = 0.005
    alpha: float = 1e-5
    beta: float = 0.99
    delta: float = 0.001
    eps1: float = 1e-6
    eps2: float = 5e-5
    tau: float = 5e-5
    max_iters: int = 200
    solver_accuracy: float = 1e-8

    def __post_init__(self) -> None:
        checks = [
            (math.isfinite(self.alpha1) and self.alpha1 >= 0.0, "alpha1 must be >= 0"),
            (math.isfinite(self.alpha) and self.alpha > 0.0, "alpha must be > 0"),
            (math.isfinite(self.beta) and 0.0 < self.beta < 1.0, "beta must be in (0, 1)"),
            (math.isfinite(self.delta) and self.delta > 0.0, "delta must be > 0"),
            (math.isfinite(self.eps1) and self.eps1 > 0.0, "eps1 must be > 0"),
            (math.isfinite(self.eps2) and self.eps2 > 0.0, "eps2 must be > 0"),
            (math.isfinite(self.tau) and self.tau >= 0.0, "tau must be >= 0"),
            (self.max_iters >= 1, "max_iters must be at least 1"),
            (
                _ACCURACY_RANGE[0] <= self.solver_accuracy <= _ACCURACY_RANGE[1],
                f"solver_accuracy must lie in [{_ACCURACY_RANGE[0]:g}, {_ACCURACY_RANGE[1]:g}]",
            ),
        ]
        bad = [msg for ok, msg in checks if not ok]
        if bad:
            raise InvalidParams("; ".join(bad))


@dataclass(frozen=True)
class IterationRecord:
    """One pass of the loop: its budget, solver outcome, and movement metrics.

    ``rel_p_change`` is ||P - Pbar||_F / ||P||_F and ``rel_y_gap`` is
    ||Y - (1+delta) P'P||_F / ||Y||_F; both are NaN for rejected passes.
    """

    index: int
    epsilon: float
    solve_status: str
    objective: float
    rel_p_change: float
    rel_y_gap: float
    accepted: bool


@dataclass(frozen=True)
class SynthesisResult:
    K_opt: FloatArray
    X_opt: FloatArray
    J_opt: float
    J_eval: float
    cardinality: int
    iterations: tuple[IterationRecord, ...]
    status: SynthesisStatus


def initial_point(plant: PlantModel) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Dense LQR initializer (K0, X0, P0) with P0 = X0 - (A + B K0) / 2."""
    K0, X0, _ = lqr_gain(plant)
    P0 = X0 - 0.5 * (plant.A + plant.B @ K0)
    return K0, X0, P0


def epsilon_schedule(n: int, alpha: float, beta: float, i: int) -> float:
    """Budget for pass `i` (1-based): epsilon_i = n * alpha * beta^(i-1)."""
    if i < 1:
        raise ValueError("pass index i must be at least 1")
    return n * alpha * beta ** (i - 1)


def _relative(num: float, den: float) -> float:
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return num / den


def synthesize(
    plant: PlantModel,
    params: SynthesisParams = SynthesisParams(),
    on_iterate: Callable[[IterationRecord, Candidate, FloatArray, float], None] | None = None,
) -> SynthesisResult:
    """Run the sequential restriction loop on `plant`.

    Parameters
    ----------
    plant : PlantModel
        Validated plant.
    params : SynthesisParams
        Loop and penalty parameters.
    on_iterate : callable, optional
        Hook invoked after every accepted pass with
        ``(record, candidate, Pbar, epsilon)``, the linearization point the
        pass was solved against and its budget.  Intended for audits.

    Returns
    -------
    SynthesisResult
        Final gain with its certified objective ``J_opt = Tr(X)``, the
        closed-loop evaluation ``J_eval`` of the returned gain, and the
        complete per-pass history.
    """
    K0, X0, P0 = initial_point(plant)
    n = plant.n
    Pbar = P0
    best_K, best_X = K0, X0
    records: list[IterationRecord] = []
    schedule_pos = 0
    consecutive_failures = 0
    status = SynthesisStatus.ITERATION_CAP

    for it in range(1, params.max_iters + 1):
        eps_i = epsilon_schedule(n, params.alpha, params.beta, schedule_pos + 1)
        program = build_program(plant, params, Pbar, eps_i)
        outcome = backend.solve(program, params.solver_accuracy)

        if not outcome.status.has_solution:
            consecutive_failures += 1
            records.append(
                IterationRecord(
                    index=it,
                    epsilon=eps_i,
                    solve_status=outcome.status.value,
                    objective=math.nan,
                    rel_p_change=math.nan,
                    rel_y_gap=math.nan,
                    accepted=False,
                )
            )
            if consecutive_failures >= 3:
                status = SynthesisStatus.STALLED_INFEASIBLE
                break
            if schedule_pos > 0:
                # Retry with the previous, looser budget before giving up.
                schedule_pos -= 1
            continue

        consecutive_failures = 0
        v = outcome.variables
        X, Y, K, P = v["X"], v["Y"], v["K"], v["P"]
        rel_p = _relative(
            float(np.linalg.norm(P - Pbar, "fro")), float(np.linalg.norm(P, "fro"))
        )
        rel_y = _relative(
            float(np.linalg.norm(Y - (1.0 + params.delta) * (P.T @ P), "fro")),
            float(np.linalg.norm(Y, "fro")),
        )
        record = IterationRecord(
            index=it,
            epsilon=eps_i,
            solve_status=outcome.status.value,
            objective=outcome.objective,
            rel_p_change=rel_p,
            rel_y_gap=rel_y,
            accepted=True,
        )
        records.append(record)
        if on_iterate is not None:
            on_iterate(record, Candidate(X=X, Y=Y, F=v["F"], K=K, P=P), Pbar, eps_i)
        best_K, best_X = K, X

        if rel_p < params.eps2 and rel_y < params.eps2:
            status = SynthesisStatus.CONVERGED
            break
        Pbar = P
        schedule_pos += 1

    evaluation = evaluate_gain(plant, best_K, params.tau)
    return SynthesisResult(
        K_opt=best_K,
        X_opt=best_X,
        J_opt=float(np.trace(best_X)),
        J_eval=evaluation.cost,
        cardinality=evaluation.cardinality,
        iterations=tuple(records),
        status=status,
    )


def _finite_or_none(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


def result_to_dict(result: SynthesisResult, params: SynthesisParams) -> dict:
    return {
        "schema": "synthesis-result/1",
        "status": result.status.value,
        "J_opt": _finite_or_none(result.J_opt),
        "J_eval": _finite_or_none(result.J_eval),
        "cardinality": result.cardinality,
        "K_opt": result.K_opt.tolist(),
        "X_opt": result.X_opt.tolist(),
        "params": dataclasses.asdict(params),
        "iterations": [
            {
                "index": r.index,
                "epsilon": r.epsilon,
                "solve_status": r.solve_status,
                "objective": _finite_or_none(r.objective),
                "rel_p_change": _finite_or_none(r.rel_p_change),
                "rel_y_gap": _finite_or_none(r.rel_y_gap),
                "accepted": r.accepted,
            }
            for r in result.iterations
        ],
    }


def save_result_json(path: str, result: SynthesisResult, params: SynthesisParams) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(result, params), fh, indent=1)
        fh.write("\n")
