"""Conic program assembly for one step of the sparse-feedback restriction.

One synthesis step solves, for a fixed linearization point Pbar and slack
budget epsilon, the semidefinite program

    minimize    Tr(X) + alpha1 * sum_ij T_ij
    subject to  [ -Q - F + Y   2X - P'   P'          ]
                [ 2X - P       I         0           ]  >= 0        (stability)
                [ P            0         (1/delta) I ]
                P = X - (A + B K) / 2                               (coupling)
                X >= eps1 * I                                       (x_floor)
                [ Y   P'              ]
                [ P   1/(1+delta) I   ] >= 0                        (gram)
                [ F   K' ]
                [ K   R^-1] >= 0                                    (gain)
                [ (eps/n) I   Y - N      ]
                [ Y - N       (eps/n) I  ] >= 0                     (linearization)
                F >= 0                                              (f_psd)
                -T <= K <= T                                        (epigraph)

over variables X, Y, F (symmetric n x n), K, T (m x n), P (n x n), where
N ist the affine surrogate of the quadratic (1+delta) P'P around Pbar (see
:func:`linearize_N`).  The gram block is the Schur form of
Y >= (1+delta) P'P and the gain block of F >= K' R K; the linearization
block pins Y to the surrogate within operator norm eps/n, which bounds the
nuclear gap between Y and the true quadratic by eps.  Feasible points
therefore certify Tr(X) as an upper bound on the closed-loop cost up to an
epsilon-controlled slack.

The module exposes a solver-agnostic intermediate representation
(:class:`ConicProgram`) holding the objective, one equality map, one
elementwise-inequality map, and six PSD blocks as constant-plus-triplet
data.  Any conic solver adapter can consume it without re-deriving the
matrix layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import PlantModel

FloatArray = np.ndarray
IntArray = np.ndarray

#: Condition number of R above which the gain block inverse is refused.
_R_COND_LIMIT = 1e12

#: Canonical variable order; offsets in the flat vector follow this order.
_VARIABLE_ORDER = ("X", "Y", "F", "K", "P", "T")

#: Canonical PSD block order emitted by :func:`build_program`.
PSD_BLOCK_ORDER = ("stability", "x_floor", "gram", "gain", "linearization", "f_psd")


class InvalidParams(ValueError):
    """Scalar parameter outside its admissible range."""


class SingularR(ArithmeticError):
    """R is too ill-conditioned to invert for the gain block."""


@dataclass(frozen=True)
class VariableBlock:
    """One named matrix variable inside the flat scalar vector.

    Symmetric variables store the upper triangle row by row
    (slot of (i, j), i <= j, is ``offset + i n - i (i - 1) / 2 + j - i``);
    general variables store all entries row-major.
    """

    name: str
    rows: int
    cols: int
    symmetric: bool
    offset: int

    @property
    def size(self) -> int:
        if self.symmetric:
            return self.rows * (self.rows + 1) // 2
        return self.rows * self.cols

    def index_map(self) -> IntArray:
        """Matrix of flat slot indices, shape (rows, cols)."""
        if self.symmetric:
            n = self.rows
            iu = np.triu_indices(n)
            slots = np.zeros((n, n), dtype=np.int64)
            slots[iu] = np.arange(len(iu[0]), dtype=np.int64)
            slots = np.maximum(slots, slots.T)
            return slots + self.offset
        return self.offset + np.arange(self.rows * self.cols, dtype=np.int64).reshape(
            self.rows, self.cols
        )


@dataclass(frozen=True)
class PsdBlock:
    """One G(z) >= 0 constraint, G(z) = const + sum_k coeffs_k z[var_idx_k] e_{r_k} e_{c_k}'.

    Triplets are stamped mirror-symmetrically: whenever (r, c) carries a
    term, (c, r) carries the matching one, so G(z) is symmetric for every z.
    """

    name: str
    size: int
    const: FloatArray
    var_idx: IntArray
    rows: IntArray
    cols: IntArray
    coeffs: FloatArray

    def evaluate(self, z: FloatArray) -> FloatArray:
        M = self.const.copy()
        np.add.at(M, (self.rows, self.cols), self.coeffs * z[self.var_idx])
        return M


@dataclass(frozen=True)
class LinearMap:
    """Sparse map rows -> sum coeffs * z[var_idx] with a right-hand side."""

    num_rows: int
    rows: IntArray
    var_idx: IntArray
    coeffs: FloatArray
    rhs: FloatArray

    def evaluate(self, z: FloatArray) -> FloatArray:
        out = np.zeros(self.num_rows, dtype=np.float64)
        np.add.at(out, self.rows, self.coeffs * z[self.var_idx])
        return out


class _BlockBuilder:
    """Accumulates triplets for one PSD block."""

    def __init__(self, name: str, size: int) -> None:
        self.name = name
        self.size = size
        self.const = np.zeros((size, size), dtype=np.float64)
        self._rows: list[IntArray] = []
        self._cols: list[IntArray] = []
        self._vars: list[IntArray] = []
        self._coeffs: list[FloatArray] = []

    def add_const(self, r0: int, c0: int, M: FloatArray) -> None:
        p, q = M.shape
        self.const[r0 : r0 + p, c0 : c0 + q] += M

    def add_var(
        self,
        r0: int,
        c0: int,
        index_map: IntArray,
        coeff: float = 1.0,
        transpose: bool = False,
    ) -> None:
        """Add coeff * V (or V transposed) with its top-left corner at (r0, c0)."""
        idx = index_map.T if transpose else index_map
        p, q = idx.shape
        rows = r0 + np.repeat(np.arange(p, dtype=np.int64), q)
        cols = c0 + np.tile(np.arange(q, dtype=np.int64), p)
        self._rows.append(rows)
        self._cols.append(cols)
        self._vars.append(idx.ravel())
        self._coeffs.append(np.full(p * q, float(coeff)))

    def add_triplets(
        self, rows: IntArray, cols: IntArray, var_idx: IntArray, coeffs: FloatArray
    ) -> None:
        self._rows.append(np.asarray(rows, dtype=np.int64))
        self._cols.append(np.asarray(cols, dtype=np.int64))
        self._vars.append(np.asarray(var_idx, dtype=np.int64))
        self._coeffs.append(np.asarray(coeffs, dtype=np.float64))

    def build(self) -> PsdBlock:
        empty_i = np.zeros(0, dtype=np.int64)
        empty_f = np.zeros(0, dtype=np.float64)
        return PsdBlock(
            name=self.name,
            size=self.size,
            const=self.const,
            var_idx=np.concatenate(self._vars) if self._vars else empty_i,
            rows=np.concatenate(self._rows) if self._rows else empty_i,
            cols=np.concatenate(self._cols) if self._cols else empty_i,
            coeffs=np.concatenate(self._coeffs) if self._coeffs else empty_f,
        )


@dataclass(frozen=True)
class ConicProgram:
    """Solver-agnostic intermediate representation of one restriction step."""

    n: int
    m: int
    alpha1: float
    delta: float
    eps1: float
    epsilon: float
    variables: tuple[VariableBlock, ...]
    num_scalars: int
    objective: FloatArray
    equalities: LinearMap
    inequalities: LinearMap
    psd_blocks: tuple[PsdBlock, ...]

    def variable(self, name: str) -> VariableBlock:
        for var in self.variables:
            if var.name == name:
                return var
        raise KeyError(name)

    def unpack(self, z: FloatArray) -> dict[str, FloatArray]:
        """Split a flat scalar vector into named full matrices."""
        z = np.asarray(z, dtype=np.float64)
        if z.shape != (self.num_scalars,):
            raise ValueError(f"expected {self.num_scalars} scalars, got {z.shape}")
        out: dict[str, FloatArray] = {}
        for var in self.variables:
            chunk = z[var.offset : var.offset + var.size]
            if var.symmetric:
                M = np.zeros((var.rows, var.rows), dtype=np.float64)
                iu = np.triu_indices(var.rows)
                M[iu] = chunk
                M.T[iu] = chunk
                out[var.name] = M
            else:
                out[var.name] = chunk.reshape(var.rows, var.cols).copy()
        return out

    def pack(self, values: dict[str, FloatArray]) -> FloatArray:
        """Inverse of :meth:`unpack`.  A missing T defaults to |K|."""
        values = dict(values)
        if "T" not in values and "K" in values:
            values["T"] = np.abs(np.asarray(values["K"], dtype=np.float64))
        z = np.zeros(self.num_scalars, dtype=np.float64)
        for var in self.variables:
            M = np.asarray(values[var.name], dtype=np.float64)
            if M.shape != (var.rows, var.cols):
                raise ValueError(f"{var.name} must be {var.rows} x {var.cols}, got {M.shape}")
            if var.symmetric:
                z[var.offset : var.offset + var.size] = M[np.triu_indices(var.rows)]
            else:
                z[var.offset : var.offset + var.size] = M.ravel()
        return z

    def validate(self) -> None:
        """Raise ValueError on structural defects in the assembled program."""
        if len(self.psd_blocks) != 6:
            raise ValueError(f"expected 6 PSD blocks, got {len(self.psd_blocks)}")
        if self.objective.shape != (self.num_scalars,):
            raise ValueError("objective length does not match the scalar count")
        referenced = np.zeros(self.num_scalars, dtype=bool)
        for block in self.psd_blocks:
            if block.const.shape != (block.size, block.size):
                raise ValueError(f"block {block.name}: const has wrong shape")
            if not np.allclose(block.const, block.const.T, atol=1e-12, rtol=0.0):
                raise ValueError(f"block {block.name}: const is not symmetric")
            for arr in (block.const, block.coeffs):
                if not np.all(np.isfinite(arr)):
                    raise ValueError(f"block {block.name}: non-finite data")
            if block.rows.size and (
                block.rows.min() < 0
                or block.rows.max() >= block.size
                or block.cols.min() < 0
                or block.cols.max() >= block.size
            ):
                raise ValueError(f"block {block.name}: entry index out of range")
            if block.var_idx.size and (
                block.var_idx.min() < 0 or block.var_idx.max() >= self.num_scalars
            ):
                raise ValueError(f"block {block.name}: variable index out of range")
            referenced[block.var_idx] = True
        for lin in (self.equalities, self.inequalities):
            if not (np.all(np.isfinite(lin.coeffs)) and np.all(np.isfinite(lin.rhs))):
                raise ValueError("linear map has non-finite data")
            if lin.var_idx.size and (
                lin.var_idx.min() < 0 or lin.var_idx.max() >= self.num_scalars
            ):
                raise ValueError("linear map variable index out of range")
            referenced[lin.var_idx] = True
        if not np.all(np.isfinite(self.objective)):
            raise ValueError("objective has non-finite data")
        if not referenced.all():
            orphans = [
                var.name
                for var in self.variables
                if not referenced[var.offset : var.offset + var.size].all()
            ]
            raise ValueError(f"variables with unconstrained scalars: {orphans}")

    def to_debug_json(self, include_data: bool = False) -> str:
        """JSON description of the program; `include_data` adds full triplets."""
        doc: dict = {
            "schema": "conic-program-debug/1",
            "n": self.n,
            "m": self.m,
            "alpha1": self.alpha1,
            "delta": self.delta,
            "eps1": self.eps1,
            "epsilon": self.epsilon,
            "num_scalars": self.num_scalars,
            "variables": [
                {
                    "name": v.name,
                    "rows": v.rows,
                    "cols": v.cols,
                    "symmetric": v.symmetric,
                    "offset": v.offset,
                    "size": v.size,
                }
                for v in self.variables
            ],
            "objective_nonzeros": int(np.count_nonzero(self.objective)),
            "equality_rows": self.equalities.num_rows,
            "inequality_rows": self.inequalities.num_rows,
            "psd_blocks": [
                {"name": b.name, "size": b.size, "nnz": int(b.var_idx.size)}
                for b in self.psd_blocks
            ],
        }
        if include_data:
            doc["objective"] = self.objective.tolist()
            doc["equalities"] = _linear_map_dict(self.equalities)
            doc["inequalities"] = _linear_map_dict(self.inequalities)
            doc["psd_data"] = [
                {
                    "name": b.name,
                    "const": b.const.tolist(),
                    "rows": b.rows.tolist(),
                    "cols": b.cols.tolist(),
                    "var_idx": b.var_idx.tolist(),
                    "coeffs": b.coeffs.tolist(),
                }
                for b in self.psd_blocks
            ]
        return json.dumps(doc, indent=1)


def _linear_map_dict(lin: LinearMap) -> dict:
    return {
        "num_rows": lin.num_rows,
        "rows": lin.rows.tolist(),
        "var_idx": lin.var_idx.tolist(),
        "coeffs": lin.coeffs.tolist(),
        "rhs": lin.rhs.tolist(),
    }


def linearize_N(P: FloatArray, Pbar: FloatArray, delta: float) -> FloatArray:
    """Affine surrogate of (1+delta) P'P around the point Pbar.

    Expanding P'P = (Pbar + D)'(Pbar + D) and dropping the quadratic D'D
    gives the tangent approximation

        N = (1 + delta) * (P' Pbar + Pbar' P - Pbar' Pbar),

    which is symmetric by construction and touches the true quadratic at
    P = Pbar.  The dropped term is (1+delta) (P - Pbar)'(P - Pbar) >= 0,
    so the surrogate never overestimates: (1+delta) P'P - N >= 0.
    """
    P = np.asarray(P, dtype=np.float64)
    Pbar = np.asarray(Pbar, dtype=np.float64)
    if P.shape != Pbar.shape or P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ValueError(f"P and Pbar must be square and matching, got {P.shape} vs {Pbar.shape}")
    return (1.0 + delta) * (P.T @ Pbar + Pbar.T @ P - Pbar.T @ Pbar)


def _check_params(alpha1: float, delta: float, eps1: float, epsilon: float) -> None:
    if not (np.isfinite(alpha1) and alpha1 >= 0.0):
        raise InvalidParams(f"alpha1 must be finite and >= 0, got {alpha1}")
    if not (np.isfinite(delta) and delta > 0.0):
        raise InvalidParams(f"delta must be finite and > 0, got {delta}")
    if not (np.isfinite(eps1) and eps1 > 0.0):
        raise InvalidParams(f"eps1 must be finite and > 0, got {eps1}")
    if not (np.isfinite(epsilon) and epsilon > 0.0):
        raise InvalidParams(f"epsilon must be finite and > 0, got {epsilon}")


def _inverse_of_R(R: FloatArray) -> FloatArray:
    eigs = np.linalg.eigvalsh(R)
    if eigs[0] <= 0.0 or eigs[-1] / eigs[0] > _R_COND_LIMIT:
        raise SingularR(
            f"R has eigenvalue range [{eigs[0]:.3e}, {eigs[-1]:.3e}]; refusing to invert"
        )
    Rinv = scipy.linalg.cho_solve(scipy.linalg.cho_factor(R), np.eye(R.shape[0]))
    return 0.5 * (Rinv + Rinv.T)


def build_program(
    plant: PlantModel,
    params,
    Pbar: FloatArray,
    epsilon: float,
) -> ConicProgram:
    """Assemble the restriction step SDP around the linearization point Pbar.

    Parameters
    ----------
    plant : PlantModel
        Validated plant quadruple.
    params : object
        Anything exposing ``alpha1``, ``delta``, ``eps1`` attributes
        (typically ``driver.SynthesisParams``).
    Pbar : (n, n) array
        Linearization point for the quadratic coupling term.
    epsilon : float
        Operator-norm budget (divided by n per block entry) tying Y to the
        affine surrogate; strictly positive.

    Raises
    ------
    InvalidParams
        If a scalar parameter is outside its range.
    SingularR
        If R cannot be inverted reliably for the gain block.
    """
    alpha1 = float(params.alpha1)
    delta = float(params.delta)
    eps1 = float(params.eps1)
    epsilon = float(epsilon)
    _check_params(alpha1, delta, eps1, epsilon)

    n, m = plant.n, plant.m
    Pbar = np.asarray(Pbar, dtype=np.float64)
    if Pbar.shape != (n, n):
        raise ValueError(f"Pbar must be {n} x {n}, got {Pbar.shape}")
    if not np.all(np.isfinite(Pbar)):
        raise ValueError("Pbar has non-finite entries")
    Rinv = _inverse_of_R(plant.R)

    sym_size = n * (n + 1) // 2
    offset = 0
    variables: list[VariableBlock] = []
    for name in _VARIABLE_ORDER:
        if name in ("X", "Y", "F"):
            var = VariableBlock(name, n, n, True, offset)
        elif name in ("K", "T"):
            var = VariableBlock(name, m, n, False, offset)
        else:  # P
            var = VariableBlock(name, n, n, False, offset)
        variables.append(var)
        offset += var.size
    num_scalars = offset
    maps = {var.name: var.index_map() for var in variables}
    xmap, ymap, fmap = maps["X"], maps["Y"], maps["F"]
    kmap, pmap, tmap = maps["K"], maps["P"], maps["T"]

    # Objective: Tr(X) + alpha1 * sum T.
    objective = np.zeros(num_scalars, dtype=np.float64)
    objective[np.diag(xmap)] = 1.0
    objective[tmap.ravel()] = alpha1

    # Coupling equalities, row (i, j): P_ij - X_ij + (1/2) sum_l B_il K_lj = -A_ij / 2.
    ii, jj = np.indices((n, n))
    eq_rows = [ (ii * n + jj).ravel(), (ii * n + jj).ravel() ]
    eq_vars = [ pmap[ii, jj].ravel(), xmap[ii, jj].ravel() ]
    eq_coeffs = [ np.ones(n * n), -np.ones(n * n) ]
    bi, bj, bl = np.indices((n, n, m))
    eq_rows.append((bi * n + bj).ravel())
    eq_vars.append(kmap[bl, bj].ravel())
    eq_coeffs.append(0.5 * plant.B[bi, bl].ravel())
    equalities = LinearMap(
        num_rows=n * n,
        rows=np.concatenate(eq_rows),
        var_idx=np.concatenate(eq_vars),
        coeffs=np.concatenate(eq_coeffs),
        rhs=(-0.5 * plant.A).ravel(),
    )

    # Epigraph inequalities: K_ij - T_ij <= 0 and -K_ij - T_ij <= 0.
    flat_k = kmap.ravel()
    flat_t = tmap.ravel()
    base = 2 * np.arange(m * n, dtype=np.int64)
    inequalities = LinearMap(
        num_rows=2 * m * n,
        rows=np.concatenate([base, base, base + 1, base + 1]),
        var_idx=np.concatenate([flat_k, flat_t, flat_k, flat_t]),
        coeffs=np.concatenate(
            [np.ones(m * n), -np.ones(m * n), -np.ones(m * n), -np.ones(m * n)]
        ),
        rhs=np.zeros(2 * m * n),
    )

    eye = np.eye(n)

    stability = _BlockBuilder("stability", 3 * n)
    stability.add_const(0, 0, -plant.Q)
    stability.add_var(0, 0, fmap, -1.0)
    stability.add_var(0, 0, ymap, 1.0)
    stability.add_var(0, n, xmap, 2.0)
    stability.add_var(0, n, pmap, -1.0, transpose=True)
    stability.add_var(n, 0, xmap, 2.0)
    stability.add_var(n, 0, pmap, -1.0)
    stability.add_var(0, 2 * n, pmap, 1.0, transpose=True)
    stability.add_var(2 * n, 0, pmap, 1.0)
    stability.add_const(n, n, eye)
    stability.add_const(2 * n, 2 * n, eye / delta)

    x_floor = _BlockBuilder("x_floor", n)
    x_floor.add_var(0, 0, xmap, 1.0)
    x_floor.add_const(0, 0, -eps1 * eye)

    gram = _BlockBuilder("gram", 2 * n)
    gram.add_var(0, 0, ymap, 1.0)
    gram.add_var(0, n, pmap, 1.0, transpose=True)
    gram.add_var(n, 0, pmap, 1.0)
    gram.add_const(n, n, eye / (1.0 + delta))

    gain = _BlockBuilder("gain", n + m)
    gain.add_var(0, 0, fmap, 1.0)
    gain.add_var(0, n, kmap, 1.0, transpose=True)
    gain.add_var(n, 0, kmap, 1.0)
    gain.add_const(n, n, Rinv)

    linearization = _BlockBuilder("linearization", 2 * n)
    linearization.add_const(0, 0, (epsilon / n) * eye)
    linearization.add_const(n, n, (epsilon / n) * eye)
    linearization.add_var(0, n, ymap, 1.0)
    linearization.add_var(n, 0, ymap, 1.0)
    _stamp_minus_N(linearization, pmap, Pbar, delta, n)

    f_psd = _BlockBuilder("f_psd", n)
    f_psd.add_var(0, 0, fmap, 1.0)

    program = ConicProgram(
        n=n,
        m=m,
        alpha1=alpha1,
        delta=delta,
        eps1=eps1,
        epsilon=epsilon,
        variables=tuple(variables),
        num_scalars=num_scalars,
        objective=objective,
        equalities=equalities,
        inequalities=inequalities,
        psd_blocks=(
            stability.build(),
            x_floor.build(),
            gram.build(),
            gain.build(),
            linearization.build(),
            f_psd.build(),
        ),
    )
    program.validate()
    return program


def _stamp_minus_N(builder: _BlockBuilder, pmap: IntArray, Pbar: FloatArray, delta: float, n: int) -> None:
    """Stamp -N(P) into the two off-diagonal corners of the linearization block.

    N_ij = (1+delta) * (sum_k P_ki Pbar_kj + sum_k Pbar_ki P_kj - (Pbar'Pbar)_ij),
    so the variable part contributes, per entry (i, j), coefficient
    -(1+delta) Pbar_kj on P_ki and -(1+delta) Pbar_ki on P_kj, and the
    constant part contributes +(1+delta) (Pbar'Pbar)_ij.
    """
    scale = 1.0 + delta
    const_part = scale * (Pbar.T @ Pbar)
    builder.add_const(0, n, const_part)
    builder.add_const(n, 0, const_part)

    kk, ii, jj = np.indices((n, n, n))
    var_first = pmap[kk, ii].ravel()
    var_second = pmap[kk, jj].ravel()
    coeff_first = (-scale * Pbar[kk, jj]).ravel()
    coeff_second = (-scale * Pbar[kk, ii]).ravel()
    for r0, c0 in ((0, n), (n, 0)):
        rows = (r0 + ii).ravel()
        cols = (c0 + jj).ravel()
        builder.add_triplets(rows, cols, var_first, coeff_first)
        builder.add_triplets(rows, cols, var_second, coeff_second)


# ---------------------------------------------------------------------------
# Feasibility verification (solver-free, straight from the formulas)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Candidate:
    """A proposed solution of one restriction step (T is implicit)."""

    X: FloatArray
    Y: FloatArray
    F: FloatArray
    K: FloatArray
    P: FloatArray

    def __post_init__(self) -> None:
        for name in ("X", "Y", "F", "K", "P"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class FeasibilityReport:
    """Numerical audit of a candidate against every constraint family.

    ``block_min_eigs`` holds the smallest eigenvalue of each PSD block,
    keyed by the block names in :data:`PSD_BLOCK_ORDER`.
    ``equality_residual`` is ||P - (X - (A + BK)/2)||_F.
    ``y_gap_frobenius`` and ``y_gap_nuclear`` measure Y - (1+delta) P'P;
    ``linearization_gap`` is the operator norm of Y - N(P).
    """

    block_min_eigs: dict[str, float]
    equality_residual: float
    y_gap_frobenius: float
    y_gap_nuclear: float
    linearization_gap: float
    tol_feas: float
    tol_eq: float
    feasible: bool


def _min_eig(M: FloatArray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[0])


def verify_feasibility(
    plant: PlantModel,
    params,
    Pbar: FloatArray,
    epsilon: float,
    candidate: Candidate,
    tol_feas: float = 1e-6,
    tol_eq: float = 1e-7,
) -> FeasibilityReport:
    """Check a candidate against the restriction constraints by direct assembly.

    This path shares no code with :func:`build_program`: each block matrix
    is formed from the closed formulas and eigendecomposed, so it provides
    an independent audit of both the builder and the solver.  ``epsilon``
    may be zero here (the audit of an exactly-tangent candidate), unlike in
    :func:`build_program` where it must be positive.
    """
    delta = float(params.delta)
    eps1 = float(params.eps1)
    n = plant.n
    X, Y, F, K, P = candidate.X, candidate.Y, candidate.F, candidate.K, candidate.P
    eye = np.eye(n)

    stability = np.block(
        [
            [-plant.Q - F + Y, 2.0 * X - P.T, P.T],
            [2.0 * X - P, eye, np.zeros((n, n))],
            [P, np.zeros((n, n)), eye / delta],
        ]
    )
    gram = np.block([[Y, P.T], [P, eye / (1.0 + delta)]])
    Rinv = _inverse_of_R(plant.R)
    gain = np.block([[F, K.T], [K, Rinv]])
    N = linearize_N(P, Pbar, delta)
    D = Y - N
    linearization = np.block(
        [[(epsilon / n) * eye, D], [D, (epsilon / n) * eye]]
    )

    block_min_eigs = {
        "stability": _min_eig(stability),
        "x_floor": _min_eig(X - eps1 * eye),
        "gram": _min_eig(gram),
        "gain": _min_eig(gain),
        "linearization": _min_eig(linearization),
        "f_psd": _min_eig(F),
    }
    equality_residual = float(
        np.linalg.norm(P - (X - 0.5 * (plant.A + plant.B @ K)), "fro")
    )
    gap = Y - (1.0 + delta) * (P.T @ P)
    gap_sigma = np.linalg.svd(gap, compute_uv=False)
    d_sigma = np.linalg.svd(D, compute_uv=False)

    feasible = (
        all(v >= -tol_feas for v in block_min_eigs.values())
        and equality_residual <= tol_eq
    )
    return FeasibilityReport(
        block_min_eigs=block_min_eigs,
        equality_residual=equality_residual,
        y_gap_frobenius=float(np.linalg.norm(gap, "fro")),
        y_gap_nuclear=float(np.sum(gap_sigma)),
        linearization_gap=float(d_sigma[0]) if d_sigma.size else 0.0,
        tol_feas=tol_feas,
        tol_eq=tol_eq,
        feasible=bool(feasible),
    )


def restriction_chain_check(
    candidate: Candidate,
    Pbar: FloatArray,
    delta: float,
    epsilon: float,
    tol: float = 1e-8,
) -> bool:
    """Verify the inequality chain that makes Tr(X) a certified near-upper bound.

    For a candidate feasible in the restriction, with M = (1+delta) P'P and
    N the affine surrogate around Pbar, the following must hold:

    1. M - N >= 0                      (dropped quadratic term is PSD)
    2. Y - M >= 0                      (gram block)
    3. hence Y - N >= 0
    4. ||Y - N||_* <= n ||Y - N||_2 <= epsilon   (linearization block)
    5. ||Y - M||_* <= ||Y - N||_*      (PSD splitting of Y - N)

    Every comparison is allowed slack `tol`.  Returns True when the whole
    chain holds, meaning Y sits within epsilon of the true quadratic in
    nuclear norm and the cost certificate degrades by at most an
    epsilon-sized term.
    """
    P = candidate.P
    Y = candidate.Y
    n = P.shape[0]
    M = (1.0 + delta) * (P.T @ P)
    N = linearize_N(P, Pbar, delta)

    if _min_eig(M - N) < -tol:
        return False
    if _min_eig(Y - M) < -tol:
        return False
    if _min_eig(Y - N) < -tol:
        return False
    d_sigma = np.linalg.svd(Y - N, compute_uv=False)
    d_nuc = float(np.sum(d_sigma))
    d_op = float(d_sigma[0]) if d_sigma.size else 0.0
    if d_nuc > n * d_op + tol:
        return False
    if n * d_op > epsilon + tol:
        return False
    m_sigma = np.linalg.svd(Y - M, compute_uv=False)
    if float(np.sum(m_sigma)) > d_nuc + tol:
        return False
    return True
