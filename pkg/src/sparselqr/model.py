"""Plant data model, benchmark instance generators, and the cyclic secant analyzer.

A plant is the quadruple (A, B, Q, R) of a linear time-invariant system
``xdot = A x + B u`` with quadratic state/input weights.  This module owns
validation of that quadruple, two seeded instance families (spatially
decaying dense systems and sign-structured cyclic systems), and closed-form
stability intervals for single-entry diagonal feedback on cyclic systems.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .rng import SplitMix64

FloatArray = NDArray[np.float64]

#: Relative tolerance used for symmetry checks on the weight matrices.
_SYM_RTOL = 1e-10
#: Eigenvalue floor below which Q is declared indefinite.
_PSD_TOL = -1e-10


class PlantValidationError(ValueError):
    """Plant quadruple violates its contract.

    Carries every violated invariant, not just the first one found, as a
    list of ``(code, detail)`` pairs.  Codes are stable strings:
    ``DimensionMismatch``, ``NonSymmetricWeight``, ``IndefiniteQ``,
    ``NonPositiveDefiniteR``, ``Uncontrollable``.
    """

    def __init__(self, violations: list[tuple[str, str]]) -> None:
        self.violations = list(violations)
        super().__init__("; ".join(f"{code}: {detail}" for code, detail in self.violations))

    @property
    def codes(self) -> list[str]:
        return [code for code, _ in self.violations]


class InvalidSpec(ValueError):
    """Generator specification outside its admissible range."""


class NotCyclicPattern(ValueError):
    """Matrix does not have the strict cyclic sign pattern."""


class DegenerateProduct(ValueError):
    """A product of cyclic entries vanished (underflow), so a bound denominator is zero."""


@dataclass(frozen=True)
class PlantModel:
    """Validated plant quadruple.

    Construct through :func:`validate_plant`; the constructor itself only
    normalises storage (float64, C-order, read-only views) and records the
    dimensions ``n`` (states) and ``m`` (inputs).
    """

    A: FloatArray
    B: FloatArray
    Q: FloatArray
    R: FloatArray
    n: int
    m: int

    def __post_init__(self) -> None:
        for name in ("A", "B", "Q", "R"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def _is_symmetric(M: FloatArray) -> bool:
    scale = 1.0 + float(np.max(np.abs(M), initial=0.0))
    return float(np.max(np.abs(M - M.T), initial=0.0)) <= _SYM_RTOL * scale


def controllability_rank(A: FloatArray, B: FloatArray) -> int:
    """Rank of [B, AB, ..., A^{n-1}B] with tolerance n * sigma_max * eps."""
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    ctrb = np.hstack(blocks)
    sigma = np.linalg.svd(ctrb, compute_uv=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    tol = n * sigma[0] * np.finfo(np.float64).eps
    return int(np.count_nonzero(sigma > tol))


def validate_plant(A: FloatArray, B: FloatArray, Q: FloatArray, R: FloatArray) -> PlantModel:
    """Check a plant quadruple and return the validated model.

    Every violated invariant is collected before raising, so a caller sees
    the complete list at once.  Dimension errors short-circuit the value
    checks (they are meaningless on misshaped data).

    Raises
    ------
    PlantValidationError
        If any invariant fails.  ``exc.codes`` lists the violation codes.
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    Q = np.asarray(Q, dtype=np.float64)
    R = np.asarray(R, dtype=np.float64)

    violations: list[tuple[str, str]] = []
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        violations.append(("DimensionMismatch", f"A must be square and nonempty, got {A.shape}"))
    n = A.shape[0] if A.ndim == 2 else -1
    if B.ndim != 2 or B.shape[0] != n or B.shape[1] == 0:
        violations.append(("DimensionMismatch", f"B must be n x m with n={n}, got {B.shape}"))
    m = B.shape[1] if B.ndim == 2 else -1
    if Q.ndim != 2 or Q.shape != (n, n):
        violations.append(("DimensionMismatch", f"Q must be {n} x {n}, got {Q.shape}"))
    if R.ndim != 2 or R.shape != (m, m):
        violations.append(("DimensionMismatch", f"R must be {m} x {m}, got {R.shape}"))
    if violations:
        raise PlantValidationError(violations)

    if not _is_symmetric(Q):
        violations.append(("NonSymmetricWeight", "Q is not symmetric"))
    if not _is_symmetric(R):
        violations.append(("NonSymmetricWeight", "R is not symmetric"))

    Qs = 0.5 * (Q + Q.T)
    Rs = 0.5 * (R + R.T)
    q_min = float(np.linalg.eigvalsh(Qs)[0])
    r_min = float(np.linalg.eigvalsh(Rs)[0])
    if q_min < _PSD_TOL:
        violations.append(("IndefiniteQ", f"min eigenvalue of Q is {q_min:.3e}"))
    if r_min <= 0.0:
        violations.append(("NonPositiveDefiniteR", f"min eigenvalue of R is {r_min:.3e}"))

    rank = controllability_rank(A, B)
    if rank < n:
        violations.append(("Uncontrollable", f"controllability matrix has rank {rank} < {n}"))

    if violations:
        raise PlantValidationError(violations)
    return PlantModel(A=A, B=B, Q=Qs, R=Rs, n=int(n), m=int(m))


def identity_plant(A: FloatArray) -> PlantModel:
    """Plant with B = Q = I_n and R = I_m = I_n, the benchmark convention."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    eye = np.eye(n)
    return validate_plant(A, eye, eye, eye)


# ---------------------------------------------------------------------------
# Seeded instance families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecayingSpec:
    """Spatially decaying dense family: A_ij = c_i * exp(-alphaA * |i-j|^betaA).

    The row scales c_i are standard normals.  Draw order is the row index
    i = 1..n, one normal per row, nothing else is drawn.  The decay width
    alphaA is positive; the decay rate betaA lies in (0, 1] (sub-exponential
    falloff).  Defaults match the benchmark spectrum instance.
    """

    n: int
    alphaA: float = 5.0
    betaA: float = 0.8903
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InvalidSpec(f"n must be at least 1, got {self.n}")
        if not (self.alphaA > 0.0 and math.isfinite(self.alphaA)):
            raise InvalidSpec(f"alphaA must be positive and finite, got {self.alphaA}")
        if not (0.0 < self.betaA <= 1.0):
            raise InvalidSpec(f"betaA must lie in (0, 1], got {self.betaA}")


@dataclass(frozen=True)
class CyclicSpec:
    """Sign-structured cyclic family on n >= 3 nodes.

    Nonzeros: negative diagonal, positive subdiagonal A_{i,i-1}, negative
    corner A_{1,n}; every magnitude is 0.5 + |standard normal|.  Draw order
    is diagonal i = 1..n, then subdiagonal i = 2..n, then the corner.
    """

    n: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 3:
            raise InvalidSpec(f"n must be at least 3, got {self.n}")


def gen_decaying(spec: DecayingSpec) -> FloatArray:
    """Generate the decaying-family A matrix for `spec` (deterministic in the seed)."""
    gen = SplitMix64(spec.seed)
    c = gen.normals(spec.n)
    idx = np.arange(spec.n, dtype=np.float64)
    dist = np.abs(idx[:, None] - idx[None, :])
    return c[:, None] * np.exp(-spec.alphaA * dist ** spec.betaA)


def gen_cyclic(spec: CyclicSpec) -> FloatArray:
    """Generate the cyclic-family A matrix for `spec` (deterministic in the seed)."""
    gen = SplitMix64(spec.seed)
    n = spec.n
    A = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        A[i, i] = -(0.5 + abs(gen.normal()))
    for i in range(1, n):
        A[i, i - 1] = 0.5 + abs(gen.normal())
    A[0, n - 1] = -(0.5 + abs(gen.normal()))
    return A


# ---------------------------------------------------------------------------
# Cyclic secant analyzer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SecantBounds:
    """Single-entry stability intervals for diagonal/subdiagonal/corner feedback.

    Each bound describes the gains k for which perturbing *one* entry of a
    cyclic matrix keeps the secant stability certificate
    ``prod(loop gains) / prod(-A_ii) < sec(pi/n)^n`` satisfied, all other
    entries left untouched.  The intervals are not joint: moving several
    entries to their individual limits simultaneously can violate the
    certificate, because each bound treats the remaining entries as fixed.

    Indices are 0-based: ``diag_upper[j]`` bounds an added K_jj from above,
    ``subdiag_lower[j] / subdiag_upper[j]`` bracket an added K_{j+1,j}, and
    ``corner_lower / corner_upper`` bracket an added K_{0,n-1}.
    """

    n: int
    diag_upper: FloatArray
    subdiag_lower: FloatArray
    subdiag_upper: FloatArray
    corner_lower: float
    corner_upper: float
    threshold: float

    def __post_init__(self) -> None:
        for name in ("diag_upper", "subdiag_lower", "subdiag_upper"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.diag_upper.shape != (self.n,):
            raise ValueError("diag_upper must have length n")
        if self.subdiag_lower.shape != (self.n - 1,) or self.subdiag_upper.shape != (self.n - 1,):
            raise ValueError("subdiagonal bounds must have length n - 1")


def check_cyclic_pattern(A: FloatArray) -> list[str]:
    """Return a list of violations of the strict cyclic sign pattern (empty if clean)."""
    A = np.asarray(A, dtype=np.float64)
    problems: list[str] = []
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        return [f"matrix must be square, got {A.shape}"]
    n = A.shape[0]
    if n < 3:
        problems.append(f"cyclic pattern needs n >= 3, got n = {n}")
        return problems
    for i in range(n):
        if not A[i, i] < 0.0:
            problems.append(f"diagonal entry ({i},{i}) must be negative, got {A[i, i]!r}")
    for i in range(1, n):
        if not A[i, i - 1] > 0.0:
            problems.append(f"subdiagonal entry ({i},{i - 1}) must be positive, got {A[i, i - 1]!r}")
    if not A[0, n - 1] < 0.0:
        problems.append(f"corner entry (0,{n - 1}) must be negative, got {A[0, n - 1]!r}")
    allowed = np.zeros((n, n), dtype=bool)
    allowed[np.arange(n), np.arange(n)] = True
    allowed[np.arange(1, n), np.arange(n - 1)] = True
    allowed[0, n - 1] = True
    stray = np.argwhere((A != 0.0) & ~allowed)
    for i, j in stray:
        problems.append(f"entry ({i},{j}) must be exactly zero, got {A[i, j]!r}")
    return problems


def secant_threshold(n: int) -> float:
    """The cyclic small-gain threshold sec(pi/n)^n."""
    return (1.0 / math.cos(math.pi / n)) ** n


def cyclic_secant_ratio(A: FloatArray) -> float:
    """Loop-gain ratio prod(A_{i,i-1}) * (-A_{1,n}) / prod(-A_{ii}) of a cyclic matrix.

    The matrix satisfies the secant stability certificate exactly when this
    ratio is below :func:`secant_threshold`.
    """
    A = np.asarray(A, dtype=np.float64)
    problems = check_cyclic_pattern(A)
    if problems:
        raise NotCyclicPattern("; ".join(problems))
    n = A.shape[0]
    num = float(np.prod(A[np.arange(1, n), np.arange(n - 1)])) * float(-A[0, n - 1])
    den = float(np.prod(-np.diag(A)))
    if den == 0.0:
        raise DegenerateProduct("product of -A_ii underflowed to zero")
    return num / den


def secant_bounds(A: FloatArray) -> SecantBounds:
    """Closed-form single-entry gain intervals preserving the secant certificate.

    For each structural entry of the cyclic matrix A the interval answers:
    by how much may a feedback term perturb *this one entry* (all others
    fixed) so that the perturbed matrix still satisfies the strict secant
    inequality.  The diagonal intervals are one-sided (any negative K_jj
    only helps; the upper limit keeps the diagonal negative and the ratio
    below threshold).  Subdiagonal and corner intervals are two-sided.

    Raises
    ------
    NotCyclicPattern
        If A does not have the strict cyclic sign pattern.
    DegenerateProduct
        If a denominator product underflows to zero.
    """
    A = np.asarray(A, dtype=np.float64)
    problems = check_cyclic_pattern(A)
    if problems:
        raise NotCyclicPattern("; ".join(problems))
    n = A.shape[0]
    sub = A[np.arange(1, n), np.arange(n - 1)]
    diag_neg = -np.diag(A)
    corner_mag = -A[0, n - 1]
    secn = secant_threshold(n)
    cosn = 1.0 / secn

    # K_jj < -A_jj - cos(pi/n)^n * prod(subdiag) * (-A_1n) / prod_{i != j}(-A_ii)
    diag_upper = np.empty(n, dtype=np.float64)
    loop_num = float(np.prod(sub)) * corner_mag
    for j in range(n):
        others = float(np.prod(np.delete(diag_neg, j)))
        if others == 0.0:
            raise DegenerateProduct(f"product of -A_ii excluding i={j} underflowed to zero")
        diag_upper[j] = diag_neg[j] - cosn * loop_num / others

    # -A_{j+1,j} < K_{j+1,j} < sec^n * prod(-A_ii) / (prod_{i != j} subdiag_i * (-A_1n)) - A_{j+1,j}
    den_all = float(np.prod(diag_neg))
    subdiag_lower = -sub.copy()
    subdiag_upper = np.empty(n - 1, dtype=np.float64)
    for j in range(n - 1):
        others = float(np.prod(np.delete(sub, j))) * corner_mag
        if others == 0.0:
            raise DegenerateProduct(f"subdiagonal product excluding index {j} underflowed to zero")
        subdiag_upper[j] = secn * den_all / others - sub[j]

    # -sec^n * prod(-A_ii) / prod(subdiag) - A_1n < K_1n < -A_1n
    sub_all = float(np.prod(sub))
    if sub_all == 0.0:
        raise DegenerateProduct("product of subdiagonal entries underflowed to zero")
    corner_upper = corner_mag
    corner_lower = -secn * den_all / sub_all - float(A[0, n - 1])

    return SecantBounds(
        n=n,
        diag_upper=diag_upper,
        subdiag_lower=subdiag_lower,
        subdiag_upper=subdiag_upper,
        corner_lower=float(corner_lower),
        corner_upper=float(corner_upper),
        threshold=secn,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def save_matrix_csv(path: str, M: FloatArray) -> None:
    """Write a dense matrix as comma-separated rows with round-tripping precision."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def load_matrix_csv(path: str) -> FloatArray:
    """Read a matrix written by :func:`save_matrix_csv`."""
    M = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    return np.ascontiguousarray(M)


def plant_to_dict(plant: PlantModel) -> dict:
    return {
        "schema": "plant/1",
        "n": plant.n,
        "m": plant.m,
        "A": plant.A.tolist(),
        "B": plant.B.tolist(),
        "Q": plant.Q.tolist(),
        "R": plant.R.tolist(),
    }


def save_plant_json(path: str, plant: PlantModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(plant_to_dict(plant), fh, indent=1)
        fh.write("\n")


def load_plant_json(path: str) -> PlantModel:
    """Load and re-validate a plant written by :func:`save_plant_json`."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema", "plant/1") != "plant/1":
        raise ValueError(f"unsupported plant schema: {data.get('schema')!r}")
    return validate_plant(
        np.asarray(data["A"], dtype=np.float64),
        np.asarray(data["B"], dtype=np.float64),
        np.asarray(data["Q"], dtype=np.float64),
        np.asarray(data["R"], dtype=np.float64),
    )


def spec_to_dict(spec: DecayingSpec | CyclicSpec) -> dict:
    if isinstance(spec, DecayingSpec):
        return {
            "schema": "genspec/1",
            "family": "decaying",
            "n": spec.n,
            "seed": spec.seed,
            "alphaA": spec.alphaA,
            "betaA": spec.betaA,
        }
    if isinstance(spec, CyclicSpec):
        return {"schema": "genspec/1", "family": "cyclic", "n": spec.n, "seed": spec.seed}
    raise TypeError(f"not a generator spec: {type(spec)!r}")


def save_spec_json(path: str, spec: DecayingSpec | CyclicSpec) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(spec_to_dict(spec), fh, indent=1)
        fh.write("\n")


def load_spec_json(path: str) -> DecayingSpec | CyclicSpec:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("schema", "genspec/1") != "genspec/1":
        raise ValueError(f"unsupported generator spec schema: {data.get('schema')!r}")
    family = data.get("family")
    if family == "decaying":
        return DecayingSpec(
            n=int(data["n"]),
            alphaA=float(data.get("alphaA", 5.0)),
            betaA=float(data.get("betaA", 0.8903)),
            seed=int(data.get("seed", 0)),
        )
    if family == "cyclic":
        return CyclicSpec(n=int(data["n"]), seed=int(data.get("seed", 0)))
    raise ValueError(f"unknown generator family: {family!r}")


def generate(spec: DecayingSpec | CyclicSpec) -> FloatArray:
    """Dispatch to the generator matching the spec type."""
    if isinstance(spec, DecayingSpec):
        return gen_decaying(spec)
    if isinstance(spec, CyclicSpec):
        return gen_cyclic(spec)
    raise TypeError(f"not a generator spec: {type(spec)!r}")


def spec_fields(spec: DecayingSpec | CyclicSpec) -> dict:
    return dataclasses.asdict(spec)
