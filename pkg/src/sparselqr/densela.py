"""Dense control-theoretic kernels: Lyapunov, Riccati, gain evaluation, norms.

Everything here is small and dense (n <= 64), so the solvers delegate to
LAPACK-backed routines: Bartels-Stewart for the Lyapunov equation and the
Hamiltonian pencil method for the Riccati equation, each wrapped with an
explicit residual check so a silently inaccurate solve cannot leak into the
benchmark numbers.  A Kleinman-Newton refinement pass backs up the Riccati
solver when the residual check fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .model import PlantModel

FloatArray = np.ndarray

#: A gain counts as stabilizing when the closed-loop spectral abscissa is
#: strictly below this margin, so eigenvalues within rounding distance of
#: the imaginary axis are rejected.
HURWITZ_MARGIN = -1e-9

#: Relative residual allowed for the Riccati solution.
_CARE_RTOL = 1e-6

#: Relative residual allowed for a Lyapunov solve before it is declared
#: too ill-conditioned to trust.
_LYAP_RTOL = 1e-8


class NotHurwitz(ValueError):
    """Closed-loop matrix has an eigenvalue at or right of the stability margin."""


class IllConditioned(ArithmeticError):
    """A dense solve produced a residual too large to trust."""


class CareSolveFailed(ArithmeticError):
    """The algebraic Riccati equation could not be solved to tolerance."""


@dataclass(frozen=True)
class GainEvaluation:
    """Outcome of evaluating a fixed feedback gain on a plant.

    ``cost`` is the closed-loop quadratic cost Tr(X); it is finite exactly
    when ``stable`` is true and ``math.inf`` otherwise.  ``lyap_residual``
    is the Frobenius residual of the Lyapunov solve behind the cost (NaN
    when no solve happened).  ``cardinality`` counts entries of K with
    magnitude strictly above the threshold used for the evaluation.
    """

    stable: bool
    spectral_abscissa: float
    cost: float
    cardinality: int
    lyap_residual: float


def spectral_abscissa(M: FloatArray) -> float:
    """Largest real part over the spectrum of M."""
    return float(np.max(np.linalg.eigvals(M).real))


def solve_lyapunov(Acl: FloatArray, M: FloatArray) -> FloatArray:
    """Solve Acl' X + X Acl + M = 0 for symmetric X, with a residual check.

    Parameters
    ----------
    Acl : (n, n) array
        Closed-loop matrix; must be Hurwitz with margin below -1e-9.
    M : (n, n) array
        Symmetric right-hand side.

    Raises
    ------
    NotHurwitz
        If the spectral abscissa of Acl is at or above the margin.
    IllConditioned
        If the computed solution has relative residual above 1e-8.
    """
    Acl = np.asarray(Acl, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if Acl.ndim != 2 or Acl.shape[0] != Acl.shape[1]:
        raise ValueError(f"Acl must be square, got {Acl.shape}")
    if M.shape != Acl.shape:
        raise ValueError(f"M must match Acl, got {M.shape} vs {Acl.shape}")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-10 * (1.0 + float(np.max(np.abs(M), initial=0.0)))):
        raise ValueError("M must be symmetric")
    rho = spectral_abscissa(Acl)
    if rho >= HURWITZ_MARGIN:
        raise NotHurwitz(f"spectral abscissa {rho:.6e} is not below {HURWITZ_MARGIN:.0e}")

    # scipy solves a X + X a' + q = 0; transpose to match Acl' X + X Acl + M = 0.
    X = scipy.linalg.solve_continuous_lyapunov(Acl.T, -M)
    X = 0.5 * (X + X.T)
    residual = float(np.linalg.norm(Acl.T @ X + X @ Acl + M, "fro"))
    if residual > _LYAP_RTOL * (1.0 + float(np.linalg.norm(X, "fro"))):
        raise IllConditioned(f"Lyapunov residual {residual:.3e} exceeds tolerance")
    return X


def _care_residual(A: FloatArray, B: FloatArray, Q: FloatArray, Rinv_Bt: FloatArray, X: FloatArray) -> float:
    return float(np.linalg.norm(A.T @ X + X @ A - X @ B @ (Rinv_Bt @ X) + Q, "fro"))


def _kleinman_refine(plant: PlantModel, K: FloatArray, max_steps: int = 30) -> FloatArray:
    """Kleinman-Newton iteration from a stabilizing gain; returns the CARE solution."""
    A, B, Q, R = plant.A, plant.B, plant.Q, plant.R
    X = np.zeros((plant.n, plant.n))
    for _ in range(max_steps):
        Acl = A + B @ K
        if spectral_abscissa(Acl) >= HURWITZ_MARGIN:
            raise CareSolveFailed("refinement lost stabilizing iterate")
        X = solve_lyapunov(Acl, Q + K.T @ R @ K)
        K_next = -scipy.linalg.cho_solve(scipy.linalg.cho_factor(R), B.T @ X)
        if np.linalg.norm(K_next - K, "fro") <= 1e-12 * (1.0 + np.linalg.norm(K, "fro")):
            return X
        K = K_next
    return X


def lqr_gain(plant: PlantModel) -> tuple[FloatArray, FloatArray, float]:
    """Solve the continuous-time LQR problem for `plant`.

    Returns
    -------
    (K0, X0, J_lqr)
        The optimal dense gain K0 = -R^{-1} B' X0, the stabilizing Riccati
        solution X0, and the optimal cost Tr(X0).

    Raises
    ------
    CareSolveFailed
        If no stabilizing solution meeting the residual tolerance
        1e-6 * (1 + ||X0||_F) can be produced.
    """
    A, B, Q, R = plant.A, plant.B, plant.Q, plant.R
    cho_R = scipy.linalg.cho_factor(R)
    Rinv_Bt = scipy.linalg.cho_solve(cho_R, B.T)

    try:
        X0 = scipy.linalg.solve_continuous_are(A, B, Q, R)
    except Exception as exc:
        raise CareSolveFailed(f"Riccati pencil solve failed: {exc}") from exc
    X0 = 0.5 * (X0 + X0.T)
    tol = _CARE_RTOL * (1.0 + float(np.linalg.norm(X0, "fro")))
    if _care_residual(A, B, Q, Rinv_Bt, X0) > tol:
        # One Newton pass usually repairs a marginal pencil solve.
        K_seed = -(Rinv_Bt @ X0)
        X0 = _kleinman_refine(plant, K_seed)
        X0 = 0.5 * (X0 + X0.T)
        if _care_residual(A, B, Q, Rinv_Bt, X0) > tol:
            raise CareSolveFailed("Riccati residual above tolerance after refinement")

    K0 = -(Rinv_Bt @ X0)
    if spectral_abscissa(A + B @ K0) >= HURWITZ_MARGIN:
        raise CareSolveFailed("computed LQR gain is not stabilizing")
    return K0, X0, float(np.trace(X0))


def evaluate_gain(plant: PlantModel, K: FloatArray, tau: float = 5e-5) -> GainEvaluation:
    """Evaluate a fixed gain: stability, closed-loop cost, and cardinality.

    The cost is Tr(X) with Acl' X + X Acl + Q + K' R K = 0 when Acl is
    Hurwitz, and infinity otherwise.  Cardinality counts the entries with
    ``|K_ij| > tau``.
    """
    K = np.asarray(K, dtype=np.float64)
    if K.shape != (plant.m, plant.n):
        raise ValueError(f"K must be {plant.m} x {plant.n}, got {K.shape}")
    if not (tau >= 0.0 and math.isfinite(tau)):
        raise ValueError(f"tau must be finite and nonnegative, got {tau}")
    Acl = plant.A + plant.B @ K
    rho = spectral_abscissa(Acl)
    card = int(np.count_nonzero(np.abs(K) > tau))
    if rho >= HURWITZ_MARGIN:
        return GainEvaluation(
            stable=False,
            spectral_abscissa=rho,
            cost=math.inf,
            cardinality=card,
            lyap_residual=math.nan,
        )
    M = plant.Q + K.T @ plant.R @ K
    M = 0.5 * (M + M.T)
    X = solve_lyapunov(Acl, M)
    residual = float(np.linalg.norm(Acl.T @ X + X @ Acl + M, "fro"))
    return GainEvaluation(
        stable=True,
        spectral_abscissa=rho,
        cost=float(np.trace(X)),
        cardinality=card,
        lyap_residual=residual,
    )


def norms(U: FloatArray) -> dict[str, float]:
    """Operator (largest singular value), nuclear, and Frobenius norms of U.

    All three come from one singular value decomposition so they are
    mutually consistent: operator = max sigma, nuclear = sum sigma,
    frobenius = sqrt(sum sigma^2).
    """
    U = np.atleast_2d(np.asarray(U, dtype=np.float64))
    sigma = np.linalg.svd(U, compute_uv=False)
    if sigma.size == 0:
        return {"operator": 0.0, "nuclear": 0.0, "frobenius": 0.0}
    return {
        "operator": float(sigma[0]),
        "nuclear": float(np.sum(sigma)),
        "frobenius": float(np.sqrt(np.sum(sigma * sigma))),
    }
