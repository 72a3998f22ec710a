"""Shared test assets: a frozen reference instance and independent oracles.

The oracles deliberately avoid the production code paths: everything is
built from ``numpy.linalg.solve`` (or explicit loops) so that agreement
between an oracle and a production kernel actually certifies the kernel
rather than testing a function against itself.
"""

from __future__ import annotations

import math

import numpy as np

from sparselqr import CyclicSpec, DecayingSpec, PlantModel, generate, identity_plant

# ---------------------------------------------------------------------------
# Frozen 6x6 reference instance.
#
# A bundled unstable sub-exponentially decaying system, published to four
# decimals, together with the values the toolkit must reproduce on it.
# ---------------------------------------------------------------------------

BENCH6_A = np.array(
    [
        [0.5377, 0.0036, 0.0004, 0.0001, 0.0000, 0.0000],
        [0.0124, 1.8339, 0.0124, 0.0015, 0.0003, 0.0001],
        [-0.0018, -0.0152, -2.2588, -0.0152, -0.0018, -0.0004],
        [0.0001, 0.0007, 0.0058, 0.8622, 0.0058, 0.0007],
        [0.0000, 0.0001, 0.0003, 0.0021, 0.3188, 0.0021],
        [-0.0000, -0.0001, -0.0002, -0.0011, -0.0088, -1.3077],
    ]
)

#: Open-loop eigenvalues of BENCH6_A, four-decimal reference values.
BENCH6_EIGS = np.array([-2.2588, 1.8339, -1.3077, 0.5376, 0.8622, 0.3187])

#: Dense LQR optimum and sparse-synthesis optimum on BENCH6 (B = Q = R = I).
BENCH6_J_LQR = 9.6965
BENCH6_J_OPT = 9.6968

#: Nonzero support of the reference sparse gain (row, col), zero-based.
BENCH6_SUPPORT = frozenset(
    [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2), (3, 3), (3, 4), (4, 3), (4, 4), (5, 5)]
)

#: Closed-loop eigenvalues of the reference sparse gain, four decimals.
BENCH6_CL_EIGS = np.array([-2.4575, -2.0789, -1.1298, -1.0444, -1.3139, -1.6380])


def bench6_plant() -> PlantModel:
    return identity_plant(BENCH6_A)


# ---------------------------------------------------------------------------
# Lyapunov oracle: Kronecker vectorization.
# ---------------------------------------------------------------------------

def lyap_kron(Acl: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Solve Acl' X + X Acl + M = 0 by brute-force vectorization.

    vec(Acl' X) = (I kron Acl') vec(X) and vec(X Acl) = (Acl' kron I) vec(X)
    with column-major vec, so the equation is one dense n^2 x n^2 solve.
    """
    n = Acl.shape[0]
    eye = np.eye(n)
    lhs = np.kron(eye, Acl.T) + np.kron(Acl.T, eye)
    x = np.linalg.solve(lhs, -M.flatten(order="F"))
    X = x.reshape((n, n), order="F")
    return 0.5 * (X + X.T)


# ---------------------------------------------------------------------------
# Riccati oracle: stabilizing start by eigenvalue shifting, then Newton.
# ---------------------------------------------------------------------------

def _bass_stabilizing_gain(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A stabilizing gain from one shifted Lyapunov solve (Bass's method).

    With beta above the spectral radius of A, the matrix -(A + beta I)' is
    Hurwitz, so W solving (A + beta I) W + W (A + beta I)' = 2 B B' is
    symmetric positive definite and K = -B' W^{-1} places A + BK in the
    open left half plane.
    """
    n = A.shape[0]
    beta = 1.0 + float(np.linalg.norm(A, "fro"))
    F = -(A + beta * np.eye(n)).T
    W = lyap_kron(F, 2.0 * (B @ B.T))
    return -np.linalg.solve(W, B).T


def care_newton(
    A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray,
    steps: int = 60, rtol: float = 1e-13,
) -> np.ndarray:
    """Stabilizing Riccati solution by Newton iteration on the gain.

    Each step solves one Lyapunov equation through :func:`lyap_kron`; the
    iteration is monotone from any stabilizing start, so it converges to
    the unique stabilizing solution.
    """
    K = _bass_stabilizing_gain(A, B)
    X_prev: np.ndarray | None = None
    X = None
    for _ in range(steps):
        Acl = A + B @ K
        X = lyap_kron(Acl, Q + K.T @ R @ K)
        K = -np.linalg.solve(R, B.T @ X)
        if X_prev is not None and (
            np.linalg.norm(X - X_prev, "fro") <= rtol * (1.0 + np.linalg.norm(X, "fro"))
        ):
            break
        X_prev = X
    assert X is not None
    return X


def care_residual(A, B, Q, R, X) -> float:
    """Frobenius norm of A'X + XA - X B R^{-1} B' X + Q."""
    res = A.T @ X + X @ A - X @ B @ np.linalg.solve(R, B.T @ X) + Q
    return float(np.linalg.norm(res, "fro"))


# ---------------------------------------------------------------------------
# Singular value oracle: one-sided Jacobi.
# ---------------------------------------------------------------------------

def jacobi_singular_values(U: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Singular values by one-sided Jacobi rotations, descending order.

    Columns are rotated pairwise until mutually orthogonal; the singular
    values are then the column norms.  No numpy.linalg factorizations are
    involved.
    """
    A = np.array(U, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError("need a matrix")
    if A.shape[0] < A.shape[1]:
        A = A.T
    n = A.shape[1]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = float(A[:, p] @ A[:, p])
                beta = float(A[:, q] @ A[:, q])
                gamma = float(A[:, p] @ A[:, q])
                scale = math.sqrt(alpha * beta)
                if scale == 0.0 or abs(gamma) <= 1e-16 * scale:
                    continue
                off = max(off, abs(gamma) / scale)
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                col_p = A[:, p].copy()
                A[:, p] = c * col_p - s * A[:, q]
                A[:, q] = s * col_p + c * A[:, q]
        if off < 1e-15:
            break
    svals = np.sqrt(np.sum(A * A, axis=0))
    return np.sort(svals)[::-1]


# ---------------------------------------------------------------------------
# Instance helpers.
# ---------------------------------------------------------------------------

def random_hurwitz(rng: np.random.Generator, n: int) -> np.ndarray:
    """A random matrix shifted until every eigenvalue is safely left of 0."""
    G = rng.standard_normal((n, n))
    shift = float(np.max(np.linalg.eigvals(G).real)) + 0.5 + rng.uniform(0.0, 1.0)
    return G - shift * np.eye(n)


def random_spd(rng: np.random.Generator, n: int, floor: float = 0.1) -> np.ndarray:
    G = rng.standard_normal((n, n))
    return G @ G.T + floor * np.eye(n)


def seeded_plants(pairs: list[tuple[str, int, int]]) -> list[PlantModel]:
    """Plants from (family, n, seed) triples with B = Q = R = I."""
    plants = []
    for family, n, seed in pairs:
        if family == "decaying":
            A = generate(DecayingSpec(n=n, seed=seed))
        elif family == "cyclic":
            A = generate(CyclicSpec(n=n, seed=seed))
        else:
            raise ValueError(family)
        plants.append(identity_plant(A))
    return plants
