"""Symmetric/SPD matrix primitives.

Sorted eigendecomposition, principal square root, the joint diagonalizer of an
ordered SPD pair, the matrix minimum, the positive-semidefinite partial order,
and a brute-force determinant-maximization oracle used by the test suite.

Conventions
-----------
* ``sym_eig_desc`` returns row-eigenvector matrices: ``A = U.T @ diag(lam) @ U``
  with ``lam`` sorted descending.
* The joint diagonalizer ``V`` of the ordered pair ``(S1, S2)`` satisfies
  ``V @ S1 @ V.T = diag(lam)`` and ``V @ S2 @ V.T = diag(lam_prime)`` with
  ``det V = +1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidParam,
    NonSymmetric,
    NotSpd,
)

#: Relative symmetry tolerance for inputs.
EPS_SYM = 1e-10
#: Relative positive-(semi)definiteness tolerance for inputs.
EPS_PSD = 1e-10


# ---- validation helpers -----------------------------------------------------

def as_square(A, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D square float array (copy)."""
    A = np.array(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")
    return A


def sym_part(A: np.ndarray) -> np.ndarray:
    """Symmetric part (A + A^T)/2."""
    return 0.5 * (A + A.T)


def check_symmetric(A, eps: float = EPS_SYM, name: str = "matrix") -> np.ndarray:
    """Validate symmetry within ``eps`` (relative) and return the symmetrized copy."""
    A = as_square(A, name)
    if A.size:
        scale = np.abs(A).max()
        if np.abs(A - A.T).max() > eps * max(scale, np.finfo(float).tiny):
            raise NonSymmetric(f"{name} is not symmetric within {eps:g} relative")
    return sym_part(A)


def check_spd(A, eps: float = EPS_PSD, name: str = "matrix") -> np.ndarray:
    """Validate symmetric positive definiteness; return the symmetrized copy.

    Positive definite means: smallest eigenvalue > ``eps`` times the largest.
    """
    A = check_symmetric(A, name=name)
    if A.size == 0:
        return A
    w = np.linalg.eigvalsh(A)
    if w[-1] <= 0 or w[0] <= eps * w[-1]:
        raise NotSpd(
            f"{name} is not SPD: eigenvalue range [{w[0]:.3e}, {w[-1]:.3e}]"
        )
    return A


def check_psd(A, eps: float = EPS_PSD, name: str = "matrix") -> np.ndarray:
    """Validate symmetric positive *semi*definiteness (relaxation of check_spd)."""
    A = check_symmetric(A, name=name)
    if A.size == 0:
        return A
    w = np.linalg.eigvalsh(A)
    if w[0] < -eps * max(w[-1], 0.0, np.finfo(float).tiny):
        raise NotSpd(
            f"{name} is not PSD: smallest eigenvalue {w[0]:.3e} of largest {w[-1]:.3e}"
        )
    return A


def spectral_norm_sym(A: np.ndarray) -> float:
    """Spectral norm of a symmetric matrix (largest |eigenvalue|)."""
    if A.size == 0:
        return 0.0
    w = np.linalg.eigvalsh(sym_part(A))
    return float(max(abs(w[0]), abs(w[-1])))


# ---- eigendecomposition and square roots ------------------------------------

def sym_eig_desc(A, eps: float = EPS_SYM) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix with descending eigenvalues.

    Parameters
    ----------
    A : array_like
        Symmetric matrix (validated within ``eps`` relative).

    Returns
    -------
    U : ndarray
        Row-orthonormal matrix whose *rows* are eigenvectors, so that
        ``A = U.T @ diag(lam) @ U``.  Each row's sign is fixed so that its
        largest-magnitude entry is positive, which makes the output
        deterministic across calls.
    lam : ndarray
        Eigenvalues sorted descending.
    """
    A = check_symmetric(A, eps=eps)
    w, Q = np.linalg.eigh(A)            # ascending, columns are eigenvectors
    U = Q.T[::-1].copy()                # descending, rows are eigenvectors
    lam = w[::-1].copy()
    # Deterministic sign: largest-|entry| of each row made positive.
    for i in range(U.shape[0]):
        j = int(np.argmax(np.abs(U[i])))
        if U[i, j] < 0:
            U[i] = -U[i]
    return U, lam


def principal_sqrt(A) -> np.ndarray:
    """Principal (SPD) square root of an SPD matrix."""
    A = check_spd(A)
    U, lam = sym_eig_desc(A)
    return sym_part(U.T @ (np.sqrt(lam)[:, None] * U))


def _inv_sqrt_from_eig(U: np.ndarray, lam: np.ndarray) -> np.ndarray:
    """A^{-1/2} from the (U, lam) output of sym_eig_desc."""
    return U.T @ (lam[:, None] ** -0.5 * U)


# ---- joint diagonalizer ------------------------------------------------------

@dataclass(frozen=True, eq=False)
class JointDiag:
    """Joint diagonalizer of an ordered SPD pair.

    Attributes
    ----------
    V : ndarray
        Invertible matrix with ``det V = +1`` diagonalizing both inputs.
    lam : ndarray
        Diagonal of ``V @ S1 @ V.T`` (descending eigenvalues of ``S1``).
    lam_prime : ndarray
        Diagonal of ``V @ S2 @ V.T`` (descending).
    V_inv : ndarray
        Inverse of ``V``, computed from the defining factors.
    """

    V: np.ndarray
    lam: np.ndarray
    lam_prime: np.ndarray
    V_inv: np.ndarray = field(repr=False)

    @property
    def gamma(self) -> np.ndarray:
        """Eigenvalues of S1^{-1/2} S2 S1^{-1/2} (= lam_prime / lam)."""
        return self.lam_prime / self.lam


def joint_diagonalize(S1, S2) -> JointDiag:
    """Joint diagonalizer ``V`` of the ordered SPD pair ``(S1, S2)``.

    Construction: with ``S1 = U1.T diag(lam) U1`` and
    ``S1^{-1/2} S2 S1^{-1/2} = W.T diag(gamma) W`` (both descending),
    ``V = diag(sqrt(lam)) @ W @ S1^{-1/2}``.  Then ``V S1 V.T = diag(lam)``,
    ``V S2 V.T = diag(lam * gamma)`` and ``|det V| = 1``; the sign of the last
    row of ``W`` is flipped if needed to force ``det V = +1``.
    """
    S1 = check_spd(S1, name="S1")
    S2 = check_spd(S2, name="S2")
    if S1.shape != S2.shape:
        raise DimensionMismatch(f"shape mismatch: {S1.shape} vs {S2.shape}")

    U1, lam = sym_eig_desc(S1)
    S1_isqrt = _inv_sqrt_from_eig(U1, lam)
    M = sym_part(S1_isqrt @ S2 @ S1_isqrt)
    W, gamma = sym_eig_desc(M)

    sqrt_lam = np.sqrt(lam)
    V = sqrt_lam[:, None] * (W @ S1_isqrt)
    if np.linalg.det(V) < 0:
        W = W.copy()
        W[-1] = -W[-1]
        V = sqrt_lam[:, None] * (W @ S1_isqrt)

    # V^{-1} = S1^{1/2} W^T diag(lam^{-1/2}), assembled from the same factors.
    S1_sqrt = U1.T @ (sqrt_lam[:, None] * U1)
    V_inv = (S1_sqrt @ W.T) / sqrt_lam[None, :]

    lam_prime = lam * gamma
    return JointDiag(V=V, lam=lam, lam_prime=lam_prime, V_inv=V_inv)


def matrix_min(S1, S2) -> np.ndarray:
    """Matrix minimum of an SPD pair: ``V^{-1} diag(min(lam, lam')) V^{-T}``.

    The result is dominated by both arguments in the PSD order and maximizes
    the determinant among all such PSD matrices.
    """
    jd = joint_diagonalize(S1, S2)
    m = np.minimum(jd.lam, jd.lam_prime)
    return sym_part(jd.V_inv @ (m[:, None] * jd.V_inv.T))


# ---- PSD partial order -------------------------------------------------------

def psd_leq(A, B, tol: float = 1e-9) -> bool:
    """True iff ``A`` is dominated by ``B`` in the PSD order, within ``tol``.

    Test: smallest eigenvalue of ``B - A`` >= ``-tol *`` spectral norm of ``B``.
    """
    A = check_symmetric(A, name="A")
    B = check_symmetric(B, name="B")
    if A.shape != B.shape:
        raise DimensionMismatch(f"shape mismatch: {A.shape} vs {B.shape}")
    if A.size == 0:
        return True
    smallest = np.linalg.eigvalsh(B - A)[0]
    return bool(smallest >= -tol * max(spectral_norm_sym(B), np.finfo(float).tiny))


# ---- brute-force determinant oracle ------------------------------------------

def constrained_det_oracle(
    S1,
    S2,
    trials: int,
    seed: int,
    include_candidate: bool = True,
    batch: int = 32768,
) -> float:
    """Best determinant found over PSD matrices dominated by both S1 and S2.

    Randomized feasible search: draws random full-rank PSD directions
    ``P = G^T G`` and scales each to the feasibility boundary (largest ``t``
    with ``t P`` dominated by both inputs), recording ``det(t P)``.  The
    candidate ``matrix_min(S1, S2)`` itself is included unless
    ``include_candidate`` is False (the pure-random coverage is then exposed).

    Intended for desk-scale verification only, hence the ``n <= 4`` limit.
    """
    S1 = check_spd(S1, name="S1")
    S2 = check_spd(S2, name="S2")
    if S1.shape != S2.shape:
        raise DimensionMismatch(f"shape mismatch: {S1.shape} vs {S2.shape}")
    n = S1.shape[0]
    if n > 4:
        raise InvalidParam(f"oracle supports n <= 4, got n = {n}")
    if trials < 1:
        raise InvalidParam("trials must be >= 1")

    U1, lam1 = sym_eig_desc(S1)
    U2, lam2 = sym_eig_desc(S2)
    S1_isqrt = _inv_sqrt_from_eig(U1, lam1)
    S2_isqrt = _inv_sqrt_from_eig(U2, lam2)

    rng = np.random.default_rng(seed)
    best = -np.inf
    done = 0
    while done < trials:
        m = min(batch, trials - done)
        G = rng.standard_normal((m, n, n))
        P = np.matmul(G.transpose(0, 2, 1), G)
        # Boundary scale along the ray t*P: max eigenvalue of the congruence
        # against each constraint must equal one.
        e1 = np.linalg.eigvalsh(S1_isqrt @ P @ S1_isqrt)[:, -1]
        e2 = np.linalg.eigvalsh(S2_isqrt @ P @ S2_isqrt)[:, -1]
        t = 1.0 / np.maximum(e1, e2)
        sign, logdet = np.linalg.slogdet(P)
        d = np.where(sign > 0, t**n * np.exp(logdet), 0.0)
        best = max(best, float(d.max()))
        done += m

    if include_candidate:
        best = max(best, float(np.linalg.det(matrix_min(S1, S2))))
    return best
