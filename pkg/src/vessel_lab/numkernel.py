"""Dense complex linear algebra used by every other module.

All functions are pure: they never modify their inputs and hold no state.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import Overflow, SingularMatrix, SylvesterSingular

#: relative pivot threshold below which a matrix is treated as singular
PIVOT_TOL = 1e-14
#: reciprocal condition number below which the Kronecker system is rejected
SYLVESTER_RCOND = 1e-13


def as_cmatrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a 2-D complex128 array, rejecting non-finite entries."""
    arr = np.array(M, dtype=np.complex128, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def _max_abs(M: np.ndarray) -> float:
    return float(np.max(np.abs(M))) if M.size else 0.0


def _square(M: np.ndarray, name: str) -> None:
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")


def _quiet_lu(M):
    # singular factors are reported through our own checks, not LinAlgWarning
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        return sla.lu_factor(M, check_finite=False)


def lu_factor(M):
    """Partial-pivot LU of a square matrix, with the singularity check applied.

    Returns the scipy ``(lu, piv)`` pair so that repeated solves can share it.
    """
    M = as_cmatrix(M, "M")
    _square(M, "M")
    scale = _max_abs(M)
    if scale == 0.0:
        raise SingularMatrix("matrix is identically zero")
    lu, piv = _quiet_lu(M)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) <= PIVOT_TOL * scale:
        raise SingularMatrix(
            f"pivot {np.min(pivots):.3e} below {PIVOT_TOL:g} x max|M| = {scale:.3e}"
        )
    return lu, piv


def lu_solve(M, rhs) -> np.ndarray:
    """Solve ``M X = rhs`` by pivoted LU.

    ``rhs`` may be a vector or a matrix; the result has the same shape.
    """
    rhs_arr = np.asarray(rhs, dtype=np.complex128)
    factors = lu_factor(M)
    return sla.lu_solve(factors, rhs_arr, check_finite=False)


def det_lu(M) -> complex:
    """Determinant from the LU diagonal and the pivot permutation parity.

    A singular matrix yields 0 instead of an error.
    """
    M = as_cmatrix(M, "M")
    _square(M, "M")
    if M.shape[0] == 0:
        return 1.0 + 0.0j
    lu, piv = _quiet_lu(M)
    swaps = int(np.count_nonzero(piv != np.arange(piv.size)))
    d = complex(np.prod(np.diag(lu)))
    return -d if swaps % 2 else d


# Pade coefficients for the [13/13] approximant and the theta thresholds
# of the standard scaling-and-squaring algorithm.
_B13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1, 7: 9.504178996162932e-1,
          9: 2.097847961257068e0, 13: 5.371920351148152e0}
_PADE_LOW = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
}


def _pade_low(M, m):
    b = _PADE_LOW[m]
    n = M.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    M2 = M @ M
    powers = [ident, M2]
    for _ in range(2, m // 2 + 1):
        powers.append(powers[-1] @ M2)
    U = sum(b[2 * j + 1] * powers[j] for j in range(m // 2 + 1))
    V = sum(b[2 * j] * powers[j] for j in range(m // 2 + 1))
    return M @ U, V


def _pade13(M):
    b = _B13
    n = M.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M4 @ M2
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2) + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident
    return U, V


def expm(M) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The degree is chosen from the 1-norm using the usual backward-error thresholds.  Raises
    :class:`Overflow` when the result is not representable.
    """
    M = as_cmatrix(M, "M")
    _square(M, "M")
    n = M.shape[0]
    if n == 0:
        return M.copy()
    norm1 = float(np.max(np.sum(np.abs(M), axis=0)))
    if norm1 == 0.0:
        return np.eye(n, dtype=np.complex128)
    s = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            U, V = _pade_low(M, m)
            break
    else:
        s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
        U, V = _pade13(M / (2.0 ** s))
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            R = sla.solve(V - U, V + U, check_finite=False)
        except (sla.LinAlgError, ValueError) as exc:
            raise Overflow(f"Pade denominator could not be solved: {exc}") from exc
        for _ in range(s):
            R = R @ R
    if not np.all(np.isfinite(R)):
        raise Overflow("matrix exponential overflowed double precision")
    return R


def sylvester(A, B, Q) -> np.ndarray:
    """Solve ``A X + X B = Q`` through the vectorized Kronecker system.

    The (nm)x(nm) system ``(I kron A + B^T kron I) vec(X) = vec(Q)`` is factored
    once; its reciprocal condition estimate decides whether the spectra of
    ``A`` and ``-B`` are too close, in which case :class:`SylvesterSingular`
    tells the caller to fall back to path integration.
    """
    A = as_cmatrix(A, "A")
    B = as_cmatrix(B, "B")
    Q = as_cmatrix(Q, "Q")
    _square(A, "A")
    _square(B, "B")
    n, m = A.shape[0], B.shape[0]
    if Q.shape != (n, m):
        raise ValueError(f"Q must have shape {(n, m)}, got {Q.shape}")
    K = np.kron(np.eye(m), A) + np.kron(B.T, np.eye(n))
    anorm = float(np.max(np.sum(np.abs(K), axis=0)))
    if anorm == 0.0:
        raise SylvesterSingular("Kronecker operator is zero")
    lu, piv, info = lapack.zgetrf(K)
    if info > 0:
        raise SylvesterSingular("Kronecker operator has an exact zero pivot")
    rcond, _ = lapack.zgecon(lu, anorm, norm="1")
    if rcond < SYLVESTER_RCOND:
        raise SylvesterSingular(f"Kronecker system reciprocal condition {rcond:.3e}")
    vec = sla.lu_solve((lu, piv), Q.reshape(-1, order="F"), check_finite=False)
    return vec.reshape((n, m), order="F")


def min_sv(M) -> float:
    """Smallest singular value (exact, via SVD)."""
    M = as_cmatrix(M, "M")
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[-1])
