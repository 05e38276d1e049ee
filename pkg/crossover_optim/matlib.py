"""Dense small-matrix helpers used by the information-matrix formulas.

Generalized inverses are Moore-Penrose throughout. Orthogonal projectors are
built from an SVD basis of the column space rather than from X'X, which keeps
the rank decision on the singular values of X itself.
"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from .errors import InvalidInputError, NotPositiveDefiniteError, NumericalError

Matrix = NDArray[np.float64]


@dataclass(frozen=True)
class Tolerance:
    """Relative tolerances: `rank_tol` for singular-value cutoffs, `eq_tol` for comparisons."""

    rank_tol: float = 1e-10
    eq_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "eq_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InvalidInputError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(M, name="matrix") -> Matrix:
    """Coerce to a finite 2-D float array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return arr


def identity(n: int) -> Matrix:
    if n < 1:
        raise InvalidInputError(f"identity size must be >= 1, got {n}")
    return np.eye(n)


def ones(n: int) -> Matrix:
    """Column vector 1_n."""
    if n < 1:
        raise InvalidInputError(f"ones length must be >= 1, got {n}")
    return np.ones((n, 1))


def centering(n: int) -> Matrix:
    """H_n = I_n - J_n / n."""
    if n < 1:
        raise InvalidInputError(f"centering size must be >= 1, got {n}")
    return np.eye(n) - np.full((n, n), 1.0 / n)


def kron(A, B) -> Matrix:
    return np.kron(as_matrix(A, "A"), as_matrix(B, "B"))


def symmetrize(M: Matrix) -> Matrix:
    return 0.5 * (M + M.T)


def pinv(M, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Moore-Penrose pseudo-inverse; singular values below rank_tol * max are dropped."""
    M = as_matrix(M)
    try:
        return linalg.pinv(M, atol=0.0, rtol=tol.rank_tol)
    except linalg.LinAlgError as e:
        raise NumericalError(f"pseudo-inverse failed: {e}") from e


def column_basis(X, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Orthonormal basis of col(X)."""
    X = as_matrix(X, "X")
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], 0))
    try:
        U, s, _ = linalg.svd(X, full_matrices=False)
    except linalg.LinAlgError as e:
        raise NumericalError(f"SVD did not converge: {e}") from e
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((X.shape[0], 0))
    rank = int(np.sum(s > tol.rank_tol * s[0]))
    return U[:, :rank]


def rank(X, tol: Tolerance = DEFAULT_TOL) -> int:
    return column_basis(X, tol).shape[1]


def proj_perp(X, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """pr_perp(X) = I - X (X'X)^- X', the projector onto col(X)'s orthogonal complement."""
    X = as_matrix(X, "X")
    if X.shape[0] < 1:
        raise InvalidInputError("proj_perp needs at least one row")
    Q = column_basis(X, tol)
    return symmetrize(np.eye(X.shape[0]) - Q @ Q.T)


def _check_square_symmetric(M: Matrix, name: str, tol: Tolerance):
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {M.shape}")
    scale = max(float(np.max(np.abs(M))), 1.0)
    if np.max(np.abs(M - M.T)) > tol.eq_tol * scale:
        raise InvalidInputError(f"{name} is not symmetric")


def check_positive_definite(M, name="matrix", tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Return M (as float array) or raise NotPositiveDefiniteError."""
    M = as_matrix(M, name)
    _check_square_symmetric(M, name, tol)
    w = linalg.eigh(symmetrize(M), eigvals_only=True)
    if w[-1] <= 0.0 or w[0] <= tol.rank_tol * w[-1]:
        raise NotPositiveDefiniteError(f"{name} is not positive definite", float(w[0]))
    return M


def sym_inv_sqrt(M, tol: Tolerance = DEFAULT_TOL) -> Matrix:
    """Symmetric inverse square root M^{-1/2} via eigendecomposition."""
    M = as_matrix(M)
    _check_square_symmetric(M, "matrix", tol)
    w, U = linalg.eigh(symmetrize(M))
    if w[-1] <= 0.0 or w[0] <= tol.rank_tol * w[-1]:
        raise NotPositiveDefiniteError("matrix is not positive definite", float(w[0]))
    return symmetrize((U / np.sqrt(w)) @ U.T)


def loewner_leq(A, B, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff B - A is positive semidefinite up to eq_tol times the spectral norm."""
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape:
        raise InvalidInputError(f"dimension mismatch: {A.shape} vs {B.shape}")
    norm = max(np.linalg.norm(A, 2), np.linalg.norm(B, 2))
    if norm == 0.0:
        return True
    w = linalg.eigh(symmetrize(B - A), eigvals_only=True)
    return bool(w[0] >= -tol.eq_tol * norm)


def is_completely_symmetric(M, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff M = aI + bJ: equal diagonal entries and equal off-diagonal entries."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"matrix must be square, got shape {M.shape}")
    n = M.shape[0]
    if n == 1:
        return True
    scale = float(np.max(np.abs(M)))
    if scale == 0.0:
        return True
    diag = np.diag(M)
    off = M[~np.eye(n, dtype=bool)]
    slack = tol.eq_tol * scale
    return bool(np.ptp(diag) <= slack and np.ptp(off) <= slack)


def max_rel_diff(A, B) -> float:
    """max |A - B| relative to the larger max-abs entry (absolute if both are zero)."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    scale = max(float(np.max(np.abs(A))), float(np.max(np.abs(B))))
    diff = float(np.max(np.abs(A - B)))
    return diff / scale if scale > 0.0 else diff
