"""Dense complex linear algebra primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; real
input is promoted. All routines are pure and never modify their arguments.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionError, RankDeficient

Seed = Union[int, Sequence[int]]


@dataclass(frozen=True)
class Tolerance:
    """Relative thresholds used for rank decisions and range membership.

    ``rank_tol`` is compared against singular values divided by the largest
    one; ``residual_tol`` against a residual norm divided by the norm of the
    right-hand side.
    """

    rank_tol: float = 1e-10
    residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_tol", "residual_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")


DEFAULT_TOL = Tolerance()


def as_matrix(M, name: str = "matrix") -> np.ndarray:
    """Return ``M`` as a finite 2-D complex array (a copy when promoted)."""
    arr = np.asarray(M, dtype=complex)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionError(f"{name} must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=complex)
    if arr.ndim == 2 and 1 in arr.shape:
        arr = arr.reshape(-1)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def numerical_rank(M, tol: Tolerance = DEFAULT_TOL) -> int:
    """Count singular values above ``tol.rank_tol`` times the largest one."""
    M = as_matrix(M)
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol.rank_tol * s[0]))


def rref_with_pivots(M, tol: Tolerance = DEFAULT_TOL) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form with partial pivoting.

    A candidate pivot is accepted when its magnitude exceeds
    ``tol.rank_tol`` times the largest entry of ``M``. Rows below the rank
    are returned as exact zeros.

    Returns
    -------
    R : ndarray
        Same shape as ``M``.
    pivots : list of int
        Pivot columns in increasing order.
    """
    R = as_matrix(M).copy()
    rows, cols = R.shape
    scale = np.abs(R).max()
    pivots: list[int] = []
    if scale == 0.0:
        return R, pivots
    thresh = tol.rank_tol * scale
    r = 0
    for c in range(cols):
        if r == rows:
            break
        k = r + int(np.argmax(np.abs(R[r:, c])))
        if abs(R[k, c]) <= thresh:
            continue
        if k != r:
            R[[r, k]] = R[[k, r]]
        R[r] = R[r] / R[r, c]
        for i in range(rows):
            if i != r and R[i, c] != 0:
                R[i] -= R[i, c] * R[r]
        # the pivot column is exact by construction
        R[:, c] = 0
        R[r, c] = 1
        pivots.append(c)
        r += 1
    R[r:] = 0
    return R, pivots


def cokernel_from_rref(B, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Un-normalized cokernel basis read off ``rref(B^H)``.

    For ``rref(B^H) = [I | S^H]`` the rows of the result are ``[S, -I]``,
    i.e. the conjugate transpose of ``[[S^H], [-I]]``. For other pivot
    patterns the same read-off is done on the free columns.
    """
    B = as_matrix(B, "B")
    m, n = B.shape
    R, pivots = rref_with_pivots(B.conj().T, tol)
    if len(pivots) < n:
        raise RankDeficient(f"B has numerical rank {len(pivots)} < {n} columns")
    free = [c for c in range(m) if c not in set(pivots)]
    Qh = np.zeros((m, len(free)), dtype=complex)
    for j, f in enumerate(free):
        Qh[pivots, j] = R[: len(pivots), f]
        Qh[f, j] = -1.0
    return Qh.conj().T


def cokernel_basis(B, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal rows spanning the orthogonal complement of range(B).

    Returns ``Q`` of shape ``(m - n, m)`` with ``Q @ B = 0``. The rref
    construction of :func:`cokernel_from_rref` is orthonormalized with a QR
    factorization.
    """
    B = as_matrix(B, "B")
    m, n = B.shape
    if numerical_rank(B, tol) < n:
        raise RankDeficient("B is not of full column rank")
    raw = cokernel_from_rref(B, tol)
    if raw.shape[0] == 0:
        return raw
    q, _ = np.linalg.qr(raw.conj().T)
    return q.conj().T


def least_squares_solve(B, y) -> tuple[np.ndarray, float]:
    """Minimum-norm least-squares solution of ``B z = y`` and its residual."""
    B = as_matrix(B, "B")
    y = as_vector(y, "y")
    if y.shape[0] != B.shape[0]:
        raise DimensionError(f"y has length {y.shape[0]}, expected {B.shape[0]}")
    z = np.linalg.lstsq(B, y, rcond=None)[0]
    return z, float(np.linalg.norm(B @ z - y))


def least_squares_many(B, Y) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise :func:`least_squares_solve` for a block of right-hand sides."""
    B = as_matrix(B, "B")
    Y = np.asarray(Y, dtype=complex)
    Z = np.linalg.lstsq(B, Y, rcond=None)[0]
    return Z, np.linalg.norm(B @ Z - Y, axis=0)


def subspace_intersection_dim(U, V, tol: Tolerance = DEFAULT_TOL) -> int:
    """dim(range(U) & range(V)) via rank(U) + rank(V) - rank([U | V])."""
    U = as_matrix(U, "U")
    V = as_matrix(V, "V")
    if U.shape[0] != V.shape[0]:
        raise DimensionError("U and V must have the same number of rows")
    ru = numerical_rank(U, tol)
    rv = numerical_rank(V, tol)
    if ru < U.shape[1] or rv < V.shape[1]:
        raise RankDeficient("U and V must have full column rank")
    return ru + rv - numerical_rank(np.hstack([U, V]), tol)


def principal_angles(U, V) -> np.ndarray:
    """Principal angles (radians, ascending) between range(U) and range(V)."""
    qu, _ = np.linalg.qr(as_matrix(U, "U"))
    qv, _ = np.linalg.qr(as_matrix(V, "V"))
    s = np.linalg.svd(qu.conj().T @ qv, compute_uv=False)
    return np.arccos(np.clip(s, 0.0, 1.0))


def random_gaussian_matrix(m: int, n: int, field: str = "complex", seed: Seed = 0) -> np.ndarray:
    """iid standard normal entries; for ``field="complex"`` the real and
    imaginary parts are drawn independently. Deterministic in ``seed``."""
    if m < 1 or n < 1:
        raise DimensionError("m and n must be positive")
    rng = np.random.default_rng(seed)
    if field == "real":
        return rng.standard_normal((m, n)).astype(complex)
    if field == "complex":
        re = rng.standard_normal((m, n))
        im = rng.standard_normal((m, n))
        return re + 1j * im
    raise ValueError(f"unknown field {field!r}")
