"""Identifiability verdicts for pairs and finite sets of transforms.

For ``y = A x = T A z`` with ``m >= 2n`` and generic ``A``:

* if the largest eigenspace of ``T`` has dimension ``p <= m - n``, or its
  eigenvalue is 1, then ``x = z``;
* otherwise ``x = lam * z`` where ``lam`` is the dominant eigenvalue.

Two transforms ``T1, T2`` reduce to this case through ``T1^{-1} T2``. When
``m < 2n`` and every eigenspace of the relative transform has dimension at
most ``m - n``, distinct solutions exist for generic ``A``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DimensionError, NumericalFailure, PreconditionFailed, RankDeficient
from .linalg import (
    DEFAULT_TOL,
    Tolerance,
    as_matrix,
    least_squares_solve,
    numerical_rank,
    rref_with_pivots,
)
from .spectral import (
    EigenStructure,
    Transform,
    compose_relative,
    dominant_eigenvalue,
    eigenstructure,
)


class Category(str, Enum):
    UNIQUE = "Unique"
    UP_TO_SCALE = "UpToScale"
    NOT_IDENTIFIABLE = "NotIdentifiable"
    MIXED_OR_NOT_IDENTIFIABLE = "MixedOrNotIdentifiable"


@dataclass(frozen=True)
class PairVerdict:
    """Outcome for one ordered pair.

    ``certified`` is False when ``m < 2n`` and some eigenspace of the
    relative transform is larger than ``m - n``; the verdict then only
    reflects the dominant cluster and carries no genericity guarantee.
    ``large_clusters`` lists every cluster whose multiplicity exceeds the
    margin, so cases with several such clusters are visible.
    """

    category: Category
    lambda_bar: complex
    p: int
    margin: int
    scale: complex | None = None
    certified: bool = True
    trivial: bool = False
    large_clusters: tuple[tuple[complex, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "category": self.category.value,
            "lambda_bar": _cjson(self.lambda_bar),
            "p": self.p,
            "margin": self.margin,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class SetVerdict:
    category: Category
    scales: tuple[complex, ...]
    per_pair: dict[tuple[int, int], PairVerdict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        pairs = []
        for (i, j), v in sorted(self.per_pair.items()):
            pairs.append({"i": i, "j": j, **v.to_dict()})
        return {
            "category": self.category.value,
            "scales": [_cjson(a) for a in self.scales],
            "pairs": pairs,
        }


@dataclass(frozen=True, eq=False)
class ConverseWitness:
    s: np.ndarray
    x: np.ndarray
    z: np.ndarray
    residuals: tuple[float, float]
    separation: float
    intersection_dim: int

    def to_dict(self) -> dict:
        return {
            "s": [_cjson(v) for v in self.s],
            "x": [_cjson(v) for v in self.x],
            "z": [_cjson(v) for v in self.z],
            "residuals": list(self.residuals),
            "separation": self.separation,
            "intersection_dim": self.intersection_dim,
        }


def _cjson(c: complex) -> dict:
    c = complex(c)
    return {"re": c.real, "im": c.imag}


def _is_identity(T: Transform, tol: Tolerance) -> bool:
    if T.is_identity():
        return True
    m = T.size
    return bool(np.linalg.norm(T.matrix() - np.eye(m), 2) <= 1e-10 * m)


def classify_pair(T1: Transform, T2: Transform, n: int, tol: Tolerance = DEFAULT_TOL) -> PairVerdict:
    """Decide how ``x`` relates to ``z`` when ``T1 A x = T2 A z``."""
    m = T1.size
    if T2.size != m:
        raise DimensionError("transforms differ in size")
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m, got n={n}, m={m}")
    margin = m - n
    rel = compose_relative(T1, T2, tol)
    if _is_identity(rel, tol):
        return PairVerdict(Category.UNIQUE, 1.0 + 0j, m, margin, trivial=True)

    E = eigenstructure(rel, tol)
    lam, p = dominant_eigenvalue(E)
    large = tuple(c for c in E.clusters if c[1] > margin)
    certified = True
    if m < 2 * n:
        if not large:
            return PairVerdict(Category.NOT_IDENTIFIABLE, lam, p, margin)
        certified = False

    if p <= margin or E.is_one(lam):
        return PairVerdict(Category.UNIQUE, lam, p, margin, certified=certified, large_clusters=large)
    return PairVerdict(
        Category.UP_TO_SCALE, lam, p, margin, scale=lam, certified=certified, large_clusters=large
    )


def _add_scale(scales: list[complex], a: complex, atol: float = 1e-10):
    if all(abs(a - b) > atol * max(1.0, abs(b)) for b in scales):
        scales.append(a)


def certify_set(transforms, n: int, tol: Tolerance = DEFAULT_TOL) -> SetVerdict:
    """Aggregate pair verdicts over every unordered pair of a finite set."""
    transforms = list(transforms)
    if not transforms:
        raise ValueError("need at least one transform")
    m = transforms[0].size
    if any(T.size != m for T in transforms):
        raise DimensionError("all transforms must have the same size")
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m, got n={n}, m={m}")

    per_pair = {}
    for i, j in itertools.combinations(range(len(transforms)), 2):
        per_pair[(i, j)] = classify_pair(transforms[i], transforms[j], n, tol)

    verdicts = list(per_pair.values())
    if any(v.category is Category.NOT_IDENTIFIABLE or not v.certified for v in verdicts):
        return SetVerdict(Category.MIXED_OR_NOT_IDENTIFIABLE, (), per_pair)
    scales: list[complex] = []
    for v in verdicts:
        if v.category is Category.UP_TO_SCALE:
            # the reverse orientation has the reciprocal dominant eigenvalue
            _add_scale(scales, v.scale)
            _add_scale(scales, 1 / v.scale)
    if not scales:
        return SetVerdict(Category.UNIQUE, (), per_pair)
    scales.sort(key=lambda a: (abs(a), np.angle(a)))
    return SetVerdict(Category.UP_TO_SCALE, tuple(scales), per_pair)


def predicted_intersection(n: int, E: EigenStructure) -> dict[complex, int]:
    """Generic dimension of range(A) & E_lam for each eigenvalue cluster."""
    m = E.size
    if not 1 <= n <= m:
        raise DimensionError(f"need 1 <= n <= m, got n={n}, m={m}")
    return {lam: max(0, n + mult - m) for lam, mult in E.clusters}


def _split_S(A_tilde: np.ndarray, tol: Tolerance) -> np.ndarray:
    n = A_tilde.shape[1]
    R, pivots = rref_with_pivots(A_tilde.conj().T, tol)
    if pivots != list(range(n)):
        raise RankDeficient("rref(A~^H) does not start with an identity block")
    return R[:, n:].conj().T


def determinant_probe(A, T: Transform, tol: Tolerance = DEFAULT_TOL) -> complex:
    """det(S~ L1 - L2~ S~) built from the eigenbasis of ``T``.

    ``A~ = Phi^{-1} A``, ``rref(A~^H) = [I | S^H]``, ``S~`` is the top
    ``n x n`` block of ``S``, ``L1`` holds the first ``n`` eigenvalues and
    ``L2~`` the next ``n``, both in dominant-first order.
    """
    A = as_matrix(A, "A")
    m, n = A.shape
    if T.size != m:
        raise DimensionError("transform size does not match A")
    if m < 2 * n:
        raise DimensionError(f"determinant probe needs m >= 2n, got m={m}, n={n}")
    if numerical_rank(A, tol) < n:
        raise RankDeficient("A is not of full column rank")
    E = eigenstructure(T, tol)
    A_tilde = np.linalg.solve(E.basis, A)
    if numerical_rank(A_tilde, tol) < n:
        raise RankDeficient("Phi^{-1} A is not of full column rank")
    S = _split_S(A_tilde, tol)
    S_top = S[:n]
    lam = E.eigenvalues
    L1 = lam[:n]
    L2 = lam[n : 2 * n]
    return complex(np.linalg.det(S_top * L1[None, :] - L2[:, None] * S_top))


def determinant_generically_nonzero(E: EigenStructure, n: int) -> bool:
    """Whether det(S~ L1 - L2~ S~) is a nonzero polynomial in S~.

    Entry ``(j, k)`` of the system matrix is ``S~[j, k] * (L1[k] - L2[j])``.
    Each permutation contributes a distinct monomial, so the determinant
    vanishes identically exactly when no perfect matching avoids the zero
    coefficients.
    """
    lam = E.eigenvalues
    if E.size < 2 * n:
        raise DimensionError("need m >= 2n")
    coeff = lam[None, :n] - lam[n : 2 * n, None]
    zero = np.abs(coeff) <= max(E.cluster_tol, 1e-12)
    rows, cols = linear_sum_assignment(zero.astype(float))
    return not zero[rows, cols].any()


def converse_witness(A, T1: Transform, T2: Transform, tol: Tolerance = DEFAULT_TOL) -> ConverseWitness:
    """Construct ``x != z`` with ``T1 A x = T2 A z`` for ``n <= m < 2n``.

    The shared direction ``s`` is taken from the null space of
    ``[T1 A | -T2 A]``, along the right singular vector of the smallest
    singular value (the best aligned pair of principal vectors). ``x`` and
    ``z`` are then re-solved from ``s`` by least squares.
    """
    A = as_matrix(A, "A")
    m, n = A.shape
    if T1.size != m or T2.size != m:
        raise DimensionError("transform size does not match A")
    if not n <= m < 2 * n:
        raise PreconditionFailed(f"converse needs n <= m < 2n, got m={m}, n={n}")
    E = eigenstructure(compose_relative(T1, T2, tol), tol)
    too_big = [(lam, mult) for lam, mult in E.clusters if mult > m - n]
    if too_big:
        raise PreconditionFailed(
            f"relative transform has an eigenspace of dimension {too_big[0][1]} > m - n = {m - n}"
        )

    B1 = T1.apply(A)
    B2 = T2.apply(A)
    if numerical_rank(B1, tol) < n or numerical_rank(B2, tol) < n:
        raise RankDeficient("A is not of full column rank")
    stacked = np.hstack([B1, -B2])
    rank = numerical_rank(stacked, tol)
    dim = 2 * n - rank
    if dim < 1:
        raise NumericalFailure("ranges of T1 A and T2 A do not intersect")
    _, _, vh = np.linalg.svd(stacked)
    w = vh[-1].conj()
    s = 0.5 * (B1 @ w[:n] + B2 @ w[n:])
    s = s / np.linalg.norm(s)

    x, r1 = least_squares_solve(B1, s)
    z, r2 = least_squares_solve(B2, s)
    separation = float(np.linalg.norm(x - z) / max(np.linalg.norm(x), np.linalg.norm(z)))
    if max(r1, r2) > tol.residual_tol or separation <= tol.residual_tol:
        raise NumericalFailure(
            f"no usable intersection direction (residuals {r1:.3g}, {r2:.3g}, separation {separation:.3g})"
        )
    return ConverseWitness(s, x, z, (r1, r2), separation, dim)
