"""Recovery of ``x`` from ``y = T A x`` by enumerating a finite transform set."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionError
from .linalg import (
    DEFAULT_TOL,
    Seed,
    Tolerance,
    as_matrix,
    as_vector,
    least_squares_many,
    least_squares_solve,
)
from .spectral import Transform, apply_transform


class Classification(str, Enum):
    UNIQUE = "Unique"
    UP_TO_SCALE = "UpToScale"
    AMBIGUOUS = "Ambiguous"
    INFEASIBLE = "Infeasible"


@dataclass(frozen=True, eq=False)
class SensingInstance:
    A: np.ndarray
    transforms: tuple[Transform, ...]
    y: np.ndarray
    truth: Optional[tuple[int, np.ndarray]] = None

    def __post_init__(self):
        A = as_matrix(self.A, "A")
        y = as_vector(self.y, "y")
        transforms = tuple(self.transforms)
        m = A.shape[0]
        if y.shape[0] != m:
            raise DimensionError(f"y has length {y.shape[0]}, A has {m} rows")
        if not transforms:
            raise ValueError("transform list is empty")
        for k, T in enumerate(transforms):
            if T.size != m:
                raise DimensionError(f"transform {k} has size {T.size}, expected {m}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "transforms", transforms)
        if self.truth is not None:
            k, x = self.truth
            x = as_vector(x, "x")
            if not 0 <= k < len(transforms):
                raise DimensionError(f"truth index {k} out of range")
            if x.shape[0] != A.shape[1]:
                raise DimensionError("truth vector has the wrong length")
            resid = np.linalg.norm(transforms[k].apply(A @ x) - y)
            if resid > 1e-10 * np.linalg.norm(y):
                raise ValueError("truth does not reproduce y")
            object.__setattr__(self, "truth", (int(k), x))

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


@dataclass(frozen=True, eq=False)
class Candidate:
    index: int
    x: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Accepted candidates and the class of the solution set.

    For ``UpToScale`` the first candidate is the representative and
    ``ratios`` holds representative / other for each distinct other group.
    """

    candidates: tuple[Candidate, ...]
    classification: Classification
    representative: Optional[np.ndarray] = None
    ratios: tuple[complex, ...] = ()
    truth_recovered: Optional[bool] = None

    def to_dict(self) -> dict:
        return {
            "classification": self.classification.value,
            "candidates": [
                {
                    "index": c.index,
                    "residual": c.residual,
                    "x": [{"re": v.real, "im": v.imag} for v in c.x.tolist()],
                }
                for c in self.candidates
            ],
            "ratios": [{"re": r.real, "im": r.imag} for r in self.ratios],
            "truth_recovered": self.truth_recovered,
        }


def simulate_instance(A, transforms: Sequence[Transform], x, which: int, seed: Seed = 0) -> SensingInstance:
    """Build ``y = T_which A x`` with the truth recorded.

    ``seed`` is not consumed here (``A`` and ``x`` are given); it is kept so
    callers can thread the seed that produced them through one signature.
    """
    A = as_matrix(A, "A")
    x = as_vector(x, "x")
    if x.shape[0] != A.shape[1]:
        raise DimensionError(f"x has length {x.shape[0]}, A has {A.shape[1]} columns")
    if not 0 <= which < len(transforms):
        raise DimensionError(f"index {which} out of range for {len(transforms)} transforms")
    if transforms[which].size != A.shape[0]:
        raise DimensionError("transform size does not match A")
    y = apply_transform(transforms[which], A @ x)
    return SensingInstance(A, tuple(transforms), y, (which, x))


def membership_residual(y, B, tol: Tolerance = DEFAULT_TOL) -> tuple[bool, np.ndarray, float]:
    """Least-squares test of whether ``y`` lies in range(B)."""
    z, res = least_squares_solve(B, y)
    return res <= tol.residual_tol * np.linalg.norm(y), z, res


def _close(a: np.ndarray, b: np.ndarray, rtol: float) -> bool:
    return np.linalg.norm(a - b) <= rtol * max(np.linalg.norm(a), np.linalg.norm(b))


def proportionality_ratio(rep: np.ndarray, other: np.ndarray, rtol: float) -> Optional[complex]:
    """Return ``r`` with ``rep = r * other`` or None if not proportional.

    The ratio is read at the largest-magnitude entry of ``rep`` and then
    checked on the whole vector.
    """
    k = int(np.argmax(np.abs(rep)))
    if other[k] == 0:
        return None
    r = complex(rep[k] / other[k])
    if np.linalg.norm(rep - r * other) <= rtol * np.linalg.norm(rep):
        return r
    return None


def classify_candidates(candidates: Sequence[Candidate], tol: Tolerance = DEFAULT_TOL):
    """Collapse candidates into (classification, representative, ratios)."""
    if not candidates:
        return Classification.INFEASIBLE, None, ()
    rtol = tol.residual_tol
    groups: list[np.ndarray] = []
    for c in candidates:
        if not any(_close(c.x, g, rtol) for g in groups):
            groups.append(c.x)
    rep = groups[0]
    if len(groups) == 1:
        return Classification.UNIQUE, rep, ()
    if not np.any(rep):
        return Classification.AMBIGUOUS, rep, ()
    ratios = []
    for a, b in ((a, b) for i, a in enumerate(groups) for b in groups[i + 1 :]):
        r = proportionality_ratio(a, b, rtol)
        if r is None:
            return Classification.AMBIGUOUS, rep, ()
        if a is rep:
            ratios.append(r)
    return Classification.UP_TO_SCALE, rep, tuple(ratios)


def decode(instance: SensingInstance, tol: Tolerance = DEFAULT_TOL) -> DecodeResult:
    """Test ``y`` against range(T A) for every transform and classify.

    For each ``T``, ``T^{-1} y`` is formed with the transform's own solve
    and checked for membership in range(A); the least-squares problems for
    all transforms share one factorization.
    """
    A, y = instance.A, instance.y
    n = A.shape[1]
    if not np.any(y):
        cands = tuple(Candidate(k, np.zeros(n, dtype=complex), 0.0) for k in range(len(instance.transforms)))
        return DecodeResult(cands, Classification.UNIQUE, np.zeros(n, dtype=complex), (), _truth(instance, cands, tol))

    Y = np.column_stack([T.solve(y) for T in instance.transforms])
    Z, res = least_squares_many(A, Y)
    rel = res / np.linalg.norm(Y, axis=0)
    cands = tuple(
        Candidate(k, Z[:, k].copy(), float(rel[k]))
        for k in range(len(instance.transforms))
        if rel[k] <= tol.residual_tol
    )
    cls, rep, ratios = classify_candidates(cands, tol)
    return DecodeResult(cands, cls, rep, ratios, _truth(instance, cands, tol))


def _truth(instance: SensingInstance, cands, tol: Tolerance) -> Optional[bool]:
    if instance.truth is None:
        return None
    k, x = instance.truth
    return any(c.index == k and _close(c.x, x, tol.residual_tol) for c in cands)
