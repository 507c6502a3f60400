"""Transforms, their eigenstructure, and exact permutation spectra.

Permutation convention: a permutation ``perm`` acts on a vector as
``(P v)[perm[i]] = v[i]``, so its matrix has ones at ``(perm[i], i)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, NotDiagonalizable, NotInvertible, NumericalFailure
from .linalg import DEFAULT_TOL, Tolerance, as_matrix, numerical_rank

CLUSTER_RTOL = 1e-7
RECONSTRUCTION_RTOL = 1e-8


class Transform:
    """Base class of the four transform variants."""

    size: int

    def matrix(self) -> np.ndarray:
        raise NotImplementedError

    def apply(self, v) -> np.ndarray:
        """``T @ v`` for a vector or a matrix of column vectors."""
        return self.matrix() @ np.asarray(v, dtype=complex)

    def solve(self, v) -> np.ndarray:
        """``T^{-1} @ v`` without forming the inverse."""
        raise NotImplementedError

    def is_identity(self) -> bool:
        return False


@dataclass(frozen=True, eq=False)
class ExplicitMatrix(Transform):
    data: np.ndarray

    def __post_init__(self):
        arr = as_matrix(self.data, "transform")
        if arr.shape[0] != arr.shape[1]:
            raise DimensionError(f"transform must be square, got {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def size(self) -> int:
        return self.data.shape[0]

    def matrix(self):
        return np.array(self.data)

    def apply(self, v):
        return self.data @ np.asarray(v, dtype=complex)

    def solve(self, v, tol: Tolerance = DEFAULT_TOL):
        if numerical_rank(self.data, tol) < self.size:
            raise NotInvertible("transform matrix is numerically singular")
        return np.linalg.solve(self.data, np.asarray(v, dtype=complex))

    def is_identity(self):
        return bool(np.array_equal(self.data, np.eye(self.size)))


@dataclass(frozen=True)
class Permutation(Transform):
    perm: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(i) for i in self.perm)
        if sorted(perm) != list(range(len(perm))) or not perm:
            raise ValueError(f"not a permutation: {perm}")
        object.__setattr__(self, "perm", perm)

    @property
    def size(self) -> int:
        return len(self.perm)

    def matrix(self):
        P = np.zeros((self.size, self.size), dtype=complex)
        P[list(self.perm), list(range(self.size))] = 1.0
        return P

    def apply(self, v):
        v = np.asarray(v, dtype=complex)
        out = np.empty_like(v)
        out[list(self.perm)] = v
        return out

    def solve(self, v):
        return np.asarray(v, dtype=complex)[list(self.perm)]

    def inverse(self) -> "Permutation":
        inv = [0] * self.size
        for i, j in enumerate(self.perm):
            inv[j] = i
        return Permutation(tuple(inv))

    def is_identity(self):
        return all(i == j for i, j in enumerate(self.perm))


@dataclass(frozen=True)
class Diagonal(Transform):
    entries: tuple[complex, ...]

    def __post_init__(self):
        entries = tuple(complex(d) for d in self.entries)
        if not entries:
            raise DimensionError("diagonal transform needs at least one entry")
        if any(d == 0 or not cmath.isfinite(d) for d in entries):
            raise ValueError("diagonal entries must be finite and nonzero")
        object.__setattr__(self, "entries", entries)

    @property
    def size(self) -> int:
        return len(self.entries)

    def matrix(self):
        return np.diag(np.array(self.entries, dtype=complex))

    def _d(self, v):
        d = np.array(self.entries, dtype=complex)
        return d if np.ndim(v) == 1 else d[:, None]

    def apply(self, v):
        v = np.asarray(v, dtype=complex)
        return self._d(v) * v

    def solve(self, v):
        v = np.asarray(v, dtype=complex)
        return v / self._d(v)

    def is_identity(self):
        return all(d == 1 for d in self.entries)


@dataclass(frozen=True)
class ScalarIdentity(Transform):
    scalar: complex
    size: int

    def __post_init__(self):
        c = complex(self.scalar)
        if c == 0 or not cmath.isfinite(c):
            raise ValueError("scalar must be finite and nonzero")
        if self.size < 1:
            raise DimensionError("size must be positive")
        object.__setattr__(self, "scalar", c)

    def matrix(self):
        return self.scalar * np.eye(self.size, dtype=complex)

    def apply(self, v):
        return self.scalar * np.asarray(v, dtype=complex)

    def solve(self, v):
        return np.asarray(v, dtype=complex) / self.scalar

    def is_identity(self):
        return self.scalar == 1


def cyclic_shift(m: int) -> Permutation:
    """The permutation i -> i + 1 (mod m)."""
    return Permutation(tuple((i + 1) % m for i in range(m)))


def transposition(m: int, i: int = 0, j: int = 1) -> Permutation:
    perm = list(range(m))
    perm[i], perm[j] = j, i
    return Permutation(tuple(perm))


def identity_permutation(m: int) -> Permutation:
    return Permutation(tuple(range(m)))


@dataclass(frozen=True, eq=False)
class EigenStructure:
    """Clustered spectrum of a diagonalizable transform.

    ``clusters`` lists ``(eigenvalue, multiplicity)`` with the dominant
    cluster first. Column ``k`` of ``basis`` is an eigenvector for
    ``eigenvalues[k]``; columns are grouped in cluster order.
    ``cluster_tol`` is the absolute distance below which two eigenvalues
    are treated as equal.
    """

    clusters: tuple[tuple[complex, int], ...]
    basis: np.ndarray
    cluster_tol: float = 0.0

    @property
    def size(self) -> int:
        return sum(mult for _, mult in self.clusters)

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.concatenate([np.full(mult, lam, dtype=complex) for lam, mult in self.clusters])

    def is_one(self, lam: complex) -> bool:
        return abs(lam - 1) <= max(self.cluster_tol, 1e-12)


@dataclass(frozen=True)
class CycleDecomposition:
    cycles: tuple[tuple[int, ...], ...]

    @property
    def lengths(self) -> list[int]:
        return [len(c) for c in self.cycles]

    def __len__(self):
        return len(self.cycles)

    def to_permutation(self) -> Permutation:
        m = sum(self.lengths)
        perm = [0] * m
        for cyc in self.cycles:
            for k, i in enumerate(cyc):
                perm[i] = cyc[(k + 1) % len(cyc)]
        return Permutation(tuple(perm))


def permutation_cycles(perm: Permutation | Sequence[int]) -> CycleDecomposition:
    """Disjoint cycles of ``perm``, each starting at its smallest index."""
    p = perm.perm if isinstance(perm, Permutation) else Permutation(tuple(perm)).perm
    seen = [False] * len(p)
    cycles = []
    for start in range(len(p)):
        if seen[start]:
            continue
        cyc = []
        i = start
        while not seen[i]:
            seen[i] = True
            cyc.append(i)
            i = p[i]
        cycles.append(tuple(cyc))
    return CycleDecomposition(tuple(cycles))


def _root_of_unity(turn: Fraction) -> complex:
    # exact values on the axes so that e.g. -1 from a 2-cycle is exactly -1
    quarter = turn * 4
    if quarter.denominator == 1:
        return complex((1, 1j, -1, -1j)[int(quarter) % 4])
    angle = 2 * math.pi * turn
    return complex(math.cos(angle), math.sin(angle))


def _phase(lam: complex) -> float:
    ph = cmath.phase(lam)
    return ph + 2 * math.pi if ph < 0 else ph


def _order_key(lam: complex, mult: int, tol: float):
    # multiplicity first, then eigenvalue 1, then modulus, then phase in [0, 2pi)
    is_one = abs(lam - 1) <= max(tol, 1e-12)
    return (-mult, 0 if is_one else 1, abs(lam), _phase(lam))


def _ordered(clusters: list[tuple[complex, int, list[int]]], tol: float):
    return sorted(clusters, key=lambda c: _order_key(c[0], c[1], tol))


def permutation_spectrum(perm: Permutation | Sequence[int]) -> EigenStructure:
    """Exact spectrum of a permutation from its cycle decomposition.

    A cycle of length ``l`` contributes every ``l``-th root of unity once;
    the eigenvector for ``w`` places ``w**(-k) / sqrt(l)`` at the ``k``-th
    index of the cycle.
    """
    if not isinstance(perm, Permutation):
        perm = Permutation(tuple(perm))
    m = perm.size
    groups: dict[Fraction, list[np.ndarray]] = {}
    for cyc in permutation_cycles(perm).cycles:
        ell = len(cyc)
        for q in range(ell):
            turn = Fraction(q, ell)
            vec = np.zeros(m, dtype=complex)
            for k, i in enumerate(cyc):
                vec[i] = _root_of_unity(-turn * k) / math.sqrt(ell)
            groups.setdefault(turn, []).append(vec)
    clusters = _ordered(
        [(_root_of_unity(t), len(vs), vs) for t, vs in groups.items()], 0.0
    )
    basis = np.column_stack([v for _, _, vs in clusters for v in vs])
    return EigenStructure(
        tuple((lam, mult) for lam, mult, _ in clusters), basis, 1e-12
    )


def _cluster_values(values: np.ndarray, thresh: float) -> list[list[int]]:
    """Single-linkage grouping of indices whose values lie within ``thresh``."""
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= thresh:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _from_values(values: np.ndarray, vectors: np.ndarray, thresh: float) -> EigenStructure:
    clusters = []
    for idx in _cluster_values(values, thresh):
        lam = complex(np.mean(values[idx]))
        clusters.append((lam, len(idx), idx))
    clusters = _ordered(clusters, thresh)
    order = [i for _, _, idx in clusters for i in idx]
    return EigenStructure(
        tuple((lam, mult) for lam, mult, _ in clusters), vectors[:, order], thresh
    )


def eigenstructure(T: Transform, tol: Tolerance = DEFAULT_TOL) -> EigenStructure:
    """Clustered eigen-decomposition of ``T``, dominant cluster first.

    Structured variants are read off exactly; explicit matrices go through
    ``numpy.linalg.eig`` and eigenvalues closer than ``1e-7 * ||T||`` are
    merged.

    Raises
    ------
    NotInvertible
        If an eigenvalue has modulus below ``tol.rank_tol * ||T||``.
    NotDiagonalizable
        If the eigenvector matrix is numerically singular.
    """
    m = T.size
    if isinstance(T, ScalarIdentity):
        return EigenStructure(((T.scalar, m),), np.eye(m, dtype=complex), CLUSTER_RTOL * abs(T.scalar))
    if isinstance(T, Permutation):
        return permutation_spectrum(T)
    if isinstance(T, Diagonal):
        d = np.array(T.entries, dtype=complex)
        return _from_values(d, np.eye(m, dtype=complex), CLUSTER_RTOL * np.abs(d).max())

    M = T.matrix()
    norm = np.linalg.norm(M, 2)
    values, vectors = np.linalg.eig(M)
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    if np.any(np.abs(values) <= tol.rank_tol * norm):
        raise NotInvertible("transform has a (numerically) zero eigenvalue")
    if numerical_rank(vectors, tol) < m:
        raise NotDiagonalizable("eigenvector matrix is numerically singular")
    E = _from_values(values, vectors, CLUSTER_RTOL * norm)
    resid = np.linalg.norm(M @ E.basis - E.basis * E.eigenvalues[None, :], 2)
    if resid > RECONSTRUCTION_RTOL * norm:
        raise NumericalFailure(
            f"eigen-decomposition residual {resid:.3g} exceeds {RECONSTRUCTION_RTOL:g} * ||T||; "
            "an eigenvalue cluster merged distinct eigenvalues"
        )
    return E


def dominant_eigenvalue(E: EigenStructure) -> tuple[complex, int]:
    """Eigenvalue of largest multiplicity with its multiplicity.

    Ties go to eigenvalue 1, then to the smallest modulus, then to the
    smallest phase in ``[0, 2*pi)``.
    """
    lam, mult = min(E.clusters, key=lambda c: _order_key(c[0], c[1], E.cluster_tol))
    return lam, mult


def compose_relative(T1: Transform, T2: Transform, tol: Tolerance = DEFAULT_TOL) -> Transform:
    """``T1^{-1} T2``, keeping structure when both factors share a variant."""
    if T1.size != T2.size:
        raise DimensionError(f"sizes differ: {T1.size} vs {T2.size}")
    if T1.is_identity():
        return T2
    if isinstance(T1, Permutation) and isinstance(T2, Permutation):
        inv = T1.inverse().perm
        return Permutation(tuple(inv[j] for j in T2.perm))
    if isinstance(T1, ScalarIdentity) and isinstance(T2, ScalarIdentity):
        return ScalarIdentity(T2.scalar / T1.scalar, T1.size)
    if isinstance(T1, (Diagonal, ScalarIdentity)) and isinstance(T2, (Diagonal, ScalarIdentity)):
        d1 = np.diag(T1.matrix())
        d2 = np.diag(T2.matrix())
        return Diagonal(tuple(d2 / d1))
    if isinstance(T1, ExplicitMatrix):
        return ExplicitMatrix(T1.solve(T2.matrix(), tol))
    return ExplicitMatrix(T1.solve(T2.matrix()))


def apply_transform(T: Transform, v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != T.size:
        raise DimensionError(f"vector has length {v.shape[0]}, transform has size {T.size}")
    return T.apply(v)
