import cmath
import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn
from uls import (
    Diagonal,
    ExplicitMatrix,
    NotDiagonalizable,
    NotInvertible,
    Permutation,
    ScalarIdentity,
    apply_transform,
    compose_relative,
    cyclic_shift,
    dominant_eigenvalue,
    eigenstructure,
    permutation_cycles,
    permutation_spectrum,
)
from uls.spectral import transposition

permutations = st.integers(1, 9).flatmap(lambda m: st.permutations(range(m)))


def multiset(clusters, digits=7):
    out = []
    for lam, mult in clusters:
        out += [(round(lam.real, digits) + 0.0, round(lam.imag, digits) + 0.0)] * mult
    return sorted(out)


def reconstruction_error(T, E):
    M = T.matrix()
    return np.linalg.norm(M @ E.basis - E.basis * E.eigenvalues[None, :], 2) / np.linalg.norm(M, 2)


class TestTransforms:
    def test_permutation_convention(self):
        P = Permutation((2, 0, 1))
        v = np.array([10, 20, 30])
        # (P v)[perm[i]] = v[i]
        np.testing.assert_array_equal(P.apply(v), [20, 30, 10])
        np.testing.assert_array_equal(P.matrix() @ v, P.apply(v))
        np.testing.assert_array_equal(P.solve(P.apply(v)), v)

    def test_invalid_permutation(self):
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))

    def test_zero_diagonal_rejected(self):
        with pytest.raises(ValueError):
            Diagonal((1, 0))
        with pytest.raises(ValueError):
            ScalarIdentity(0, 3)

    def test_explicit_must_be_square(self):
        with pytest.raises(ValueError):
            ExplicitMatrix(np.ones((2, 3)))

    def test_apply_identity_permutation(self, rng):
        v = crandn(rng, 5)
        np.testing.assert_array_equal(apply_transform(Permutation(range(5)), v), v)

    def test_apply_scalar(self, rng):
        v = crandn(rng, 4)
        np.testing.assert_allclose(apply_transform(ScalarIdentity(3, 4), v), 3 * v)

    def test_apply_matches_matrix(self, rng):
        for _ in range(50):
            T = Permutation(rng.permutation(7))
            v = crandn(rng, 7)
            np.testing.assert_array_equal(apply_transform(T, v), T.matrix() @ v)
            np.testing.assert_array_equal(apply_transform(ExplicitMatrix(T.matrix()), v), T.matrix() @ v)

    def test_apply_wrong_length(self):
        with pytest.raises(ValueError):
            apply_transform(cyclic_shift(3), np.ones(4))


class TestCycles:
    def test_identity(self):
        assert permutation_cycles((0, 1, 2)).cycles == ((0,), (1,), (2,))

    def test_cyclic_shift(self):
        assert permutation_cycles(cyclic_shift(4)).cycles == ((0, 1, 2, 3),)

    def test_swap(self):
        assert permutation_cycles(transposition(4)).cycles == ((0, 1), (2,), (3,))

    @given(permutations)
    def test_cover_and_reproduce(self, perm):
        dec = permutation_cycles(perm)
        assert sum(dec.lengths) == len(perm)
        assert sorted(i for c in dec.cycles for i in c) == list(range(len(perm)))
        assert all(c[0] == min(c) for c in dec.cycles)
        assert [c[0] for c in dec.cycles] == sorted(c[0] for c in dec.cycles)
        assert dec.to_permutation().perm == tuple(perm)


class TestPermutationSpectrum:
    def test_swap(self):
        E = permutation_spectrum(transposition(4))
        assert E.clusters == ((1, 3), (-1, 1))

    def test_three_cycle(self):
        E = permutation_spectrum(cyclic_shift(3))
        w = cmath.exp(2j * cmath.pi / 3)
        assert multiset(E.clusters) == multiset([(1, 1), (w, 1), (w.conjugate(), 1)])
        assert all(mult == 1 for _, mult in E.clusters)

    def test_identity(self):
        assert permutation_spectrum(range(5)).clusters == ((1, 5),)

    def test_cyclic_shift_four_distinct(self):
        E = eigenstructure(cyclic_shift(4))
        assert multiset(E.clusters) == multiset([(1, 1), (1j, 1), (-1, 1), (-1j, 1)])

    @settings(max_examples=100, deadline=None)
    @given(permutations)
    def test_matches_numerical_eigenvalues(self, perm):
        T = Permutation(perm)
        E = permutation_spectrum(T)
        numeric = np.linalg.eigvals(T.matrix())
        ours = np.sort_complex(np.round(E.eigenvalues, 7) + 0)
        theirs = np.sort_complex(np.round(numeric, 7) + 0)
        np.testing.assert_allclose(ours, theirs, atol=1e-6)
        assert reconstruction_error(T, E) <= 1e-12
        assert np.linalg.matrix_rank(E.basis) == len(perm)

    @given(permutations)
    def test_eigenvalue_one_counts_cycles(self, perm):
        E = permutation_spectrum(perm)
        lam, p = dominant_eigenvalue(E)
        assert lam == 1
        assert p == len(permutation_cycles(perm))


class TestEigenstructure:
    def test_scalar(self):
        E = eigenstructure(ScalarIdentity(2, 4))
        assert E.clusters == ((2, 4),)
        np.testing.assert_array_equal(E.basis, np.eye(4))

    def test_explicit_diagonal_read_off(self):
        E = eigenstructure(ExplicitMatrix(np.diag([1.0, 1.0, 3.0])))
        assert [(round(l.real, 12), m) for l, m in E.clusters] == [(1.0, 2), (3.0, 1)]

    def test_structured_diagonal_basis_matches_order(self):
        T = Diagonal((3, 1, 3, 2))
        E = eigenstructure(T)
        assert E.clusters == ((3, 2), (1, 1), (2, 1))
        assert reconstruction_error(T, E) == 0

    def test_random_explicit_reconstruction(self, rng):
        for _ in range(30):
            T = ExplicitMatrix(crandn(rng, 6, 6))
            E = eigenstructure(T)
            assert reconstruction_error(T, E) <= 1e-8
            assert E.size == 6

    def test_similar_to_repeated_spectrum(self, rng):
        # P diag(2,2,2,5) P^{-1} must cluster into multiplicities 3 and 1
        P = crandn(rng, 4, 4)
        M = P @ np.diag([2, 2, 2, 5]) @ np.linalg.inv(P)
        E = eigenstructure(ExplicitMatrix(M))
        assert [m for _, m in E.clusters] == [3, 1]
        assert abs(E.clusters[0][0] - 2) < 1e-8
        assert reconstruction_error(ExplicitMatrix(M), E) <= 1e-8

    def test_jordan_block_rejected(self):
        with pytest.raises(NotDiagonalizable):
            eigenstructure(ExplicitMatrix([[1.0, 1.0], [0.0, 1.0]]))

    def test_singular_rejected(self):
        with pytest.raises(NotInvertible):
            eigenstructure(ExplicitMatrix([[1.0, 0.0], [0.0, 0.0]]))

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_structured_explicit_agreement(self, m):
        for perm in itertools.islice(itertools.permutations(range(m)), 60):
            T = Permutation(perm)
            a = multiset(eigenstructure(T).clusters, digits=7)
            b = multiset(eigenstructure(ExplicitMatrix(T.matrix())).clusters, digits=7)
            assert a == b


class TestDominant:
    def test_swap(self):
        assert dominant_eigenvalue(permutation_spectrum(transposition(4))) == (1, 3)

    def test_scalar(self):
        assert dominant_eigenvalue(eigenstructure(ScalarIdentity(2, 4))) == (2, 4)

    def test_tie_smallest_modulus(self):
        assert dominant_eigenvalue(eigenstructure(Diagonal((2, 2, 3, 3)))) == (2, 2)

    def test_tie_one_wins(self):
        assert dominant_eigenvalue(eigenstructure(Diagonal((0.5, 0.5, 1, 1)))) == (1, 2)

    def test_tie_phase(self):
        # equal modulus: phase 0 < pi/2 < pi
        lam, _ = dominant_eigenvalue(eigenstructure(Diagonal((-2, 2j, 2))))
        assert lam == 2
        lam, _ = dominant_eigenvalue(eigenstructure(Diagonal((-2, 2j))))
        assert lam == 2j

    def test_tie_one_wins_numerically(self):
        M = np.diag([1.0 + 1e-12, 1.0, 0.5, 0.5])
        lam, p = dominant_eigenvalue(eigenstructure(ExplicitMatrix(M)))
        assert p == 2 and abs(lam - 1) < 1e-10


class TestComposeRelative:
    def test_self_is_identity(self, rng):
        P = Permutation(rng.permutation(5))
        assert compose_relative(P, P).is_identity()
        D = Diagonal(tuple(crandn(rng, 4)))
        assert compose_relative(D, D).is_identity()
        S = ScalarIdentity(3 - 1j, 4)
        assert compose_relative(S, S).is_identity()
        X = ExplicitMatrix(crandn(rng, 4, 4))
        R = compose_relative(X, X)
        assert isinstance(R, ExplicitMatrix)
        np.testing.assert_allclose(R.matrix(), np.eye(4), atol=1e-12)

    def test_identity_left(self, rng):
        P = Permutation(rng.permutation(6))
        assert compose_relative(Permutation(range(6)), P) == P

    def test_permutation_product(self, rng):
        for _ in range(50):
            P1 = Permutation(rng.permutation(6))
            P2 = Permutation(rng.permutation(6))
            R = compose_relative(P1, P2)
            assert isinstance(R, Permutation)
            assert np.abs(R.matrix() - P1.matrix().T @ P2.matrix()).max() <= 1e-12

    def test_diagonal_product(self):
        R = compose_relative(Diagonal((1, 2, 4)), Diagonal((2, 2, 2)))
        assert isinstance(R, Diagonal)
        assert R.entries == (2, 1, 0.5)
        R = compose_relative(ScalarIdentity(2, 3), Diagonal((2, 4, 8)))
        assert isinstance(R, Diagonal) and R.entries == (1, 2, 4)

    def test_mixed_uses_solve(self, rng):
        X = crandn(rng, 4, 4)
        P = cyclic_shift(4)
        R = compose_relative(ExplicitMatrix(X), P)
        np.testing.assert_allclose(X @ R.matrix(), P.matrix(), atol=1e-12)
        R = compose_relative(P, ExplicitMatrix(X))
        np.testing.assert_allclose(P.matrix() @ R.matrix(), X, atol=1e-12)

    def test_singular_left_factor(self):
        with pytest.raises(NotInvertible):
            compose_relative(ExplicitMatrix([[1, 1], [1, 1]]), cyclic_shift(2))

    def test_relative_eigenvalues_all_one(self, rng):
        for T in (ExplicitMatrix(crandn(rng, 5, 5)), Permutation(rng.permutation(5)), Diagonal((1, 2, 3))):
            E = eigenstructure(compose_relative(T, T))
            assert all(E.is_one(lam) for lam, _ in E.clusters)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            compose_relative(cyclic_shift(3), cyclic_shift(4))
