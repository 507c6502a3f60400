import itertools

import numpy as np
import pytest

from conftest import crandn
from uls import (
    Classification,
    Diagonal,
    Permutation,
    ScalarIdentity,
    SensingInstance,
    converse_witness,
    cyclic_shift,
    decode,
    membership_residual,
    random_gaussian_matrix,
    simulate_instance,
)
from uls.decoder import Candidate, classify_candidates
from uls.errors import DimensionError
from uls.spectral import identity_permutation

ALL6 = [Permutation(p) for p in itertools.permutations(range(6))]


class TestSimulate:
    def test_identity(self, rng):
        A, x = crandn(rng, 4, 2), crandn(rng, 2)
        inst = simulate_instance(A, [identity_permutation(4)], x, 0)
        np.testing.assert_array_equal(inst.y, A @ x)
        assert inst.truth[0] == 0

    def test_scalar(self, rng):
        A, x = crandn(rng, 4, 2), crandn(rng, 2)
        inst = simulate_instance(A, [identity_permutation(4), ScalarIdentity(2, 4)], x, 1)
        np.testing.assert_allclose(inst.y, 2 * (A @ x))

    def test_permutation_preserves_entries(self, rng):
        A, x = crandn(rng, 5, 2), crandn(rng, 2)
        P = Permutation(rng.permutation(5))
        inst = simulate_instance(A, [P], x, 0)
        assert sorted(inst.y.tolist(), key=lambda c: (c.real, c.imag)) == sorted(
            (A @ x).tolist(), key=lambda c: (c.real, c.imag)
        )

    def test_mismatched_sizes(self, rng):
        with pytest.raises(DimensionError):
            simulate_instance(crandn(rng, 4, 2), [cyclic_shift(4)], crandn(rng, 3), 0)
        with pytest.raises(DimensionError):
            simulate_instance(crandn(rng, 4, 2), [cyclic_shift(5)], crandn(rng, 2), 0)
        with pytest.raises(DimensionError):
            simulate_instance(crandn(rng, 4, 2), [cyclic_shift(4)], crandn(rng, 2), 1)

    def test_inconsistent_truth_rejected(self, rng):
        A = crandn(rng, 4, 2)
        with pytest.raises(ValueError):
            SensingInstance(A, (cyclic_shift(4),), crandn(rng, 4), (0, crandn(rng, 2)))


class TestMembership:
    def test_in_range(self, rng):
        B, x = crandn(rng, 5, 2), crandn(rng, 2)
        ok, z, res = membership_residual(B @ x, B)
        assert ok and res < 1e-12
        np.testing.assert_allclose(z, x)

    def test_orthogonal(self):
        ok, z, res = membership_residual([0, 0, 1], np.eye(3)[:, :2])
        assert not ok
        assert res == pytest.approx(1.0)
        assert np.abs(z).max() < 1e-15

    def test_random_not_in_range(self):
        for s in range(100):
            B = random_gaussian_matrix(4, 2, "complex", [s, 0])
            y = random_gaussian_matrix(4, 1, "complex", [s, 1])[:, 0]
            assert not membership_residual(y, B)[0]


class TestDecode:
    def test_single_identity(self, rng):
        A, x = crandn(rng, 4, 2), crandn(rng, 2)
        res = decode(simulate_instance(A, [identity_permutation(4)], x, 0))
        assert res.classification is Classification.UNIQUE
        np.testing.assert_allclose(res.representative, x)
        assert res.truth_recovered

    def test_all_permutations(self):
        for s in range(10):
            A = random_gaussian_matrix(6, 3, "complex", [s, 0])
            x = random_gaussian_matrix(3, 1, "complex", [s, 1])[:, 0]
            which = s * 71 % 720
            res = decode(simulate_instance(A, ALL6, x, which))
            assert res.classification is Classification.UNIQUE
            assert [c.index for c in res.candidates] == [which]
            assert np.linalg.norm(res.representative - x) <= 1e-8 * np.linalg.norm(x)

    def test_scale_pair(self, rng):
        A, x = crandn(rng, 6, 3), crandn(rng, 3)
        res = decode(simulate_instance(A, [identity_permutation(6), ScalarIdentity(2, 6)], x, 0))
        assert res.classification is Classification.UP_TO_SCALE
        assert len(res.candidates) == 2
        np.testing.assert_allclose(res.candidates[0].x, x)
        np.testing.assert_allclose(res.candidates[1].x, x / 2)
        assert abs(res.ratios[0] - 2) <= 1e-10

    @pytest.mark.parametrize("c", [3.0, -0.5, 1j, 2 - 1j])
    @pytest.mark.parametrize("m,n", [(2, 2), (4, 3), (6, 3), (8, 2)])
    def test_scale_candidate_law(self, c, m, n):
        for s in range(10):
            A = random_gaussian_matrix(m, n, "complex", [s, 0])
            x = random_gaussian_matrix(n, 1, "complex", [s, 1])[:, 0]
            res = decode(simulate_instance(A, [ScalarIdentity(1, m), ScalarIdentity(c, m)], x, s % 2))
            assert len(res.candidates) == 2
            assert abs(res.ratios[0] - c) <= 1e-10 * abs(c)

    def test_infeasible(self, rng):
        A = crandn(rng, 6, 2)
        inst = SensingInstance(A, (identity_permutation(6), cyclic_shift(6)), crandn(rng, 6))
        res = decode(inst)
        assert res.classification is Classification.INFEASIBLE
        assert res.candidates == () and res.truth_recovered is None

    def test_zero_measurement(self, rng):
        inst = SensingInstance(crandn(rng, 4, 2), (identity_permutation(4), cyclic_shift(4)), np.zeros(4))
        res = decode(inst)
        assert res.classification is Classification.UNIQUE
        assert not res.representative.any()

    def test_converse_instances_are_ambiguous(self):
        T1, T2 = identity_permutation(3), cyclic_shift(3)
        for s in range(20):
            A = random_gaussian_matrix(3, 2, "complex", s)
            w = converse_witness(A, T1, T2)
            res = decode(SensingInstance(A, (T1, T2), T1.apply(A @ w.x), (0, w.x)))
            assert res.classification is Classification.AMBIGUOUS
            assert len(res.candidates) == 2
            assert res.truth_recovered

    def test_order_invariance(self, rng):
        m, n = 6, 3
        transforms = [Permutation(rng.permutation(m)) for _ in range(5)] + [
            ScalarIdentity(2, m), Diagonal((1, 1, 1, 2, 2, 2)), identity_permutation(m)
        ]
        A, x = crandn(rng, m, n), crandn(rng, n)
        base = decode(simulate_instance(A, transforms, x, 7))
        order = rng.permutation(len(transforms))
        shuffled = [transforms[k] for k in order]
        res = decode(simulate_instance(A, shuffled, x, int(np.where(order == 7)[0][0])))
        assert sorted(int(order[c.index]) for c in res.candidates) == [c.index for c in base.candidates]
        assert [c.index for c in res.candidates] == sorted(c.index for c in res.candidates)
        assert res.classification is base.classification

    def test_to_dict(self, rng):
        A, x = crandn(rng, 4, 2), crandn(rng, 2)
        d = decode(simulate_instance(A, [identity_permutation(4)], x, 0)).to_dict()
        assert d["classification"] == "Unique"
        assert d["truth_recovered"] is True
        (cand,) = d["candidates"]
        assert set(cand) == {"index", "residual", "x"}
        assert set(cand["x"][0]) == {"re", "im"}


class TestClassifyCandidates:
    def cands(self, *xs):
        return [Candidate(k, np.asarray(x, dtype=complex), 0.0) for k, x in enumerate(xs)]

    def test_duplicates_collapse(self):
        cls, rep, _ = classify_candidates(self.cands([1, 2], [1, 2 + 1e-12], [1, 2]))
        assert cls is Classification.UNIQUE

    def test_scales_with_duplicate(self):
        cls, _, ratios = classify_candidates(self.cands([2, 4], [2, 4], [1, 2], [4, 8]))
        assert cls is Classification.UP_TO_SCALE
        assert ratios == (2, 0.5)

    def test_ambiguous(self):
        cls, _, _ = classify_candidates(self.cands([1, 2], [2, 1]))
        assert cls is Classification.AMBIGUOUS

    def test_small_entries_do_not_break_ratio(self):
        cls, _, ratios = classify_candidates(self.cands([1e-14, 3j], [5e-15, 1.5j]))
        assert cls is Classification.UP_TO_SCALE
        assert abs(ratios[0] - 2) < 1e-12

    def test_empty(self):
        assert classify_candidates([])[0] is Classification.INFEASIBLE
