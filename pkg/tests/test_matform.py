import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kpdkit.datasets import collar16_factors
from kpdkit.errors import DomainError
from kpdkit.matform import (
    MatFactorTerm,
    MatKpdProblem,
    expand_by_splits,
    mat_sum_kpd,
    mat_to_vec,
    pairing_permutation,
    reconstruct_terms,
    split_2x2,
    vec_factors_to_matrices,
    vec_to_mat,
)
from kpdkit.mda import exact_decompose
from kpdkit.stp import kron_all, perm_map
from kpdkit.sumkpd import SumConfig
from kpdkit.sva import FactorTerm, SvaConfig
from kpdkit.tensor_core import Hypermatrix, row_stack

FAST = SvaConfig(restarts=8)


def pair_sum(pairs):
    return sum(u @ v for u, v in pairs)


class TestPairing:
    def test_single_factor(self):
        assert pairing_permutation((3,), (5,)) == (1, 2)
        assert perm_map((3, 5), (1, 2)).dest.tolist() == list(range(15))

    def test_two_factors(self):
        assert pairing_permutation((4, 4), (4, 4)) == (1, 3, 2, 4)

    def test_eight_binary_axes(self):
        sigma = pairing_permutation((2,) * 4, (2,) * 4)
        assert sigma == (1, 5, 2, 6, 3, 7, 4, 8)
        assert sigma[0] == 1 and sigma[-1] == 8
        inner = tuple(a - 1 for a in sigma[1:-1])
        # inverse of the inner block is the interleave (4,1,5,2,6,3)
        inv = [0] * 6
        for k, a in enumerate(inner, start=1):
            inv[a - 1] = k
        assert tuple(inv) == (2, 4, 6, 1, 3, 5)
        assert tuple(inner) == (4, 1, 5, 2, 6, 3)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            pairing_permutation((2, 2), (4,))


class TestMatToVec:
    def test_two_rectangular_factors(self, rng):
        a1, a2 = rng.standard_normal((2, 3)), rng.standard_normal((4, 2))
        problem = MatKpdProblem(np.kron(a1, a2), (2, 4), (3, 2))
        v, shape = mat_to_vec(problem)
        assert shape == (6, 8)
        assert v.tobytes() == np.kron(row_stack(a1), row_stack(a2)).tobytes()

    def test_single_factor_is_row_stacking(self, rng):
        a = rng.standard_normal((3, 5))
        v, shape = mat_to_vec(MatKpdProblem(a, (3,), (5,)))
        assert shape == (15,)
        assert v.tolist() == row_stack(a).tolist()

    def test_dummy_axis(self, rng):
        a1, a2 = rng.standard_normal((3, 1)), rng.standard_normal((1, 4))
        v, shape = mat_to_vec(MatKpdProblem(np.kron(a1, a2), (3, 1), (1, 4)))
        assert shape == (3, 4)
        np.testing.assert_array_equal(v, np.kron(a1.ravel(), a2.ravel()))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=3),
           st.integers(0, 2**32 - 1))
    def test_norm_and_inverse(self, dims, seed):
        rows, cols = zip(*dims)
        a = np.random.default_rng(seed).standard_normal((int(np.prod(rows)), int(np.prod(cols))))
        problem = MatKpdProblem(a, rows, cols)
        v, _ = mat_to_vec(problem)
        # same multiset of entries, so the norm only differs by summation order
        assert np.sort(v).tolist() == np.sort(a.ravel()).tolist()
        assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(a), rel=1e-15)
        assert vec_to_mat(problem, v).tobytes() == a.tobytes()

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 3), st.integers(1, 3)), min_size=1, max_size=3),
           st.integers(0, 2**32 - 1))
    def test_equivalence_with_vector_form(self, dims, seed):
        rng = np.random.default_rng(seed)
        rows, cols = zip(*dims)
        mats = [rng.uniform(0.5, 2.0, (m, n)) * rng.choice([-1, 1], (m, n)) for m, n in dims]
        problem = MatKpdProblem(kron_all(mats), rows, cols)
        v, shape = mat_to_vec(problem)
        rep = exact_decompose(Hypermatrix(shape, v))
        assert rep.decomposable
        term = FactorTerm(rep.factors.factors, rep.factors.scale)
        got = vec_factors_to_matrices(term, rows, cols)
        # recovered factors equal the originals up to scalars c_s with ∏ c_s = 1
        cs = [g.ravel()[0] / m.ravel()[0] for g, m in zip(got.matrices, mats)]
        for g, m, c in zip(got.matrices, mats, cs):
            np.testing.assert_allclose(g, c * m, rtol=1e-12)
        assert got.coefficient * np.prod(cs) == pytest.approx(1.0, rel=1e-12)

    def test_bad_problem(self):
        with pytest.raises(DomainError):
            MatKpdProblem(np.ones((4, 4)), (2, 2), (4,))
        with pytest.raises(DomainError):
            MatKpdProblem(np.ones((4, 4)), (2, 3), (2, 2))
        with pytest.raises(DomainError):
            MatKpdProblem(np.ones(4), (2,), (2,))


class TestFactorMapping:
    def test_reshape(self):
        term = vec_factors_to_matrices(FactorTerm((np.array([1.0, 2, 3, 4]),)), (2,), (2,))
        assert term.matrices[0].tolist() == [[1, 2], [3, 4]]

    def test_commutes_with_vector_form(self, rng):
        rows, cols = (2, 3), (2, 2)
        term = FactorTerm(tuple(rng.standard_normal(m * n) for m, n in zip(rows, cols)), 1.5)
        problem = MatKpdProblem(np.zeros((6, 4)), rows, cols)
        via_vec = vec_to_mat(problem, term.vector())
        np.testing.assert_allclose(vec_factors_to_matrices(term, rows, cols).matrix(), via_vec,
                                   rtol=1e-15)

    def test_mismatch(self):
        with pytest.raises(DomainError):
            vec_factors_to_matrices(FactorTerm((np.ones(3),)), (2,), (2,))
        with pytest.raises(DomainError):
            vec_factors_to_matrices(FactorTerm((np.ones(4),)), (2, 1), (2, 1))

    def test_reconstruct_terms_empty(self):
        with pytest.raises(DomainError):
            reconstruct_terms([])


class TestMatSumKpd:
    def test_single_product(self, rng):
        a = np.kron(rng.standard_normal((3, 2)), rng.standard_normal((2, 4)))
        res = mat_sum_kpd(MatKpdProblem(a, (3, 2), (2, 4)), SumConfig(inner=FAST))
        assert len(res.terms) == 1
        assert res.residual_norms[0] < 1e-8

    def test_collar_two_factors(self, collar):
        problem = MatKpdProblem(collar, (4, 4), (4, 4))
        v, shape = mat_to_vec(problem)
        assert not exact_decompose(Hypermatrix(shape, v)).decomposable
        res = mat_sum_kpd(problem, SumConfig(inner=FAST))
        assert len(res.terms) == 2
        assert res.residual_norms[-1] < 1e-8
        assert np.linalg.norm(reconstruct_terms(res.terms) - collar) < 1e-8
        assert [m.shape for m in res.terms[0].matrices] == [(4, 4), (4, 4)]

    def test_collar_four_factors(self, collar):
        res = mat_sum_kpd(MatKpdProblem(collar, (2,) * 4, (2,) * 4), SumConfig(inner=FAST))
        sq = res.squared_residuals
        assert len(res.terms) == 4
        for got, want in zip(sq, [345408, 82240, 16448]):
            assert got == pytest.approx(want, rel=1e-2)
        assert sq[3] < 1e-10

    def test_stored_factors_reproduce_collar(self, collar):
        b1, c1, b2, c2 = collar16_factors()
        np.testing.assert_allclose(np.kron(b1, c1) - 1024 * np.kron(b2, c2), collar, atol=1e-10)


class TestSplit:
    def test_leading_pivot(self):
        pairs = split_2x2([[1, 2], [3, 4]])
        assert [(u.ravel().tolist(), v.ravel().tolist()) for u, v in pairs] == [
            ([1, 3], [1, 2]), ([0, 1], [0, -2])
        ]

    def test_zero_top_row(self):
        pairs = split_2x2([[0, 0], [5, 6]])
        assert [(u.ravel().tolist(), v.ravel().tolist()) for u, v in pairs] == [([0, 1], [5, 6])]

    def test_second_pivot(self):
        pairs = split_2x2([[0, 2], [5, 6]])
        assert [(u.ravel().tolist(), v.ravel().tolist()) for u, v in pairs] == [
            ([1, 3], [0, 2]), ([0, 1], [5, 0])
        ]

    def test_rank_one_gives_one_pair(self):
        assert len(split_2x2([[1, 2], [2, 4]])) == 1

    def test_shapes(self):
        for u, v in split_2x2([[1, 2], [3, 4]]):
            assert u.shape == (2, 1) and v.shape == (1, 2)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.sampled_from([0.0, 1.0, -2.0, 0.5, 4.0, -0.25, 8.0]), min_size=4, max_size=4))
    def test_exact_on_powers_of_two(self, entries):
        m = np.array(entries).reshape(2, 2)
        assert pair_sum(split_2x2(m)).tolist() == m.tolist()

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_reconstructs_random(self, seed):
        rng = np.random.default_rng(seed)
        m = rng.standard_normal((2, 2)) * (rng.random((2, 2)) < 0.7)
        pairs = split_2x2(m)
        # one rounding per product and sum, relative to the size of the pieces
        bound = 4 * np.finfo(float).eps * sum(np.abs(u) @ np.abs(v) for u, v in pairs)
        assert np.all(np.abs(pair_sum(pairs) - m) <= bound)

    def test_tiny_pivot_is_treated_as_zero(self):
        pairs = split_2x2([[1e-20, 1.0], [1.0, 1.0]])
        assert np.abs(pair_sum(pairs) - np.array([[1e-20, 1.0], [1.0, 1.0]])).max() <= 1e-12
        assert all(np.all(np.isfinite(u)) for u, _ in pairs)

    def test_bad_shape(self):
        with pytest.raises(DomainError):
            split_2x2(np.ones((2, 3)))


class TestExpand:
    def test_rank_one_factors(self):
        term = MatFactorTerm((np.array([[1.0, 2], [2, 4]]), np.array([[0.0, 0], [1, 1]])), 2.0)
        out = expand_by_splits([term])
        assert len(out) == 1
        assert [m.shape for m in out[0].matrices] == [(2, 1), (1, 2), (2, 1), (1, 2)]
        np.testing.assert_allclose(reconstruct_terms(out), term.matrix())

    def test_two_full_rank_factors(self, rng):
        term = MatFactorTerm((rng.standard_normal((2, 2)), rng.standard_normal((2, 2))))
        out = expand_by_splits([term])
        assert len(out) == 4
        np.testing.assert_allclose(reconstruct_terms(out), term.matrix(), atol=1e-12)

    def test_collar(self, collar):
        res = mat_sum_kpd(MatKpdProblem(collar, (2,) * 4, (2,) * 4), SumConfig(inner=FAST))
        out = expand_by_splits(res.terms)
        assert len(out) <= 8
        assert np.linalg.norm(reconstruct_terms(out) - collar) < 1e-8
        assert np.linalg.norm(reconstruct_terms(out) - reconstruct_terms(res.terms)) <= (
            1e-12 * np.linalg.norm(collar)
        )

    def test_non_2x2_factor(self):
        with pytest.raises(DomainError):
            expand_by_splits([MatFactorTerm((np.ones((2, 2)), np.ones((3, 3))))])
