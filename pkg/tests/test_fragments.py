import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import random_dims, random_int_matrix
from fragtile import (
    DEGENERATE,
    NEGATIVE,
    POSITIVE,
    Dimensions,
    Matrix,
    c_submatrices,
    complement,
    decompose,
    det,
    fragment_matrix,
    fragment_set,
    laplace_identity,
    sandc_identity,
    shuffle_sign,
    subsets,
)
from fragtile.linalg import DimensionError


class TestDecompose:
    def test_worked_4x4_column_one(self, mset):
        d = mset.decomposition
        assert d.c[0] == (3, 1)
        assert d.cbar[0] == (-2, 0)

    def test_2x2_column_two(self, kset):
        d = kset.decomposition
        assert d.c[1] == (2,)
        assert d.cbar[1] == (-3,)

    def test_zero_bottom_rows(self):
        m = Matrix.from_rows([[1, 2], [0, 0]])
        d = decompose(m, Dimensions(1, 1))
        assert d.cbar == ((0,), (0,))

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            decompose(Matrix.from_rows([[1, 2], [3, 4]]), Dimensions(2, 2))


class TestFragmentMatrix:
    def test_worked_4x4(self, mset):
        s = fragment_matrix(mset.decomposition, (1, 4))
        assert s == Matrix.from_rows(
            [[3, 0, 0, 1], [1, 0, 0, 2], [0, 0, 1, 0], [0, -1, 2, 0]]
        )

    def test_k_sigma_one(self, kset):
        assert fragment_matrix(kset.decomposition, (1,)) == Matrix.from_rows(
            [[1, 0], [0, -3]]
        )

    def test_l_sigma_two(self, lset):
        assert fragment_matrix(lset.decomposition, (2,)) == Matrix.from_rows(
            [[0, 2], [-1, 0]]
        )

    def test_wrong_subset_size(self, mset):
        with pytest.raises(DimensionError):
            fragment_matrix(mset.decomposition, (1,))

    def test_column_zero_blocks(self, mset):
        d = mset.decomposition
        for sigma in subsets(4, 2):
            s = fragment_matrix(d, sigma)
            for i in range(1, 5):
                col = s.column(i - 1)
                if i in sigma:
                    assert col[2:] == (0, 0)
                else:
                    assert col[:2] == (0, 0)


class TestCSubmatrices:
    def test_worked_4x4(self, mset):
        c, cbar = c_submatrices(mset.decomposition, (1, 4))
        assert c == Matrix.from_rows([[3, 1], [1, 2]])
        assert cbar == Matrix.from_rows([[0, 1], [-1, 2]])

    def test_top_pair(self, mset):
        c, _ = c_submatrices(mset.decomposition, (1, 2))
        assert c == Matrix.from_rows([[3, 2], [1, 0]])

    def test_empty_subset(self, mset):
        c, cbar = c_submatrices(mset.decomposition, ())
        assert c.cols == 0 and c.rows == 2
        m = mset.decomposition.m
        negated_bottom = Matrix.from_rows(
            [[-m.entry(2 + i, j) for j in range(4)] for i in range(2)]
        )
        assert cbar == negated_bottom

    def test_general_sizes(self, mset):
        c, cbar = c_submatrices(mset.decomposition, (2,))
        assert c.cols == 1 and cbar.cols == 3


class TestFragmentSet:
    def test_worked_4x4_classes(self, mset):
        assert mset.by_class(POSITIVE) == ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4))
        assert mset.by_class(NEGATIVE) == ((3, 4),)
        assert mset.by_class(DEGENERATE) == ()

    def test_k_both_negative(self, kset):
        assert kset[(1,)].det_s == -3
        assert kset[(2,)].det_s == -2
        assert kset.by_class(NEGATIVE) == ((1,), (2,))

    def test_identity_has_degenerate(self):
        fs = fragment_set(decompose(Matrix.identity(2), Dimensions(1, 1)))
        assert fs[(1,)].sign_class == NEGATIVE
        assert fs[(1,)].det_s == -1
        assert fs[(2,)].sign_class == DEGENERATE
        assert fs[(2,)].det_s == 0

    def test_class_partition(self, mset):
        everything = (
            set(mset.by_class(POSITIVE))
            | set(mset.by_class(NEGATIVE))
            | set(mset.by_class(DEGENERATE))
        )
        assert everything == set(mset.sigmas())
        assert len(mset.sigmas()) == 6


class TestIdentities:
    def test_laplace_k(self, kset):
        assert laplace_identity(kset) == (-5, -5)

    def test_laplace_l(self, lset):
        assert laplace_identity(lset) == (-3, -3)

    def test_laplace_worked_4x4(self, mset):
        lhs, rhs = laplace_identity(mset)
        assert lhs == rhs == 37
        assert [f.det_s for f in mset] == [2, 10, 5, 24, 16, -20]

    @pytest.mark.parametrize(
        "sigma,pair",
        [
            ((1, 4), (5, 5)),
            ((3, 4), (-20, -20)),
            ((1, 3), (10, 10)),
        ],
    )
    def test_factorization_pairs(self, mset, sigma, pair):
        assert sandc_identity(mset, sigma) == pair

    def test_factorization_factors(self, mset):
        # frozen factor values for two of the families
        frag = mset[(3, 4)]
        assert det(frag.c) == -10
        assert det(frag.cbar) == 2
        assert shuffle_sign((3, 4), 4) == 1
        frag = mset[(2, 4)]
        assert det(frag.c) == 4
        assert det(frag.cbar) == -4
        assert shuffle_sign((2, 4), 4) == -1

    def test_factorization_all_sigmas(self, mset, kset, lset):
        for fs in (mset, kset, lset):
            for sigma in fs.sigmas():
                lhs, rhs = sandc_identity(fs, sigma)
                assert lhs == rhs

    @given(st.integers(0, 10**6))
    def test_identities_on_random_matrices(self, seed):
        rng = random.Random(seed)
        dims = random_dims(rng)
        m = random_int_matrix(rng, dims.n)
        fs = fragment_set(decompose(m, dims))
        lhs, rhs = laplace_identity(fs)
        assert lhs == rhs
        for sigma in fs.sigmas():
            a, b = sandc_identity(fs, sigma)
            assert a == b


def test_complement():
    assert complement((1, 4), 5) == (2, 3, 5)
    assert complement((), 3) == (1, 2, 3)


def test_expected_coverage(mset, kset, lset):
    assert mset.expected_coverage() == 1
    assert kset.expected_coverage() == -1
    assert lset.expected_coverage() == -1
