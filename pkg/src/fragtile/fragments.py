"""Fragment matrices of an invertible square matrix.

A matrix M of size (r+k) x (r+k) splits columnwise into a top part c_i (first
r entries of column i) and a negated bottom part cbar_i (the last k entries of
column i are -cbar_i).  For every r-subset sigma of column indices, the
sigma-fragment matrix keeps the top parts on sigma, the bottom parts on the
complement, and zeroes the rest; its determinant is one summand of the
multi-row Laplace expansion of (-1)^k det(M).  Subsets are 1-based and always
kept sorted; families are enumerated in lexicographic order so every report is
deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Mapping

from .linalg import (
    BlockPermutation,
    DimensionError,
    Matrix,
    det,
    perm_sign,
)

SubsetIndex = tuple[int, ...]

POSITIVE = "positive"
NEGATIVE = "negative"
DEGENERATE = "degenerate"


class DegenerateFragmentError(Exception):
    """A fragment with determinant zero was used where invertibility is required."""


@dataclass(frozen=True)
class Dimensions:
    """Global split of the ambient dimension into r top and k bottom coordinates."""

    r: int
    k: int

    def __post_init__(self):
        if self.r < 1 or self.k < 1:
            raise DimensionError(f"r and k must be positive, got r={self.r} k={self.k}")

    @property
    def n(self) -> int:
        return self.r + self.k


@dataclass(frozen=True)
class Decomposition:
    """Columnwise split of M into top parts c_i and negated bottom parts cbar_i."""

    dims: Dimensions
    m: Matrix
    c: tuple[tuple[Fraction, ...], ...]
    cbar: tuple[tuple[Fraction, ...], ...]


def subsets(n: int, size: int) -> Iterator[SubsetIndex]:
    """All sorted size-subsets of {1..n} in lexicographic order."""
    return combinations(range(1, n + 1), size)


def normalize_subset(sigma: Iterable[int], n: int) -> SubsetIndex:
    s = tuple(sorted(sigma))
    if len(set(s)) != len(s) or any(not (1 <= i <= n) for i in s):
        raise DimensionError(f"invalid index subset {s} of [{n}]")
    return s


def complement(sigma: Iterable[int], n: int) -> SubsetIndex:
    inside = set(sigma)
    return tuple(i for i in range(1, n + 1) if i not in inside)


def shuffle_sign(sigma: SubsetIndex, n: int) -> int:
    """Sign of the block permutation (sigma, complement of sigma) of {1..n}."""
    return perm_sign(BlockPermutation((sigma, complement(sigma, n))))


def decompose(m: Matrix, dims: Dimensions) -> Decomposition:
    """Split M into the c_i / cbar_i column pieces (bottom parts negated)."""
    n = dims.n
    if m.rows != n or m.cols != n:
        raise DimensionError(f"matrix is {m.rows}x{m.cols}, expected {n}x{n}")
    c = []
    cbar = []
    for i in range(n):
        col = m.column(i)
        c.append(col[: dims.r])
        cbar.append(tuple(-x for x in col[dims.r :]))
    return Decomposition(dims=dims, m=m, c=tuple(c), cbar=tuple(cbar))


def fragment_matrix(d: Decomposition, sigma: Iterable[int]) -> Matrix:
    """The fragment matrix for an r-subset sigma.

    Column i is the zero-padded top part c_i when i is in sigma and the
    zero-padded bottom part cbar_i otherwise.
    """
    dims = d.dims
    sigma = normalize_subset(sigma, dims.n)
    if len(sigma) != dims.r:
        raise DimensionError(f"subset {sigma} must have size r={dims.r}")
    inside = set(sigma)
    zeros_r = (Fraction(0),) * dims.r
    zeros_k = (Fraction(0),) * dims.k
    cols = []
    for i in range(1, dims.n + 1):
        if i in inside:
            cols.append(d.c[i - 1] + zeros_k)
        else:
            cols.append(zeros_r + d.cbar[i - 1])
    return Matrix.from_columns(cols)


def c_submatrices(d: Decomposition, sigma: Iterable[int]) -> tuple[Matrix, Matrix]:
    """(C_sigma, Cbar_complement): top columns on sigma, bottom columns off it.

    sigma may have any size; the facet machinery needs sizes r-1 and r+1 as
    well as the fragment case r.
    """
    dims = d.dims
    sigma = normalize_subset(sigma, dims.n)
    sigma_hat = complement(sigma, dims.n)
    c = Matrix.from_columns([d.c[i - 1] for i in sigma], rows=dims.r)
    cbar = Matrix.from_columns([d.cbar[j - 1] for j in sigma_hat], rows=dims.k)
    return c, cbar


@dataclass(frozen=True)
class Fragment:
    """One member of the indexed fragment family."""

    sigma: SubsetIndex
    s: Matrix
    c: Matrix
    cbar: Matrix
    det_s: Fraction
    sign_class: str


class FragmentSet:
    """The full fragment family of one decomposition, indexed by sigma.

    Iteration and the ``fragments`` mapping follow lexicographic subset
    order.  Instances are immutable after construction.
    """

    def __init__(self, decomposition: Decomposition):
        self.decomposition = decomposition
        self.dims = decomposition.dims
        self.det_m = det(decomposition.m)
        frags: dict[SubsetIndex, Fragment] = {}
        for sigma in subsets(self.dims.n, self.dims.r):
            s = fragment_matrix(decomposition, sigma)
            c, cbar = c_submatrices(decomposition, sigma)
            det_s = det(s)
            if det_s > 0:
                sign_class = POSITIVE
            elif det_s < 0:
                sign_class = NEGATIVE
            else:
                sign_class = DEGENERATE
            frags[sigma] = Fragment(sigma, s, c, cbar, det_s, sign_class)
        self.fragments: Mapping[SubsetIndex, Fragment] = frags

    def __iter__(self) -> Iterator[Fragment]:
        return iter(self.fragments.values())

    def __getitem__(self, sigma: Iterable[int]) -> Fragment:
        return self.fragments[normalize_subset(sigma, self.dims.n)]

    def sigmas(self) -> tuple[SubsetIndex, ...]:
        return tuple(self.fragments.keys())

    def by_class(self, sign_class: str) -> tuple[SubsetIndex, ...]:
        return tuple(f.sigma for f in self if f.sign_class == sign_class)

    def expected_coverage(self) -> int:
        """Net signed cover count at every point: (-1)^k * sign(det M)."""
        if self.det_m == 0:
            raise DegenerateFragmentError("matrix is singular; no tiling to cover")
        s = 1 if self.det_m > 0 else -1
        return s if self.dims.k % 2 == 0 else -s


def fragment_set(d: Decomposition) -> FragmentSet:
    return FragmentSet(d)


def sandc_identity(fs: FragmentSet, sigma: Iterable[int]) -> tuple[Fraction, Fraction]:
    """Both sides of det(S_sigma) = det(C_sigma) * det(Cbar_hat) * sgn(sigma, hat)."""
    frag = fs[sigma]
    rhs = det(frag.c) * det(frag.cbar) * shuffle_sign(frag.sigma, fs.dims.n)
    return frag.det_s, rhs


def laplace_identity(fs: FragmentSet) -> tuple[Fraction, Fraction]:
    """Both sides of the multi-row Laplace expansion (-1)^k det(M) = sum det(S_sigma)."""
    lhs = fs.det_m if fs.dims.k % 2 == 0 else -fs.det_m
    rhs = sum((f.det_s for f in fs), Fraction(0))
    return lhs, rhs
