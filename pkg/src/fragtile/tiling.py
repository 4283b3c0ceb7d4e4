"""Signed tiling of R^(r+k) by translated fragment parallelepipeds.

A tile is a half-open parallelepiped of one invertible fragment matrix,
translated by an integer combination M*z of the columns of M.  Tiles inherit
the fragment's determinant sign, and the central quantity is the signed cover
count f(p): positive tiles containing p minus negative tiles containing p.

Half-openness is oriented by a fixed direction w: a boundary point belongs to
the tile exactly when a small push along w stays inside.  Every membership
predicate reduces to sign conditions on exact rationals, so w must be generic
(certified: no relevant coordinate vector N^-1 w has a zero entry).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, floor, lcm
from typing import Sequence

from .fragments import DEGENERATE, FragmentSet, SubsetIndex
from .linalg import (
    DimensionError,
    Matrix,
    SingularMatrixError,
    det,
    inverse,
    solve,
    vector,
)

SAMPLE_DENOMINATOR = 2**31


class GenericityError(Exception):
    """The direction vector w fails (or cannot satisfy) a genericity condition."""


@dataclass(frozen=True)
class GenericDirection:
    """A direction w together with the finite certificate that makes it generic.

    The certificate records, per checked matrix, how many coordinates of
    N^-1 w were verified nonzero: all invertible fragment matrices plus M
    itself.  That finite condition set also covers the restricted systems on
    the top and bottom blocks, since their coordinate vectors are subvectors
    of the fragment ones.
    """

    w: tuple[Fraction, ...]
    w_prime: tuple[Fraction, ...]
    w_double_prime: tuple[Fraction, ...]
    certificate: tuple[tuple[str, int], ...]


def _sigma_label(sigma: SubsetIndex) -> str:
    return "S{%s}" % ",".join(str(i) for i in sigma)


def certify_direction(fs: FragmentSet, w: Sequence) -> GenericDirection:
    """Check every genericity condition for w exactly; raise on any zero."""
    dims = fs.dims
    w = vector(w)
    if len(w) != dims.n:
        raise DimensionError(f"w has length {len(w)}, expected {dims.n}")
    checks: list[tuple[str, int]] = []
    for frag in fs:
        if frag.sign_class == DEGENERATE:
            continue
        lam = solve(frag.s, w)
        if any(x == 0 for x in lam):
            raise GenericityError(f"w is not generic: zero entry in {_sigma_label(frag.sigma)}^-1 w")
        checks.append((_sigma_label(frag.sigma), dims.n))
    minv_w = solve(fs.decomposition.m, w)
    if any(x == 0 for x in minv_w):
        raise GenericityError("w is not generic: zero entry in M^-1 w")
    checks.append(("M", dims.n))
    return GenericDirection(
        w=w,
        w_prime=w[: dims.r],
        w_double_prime=w[dims.r :],
        certificate=tuple(checks),
    )


def choose_generic_direction(fs: FragmentSet, seed: int, max_tries: int = 64) -> GenericDirection:
    """Seed-deterministic generic direction with entries in (0,1).

    Numerators are drawn uniformly from [1, 2^31) over the fixed denominator
    2^31 and the candidate is certified exactly; failures redraw.  With
    entries this fine a failure is essentially impossible, but the retry
    budget keeps the procedure total.
    """
    n = fs.dims.n
    for attempt in range(max_tries):
        rng = random.Random(f"direction:{seed}:{attempt}")
        w = tuple(
            Fraction(rng.randint(1, SAMPLE_DENOMINATOR - 1), SAMPLE_DENOMINATOR)
            for _ in range(n)
        )
        try:
            return certify_direction(fs, w)
        except GenericityError:
            continue
    raise GenericityError(f"no generic direction found after {max_tries} draws")


def pip_contains(n_mat: Matrix, w: Sequence, q: Sequence) -> bool:
    """Exact membership of q in the half-open parallelepiped of n_mat.

    The parallelepiped of a singular matrix is empty.  Otherwise q belongs
    iff its coordinate vector y = n_mat^-1 q satisfies 0 <= y_i < 1 where
    (n_mat^-1 w)_i > 0 and 0 < y_i <= 1 where it is negative.
    """
    if det(n_mat) == 0:
        return False
    w = vector(w)
    q = vector(q)
    lam = solve(n_mat, w)
    if any(x == 0 for x in lam):
        raise GenericityError("direction is not generic for this parallelepiped")
    y = solve(n_mat, q)
    for yi, li in zip(y, lam):
        if li > 0:
            if not (0 <= yi < 1):
                return False
        else:
            if not (0 < yi <= 1):
                return False
    return True


@dataclass(frozen=True)
class TileId:
    """One tile: the sigma-fragment parallelepiped translated by M*z."""

    z: tuple[int, ...]
    sigma: SubsetIndex


@dataclass(frozen=True)
class CoverageReport:
    point: tuple[Fraction, ...]
    tiles: tuple[tuple[TileId, str], ...]
    f_value: int
    expected: int

    @property
    def census(self) -> tuple[int, int]:
        pos = sum(1 for _, cls in self.tiles if cls == "positive")
        neg = sum(1 for _, cls in self.tiles if cls == "negative")
        return pos, neg


@dataclass
class VerifyReport:
    sample_count: int
    seed: int
    expected: int
    distinct_f_values: frozenset[int]
    census_histogram: dict[tuple[int, int], int]
    boundary_redraws: int
    passed: bool


class _Frame:
    """Per-fragment point-location data with an integer-only inner test.

    The coordinate vector of p - M z in the fragment basis is
    u - H z with u = S^-1 p and H = S^-1 M.  Clearing denominators once per
    query point turns each candidate test into integer multiply-adds.
    """

    __slots__ = (
        "sigma",
        "sign_class",
        "s",
        "s_inv",
        "lam",
        "rules",
        "h",
        "h_rows",
        "h_denom",
        "slack_pos",
        "slack_neg",
        "_scaled_cache",
    )

    def __init__(self, frag, m: Matrix, m_inv: Matrix, w: GenericDirection):
        self.sigma = frag.sigma
        self.sign_class = frag.sign_class
        self.s = frag.s
        self.s_inv = inverse(frag.s)
        self.lam = self.s_inv.mat_vec(w.w)
        if any(x == 0 for x in self.lam):
            raise GenericityError(f"direction not generic on fragment {frag.sigma}")
        self.rules = tuple(x > 0 for x in self.lam)
        h = self.s_inv.mat_mul(m)
        self.h = h
        self.h_denom = lcm(*(e.denominator for e in (x for row in h.row_list() for x in row)))
        self.h_rows = [
            [int(x * self.h_denom) for x in h.row(i)] for i in range(h.rows)
        ]
        g = m_inv.mat_mul(frag.s)
        self.slack_pos = tuple(
            sum((x for x in g.row(i) if x > 0), Fraction(0)) for i in range(g.rows)
        )
        self.slack_neg = tuple(
            sum((x for x in g.row(i) if x < 0), Fraction(0)) for i in range(g.rows)
        )
        self._scaled_cache: dict[int, list[list[int]]] = {}

    def scaled_rows(self, full_denom: int) -> list[list[int]]:
        rows = self._scaled_cache.get(full_denom)
        if rows is None:
            mult = full_denom // self.h_denom
            rows = [[e * mult for e in row] for row in self.h_rows]
            if len(self._scaled_cache) > 8:
                self._scaled_cache.clear()
            self._scaled_cache[full_denom] = rows
        return rows


class TilingEngine:
    """Point location for the signed tiling of one fragment set.

    The candidate integer translates z for a query point p are bounded per
    coordinate by interval arithmetic on M^-1 S_sigma, then each candidate is
    tested exactly.  Results are independent of evaluation order.
    """

    def __init__(self, fs: FragmentSet, w: GenericDirection):
        if fs.det_m == 0:
            raise SingularMatrixError("tiling requires an invertible matrix")
        self.fs = fs
        self.w = w
        self.m = fs.decomposition.m
        self.m_inv = inverse(self.m)
        self.expected = fs.expected_coverage()
        self.frames = [
            _Frame(frag, self.m, self.m_inv, w)
            for frag in fs
            if frag.sign_class != DEGENERATE
        ]

    def candidate_box(self, frame: _Frame, a: Sequence[Fraction], widen: int = 0):
        """Per-coordinate integer range of translates whose tile could contain p."""
        lo = [ceil(ai - sp) - widen for ai, sp in zip(a, frame.slack_pos)]
        hi = [floor(ai - sn) + widen for ai, sn in zip(a, frame.slack_neg)]
        return lo, hi

    def tiles_at(self, p: Sequence[Fraction]) -> tuple[list[tuple[TileId, str]], int]:
        """All tiles containing p, plus a count of closed-boundary incidences.

        A boundary incidence is a candidate whose coordinate vector lies in
        the closed unit box with some coordinate exactly 0 or 1; the half-open
        rules still decide membership, the count only flags the event.
        """
        p = vector(p)
        a = self.m_inv.mat_vec(p)
        found: list[tuple[TileId, str]] = []
        boundary = 0
        for frame in self.frames:
            u = frame.s_inv.mat_vec(p)
            denom = lcm(frame.h_denom, *(x.denominator for x in u))
            u_int = [int(x * denom) for x in u]
            h_int = frame.scaled_rows(denom)
            lo, hi = self.candidate_box(frame, a)
            if any(l > h for l, h in zip(lo, hi)):
                continue
            rules = frame.rules
            n = len(u_int)
            for z in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
                inside = True
                on_edge = False
                closed_inside = True
                for i in range(n):
                    row = h_int[i]
                    num = u_int[i] - sum(row[j] * z[j] for j in range(n))
                    if num < 0 or num > denom:
                        inside = False
                        closed_inside = False
                        break
                    if num == 0:
                        on_edge = True
                        if not rules[i]:
                            inside = False
                    elif num == denom:
                        on_edge = True
                        if rules[i]:
                            inside = False
                if closed_inside and on_edge:
                    boundary += 1
                if inside:
                    found.append((TileId(z=z, sigma=frame.sigma), frame.sign_class))
        return found, boundary

    def coverage(self, p: Sequence[Fraction]) -> CoverageReport:
        tiles, _ = self.tiles_at(p)
        pos = sum(1 for _, cls in tiles if cls == "positive")
        neg = sum(1 for _, cls in tiles if cls == "negative")
        return CoverageReport(
            point=vector(p),
            tiles=tuple(tiles),
            f_value=pos - neg,
            expected=self.expected,
        )


def enumerate_tiles_at(fs: FragmentSet, w: GenericDirection, p: Sequence) -> list[TileId]:
    """All (z, sigma) whose tile contains p, in (sigma, z) lexicographic order."""
    tiles, _ = TilingEngine(fs, w).tiles_at(vector(p))
    return [tile for tile, _ in tiles]


def coverage_value(fs: FragmentSet, w: GenericDirection, p: Sequence) -> CoverageReport:
    return TilingEngine(fs, w).coverage(vector(p))


def verify_constancy(
    fs: FragmentSet, w: GenericDirection, sample_count: int, seed: int
) -> VerifyReport:
    """Sample the fundamental domain and check the cover count is constant.

    Points are drawn as p = M u with u uniform on the 2^-31 grid of [0,1)^n;
    by lattice periodicity of the tiling, constancy there is constancy
    everywhere.  Samples that land exactly on a tile boundary are redrawn
    (and counted), so the verifier never has to adjudicate ties.
    """
    engine = TilingEngine(fs, w)
    n = fs.dims.n
    m = fs.decomposition.m
    expected = engine.expected
    histogram: dict[tuple[int, int], int] = {}
    values: set[int] = set()
    redraws = 0
    for index in range(sample_count):
        attempt = 0
        while True:
            rng = random.Random(f"sample:{seed}:{index}:{attempt}")
            u = tuple(
                Fraction(rng.randrange(0, SAMPLE_DENOMINATOR), SAMPLE_DENOMINATOR)
                for _ in range(n)
            )
            p = m.mat_vec(u)
            tiles, boundary = engine.tiles_at(p)
            if boundary == 0:
                break
            redraws += 1
            attempt += 1
        pos = sum(1 for _, cls in tiles if cls == "positive")
        neg = sum(1 for _, cls in tiles if cls == "negative")
        values.add(pos - neg)
        key = (pos, neg)
        histogram[key] = histogram.get(key, 0) + 1
    return VerifyReport(
        sample_count=sample_count,
        seed=seed,
        expected=expected,
        distinct_f_values=frozenset(values),
        census_histogram=dict(sorted(histogram.items())),
        boundary_redraws=redraws,
        passed=values == {expected},
    )


def average_identity(fs: FragmentSet) -> tuple[Fraction, Fraction]:
    """Both sides of the exact mean-value identity sum det(S_sigma) = (-1)^k det(M).

    The integral of the signed cover count over the fundamental parallelepiped
    collapses to this determinant sum, so the check is symbolic.
    """
    lhs = sum((f.det_s for f in fs), Fraction(0))
    rhs = fs.det_m if fs.dims.k % 2 == 0 else -fs.det_m
    return lhs, rhs
