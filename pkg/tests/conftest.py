"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's own code paths: cofactor
expansion for determinants, the Cramer quotient for solving, signed maximal
minors for kernels, and wide-box scans for tile location.  Expected values in
the tests were frozen from these oracles.
"""
from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import settings

from fragtile import (
    Dimensions,
    Matrix,
    certify_direction,
    decompose,
    fragment_set,
)

settings.register_profile("suite", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("suite")


K_ROWS = [[1, 2], [-1, 3]]
L_ROWS = [[1, 2], [1, 5]]
M_ROWS = [
    [3, 2, -4, 1],
    [1, 0, 2, 2],
    [2, 0, -1, 1],
    [0, 1, -2, 3],
]


@pytest.fixture(scope="session")
def kset():
    return fragment_set(decompose(Matrix.from_rows(K_ROWS), Dimensions(1, 1)))


@pytest.fixture(scope="session")
def lset():
    return fragment_set(decompose(Matrix.from_rows(L_ROWS), Dimensions(1, 1)))


@pytest.fixture(scope="session")
def mset():
    return fragment_set(decompose(Matrix.from_rows(M_ROWS), Dimensions(2, 2)))


@pytest.fixture(scope="session")
def w_k(kset):
    return certify_direction(kset, [1, 1])


@pytest.fixture(scope="session")
def w_l(lset):
    # (1, 1) is not generic for this matrix: its second inverse coordinate
    # vanishes, so the fixtures use (1, 2).
    return certify_direction(lset, [1, 2])


@pytest.fixture(scope="session")
def w_m(mset):
    return certify_direction(mset, [1, 1, 1, 1])


def invoke(argv):
    """Run the CLI in-process, capturing (exit code, stdout, stderr)."""
    import io
    from contextlib import redirect_stderr, redirect_stdout

    from fragtile.cli import run

    out = io.StringIO()
    err = io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = run(argv)
    return code, out.getvalue(), err.getvalue()


def det_cofactor(m: Matrix) -> Fraction:
    """First-row cofactor expansion; exponential, fine for n <= 5."""
    n = m.rows
    if n == 0:
        return Fraction(1)
    if n == 1:
        return m.entry(0, 0)
    total = Fraction(0)
    for j in range(n):
        if m.entry(0, j) == 0:
            continue
        minor = Matrix.from_rows(
            [[m.entry(i, c) for c in range(n) if c != j] for i in range(1, n)]
        )
        total += (-1) ** j * m.entry(0, j) * det_cofactor(minor)
    return total


def cramer_solve(a: Matrix, b) -> tuple[Fraction, ...]:
    """Solution entries as quotients of column-replaced determinants."""
    n = a.rows
    d = det_cofactor(a)
    out = []
    for i in range(n):
        cols = [list(a.column(j)) if j != i else list(b) for j in range(n)]
        out.append(det_cofactor(Matrix.from_columns(cols)) / d)
    return tuple(out)


def kernel_by_minors(v: Matrix) -> tuple[Fraction, ...]:
    """Alternating signed maximal minors: an exact kernel vector of a
    k x (k+1) matrix (possibly zero when the rank drops)."""
    n = v.cols
    out = []
    for i in range(n):
        sub = Matrix.from_columns(
            [v.column(j) for j in range(n) if j != i], rows=v.rows
        )
        out.append((-1) ** i * det_cofactor(sub))
    return tuple(out)


def random_int_matrix(rng: random.Random, n: int, lo: int = -5, hi: int = 5) -> Matrix:
    return Matrix.from_rows([[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)])


def random_invertible(rng: random.Random, n: int, lo: int = -5, hi: int = 5) -> Matrix:
    while True:
        m = random_int_matrix(rng, n, lo, hi)
        if det_cofactor(m) != 0:
            return m


def random_dims(rng: random.Random, max_n: int = 6) -> Dimensions:
    r = rng.randint(1, max_n - 1)
    k = rng.randint(1, max_n - r)
    return Dimensions(r, k)


def brute_force_tiles(fs, w, p, margin: int = 1):
    """Tile location by scanning a widened candidate box with the public
    half-open membership test; independent of the engine's search."""
    from itertools import product
    from math import ceil, floor

    from fragtile import TileId, inverse, pip_contains, vector

    m = fs.decomposition.m
    m_inv = inverse(m)
    p = vector(p)
    a = m_inv.mat_vec(p)
    found = []
    for frag in fs:
        if frag.sign_class == "degenerate":
            continue
        g = m_inv.mat_mul(frag.s)
        lo = []
        hi = []
        for i in range(m.rows):
            pos = sum((x for x in g.row(i) if x > 0), Fraction(0))
            neg = sum((x for x in g.row(i) if x < 0), Fraction(0))
            lo.append(ceil(a[i] - pos) - margin)
            hi.append(floor(a[i] - neg) + margin)
        for z in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
            mz = m.mat_vec(tuple(Fraction(v) for v in z))
            q = tuple(pi - mi for pi, mi in zip(p, mz))
            if pip_contains(frag.s, w.w, q):
                found.append(TileId(z=z, sigma=frag.sigma))
    return sorted(found, key=lambda t: (t.sigma, t.z))


def clip_polygon_area(subject, window) -> Fraction:
    """Sutherland-Hodgman clip of a convex polygon against an axis box,
    then the shoelace area; exact throughout."""
    x0, x1, y0, y1 = window
    edges = [
        lambda p: p[0] - x0,
        lambda p: x1 - p[0],
        lambda p: p[1] - y0,
        lambda p: y1 - p[1],
    ]
    poly = list(subject)
    for inside in edges:
        if not poly:
            return Fraction(0)
        clipped = []
        for i, cur in enumerate(poly):
            prev = poly[i - 1]
            cur_in = inside(cur) >= 0
            prev_in = inside(prev) >= 0
            if cur_in != prev_in:
                t = inside(prev) / (inside(prev) - inside(cur))
                clipped.append(
                    (
                        prev[0] + t * (cur[0] - prev[0]),
                        prev[1] + t * (cur[1] - prev[1]),
                    )
                )
            if cur_in:
                clipped.append(cur)
        poly = clipped
    area = Fraction(0)
    for i, cur in enumerate(poly):
        prev = poly[i - 1]
        area += prev[0] * cur[1] - cur[0] * prev[1]
    return abs(area) / 2
