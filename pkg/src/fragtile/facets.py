"""Facets of tiles, their hyperplane collections, and the double-cover structure.

Each tile has 2(r+k) facets, indexed by the omitted generator j and a side
s in {0,1}.  Re-anchoring the s=1 facets by one lattice step (the "tilde"
parameterization) groups all facets into hyperplane collections: one per
(z, tau) with |tau| = r-1, collecting facets whose omitted generator carries a
top part, and one per (z, gamma) with |gamma| = r+1 for the bottom-part side.

Within a collection, every facet either increases or decreases the signed
cover count when crossed along the orientation w (the up/down split).  The up
facets and the down facets each project onto the same zonotope, once each,
which is why crossing a hyperplane never changes the cover count.  This module
makes all of that executable: exact facet geometry, the split, the kernel
certificate behind the zonotope tiling, sampled double-cover verification, and
exact crossing scans along rays.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import ceil, floor
from typing import Callable, Sequence

from .fragments import (
    DEGENERATE,
    DegenerateFragmentError,
    FragmentSet,
    SubsetIndex,
    complement,
    normalize_subset,
)
from .linalg import (
    BlockPermutation,
    DimensionError,
    LinalgError,
    Matrix,
    det,
    inverse,
    normalize_integer_direction,
    perm_sign,
    rat,
    solve,
    solve_affine,
    vec_add,
    vec_scale,
    vec_sub,
    vector,
)
from .tiling import (
    SAMPLE_DENOMINATOR,
    GenericDirection,
    GenericityError,
    TilingEngine,
)

TAU = "tau"
GAMMA = "gamma"


@dataclass(frozen=True)
class FacetId:
    """A facet in plain coordinates: side s of tile (z, sigma), omitting j."""

    z: tuple[int, ...]
    sigma: SubsetIndex
    j: int
    s: int


def _unit_step(z: Sequence[int], j: int, step: int) -> tuple[int, ...]:
    return tuple(zi + step if idx == j - 1 else zi for idx, zi in enumerate(z))


def tilde_facet(z: Sequence[int], sigma: Sequence[int], j: int, s: int) -> FacetId:
    """Resolve tilde parameters to the plain facet they name.

    The s=1 member is re-anchored one lattice step along e_j, toward lower z
    when j carries a top part (j in sigma) and toward higher z otherwise;
    s=0 members coincide with their plain form.
    """
    z = tuple(int(x) for x in z)
    sigma = tuple(sorted(sigma))
    if s not in (0, 1):
        raise DimensionError(f"facet side must be 0 or 1, got {s}")
    if j in sigma:
        return FacetId(z=_unit_step(z, j, -s), sigma=sigma, j=j, s=s)
    return FacetId(z=_unit_step(z, j, +s), sigma=sigma, j=j, s=s)


def collection_of(facet: FacetId, n: int) -> tuple[str, tuple[int, ...], SubsetIndex]:
    """The unique hyperplane collection containing a plain facet."""
    if facet.j in facet.sigma:
        tau = tuple(i for i in facet.sigma if i != facet.j)
        return TAU, _unit_step(facet.z, facet.j, facet.s), tau
    gamma = tuple(sorted(facet.sigma + (facet.j,)))
    return GAMMA, _unit_step(facet.z, facet.j, -facet.s), gamma


@dataclass(frozen=True)
class FacetCollection:
    """All tilde facets sharing one hyperplane, with degenerate members flagged."""

    kind: str
    z: tuple[int, ...]
    index: SubsetIndex
    members: tuple[FacetId, ...]
    degenerate: frozenset[FacetId]

    def live_members(self) -> tuple[FacetId, ...]:
        return tuple(f for f in self.members if f not in self.degenerate)


def facet_collection(
    fs: FragmentSet, kind: str, z: Sequence[int], index: Sequence[int]
) -> FacetCollection:
    dims = fs.dims
    index = normalize_subset(index, dims.n)
    z = tuple(int(x) for x in z)
    if kind == TAU:
        if len(index) != dims.r - 1:
            raise DimensionError(f"tau index must have size r-1, got {index}")
        pairs = [(j, tuple(sorted(index + (j,)))) for j in complement(index, dims.n)]
    elif kind == GAMMA:
        if len(index) != dims.r + 1:
            raise DimensionError(f"gamma index must have size r+1, got {index}")
        pairs = [(j, tuple(i for i in index if i != j)) for j in index]
    else:
        raise DimensionError(f"unknown collection kind {kind!r}")
    members = []
    dead = []
    for j, sigma in pairs:
        for s in (0, 1):
            facet = tilde_facet(z, sigma, j, s)
            members.append(facet)
            if fs[sigma].sign_class == DEGENERATE:
                dead.append(facet)
    return FacetCollection(
        kind=kind, z=z, index=index, members=tuple(members), degenerate=frozenset(dead)
    )


def lambda_vector(fs: FragmentSet, w: GenericDirection, sigma: Sequence[int]) -> tuple[Fraction, ...]:
    """Coordinates of w in the basis of the sigma fragment matrix."""
    frag = fs[sigma]
    if frag.sign_class == DEGENERATE:
        raise DegenerateFragmentError(f"fragment {frag.sigma} is degenerate")
    return solve(frag.s, w.w)


def facet_signs(fs: FragmentSet, w: GenericDirection, facet: FacetId) -> tuple[int, int]:
    """(wsgn, tsgn) of a facet.

    wsgn is +1 when a particle crossing the facet along w enters the facet's
    tile (the facet is the tile's included boundary on that side), which
    reduces to (-1)^s * sign of the omitted lambda coordinate; tsgn is the
    determinant sign of the tile's fragment.
    """
    frag = fs[facet.sigma]
    if frag.sign_class == DEGENERATE:
        raise DegenerateFragmentError(f"fragment {frag.sigma} is degenerate")
    lam_j = lambda_vector(fs, w, facet.sigma)[facet.j - 1]
    if lam_j == 0:
        raise GenericityError("zero lambda coordinate: direction not generic")
    wsgn = (1 if lam_j > 0 else -1) * (1 if facet.s == 0 else -1)
    tsgn = 1 if frag.det_s > 0 else -1
    return wsgn, tsgn


@dataclass(frozen=True)
class UpDownPartition:
    up: tuple[FacetId, ...]
    down: tuple[FacetId, ...]


def up_down_partition(
    fs: FragmentSet, w: GenericDirection, coll: FacetCollection
) -> UpDownPartition:
    """Split the live members by whether crossing them along w raises or
    lowers the signed cover count (sign of lambda_j times the fragment
    determinant, side-adjusted)."""
    up = []
    down = []
    for facet in coll.live_members():
        lam_j = lambda_vector(fs, w, facet.sigma)[facet.j - 1]
        product_sign = lam_j * fs[facet.sigma].det_s
        raises = (facet.s == 0) == (product_sign > 0)
        (up if raises else down).append(facet)
    return UpDownPartition(up=tuple(up), down=tuple(down))


def h_vector(fs: FragmentSet, w: GenericDirection, tau: Sequence[int]) -> tuple[Fraction, ...]:
    """Kernel certificate of the bottom-block column family off tau.

    Entry j (over the complement of tau, ascending) is
    det([C_tau | w']) * det(Cbar off tau+j) * sgn(tau, j, rest), the closed
    form of lambda_j times the fragment determinant.  The closed form stays
    defined when a fragment is degenerate and always lands in the kernel,
    which is verified exactly before returning.
    """
    dims = fs.dims
    tau = normalize_subset(tau, dims.n)
    if len(tau) != dims.r - 1:
        raise DimensionError(f"tau must have size r-1, got {tau}")
    d = fs.decomposition
    tau_hat = complement(tau, dims.n)
    lead_cols = [d.c[i - 1] for i in tau] + [w.w_prime]
    lead = det(Matrix.from_columns(lead_cols, rows=dims.r))
    h = []
    for j in tau_hat:
        rest = tuple(i for i in tau_hat if i != j)
        cbar_rest = Matrix.from_columns([d.cbar[i - 1] for i in rest], rows=dims.k)
        sgn = perm_sign(BlockPermutation((tau, (j,), rest)))
        h.append(lead * det(cbar_rest) * sgn)
    cbar_hat = Matrix.from_columns([d.cbar[i - 1] for i in tau_hat], rows=dims.k)
    residual = cbar_hat.mat_vec(tuple(h))
    if any(x != 0 for x in residual):
        raise LinalgError("kernel certificate failed its exact check")
    return tuple(h)


@dataclass(frozen=True)
class FacetGeometry:
    """Half-open affine cell: base + sum of x_i * generator_i.

    Coordinate i ranges over [0,1) when include_zero[i] is true and over
    (0,1] otherwise.  Generators must be linearly independent.
    """

    base: tuple[Fraction, ...]
    generators: tuple[tuple[Fraction, ...], ...]
    include_zero: tuple[bool, ...]

    def _matrix(self) -> Matrix:
        return Matrix.from_columns(self.generators, rows=len(self.base))

    def coordinates(self, point: Sequence) -> tuple[Fraction, ...] | None:
        """Exact coordinates of point in the generator frame, or None when the
        point lies outside the affine span."""
        rhs = vec_sub(vector(point), self.base)
        return solve_affine(self._matrix(), rhs)

    def contains(self, point: Sequence) -> bool:
        x = self.coordinates(point)
        if x is None:
            return False
        for xi, inc0 in zip(x, self.include_zero):
            if inc0:
                if not (0 <= xi < 1):
                    return False
            else:
                if not (0 < xi <= 1):
                    return False
        return True

    def on_closed_boundary(self, point: Sequence) -> bool:
        """True when the point lies in the closed cell touching a face."""
        x = self.coordinates(point)
        if x is None:
            return False
        if any(not (0 <= xi <= 1) for xi in x):
            return False
        return any(xi == 0 or xi == 1 for xi in x)


def facet_projections(
    fs: FragmentSet, w: GenericDirection, facet: FacetId
) -> tuple[FacetGeometry, FacetGeometry]:
    """Geometry of the facet's shadow on the first r and last k coordinates.

    The omitted generator j contributes only an offset (its top or bottom
    part, on the s=1 side); the remaining generators split between the two
    shadows by whether they carry a top or a bottom part, with half-open
    rules given by the matching lambda coordinates.
    """
    dims = fs.dims
    frag = fs[facet.sigma]
    if frag.sign_class == DEGENERATE:
        raise DegenerateFragmentError(f"fragment {frag.sigma} is degenerate")
    d = fs.decomposition
    lam = lambda_vector(fs, w, facet.sigma)
    mz = d.m.mat_vec(tuple(Fraction(x) for x in facet.z))
    in_sigma = facet.j in facet.sigma
    sigma_hat = complement(facet.sigma, dims.n)

    top_idx = [i for i in facet.sigma if i != facet.j]
    top_base = mz[: dims.r]
    if facet.s == 1 and in_sigma:
        top_base = vec_add(top_base, d.c[facet.j - 1])
    top = FacetGeometry(
        base=top_base,
        generators=tuple(d.c[i - 1] for i in top_idx),
        include_zero=tuple(lam[i - 1] > 0 for i in top_idx),
    )

    bottom_idx = [i for i in sigma_hat if i != facet.j]
    bottom_base = mz[dims.r :]
    if facet.s == 1 and not in_sigma:
        bottom_base = vec_add(bottom_base, d.cbar[facet.j - 1])
    bottom = FacetGeometry(
        base=bottom_base,
        generators=tuple(d.cbar[i - 1] for i in bottom_idx),
        include_zero=tuple(lam[i - 1] > 0 for i in bottom_idx),
    )
    return top, bottom


@dataclass
class DoubleCoverReport:
    kind: str
    index: SubsetIndex
    z: tuple[int, ...]
    sample_count: int
    redraws: int
    relative_points: tuple[tuple[Fraction, ...], ...]
    failures: tuple[tuple[tuple[Fraction, ...], int, int], ...]
    passed: bool


def double_cover_check(
    fs: FragmentSet,
    w: GenericDirection,
    index: Sequence[int],
    z: Sequence[int],
    sample_count: int,
    seed: int,
) -> DoubleCoverReport:
    """Sampled verification that up and down facets each cover the zonotope once.

    Points are drawn in the projected zonotope of the collection (coefficient
    vectors on the 2^-31 grid of [0,1)), redrawn while they touch any
    projected facet's closed boundary, and then must lie in exactly one up
    and exactly one down facet shadow.
    """
    dims = fs.dims
    n = dims.n
    index = normalize_subset(index, n)
    z = tuple(int(x) for x in z)
    d = fs.decomposition
    if len(index) == dims.r - 1:
        kind = TAU
        js = complement(index, n)
        col: Callable[[int], tuple[Fraction, ...]] = lambda i: d.cbar[i - 1]
        proj = lambda v: v[dims.r :]
        sigma_of = lambda j: tuple(sorted(index + (j,)))
        gen_idx_of = lambda sigma: complement(sigma, n)
    elif len(index) == dims.r + 1:
        kind = GAMMA
        js = index
        col = lambda i: d.c[i - 1]
        proj = lambda v: v[: dims.r]
        sigma_of = lambda j: tuple(i for i in index if i != j)
        gen_idx_of = lambda sigma: sigma
    else:
        raise DimensionError(
            f"index size {len(index)} is neither r-1={dims.r - 1} nor r+1={dims.r + 1}"
        )

    base = proj(d.m.mat_vec(tuple(Fraction(x) for x in z)))
    members = []
    for j in js:
        sigma = sigma_of(j)
        frag = fs[sigma]
        if frag.sign_class == DEGENERATE:
            continue
        gen_idx = gen_idx_of(sigma)
        cell = Matrix.from_columns([col(i) for i in gen_idx])
        cell_inv = inverse(cell)
        lam = solve(frag.s, w.w)
        rules = tuple(lam[i - 1] > 0 for i in gen_idx)
        s_up = 0 if lam[j - 1] * frag.det_s > 0 else 1
        members.append((j, cell_inv, rules, col(j), s_up))

    zono_cols = [col(j) for j in js]

    def cell_state(q_abs, cell_inv, rules, shift, s):
        rel = vec_sub(q_abs, base)
        if s == 1:
            rel = vec_sub(rel, shift)
        y = cell_inv.mat_vec(rel)
        closed = all(0 <= yi <= 1 for yi in y)
        touching = closed and any(yi == 0 or yi == 1 for yi in y)
        inside = True
        for yi, inc0 in zip(y, rules):
            if inc0:
                if not (0 <= yi < 1):
                    inside = False
                    break
            else:
                if not (0 < yi <= 1):
                    inside = False
                    break
        return inside, touching

    redraws = 0
    relative_points = []
    failures = []
    for idx in range(sample_count):
        attempt = 0
        while True:
            rng = random.Random(f"cover:{seed}:{idx}:{attempt}")
            coeffs = [
                Fraction(rng.randrange(0, SAMPLE_DENOMINATOR), SAMPLE_DENOMINATOR)
                for _ in js
            ]
            q_rel = tuple(
                sum((c * g[i] for c, g in zip(coeffs, zono_cols)), Fraction(0))
                for i in range(len(base))
            )
            q_abs = vec_add(q_rel, base)
            touched = False
            for _, cell_inv, rules, shift, _ in members:
                for s in (0, 1):
                    if cell_state(q_abs, cell_inv, rules, shift, s)[1]:
                        touched = True
                        break
                if touched:
                    break
            if not touched:
                break
            redraws += 1
            attempt += 1
        up = 0
        down = 0
        for _, cell_inv, rules, shift, s_up in members:
            if cell_state(q_abs, cell_inv, rules, shift, s_up)[0]:
                up += 1
            if cell_state(q_abs, cell_inv, rules, shift, 1 - s_up)[0]:
                down += 1
        relative_points.append(q_rel)
        if (up, down) != (1, 1):
            failures.append((q_rel, up, down))
    return DoubleCoverReport(
        kind=kind,
        index=index,
        z=z,
        sample_count=sample_count,
        redraws=redraws,
        relative_points=tuple(relative_points),
        failures=tuple(failures),
        passed=not failures,
    )


@dataclass(frozen=True)
class CrossingEvent:
    t: Fraction
    facets: tuple[FacetId, ...]
    sign_sum: int


@dataclass
class CrossingReport:
    start: tuple[Fraction, ...]
    reach: Fraction
    crossings: tuple[CrossingEvent, ...]
    f_values: tuple[int, ...]
    resamples: int
    cancellation_ok: bool
    constant: bool
    f_value: int | None
    passed: bool


def _collect_events(engine: TilingEngine, start, reach):
    """Exact facet-crossing times of the ray start + t*w over t in (0, reach).

    For every candidate tile whose fragment coordinates meet the closed unit
    box along the segment, each coordinate hitting 0 or 1 yields a rational
    crossing time; the hit is kept when the crossing point lies in the closed
    facet, and flagged when it touches the facet's own boundary.
    """
    n = engine.fs.dims.n
    a0 = engine.m_inv.mat_vec(start)
    aw = engine.m_inv.mat_vec(engine.w.w)
    events: dict[Fraction, list[tuple[FacetId, bool]]] = {}
    for frame in engine.frames:
        u = frame.s_inv.mat_vec(start)
        lam = frame.lam
        shift = [reach * l for l in lam]
        lo = []
        hi = []
        for i in range(n):
            e0 = a0[i]
            e1 = a0[i] + reach * aw[i]
            if e1 < e0:
                e0, e1 = e1, e0
            lo.append(ceil(e0 - frame.slack_pos[i]))
            hi.append(floor(e1 - frame.slack_neg[i]))
        if any(l > h for l, h in zip(lo, hi)):
            continue
        h_rows = frame.h.row_list()
        for z in product(*(range(l, h + 1) for l, h in zip(lo, hi))):
            y0 = [
                u[i] - sum(h_rows[i][j] * z[j] for j in range(n) if z[j])
                for i in range(n)
            ]
            outside = False
            for i in range(n):
                e0 = y0[i]
                e1 = y0[i] + shift[i]
                if (e0 < 0 and e1 < 0) or (e0 > 1 and e1 > 1):
                    outside = True
                    break
            if outside:
                continue
            for i in range(n):
                for target in (0, 1):
                    t = (target - y0[i]) / lam[i]
                    if not (0 < t < reach):
                        continue
                    inside_closed = True
                    on_boundary = False
                    for m_idx in range(n):
                        if m_idx == i:
                            continue
                        ym = y0[m_idx] + t * lam[m_idx]
                        if ym < 0 or ym > 1:
                            inside_closed = False
                            break
                        if ym == 0 or ym == 1:
                            on_boundary = True
                    if inside_closed:
                        facet = FacetId(z=z, sigma=frame.sigma, j=i + 1, s=target)
                        events.setdefault(t, []).append((facet, on_boundary))
    return events


def _classify_events(engine: TilingEngine, events):
    """Group crossings by time; a crossing is degenerate when its point lies on
    some facet's boundary or on non-parallel facets.

    Distinct collections may share one hyperplane (their anchor translates
    differ along it), so parallelism is decided on the facet normals: the
    normal of the facet omitting generator j is row j of the fragment
    inverse.  Meeting two non-parallel hyperplanes at one point means the ray
    passes through the codimension-2 skeleton, which the pairing statement
    excludes.
    """
    frames_by_sigma = {fr.sigma: fr for fr in engine.frames}
    crossings = []
    for t in sorted(events):
        items = events[t]
        if any(flag for _, flag in items):
            return True, []
        normals = {
            normalize_integer_direction(
                frames_by_sigma[f.sigma].s_inv.row(f.j - 1)
            )
            for f, _ in items
        }
        if len(normals) > 1:
            return True, []
        sign_sum = 0
        for facet, _ in items:
            frame = frames_by_sigma[facet.sigma]
            lam_j = frame.lam[facet.j - 1]
            wsgn = (1 if lam_j > 0 else -1) * (1 if facet.s == 0 else -1)
            tsgn = 1 if frame.sign_class == "positive" else -1
            sign_sum += wsgn * tsgn
        facets = tuple(
            sorted((f for f, _ in items), key=lambda f: (f.sigma, f.z, f.j, f.s))
        )
        crossings.append(CrossingEvent(t=t, facets=facets, sign_sum=sign_sum))
    return False, crossings


def crossing_check(
    fs: FragmentSet,
    w: GenericDirection,
    p: Sequence,
    reach,
    seed: int,
    max_resamples: int = 10,
) -> CrossingReport:
    """Scan the ray p + t*w, t in (0, reach), and verify crossing invariance.

    At every crossing time the signed cover count is evaluated just before
    and just after (at half the gap to the nearest other crossing) and the
    wsgn*tsgn contributions of the facets met there are summed.  A start on a
    tile boundary is first nudged along w; rays whose crossing points hit
    facet boundaries or several hyperplanes at once are resampled nearby,
    since the pairing statement excludes those configurations.
    """
    engine = TilingEngine(fs, w)
    reach = rat(reach)
    if reach <= 0:
        raise DimensionError("reach must be positive")
    p0 = vector(p)
    for attempt in range(max_resamples + 1):
        if attempt == 0:
            start = p0
        else:
            rng = random.Random(f"crossing:{seed}:{attempt}")
            jitter = tuple(
                Fraction(rng.randint(-(2**31 - 1), 2**31 - 1), 2**43) for _ in p0
            )
            start = vec_add(p0, jitter)
        _, boundary = engine.tiles_at(start)
        events = _collect_events(engine, start, reach)
        if boundary:
            ts = sorted(events)
            delta0 = ts[0] / 2 if ts else reach / 2
            start = vec_add(start, vec_scale(delta0, w.w))
            _, boundary = engine.tiles_at(start)
            if boundary:
                continue
            events = _collect_events(engine, start, reach)
        degenerate, crossings = _classify_events(engine, events)
        if degenerate:
            continue
        f_values = []
        if crossings:
            ts = [c.t for c in crossings]
            for i, t in enumerate(ts):
                prev_t = ts[i - 1] if i > 0 else Fraction(0)
                next_t = ts[i + 1] if i + 1 < len(ts) else reach
                delta = min(t - prev_t, next_t - t) / 2
                for t_eval in (t - delta, t + delta):
                    point = vec_add(start, vec_scale(t_eval, w.w))
                    f_values.append(engine.coverage(point).f_value)
        else:
            for t_eval in (reach / 4, 3 * reach / 4):
                point = vec_add(start, vec_scale(t_eval, w.w))
                f_values.append(engine.coverage(point).f_value)
        cancellation_ok = all(c.sign_sum == 0 for c in crossings)
        constant = len(set(f_values)) == 1
        return CrossingReport(
            start=start,
            reach=reach,
            crossings=tuple(crossings),
            f_values=tuple(f_values),
            resamples=attempt,
            cancellation_ok=cancellation_ok,
            constant=constant,
            f_value=f_values[0] if constant else None,
            passed=cancellation_ok and constant,
        )
    raise GenericityError(
        f"ray stayed degenerate after {max_resamples} resamples; seed {seed}"
    )
