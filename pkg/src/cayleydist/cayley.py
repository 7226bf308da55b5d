"""Word metrics on Cayley graphs: balls, diameters, quotient girth, kernel growth.

All metric data is derived from breadth-first search over the generating set
returned by :func:`cayleydist.groups.generators` (or one passed explicitly).
BFS expands neighbors in generator-list order with a FIFO queue, so element
order, distances, and every downstream report are deterministic.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import BadParam, CapExceeded, FamilyMismatch, InfiniteNeedsRadius
from .groups import Element, GroupSpec, generators, identity, inv, mul, project

VERTEX_CAP = 1 << 22
INF_RADIUS_CAP = 40


@dataclass(frozen=True)
class BallTable:
    """Closed ball of a given radius around the identity, with exact distances.

    ``elements`` is in BFS discovery order, so word lengths are nondecreasing;
    ``index`` inverts it.  ``complete`` marks a table covering the whole group.
    """

    spec: GroupSpec
    radius: int
    elements: tuple[Element, ...]
    index: dict
    dists: tuple[int, ...]
    sphere_sizes: tuple[int, ...]
    complete: bool
    gens: tuple[Element, ...]

    def __len__(self) -> int:
        return len(self.elements)

    def word_length(self, x: Element, default=None):
        i = self.index.get(x)
        return self.dists[i] if i is not None else default

    def pair_distance(self, x: Element, y: Element, default=None):
        """d(x, y) = word length of x^-1 y, when that element lies in the table."""
        return self.word_length(mul(self.spec, inv(self.spec, x), y), default)

    def ball_size(self, r: int) -> int:
        return sum(self.sphere_sizes[: r + 1])


def bfs_ball(spec: GroupSpec, radius: int | None = None,
             gens: tuple[Element, ...] | None = None,
             cap: int = VERTEX_CAP) -> BallTable:
    """Enumerate the closed ball of the given radius (whole group if None)."""
    if gens is None:
        gens = generators(spec)
    if radius is None:
        if not spec.finite:
            raise InfiniteNeedsRadius(f"{spec.family} needs an explicit radius")
    else:
        if radius < 0:
            raise BadParam(f"radius {radius} must be >= 0")
        if not spec.finite and radius > INF_RADIUS_CAP:
            raise CapExceeded(f"radius {radius} > {INF_RADIUS_CAP} on an infinite family")

    e = identity(spec)
    dist: dict[Element, int] = {e: 0}
    elements: list[Element] = [e]
    queue: deque[Element] = deque([e])
    while queue:
        x = queue.popleft()
        d = dist[x]
        if radius is not None and d == radius:
            continue
        for g in gens:
            y = mul(spec, x, g)
            if y not in dist:
                if len(dist) >= cap:
                    raise CapExceeded(f"ball exceeds vertex cap {cap}")
                dist[y] = d + 1
                elements.append(y)
                queue.append(y)

    dists = tuple(dist[x] for x in elements)
    maxd = dists[-1] if elements else 0
    sphere = [0] * (maxd + 1)
    for d in dists:
        sphere[d] += 1
    complete = spec.finite and len(elements) == spec.order
    return BallTable(
        spec=spec,
        radius=radius if radius is not None else maxd,
        elements=tuple(elements),
        index={x: i for i, x in enumerate(elements)},
        dists=dists,
        sphere_sizes=tuple(sphere),
        complete=complete,
        gens=tuple(gens),
    )


@dataclass(frozen=True)
class DiameterReport:
    """Eccentricity of the identity; equals the diameter by vertex-transitivity.

    For the sol family, ``diam_N`` is the largest word length over the plane
    subgroup {(v, 0)} with the metric induced from the whole group.
    """

    spec: GroupSpec
    diameter: int
    diam_N: int | None = None


def diameter(spec: GroupSpec, gens: tuple[Element, ...] | None = None,
             cap: int = VERTEX_CAP) -> DiameterReport:
    if not spec.finite:
        raise BadParam(f"diameter needs a finite family, got {spec.family}")
    table = bfs_ball(spec, None, gens=gens, cap=cap)
    diam = len(table.sphere_sizes) - 1
    diam_N = None
    if spec.family == "sol-fin":
        diam_N = max(d for x, d in zip(table.elements, table.dists) if x[1] == 0)
    return DiameterReport(spec=spec, diameter=diam, diam_N=diam_N)


@dataclass(frozen=True)
class GirthReport:
    """How far the quotient map preserves the local metric.

    ``g_lower`` is min(cap, length of the shortest nontrivial element collapsed
    to the identity); ``kernel_witness`` is that element when found within cap.
    ``iso_lower`` is the largest radius r <= cap at which the projection is a
    bijective isometry from the parent r-ball onto the quotient r-ball, with
    ``iso_witness`` a colliding or distance-dropping pair at iso_lower + 1.
    """

    parent: GroupSpec
    quotient: GroupSpec
    cap: int
    g_lower: int
    iso_lower: int
    kernel_witness: Element | None
    iso_witness: tuple[Element, Element] | None


def _ball_isometric(parent, quotient, big: BallTable, qtable: BallTable, r: int):
    """Check the radius-r balls match through project; big has radius 2r."""
    elems_r = [x for x, d in zip(big.elements, big.dists) if d <= r]
    qcount = qtable.ball_size(min(r, len(qtable.sphere_sizes) - 1))

    all_images = [project(parent, quotient, x) for x in big.elements]
    if len(set(all_images)) == len(all_images) and len(elems_r) == qcount:
        # injectivity on the double ball forces distance preservation:
        # a dropped distance would lift to a second preimage inside it
        return True, None

    images = all_images[: len(elems_r)]
    seen: dict[Element, Element] = {}
    for x, y in zip(elems_r, images):
        if y in seen:
            return False, (seen[y], x)
        seen[y] = x
    if len(elems_r) != qcount:
        return False, None
    for i in range(len(elems_r)):
        for j in range(i + 1, len(elems_r)):
            dp = big.pair_distance(elems_r[i], elems_r[j])
            dq = qtable.pair_distance(images[i], images[j])
            if dp != dq:
                return False, (elems_r[i], elems_r[j])
    return True, None


def girth(parent: GroupSpec, quotient: GroupSpec, cap: int,
          vertex_cap: int = VERTEX_CAP) -> GirthReport:
    """Girth of the quotient map, capped; see GirthReport for both readings."""
    if cap < 1:
        raise BadParam(f"cap {cap} must be >= 1")
    project(parent, quotient, identity(parent))  # validates the pair

    ptable = bfs_ball(parent, cap, cap=vertex_cap)
    e_q = identity(quotient)
    kernel_witness = None
    shortest = None
    for x, d in zip(ptable.elements[1:], ptable.dists[1:]):
        if project(parent, quotient, x) == e_q:
            kernel_witness, shortest = x, d
            break
    g_lower = cap if shortest is None else min(cap, shortest)

    qtable = bfs_ball(quotient, None)
    iso_lower = 0
    iso_witness = None
    for r in range(1, cap + 1):
        big = bfs_ball(parent, 2 * r, cap=vertex_cap)
        ok, witness = _ball_isometric(parent, quotient, big, qtable, r)
        if not ok:
            iso_witness = witness
            break
        iso_lower = r

    return GirthReport(parent=parent, quotient=quotient, cap=cap,
                       g_lower=g_lower, iso_lower=iso_lower,
                       kernel_witness=kernel_witness, iso_witness=iso_witness)


@dataclass(frozen=True)
class ExpRadicalReport:
    """Growth of the plane subgroup {(v, 0)} against the ambient word metric.

    ``rows`` holds (r, min log-norm, max log-norm) over kernel elements of word
    length exactly r; radii whose sphere misses the subgroup are omitted.
    ``alpha_upper`` bounds max log-norm / r from above, ``alpha_lower`` bounds
    r / max log-norm (rows with zero max log-norm skipped), and ``alpha_hat``
    is the larger of the two: a single constant sandwiching the growth.
    """

    spec: GroupSpec
    r_max: int
    rows: tuple[tuple[int, float, float], ...]
    alpha_upper: float
    alpha_lower: float | None
    alpha_hat: float


def _sol_norm_inf(spec: GroupSpec, v: tuple[int, int]) -> int:
    if spec.family == "sol-inf":
        return max(abs(v[0]), abs(v[1]))
    n = spec.n
    return max(min(v[0], n - v[0]) if v[0] else 0,
               min(v[1], n - v[1]) if v[1] else 0)


def exp_radical_scan(spec: GroupSpec, r_max: int,
                     cap: int = VERTEX_CAP) -> ExpRadicalReport:
    """Per-radius extremes of log-norm over the plane subgroup, plus fit."""
    if spec.family not in ("sol-fin", "sol-inf"):
        raise FamilyMismatch(f"exponential-kernel scan needs a sol family, got {spec.family}")
    if r_max < 1:
        raise BadParam(f"r_max {r_max} must be >= 1")
    if spec.family == "sol-inf" and r_max > 20:
        raise CapExceeded(f"r_max {r_max} > 20 on the infinite family")

    if spec.finite:
        table = bfs_ball(spec, None, cap=cap)
        r_max = min(r_max, len(table.sphere_sizes) - 1)
    else:
        table = bfs_ball(spec, r_max, cap=cap)

    extremes: dict[int, tuple[int, int]] = {}
    for x, d in zip(table.elements, table.dists):
        if d == 0 or d > r_max or x[1] != 0:
            continue
        norm = _sol_norm_inf(spec, x[0])
        lo, hi = extremes.get(d, (norm, norm))
        extremes[d] = (min(lo, norm), max(hi, norm))

    rows = tuple(
        (r, math.log(lo), math.log(hi))
        for r, (lo, hi) in sorted(extremes.items())
    )
    alpha_upper = max((hi / r for r, _lo, hi in rows), default=0.0)
    lower_terms = [r / hi for r, _lo, hi in rows if hi > 0.0]
    alpha_lower = max(lower_terms) if lower_terms else None
    alpha_hat = max(alpha_upper, alpha_lower) if alpha_lower is not None else alpha_upper
    return ExpRadicalReport(spec=spec, r_max=r_max, rows=rows,
                            alpha_upper=alpha_upper, alpha_lower=alpha_lower,
                            alpha_hat=alpha_hat)


def sphere_csv(table: BallTable) -> str:
    """Sphere sizes as CSV: r, sphere, cumulative."""
    lines = ["r,sphere,cumulative"]
    total = 0
    for r, s in enumerate(table.sphere_sizes):
        total += s
        lines.append(f"{r},{s},{total}")
    return "\n".join(lines) + "\n"


def exp_radical_csv(report: ExpRadicalReport) -> str:
    """Kernel growth rows as CSV: r, min_log_norm, max_log_norm."""
    lines = ["r,min_log_norm,max_log_norm"]
    for r, lo, hi in report.rows:
        lines.append(f"{r},{lo:.12g},{hi:.12g}")
    return "\n".join(lines) + "\n"
