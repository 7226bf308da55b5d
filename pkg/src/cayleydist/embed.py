"""Equivariant lp embeddings assembled from profile certificates.

The map sends g to the direct sum over blocks k of coef_k * (f_k - lambda(g)f_k),
where f_0 is the dirac at the identity with coefficient 1 and f_k (k >= 1) is a
certified profile witness at radius 2^k with coefficient 2^k / certified_J_k.
For the sol family a planar circle coordinate driven by the time component is
appended, normalized so adjacent points sit at distance exactly 1.

Distances are equivariant (||F(g) - F(h)|| depends only on h^-1 g), so
embed_norm is the production path; embed_point materializes coordinates for
desk-scale verification only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .cayley import BallTable, bfs_ball
from .errors import BadParam, BadScale, CapExceeded
from .groups import CodeSpace, Element, GroupSpec, identity, inv, mul, spec_to_dict
from .profile import TestVector, profile_curve

POINT_CAP = 1 << 24


@dataclass(frozen=True)
class CircleMap:
    """Z/q placed on a circle through the origin, scaled so that consecutive
    points are at distance exactly 1.  The cyclic word metric distorts by at
    most pi/2 under this map.
    """

    q: int

    def __post_init__(self):
        if self.q < 3:
            raise BadParam(f"circle needs q >= 3, got {self.q}")

    @property
    def c_q(self) -> float:
        return 2.0 * self.q * math.sin(math.pi / self.q)

    def point(self, t: int) -> np.ndarray:
        theta = 2.0 * math.pi * (t % self.q) / self.q
        scale = self.q / self.c_q
        return np.array([scale * (1.0 - math.cos(theta)), scale * math.sin(theta)])

    def chord(self, k: int) -> float:
        """Distance between points t and t + k, any t."""
        return 2.0 * self.q * math.sin(math.pi * (abs(k) % self.q) / self.q) / self.c_q


def circle_embed(q: int, t: int) -> np.ndarray:
    """Planar image of t under the normalized circle map on Z/q."""
    return CircleMap(q).point(t)


@dataclass(frozen=True)
class EmbeddingBundle:
    """Frozen description of one embedding: certificates, coefficients, and
    the optional circle coordinate.  C_hat = max coefficient over k >= 1 (1.0
    when there are no profile blocks), the measured linear-profile constant at
    the bundle's own dyadic radii.
    """

    spec: GroupSpec
    p: float
    R: int
    K: int
    vectors: tuple[TestVector, ...]
    coefs: tuple[float, ...]
    C_hat: float
    circle: CircleMap | None

    def blocks(self):
        """Yield (radius, coefficient, values) for k = 0..K."""
        yield 1, self.coefs[0], {identity(self.spec): 1.0}
        for k, tv in enumerate(self.vectors, start=1):
            yield tv.radius, self.coefs[k], tv.values


class AprioriBound(NamedTuple):
    lip_bound: float
    colip_bound: float
    dist_bound: float
    closed_form: float


@lru_cache(maxsize=8)
def _codespace(spec: GroupSpec) -> CodeSpace:
    return CodeSpace(spec)


def build_bundle(spec: GroupSpec, p: float = 2.0, R: int | None = None,
                 table: BallTable | None = None) -> EmbeddingBundle:
    """Assemble the embedding at scale R.

    R defaults to the diameter; for the sol family it defaults to the kernel
    diameter (the circle coordinate covers the time direction) and the planar
    block is always attached.  Profile blocks sit at radii 2^k for
    k = 1..K with K = floor(log2(R/2)), so every block radius is at most R/2.
    """
    if not spec.finite:
        raise BadParam(f"embeddings need a finite family, got {spec.family}")
    if not 2 <= p < math.inf:
        raise BadParam(f"exponent p = {p} outside [2, inf)")
    if table is None:
        table = bfs_ball(spec, None)
    diam = len(table.sphere_sizes) - 1
    if R is None:
        if spec.family == "sol-fin":
            diam_n = max(d for x, d in zip(table.elements, table.dists) if x[1] == 0)
            R = max(2, diam_n)
        else:
            R = diam
    R = int(R)
    if R < 2:
        raise BadParam(f"scale R = {R} must be >= 2")
    if R > diam:
        raise BadScale(f"scale R = {R} exceeds diameter {diam}")

    K = (R // 2).bit_length() - 1
    radii = [2 ** k for k in range(1, K + 1)]
    if radii:
        curve = profile_curve(spec, p, radii, table=table)
        vectors = curve.vectors
        coefs = (1.0,) + tuple(
            (2.0 ** k) / tv.certified_J for k, tv in enumerate(vectors, start=1))
    else:
        vectors, coefs = (), (1.0,)
    c_hat = max(coefs[1:]) if K >= 1 else 1.0
    circle = CircleMap(spec.oA) if spec.family == "sol-fin" else None
    return EmbeddingBundle(spec=spec, p=p, R=R, K=K, vectors=vectors,
                           coefs=coefs, C_hat=c_hat, circle=circle)


def _gap_pow(spec: GroupSpec, values: dict, g: Element, p: float) -> float:
    """||f - lambda(g)f||_p^p for sparse f."""
    diff = {}
    for x, v in values.items():
        diff[x] = diff.get(x, 0.0) + v
        gx = mul(spec, g, x)
        diff[gx] = diff.get(gx, 0.0) - v
    return math.fsum(abs(v) ** p for v in diff.values())


def embed_norm(bundle: EmbeddingBundle, g: Element) -> float:
    """||F(g)||: block contributions in fixed order, then the circle chord."""
    p = bundle.p
    total = 0.0
    for _, coef, values in bundle.blocks():
        total += coef ** p * _gap_pow(bundle.spec, values, g, p)
    if bundle.circle is not None:
        total += bundle.circle.chord(g[1]) ** p
    return total ** (1.0 / p)


def embed_norms_all(bundle: EmbeddingBundle) -> np.ndarray:
    """||F(g)|| for every group element, indexed by CodeSpace code.

    Uses the correlation identity ||f - lambda(g)f||_p^p =
    2||f||_p^p + sum over support pairs (x, y) with x y^-1 = g of
    |f(x) - f(y)|^p - |f(x)|^p - |f(y)|^p, which costs one vectorized pass
    per support element instead of one per group element.
    """
    spec = bundle.spec
    p = bundle.p
    cs = _codespace(spec)
    order = spec.order
    total = np.zeros(order)
    for _, coef, values in bundle.blocks():
        supp = list(values)
        v = np.array([values[x] for x in supp])
        inv_codes = cs.encode_many([inv(spec, x) for x in supp])
        payload = cs.payload(inv_codes)
        vpow = np.abs(v) ** p
        corr = np.full(order, 2.0 * vpow.sum())
        for i, x in enumerate(supp):
            prod = cs.act_left(x, inv_codes, payload)
            np.add.at(corr, prod, np.abs(v[i] - v) ** p - vpow[i] - vpow)
        total += coef ** p * np.maximum(corr, 0.0)
    if bundle.circle is not None:
        chords = np.array([bundle.circle.chord(k) for k in range(spec.oA)])
        total += chords[np.arange(order) % spec.oA] ** p
    norms = total ** (1.0 / p)
    norms[cs.encode(identity(spec))] = 0.0  # exact, cancels fp residue
    return norms


def embed_dim(bundle: EmbeddingBundle) -> int:
    return (bundle.K + 1) * bundle.spec.order + (2 if bundle.circle else 0)


def embed_point(bundle: EmbeddingBundle, g: Element) -> np.ndarray:
    """Materialized coordinates of F(g), desk scale only.

    The flat lp norm of the result equals embed_norm(g) exactly when there is
    no circle block, and at p = 2 always (the circle pair is Euclidean).
    """
    spec = bundle.spec
    if spec.order * bundle.K > POINT_CAP:
        raise CapExceeded(
            f"coordinate count {spec.order * bundle.K} exceeds {POINT_CAP}")
    cs = _codespace(spec)
    out = np.zeros(embed_dim(bundle))
    for k, (_, coef, values) in enumerate(bundle.blocks()):
        off = k * spec.order
        for x, v in values.items():
            out[off + cs.encode(x)] += coef * v
            out[off + cs.encode(mul(spec, g, x))] -= coef * v
    if bundle.circle is not None:
        out[-2:] = bundle.circle.point(g[1])
    return out


def cocycle_defect(bundle: EmbeddingBundle, g: Element, h: Element) -> float:
    """lp norm of F(gh) - lambda(g)F(h) - F(g) over the lp blocks.

    Zero in exact arithmetic.  The circle coordinate is excluded: it moves by
    a rotation, not by the translation action.
    """
    spec = bundle.spec
    cs = _codespace(spec)
    order = spec.order
    n_coords = (bundle.K + 1) * order
    f_gh = embed_point(bundle, mul(spec, g, h))[:n_coords]
    f_g = embed_point(bundle, g)[:n_coords]
    f_h = embed_point(bundle, h)[:n_coords]
    src = cs.act_left(inv(spec, g), np.arange(order))
    shifted = np.empty(n_coords)
    for k in range(bundle.K + 1):
        sl = slice(k * order, (k + 1) * order)
        shifted[sl] = f_h[sl][src]
    defect = f_gh - shifted - f_g
    return float(np.sum(np.abs(defect) ** bundle.p) ** (1.0 / bundle.p))


def apriori_bound(bundle: EmbeddingBundle) -> AprioriBound:
    """Certified distortion bound at scale R.

    lip_bound sums the per-generator block gradients: the dirac block moves
    two unit entries (contribution 2), each profile block is normalized to
    gradient at most 1, and the circle moves by one chord.  colip_bound is
    the dyadic lower-bound factor 8 * 2^(-1/p).  closed_form evaluates
    2 * C_hat * (2 ln(R/2))^(1/p), the linear-profile form of the bound; it
    degenerates to 0 at R = 2 where the integral is empty.
    """
    p = bundle.p
    lip_pow = 2.0 + math.fsum(c ** p for c in bundle.coefs[1:])
    if bundle.circle is not None:
        lip_pow += 1.0
    lip = lip_pow ** (1.0 / p)
    colip = 8.0 * 2.0 ** (-1.0 / p)
    closed = 2.0 * bundle.C_hat * (2.0 * math.log(bundle.R / 2.0)) ** (1.0 / p)
    return AprioriBound(lip, colip, lip * colip, closed)


def bundle_json(bundle: EmbeddingBundle) -> dict:
    """JSON-ready manifest: scales, per-block certificates, circle parameters."""
    blocks = [{"radius": 1, "certified_J": None, "coef": 1.0, "support_size": 1}]
    for k, tv in enumerate(bundle.vectors, start=1):
        blocks.append({
            "radius": tv.radius,
            "certified_J": tv.certified_J,
            "coef": bundle.coefs[k],
            "support_size": len(tv.values),
        })
    circle = None
    if bundle.circle is not None:
        circle = {"q": bundle.circle.q, "c_q": bundle.circle.c_q}
    return {
        "spec": spec_to_dict(bundle.spec),
        "p": bundle.p,
        "R": bundle.R,
        "K": bundle.K,
        "C_hat": bundle.C_hat,
        "blocks": blocks,
        "circle": circle,
    }
