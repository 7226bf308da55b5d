"""Distortion measurement, a heuristic embedding optimizer, and an exact
Euclidean-distortion oracle for tiny metric spaces.

Equivariant embeddings reduce distortion at scale R to a one-variable sup over
group elements (norms against word lengths), so the group path never stores
pairwise data.  The generic path brute-forces pairs of materialized points.
The c2 oracle solves minimize T subject to Q PSD and
d(i,j)^2 <= Q_ii + Q_jj - 2 Q_ij <= T d(i,j)^2 by bisection on T with
alternating projections between the PSD cone and the per-pair slabs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cayley import BallTable, bfs_ball
from .embed import EmbeddingBundle, embed_norms_all
from .errors import BadParam, BadScale, DegenerateInput, NoConvergence, ZeroNorm
from .groups import CodeSpace, identity, inv, mul, to_string

PAIRWISE_CAP = 512
C2_CAP = 16


@dataclass(frozen=True)
class DistortionReport:
    """Measured distortion at scale R.

    expansion = sup ||F(x) - F(y)|| / d(x, y) and contraction = sup of the
    reciprocal ratio, both over pairs with 0 < d <= R; dist is their product.
    Witnesses are (x, y) pairs attaining the sups, lexicographically smallest
    on ties; the equivariant path reports (identity, g).
    """

    R: float
    expansion: float
    contraction: float
    dist: float
    witness_expand: tuple
    witness_contract: tuple


class MetricTable:
    """Validated finite metric space.

    The matrix must be symmetric with zero diagonal, positive off the
    diagonal, and satisfy the triangle inequality within 1e-9.
    """

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        D = np.array(matrix, dtype=float)
        if D.ndim != 2 or D.shape[0] != D.shape[1]:
            raise BadParam(f"distance matrix must be square, got {D.shape}")
        n = D.shape[0]
        if not np.allclose(D, D.T, atol=1e-12):
            raise BadParam("distance matrix must be symmetric")
        if np.abs(np.diag(D)).max(initial=0.0) != 0.0:
            raise BadParam("distance matrix must have zero diagonal")
        off = D[~np.eye(n, dtype=bool)]
        if off.size and off.min() <= 0.0:
            raise BadParam("off-diagonal distances must be positive")
        for k in range(n):
            if (D > D[:, k, None] + D[None, k, :] + 1e-9).any():
                raise BadParam(f"triangle inequality fails through point {k}")
        D.setflags(write=False)
        self.matrix = D

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def __len__(self) -> int:
        return self.n


def _as_metric(metric) -> MetricTable:
    return metric if isinstance(metric, MetricTable) else MetricTable(metric)


def metric_from_table(table: BallTable) -> MetricTable:
    """Word metric of a fully enumerated group as a MetricTable."""
    if not table.complete:
        raise BadParam("metric extraction needs a complete enumeration")
    spec = table.spec
    n = len(table)
    D = np.zeros((n, n))
    for i, x in enumerate(table.elements):
        xi = inv(spec, x)
        for j in range(i + 1, n):
            d = table.word_length(mul(spec, xi, table.elements[j]))
            D[i, j] = D[j, i] = float(d)
    return MetricTable(D)


def distortion_equivariant(bundle: EmbeddingBundle, table: BallTable | None = None,
                           R: float | None = None) -> DistortionReport:
    """Distortion of the bundle's embedding over the whole group at scale R.

    R defaults to the diameter, making the result the unrestricted distortion.
    """
    if table is None:
        table = bfs_ball(bundle.spec, None)
    if not table.complete:
        raise BadParam("equivariant distortion needs a complete enumeration")
    spec = bundle.spec
    diam = len(table.sphere_sizes) - 1
    if R is None:
        R = diam
    if R < 1:
        raise BadParam(f"scale R = {R} must be >= 1")
    if R > diam:
        raise BadScale(f"scale R = {R} exceeds diameter {diam}")

    cs = CodeSpace(spec)
    norms = embed_norms_all(bundle)
    lengths = np.empty(spec.order, dtype=np.int64)
    lengths[cs.encode_many(table.elements)] = table.dists
    mask = (lengths >= 1) & (lengths <= R)
    if (norms[mask] == 0.0).any():
        bad = cs.decode(int(np.flatnonzero(mask & (norms == 0.0))[0]))
        raise ZeroNorm(f"embedding collapses {to_string(spec, bad)}")

    def arg_lex(ratios):
        top = ratios[mask].max()
        cand = np.flatnonzero(mask & (ratios == top))
        return top, min(cs.decode(int(c)) for c in cand)

    with np.errstate(divide="ignore", invalid="ignore"):
        exp_ratio = np.where(mask, norms / lengths, -np.inf)
        con_ratio = np.where(mask, lengths / norms, -np.inf)
    expansion, g_exp = arg_lex(exp_ratio)
    contraction, g_con = arg_lex(con_ratio)
    e = identity(spec)
    return DistortionReport(R=float(R), expansion=float(expansion),
                            contraction=float(contraction),
                            dist=float(expansion * contraction),
                            witness_expand=(e, g_exp), witness_contract=(e, g_con))


def distortion_pairwise(points, metric, p: float = 2.0,
                        R: float | None = None) -> DistortionReport:
    """Brute-force distortion of materialized points against a metric."""
    M = _as_metric(metric)
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] != M.n:
        raise BadParam(f"{M.n} metric points but point array of shape {X.shape}")
    D = M.matrix
    if R is None:
        R = float(D.max())
    if R <= 0:
        raise BadParam(f"scale R = {R} must be positive")

    expansion = contraction = -math.inf
    w_exp = w_con = None
    for i in range(M.n):
        for j in range(i + 1, M.n):
            d = D[i, j]
            if d > R:
                continue
            emb = float(np.sum(np.abs(X[i] - X[j]) ** p) ** (1.0 / p))
            if emb == 0.0:
                raise DegenerateInput(f"points {i} and {j} coincide at distance {d}")
            if emb / d > expansion:
                expansion, w_exp = emb / d, (i, j)
            if d / emb > contraction:
                contraction, w_con = d / emb, (i, j)
    if w_exp is None:
        raise DegenerateInput(f"no pairs at positive distance within R = {R}")
    return DistortionReport(R=float(R), expansion=expansion, contraction=contraction,
                            dist=expansion * contraction,
                            witness_expand=w_exp, witness_contract=w_con)


def report_json(report: DistortionReport, spec=None) -> dict:
    """JSON-ready report; witnesses as canonical strings when a spec is given."""
    def pair(w):
        return [to_string(spec, x) if spec is not None else x for x in w]

    return {
        "R": report.R,
        "expansion": report.expansion,
        "contraction": report.contraction,
        "dist": report.dist,
        "witness_expand": pair(report.witness_expand),
        "witness_contract": pair(report.witness_contract),
    }


def _mds_init(D: np.ndarray, dim: int) -> np.ndarray:
    n = D.shape[0]
    J = np.eye(n) - np.full((n, n), 1.0 / n)
    B = -0.5 * J @ (D ** 2) @ J
    w, V = np.linalg.eigh((B + B.T) / 2)
    idx = np.argsort(w)[::-1][:dim]
    coords = V[:, idx] * np.sqrt(np.maximum(w[idx], 0.0))
    out = np.zeros((n, dim))
    out[:, :coords.shape[1]] = coords
    return out


def _soft_loss_grad(X, D, p, beta, iu):
    i, j = iu
    diff = X[i] - X[j]
    emb = np.maximum(np.sum(np.abs(diff) ** p, axis=1) ** (1.0 / p), 1e-12)
    r = np.log(emb / D[i, j])
    up = beta * r
    dn = -beta * r
    loss = (_lse(up) + _lse(dn)) / beta
    w = _softmax(up) - _softmax(dn)
    # d r / d X[i] = |diff|^(p-1) sign(diff) / emb^p  (times chain weight)
    scale = (w / emb ** p)[:, None]
    g_pairs = scale * np.abs(diff) ** (p - 1.0) * np.sign(diff)
    grad = np.zeros_like(X)
    np.add.at(grad, i, g_pairs)
    np.add.at(grad, j, -g_pairs)
    return loss, grad


def _lse(v):
    m = v.max()
    return m + math.log(np.exp(v - m).sum())


def _softmax(v):
    m = np.exp(v - v.max())
    return m / m.sum()


def optimize_embedding(metric, p: float = 2.0, dim: int = 2, seed: int = 0,
                       restarts: int = 8, iters: int = 150):
    """Heuristic low-distortion embedding into R^dim under the lp norm.

    Descends a soft-max distortion surrogate with a rising temperature
    schedule, from a classical-scaling start plus seeded random restarts.
    The winner is re-measured exactly, so the returned report is always a
    valid upper bound regardless of optimizer state.  Returns (points, report).
    """
    M = _as_metric(metric)
    if M.n > PAIRWISE_CAP:
        raise BadParam(f"point count {M.n} exceeds {PAIRWISE_CAP}")
    if M.n < 2:
        raise DegenerateInput("need at least two points")
    if dim < 1:
        raise BadParam(f"dimension {dim} must be >= 1")
    D = M.matrix
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(M.n, 1)
    scale = float(D.max())

    best_points, best_report = None, None
    for trial in range(max(1, restarts)):
        X = _mds_init(D, dim) if trial == 0 else rng.normal(0.0, scale, (M.n, dim))
        for beta in (4.0, 16.0, 64.0):
            step = 0.1 * scale
            loss, grad = _soft_loss_grad(X, D, p, beta, iu)
            for _ in range(iters):
                while step > 1e-12:
                    cand = X - step * grad
                    new_loss, new_grad = _soft_loss_grad(cand, D, p, beta, iu)
                    if new_loss < loss:
                        X, loss, grad = cand, new_loss, new_grad
                        step *= 1.3
                        break
                    step *= 0.5
                else:
                    break
        try:
            report = distortion_pairwise(X, M, p)
        except DegenerateInput:
            continue
        if best_report is None or report.dist < best_report.dist:
            best_points, best_report = X.copy(), report
    if best_report is None:
        raise DegenerateInput("every restart collapsed some pair")
    return best_points, best_report


@dataclass(frozen=True)
class C2Result:
    """Exact minimal Euclidean distortion of a tiny metric.

    value = sqrt of the smallest feasible T; gram is a certificate Gram matrix
    for that T; bracket is the final (infeasible, feasible) T interval.
    """

    value: float
    gram: np.ndarray
    bracket: tuple[float, float]


def _project_feasible(D2: np.ndarray, T: float, Q0: np.ndarray,
                      sweeps: int = 1500, resid_tol: float = 1e-9):
    """Alternating projections onto {PSD} and the per-pair slabs.

    Returns (feasible, Q).  Infeasibility is declared on residual stagnation.
    """
    n = D2.shape[0]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    Q = Q0.copy()
    best_resid = math.inf
    since_improve = 0
    for _ in range(sweeps):
        w, V = np.linalg.eigh((Q + Q.T) / 2)
        Q = (V * np.maximum(w, 0.0)) @ V.T
        slab_gap = 0.0
        for i, j in pairs:
            v = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            tgt = min(max(v, D2[i, j]), T * D2[i, j])
            if tgt != v:
                slab_gap = max(slab_gap, abs(tgt - v))
                delta = (tgt - v) / 4.0
                Q[i, i] += delta
                Q[j, j] += delta
                Q[i, j] -= delta
                Q[j, i] -= delta
        neg = max(0.0, -float(np.linalg.eigvalsh((Q + Q.T) / 2).min()))
        resid = max(slab_gap, neg)
        if resid <= resid_tol:
            return True, Q
        if resid < best_resid * 0.995:
            best_resid, since_improve = resid, 0
        else:
            since_improve += 1
            if since_improve >= 150:
                return False, Q
    return False, Q


def exact_c2(metric, tol: float = 1e-6) -> C2Result:
    """Minimal Euclidean distortion by bisection on the squared distortion T."""
    M = _as_metric(metric)
    if M.n > C2_CAP:
        raise BadParam(f"point count {M.n} exceeds {C2_CAP}")
    if tol < 1e-6:
        raise BadParam(f"tol {tol} below the supported floor 1e-6")
    if M.n < 2:
        return C2Result(value=1.0, gram=np.zeros((M.n, M.n)), bracket=(1.0, 1.0))

    scale = float(M.matrix.max())
    D2 = (M.matrix / scale) ** 2
    Q = np.outer(np.ones(M.n), np.ones(M.n)) * 0.0
    ok, Q1 = _project_feasible(D2, 1.0, Q)
    if ok:
        return C2Result(value=1.0, gram=Q1 * scale ** 2, bracket=(1.0, 1.0))

    lo, hi = 1.0, 2.0
    ok, Qh = _project_feasible(D2, hi, Q1)
    while not ok:
        lo, hi = hi, hi * 2.0
        if hi > 2.0 ** 20:
            raise NoConvergence(f"no feasible T found below 2^20; bracket ({lo}, inf)")
        ok, Qh = _project_feasible(D2, hi, Qh)

    while hi - lo > tol * tol:
        mid = 0.5 * (lo + hi)
        ok, Qm = _project_feasible(D2, mid, Qh)
        if ok:
            hi, Qh = mid, Qm
        else:
            lo = mid
    w, V = np.linalg.eigh((Qh + Qh.T) / 2)
    gram = (V * np.maximum(w, 0.0)) @ V.T * scale ** 2
    return C2Result(value=math.sqrt(hi), gram=gram, bracket=(lo, hi))
