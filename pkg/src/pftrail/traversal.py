"""Evaluation and sampling of plane-filling traversals.

Every curve piece is a similar copy of a generator's limit curve. A piece
is stored as a complex affine map ``z -> A + B * z`` (``conj(z)`` when
mirrored), a flag telling whether the target curve runs backwards in
global parameter order, the target generator, and its parameter
interval ``[t0, t0 + w]``. The piece's gates are ``A`` and ``A + B``, so
``|B|`` is the distance between them.
"""
from __future__ import annotations

import bisect
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, NamedTuple

import numpy as np

from .curvedef import CurveDefinition, Similarity, Vec2, segment_transforms

__all__ = [
    "SamplePoint", "Samples", "ExpansionBound", "NonContractingError",
    "NotOnCurveError", "point_at", "expansion_radius", "sample",
    "sample_chunks", "sample_arrays", "closeup", "inverse_at",
    "bounding_box", "spiral_growth_per_revolution", "gates", "closeup_exponent",
]

# point evaluation without an explicit depth descends until the parameter
# is used up, i.e. the product of piece weights drops below this
T_RESOLUTION = 2.0 ** -60
MAX_LEVELS = 4096
MIN_SCALE = 1e-15
# smallest parameter width worth splitting; keeps leaf t0 values distinct
MIN_WIDTH = 1e-14
# fraction of the inverse tolerance left to the final piece size
INVERSE_SLACK = 0.1


class NonContractingError(ValueError):
    pass


class NotOnCurveError(LookupError):
    pass


class SamplePoint(NamedTuple):
    t: float
    position: Vec2
    on_jump: bool


@dataclass
class Samples:
    """Columnar batch of sample points, ordered by strictly increasing t."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    on_jump: np.ndarray

    def __len__(self):
        return len(self.t)

    @classmethod
    def empty(cls) -> "Samples":
        z = np.empty(0)
        return cls(z, z.copy(), z.copy(), np.empty(0, bool))

    @classmethod
    def concat(cls, parts: Iterable["Samples"]) -> "Samples":
        parts = list(parts)
        if not parts:
            return cls.empty()
        return cls(*(np.concatenate([getattr(p, f) for p in parts])
                     for f in ("t", "x", "y", "on_jump")))

    def points(self) -> Iterator[SamplePoint]:
        for t, x, y, j in zip(self.t.tolist(), self.x.tolist(),
                              self.y.tolist(), self.on_jump.tolist()):
            yield SamplePoint(t, Vec2(x, y), j)


@dataclass(frozen=True)
class ExpansionBound:
    radius: float
    depth_used: int


# ---------------------------------------------------------------------------
# compiled form

@dataclass(frozen=True)
class _Gen:
    A: np.ndarray       # child map translation (reversal folded in)
    B: np.ndarray       # child map multiplier
    m: np.ndarray       # child map mirrors
    rev: np.ndarray
    target: np.ndarray
    W: np.ndarray       # cumulative weight at child start
    w: np.ndarray
    scale: np.ndarray   # contraction factors c_i


@dataclass(frozen=True)
class _Curve:
    defn: CurveDefinition
    gens: tuple[_Gen, ...]
    start: int

    @property
    def c_max(self) -> float:
        return max(float(g.scale.max()) for g in self.gens)

    def reachable(self) -> list[int]:
        seen = [self.start]
        for gi in seen:
            for tgt in self.gens[gi].target.tolist():
                if tgt not in seen:
                    seen.append(tgt)
        return seen


@lru_cache(maxsize=128)
def _compile(defn: CurveDefinition) -> _Curve:
    ids = {g.id: i for i, g in enumerate(defn.generators)}
    gens = []
    for g in defn.generators:
        st = segment_transforms(g, defn)
        a = np.array([s.similarity.translation.to_complex() for s in st])
        b = np.array([s.similarity.multiplier for s in st])
        rev = np.array([s.reversed for s in st])
        # a reversed piece is S(1 - f(1 - u)): fold z -> 1 - z into the map
        A = np.where(rev, a + b, a)
        B = np.where(rev, -b, b)
        w = np.array([s.weight for s in st])
        W = np.concatenate([[0.0], np.cumsum(w)[:-1]])
        gens.append(_Gen(A, B, np.array([s.similarity.mirrored for s in st]),
                         rev, np.array([ids[s.target] for s in st]), W, w,
                         np.array([s.similarity.scale for s in st])))
    return _Curve(defn, tuple(gens), ids[defn.start])


def _curve(defn) -> _Curve:
    return defn if isinstance(defn, _Curve) else _compile(defn)


def _check_contracting(c: _Curve):
    if c.c_max >= 1.0 - 1e-12:
        raise NonContractingError(
            f"{c.defn.name}: contraction factor {c.c_max:.6g} >= 1")


# ---------------------------------------------------------------------------
# point evaluation

def _raw_point(c: _Curve, t: float, depth: int | None, left: bool = False) -> complex:
    """f(t) of the unrestricted curve; ``left`` selects the left limit.

    With ``depth=None`` the descent runs until the parameter is resolved,
    which for weakly contracting pieces takes well over a hundred levels."""
    A, B, m = 0j, 1 + 0j, False
    g, s = c.start, t
    width = 1.0
    for _ in range(MAX_LEVELS if depth is None else depth):
        if abs(B) < MIN_SCALE or (depth is None and width < T_RESOLUTION):
            break
        G = c.gens[g]
        W = G.W
        if left:
            i = max(bisect.bisect_left(W, s) - 1, 0)
        else:
            i = min(bisect.bisect_right(W, s) - 1, len(W) - 1)
        u = min(max((s - W[i]) / G.w[i], 0.0), 1.0)
        if G.rev[i]:
            u = 1.0 - u
            left = not left
        a, b = complex(G.A[i]), complex(G.B[i])
        if m:
            a, b = a.conjugate(), b.conjugate()
        A, B = A + B * a, B * b
        m ^= bool(G.m[i])
        width *= G.w[i]
        g, s = int(G.target[i]), u
    return A + B * s


def gates(defn: CurveDefinition, depth: int | None = None) -> tuple[complex, complex]:
    """Raw-frame endpoints of the (possibly restricted) curve."""
    c = _curve(defn)
    if defn.restriction is None:
        return 0j, 1 + 0j
    t0, t1 = defn.restriction
    return _raw_point(c, t0, depth), _raw_point(c, t1, depth, left=True)


def point_at(defn: CurveDefinition, t: float, depth: int | None = None) -> Vec2:
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter {t} outside [0, 1]")
    if depth is not None and depth < 1:
        raise ValueError("depth must be >= 1")
    c = _curve(defn)
    if defn.restriction is None:
        return Vec2.from_complex(_raw_point(c, t, depth, left=(t == 1.0)))
    t0, t1 = defn.restriction
    g0, g1 = gates(defn, depth)
    p = _raw_point(c, t0 + (t1 - t0) * t, depth, left=(t == 1.0))
    return Vec2.from_complex((p - g0) / (g1 - g0))


# ---------------------------------------------------------------------------
# piece expansion

@dataclass
class _Pieces:
    A: np.ndarray
    B: np.ndarray
    m: np.ndarray
    flip: np.ndarray
    g: np.ndarray
    t0: np.ndarray
    w: np.ndarray

    @classmethod
    def root(cls, gen: int) -> "_Pieces":
        return cls(np.array([0j]), np.array([1 + 0j]), np.zeros(1, bool),
                   np.zeros(1, bool), np.array([gen]), np.zeros(1), np.ones(1))

    def __len__(self):
        return len(self.t0)

    def take(self, idx) -> "_Pieces":
        return _Pieces(*(getattr(self, f)[idx] for f in _FIELDS))

    @classmethod
    def concat(cls, parts) -> "_Pieces":
        return cls(*(np.concatenate([getattr(p, f) for p in parts]) for f in _FIELDS))

    @property
    def start(self):
        return np.where(self.flip, self.A + self.B, self.A)

    @property
    def end(self):
        return np.where(self.flip, self.A, self.A + self.B)


_FIELDS = ("A", "B", "m", "flip", "g", "t0", "w")


def _children(p: _Pieces, c: _Curve) -> _Pieces:
    parts = []
    for gi in np.unique(p.g).tolist():
        sel = p.take(p.g == gi)
        G = c.gens[gi]
        a = np.where(sel.m[:, None], np.conj(G.A)[None, :], G.A[None, :])
        b = np.where(sel.m[:, None], np.conj(G.B)[None, :], G.B[None, :])
        A = sel.A[:, None] + sel.B[:, None] * a
        B = sel.B[:, None] * b
        m = sel.m[:, None] ^ G.m[None, :]
        flip = sel.flip[:, None] ^ G.rev[None, :]
        off = np.where(sel.flip[:, None], 1.0 - G.W - G.w, G.W[None, :])
        t0 = sel.t0[:, None] + off * sel.w[:, None]
        w = sel.w[:, None] * G.w[None, :]
        g = np.broadcast_to(G.target[None, :], A.shape)
        parts.append(_Pieces(A.ravel(), B.ravel(), m.ravel(), flip.ravel(),
                             g.ravel(), t0.ravel(), w.ravel()))
    return _Pieces.concat(parts)


# ---------------------------------------------------------------------------
# expansion radius

def _gate_dist(v: np.ndarray, g0: complex = 0j, g1: complex = 1 + 0j) -> np.ndarray:
    return np.minimum(np.abs(v - g0), np.abs(v - g1))


def expansion_radius(defn: CurveDefinition, depth: int = 6) -> ExpansionBound:
    """Upper bound R such that every piece with gate distance d stays
    within d*R of its nearer gate.

    With V_j the largest gate distance over level-j refinement vertices and
    c the largest contraction, every point lies in a level-j piece of scale
    at most c**j, so the supremum S over all generators satisfies
    ``S <= V_j + c**j * S``, i.e. ``S <= V_j / (1 - c**j)``. The smallest
    of these bounds is then refined once more per generator as
    ``min_j V_j + c**j * S``, and the maximum over reachable generators is
    returned. Restricted curves are bounded separately from the pieces
    overlapping the restriction interval.
    """
    c = _curve(defn)
    _check_contracting(c)
    depth = max(int(depth), 1)
    cm = c.c_max
    V = {}
    for gi in c.reachable():
        p = _Pieces.root(gi)
        levels = []
        for _ in range(depth):
            p = _children(p, c)
            levels.append(float(max(_gate_dist(p.A).max(),
                                    _gate_dist(p.A + p.B).max())))
        V[gi] = levels
    coarse = max(v[0] for v in V.values()) / (1.0 - cm)
    # the same recursion closed on itself: sup <= V_j / (1 - c**j)
    coarse = min([coarse] + [max(v[j] for v in V.values()) / (1.0 - cm ** (j + 1))
                             for j in range(depth)])
    radius = max(min(v[j] + cm ** (j + 1) * coarse for j in range(depth))
                 for v in V.values())
    if defn.restriction is not None:
        radius = max(radius, _restricted_radius(c, radius, depth))
    return ExpansionBound(radius, depth)


def _restricted_radius(c: _Curve, r_gen: float, depth: int) -> float:
    t_lo, t_hi = c.defn.restriction
    g0, g1 = gates(c.defn)
    p = _Pieces.root(c.start)
    for _ in range(depth):
        p = _children(p, c)
        p = p.take((p.t0 < t_hi) & (p.t0 + p.w > t_lo))
    bound = (np.maximum(_gate_dist(p.A, g0, g1), _gate_dist(p.A + p.B, g0, g1))
             + np.abs(p.B) * r_gen)
    return float(bound.max()) / abs(g1 - g0)


def spiral_growth_per_revolution(sim: Similarity) -> float:
    """Growth of the logarithmic spiral traced by iterating ``sim``."""
    return (1.0 / sim.scale) ** (2 * math.pi / abs(sim.rotation))


# ---------------------------------------------------------------------------
# sampling

def _zoom_accept(focus: complex, zeta: float, radius: float, step: float):
    alpha = 1.0 / zeta

    def bound(rho_lo, s):
        with np.errstate(divide="ignore", invalid="ignore"):
            lip = np.where(rho_lo > 0, np.maximum(rho_lo, 1e-300) ** (alpha - 1.0), np.inf)
        return np.minimum(lip * s, 2.0 * s ** alpha)

    def accept(a, b, factor):
        d = np.abs(b - a) * factor
        s = d * radius
        rho = np.minimum(np.abs(a - focus), np.abs(b - focus))
        return ((bound(rho - s, s) <= radius * step)
                & (bound(rho - d, d) <= step))

    return accept


def _plain_accept(step: float):
    def accept(a, b, factor):
        return np.abs(b - a) * factor <= step
    return accept


class _Plan(NamedTuple):
    curve: _Curve
    t_lo: float
    t_hi: float
    g0: complex
    g1: complex
    radius: float
    step: float
    accept: object


def _make_plan(defn, max_gap, oversample, zoom, radius) -> _Plan:
    if max_gap <= 0:
        raise ValueError("max_gap must be positive")
    if oversample < 1:
        raise ValueError("oversample must be >= 1")
    c = _curve(defn)
    if radius is None:
        radius = expansion_radius(defn).radius
    t_lo, t_hi = defn.restriction or (0.0, 1.0)
    g0, g1 = gates(defn)
    step = max_gap / oversample
    if zoom is None:
        acc = _plain_accept(step)
    else:
        focus, zeta = zoom
        if zeta < 1:
            raise ValueError("zoom factor must be >= 1")
        focus = complex(*focus) if not isinstance(focus, complex) else focus
        acc = _zoom_accept(focus, zeta, radius, step)
    scale = g1 - g0

    def accept(p: _Pieces, factor):
        # judged in the output frame
        a = (p.A - g0) / scale
        return acc(a, a + p.B / scale, factor)

    return _Plan(c, t_lo, t_hi, g0, g1, radius, step, accept)


def _classify(p: _Pieces, plan: _Plan):
    """Return (keep, done) masks."""
    lo, hi = plan.t_lo, plan.t_hi
    keep = (p.t0 < hi) & (p.t0 + p.w > lo)
    partial = keep & ((p.t0 < lo) | (p.t0 + p.w > hi))
    factor = np.where(partial, 1.0 + 1.0 / plan.radius, 1.0)
    done = plan.accept(p, factor) | (p.w <= MIN_WIDTH) | (np.abs(p.B) < MIN_SCALE)
    return keep, done


def _expand_all(p: _Pieces, plan: _Plan) -> _Pieces:
    leaves = []
    while len(p):
        keep, done = _classify(p, plan)
        leaves.append(p.take(keep & done))
        p = p.take(keep & ~done)
        if len(p):
            p = _children(p, plan.curve)
    out = _Pieces.concat(leaves)
    return out.take(np.argsort(out.t0, kind="stable"))


def _leaf_chunks(plan: _Plan, chunk_leaves: int = 1 << 18,
                 threads: int = 1) -> Iterator[_Pieces]:
    # the root is always split once, so even a coarse bound yields the
    # level-1 gates
    p = _children(_Pieces.root(plan.curve.start), plan.curve)
    finished = []
    while len(p) < 4096:
        keep, done = _classify(p, plan)
        finished.append(p.take(keep & done))
        p = p.take(keep & ~done)
        if not len(p):
            break
        p = _children(p, plan.curve)
    work = _Pieces.concat(finished + [p])
    work = work.take(np.argsort(work.t0, kind="stable"))
    est = 4.0 * (np.abs(work.B) / plan.step) ** 2 + 1.0
    groups, acc, lo = [], 0.0, 0
    for i, e in enumerate(est.tolist()):
        acc += e
        if acc >= chunk_leaves:
            groups.append((lo, i + 1))
            lo, acc = i + 1, 0.0
    if lo < len(work):
        groups.append((lo, len(work)))

    def run(bounds):
        return _expand_all(work.take(slice(*bounds)), plan)

    if threads <= 1 or len(groups) <= 1:
        for gr in groups:
            yield run(gr)
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for k in range(0, len(groups), threads):
            yield from pool.map(run, groups[k:k + threads])


def sample_chunks(defn: CurveDefinition, max_gap: float, oversample: int = 1, *,
                  zoom=None, threads: int = 1, radius: float | None = None,
                  chunk_leaves: int = 1 << 18) -> Iterator[Samples]:
    """Adaptive sample stream, emitted as t-ordered batches.

    Pieces are subdivided until their gate distance is at most
    ``max_gap / oversample``; the gates of the resulting sections are
    emitted once each. Jumps between consecutive sections are bridged by
    straight connector points flagged ``on_jump``, whose parameters sit
    just below the jump parameter at one-ulp spacing.

    ``zoom=(focus, zeta)`` switches the subdivision test to the close-up
    image of each piece, so that the transformed samples meet the gap.
    """
    plan = _make_plan(defn, max_gap, oversample, zoom, radius)
    g0, scale = plan.g0, plan.g1 - plan.g0
    span = plan.t_hi - plan.t_lo

    def tmap(t):
        return (t - plan.t_lo) / span

    prev_end = None
    last = None
    for leaves in _leaf_chunks(plan, chunk_leaves, threads):
        if not len(leaves):
            continue
        starts = (leaves.start - g0) / scale
        ends = (leaves.end - g0) / scale
        size = np.abs(leaves.B / scale)
        t0 = tmap(np.maximum(leaves.t0, plan.t_lo))
        if prev_end is None:
            if leaves.t0[0] < plan.t_lo:
                starts[0] = 0j
            t0[0] = 0.0
            prev_end = (starts[0], size[0])
        before = np.concatenate([[prev_end[0]], ends[:-1]])
        prev_size = np.concatenate([[prev_end[1]], size[:-1]])
        jump = (np.abs(starts - before)
                > 1e-6 * np.maximum(size, prev_size) + 1e-13)
        chunk = _with_connectors(starts, t0, before, jump, plan.step)
        prev_end = (ends[-1], size[-1])
        last = leaves
        yield chunk
    if last is None:
        return
    if plan.t_hi < 1.0 or plan.t_lo > 0.0:
        fin = 1 + 0j
    else:
        fin = prev_end[0]
    yield Samples(np.array([1.0]), np.array([fin.real]), np.array([fin.imag]),
                  np.zeros(1, bool))


def _with_connectors(starts, t0, before, jump, step) -> Samples:
    idx = np.flatnonzero(jump)
    if not len(idx):
        return Samples(t0, starts.real.copy(), starts.imag.copy(),
                       np.zeros(len(t0), bool))
    P, Q = before[idx], starts[idx]
    nseg = np.maximum(1, np.ceil(np.abs(Q - P) / step)).astype(np.int64)
    owner = np.repeat(np.arange(len(idx)), nseg)
    first = np.cumsum(nseg) - nseg
    k = np.arange(owner.size) - first[owner]
    frac = k / nseg[owner]
    pts = P[owner] + (Q - P)[owner] * frac
    tj = t0[idx]
    ct = tj[owner] - (nseg[owner] - k) * np.spacing(tj)[owner]
    # merge by position: connectors of leaf i precede leaf i
    order_key = np.concatenate([np.arange(len(t0)) * 2 + 1,
                                idx[owner] * 2])
    t_all = np.concatenate([t0, ct])
    p_all = np.concatenate([starts, pts])
    j_all = np.concatenate([np.zeros(len(t0), bool), np.ones(len(ct), bool)])
    o = np.lexsort((t_all, order_key))
    return Samples(t_all[o], p_all.real[o], p_all.imag[o], j_all[o])


def sample(defn: CurveDefinition, max_gap: float, oversample: int = 1,
           **kw) -> Iterator[SamplePoint]:
    for chunk in sample_chunks(defn, max_gap, oversample, **kw):
        yield from chunk.points()


def sample_arrays(defn: CurveDefinition, max_gap: float, oversample: int = 1,
                  **kw) -> Samples:
    return Samples.concat(sample_chunks(defn, max_gap, oversample, **kw))


def bounding_box(defn: CurveDefinition, rel: float = 0.01,
                 radius: float | None = None, zoom=None):
    """Axis-aligned box guaranteed to contain the curve (and its jump
    connectors): a coarse sample inflated by the expansion bound."""
    if radius is None:
        radius = expansion_radius(defn).radius
    s = sample_arrays(defn, rel, radius=radius)
    x, y = s.x, s.y
    if zoom is not None:
        (fx, fy), zeta = zoom
        out = closeup(np.column_stack([x, y, s.t]), ((fx, fy), 0.0), zeta)
        x, y = out[:, 0], out[:, 1]
        pad = 2.0 * (rel * radius) ** (1.0 / zeta)
    else:
        pad = rel * radius
    return (float(x.min()) - pad, float(y.min()) - pad,
            float(x.max()) + pad, float(y.max()) + pad)


# ---------------------------------------------------------------------------
# polynomial close-up

def closeup_exponent(zeta: float) -> float:
    """Exponent applied to parameter offsets by the close-up of factor zeta."""
    return 1.0 / (1.5 * zeta - 0.5)


def closeup(points, focus, zeta: float) -> np.ndarray:
    """Radial power map about ``focus = ((x, y), t)``.

    Planar distance r to the focus becomes r**(1/zeta) with the angle
    kept; the parameter offset dt becomes sign(dt)*|dt|**(1/(1.5*zeta-0.5)).
    The result is expressed relative to the focus.
    """
    if zeta < 1:
        raise ValueError("zeta must be >= 1")
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    (fx, fy), ft = focus
    dx, dy, dt = pts[:, 0] - fx, pts[:, 1] - fy, pts[:, 2] - ft
    r = np.hypot(dx, dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(r > 0, r ** (1.0 / zeta - 1.0), 0.0)
    if zeta == 1:
        k = np.ones_like(r)
    tz = np.sign(dt) * np.abs(dt) ** closeup_exponent(zeta)
    return np.column_stack([dx * k, dy * k, tz])


# ---------------------------------------------------------------------------
# inverse

def inverse_at(defn: CurveDefinition, q, eps: float, eps_t: float = 1e-12,
               radius: float | None = None) -> float:
    """Smallest t with |f(t) - q| <= eps, to parameter resolution eps_t.

    Pieces are visited in t order; a piece is discarded when neither of
    its gates is within ``d*R + eps`` of q. The first piece whose start
    gate lies within eps, and whose start parameter evaluates into the
    ball, is returned. Refinement stops once a piece is
    narrower than eps_t in parameter and its image is within
    ``INVERSE_SLACK * eps`` of its start, so a returned parameter always
    maps into the eps ball, and no parameter mapping within
    ``(1 - INVERSE_SLACK) * eps`` of q is skipped.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    c = _curve(defn)
    if radius is None:
        radius = expansion_radius(defn).radius
    t_lo, t_hi = defn.restriction or (0.0, 1.0)
    g0, g1 = gates(defn)
    scale = g1 - g0
    qz = g0 + complex(*q) * scale
    eps_raw = eps * abs(scale)
    span = t_hi - t_lo

    if abs(g0 - qz) <= eps_raw:
        return 0.0
    stack = [(0j, 1 + 0j, False, False, c.start, 0.0, 1.0)]
    while stack:
        A, B, m, flip, g, t0, w = stack.pop()
        if t0 >= t_hi or t0 + w <= t_lo:
            continue
        s, e = (A + B, A) if flip else (A, A + B)
        if t0 >= t_lo and abs(s - qz) <= eps_raw:
            # t0 carries rounding from the descent; accept it only when its
            # own image is in the ball, otherwise keep refining
            t = min(max((t0 - t_lo) / span, 0.0), 1.0)
            if abs(point_at(defn, t).to_complex() - complex(*q)) <= eps:
                return t
        d = abs(B)
        if min(abs(qz - s), abs(qz - e)) > d * radius + eps_raw:
            continue
        if (w <= eps_t * span and d * (1.0 + radius) <= INVERSE_SLACK * eps_raw) \
                or d < MIN_SCALE:
            continue
        G = c.gens[g]
        kids = []
        for i in range(len(G.w)):
            a, b = complex(G.A[i]), complex(G.B[i])
            if m:
                a, b = a.conjugate(), b.conjugate()
            off = (1.0 - G.W[i] - G.w[i]) if flip else G.W[i]
            kids.append((A + B * a, B * b, m ^ bool(G.m[i]),
                         flip ^ bool(G.rev[i]), int(G.target[i]),
                         t0 + off * w, w * G.w[i]))
        kids.sort(key=lambda k: k[5], reverse=True)
        stack.extend(kids)
    if abs(g1 - qz) <= eps_raw:
        return 1.0
    raise NotOnCurveError(f"no point of {defn.name} within {eps} of {tuple(q)}")
