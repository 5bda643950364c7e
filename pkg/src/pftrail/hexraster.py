"""Hexagonal rasterization of sample streams into layered cell columns.

Flat-top hexagons with axial coordinates (q, r); the centre of cell
(q, r) is ``origin + (1.5 e q, sqrt(3) e (r + q/2))``. Corner k sits at
angle 60k degrees from the centre, and edge k (corners k, k+1) faces
the neighbour in direction ``NEIGHBOURS[k]``.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .curvedef import Vec2
from .traversal import SamplePoint, Samples

__all__ = [
    "HexGrid", "Layer", "CellColumn", "ColumnSet", "NEIGHBOURS",
    "world_to_cell", "rasterize", "mark_cliffs", "erode", "default_gap_threshold",
    "MERGE_POLICIES",
]

SQRT3 = math.sqrt(3.0)
NEIGHBOURS = np.array([(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)])
MERGE_POLICIES = ("max", "min", "first", "last")


@dataclass(frozen=True)
class HexGrid:
    edge: float
    origin: Vec2 = Vec2(0.0, 0.0)

    def __post_init__(self):
        if not self.edge > 0:
            raise ValueError("hex edge length must be positive")

    @classmethod
    def fit(cls, bbox, resolution: int) -> "HexGrid":
        """Grid with ``resolution`` cell columns across the box width."""
        xmin, ymin, xmax, ymax = bbox
        return cls((xmax - xmin) / (1.5 * resolution), Vec2(xmin, ymin))

    @property
    def cell_area(self) -> float:
        return 1.5 * SQRT3 * self.edge ** 2

    def center(self, q, r):
        q = np.asarray(q, float)
        r = np.asarray(r, float)
        return (self.origin.x + 1.5 * self.edge * q,
                self.origin.y + SQRT3 * self.edge * (r + q / 2))

    def corners(self, q, r):
        """(..., 6, 2) array of corner positions."""
        cx, cy = self.center(q, r)
        ang = np.arange(6) * (math.pi / 3)
        x = np.asarray(cx)[..., None] + self.edge * np.cos(ang)
        y = np.asarray(cy)[..., None] + self.edge * np.sin(ang)
        return np.stack([x, y], axis=-1)


def world_to_cell(grid: HexGrid, p) -> tuple[int, int]:
    q, r = _cells(grid, np.array([p[0]], float), np.array([p[1]], float))
    return int(q[0]), int(r[0])


def _cells(grid: HexGrid, x: np.ndarray, y: np.ndarray):
    """Nearest cell centre; exact ties go to the smallest (q, r)."""
    e = grid.edge
    px = (x - grid.origin.x) / e
    py = (y - grid.origin.y) / e
    fq = px * (2.0 / 3.0)
    fr = py / SQRT3 - px / 3.0
    # cube rounding
    fs = -fq - fr
    rq, rr, rs = np.rint(fq), np.rint(fr), np.rint(fs)
    dq, dr, ds = np.abs(rq - fq), np.abs(rr - fr), np.abs(rs - fs)
    fix_q = (dq > dr) & (dq > ds)
    fix_r = ~fix_q & (dr > ds)
    rq = np.where(fix_q, -rr - rs, rq)
    rr = np.where(fix_r, -rq - rs, rr)
    cand_q = rq[:, None] + np.concatenate([[0], NEIGHBOURS[:, 0]])[None, :]
    cand_r = rr[:, None] + np.concatenate([[0], NEIGHBOURS[:, 1]])[None, :]
    cx = 1.5 * cand_q
    cy = SQRT3 * (cand_r + cand_q / 2)
    d2 = (cx - px[:, None]) ** 2 + (cy - py[:, None]) ** 2
    best = d2.min(axis=1, keepdims=True)
    tied = d2 <= best + 1e-9 * np.maximum(best, 1.0)
    # among near-equal candidates pick the lexicographically smallest
    big = np.iinfo(np.int64).max
    key = np.where(tied, cand_q.astype(np.int64) * (1 << 32) + cand_r.astype(np.int64), big)
    k = key.argmin(axis=1)
    rows = np.arange(len(px))
    return cand_q[rows, k].astype(np.int64), cand_r[rows, k].astype(np.int64)


@dataclass
class Layer:
    t_lo: float
    t_hi: float
    top: float
    kind: str  # "ground" | "bridge"
    cliff_flags: tuple[bool, ...] = (False,) * 6


@dataclass
class CellColumn:
    cell: tuple[int, int]
    layers: list[Layer] = field(default_factory=list)


class ColumnSet:
    """All layers of a rasterized model, stored column-wise.

    Rows are sorted by (q, r, layer). ``top`` is the elevation chosen by
    the merge policy and ``t_top`` the parameter of the sample it came
    from; ``bridge`` marks floating layers.
    """

    FIELDS = ("q", "r", "layer", "t_lo", "t_hi", "top", "t_top", "count",
              "bridge", "cliff")

    def __init__(self, q, r, layer, t_lo, t_hi, top, t_top, count, bridge,
                 cliff=None):
        self.q = np.asarray(q, np.int64)
        self.r = np.asarray(r, np.int64)
        self.layer = np.asarray(layer, np.int64)
        self.t_lo = np.asarray(t_lo, float)
        self.t_hi = np.asarray(t_hi, float)
        self.top = np.asarray(top, float)
        self.t_top = np.asarray(t_top, float)
        self.count = np.asarray(count, np.int64)
        self.bridge = np.asarray(bridge, bool)
        self.cliff = (np.zeros((len(self.q), 6), bool) if cliff is None
                      else np.asarray(cliff, bool))

    def __len__(self):
        return len(np.unique(self.keys())) if len(self.q) else 0

    @property
    def n_layers(self) -> int:
        return len(self.q)

    def copy(self, **changes) -> "ColumnSet":
        kw = {f: getattr(self, f).copy() for f in self.FIELDS}
        kw.update(changes)
        return ColumnSet(**kw)

    def keys(self) -> np.ndarray:
        return _pack(self.q, self.r)

    def ground(self) -> np.ndarray:
        """Row indices of ground layers (sorted by cell key)."""
        return np.flatnonzero(~self.bridge)

    def __iter__(self) -> Iterator[CellColumn]:
        col = None
        for i in range(self.n_layers):
            cell = (int(self.q[i]), int(self.r[i]))
            if col is None or col.cell != cell:
                if col is not None:
                    yield col
                col = CellColumn(cell)
            col.layers.append(Layer(
                float(self.t_lo[i]), float(self.t_hi[i]), float(self.top[i]),
                "bridge" if self.bridge[i] else "ground",
                tuple(bool(f) for f in self.cliff[i])))
        if col is not None:
            yield col

    def dump(self) -> str:
        """One line per layer: ``q r layer_index t_lo t_hi top kind``."""
        buf = io.StringIO()
        for i in range(self.n_layers):
            buf.write(f"{self.q[i]} {self.r[i]} {self.layer[i]} "
                      f"{self.t_lo[i]:.9f} {self.t_hi[i]:.9f} {self.top[i]:.9f} "
                      f"{'bridge' if self.bridge[i] else 'ground'}\n")
        return buf.getvalue()


_OFF = 1 << 30


def _pack(q, r):
    return (np.asarray(q, np.int64) + _OFF) * (1 << 32) + (np.asarray(r, np.int64) + _OFF)


def default_gap_threshold(grid: HexGrid, bbox) -> float:
    xmin, ymin, xmax, ymax = bbox
    return 10.0 * grid.cell_area / ((xmax - xmin) * (ymax - ymin))


def _as_chunks(samples) -> Iterator[tuple[Samples, np.ndarray | None]]:
    if isinstance(samples, Samples):
        yield samples, None
        return
    buf = []
    for item in samples:
        if isinstance(item, tuple) and len(item) == 2 and isinstance(item[0], Samples):
            yield item
        elif isinstance(item, Samples):
            yield item, None
        elif isinstance(item, SamplePoint):
            buf.append(item)
        else:
            raise TypeError(f"cannot rasterize {type(item).__name__}")
    if buf:
        t = np.array([s.t for s in buf])
        x = np.array([s.position.x for s in buf])
        y = np.array([s.position.y for s in buf])
        j = np.array([s.on_jump for s in buf], bool)
        yield Samples(t, x, y, j), None


def _clusters(key, t, elev, jump, tau):
    """Split (key, t)-sorted samples into runs; return per-run summaries."""
    n = len(key)
    brk = np.ones(n, bool)
    brk[1:] = (key[1:] != key[:-1]) | (t[1:] - t[:-1] > tau)
    start = np.flatnonzero(brk)
    end = np.append(start[1:], n) - 1
    return dict(
        key=key[start], t_lo=t[start], t_hi=t[end],
        e_first=elev[start], e_last=elev[end],
        e_max=np.maximum.reduceat(elev, start),
        e_min=np.minimum.reduceat(elev, start),
        t_at_max=t[_argreduce(elev, start, end, np.maximum)],
        t_at_min=t[_argreduce(elev, start, end, np.minimum)],
        count=np.diff(np.append(start, n)),
        all_jump=np.logical_and.reduceat(jump, start),
    )


def _argreduce(v, start, end, op):
    """Index of the (last) extreme value within each run."""
    ext = op.reduceat(v, start)
    run = np.repeat(np.arange(len(start)), end - start + 1)
    hit = np.flatnonzero(v == ext[run])
    # last hit per run
    last = np.full(len(start), -1)
    np.maximum.at(last, run[hit], hit)
    return last


def _merge(parts: list[dict], tau: float) -> dict:
    cat = {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}
    o = np.lexsort((cat["t_lo"], cat["key"]))
    cat = {k: v[o] for k, v in cat.items()}
    key, lo, hi = cat["key"], cat["t_lo"], cat["t_hi"]
    n = len(key)
    # running maximum of t_hi within each cell (t lies in [0, 1], so a
    # per-cell offset of 2 keeps cells apart in one accumulate)
    newcell = np.ones(n, bool)
    newcell[1:] = key[1:] != key[:-1]
    offset = 2.0 * (np.cumsum(newcell) - 1)
    reach = np.maximum.accumulate(hi + offset) - offset
    brk = newcell.copy()
    brk[1:] |= lo[1:] - reach[:-1] > tau
    start = np.flatnonzero(brk)
    end = np.append(start[1:], n) - 1
    ihi = _argreduce(hi, start, end, np.maximum)
    emax = np.maximum.reduceat(cat["e_max"], start)
    emin = np.minimum.reduceat(cat["e_min"], start)
    imax = _argreduce(cat["e_max"], start, end, np.maximum)
    imin = _argreduce(cat["e_min"], start, end, np.minimum)
    return dict(
        key=key[start], t_lo=lo[start], t_hi=hi[ihi],
        e_first=cat["e_first"][start], e_last=cat["e_last"][ihi],
        e_max=emax, e_min=emin,
        t_at_max=cat["t_at_max"][imax], t_at_min=cat["t_at_min"][imin],
        count=np.add.reduceat(cat["count"], start),
        all_jump=np.logical_and.reduceat(cat["all_jump"], start),
    )


def rasterize(samples, grid: HexGrid, gap_threshold: float,
              merge_policy: str = "max", height_scale: float = 1.0,
              revisits: str = "bridge") -> ColumnSet:
    """Bin samples into hex cells and split each cell into t-clusters.

    ``samples`` is a :class:`Samples` batch, an iterable of batches, an
    iterable of ``(batch, elevation)`` pairs or of :class:`SamplePoint`.
    Elevation defaults to the sample parameter; layer tops are
    ``height_scale`` times the policy value over each cluster.

    A new layer starts when the parameter gap to the previous sample in
    the same cell exceeds ``gap_threshold``. A layer is a bridge when all
    its samples lie on jump connectors or it is not the lowest layer of
    its column. With ``revisits="merge"`` clusters containing curve
    samples are folded into one ground layer per cell instead.
    """
    if gap_threshold <= 0:
        raise ValueError("gap threshold must be positive")
    if merge_policy not in MERGE_POLICIES:
        raise ValueError(f"unknown merge policy {merge_policy!r}")
    if revisits not in ("bridge", "merge"):
        raise ValueError(f"unknown revisit mode {revisits!r}")
    parts = []
    for chunk, elev in _as_chunks(samples):
        if not len(chunk):
            continue
        elev = chunk.t if elev is None else np.asarray(elev, float)
        q, r = _cells(grid, chunk.x, chunk.y)
        key = _pack(q, r)
        o = np.lexsort((chunk.t, key))
        parts.append(_clusters(key[o], chunk.t[o], elev[o], chunk.on_jump[o],
                               gap_threshold))
    if not parts:
        raise ValueError("empty sample stream")
    c = _merge(parts, gap_threshold)
    if revisits == "merge":
        c = _fold_revisits(c)
    top, t_top = {
        "max": (c["e_max"], c["t_at_max"]),
        "min": (c["e_min"], c["t_at_min"]),
        "first": (c["e_first"], c["t_lo"]),
        "last": (c["e_last"], c["t_hi"]),
    }[merge_policy]
    key = c["key"]
    newcol = np.ones(len(key), bool)
    newcol[1:] = key[1:] != key[:-1]
    col_start = np.maximum.accumulate(np.where(newcol, np.arange(len(key)), 0))
    layer = np.arange(len(key)) - col_start
    q = (key >> 32) - _OFF
    r = (key & 0xFFFFFFFF) - _OFF
    bridge = c["all_jump"] | (layer > 0)
    return ColumnSet(q, r, layer, c["t_lo"], c["t_hi"], top * height_scale,
                     t_top, c["count"], bridge)


def _fold_revisits(c: dict) -> dict:
    """Merge every non-jump cluster of a cell into its first non-jump one."""
    key, jump = c["key"], c["all_jump"]
    n = len(key)
    # group id: per cell, all curve clusters share one group, jump-only
    # clusters keep their own
    cell_start = np.ones(n, bool)
    cell_start[1:] = key[1:] != key[:-1]
    cell_id = np.cumsum(cell_start) - 1
    grp = np.where(jump, np.arange(n) + n, cell_id)
    o = np.lexsort((c["t_lo"], grp, key))
    c = {k: v[o] for k, v in c.items()}
    grp = grp[o]
    brk = np.ones(n, bool)
    brk[1:] = grp[1:] != grp[:-1]
    start = np.flatnonzero(brk)
    end = np.append(start[1:], n) - 1
    imax = _argreduce(c["e_max"], start, end, np.maximum)
    imin = _argreduce(c["e_min"], start, end, np.minimum)
    out = dict(
        key=c["key"][start], t_lo=np.minimum.reduceat(c["t_lo"], start),
        t_hi=np.maximum.reduceat(c["t_hi"], start),
        e_first=c["e_first"][start], e_last=c["e_last"][end],
        e_max=np.maximum.reduceat(c["e_max"], start),
        e_min=np.minimum.reduceat(c["e_min"], start),
        t_at_max=c["t_at_max"][imax], t_at_min=c["t_at_min"][imin],
        count=np.add.reduceat(c["count"], start),
        all_jump=np.logical_and.reduceat(c["all_jump"], start),
    )
    o = np.lexsort((out["t_lo"], out["key"]))
    return {k: v[o] for k, v in out.items()}


# ---------------------------------------------------------------------------
# neighbourhood operations

def _ground_lookup(cols: ColumnSet):
    g = cols.ground()
    keys = cols.keys()[g]
    o = np.argsort(keys, kind="stable")
    return g[o], keys[o]


def neighbour_ground(cols: ColumnSet, rows: np.ndarray | None = None):
    """For each row, the ground-row index of each of its 6 neighbours (-1
    if the neighbour has no ground layer)."""
    if rows is None:
        rows = np.arange(cols.n_layers)
    g, gkeys = _ground_lookup(cols)
    out = np.full((len(rows), 6), -1, np.int64)
    if not len(g):
        return out
    for k, (dq, dr) in enumerate(NEIGHBOURS):
        nk = _pack(cols.q[rows] + dq, cols.r[rows] + dr)
        pos = np.clip(np.searchsorted(gkeys, nk), 0, len(gkeys) - 1)
        hit = gkeys[pos] == nk
        out[:, k] = np.where(hit, g[pos], -1)
    return out


def mark_cliffs(cols: ColumnSet, cliff_threshold: float) -> ColumnSet:
    """Flag ground-layer edges whose neighbour is missing or lower by more
    than ``cliff_threshold``."""
    if cliff_threshold <= 0:
        raise ValueError("cliff threshold must be positive")
    g = cols.ground()
    nb = neighbour_ground(cols, g)
    ntop = np.where(nb >= 0, cols.top[np.maximum(nb, 0)], -np.inf)
    flags = np.zeros((cols.n_layers, 6), bool)
    flags[g] = (nb < 0) | (cols.top[g][:, None] - ntop > cliff_threshold)
    return cols.copy(cliff=flags)


def erode(cols: ColumnSet, grid: HexGrid, slope_limit: float,
          iterations: int = 0) -> ColumnSet:
    """Talus erosion of ground tops: no ground top may exceed a
    neighbour's by more than ``slope_limit * 1.5 * edge``. ``iterations=0``
    runs to the fixpoint. Bridges are left alone."""
    if slope_limit <= 0:
        raise ValueError("slope limit must be positive")
    g = cols.ground()
    nb = neighbour_ground(cols, g)
    # map neighbour rows into positions within g
    pos = np.full(cols.n_layers, -1, np.int64)
    pos[g] = np.arange(len(g))
    nbp = np.where(nb >= 0, pos[np.maximum(nb, 0)], -1)
    top = cols.top[g].copy()
    drop = slope_limit * 1.5 * grid.edge
    it = 0
    while True:
        ntop = np.where(nbp >= 0, top[np.maximum(nbp, 0)] + drop, np.inf)
        new = np.minimum(top, ntop.min(axis=1))
        it += 1
        changed = not np.array_equal(new, top)
        top = new
        if (iterations and it >= iterations) or not changed:
            break
    out = cols.top.copy()
    out[g] = top
    return cols.copy(top=out)
