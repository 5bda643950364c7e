"""Triangle meshes for plane-filling trails and their COLLADA export."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .hexraster import ColumnSet, HexGrid, neighbour_ground

__all__ = [
    "Mesh", "SceneConfig", "COLORMAPS", "colormap", "build_terrain",
    "build_background", "default_camera", "write_collada", "collada_bytes",
    "format_fixed",
]

SQRT3 = math.sqrt(3.0)
# corner k of a hexagon in the integer corner lattice (x in e/2, y in sqrt(3)e/2)
_CORNER_DX = np.array([2, 1, -1, -2, -1, 1])
_CORNER_DY = np.array([0, 1, 1, 0, -1, -1])
BASE_COLOUR = (0.25, 0.25, 0.25)


@dataclass
class Mesh:
    vertices: np.ndarray                 # (n, 3)
    colours: np.ndarray                  # (n, 3) in [0, 1]
    triangles: np.ndarray                # (m, 3) int
    name: str = "mesh"

    @classmethod
    def empty(cls, name="mesh") -> "Mesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((0, 3), np.int64), name)

    def __len__(self):
        return len(self.triangles)

    @classmethod
    def concat(cls, meshes, name="mesh") -> "Mesh":
        meshes = [m for m in meshes if len(m.vertices)]
        if not meshes:
            return cls.empty(name)
        off = np.cumsum([0] + [len(m.vertices) for m in meshes[:-1]])
        return cls(np.concatenate([m.vertices for m in meshes]),
                   np.concatenate([m.colours for m in meshes]),
                   np.concatenate([m.triangles + o for m, o in zip(meshes, off)]),
                   name)

    def face_normals(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        n = np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0])
        length = np.linalg.norm(n, axis=1, keepdims=True)
        return n / np.where(length > 0, length, 1.0)

    def face_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)

    def bbox(self):
        return np.concatenate([self.vertices.min(axis=0), self.vertices.max(axis=0)])


@dataclass
class SceneConfig:
    camera: tuple[float, float, float] = (0.0, -3.0, 2.0)
    look_at: tuple[float, float, float] = (0.5, 0.25, 0.25)
    fov: float = 50.0
    background: bool = True
    front_elevation: float = 0.0
    back_elevation: float | None = None  # None: model top
    cliff_y: float | None = None         # None: 0.2 x depth behind the model
    parapets: bool = True
    parapet_height: float | None = None  # None: 1.5 e
    parapet_thickness: float | None = None  # None: 0.25 e
    parapet_trigger: float | None = None    # None: 20 e
    bridge_thickness: float | None = None   # None: 3 e
    plinth: float | None = None             # None: 0.5 e, lifts caps off the base

    def __post_init__(self):
        if not 10.0 < self.fov < 120.0:
            raise ValueError("field of view must lie in (10, 120) degrees")
        for name in ("parapet_height", "parapet_thickness"):
            v = getattr(self, name)
            if self.parapets and v is not None and v <= 0:
                raise ValueError(f"{name} must be positive")

    def resolved(self, edge: float) -> dict:
        pick = lambda v, d: d if v is None else v
        return dict(
            parapet_height=pick(self.parapet_height, 1.5 * edge),
            parapet_thickness=pick(self.parapet_thickness, 0.25 * edge),
            parapet_trigger=pick(self.parapet_trigger, 20.0 * edge),
            bridge_thickness=pick(self.bridge_thickness, 3.0 * edge),
            plinth=pick(self.plinth, 0.5 * edge),
        )


def default_camera(bbox3, azimuth=210.0, elevation=35.0, distance=2.2,
                   fov=50.0):
    """Camera position and target for a model box (xmin..zmax); distance
    is in multiples of the box diagonal."""
    lo, hi = np.asarray(bbox3[:3], float), np.asarray(bbox3[3:], float)
    target = (lo + hi) / 2
    diag = float(np.linalg.norm(hi - lo))
    az, el = math.radians(azimuth), math.radians(elevation)
    eye = target + distance * diag * np.array(
        [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])
    return tuple(eye.tolist()), tuple(target.tolist()), fov


# ---------------------------------------------------------------------------
# colour schemes

def _gray(t):
    t = np.clip(np.asarray(t, float), 0, 1)
    return np.stack([t, t, t], axis=-1)


def _rainbow(t):
    t = np.clip(np.asarray(t, float), 0, 1)
    h = (300.0 * t) / 60.0
    i = np.floor(h).astype(int) % 6
    f = h - np.floor(h)
    one, zero, rise, fall = np.ones_like(t), np.zeros_like(t), f, 1 - f
    r = np.choose(i, [one, fall, zero, zero, rise, one])
    g = np.choose(i, [rise, one, one, fall, zero, zero])
    b = np.choose(i, [zero, zero, rise, one, one, fall])
    return np.stack([r, g, b], axis=-1)


_HYPSO = np.array([[0.00, 0.20, 0.55, 0.20],
                   [0.45, 0.55, 0.45, 0.25],
                   [0.75, 0.45, 0.30, 0.15],
                   [1.00, 1.00, 1.00, 1.00]])


def _hypsometric(t):
    t = np.clip(np.asarray(t, float), 0, 1)
    return np.stack([np.interp(t, _HYPSO[:, 0], _HYPSO[:, k]) for k in (1, 2, 3)], axis=-1)


COLORMAPS = {"gray": _gray, "rainbow": _rainbow, "hypsometric": _hypsometric}


def colormap(name: str):
    try:
        return COLORMAPS[name]
    except KeyError:
        raise ValueError(f"unknown colormap {name!r}") from None


# ---------------------------------------------------------------------------
# terrain

def _corner_keys(q, r):
    """(n, 6) packed integer keys of hexagon corners."""
    X = 3 * q[:, None] + _CORNER_DX[None, :]
    Y = 2 * r[:, None] + q[:, None] + _CORNER_DY[None, :]
    return X * (1 << 32) + Y


def _center_keys(q, r):
    return (3 * q) * (1 << 32) + (2 * r + q)


def _weld(keys, z, xy, colour):
    """Merge records with identical (key, z). Returns (vertices, colours,
    inverse index per record)."""
    o = np.lexsort((z, keys))
    ks, zs = keys[o], z[o]
    new = np.ones(len(o), bool)
    new[1:] = (ks[1:] != ks[:-1]) | (zs[1:] != zs[:-1])
    uid = np.cumsum(new) - 1
    inv = np.empty(len(o), np.int64)
    inv[o] = uid
    first = o[new]
    verts = np.column_stack([xy[first], z[first]])
    return verts, colour[first], inv


def _snap_heights(h, rel=1e-9):
    """Merge heights closer than ``rel`` of the height range, so that
    ulp-level differences (such as connector parameters) do not produce
    degenerate wall slivers."""
    h = np.asarray(h, float)
    if len(h) < 2:
        return h.copy()
    o = np.argsort(h, kind="stable")
    hs = h[o]
    tol = rel * max(float(hs[-1] - hs[0]), float(np.abs(hs).max()), 1e-300)
    new = np.ones(len(hs), bool)
    new[1:] = np.diff(hs) > tol
    lead = np.maximum.accumulate(np.where(new, np.arange(len(hs)), 0))
    out = np.empty_like(h)
    out[o] = hs[lead]
    return out


def build_terrain(cols: ColumnSet, grid: HexGrid, config: SceneConfig | None = None,
                  cmap="rainbow", elevation_range=None) -> Mesh:
    """Closed terrain mesh: caps, walls down to lower neighbours or the
    base plane, a base, bridge slabs and optional parapets."""
    if cols.n_layers == 0:
        raise ValueError("no columns to mesh")
    config = config or SceneConfig()
    par = config.resolved(grid.edge)
    cmap = colormap(cmap) if isinstance(cmap, str) else cmap
    if elevation_range is None:
        elevation_range = (float(cols.top.min()), float(cols.top.max()))
    parts = [_ground_mesh(cols, grid, par["plinth"], cmap, elevation_range)]
    if cols.bridge.any():
        parts.append(_bridge_mesh(cols, grid, par, cmap, elevation_range))
    if config.parapets and cols.cliff.any():
        parts.append(_parapet_mesh(cols, grid, par, cmap, elevation_range))
    return Mesh.concat(parts, name="terrain")


def _layer_colours(cols, rows, cmap, erange):
    if cmap is _hypsometric:
        lo, hi = erange
        v = (cols.top[rows] - lo) / (hi - lo if hi > lo else 1.0)
    else:
        v = cols.t_top[rows]
    return cmap(v)


def _ground_mesh(cols, grid, plinth, cmap, erange) -> Mesh:
    g = cols.ground()
    if not len(g):
        return Mesh.empty()
    q, r = cols.q[g], cols.r[g]
    n = len(g)
    h = _snap_heights(cols.top[g]) + plinth
    col = _layer_colours(cols, g, cmap, erange)
    corners = grid.corners(q, r)                       # (n, 6, 2)
    cx, cy = grid.center(q, r)
    ck = _corner_keys(q, r)                             # (n, 6)

    # records: cap centres, cap corners, base corners
    keys = np.concatenate([_center_keys(q, r), ck.ravel(), ck.ravel()])
    z = np.concatenate([h, np.repeat(h, 6), np.zeros(6 * n)])
    xy = np.concatenate([np.column_stack([cx, cy]), corners.reshape(-1, 2),
                         corners.reshape(-1, 2)])
    colour = np.concatenate([col, np.repeat(col, 6, axis=0),
                             np.tile(BASE_COLOUR, (6 * n, 1))])
    verts, colours, inv = _weld(keys, z, xy, colour)
    centre = inv[:n]
    cap = inv[n:7 * n].reshape(n, 6)
    base = inv[7 * n:].reshape(n, 6)

    tris = []
    k = np.arange(6)
    k1 = (k + 1) % 6
    tris.append(np.stack([np.repeat(centre, 6), cap[:, k].ravel(),
                          cap[:, k1].ravel()], axis=1))
    fan = np.array([[0, 2, 1], [0, 3, 2], [0, 4, 3], [0, 5, 4]])
    tris.append(base[:, fan].reshape(-1, 3))

    # walls: edge k of cell i when the neighbour in direction k is lower
    nb = neighbour_ground(cols, g)
    pos = np.full(cols.n_layers, -1, np.int64)
    pos[g] = np.arange(n)
    nbp = np.where(nb >= 0, pos[np.maximum(nb, 0)], -1)
    nh = np.where(nbp >= 0, h[np.maximum(nbp, 0)], 0.0)
    cell, kk = np.nonzero(nh < h[:, None])
    if len(cell):
        tris.append(_walls(cell, kk, h, nh, nbp, cap, base))
    return Mesh(verts, colours, np.concatenate(tris))


def _walls(cell, k, h, nh, nbp, cap, base):
    """Zipper-triangulated wall strips, split at intermediate heights of
    the third cell at each corner so that no T-junctions arise."""
    k1 = (k + 1) % 6
    hi = h[cell]
    lo = nh[cell, k]
    nbr = nbp[cell, k]
    has_nbr = nbr >= 0
    nb0 = np.maximum(nbr, 0)
    # left side = corner k, right side = corner k+1
    L_hi, R_hi = cap[cell, k], cap[cell, k1]
    L_lo = np.where(has_nbr, cap[nb0, (k + 4) % 6], base[cell, k])
    R_lo = np.where(has_nbr, cap[nb0, (k + 3) % 6], base[cell, k1])
    # third cells: direction k-1 shares corner k, direction k+1 shares k+1
    cl = nbp[cell, (k - 1) % 6]
    cr = nbp[cell, k1]
    ml = np.where(cl >= 0, h[np.maximum(cl, 0)], -1.0)
    mr = np.where(cr >= 0, h[np.maximum(cr, 0)], -1.0)
    has_l = (ml > lo) & (ml < hi)
    has_r = (mr > lo) & (mr < hi)
    L_mid = cap[np.maximum(cl, 0), (k + 2) % 6]
    R_mid = cap[np.maximum(cr, 0), (k + 5) % 6]

    out = []
    s = ~has_l & ~has_r
    out += [np.stack([L_lo[s], R_lo[s], R_hi[s]], 1),
            np.stack([L_lo[s], R_hi[s], L_hi[s]], 1)]
    s = has_l & ~has_r
    out += [np.stack([L_lo[s], R_lo[s], L_mid[s]], 1),
            np.stack([L_mid[s], R_lo[s], R_hi[s]], 1),
            np.stack([L_mid[s], R_hi[s], L_hi[s]], 1)]
    s = ~has_l & has_r
    out += [np.stack([L_lo[s], R_lo[s], R_mid[s]], 1),
            np.stack([L_lo[s], R_mid[s], L_hi[s]], 1),
            np.stack([L_hi[s], R_mid[s], R_hi[s]], 1)]
    s = has_l & has_r & (ml <= mr)
    out += [np.stack([L_lo[s], R_lo[s], L_mid[s]], 1),
            np.stack([L_mid[s], R_lo[s], R_mid[s]], 1),
            np.stack([L_mid[s], R_mid[s], L_hi[s]], 1),
            np.stack([L_hi[s], R_mid[s], R_hi[s]], 1)]
    s = has_l & has_r & (ml > mr)
    out += [np.stack([L_lo[s], R_lo[s], R_mid[s]], 1),
            np.stack([L_lo[s], R_mid[s], L_mid[s]], 1),
            np.stack([L_mid[s], R_mid[s], R_hi[s]], 1),
            np.stack([L_mid[s], R_hi[s], L_hi[s]], 1)]
    return np.concatenate(out)


def _prisms(xy6, z_lo, z_hi, colour) -> Mesh:
    """Closed hexagonal prisms; xy6 is (n, 6, 2) with CCW corners."""
    n = len(xy6)
    if not n:
        return Mesh.empty()
    cen = xy6.mean(axis=1)
    top = np.concatenate([np.concatenate([cen[:, None, :], xy6], 1),
                          np.repeat(z_hi[:, None, None], 7, 1)], axis=2)
    bot = np.concatenate([np.concatenate([cen[:, None, :], xy6], 1),
                          np.repeat(z_lo[:, None, None], 7, 1)], axis=2)
    verts = np.concatenate([top, bot], axis=1).reshape(-1, 3)
    k = np.arange(6)
    k1 = (k + 1) % 6
    local = np.concatenate([
        np.stack([np.zeros(6, int), 1 + k, 1 + k1], 1),          # top
        np.stack([np.full(6, 7), 8 + k1, 8 + k], 1),             # bottom
        np.stack([8 + k, 8 + k1, 1 + k1], 1),                    # sides
        np.stack([8 + k, 1 + k1, 1 + k], 1),
    ])
    tris = (np.arange(n)[:, None, None] * 14 + local[None]).reshape(-1, 3)
    return Mesh(verts, np.repeat(colour, 14, axis=0), tris)


def _bridge_mesh(cols, grid, par, cmap, erange) -> Mesh:
    b = np.flatnonzero(cols.bridge)
    top = cols.top[b] + par["plinth"]
    # the layer below in the same column, if any
    below = np.where(cols.layer[b] > 0, cols.top[np.maximum(b - 1, 0)] + par["plinth"], 0.0)
    bottom = np.maximum(top - par["bridge_thickness"], below)
    thin = top - bottom < 1e-9 * max(1.0, abs(float(top.max())))
    bottom = np.where(thin, top - par["bridge_thickness"], bottom)
    xy6 = grid.corners(cols.q[b], cols.r[b])
    return _prisms(xy6, bottom, top, _layer_colours(cols, b, cmap, erange))


def _parapet_mesh(cols, grid, par, cmap, erange) -> Mesh:
    g = cols.ground()
    rows, k = np.nonzero(cols.cliff[g])
    if not len(rows):
        return Mesh.empty()
    rows = g[rows]
    corners = grid.corners(cols.q[rows], cols.r[rows])   # (n, 6, 2)
    cx, cy = grid.center(cols.q[rows], cols.r[rows])
    c = np.column_stack([cx, cy])
    a = corners[np.arange(len(rows)), k]
    b = corners[np.arange(len(rows)), (k + 1) % 6]
    shrink = par["parapet_thickness"] * 2.0 / SQRT3 / grid.edge
    a_in = a + (c - a) * shrink
    b_in = b + (c - b) * shrink
    z0 = cols.top[rows] + par["plinth"]
    z1 = z0 + par["parapet_height"]
    quad = np.stack([a, b, b_in, a_in], axis=1)          # CCW seen from above
    verts = np.concatenate([
        np.concatenate([quad, np.repeat(z0[:, None, None], 4, 1)], 2),
        np.concatenate([quad, np.repeat(z1[:, None, None], 4, 1)], 2)], axis=1)
    local = np.array([
        [0, 2, 1], [0, 3, 2],            # bottom (down)
        [4, 5, 6], [4, 6, 7],            # top (up)
        [0, 1, 5], [0, 5, 4],
        [1, 2, 6], [1, 6, 5],
        [2, 3, 7], [2, 7, 6],
        [3, 0, 4], [3, 4, 7],
    ])
    n = len(rows)
    tris = (np.arange(n)[:, None, None] * 8 + local[None]).reshape(-1, 3)
    colour = _layer_colours(cols, rows, cmap, erange)
    return Mesh(verts.reshape(-1, 3), np.repeat(colour, 8, axis=0), tris, "parapets")


# ---------------------------------------------------------------------------
# background

def build_background(config: SceneConfig, model_bbox) -> Mesh:
    """Low front plane, vertical cliff, high back plane; 6 triangles."""
    if not config.background:
        return Mesh.empty("background")
    xmin, ymin, zmin, xmax, ymax, zmax = model_bbox
    w, d = xmax - xmin, ymax - ymin
    cx, cy = (xmin + xmax) / 2, (ymin + ymax) / 2
    x0, x1 = cx - 1.5 * w, cx + 1.5 * w
    y0, y1 = cy - 1.5 * d, cy + 1.5 * d
    yc = ymax + 0.2 * d if config.cliff_y is None else config.cliff_y
    zf = config.front_elevation
    zb = zmax if config.back_elevation is None else config.back_elevation
    verts = np.array([
        [x0, y0, zf], [x1, y0, zf], [x1, yc, zf], [x0, yc, zf],   # front
        [x0, yc, zf], [x1, yc, zf], [x1, yc, zb], [x0, yc, zb],   # cliff
        [x0, yc, zb], [x1, yc, zb], [x1, y1, zb], [x0, y1, zb],   # back
    ], float)
    # cliff faces the viewer (towards -y)
    tris = np.array([[0, 1, 2], [0, 2, 3], [4, 5, 6], [4, 6, 7],
                     [8, 9, 10], [8, 10, 11]])
    colours = np.array([[0.55, 0.6, 0.5]] * 4 + [[0.45, 0.42, 0.38]] * 4
                       + [[0.6, 0.65, 0.55]] * 4)
    return Mesh(verts, colours, tris, "background")


# ---------------------------------------------------------------------------
# COLLADA

_CHUNK = 1 << 20
_DIGITS = 20


def format_fixed(values, decimals: int = 6) -> bytes:
    """Space-separated fixed-point text for an array of numbers.

    Equivalent to ``" ".join("%.{decimals}f" % v)`` except that values are
    rounded half away from zero on ``v * 10**decimals`` and negative zero is
    written without a sign. Vectorized, so large meshes format quickly.
    """
    v = np.asarray(values, dtype=float).ravel()
    if not len(v):
        return b""
    if not np.all(np.isfinite(v)):
        raise ValueError("cannot format non-finite values")
    scaled = np.abs(v) * 10.0 ** decimals
    if scaled.max() >= 1e18:
        raise ValueError("value too large for fixed-point output")
    mag = np.floor(scaled + 0.5).astype(np.int64)
    neg = (v < 0) & (mag > 0)
    n = len(v)
    width = _DIGITS + 3              # sign, digits, point, separator
    buf = np.zeros((n, width), np.uint8)
    keep = np.zeros((n, width), bool)
    # digits right to left; the point sits after `decimals` fraction digits
    col = width - 2
    rest = mag.copy()
    ndig = np.maximum(_ndigits(mag), decimals + 1)
    for k in range(_DIGITS):
        if decimals and k == decimals:
            buf[:, col] = ord(".")
            keep[:, col] = True
            col -= 1
        buf[:, col] = ord("0") + rest % 10
        keep[:, col] = k < ndig
        rest //= 10
        col -= 1
        if k >= decimals and not (k + 1 < ndig).any():
            break
    # sign just left of the leading digit
    lead = width - 2 - ndig - (1 if decimals else 0)
    rows = np.flatnonzero(neg)
    buf[rows, lead[rows]] = ord("-")
    keep[rows, lead[rows]] = True
    buf[:, -1] = ord(" ")
    keep[:-1, -1] = True
    return buf[keep].tobytes()


def _ndigits(mag):
    d = np.ones(len(mag), np.int64)
    p = 10
    for _ in range(_DIGITS - 1):
        more = mag >= p
        if not more.any():
            break
        d += more
        p *= 10
    return d


def _write_numbers(write, arr, decimals):
    flat = np.asarray(arr).ravel()
    for i in range(0, len(flat), _CHUNK):
        if i:
            write(b" ")
        write(format_fixed(flat[i:i + _CHUNK], decimals))


def _look_at_matrix(eye, target, up=(0.0, 0.0, 1.0)):
    eye, target, up = (np.asarray(v, float) for v in (eye, target, up))
    f = target - eye
    f /= np.linalg.norm(f)
    s = np.cross(f, up)
    if np.linalg.norm(s) < 1e-12:
        s = np.cross(f, (0.0, 1.0, 0.0))
    s /= np.linalg.norm(s)
    u = np.cross(s, f)
    m = np.eye(4)
    m[:3, 0], m[:3, 1], m[:3, 2], m[:3, 3] = s, u, -f, eye
    return m


_NQ = (1 << 20) - 1   # normal quantization steps per unit


def _unique_normals(mesh: Mesh):
    """Distinct face normals and each face's index into them.

    Normals are quantized to 21 bits per component and packed into one
    integer key; each distinct key is represented by its renormalized
    quantized direction (within about 1e-6 of every member).
    """
    keys = np.empty(len(mesh.triangles), np.int64)
    for i in range(0, len(mesh.triangles), _CHUNK):
        part = Mesh(mesh.vertices, mesh.colours, mesh.triangles[i:i + _CHUNK])
        qn = np.rint(part.face_normals() * _NQ).astype(np.int64) + _NQ
        keys[i:i + len(qn)] = (qn[:, 0] << 42) | (qn[:, 1] << 21) | qn[:, 2]
    uniq, inv = np.unique(keys, return_inverse=True)
    mask = (1 << 21) - 1
    q = np.stack([(uniq >> 42) & mask, (uniq >> 21) & mask, uniq & mask], axis=1)
    n = (q - _NQ).astype(float)
    length = np.linalg.norm(n, axis=1, keepdims=True)
    return n / np.where(length > 0, length, 1.0), inv.ravel()


def _write_geometry(write, gid, mesh: Mesh):
    normals, ninv = _unique_normals(mesh)
    nt = len(mesh.triangles)
    w = lambda text: write(text.encode("utf-8"))
    w(f'    <geometry id="{gid}" name="{mesh.name}">\n      <mesh>\n')
    for suffix, arr, params in (("positions", mesh.vertices, "XYZ"),
                                ("normals", normals, "XYZ"),
                                ("colors", mesh.colours, "RGB")):
        count = len(arr)
        w(f'        <source id="{gid}-{suffix}">\n')
        w(f'          <float_array id="{gid}-{suffix}-array" count="{3 * count}">')
        _write_numbers(write, arr, 6)
        w("</float_array>\n")
        w("          <technique_common>\n")
        w(f'            <accessor source="#{gid}-{suffix}-array" count="{count}" stride="3">\n')
        for p in params:
            w(f'              <param name="{p}" type="float"/>\n')
        w("            </accessor>\n          </technique_common>\n        </source>\n")
    w(f'        <vertices id="{gid}-vertices">\n')
    w(f'          <input semantic="POSITION" source="#{gid}-positions"/>\n')
    w("        </vertices>\n")
    w(f'        <triangles count="{nt}">\n')
    w(f'          <input semantic="VERTEX" source="#{gid}-vertices" offset="0"/>\n')
    w(f'          <input semantic="NORMAL" source="#{gid}-normals" offset="1"/>\n')
    w(f'          <input semantic="COLOR" source="#{gid}-colors" offset="0" set="0"/>\n')
    w("          <p>")
    step = _CHUNK // 6
    for i in range(0, nt, step):
        tri = mesh.triangles[i:i + step]
        idx = np.empty((len(tri), 3, 2), np.int64)
        idx[:, :, 0] = tri
        idx[:, :, 1] = ninv[i:i + step, None]
        if i:
            write(b" ")
        write(format_fixed(idx, 0))
    w("</p>\n        </triangles>\n      </mesh>\n    </geometry>\n")


def write_collada(meshes, scene: SceneConfig, out) -> None:
    """Serialize meshes plus a perspective camera as COLLADA 1.4.1.

    ``out`` is a path or a binary/text stream. Output is byte-identical
    for identical input. Meshes without triangles are skipped.
    """
    if isinstance(out, (str, bytes)) or hasattr(out, "__fspath__"):
        with open(out, "wb") as fh:
            _write_document(meshes, scene, fh.write)
    elif isinstance(out, io.TextIOBase):
        _write_document(meshes, scene, lambda b: out.write(b.decode("utf-8")))
    else:
        _write_document(meshes, scene, out.write)


def collada_bytes(meshes, scene: SceneConfig) -> bytes:
    buf = io.BytesIO()
    _write_document(meshes, scene, buf.write)
    return buf.getvalue()


def _write_document(meshes, scene: SceneConfig, write):
    meshes = [m for m in meshes if len(m.triangles)]
    w = lambda text: write(text.encode("utf-8"))
    w('<?xml version="1.0" encoding="utf-8"?>\n')
    w('<COLLADA xmlns="http://www.collada.org/2005/11/COLLADASchema" version="1.4.1">\n')
    w("  <asset>\n    <contributor>\n      <authoring_tool>pftrail</authoring_tool>\n"
      "    </contributor>\n")
    w("    <created>1970-01-01T00:00:00</created>\n"
      "    <modified>1970-01-01T00:00:00</modified>\n")
    w('    <unit name="meter" meter="1"/>\n    <up_axis>Z_UP</up_axis>\n  </asset>\n')
    eye = np.asarray(scene.camera, float)
    target = np.asarray(scene.look_at, float)
    dist = float(np.linalg.norm(target - eye))
    if meshes:
        w('  <library_cameras>\n    <camera id="camera" name="camera">\n'
          "      <optics>\n        <technique_common>\n          <perspective>\n")
        w(f"            <yfov>{scene.fov:.6f}</yfov>\n"
          "            <aspect_ratio>1.500000</aspect_ratio>\n")
        w(f"            <znear>{max(dist * 1e-3, 1e-6):.6f}</znear>\n"
          f"            <zfar>{dist * 100:.6f}</zfar>\n")
        w("          </perspective>\n        </technique_common>\n      </optics>\n"
          "    </camera>\n  </library_cameras>\n")
        w("  <library_geometries>\n")
        for i, m in enumerate(meshes):
            _write_geometry(write, f"geom{i}", m)
        w("  </library_geometries>\n")
    w('  <library_visual_scenes>\n    <visual_scene id="scene" name="scene">\n')
    if meshes:
        w('      <node id="camera-node" name="camera">\n        <matrix sid="transform">')
        write(format_fixed(_look_at_matrix(eye, target), 6))
        w('</matrix>\n        <instance_camera url="#camera"/>\n      </node>\n')
        for i, m in enumerate(meshes):
            w(f'      <node id="geom{i}-node" name="{m.name}">\n'
              f'        <instance_geometry url="#geom{i}"/>\n      </node>\n')
    w("    </visual_scene>\n  </library_visual_scenes>\n")
    w('  <scene>\n    <instance_visual_scene url="#scene"/>\n  </scene>\n</COLLADA>\n')
