"""Randomized properties (hypothesis)."""
import math
from decimal import ROUND_HALF_UP, Decimal

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pftrail import curvedef as cd
from pftrail import hexraster as hx
from pftrail import imaging as im
from pftrail import meshgen as mg
from pftrail import traversal as tr
from pftrail.traversal import Samples

BUILTINS = list(cd.REQUIRED_BUILTINS)
BOXES = {name: tr.bounding_box(cd.builtin(name)) for name in BUILTINS}

small = st.integers(-4, 4)


@st.composite
def definitions(draw):
    n = draw(st.integers(1, 5))
    items = []
    for _ in range(n):
        x, y = draw(small), draw(small)
        if x == 0 and y == 0:
            x = 1
        kind = "seg"
        if items and draw(st.booleans()) and items[-1].startswith("seg"):
            kind = "jump"
        flags = "" if kind == "jump" else draw(st.sampled_from(["", "R", "F", "RF"]))
        items.append(f"{kind} {x}/{draw(st.integers(1, 3))} {y} {flags}".rstrip())
    if items[-1].startswith("jump"):
        items.append("seg 1 0")
    basis = draw(st.sampled_from(["square", "triangular"]))
    return f"curve rnd\ngenerator G basis {basis}\n" + "\n".join(items) + "\n"


@settings(max_examples=60, deadline=None)
@given(definitions())
def test_format_parse_round_trip(text):
    try:
        d = cd.parse_definition(text)
    except cd.DefinitionError:
        return
    assert cd.parse_definition(cd.format_definition(d)) == d
    assert cd.inner_flip(cd.inner_flip(d)) == d


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e9, 1e9, allow_nan=False))
def test_format_fixed_rounding(v):
    s = mg.format_fixed([v]).decode()
    scaled = Decimal(abs(v) * 1e6).quantize(Decimal(1), rounding=ROUND_HALF_UP)
    ref = scaled / Decimal(10 ** 6)
    if v < 0 and scaled != 0:
        ref = -ref
    assert Decimal(s) == ref
    assert len(s.split(".")[1]) == 6 and s != "-0.000000"


@settings(max_examples=200, deadline=None)
@given(st.floats(0.01, 10), st.floats(-50, 50), st.floats(-50, 50))
def test_world_to_cell_is_nearest(edge, x, y):
    g = hx.HexGrid(edge)
    q, r = hx.world_to_cell(g, (x, y))
    cx, cy = g.center(q, r)
    best = math.hypot(cx - x, cy - y)
    for dq, dr in hx.NEIGHBOURS:
        nx, ny = g.center(q + dq, r + dr)
        assert best <= math.hypot(nx - x, ny - y) + 1e-9 * edge
    assert best <= edge * (1 + 1e-9)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(BUILTINS), st.floats(0, 1))
def test_points_inside_bounding_box(name, t):
    p = tr.point_at(cd.builtin(name), t)
    xmin, ymin, xmax, ymax = BOXES[name]
    assert xmin <= p.x <= xmax and ymin <= p.y <= ymax


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(0, 1)),
                min_size=1, max_size=30),
       st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 1), st.floats(1, 8))
def test_closeup_properties(pts, fx, fy, ft, zeta):
    pts = np.array(pts)
    same = tr.closeup(pts, ((fx, fy), ft), 1.0)
    assert np.allclose(same, pts - [fx, fy, ft], atol=1e-12)
    out = tr.closeup(pts, ((fx, fy), ft), zeta)
    r0 = np.hypot(pts[:, 0] - fx, pts[:, 1] - fy)
    r1 = np.hypot(out[:, 0], out[:, 1])
    assert np.allclose(r1, r0 ** (1 / zeta), atol=1e-12)
    dt = pts[:, 2] - ft
    assert np.all(np.sign(out[:, 2]) == np.sign(dt))
    ang_ok = r0 > 1e-9
    a0 = np.arctan2(pts[ang_ok, 1] - fy, pts[ang_ok, 0] - fx)
    a1 = np.arctan2(out[ang_ok, 1], out[ang_ok, 0])
    assert np.allclose(np.exp(1j * a0), np.exp(1j * a1), atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 400), st.integers(0, 2 ** 32 - 1), st.floats(0.05, 2),
       st.floats(1e-4, 0.3), st.integers(1, 6))
def test_rasterize_conservation_and_order(n, seed, edge, tau, parts):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.random(n))
    t = np.unique(t)
    x, y = rng.uniform(-3, 3, len(t)), rng.uniform(-3, 3, len(t))
    jump = rng.random(len(t)) < 0.1
    s = Samples(t, x, y, jump)
    g = hx.HexGrid(edge)
    ref = hx.rasterize(s, g, tau)
    assert ref.count.sum() == len(t)
    idx = rng.permutation(len(t))
    chunks = [Samples(t[i], x[i], y[i], jump[i]) for i in np.array_split(idx, parts)
              if len(i)]
    other = hx.rasterize(chunks, g, tau)
    assert other.dump() == ref.dump()
    assert np.array_equal(other.bridge, ref.bridge)
    # layers within a column are ordered and disjoint
    same = (ref.q[1:] == ref.q[:-1]) & (ref.r[1:] == ref.r[:-1])
    assert np.all(ref.t_lo[1:][same] - ref.t_hi[:-1][same] > tau)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 1))
def test_erode_bounds(seed, slope):
    rng = np.random.default_rng(seed)
    q, r = np.meshgrid(np.arange(6), np.arange(6), indexing="ij")
    q, r = q.ravel(), r.ravel()
    n = len(q)
    top = rng.random(n) * 5
    cols = hx.ColumnSet(q, r, np.zeros(n), np.zeros(n), np.zeros(n), top,
                        np.zeros(n), np.ones(n), np.zeros(n, bool))
    g = hx.HexGrid(1.0)
    out = hx.erode(cols, g, slope)
    assert np.all(out.top <= top)
    assert np.array_equal(hx.erode(out, g, slope).top, out.top)
    nb = hx.neighbour_ground(out)
    has = nb >= 0
    diff = out.top[:, None] - out.top[np.maximum(nb, 0)]
    assert np.all(diff[has] <= slope * 1.5 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9), st.binary(min_size=243, max_size=243))
def test_ppm_round_trip(w, h, data):
    img = im.RasterImage(w, h, data[: 3 * w * h])
    assert im.read_ppm(im.ppm_bytes(img)) == img


@pytest.mark.parametrize("name", BUILTINS)
def test_samples_strictly_increasing_any_gap(name):
    d = cd.builtin(name)
    for gap in (0.3, 0.07):
        s = tr.sample_arrays(d, gap)
        assert np.all(np.diff(s.t) > 0)
