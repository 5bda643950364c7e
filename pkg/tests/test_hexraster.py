import math

import numpy as np
import pytest

from pftrail import curvedef as cd
from pftrail import hexraster as hx
from pftrail import traversal as tr
from pftrail.curvedef import Vec2
from pftrail.traversal import SamplePoint, Samples


def samples(t, x, y, jump=None):
    t = np.asarray(t, float)
    return Samples(t, np.asarray(x, float), np.asarray(y, float),
                   np.zeros(len(t), bool) if jump is None else np.asarray(jump, bool))


def fitted(name, n):
    d = cd.builtin(name)
    R = tr.expansion_radius(d).radius
    bbox = tr.bounding_box(d, radius=R)
    grid = hx.HexGrid.fit(bbox, n)
    s = tr.sample_arrays(d, grid.edge / (2 * R), radius=R)
    return d, bbox, grid, s


# ---------------------------------------------------------------------------
# grid addressing

@pytest.mark.parametrize("edge", [1.0, 0.37, 1e-3])
def test_world_to_cell_centres(edge):
    g = hx.HexGrid(edge, Vec2(0.2, -0.1))
    assert hx.world_to_cell(g, (0.2, -0.1)) == (0, 0)
    for q, r in [(3, -2), (-5, 7), (0, 1), (11, 0)]:
        cx, cy = g.center(q, r)
        assert hx.world_to_cell(g, (float(cx), float(cy))) == (q, r)


def test_world_to_cell_edge_midpoint_tie():
    g = hx.HexGrid(1.0)
    mid = (0.75, math.sqrt(3) / 4)      # between (0,0) and (1,0)
    assert hx.world_to_cell(g, mid) == (0, 0)
    # between (0,0) and (0,1) the smaller key is again (0,0)
    assert hx.world_to_cell(g, (0.0, math.sqrt(3) / 2)) == (0, 0)
    # between (0,0) and (0,-1) the smaller key is (0,-1)
    assert hx.world_to_cell(g, (0.0, -math.sqrt(3) / 2)) == (0, -1)


def test_world_to_cell_matches_brute_force():
    g = hx.HexGrid(0.3, Vec2(0.1, 0.2))
    rng = np.random.default_rng(3)
    pts = rng.uniform(-3, 3, size=(2000, 2))
    q, r = hx._cells(g, pts[:, 0], pts[:, 1])
    cq, cr = np.meshgrid(np.arange(-15, 16), np.arange(-25, 26), indexing="ij")
    cq, cr = cq.ravel(), cr.ravel()
    cx, cy = g.center(cq, cr)
    d2 = (pts[:, 0, None] - cx) ** 2 + (pts[:, 1, None] - cy) ** 2
    best = d2.argmin(axis=1)
    assert np.array_equal(q, cq[best]) and np.array_equal(r, cr[best])


def test_corners_lie_on_circumcircle():
    g = hx.HexGrid(0.5)
    c = g.corners(2, -1)
    cx, cy = g.center(2, -1)
    assert np.allclose(np.hypot(c[:, 0] - cx, c[:, 1] - cy), 0.5)
    assert g.cell_area == pytest.approx(1.5 * math.sqrt(3) * 0.25)


def test_grid_rejects_bad_edge():
    with pytest.raises(ValueError):
        hx.HexGrid(0.0)


# ---------------------------------------------------------------------------
# rasterize

def test_single_sample():
    cols = hx.rasterize(samples([0.3], [0.0], [0.0]), hx.HexGrid(1.0), 0.1)
    assert len(cols) == 1 and cols.n_layers == 1
    (col,) = list(cols)
    (layer,) = col.layers
    assert col.cell == (0, 0)
    assert layer.kind == "ground" and layer.t_lo == layer.t_hi == 0.3
    assert layer.top == 0.3


def test_two_layers():
    cols = hx.rasterize(samples([0.1, 0.2, 0.8], [0, 0.1, 0], [0, 0, 0.1]),
                        hx.HexGrid(1.0), 0.3)
    (col,) = list(cols)
    assert [l.kind for l in col.layers] == ["ground", "bridge"]
    assert (col.layers[0].t_lo, col.layers[0].t_hi) == (0.1, 0.2)
    assert col.layers[1].t_lo == 0.8


def test_accepts_sample_points():
    pts = [SamplePoint(0.1, Vec2(0, 0), False), SamplePoint(0.6, Vec2(5, 0), False)]
    cols = hx.rasterize(pts, hx.HexGrid(1.0), 0.1)
    assert len(cols) == 2


def test_jump_only_layer_is_bridge():
    cols = hx.rasterize(samples([0.1, 0.2], [0, 9], [0, 0], [False, True]),
                        hx.HexGrid(1.0), 0.5)
    assert cols.bridge.tolist() == [False, True]


@pytest.mark.parametrize("policy, expect", [("max", 0.9), ("min", 0.5),
                                            ("first", 0.5), ("last", 0.9)])
def test_merge_policies(policy, expect):
    s = samples([0.1, 0.2, 0.3], [0, 0, 0], [0, 0, 0])
    elev = np.array([0.5, 0.9, 0.7])
    cols = hx.rasterize([(s, elev)], hx.HexGrid(1.0), 1.0, merge_policy=policy,
                        height_scale=2.0)
    if policy == "last":
        expect = 0.7
    assert cols.top[0] == pytest.approx(2 * expect)


def test_rasterize_errors():
    g = hx.HexGrid(1.0)
    with pytest.raises(ValueError):
        hx.rasterize(Samples.empty(), g, 0.1)
    with pytest.raises(ValueError):
        hx.rasterize(samples([0.1], [0], [0]), g, 0.0)
    with pytest.raises(ValueError):
        hx.rasterize(samples([0.1], [0], [0]), g, 0.1, merge_policy="median")


def test_conservation_and_layer_invariants():
    d, bbox, grid, s = fitted("hilbert", 24)
    cols = hx.rasterize(s, grid, hx.default_gap_threshold(grid, bbox))
    assert cols.count.sum() == len(s)
    for col in cols:
        kinds = [l.kind for l in col.layers]
        assert kinds.count("ground") <= 1
        if "ground" in kinds:
            assert kinds[0] == "ground"
        for a, b in zip(col.layers, col.layers[1:]):
            assert a.t_hi < b.t_lo
            assert a.top <= b.top          # policy max, elevation = t
        assert all(l.t_lo <= l.t_hi for l in col.layers)


def test_zorder_has_bridges():
    d, bbox, grid, s = fitted("zorder", 8)
    cols = hx.rasterize(s, grid, hx.default_gap_threshold(grid, bbox))
    assert cols.bridge.any()
    ground = set(zip(cols.q[~cols.bridge].tolist(), cols.r[~cols.bridge].tolist()))
    over = [(q, r) for q, r, b in zip(cols.q.tolist(), cols.r.tolist(), cols.bridge)
            if b and (q, r) in ground]
    assert over


def test_permuted_chunks_are_deterministic():
    d, bbox, grid, s = fitted("gosper", 30)
    tau = hx.default_gap_threshold(grid, bbox)
    ref = hx.rasterize(s, grid, tau).dump()
    rng = np.random.default_rng(11)
    idx = rng.permutation(len(s))
    for parts in (7, 64):
        chunks = [Samples(s.t[i], s.x[i], s.y[i], s.on_jump[i])
                  for i in np.array_split(idx, parts)]
        assert hx.rasterize(chunks, grid, tau).dump() == ref


def test_merge_mode_folds_revisits():
    s = samples([0.1, 0.5, 0.9], [0, 0, 0], [0, 0, 0])
    cols = hx.rasterize(s, hx.HexGrid(1.0), 0.1, revisits="merge")
    assert cols.n_layers == 1 and not cols.bridge[0]
    assert (cols.t_lo[0], cols.t_hi[0], cols.count[0]) == (0.1, 0.9, 3)


def test_dump_format():
    cols = hx.rasterize(samples([0.25, 0.75], [0, 0], [0, 0]), hx.HexGrid(1.0), 0.1)
    assert cols.dump() == ("0 0 0 0.250000000 0.250000000 0.250000000 ground\n"
                           "0 0 1 0.750000000 0.750000000 0.750000000 bridge\n")


def test_polya_interior_cells_filled():
    d, bbox, grid, s = fitted("polya", 48)
    cols = hx.rasterize(s, grid, hx.default_gap_threshold(grid, bbox))
    have = set(zip(cols.q.tolist(), cols.r.tolist()))
    q, r = np.meshgrid(np.arange(-5, 60), np.arange(-60, 60), indexing="ij")
    q, r = q.ravel(), r.ravel()
    corners = grid.corners(q, r)
    x, y = corners[..., 0], corners[..., 1]
    inside = np.all((y >= 0) & (y <= x) & (y <= 1 - x), axis=1)
    assert inside.sum() > 100
    missing = [c for c in zip(q[inside].tolist(), r[inside].tolist()) if c not in have]
    assert not missing


# ---------------------------------------------------------------------------
# cliffs and erosion

def ring(tops, centre=1.0):
    """Column at (0,0) plus its six neighbours with the given tops."""
    q = [0] + [int(v) for v in hx.NEIGHBOURS[:, 0]]
    r = [0] + [int(v) for v in hx.NEIGHBOURS[:, 1]]
    order = np.lexsort((r, q))
    top = np.array([centre] + list(tops))
    n = len(q)
    return hx.ColumnSet(np.array(q)[order], np.array(r)[order], np.zeros(n),
                        np.zeros(n), np.zeros(n), top[order], np.zeros(n),
                        np.ones(n), np.zeros(n, bool))


def test_isolated_column_all_flags():
    cols = hx.rasterize(samples([0.5], [0], [0]), hx.HexGrid(1.0), 0.1)
    out = hx.mark_cliffs(cols, 0.01)
    assert out.cliff.tolist() == [[True] * 6]
    assert not cols.cliff.any()           # input untouched


def test_equal_neighbours_no_flag():
    cols = hx.mark_cliffs(ring([1.0] * 6), 0.1)
    c = np.flatnonzero((cols.q == 0) & (cols.r == 0))[0]
    assert not cols.cliff[c].any()


def test_cliff_direction():
    cols = hx.mark_cliffs(ring([1.0, 0.2, 1.0, 1.0, 0.95, 1.0]), 0.1)
    c = np.flatnonzero((cols.q == 0) & (cols.r == 0))[0]
    assert cols.cliff[c].tolist() == [False, True, False, False, False, False]
    with pytest.raises(ValueError):
        hx.mark_cliffs(cols, 0.0)


def test_hilbert_start_end_cliffs():
    d, bbox, grid, s = fitted("hilbert", 64)
    H = 0.5 * (bbox[2] - bbox[0])
    cols = hx.rasterize(s, grid, hx.default_gap_threshold(grid, bbox), height_scale=H)
    cols = hx.mark_cliffs(cols, 10 * grid.edge)
    g = cols.ground()
    nb = hx.neighbour_ground(cols, g)
    found = 0
    for i, row in enumerate(g):
        for k in range(6):
            j = nb[i, k]
            if j >= 0 and cols.t_top[row] > 0.75 and cols.t_top[j] < 0.25:
                assert cols.cliff[row, k]
                found += 1
    assert found > 10


def test_erode_flat_unchanged():
    cols = ring([1.0] * 6)
    out = hx.erode(cols, hx.HexGrid(1.0), 0.1)
    assert np.array_equal(out.top, cols.top)


def test_erode_spike():
    cols = ring([1.0] * 6, centre=9.0)
    g = hx.HexGrid(1.0)
    out = hx.erode(cols, g, 0.2)
    c = np.flatnonzero((out.q == 0) & (out.r == 0))[0]
    assert out.top[c] == pytest.approx(1.0 + 0.2 * 1.5)
    assert np.array_equal(hx.erode(out, g, 0.2).top, out.top)
    with pytest.raises(ValueError):
        hx.erode(cols, g, 0.0)


def test_erode_fixpoint_idempotent_and_bridges_untouched():
    d, bbox, grid, s = fitted("zorder", 16)
    cols = hx.rasterize(s, grid, hx.default_gap_threshold(grid, bbox), height_scale=1.0)
    once = hx.erode(cols, grid, 0.05)
    twice = hx.erode(once, grid, 0.05)
    assert np.array_equal(once.top, twice.top)
    assert np.array_equal(once.top[cols.bridge], cols.top[cols.bridge])
    assert np.all(once.top <= cols.top)
    step = hx.erode(cols, grid, 0.05, iterations=1)
    assert np.all(step.top >= once.top)
