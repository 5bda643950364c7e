"""Command-line front end: ``pftrail render | image | info | invert``."""
from __future__ import annotations

import argparse
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import curvedef, hexraster, imaging, meshgen, traversal
from .curvedef import CurveDefinition, DefinitionError
from .traversal import NonContractingError, NotOnCurveError, Samples

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


@dataclass
class RenderConfig:
    source: str = "polya"                 # builtin name or file path
    builtin: bool = True
    grid: int = 128
    height: float | None = None           # None: half the footprint width
    merge: str = "max"
    gap: float | None = None              # None: 10 x cell area / bbox area
    revisits: str = "bridge"
    parapets: bool = True
    parapet_height: float | None = None
    parapet_thickness: float | None = None
    parapet_trigger: float | None = None
    style: str = "normal"
    slope: float = 1.0
    colormap: str = "rainbow"
    azimuth: float = 210.0
    elevation: float = 35.0
    distance: float = 2.2
    fov: float = 50.0
    background: bool = True
    oversample: int = 1
    zoom_t: float | None = None
    focus: tuple[float, float] | None = None
    zeta: float = 1.0
    threads: int = 1
    output: str = "out.dae"

    def check(self):
        if self.grid < 8:
            raise UsageError("grid resolution must be at least 8")
        if self.oversample < 1:
            raise UsageError("oversample must be at least 1")
        if (self.zoom_t is not None or self.focus is not None) and self.zeta < 1:
            raise UsageError("zoom factor must be at least 1")
        if self.zoom_t is not None and not 0.0 <= self.zoom_t <= 1.0:
            raise UsageError("zoom parameter must lie in [0, 1]")
        if self.gap is not None and self.gap <= 0:
            raise UsageError("layer gap must be positive")
        if self.threads < 1:
            raise UsageError("thread count must be at least 1")
        if self.style == "eroded" and self.slope <= 0:
            raise UsageError("slope limit must be positive")


@dataclass
class Scene:
    meshes: list
    config: meshgen.SceneConfig
    stats: dict = field(default_factory=dict)


def load(source: str, is_builtin: bool) -> CurveDefinition:
    """Definition from the catalogue or a file; raises DefinitionError."""
    if is_builtin:
        try:
            return curvedef.builtin(source)
        except KeyError as exc:
            raise DefinitionError(str(exc.args[0])) from None
    try:
        return curvedef.load_definition(source)
    except OSError as exc:
        raise DefinitionError(f"cannot read {source}: {exc.strerror}") from None


def checked(defn: CurveDefinition) -> CurveDefinition:
    rep = curvedef.validate(defn)
    for w in rep.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if rep.errors:
        raise NonContractingError("; ".join(rep.errors))
    return defn


def build_scene(defn: CurveDefinition, cfg: RenderConfig) -> Scene:
    """Run the full pipeline up to (but not including) serialization."""
    stats, clock = {}, time.perf_counter()

    def lap(name):
        nonlocal clock
        now = time.perf_counter()
        stats[f"time_{name}"] = now - clock
        clock = now

    bound = traversal.expansion_radius(defn)
    R = bound.radius
    stats["R"], stats["R_depth"] = R, bound.depth_used
    zoom = None
    if cfg.zoom_t is not None or cfg.focus is not None:
        if cfg.focus is not None:
            fxy = cfg.focus
            t_focus = traversal.inverse_at(defn, fxy, 1e-9, radius=R)
        else:
            t_focus = cfg.zoom_t
            fxy = tuple(traversal.point_at(defn, t_focus))
        zoom = (fxy, cfg.zeta)
    bbox = traversal.bounding_box(defn, radius=R, zoom=zoom)
    grid = hexraster.HexGrid.fit(bbox, cfg.grid)
    width = bbox[2] - bbox[0]
    H = 0.5 * width if cfg.height is None else cfg.height
    tau = hexraster.default_gap_threshold(grid, bbox) if cfg.gap is None else cfg.gap
    max_gap = grid.edge / (2.0 * R)
    stats.update(edge=grid.edge, max_gap=max_gap, gap_threshold=tau)
    lap("setup")

    count = [0]

    def stream():
        chunks = traversal.sample_chunks(defn, max_gap, cfg.oversample, zoom=zoom,
                                         threads=cfg.threads, radius=R)
        for s in chunks:
            count[0] += len(s)
            if zoom is None:
                yield s, s.t
                continue
            p = traversal.closeup(np.column_stack([s.x, s.y, s.t]), (zoom[0], t_focus),
                                  cfg.zeta)
            # cluster by the original parameter, lift by the transformed one
            yield Samples(s.t, p[:, 0], p[:, 1], s.on_jump), p[:, 2]

    cols = hexraster.rasterize(stream(), grid, tau, cfg.merge, revisits=cfg.revisits)
    if zoom is not None:
        # re-anchor so the lowest possible elevation (t = 0) sits at zero
        expo = traversal.closeup_exponent(cfg.zeta)
        z0 = -(t_focus ** expo)
        z1 = (1.0 - t_focus) ** expo
        cols = cols.copy(top=(cols.top - z0) / (z1 - z0))
    cols = cols.copy(top=cols.top * H)
    stats.update(samples=count[0], cells=len(cols), layers=cols.n_layers,
                 bridges=int(cols.bridge.sum()))
    lap("sample_rasterize")

    scfg = meshgen.SceneConfig(
        fov=cfg.fov, background=cfg.background, parapets=cfg.parapets,
        parapet_height=cfg.parapet_height, parapet_thickness=cfg.parapet_thickness,
        parapet_trigger=cfg.parapet_trigger)
    par = scfg.resolved(grid.edge)
    cols = hexraster.mark_cliffs(cols, par["parapet_trigger"])
    if cfg.style == "eroded":
        cols = hexraster.erode(cols, grid, cfg.slope)
    terrain = meshgen.build_terrain(cols, grid, scfg, cfg.colormap,
                                    elevation_range=(0.0, H))
    bb = terrain.bbox()
    eye, target, fov = meshgen.default_camera(bb, cfg.azimuth, cfg.elevation,
                                              cfg.distance, cfg.fov)
    scfg.camera, scfg.look_at = eye, target
    meshes = [terrain]
    if cfg.background:
        meshes.append(meshgen.build_background(
            scfg, (bb[0], bb[1], 0.0, bb[3], bb[4], bb[5])))
    stats["triangles"] = sum(len(m) for m in meshes)
    lap("mesh")
    return Scene(meshes, scfg, stats)


# ---------------------------------------------------------------------------
# argument parsing

def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _numbers(count):
    def parse(text):
        parts = text.split(",")
        if len(parts) != count:
            raise argparse.ArgumentTypeError(
                f"expected {count} comma-separated numbers, got {text!r}")
        return tuple(_number(p) for p in parts)
    return parse


def _size(text: str):
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def _default_threads() -> int:
    env = os.environ.get("PFTRAIL_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_source(p):
    p.add_argument("input", nargs="?", help="curve definition file (.pfc)")
    p.add_argument("--builtin", metavar="NAME",
                   help="catalogue curve: " + ", ".join(curvedef.builtin_names()))


def _add_threads(p):
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $PFTRAIL_THREADS or CPU count)")


class _Formatter(argparse.ArgumentDefaultsHelpFormatter):
    """Appends defaults unless the help text already describes one."""

    def _get_help_string(self, action):
        if "default" in (action.help or ""):
            return action.help
        return super()._get_help_string(action)


def make_parser() -> argparse.ArgumentParser:
    fmt = _Formatter
    parser = argparse.ArgumentParser(
        prog="pftrail", formatter_class=fmt,
        description="Terrain models and progression images of plane-filling curves.")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", formatter_class=fmt,
                       help="build a 3D terrain model and write COLLADA")
    _add_source(r)
    r.add_argument("-o", "--output", default="out.dae", help="output .dae path")
    r.add_argument("--grid", type=int, default=128,
                   help="hexagon columns across the bounding box (N)")
    r.add_argument("--height", type=float, default=None,
                   help="elevation of t=1 in world units (default: half the width)")
    r.add_argument("--merge", choices=hexraster.MERGE_POLICIES, default="max",
                   help="elevation policy within a cell cluster")
    r.add_argument("--gap", type=float, default=None,
                   help="parameter gap starting a new layer "
                        "(default: 10 x cell area / bbox area)")
    r.add_argument("--revisits", choices=("bridge", "merge"), default="bridge",
                   help="render cell revisits as floating bridges or fold them "
                        "into the ground layer")
    r.add_argument("--parapets", action=argparse.BooleanOptionalAction, default=True,
                   help="rims on top of high cliffs")
    r.add_argument("--parapet-height", type=float, default=None,
                   help="rim height (default: 1.5 e)")
    r.add_argument("--parapet-thickness", type=float, default=None,
                   help="rim thickness (default: 0.25 e)")
    r.add_argument("--parapet-trigger", type=float, default=None,
                   help="cliff height that triggers a rim (default: 20 e)")
    r.add_argument("--style", choices=("normal", "eroded"), default="normal",
                   help="terrain style")
    r.add_argument("--slope", type=float, default=1.0,
                   help="talus slope limit of the eroded style, in e per 1.5 e")
    r.add_argument("--colormap", choices=sorted(meshgen.COLORMAPS), default="rainbow",
                   help="colour scheme")
    r.add_argument("--azimuth", type=float, default=210.0, help="camera azimuth, degrees")
    r.add_argument("--elevation", type=float, default=35.0,
                   help="camera elevation, degrees")
    r.add_argument("--distance", type=float, default=2.2,
                   help="camera distance in bounding-box diagonals")
    r.add_argument("--fov", type=float, default=50.0, help="vertical field of view, degrees")
    r.add_argument("--background", action=argparse.BooleanOptionalAction, default=True,
                   help="front plane, cliff and back plane")
    r.add_argument("--oversample", type=int, default=1, help="sampling density factor k")
    zoom = r.add_mutually_exclusive_group()
    zoom.add_argument("--zoom", type=_numbers(2), metavar="T,ZETA", default=None,
                      help="polynomial close-up at f(T) with factor ZETA (T may be a "
                           "fraction such as 2/7)")
    zoom.add_argument("--focus", type=_numbers(3), metavar="X,Y,ZETA", default=None,
                      help="close-up at an explicit point")
    _add_threads(r)

    i = sub.add_parser("image", formatter_class=fmt, help="write a progression image (PPM)")
    _add_source(i)
    i.add_argument("-o", "--output", default="out.ppm", help="output .ppm path")
    i.add_argument("--size", type=_size, default="256x256", metavar="WxH",
                   help="image size in pixels")
    i.add_argument("--scheme", choices=("gray", "rainbow"), default="gray",
                   help="colour scheme")
    i.add_argument("--policy", choices=imaging.POLICIES, default="last",
                   help="which visit colours a pixel")
    _add_threads(i)

    n = sub.add_parser("info", formatter_class=fmt,
                       help="describe generators, weights and expansion radius")
    _add_source(n)
    n.add_argument("--depth", type=int, default=6, help="expansion-radius depth")

    v = sub.add_parser("invert", formatter_class=fmt,
                       help="smallest parameter visiting a point")
    _add_source(v)
    v.add_argument("--point", type=_numbers(2), required=True, metavar="X,Y")
    v.add_argument("--eps", type=float, default=1e-6, help="distance tolerance")
    return parser


def _source(args):
    if args.builtin and args.input:
        raise UsageError("give either a file or --builtin, not both")
    if not args.builtin and not args.input:
        raise UsageError("no curve given (file or --builtin)")
    return (args.builtin, True) if args.builtin else (args.input, False)


def _threads(args) -> int:
    return _default_threads() if args.threads is None else args.threads


def _log(msg: str):
    print(msg, file=sys.stderr)


def run_render(args) -> int:
    src, is_builtin = _source(args)
    zoom_t, focus, zeta = None, None, 1.0
    if args.zoom is not None:
        zoom_t, zeta = args.zoom
    if args.focus is not None:
        focus, zeta = args.focus[:2], args.focus[2]
    cfg = RenderConfig(
        source=src, builtin=is_builtin, grid=args.grid, height=args.height,
        merge=args.merge, gap=args.gap, revisits=args.revisits,
        parapets=args.parapets, parapet_height=args.parapet_height,
        parapet_thickness=args.parapet_thickness,
        parapet_trigger=args.parapet_trigger, style=args.style, slope=args.slope,
        colormap=args.colormap, azimuth=args.azimuth, elevation=args.elevation,
        distance=args.distance, fov=args.fov, background=args.background,
        oversample=args.oversample, zoom_t=zoom_t, focus=focus, zeta=zeta,
        threads=_threads(args), output=args.output)
    cfg.check()
    if not 10.0 < cfg.fov < 120.0:
        raise UsageError("field of view must lie in (10, 120) degrees")
    defn = checked(load(cfg.source, cfg.builtin))
    start = time.perf_counter()
    scene = build_scene(defn, cfg)
    t0 = time.perf_counter()
    try:
        meshgen.write_collada(scene.meshes, scene.config, cfg.output)
    except OSError as exc:
        _log(f"error: cannot write {cfg.output}: {exc.strerror}")
        return EXIT_IO
    st = scene.stats
    st["time_write"] = time.perf_counter() - t0
    _log(f"R = {st['R']:.6g} (depth {st['R_depth']})")
    _log(f"edge = {st['edge']:.6g}, max_gap = {st['max_gap']:.6g}, "
         f"layer gap = {st['gap_threshold']:.6g}")
    _log(f"samples = {st['samples']}, cells = {st['cells']}, layers = {st['layers']} "
         f"({st['bridges']} bridges), triangles = {st['triangles']}")
    _log("time: " + ", ".join(f"{k[5:]} {v:.2f}s" for k, v in st.items()
                               if k.startswith("time_"))
         + f", total {time.perf_counter() - start:.2f}s")
    return EXIT_OK


def run_image(args) -> int:
    src, is_builtin = _source(args)
    w, h = args.size
    if w < 1 or h < 1:
        raise UsageError("image size must be at least 1x1")
    defn = checked(load(src, is_builtin))
    start = time.perf_counter()
    img = imaging.progression_image(defn, w, h, args.scheme, args.policy,
                                    threads=_threads(args))
    try:
        imaging.write_ppm(img, args.output)
    except OSError as exc:
        _log(f"error: cannot write {args.output}: {exc.strerror}")
        return EXIT_IO
    _log(f"{w}x{h} image written in {time.perf_counter() - start:.2f}s")
    return EXIT_OK


def run_info(args) -> int:
    src, is_builtin = _source(args)
    defn = load(src, is_builtin)
    rep = curvedef.validate(defn)
    out = sys.stdout
    out.write(f"curve {defn.name}\n")
    if defn.restriction is not None:
        out.write(f"restriction [{defn.restriction[0]:.12g}, {defn.restriction[1]:.12g}]\n")
    for g in defn.generators:
        segs = curvedef.segment_transforms(g) if not rep.errors else []
        start = " (start)" if g.id == defn.start else ""
        out.write(f"generator {g.id}{start}: basis {g.basis}, "
                  f"{len(g.segments)} segments, {len(g.items) - len(g.segments)} jumps\n")
        for k, s in enumerate(segs):
            flags = ("R" if s.reversed else "") + ("F" if s.similarity.mirrored else "")
            out.write(f"  {k + 1:2d}  scale {s.similarity.scale:.9f}  "
                      f"rotation {math.degrees(s.similarity.rotation):11.6f}  "
                      f"weight {s.weight:.9f}  flags {flags or '-':2s}  -> {s.target}\n")
        if segs:
            out.write(f"  sum of weights {math.fsum(s.weight for s in segs):.12g}\n")
    for e in rep.errors:
        out.write(f"error: {e}\n")
    for w in rep.warnings:
        out.write(f"warning: {w}\n")
    if rep.errors:
        return EXIT_INVALID
    bound = traversal.expansion_radius(defn, depth=args.depth)
    out.write(f"expansion radius R = {bound.radius:.9f} (depth {bound.depth_used})\n")
    out.write("validation: ok\n")
    return EXIT_OK


def run_invert(args) -> int:
    src, is_builtin = _source(args)
    defn = checked(load(src, is_builtin))
    if args.eps <= 0:
        raise UsageError("eps must be positive")
    try:
        t = traversal.inverse_at(defn, args.point, args.eps)
    except NotOnCurveError:
        print("not on curve")
        return EXIT_OK
    print(f"{t:.15g}")
    return EXIT_OK


COMMANDS = {"render": run_render, "image": run_image, "info": run_info,
            "invert": run_invert}


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return EXIT_USAGE
    except DefinitionError as exc:
        _log(f"parse error: {exc}")
        return EXIT_PARSE
    except NonContractingError as exc:
        _log(f"validation error: {exc}")
        return EXIT_INVALID
    except NotOnCurveError as exc:
        _log(f"usage error: focus {exc}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
