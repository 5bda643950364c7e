"""Plane-filling traversal definitions.

A definition is a set of generators. Each generator is a chain of segment
and jump items laid out in its own lattice basis; the chain's net
displacement is the parent segment. Every segment is replaced by a
similar copy of its target generator, optionally mirrored (the copy is
reflected in the segment line) and/or reversed (the copy is traversed
backwards).

Text format (``.pfc``)::

    # comment
    curve hilbert
    start H
    restrict 0 1            # optional parameter restriction
    generator H basis square
    seg 0 1 F               # dx dy [R] [F] [-> target]
    seg 1 0
    jump 0 -1               # discontinuity, carries no flags

Numbers are integers, decimals, ``a/b`` rationals, and may carry an
``s3`` factor (``s3``, ``-s3``, ``1/2s3``, ``2*s3``) for sqrt(3).
"""
from __future__ import annotations

import cmath
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from importlib import resources
from typing import NamedTuple

__all__ = [
    "Vec2", "Similarity", "GeneratorItem", "Generator", "CurveDefinition",
    "DefinitionError", "ValidationReport", "SegmentTransform",
    "parse_definition", "format_definition", "load_definition", "validate",
    "segment_transforms", "builtin", "builtin_names", "inner_flip",
    "OPTIONAL_BUILTINS",
]

SQRT3 = math.sqrt(3.0)
BASES = {
    "square": (complex(1, 0), complex(0, 1)),
    "triangular": (complex(1, 0), complex(0.5, SQRT3 / 2)),
}
REQUIRED_BUILTINS = ("polya", "trapezoid", "hilbert", "peano", "zorder",
                     "gosper", "gosper-innerflip")
# Catalogued in the literature but not transcribed here.
OPTIONAL_BUILTINS = ("betaomega", "double-gray", "rauzy-half", "pinwheel")


class Vec2(NamedTuple):
    x: float
    y: float

    @classmethod
    def from_complex(cls, z: complex) -> "Vec2":
        return cls(z.real, z.imag)

    def to_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class Similarity:
    """Planar similarity ``p -> translation + scale * Rot(rotation) * M p``
    where ``M`` reflects in the x axis when ``mirrored``."""

    scale: float
    rotation: float
    mirrored: bool
    translation: Vec2

    @property
    def multiplier(self) -> complex:
        return cmath.rect(self.scale, self.rotation)

    def matrix(self):
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        k = self.scale
        if self.mirrored:
            return ((k * c, k * s), (k * s, -k * c))
        return ((k * c, -k * s), (k * s, k * c))

    def determinant(self) -> float:
        (a, b), (c, d) = self.matrix()
        return a * d - b * c

    def __call__(self, z: complex) -> complex:
        if self.mirrored:
            z = z.conjugate()
        return self.translation.to_complex() + self.multiplier * z


@dataclass(frozen=True)
class GeneratorItem:
    kind: str  # "segment" | "jump"
    displacement: Vec2
    reversed: bool = False
    mirrored: bool = False
    target_generator: str | None = None

    @property
    def is_segment(self) -> bool:
        return self.kind == "segment"


@dataclass(frozen=True)
class Generator:
    id: str
    basis: str
    items: tuple[GeneratorItem, ...]

    def gates(self) -> list[complex]:
        """Cumulative item endpoints in world orientation (not normalized)."""
        u, v = BASES[self.basis]
        pts = [0j]
        for it in self.items:
            pts.append(pts[-1] + it.displacement.x * u + it.displacement.y * v)
        return pts

    def net_displacement(self) -> complex:
        return self.gates()[-1]

    @property
    def segments(self) -> tuple[GeneratorItem, ...]:
        return tuple(it for it in self.items if it.is_segment)


@dataclass(frozen=True)
class CurveDefinition:
    name: str
    generators: tuple[Generator, ...]
    start: str
    restriction: tuple[float, float] | None = None

    def generator(self, gid: str) -> Generator:
        for g in self.generators:
            if g.id == gid:
                return g
        raise KeyError(gid)

    @property
    def generator_ids(self) -> tuple[str, ...]:
        return tuple(g.id for g in self.generators)


class DefinitionError(ValueError):
    """Malformed definition text or structurally invalid definition."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column or 1}: {message}"
        super().__init__(message)


@dataclass
class ValidationReport:
    errors: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self):
        lines = [f"error: {e}" for e in self.errors]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines) if lines else "ok"


class SegmentTransform(NamedTuple):
    similarity: Similarity
    weight: float
    reversed: bool
    target: str


# ---------------------------------------------------------------------------
# parsing

_NUM_RE = re.compile(
    r"^(?P<sign>[+-]?)"
    r"(?:(?P<num>\d+(?:\.\d*)?|\.\d+)(?:/(?P<den>\d+))?)?"
    r"(?P<s3>\*?s3)?$"
)


def _parse_number(tok: str) -> float:
    m = _NUM_RE.match(tok)
    if not m or (m.group("num") is None and m.group("s3") is None):
        raise ValueError(f"bad number {tok!r}")
    if m.group("s3") == "*s3" and m.group("num") is None:
        raise ValueError(f"bad number {tok!r}")
    value = 1.0
    if m.group("num") is not None:
        num = Fraction(m.group("num"))
        if m.group("den") is not None:
            den = int(m.group("den"))
            if den == 0:
                raise ValueError(f"zero denominator in {tok!r}")
            num /= den
        value = float(num)
    if m.group("s3"):
        value *= SQRT3
    return -value if m.group("sign") == "-" else value


def _tokens(line: str):
    """Yield (column, token) pairs, stripping comments."""
    line = line.split("#", 1)[0]
    for m in re.finditer(r"\S+", line):
        yield m.start() + 1, m.group()


def parse_definition(text: str) -> CurveDefinition:
    name = None
    start = None
    restriction = None
    gens: list[tuple[str, str, list[GeneratorItem], int]] = []
    refs: list[tuple[str, int, int]] = []

    def err(msg, ln, col=1):
        raise DefinitionError(msg, ln, col)

    def num(tok, ln, col):
        try:
            return _parse_number(tok)
        except ValueError as exc:
            err(str(exc), ln, col)

    for ln, raw in enumerate(text.splitlines(), start=1):
        toks = list(_tokens(raw))
        if not toks:
            continue
        (col, kw), rest = toks[0], toks[1:]
        if kw == "curve":
            if len(rest) != 1:
                err("expected 'curve <name>'", ln, col)
            name = rest[0][1]
        elif kw == "start":
            if len(rest) != 1:
                err("expected 'start <generator>'", ln, col)
            start = rest[0][1]
        elif kw == "restrict":
            if len(rest) != 2:
                err("expected 'restrict t0 t1'", ln, col)
            t0, t1 = (num(tok, ln, c) for c, tok in rest)
            if not (0.0 <= t0 < t1 <= 1.0):
                err("restriction must satisfy 0 <= t0 < t1 <= 1", ln, rest[0][0])
            restriction = (t0, t1)
        elif kw == "generator":
            if len(rest) != 3 or rest[1][1] != "basis":
                err("expected 'generator <id> basis square|triangular'", ln, col)
            gid, basis = rest[0][1], rest[2][1]
            if basis not in BASES:
                err(f"unknown basis {basis!r}", ln, rest[2][0])
            if any(g[0] == gid for g in gens):
                err(f"duplicate generator {gid!r}", ln, rest[0][0])
            gens.append((gid, basis, [], ln))
        elif kw in ("seg", "jump"):
            if not gens:
                err(f"'{kw}' outside a generator block", ln, col)
            if len(rest) < 2:
                err(f"expected '{kw} dx dy'", ln, col)
            dx = num(rest[0][1], ln, rest[0][0])
            dy = num(rest[1][1], ln, rest[1][0])
            flags = rest[2:]
            if kw == "jump":
                if flags:
                    err("jump items take no flags", ln, flags[0][0])
                gens[-1][2].append(GeneratorItem("jump", Vec2(dx, dy)))
                continue
            rev = mir = False
            target = None
            i = 0
            while i < len(flags):
                c, tok = flags[i]
                if tok == "R" and not rev:
                    rev = True
                elif tok == "F" and not mir:
                    mir = True
                elif tok == "->" and target is None and i + 1 < len(flags):
                    i += 1
                    target = flags[i][1]
                    refs.append((target, ln, flags[i][0]))
                else:
                    err(f"unexpected token {tok!r}", ln, c)
                i += 1
            if dx == 0 and dy == 0:
                err("segment with zero displacement", ln, col)
            gens[-1][2].append(GeneratorItem(
                "segment", Vec2(dx, dy), rev, mir, target or gens[-1][0]))
        else:
            err(f"unknown keyword {kw!r}", ln, col)

    if not gens:
        raise DefinitionError("no generators defined", 1, 1)
    ids = {g[0] for g in gens}
    for target, ln, col in refs:
        if target not in ids:
            err(f"unknown generator reference {target!r}", ln, col)
    if start is None:
        start = gens[0][0]
    elif start not in ids:
        raise DefinitionError(f"unknown start generator {start!r}")
    generators = []
    for gid, basis, items, ln in gens:
        if not any(it.is_segment for it in items):
            err(f"generator {gid!r} has no segments", ln)
        g = Generator(gid, basis, tuple(items))
        if abs(g.net_displacement()) < 1e-12:
            err(f"generator {gid!r} has zero net displacement", ln)
        generators.append(g)
    return CurveDefinition(name or gens[0][0], tuple(generators), start,
                           restriction)


def _fmt(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_definition(defn: CurveDefinition) -> str:
    """Canonical text form; ``parse_definition`` inverts it exactly."""
    out = [f"curve {defn.name}", f"start {defn.start}"]
    if defn.restriction is not None:
        out.append("restrict " + " ".join(_fmt(t) for t in defn.restriction))
    for g in defn.generators:
        out.append(f"generator {g.id} basis {g.basis}")
        for it in g.items:
            d = f"{_fmt(it.displacement.x)} {_fmt(it.displacement.y)}"
            if not it.is_segment:
                out.append(f"jump {d}")
                continue
            line = f"seg {d}"
            if it.reversed:
                line += " R"
            if it.mirrored:
                line += " F"
            if it.target_generator != g.id:
                line += f" -> {it.target_generator}"
            out.append(line)
    return "\n".join(out) + "\n"


def load_definition(path) -> CurveDefinition:
    with open(path, encoding="utf-8") as fh:
        return parse_definition(fh.read())


# ---------------------------------------------------------------------------
# analysis

def _contractions(g: Generator) -> list[float]:
    net = abs(g.net_displacement())
    u, v = BASES[g.basis]
    return [abs(it.displacement.x * u + it.displacement.y * v) / net
            for it in g.segments]


def validate(defn: CurveDefinition) -> ValidationReport:
    rep = ValidationReport()
    ids = set(defn.generator_ids)
    if defn.start not in ids:
        rep.errors.append(f"start generator {defn.start!r} is not defined")
    if defn.restriction is not None:
        t0, t1 = defn.restriction
        if not (0.0 <= t0 < t1 <= 1.0):
            rep.errors.append(f"invalid restriction [{t0}, {t1}]")
    for g in defn.generators:
        for it in g.segments:
            if it.target_generator not in ids:
                rep.errors.append(
                    f"generator {g.id!r}: dangling reference "
                    f"{it.target_generator!r}")
        if abs(g.net_displacement()) < 1e-12:
            rep.errors.append(f"generator {g.id!r}: zero net displacement")
            continue
        cs = _contractions(g)
        if not cs:
            rep.errors.append(f"generator {g.id!r}: no segments")
            continue
        worst = max(cs)
        if worst >= 1.0 - 1e-12:
            rep.errors.append(
                f"generator {g.id!r}: non-contracting segment (c = {worst:.6g})")
        total = sum(c * c for c in cs)
        if abs(total - 1.0) > 1e-9:
            rep.warnings.append(
                f"generator {g.id!r}: sum of squared contractions is "
                f"{total:.12g}, not 1")
    return rep


def segment_transforms(g: Generator,
                       defn: CurveDefinition | None = None) -> list[SegmentTransform]:
    """Per-segment similarities of ``g`` in its normalized frame.

    The frame maps the generator's net displacement to (0,0)->(1,0). Each
    similarity takes (0,0) to the segment start and (1,0) to the segment
    end. Jumps are skipped (they carry no transform and zero weight).
    """
    gates = g.gates()
    net = gates[-1]
    if abs(net) < 1e-12:
        raise DefinitionError(f"generator {g.id!r} has zero net displacement")
    if defn is not None:
        ids = set(defn.generator_ids)
    out = []
    for it, a, b in zip(g.items, gates, gates[1:]):
        if not it.is_segment:
            continue
        a, b = a / net, b / net
        d = b - a
        if abs(d) < 1e-15:
            raise DefinitionError(f"generator {g.id!r}: degenerate segment")
        if defn is not None and it.target_generator not in ids:
            raise DefinitionError(
                f"generator {g.id!r}: dangling reference {it.target_generator!r}")
        sim = Similarity(abs(d), cmath.phase(d), it.mirrored, Vec2.from_complex(a))
        out.append([sim, abs(d) ** 2, it.reversed, it.target_generator])
    total = sum(o[1] for o in out)
    for o in out:
        o[1] /= total
    # pin the last weight so the sum is exactly one
    out[-1][1] = 1.0 - math.fsum(o[1] for o in out[:-1])
    return [SegmentTransform(*o) for o in out]


# ---------------------------------------------------------------------------
# catalogue

def builtin_names() -> tuple[str, ...]:
    return REQUIRED_BUILTINS


def builtin(name: str) -> CurveDefinition:
    if name not in REQUIRED_BUILTINS:
        if name in OPTIONAL_BUILTINS:
            raise KeyError(f"builtin {name!r} is not transcribed in this catalogue")
        raise KeyError(f"unknown builtin curve {name!r}")
    text = resources.files("pftrail.catalogue").joinpath(f"{name}.pfc").read_text(
        encoding="utf-8")
    return parse_definition(text)


def inner_flip(defn: CurveDefinition) -> CurveDefinition:
    """Toggle the reversal flag of every segment; an involution."""
    gens = tuple(
        replace(g, items=tuple(
            replace(it, reversed=not it.reversed) if it.is_segment else it
            for it in g.items))
        for g in defn.generators)
    if defn.name.endswith("-innerflip"):
        name = defn.name[: -len("-innerflip")]
    else:
        name = defn.name + "-innerflip"
    return replace(defn, name=name, generators=gens)
