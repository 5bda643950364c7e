"""Plane-filling trails: terrain models and progression images of
plane-filling curves and traversals."""
from .curvedef import (CurveDefinition, DefinitionError, Generator, GeneratorItem,
                       Similarity, ValidationReport, Vec2, builtin, builtin_names,
                       format_definition, inner_flip, load_definition,
                       parse_definition, segment_transforms, validate)
from .hexraster import (ColumnSet, HexGrid, erode, mark_cliffs, rasterize,
                        world_to_cell)
from .imaging import RasterImage, progression_image, read_ppm, write_ppm
from .meshgen import (Mesh, SceneConfig, build_background, build_terrain,
                      write_collada)
from .traversal import (ExpansionBound, NonContractingError, NotOnCurveError,
                        SamplePoint, bounding_box, closeup, closeup_exponent,
                        expansion_radius,
                        inverse_at, point_at, sample, sample_arrays)

__version__ = "0.1.0"
