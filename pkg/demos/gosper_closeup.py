"""Polynomial close-ups of the Gosper curve around f(2/7), the centre of a
spiral, for a range of zoom factors.

Larger zeta magnifies the neighbourhood of the focus, so a fixed grid
spends its cells on the innermost turns of the spiral and fewer distinct
terrace heights remain in the frame.

    python3 demos/gosper_closeup.py
"""
from pathlib import Path

import numpy as np

from pftrail import cli, meshgen, traversal
from pftrail.curvedef import builtin, segment_transforms

defn = cli.checked(cli.load("gosper", True))
sim = segment_transforms(builtin("gosper").generators[0])[0].similarity
print(f"spiral growth per revolution: {traversal.spiral_growth_per_revolution(sim):,.0f}")

for zeta in (1.0, 2.0, 5.0):
    cfg = cli.RenderConfig(source="gosper", builtin=True, grid=96, zoom_t=2 / 7,
                           zeta=zeta, threads=1)
    scene = cli.build_scene(defn, cfg)
    terrain = scene.meshes[0]
    up = terrain.face_normals()[:, 2] > 0.999
    levels = len(np.unique(terrain.vertices[terrain.triangles[up]][..., 2]))
    out = Path(__file__).with_name(f"gosper-zeta{zeta:g}.dae")
    meshgen.write_collada(scene.meshes, scene.config, out)
    print(f"zeta {zeta:g}: t exponent {traversal.closeup_exponent(zeta):.3f}, "
          f"{levels} distinct cap heights -> {out.name}")
