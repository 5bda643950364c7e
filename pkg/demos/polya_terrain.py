"""Render Polya's triangle-filling curve as a terraced landscape.

Writes polya.dae next to this script; open it in Blender (File, Import,
Collada) to look at the model.

    python3 demos/polya_terrain.py [grid]
"""
import sys
from pathlib import Path

from pftrail import cli, meshgen


def main():
    grid = int(sys.argv[1]) if len(sys.argv) > 1 else 96
    defn = cli.checked(cli.load("polya", True))
    cfg = cli.RenderConfig(source="polya", builtin=True, grid=grid, threads=1)
    scene = cli.build_scene(defn, cfg)
    out = Path(__file__).with_name("polya.dae")
    meshgen.write_collada(scene.meshes, scene.config, out)
    st = scene.stats
    print(f"R = {st['R']:.4f}, {st['samples']} samples, {st['cells']} cells, "
          f"{st['triangles']} triangles -> {out}")


if __name__ == "__main__":
    main()
