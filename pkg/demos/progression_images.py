"""Grey and colour progression images: every pixel takes the shade of the
parameter at which the curve last visits it.

    python3 demos/progression_images.py
"""
from pathlib import Path

import numpy as np

from pftrail import builtin, imaging

here = Path(__file__).parent
for name in ("polya", "hilbert", "gosper"):
    defn = builtin(name)
    for scheme in ("gray", "rainbow"):
        img = imaging.progression_image(defn, 256, 256, scheme)
        path = here / f"{name}-{scheme}.ppm"
        imaging.write_ppm(img, path)
    t = imaging.parameter_raster(defn, 256, 256)
    seen = ~np.isnan(t)
    print(f"{name:8s} visited {seen.mean():6.1%} of the frame, "
          f"mean t left half {np.nanmean(t[:, :128]):.3f}, "
          f"right half {np.nanmean(t[:, 128:]):.3f}")
