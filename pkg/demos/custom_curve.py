"""Define a curve in the text format, inspect it and invert a point.

The generator below is a Polya variant on the right triangle with apex
(1/5, 2/5). The two pieces have scales sqrt(1/5) and sqrt(4/5), so their
squared scales add up to one and the weights come out as 1/5 and 4/5.

    python3 demos/custom_curve.py
"""
from pftrail import curvedef, traversal

TEXT = """\
curve lopsided
generator P basis square
seg 1/5 2/5 F
seg 4/5 -2/5 F
"""

defn = curvedef.parse_definition(TEXT)
report = curvedef.validate(defn)
print(report.ok and "valid" or report)
for s in curvedef.segment_transforms(defn.generators[0]):
    print(f"scale {s.similarity.scale:.4f}  weight {s.weight:.4f}")
bound = traversal.expansion_radius(defn)
print(f"expansion radius R = {bound.radius:.4f}")

p = traversal.point_at(defn, 0.3)
t = traversal.inverse_at(defn, (p.x, p.y), 1e-6)
print(f"f(0.3) = ({p.x:.6f}, {p.y:.6f}); first visit within 1e-6 at t = {t:.9f}")
