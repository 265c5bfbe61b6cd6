"""Desk-scale verification of second-main-theorem inequalities.

Each check builds a growth table over a radius grid, assembles the truncated
counting side, fits the small error allowance c0 + c1 log r + c2 log+ T on
the non-exceptional radii, and reports a per-radius margin.
"""

import numpy as np

from nevlab import (
    CurveMap,
    DivisorSpec,
    Hyperplane,
    P1xP1Flat,
    ProjectiveFS,
    TorusCurve,
    check_cartan,
    check_smt7,
    parse,
    to_meromorphic,
)

grid = [float(r) for r in np.geomspace(5, 40, 10)]


def show(title, report):
    print(f"\n{title}: verdict {report.verdict} "
          f"(eps-exceptional radii: {list(report.exceptional) or 'none'})")
    print(f"  allowance model: {report.model.c0:.3f} + {report.model.c1:.3f} log r "
          f"+ {report.model.c2:.3f} log+ T")
    print(f"  {'r':>7} {'lhs':>9} {'rhs':>9} {'margin':>9}")
    for r, l, v, m in zip(report.radii, report.lhs, report.rhs, report.margin):
        print(f"  {r:7.2f} {l:9.4f} {v:9.4f} {m:9.4f}")


# truncated inequality on the line: e^z against three points
line_curve = CurveMap(ProjectiveFS(1), (parse("exp(z)"), parse("1")))
points = [Hyperplane((1.0, 0.0)), Hyperplane((0.0, 1.0)), Hyperplane((1.0, 1.0))]
show("Truncated SMT on the line (e^z vs {0, inf, -1})",
     check_cartan(line_curve, points, grid, 0.05))

# product target: torus curve divisor plus the boundary
prod_curve = CurveMap(
    P1xP1Flat(),
    (to_meromorphic(parse("exp(z)")), to_meromorphic(parse("(exp(z)+1)/(exp(z)-1)"))),
)
D = DivisorSpec(P1xP1Flat(), (TorusCurve(1, 1, 3.0),))
report = check_smt7(prod_curve, D, grid, 0.05)
show("Torus-divisor SMT on the product of two lines", report)
if report.derived:
    print("\n  derived corollary row:", report.derived)
