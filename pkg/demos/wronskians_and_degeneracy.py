"""Connection Wronskians and the degeneracy dichotomy.

The covariant Wronskian of a curve vanishes identically exactly when the
curve sits inside a totally geodesic hypersurface.  On the product of two
lines with the flat logarithmic connection those hypersurfaces are the
curves x^m y^n = c; on projective space they are hyperplanes.
"""

import numpy as np

from nevlab import (
    CurveMap,
    P1xP1Flat,
    ProjectiveFS,
    degeneracy_probe,
    parse,
    to_meromorphic,
    wronskian,
)


def product_curve(f_text, g_text):
    return CurveMap(
        P1xP1Flat(), (to_meromorphic(parse(f_text)), to_meromorphic(parse(g_text)))
    )


# a nondegenerate pair: F = e^z, G = (e^z+1)/(e^z-1)
curve = product_curve("exp(z)", "(exp(z)+1)/(exp(z)-1)")
w1 = wronskian(curve, 1.0 + 0j)
e = np.exp(1.0)
closed = 2 * e * (e**2 + 1) / (e**2 - 1) ** 2 * e * ((e + 1) / (e - 1))
print(f"W(1) = {w1:.6f}  (hand closed form {closed:.6f})")

print("\nDegeneracy probe over 64 circle points:")
for label, c in [
    ("(e^z, (e^z+1)/(e^z-1))", curve),
    ("(e^z, e^{2z})         ", product_curve("exp(z)", "exp(2*z)")),
    (
        "[1 : e^z : e^z]       ",
        CurveMap(ProjectiveFS(2), (parse("1"), parse("exp(z)"), parse("exp(z)"))),
    ),
]:
    v = degeneracy_probe(c)
    detail = ""
    if v.kind == "flat_relation":
        detail = f"  x^{v.m} y^{v.n} = {v.c:.3f}"
    elif v.kind == "projective_linear":
        detail = f"  coefficients {np.round(np.asarray(v.coefficients), 6)}"
    print(f"  {label}: {v.kind} (evidence {v.evidence:.2e}){detail}")
