"""Locating zeros by the argument principle, and counting functions.

The zero finder needs only an entire expression and a disc: it computes the
winding number of the boundary, then quadrisects until each zero is isolated
to within 1e-9, conserving the total multiplicity at every step.
"""

import math

from nevlab import Disc, N_trunc, locate_zeros, parse

h = parse("exp(z) - 1")
for radius in (7.0, 10.0, 20.0):
    zs = locate_zeros(h, Disc(0j, radius))
    print(f"\n|z| < {radius}: {zs.total()} zeros of e^z - 1")
    for z, m in zs.zeros:
        k = round(z.imag / (2 * math.pi))
        print(f"  z = {z.real:+.2e} {z.imag:+.9f}i  (mult {m}, expect 2*pi*{k}i)")

zs = locate_zeros(h, Disc(0j, 10.0))
print("\nTruncated counting function, base radius 1:")
for r in (2.0, 5.0, 10.0):
    print(f"  N_1({r:5.1f}) = {N_trunc(zs, r, 1):.6f}")
print("closed form at r = 10:", math.log(10) + 2 * math.log(10 / (2 * math.pi)))

# multiplicities are detected, not assumed
h2 = parse("(z - 1)^3 * (z + 2)")
zs2 = locate_zeros(h2, Disc(0j, 3.0))
print("\n(z-1)^3 (z+2):", [(round(z.real, 6), m) for z, m in zs2.zeros])
