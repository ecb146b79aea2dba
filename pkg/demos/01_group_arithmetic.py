"""A tour of the group arithmetic: products, inverses, dilations, gauge.

Everything here is exact (closed-form nilpotent products), so the printed
residuals should sit at machine precision.
"""

import numpy as np

from carnotpde.groups import (
    dilate,
    engel_group,
    euclidean_group,
    gauge_norm,
    heisenberg_group,
    inverse,
    multiply,
)

rng = np.random.default_rng(7)

for G in (euclidean_group(2), heisenberg_group(), engel_group()):
    print(f"== {G.label}: layers {G.layer_dims}, step {G.step}, "
          f"homogeneous dimension Q = {G.homogeneous_dimension}")

    p, q, r = rng.uniform(-1.5, 1.5, size=(3, G.total_dim))
    pq = multiply(G, p, q)
    print("   p * q          =", np.round(pq, 4))
    print("   p * p^{-1}     =", np.round(multiply(G, p, inverse(G, p)), 12))

    assoc = multiply(G, multiply(G, p, q), r) - multiply(G, p, multiply(G, q, r))
    print(f"   associativity residual: {np.abs(assoc).max():.2e}")

    # the gauge is homogeneous of degree 1 under the anisotropic dilations
    for s in (0.5, 2.0):
        lhs = gauge_norm(G, dilate(G, s, p))
        rhs = s * gauge_norm(G, p)
        print(f"   N(dilate_{s}(p)) = {lhs:.6f}   vs  {s}*N(p) = {rhs:.6f}")
    print()

# non-commutativity shows up from layer 2 on
G = heisenberg_group()
x = np.array([1.0, 0.0, 0.0])
y = np.array([0.0, 1.0, 0.0])
print("heisenberg1:  x*y =", multiply(G, x, y), "  y*x =", multiply(G, y, x))
print("the vertical coordinate records the signed area between the paths")
