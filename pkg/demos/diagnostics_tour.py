"""Two-point operator diagnostics: where the L2 machinery lives and dies.

Finite-ball restrictions of the two-point matrix only lower-bound the
operator norm, so the honest output is a saturation sequence: on the
3-regular tree the norms settle when p < 1/sqrt(k-1) and keep climbing when
p is above it, and the triangle-diagram partial sums saturate at p_c.  The
square lattice plays the amenable control: its triangle sums keep growing.
"""

import percolab as pl

tree = pl.RegularTree(3)
print("== ball operator norms on the 3-regular tree (exact radial reduction)")
print("p = 0.5 < 1/sqrt(2) = p_{2->2}:")
prev = None
for R in (4, 6, 8, 10, 12):
    est = pl.ball_operator_norm(tree, 0.5, R)
    inc = "" if prev is None else f"  (+{est.norm / prev - 1:.2%})"
    print(f"  R = {R:2d}: norm = {est.norm:8.4f}{inc}")
    prev = est.norm
print("p = 0.75 > 1/sqrt(2):")
prev = None
for R in (4, 6, 8, 10, 12):
    est = pl.ball_operator_norm(tree, 0.75, R)
    inc = "" if prev is None else f"  (+{est.norm / prev - 1:.2%})"
    print(f"  R = {R:2d}: norm = {est.norm:8.4f}{inc}")
    prev = est.norm

print("\n== triangle diagram partial sums at p_c = 0.5 (tree, exact)")
tri = pl.triangle_diagram(tree, 0.5, 12)
print("  " + "  ".join(f"{s:.3f}" for s in tri.partial_sums))
print("  increments die off: the triangle condition is visibly summable")

print("\n== amenable control: Z^2 at its conventional critical point")
lat = pl.HypercubicLattice(2)
tri2 = pl.triangle_diagram(lat, 0.5, 5, replicates=600, seed=4)
print("  partial sums (window Monte Carlo, common random numbers):")
print("  " + "  ".join(f"{s:.3f}" for s in tri2.partial_sums))
print("  increments keep growing; d = 2 does not satisfy the triangle "
      "condition")

print("\n== two-point function decay")
for d in (1, 2, 4, 8):
    v = tree.root
    for _ in range(d):
        v = tree.neighbors(v)[-1]
    tp = pl.two_point(tree, 0.5, tree.root, v)
    print(f"  tree, distance {d}: P(u <-> v) = {tp.point:.6f} (= p^d exactly)")
