"""The truncated Russo decomposition d/dp E_{p,n}[F(K)] = U - D, exactly.

On a tiny graph every percolation configuration can be enumerated with
rational arithmetic, so the derivative of a truncated expectation and its
split into the growth term U (finite clusters getting bigger) and the loss
term D (clusters breaking the truncation threshold) agree to machine zero.
"""

from percolab import FiniteSubgraph
from percolab.enumeration import (configuration_table, d_term,
                                  enumerate_truncated_expectation,
                                  functional_volume, u_term)

# a 4-cycle with a pendant vertex
H = FiniteSubgraph(range(5), [(0, 1), (1, 2), (2, 3), (3, 0), (2, 4)])
root = 0
table = configuration_table(H, root)

print("E_{p,n}[|K|] on a 4-cycle plus pendant, truncation on touched edges\n")
for n in (2, 4, 5):
    poly = enumerate_truncated_expectation(H, functional_volume, n, root, table)
    dpoly = poly.derivative()
    print(f"n = {n}: E_p[|K| ; E_v <= {n}] has exact coefficients "
          f"{[str(c) for c in poly.coeffs]}")
    for p in (0.2, 0.5, 0.8):
        u = u_term(H, functional_volume, n, p, root, table)
        d = d_term(H, functional_volume, n, p, root, table)
        lhs = float(dpoly(p))
        print(f"  p = {p}: d/dp = {lhs:+.6f}   U = {u:.6f}   D = {d:.6f}"
              f"   residual = {abs(lhs - (u - d)):.2e}")
    print()
print("U vanishes for constant functionals; D vanishes once n covers every")
print("edge; both checked in tests/test_enumeration.py.")
