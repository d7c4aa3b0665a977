"""Commutator and adjoint tables, solvability, and canonical one-dimensional
subalgebra representatives."""

from fluidsym import liealg as la

for theory in ("eckart", "israel-stewart"):
    alg = la.table_algebra(theory)
    print(f"=== {theory}: commutator table ===")
    for i in range(alg.dim):
        row = [la.commutator_table_entry(alg, i, j) for j in range(alg.dim)]
        print(f"  V{i + 1}: " + "  ".join(f"{c:<12}" for c in row))
    print(f"=== {theory}: adjoint table Ad(exp(eps*Vi))Vj ===")
    for i in range(alg.dim):
        row = [la.adjoint_table_entry(alg, i, j) for j in range(alg.dim)]
        print(f"  V{i + 1}: " + "  ".join(f"{c:<12}" for c in row))
    solvable, order = la.is_solvable(alg)
    print(f"solvable: {solvable}, witness ordering: {order}")
    print()

alg = la.table_algebra("eckart")
print("normalization of general elements (a1*V1 + a2*V2 + a3*V3 + a4*V4):")
for coeffs in ((1.0, 0.7, 1.0, 0.0), (0.0, 0.0, 0.0, 5.0), (2.0, 1.0, 0.0, 3.0)):
    el, word = la.normalize_element(alg, coeffs)
    print(f"  {coeffs} -> {tuple(round(c, 6) for c in el.coefficients)}"
          f"  via {[w[0] for w in word]}")

print()
print("full five-dimensional algebra (both closures):")
alg5 = la.full_algebra()
for i in range(alg5.dim):
    row = [la.commutator_table_entry(alg5, i, j) for j in range(alg5.dim)]
    print(f"  V{i + 1}: " + "  ".join(f"{c:<6}" for c in row))
print(f"derived series dimensions: {la.derived_series(alg5)} (solvable)")
