"""
Cumulants two ways
==================

Residues of x(z)^k w_{g,n} at z = -1 give the genus expansion coefficients
of trace cumulants.  Brute-force enumeration of bicolored maps counts the
same numbers directly.
"""
from ginibre_loops.loops import solve_through
from ginibre_loops.maps import enumerate_cumulants, laurent_text
from ginibre_loops.moments import MomentEngine, check_conjectures

engine = MomentEngine(solve_through([(1, 1), (0, 3)]))

print("k  residue c0_k  maps c0_k  residue c1_k  maps c1_k")
for k in range(1, 6):
    counts = enumerate_cumulants(2, (k,)).connected
    print(f"{k}  {str(engine.cumulant(0, (k,))):>12}  {counts.get(0, 0):>9}  "
          f"{str(engine.cumulant(1, (k,))):>12}  {counts.get(1, 0):>9}")

print("\nplanar two-point cumulants c0_ij")
for i in range(1, 6):
    print("  " + " ".join(f"{int(engine.cumulant(0, (i, j))):>8}" for j in range(1, 6)))

print("\nfull N dependence of Var Tr(S^2):",
      laurent_text(enumerate_cumulants(2, (2, 2)).cumulant_polynomial()))

rep = check_conjectures(engine, 7).to_json()
print("\nclosed-form guesses:", rep["status"])
