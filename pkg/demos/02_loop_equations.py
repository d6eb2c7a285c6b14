"""
Solving the loop equations
==========================

Each W_{g,n} is obtained from lower-complexity entries by isolating it in
its loop equation.  Entries with up to three points are solved in the full
rational function field; larger ones go through exact slices in z_1.
"""
import logging

from ginibre_loops import golden
from ginibre_loops.loops import GENUS_OFFSET, ResolventTable, property_report, solve_all, solve_wgn, to_w_form

logging.basicConfig(level=logging.INFO, format="%(message)s")

table = solve_all(3)

print("\nw_1,1 =", to_w_form(table, 1, 1).to_text(unicode=True))
print("w_0,3 =", to_w_form(table, 0, 3).to_text(unicode=True))

for (g, n, tilde), form in golden.CLOSED_FORMS.items():
    same = to_w_form(table, g, n, tilde=tilde).equals(form())
    print(f"({g},{n}{', tilde' if tilde else ''}) matches the printed closed form: {same}")

print("\nproperties")
for p in property_report(table):
    print(f"  w_{p.g},{p.n}: poles only at 0, -3/2: {p.confined}; "
          f"positive numerator: {p.positive_numerator}; {p.method}, {p.seconds:.2f}s")

# shifting the genus bookkeeping by one breaks the very first correction
mutated = ResolventTable(genus_offset=GENUS_OFFSET + 1)
try:
    solve_wgn(mutated, 1, 1, check=False)
    print("\nshifted genus constraint reproduces w_1,1:",
          to_w_form(mutated, 1, 1).equals(golden.CLOSED_FORMS[(1, 1, False)]()))
except Exception as exc:
    print("\nshifted genus constraint cannot even solve w_1,1:", exc)
