"""
Sampling Ginibre products
=========================

Traces of S_2 = X1 X1^+ X2^+ X2 at finite N, compared with the exact finite-N
values from map counting, and the eigenvalue histogram against the limiting
density.  Small sizes so it runs in a few seconds.
"""
from ginibre_loops.montecarlo import eigen_density, estimate, fit_genus_expansion, ladder, sample_traces

for row in ladder(60, 2000, seed=1):
    print(f"N=60 {row.stat:10s} {row.estimate.mean:9.4f} +- {row.estimate.stderr:.4f}  "
          f"exact {row.exact:9.4f}  planar {row.leading:5.1f}  z={row.z:+.2f}")

Ns = (20, 40, 80)
points = [estimate(sample_traces(N, 2, 2000, seed=2), (2,), N, 1 / N) for N in Ns]
fit = fit_genus_expansion(points)
print(f"\nm2/N = a + b/N^2: a = {fit.a:.4f} +- {fit.sa:.4f} (3), b = {fit.b:.2f} +- {fit.sb:.2f} (1)")

rep = eigen_density(60, 100, bins=30, seed=3)
print(f"\nhistogram at N=60, 100 matrices: sup relative deviation {rep.sup_rel_dev:.3f}")
total = sum(rep.counts) + rep.overflow


def bar(mass, ch):
    n = int(400 * mass)
    return ch * 40 + ">" if n > 40 else ch * n


for lo, c, m in zip(rep.edges[::3], rep.counts[::3], rep.expected_mass[::3]):
    print(f"  {lo:5.2f} {bar(c / total, '#'):41s} expected {bar(m, '*')}")
