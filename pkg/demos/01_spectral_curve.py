"""
The spectral curve of the two-matrix product
=============================================

x(z) = z^3/(1+z) and y(z) = -(1+z)/z^2 parametrize x^2 y^3 - x y + 1 = 0.
This walks through the branch points, the limiting density and the
Fuss-Catalan moments it encodes.
"""
from ginibre_loops.curve import (EDGE, RAMIFICATION, build_curve, check_curve, density_integral, density_rho01,
                                 fuss_catalan, w01_explicit_check)

curve = build_curve("z")
print("x(z) =", curve.x_of_z.to_text())
print("y(z) =", curve.y_of_z.to_text())
print("identities:", check_curve(curve))

# dx/dz vanishes at z = 0 (x = 0, order 2) and at z = -3/2 (the soft edge x = 27/4)
for z, x, order in RAMIFICATION:
    print(f"ramification z={z} x={x} order={order}")

print("\nlimiting density on (0, 27/4]")
for x in (0.1, 0.5, 1, 2, 4, 6, float(EDGE)):
    bar = "#" * int(60 * density_rho01(x))
    print(f"  x={x:5.2f} rho={density_rho01(x):.5f} {bar}")

print("\nmoments of the density against C_k[3]")
for k in range(5):
    print(f"  k={k} integral={density_integral(power=k):.10f} C_k[3]={fuss_catalan(k, 3)}")

u = 0.05
G = w01_explicit_check(u)
print(f"\nG({u}) = {G.real:.12f}, residual of u G^3 - G + 1: {abs(u * G ** 3 - G + 1):.1e}")
