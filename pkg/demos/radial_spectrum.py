"""Radial bound states: the Coulomb limit against the closed form, then the levels with the
axial potential switched on.

    python3 demos/radial_spectrum.py
"""
import numpy as np

from diracgeom.radial import RadialProblem, shoot_bound_state, find_levels
from diracgeom.cli import sommerfeld_level

Za = 0.5

# Coulomb limit: a few levels, each shot inside a small bracket around the closed form
print("Coulomb limit, Z alpha = 0.5")
print(f"{'level':>8} {'k':>3} {'channel':>14} {'E (mesh)':>14} {'E (closed)':>14} {'error':>9}")
cases = [("1s", 1, "symmetric", 1, -1), ("2s", 1, "symmetric", 2, -1), ("2p1/2", 1, "antisymmetric", 2, 1),
         ("2p3/2", 2, "symmetric", 2, -2), ("3s", 1, "symmetric", 3, -1)]
for name, k, ch, n, kappa in cases:
    E0 = sommerfeld_level(n, kappa, Za)
    prob = RadialProblem(Zalpha=Za, k=k, n_nodes=800, adaptive=False, r_max=120)
    E = shoot_bound_state(prob, (E0 - 0.005, E0 + 0.0025), channel=ch, xtol=1e-14).E
    print(f"{name:>8} {k:>3} {ch:>14} {E:14.10f} {E0:14.10f} {abs(E - E0):9.1e}")

# mesh convergence of the 2s level
E2 = sommerfeld_level(2, -1, Za)
errs = []
for N in (100, 200, 400, 800):
    prob = RadialProblem(Zalpha=Za, k=1, n_nodes=N, adaptive=False, r_max=120)
    errs.append(abs(shoot_bound_state(prob, (0.94, 0.97), xtol=1e-14).E - E2))
print("\n2s error under mesh doubling:", ", ".join(f"{e:.1e}" for e in errs))
print("observed orders:", ", ".join(f"{np.log2(a / b):.2f}" for a, b in zip(errs, errs[1:])))

# the axial potential from the spherical chiral-angle ansatz
prob = RadialProblem(Zalpha=Za, k=1, aleph_mode="spherical", n_nodes=800)
levels, _ = find_levels(prob, (0.3, 0.999), 60)
print("\nlevels with the axial potential:")
for lv in levels:
    print(f"  E = {lv.E:.6f}  channel {lv.meta.get('channel', '?')}")
