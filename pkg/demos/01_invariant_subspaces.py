# Invariant-subspace recursions on a worked example and on a random system.
#
# The double integrator with velocity output has a one-dimensional supremal
# output-nulling subspace (coasting along the position axis keeps the output
# at zero) and an invariant zero at the origin.

import numpy as np

from geokit import SystemQuad, sstar_sequence, vstar_sequence, rstar
from geokit.geometry import sstar, vstar
from geokit.linalg import subspace_intersect
from geokit.sysmodel import GenSpec, random_system

A = np.array([[0.0, 1.0], [0.0, 0.0]])
B = np.array([[0.0], [1.0]])
sys = SystemQuad.from_matrices(A, B, C=[[0.0, 1.0]], D=[[0.0]])

print("double integrator, velocity output")
vchain = vstar_sequence(sys)
print("  output-nulling chain dims :", [S.dim for S in vchain])
print("  supremal output-nulling   :", np.round(vchain[-1].basis.real.ravel(), 6))

schain = sstar_sequence(sys)
print("  input-containing chain    :", [S.dim for S in schain])
print("  infimal input-containing  :", np.round(schain[-1].basis.real.ravel(), 6))

R = rstar(sys)
print("  reachability part dim     :", R.dim, "(position axis meets input axis trivially)")

# a layered example: a double integrator whose velocity is measured, plus
# two free integrators.  The free block is reachable with zero output, the
# position axis is output-nulling but unreachable, and the measured velocity
# axis is excluded entirely.
print("\nlayered system: measured double integrator + two free integrators")
Am = np.zeros((4, 4))
Am[0, 1] = 1.0
Bm = np.zeros((4, 3))
Bm[1, 0] = Bm[2, 1] = Bm[3, 2] = 1.0
mixed = SystemQuad.from_matrices(Am, Bm, C=[[0.0, 1.0, 0.0, 0.0]], D=np.zeros((1, 3)))
v = vstar(mixed)
s = sstar(mixed)
r = rstar(mixed)
cross = subspace_intersect(v, s)
print("  dim vstar / sstar / rstar :", v.dim, s.dim, r.dim)
print("  rstar equals vstar ∩ sstar:", r.dim == cross.dim)

print("\nrandom quadruple, n=6, m=2, p=1 (the identity holds generically too)")
rnd = random_system(GenSpec(n=6, m=2, p=1, seed=2024))
v, s, r = vstar(rnd), sstar(rnd), rstar(rnd)
print("  dim vstar / sstar / rstar :", v.dim, s.dim, r.dim)
print("  rstar equals vstar ∩ sstar:", r.dim == subspace_intersect(v, s).dim)
