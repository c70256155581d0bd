"""
Six agents reaching a rotational formation
==========================================

Each agent compares itself with its tree neighbours rotated by 60 degrees.
The flow converges to a regular hexagon whose size and orientation depend on
where the agents started.
"""
import numpy as np

from dihedral_formation import StaticLaw, assign_edges, integrate, laplacian, spanning_tree
from dihedral_formation.analysis import eigendecompose, full_group_residual
from dihedral_formation.symmetry import dihedral_group

np.set_printoptions(precision=4, suppress=True)

g = assign_edges(spanning_tree(6, (5, 0)), "rotational")
q = laplacian(g)
spec = eigendecompose(q)
print("null space dimension:", spec.null_dim)
print("slowest decay rate:", spec.eigenvalues[spec.null_dim])

p0 = np.random.default_rng(2).uniform(-2, 2, 12)
res = integrate(StaticLaw(g), p0)
final = res.final.reshape(-1, 2)
print("final positions:")
print(final)

# all neighbours end up the same distance from the centroid
print("radii:", np.linalg.norm(final, axis=1))
rotations = [h for h in dihedral_group(6) if h.is_rotation]
print("rotation residual:", full_group_residual(res.final, rotations))
