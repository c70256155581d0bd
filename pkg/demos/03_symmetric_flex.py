"""
Mirror constraints alone are not enough
=======================================

With only reflections on the tree edges each pair of neighbours is a mirror
image, yet the whole group can settle in a shape that is not a regular
hexagon. This is the symmetric flex.
"""
import numpy as np

from dihedral_formation import StaticLaw, assign_edges, integrate, spanning_tree

g = assign_edges(spanning_tree(6, (5, 0)), "reflectional")
p0 = np.random.default_rng(3).uniform(-2, 2, 12)
res = integrate(StaticLaw(g), p0)
last = res.residual_series[-1]

print("edge residual:      ", last.edge_residual)
print("full group residual:", last.full_group_residual)
print("final radii:", np.round(np.linalg.norm(res.final.reshape(-1, 2), axis=1), 4))
