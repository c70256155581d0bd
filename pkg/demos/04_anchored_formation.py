"""
Pinning one agent to its mirror
===============================

Penalising one agent's distance from its own mirror line removes the flex.
The limit can be predicted in closed form from the initial positions.
"""
import numpy as np

from dihedral_formation import StaticLaw, assign_edges, integrate, spanning_tree, system_matrix, with_anchor
from dihedral_formation.analysis import build_v0, chain_transforms, eigendecompose, predict_steady_state

g = with_anchor(assign_edges(spanning_tree(6, (5, 0)), "reflectional"), 0)
spec = eigendecompose(system_matrix(g))
print("null space dimension with the anchor:", spec.null_dim)

chain = chain_transforms(g, 0)
v0 = build_v0(chain, g.anchor.mirror.direction)
print("V0 . V0 =", v0 @ v0)

p0 = np.random.default_rng(4).uniform(-2, 2, 12)
predicted = predict_steady_state(p0, v0, 6)
res = integrate(StaticLaw(g), p0)
print("gap between simulation and prediction:", np.linalg.norm(res.final - predicted))
print("full group residual:", res.residual_series[-1].full_group_residual)
