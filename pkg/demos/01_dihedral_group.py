"""
The dihedral group of a square
==============================

Builds the eight symmetries of four agents on a cycle and sorts the
reflections into free and self reflections.
"""
import numpy as np

from dihedral_formation import classify, dihedral_group

np.set_printoptions(precision=3, suppress=True)

# vertices sit at 45, 135, 225 and 315 degrees
group = dihedral_group(4, np.pi / 4)
print("order of the group:", len(group))

for g in group:
    if g.is_rotation:
        print(f"rotation {g.kind.k}: {g.cycles()}")
    else:
        cls = classify(g)
        axis = np.degrees(g.kind.axis_angle)
        print(f"mirror at {axis:5.1f} deg: {g.cycles():14s} {cls.tag}")

# a free reflection pairs agents across the mirror, a self reflection pins one
vertical = [g for g in group if g.is_reflection and np.isclose(g.kind.axis_angle, np.pi / 2)][0]
print("vertical mirror matrix:")
print(vertical.rep)
