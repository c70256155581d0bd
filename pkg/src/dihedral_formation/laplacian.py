"""Spanning trees of C_n and their symmetry-constraining Laplacians.

Matrices are dense numpy arrays of shape (2n, 2n) (or (2n, 2(n-1)) for the
incidence matrix); block ``(i, j)`` is ``M[2i:2i+2, 2j:2j+2]``.

Each tree edge ``(i, j)`` with ``i < j`` stores the group element ``g`` with
``g(i) == j``, so the enforced relation is ``p_j = tau(g) p_i``.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidAnchorError, InvalidEdgeError, UnassignedEdgesError
from .symmetry import (
    GroupElement,
    MirrorLine,
    classify,
    default_base_angle,
    edge_mirror_angle,
    make_reflection,
    make_rotation,
    rotation_matrix,
    vertex_mirror_angle,
)

ROTATIONAL = "rotational"
REFLECTIONAL = "reflectional"


@dataclass(frozen=True)
class Anchor:
    vertex: int
    element: GroupElement
    mirror: MirrorLine


@dataclass(frozen=True)
class InteractionGraph:
    n: int
    edges: tuple[tuple[int, int], ...]
    edge_elems: tuple[GroupElement, ...] | None = None
    anchor: Anchor | None = None
    base_angle: float | None = None
    family: str | None = None

    def __post_init__(self):
        if self.base_angle is None:
            object.__setattr__(self, "base_angle", default_base_angle(self.n))
        _check_tree(self.n, self.edges)
        if self.edge_elems is not None:
            if len(self.edge_elems) != len(self.edges):
                raise UnassignedEdgesError("one group element per edge is required")
            for (i, j), g in zip(self.edges, self.edge_elems):
                if g.perm[i] != j:
                    raise InvalidEdgeError(f"element for edge ({i}, {j}) maps {i} to {g.perm[i]}")
        if self.anchor is not None:
            a = self.anchor
            if not a.element.is_reflection or a.element.perm[a.vertex] != a.vertex:
                raise InvalidAnchorError(f"anchor element must be a reflection fixing vertex {a.vertex}")

    def degree(self) -> np.ndarray:
        d = np.zeros(self.n, dtype=int)
        for i, j in self.edges:
            d[i] += 1
            d[j] += 1
        return d

    def neighbors(self, i: int) -> list[tuple[int, np.ndarray]]:
        """``(j, T)`` pairs with ``p_j = T p_i`` enforced on edge ij."""
        self._require_elems()
        out = []
        for (a, b), g in zip(self.edges, self.edge_elems):
            if a == i:
                out.append((b, g.rep))
            elif b == i:
                out.append((a, g.rep.T))
        return out

    def _require_elems(self):
        if self.edge_elems is None:
            raise UnassignedEdgesError("edges have no group elements assigned")


def _is_cycle_edge(n: int, i: int, j: int) -> bool:
    return 0 <= i < n and 0 <= j < n and (j - i) % n in (1, n - 1)


def _check_tree(n: int, edges):
    if len(edges) != n - 1:
        raise InvalidEdgeError(f"a spanning tree on {n} vertices has {n - 1} edges, got {len(edges)}")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        if not (i < j and _is_cycle_edge(n, i, j)):
            raise InvalidEdgeError(f"({i}, {j}) is not an ordered edge of C_{n}")
        ri, rj = find(i), find(j)
        if ri == rj:
            raise InvalidEdgeError(f"edge ({i}, {j}) closes a cycle")
        parent[ri] = rj


def spanning_tree(n: int, removed_edge: tuple[int, int]) -> InteractionGraph:
    """C_n with one edge removed (0-based vertex labels)."""
    i, j = removed_edge
    if not _is_cycle_edge(n, i, j) or i == j:
        raise InvalidEdgeError(f"{removed_edge} is not an edge of C_{n}")
    removed = (min(i, j), max(i, j))
    edges = [(k, k + 1) for k in range(n - 1)] + [(0, n - 1)]
    return InteractionGraph(n, tuple(e for e in edges if e != removed))


def assign_edges(g: InteractionGraph, family: str, base_angle: float | None = None) -> InteractionGraph:
    """Attach a rotation (``"rotational"``) or an edge-midpoint mirror
    (``"reflectional"``) to every tree edge."""
    if g.edge_elems is not None:
        raise ValueError("graph already has edge elements")
    if base_angle is None:
        base_angle = g.base_angle
    elems = []
    for i, j in g.edges:
        if family == ROTATIONAL:
            elems.append(make_rotation((j - i) % g.n, g.n))
        elif family == REFLECTIONAL:
            elems.append(make_reflection(edge_mirror_angle(i, j, g.n, base_angle), g.n, base_angle))
        else:
            raise ValueError(f"unknown edge family {family!r}")
    return replace(g, edge_elems=tuple(elems), base_angle=base_angle, family=family)


def with_anchor(g: InteractionGraph, vertex: int) -> InteractionGraph:
    """Pin ``vertex`` to the canonical mirror through it."""
    angle = vertex_mirror_angle(vertex, g.n, g.base_angle)
    elem = make_reflection(angle, g.n, g.base_angle)
    return replace(g, anchor=Anchor(vertex, elem, MirrorLine.from_angle(angle)))


def block(m: np.ndarray, i: int, j: int) -> np.ndarray:
    return m[2 * i:2 * i + 2, 2 * j:2 * j + 2]


def incidence(g: InteractionGraph) -> np.ndarray:
    """Matrix-weighted incidence; the lower-index vertex is the edge tail.

    Column block k of edge (i, j) holds ``I`` at i and ``-tau(g)`` at j, so
    ``E^T p`` stacks ``p_i - tau(g)^T p_j``.
    """
    g._require_elems()
    e = np.zeros((2 * g.n, 2 * len(g.edges)))
    for k, ((i, j), elem) in enumerate(zip(g.edges, g.edge_elems)):
        e[2 * i:2 * i + 2, 2 * k:2 * k + 2] = np.eye(2)
        e[2 * j:2 * j + 2, 2 * k:2 * k + 2] = -elem.rep
    return e


def laplacian(g: InteractionGraph) -> np.ndarray:
    """Q with blocks ``d(i) I`` on the diagonal and ``-tau`` on tree edges."""
    g._require_elems()
    n = g.n
    q = np.zeros((2 * n, 2 * n))
    for i, d in enumerate(g.degree()):
        q[2 * i:2 * i + 2, 2 * i:2 * i + 2] = d * np.eye(2)
    for (i, j), elem in zip(g.edges, g.edge_elems):
        q[2 * j:2 * j + 2, 2 * i:2 * i + 2] = -elem.rep
        q[2 * i:2 * i + 2, 2 * j:2 * j + 2] = -elem.rep.T
    return q


def augment_anchor(q: np.ndarray, vertex: int, element: GroupElement) -> np.ndarray:
    """Add ``I - tau(gamma_l)`` to diagonal block ``(l, l)``."""
    if not element.is_reflection or classify(element).tag != "self" or element.perm[vertex] != vertex:
        raise InvalidAnchorError(f"anchor element must be a self reflection fixing vertex {vertex}")
    out = np.array(q, dtype=float, copy=True)
    out[2 * vertex:2 * vertex + 2, 2 * vertex:2 * vertex + 2] += np.eye(2) - element.rep
    return out


def system_matrix(g: InteractionGraph) -> np.ndarray:
    """The closed-loop matrix of the graph: anchored if it has an anchor."""
    q = laplacian(g)
    if g.anchor is not None:
        q = augment_anchor(q, g.anchor.vertex, g.anchor.element)
    return q


def frame_rotation(n: int, theta: float) -> np.ndarray:
    """Block-diagonal ``I_n (x) R(theta)``."""
    return np.kron(np.eye(n), rotation_matrix(theta))


def rotated_laplacian(g: InteractionGraph, theta: float) -> np.ndarray:
    """System matrix with every edge and anchor block conjugated by R(theta)."""
    g._require_elems()
    n = g.n
    r = rotation_matrix(theta)
    q = np.zeros((2 * n, 2 * n))
    for i, d in enumerate(g.degree()):
        q[2 * i:2 * i + 2, 2 * i:2 * i + 2] = d * np.eye(2)
    for (i, j), elem in zip(g.edges, g.edge_elems):
        t = r @ elem.rep @ r.T
        q[2 * j:2 * j + 2, 2 * i:2 * i + 2] = -t
        q[2 * i:2 * i + 2, 2 * j:2 * j + 2] = -t.T
    if g.anchor is not None:
        v = g.anchor.vertex
        q[2 * v:2 * v + 2, 2 * v:2 * v + 2] += r @ (np.eye(2) - g.anchor.element.rep) @ r.T
    return q
