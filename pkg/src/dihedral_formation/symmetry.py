"""Dihedral point groups acting on the cycle graph C_n.

Vertices are labelled 0..n-1 and embedded canonically on the unit circle,
vertex ``j`` at angle ``base_angle + 2*pi*j/n``. Every group element pairs a
vertex permutation with its 2x2 orthogonal representation; reflection
permutations are read off the embedding so the two can never disagree.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    IncompatibleError,
    InvalidMirrorError,
    InvalidOrderError,
    NormalizationError,
    WrongKindError,
)

BUILD_TOL = 1e-12
INPUT_TOL = 1e-9


def default_base_angle(n: int) -> float:
    """Base angle that makes the mirror of edge (0, 1) vertical."""
    return np.pi / 2 - np.pi / n


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def householder(normal) -> np.ndarray:
    """Reflection ``I - 2 n n^T`` across the line with unit normal ``normal``."""
    normal = np.asarray(normal, dtype=float)
    if normal.shape != (2,):
        raise NormalizationError(f"normal must be a 2-vector, got shape {normal.shape}")
    norm = np.linalg.norm(normal)
    if abs(norm - 1.0) > INPUT_TOL:
        raise NormalizationError(f"normal has length {norm!r}, expected 1")
    return np.eye(2) - 2.0 * np.outer(normal, normal)


def canonical_positions(n: int, base_angle: float | None = None) -> np.ndarray:
    """(n, 2) array of the regular n-gon on the unit circle."""
    if base_angle is None:
        base_angle = default_base_angle(n)
    angles = base_angle + 2 * np.pi * np.arange(n) / n
    return np.column_stack([np.cos(angles), np.sin(angles)])


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MirrorLine:
    """A line through the origin, stored as unit direction and unit normal."""

    direction: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        d = _frozen(self.direction)
        nrm = _frozen(self.normal)
        if abs(np.linalg.norm(d) - 1) > INPUT_TOL or abs(np.linalg.norm(nrm) - 1) > INPUT_TOL:
            raise NormalizationError("mirror direction and normal must be unit vectors")
        if abs(d @ nrm) > INPUT_TOL:
            raise NormalizationError("mirror normal is not orthogonal to its direction")
        object.__setattr__(self, "direction", d)
        object.__setattr__(self, "normal", nrm)

    @classmethod
    def from_angle(cls, angle: float) -> MirrorLine:
        return cls(np.array([np.cos(angle), np.sin(angle)]), np.array([-np.sin(angle), np.cos(angle)]))

    @classmethod
    def from_direction(cls, direction) -> MirrorLine:
        d = np.asarray(direction, dtype=float)
        return cls(d, np.array([-d[1], d[0]]))

    @property
    def angle(self) -> float:
        """Line angle in [0, pi)."""
        return float(np.arctan2(self.direction[1], self.direction[0]) % np.pi)

    def reflection(self) -> np.ndarray:
        return householder(self.normal)

    def transformed(self, m) -> MirrorLine:
        """Image of the line under the orthogonal map ``m``.

        The direction is made sign-canonical (first nonzero coordinate
        positive) since a line carries no orientation.
        """
        d = np.asarray(m) @ self.direction
        d = d / np.linalg.norm(d)
        if d[0] < -BUILD_TOL or (abs(d[0]) <= BUILD_TOL and d[1] < 0):
            d = -d
        return MirrorLine.from_direction(d)

    def same_line(self, other: MirrorLine, tol: float = 1e-9) -> bool:
        return min(
            np.linalg.norm(self.direction - other.direction),
            np.linalg.norm(self.direction + other.direction),
        ) <= tol


@dataclass(frozen=True)
class Rotation:
    k: int


@dataclass(frozen=True)
class Reflection:
    axis_angle: float

    @property
    def mirror(self) -> MirrorLine:
        return MirrorLine.from_angle(self.axis_angle)


@dataclass(frozen=True)
class ReflectionClass:
    tag: str  # "free" or "self"
    fixed_vertices: tuple[int, ...] = ()

    @property
    def is_free(self) -> bool:
        return self.tag == "free"


@dataclass(frozen=True, eq=False)
class GroupElement:
    perm: tuple[int, ...]
    rep: np.ndarray = field(repr=False)
    kind: Rotation | Reflection

    def __post_init__(self):
        perm = tuple(int(x) for x in self.perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"perm {perm} is not a bijection")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "rep", _frozen(self.rep))

    @property
    def n(self) -> int:
        return len(self.perm)

    @property
    def is_rotation(self) -> bool:
        return isinstance(self.kind, Rotation)

    @property
    def is_reflection(self) -> bool:
        return isinstance(self.kind, Reflection)

    def __call__(self, i: int) -> int:
        return self.perm[i]

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.perm == other.perm and np.allclose(self.rep, other.rep, atol=1e-10)

    def __hash__(self):
        return hash(self.perm)

    def cycles(self, one_based: bool = True) -> str:
        """Cycle notation, e.g. ``(1 2)(4 3)``; fixed points are listed."""
        seen, out = set(), []
        for start in range(self.n):
            if start in seen:
                continue
            cyc, j = [], start
            while j not in seen:
                seen.add(j)
                cyc.append(j + one_based)
                j = self.perm[j]
            out.append("(" + " ".join(map(str, cyc)) + ")")
        return "".join(out)


def _check_order(n: int):
    if n < 3:
        raise InvalidOrderError(f"cycle graph needs n >= 3, got {n}")


def make_rotation(k: int, n: int) -> GroupElement:
    _check_order(n)
    if not 0 <= k < n:
        raise ValueError(f"rotation index {k} outside [0, {n})")
    perm = tuple((i + k) % n for i in range(n))
    return GroupElement(perm, rotation_matrix(2 * np.pi * k / n), Rotation(k))


def _match_vertices(mapped: np.ndarray, positions: np.ndarray, tol: float) -> tuple[int, ...] | None:
    d = np.linalg.norm(mapped[:, None, :] - positions[None, :, :], axis=2)
    perm = d.argmin(axis=1)
    if np.any(d[np.arange(len(perm)), perm] > tol):
        return None
    return tuple(int(x) for x in perm)


def make_reflection(axis_angle: float, n: int, base_angle: float | None = None) -> GroupElement:
    """Reflection across the line at ``axis_angle`` through the origin.

    The axis must be one of the n dihedral mirrors of the canonical embedding,
    i.e. ``base_angle + k*pi/n`` for an integer ``k``.
    """
    _check_order(n)
    if base_angle is None:
        base_angle = default_base_angle(n)
    steps = (axis_angle - base_angle) * n / np.pi
    k = int(np.round(steps))
    if abs(steps - k) * np.pi / n > INPUT_TOL:
        raise InvalidMirrorError(f"axis angle {axis_angle!r} is not a dihedral mirror for n={n}")
    k %= n
    axis = (base_angle + k * np.pi / n) % np.pi
    rep = householder(np.array([-np.sin(axis), np.cos(axis)]))
    pos = canonical_positions(n, base_angle)
    perm = _match_vertices(pos @ rep.T, pos, 1e-9)
    if perm is None:  # unreachable for a valid k, kept as a guard
        raise InvalidMirrorError(f"axis angle {axis_angle!r} does not permute the vertices")
    return GroupElement(perm, rep, Reflection(float(axis)))


def vertex_mirror_angle(j: int, n: int, base_angle: float | None = None) -> float:
    """Angle of the mirror through vertex ``j``."""
    if base_angle is None:
        base_angle = default_base_angle(n)
    return float((base_angle + 2 * np.pi * j / n) % np.pi)


def edge_mirror_angle(i: int, j: int, n: int, base_angle: float | None = None) -> float:
    """Angle of the mirror swapping vertices ``i`` and ``j``."""
    if base_angle is None:
        base_angle = default_base_angle(n)
    return float((base_angle + ((i + j) % n) * np.pi / n) % np.pi)


def classify(g: GroupElement) -> ReflectionClass:
    if not g.is_reflection:
        raise WrongKindError("only reflections are classified as free/self")
    fixed = tuple(i for i, j in enumerate(g.perm) if i == j)
    return ReflectionClass("self", fixed) if fixed else ReflectionClass("free")


def _kind_from(perm: tuple[int, ...], rep: np.ndarray) -> Rotation | Reflection:
    n = len(perm)
    if np.linalg.det(rep) > 0:
        return Rotation(perm[0] % n)
    axis = 0.5 * np.arctan2(rep[1, 0], rep[0, 0])
    return Reflection(float(axis % np.pi))


def compose(a: GroupElement, b: GroupElement) -> GroupElement:
    """``a o b``: apply ``b`` first, then ``a``."""
    if a.n != b.n:
        raise IncompatibleError(f"cannot compose elements on {a.n} and {b.n} vertices")
    perm = tuple(a.perm[b.perm[i]] for i in range(a.n))
    rep = a.rep @ b.rep
    kind = _kind_from(perm, rep)
    if isinstance(kind, Rotation):
        expected = rotation_matrix(2 * np.pi * kind.k / a.n)
        if perm != tuple((i + kind.k) % a.n for i in range(a.n)) or not np.allclose(rep, expected, atol=1e-9):
            raise IncompatibleError("composition left the dihedral group")
        rep = expected
    return GroupElement(perm, rep, kind)


def inverse(g: GroupElement) -> GroupElement:
    perm = [0] * g.n
    for i, j in enumerate(g.perm):
        perm[j] = i
    return GroupElement(tuple(perm), g.rep.T, _kind_from(tuple(perm), g.rep.T))


def identity(n: int) -> GroupElement:
    return make_rotation(0, n)


def dihedral_group(n: int, base_angle: float | None = None) -> list[GroupElement]:
    """All 2n elements of C_nv: n rotations followed by n reflections."""
    _check_order(n)
    if base_angle is None:
        base_angle = default_base_angle(n)
    rotations = [make_rotation(k, n) for k in range(n)]
    reflections = [make_reflection(base_angle + k * np.pi / n, n, base_angle) for k in range(n)]
    return rotations + reflections


def element_mapping(group, i: int, j: int, reflection: bool) -> GroupElement:
    """The unique rotation (or reflection) in ``group`` sending ``i`` to ``j``."""
    for g in group:
        if g.is_reflection == reflection and g.perm[i] == j:
            return g
    raise KeyError(f"no {'reflection' if reflection else 'rotation'} maps {i} -> {j}")
