"""Spectra, chained transforms, mirror propagation and closed-form limits."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguousNullspaceError,
    AsymmetryError,
    NoPathError,
    NoPositiveEigenvalueError,
    NormalizationError,
    ShapeError,
)
from .laplacian import InteractionGraph, incidence
from .symmetry import MirrorLine

ZERO_TOL = 1e-9
GAP_RATIO = 1e3


def _round_robin(m: int):
    """Pairings covering every (p, q) once per sweep, disjoint within a round."""
    players = list(range(m + (m % 2)))
    half = len(players) // 2
    for _ in range(len(players) - 1):
        pairs = [(players[k], players[-1 - k]) for k in range(half)]
        yield [(min(a, b), max(a, b)) for a, b in pairs if a < m and b < m]
        players = [players[0], players[-1]] + players[1:-1]


def jacobi_eigh(a, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Uses the round-robin ordering so each round applies disjoint rotations as
    one vectorized update. Stops once the off-diagonal Frobenius norm drops
    below ``tol * ||a||_F``. Returns ``(w, v)`` with ascending ``w``.
    """
    a = np.array(a, dtype=float, copy=True)
    m = a.shape[0]
    v = np.eye(m)
    scale = np.linalg.norm(a)
    if m < 2 or scale == 0.0:
        return np.diag(a).copy(), v
    rounds = [np.array(r, dtype=int).reshape(-1, 2) for r in _round_robin(m)]
    for _ in range(max_sweeps):
        off = np.linalg.norm(a[~np.eye(m, dtype=bool)])
        if off <= tol * scale:
            break
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            apq = a[p, q]
            live = np.abs(apq) > 1e-300
            if not live.any():
                continue
            p, q, apq = p[live], q[live], apq[live]
            theta = (a[q, q] - a[p, p]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap, aq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = c * ap - s * aq
            a[:, q] = s * ap + c * aq
            ap, aq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = c[:, None] * ap - s[:, None] * aq
            a[q, :] = s[:, None] * ap + c[:, None] * aq
            vp, vq = v[:, p].copy(), v[:, q].copy()
            v[:, p] = c * vp - s * vq
            v[:, q] = s * vp + c * vq
    else:
        raise ArithmeticError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    null_dim: int

    @property
    def null_basis(self) -> np.ndarray:
        return self.eigenvectors[:, :self.null_dim]

    def flow(self, p0, t: float) -> np.ndarray:
        """Exact solution ``V exp(-Lambda t) V^T p0`` of ``p' = -Q p``."""
        lam = np.where(np.arange(len(self.eigenvalues)) < self.null_dim, 0.0, self.eigenvalues)
        v = self.eigenvectors
        return v @ (np.exp(-lam * t) * (v.T @ np.asarray(p0, dtype=float)))

    def null_projection(self, p0) -> np.ndarray:
        b = self.null_basis
        return b @ (b.T @ np.asarray(p0, dtype=float))


JACOBI_MAX_DIM = 128


def eigendecompose(q, zero_tol: float = ZERO_TOL, method: str = "auto") -> Spectrum:
    """Spectrum of a symmetric matrix with a guarded null-space count.

    Raises ``AmbiguousNullspaceError`` unless the smallest eigenvalue counted
    as positive is at least 1e3 times the largest counted as zero.
    ``method`` is ``"jacobi"``, ``"lapack"`` (``numpy.linalg.eigh``) or
    ``"auto"``: Jacobi up to 128x128, LAPACK beyond.
    """
    q = np.asarray(q, dtype=float)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {q.shape}")
    scale = max(np.abs(q).max(initial=0.0), 1.0)
    if np.abs(q - q.T).max(initial=0.0) > 1e-10 * scale:
        raise AsymmetryError("matrix is not symmetric")
    q = 0.5 * (q + q.T)
    if method == "auto":
        method = "jacobi" if q.shape[0] <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        w, v = jacobi_eigh(q)
    elif method == "lapack":
        w, v = np.linalg.eigh(q)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    null_dim = int(np.sum(w < zero_tol))
    if 0 < null_dim < len(w):
        floor = np.finfo(float).eps * max(np.abs(q).max(), 1.0)
        largest_zero = max(np.abs(w[:null_dim]).max(), floor)
        if w[null_dim] < GAP_RATIO * largest_zero:
            raise AmbiguousNullspaceError(
                f"no clear spectral gap: zero block up to {largest_zero:.3e}, "
                f"smallest positive {w[null_dim]:.3e}"
            )
    return Spectrum(w, v, null_dim)


def convergence_rate(spec: Spectrum) -> float:
    """Smallest positive eigenvalue: decay rate of the slowest transient."""
    if spec.null_dim >= len(spec.eigenvalues):
        raise NoPositiveEigenvalueError("spectrum has no positive eigenvalue")
    return float(spec.eigenvalues[spec.null_dim])


@dataclass(frozen=True)
class ChainedTransforms:
    anchor: int
    S: tuple[np.ndarray, ...]


def _tree_paths(g: InteractionGraph, root: int):
    """BFS from ``root``; returns parent and the transform of the parent edge."""
    parent = {root: None}
    step = {}
    order = deque([root])
    while order:
        i = order.popleft()
        for j, t in g.neighbors(i):
            if j not in parent:
                parent[j] = i
                step[j] = t
                order.append(j)
    return parent, step


def chain_transforms(g: InteractionGraph, anchor: int) -> ChainedTransforms:
    """``S_i`` with ``p_i = S_i p_anchor`` for every vertex of the tree."""
    parent, step = _tree_paths(g, anchor)
    if len(parent) != g.n:
        missing = sorted(set(range(g.n)) - set(parent))
        raise NoPathError(f"vertices {missing} are unreachable from {anchor}")
    s = [None] * g.n
    s[anchor] = np.eye(2)
    todo = [i for i in range(g.n) if i != anchor]
    while todo:
        rest = []
        for i in todo:
            if s[parent[i]] is None:
                rest.append(i)
            else:
                s[i] = step[i] @ s[parent[i]]
        todo = rest
    return ChainedTransforms(anchor, tuple(s))


def propagate_mirrors(g: InteractionGraph, anchor: int, mirror: MirrorLine) -> list[MirrorLine]:
    chain = chain_transforms(g, anchor)
    return [mirror.transformed(s) for s in chain.S]


def build_v0(chain: ChainedTransforms, direction) -> np.ndarray:
    """Stacked ``S_i L`` for a unit direction ``L`` along the anchor mirror."""
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-9:
        raise NormalizationError("mirror direction must be a unit vector")
    return np.concatenate([s @ direction for s in chain.S])


def predict_steady_state(p0, v0, n: int) -> np.ndarray:
    """Limit ``(1/n) V0 V0^T p0`` of the anchored flow."""
    p0 = np.asarray(p0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if p0.shape != (2 * n,) or v0.shape != (2 * n,):
        raise ShapeError(f"expected vectors of length {2 * n}, got {p0.shape} and {v0.shape}")
    return v0 * (v0 @ p0) / n


def predict_steady_state_agents(p0, chain: ChainedTransforms, direction) -> np.ndarray:
    """Per-agent form ``(1/n) S_i L L^T sum_k S_k^T p_k(0)`` as an (n, 2) array."""
    direction = np.asarray(direction, dtype=float)
    pts = np.asarray(p0, dtype=float).reshape(-1, 2)
    n = len(pts)
    total = sum(s.T @ pk for s, pk in zip(chain.S, pts))
    proj = np.outer(direction, direction) @ total
    return np.array([s @ proj for s in chain.S]) / n


@dataclass(frozen=True)
class ResidualReport:
    edge_residual: float
    anchor_residual: float  # nan when the graph has no anchor
    full_group_residual: float


def full_group_residual(p, group) -> float:
    """max over group elements and agents of ``|tau(g) p_i - p_g(i)|``."""
    pts = np.asarray(p, dtype=float).reshape(-1, 2)
    worst = 0.0
    for g in group:
        d = pts @ g.rep.T - pts[list(g.perm)]
        worst = max(worst, float(np.sqrt((d * d).sum(axis=1)).max()))
    return worst


def residuals(p, g: InteractionGraph, group, e: np.ndarray | None = None) -> ResidualReport:
    p = np.asarray(p, dtype=float)
    if p.shape != (2 * g.n,):
        raise ShapeError(f"expected a configuration of length {2 * g.n}, got {p.shape}")
    if e is None:
        e = incidence(g)
    edge = float(np.linalg.norm(e.T @ p))
    if g.anchor is None:
        anchor = float("nan")
    else:
        v = g.anchor.vertex
        anchor = float(abs(g.anchor.mirror.normal @ p[2 * v:2 * v + 2]))
    return ResidualReport(edge, anchor, full_group_residual(p, group))
