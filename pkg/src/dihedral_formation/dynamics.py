"""Closed-loop simulation of the static and maneuvering control laws."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analysis import ResidualReport, convergence_rate, eigendecompose, residuals
from .errors import DivergenceError, InvalidScaleError, ShapeError, UnstableStepError
from .laplacian import InteractionGraph, incidence, rotated_laplacian, system_matrix
from .symmetry import dihedral_group, rotation_matrix

MAX_SAMPLES = 2000
OMEGA_HAT = np.array([[0.0, -1.0], [1.0, 0.0]])


def potential_value(p, g: InteractionGraph, theta: float = 0.0, r=None) -> float:
    """Symmetry-forcing potential of the graph.

    ``1/2 sum ||c_j - T c_i||^2`` over tree edges plus, with an anchor,
    ``1/4 ||(I - T_l) c_l||^2``, where ``c = p - 1 (x) r`` and every ``T`` is
    conjugated by ``R(theta)``.
    """
    c = np.asarray(p, dtype=float).reshape(-1, 2)
    if r is not None:
        c = c - np.asarray(r, dtype=float)
    rot = rotation_matrix(theta)
    total = 0.0
    for (i, j), elem in zip(g.edges, g.edge_elems):
        d = c[j] - rot @ elem.rep @ rot.T @ c[i]
        total += 0.5 * d @ d
    if g.anchor is not None:
        v = g.anchor.vertex
        d = rot @ (np.eye(2) - g.anchor.element.rep) @ rot.T @ c[v]
        total += 0.25 * d @ d
    return float(total)


def control_static(p, q) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if q.shape != (len(p), len(p)):
        raise ShapeError(f"matrix {q.shape} does not act on a configuration of length {len(p)}")
    return -q @ p


@dataclass(frozen=True)
class PiecewiseConstant:
    """Piecewise-constant signal: ``values[k]`` on ``[times[k], times[k+1])``.

    ``times[0]`` must be 0; the last value holds forever.
    """

    times: tuple[float, ...]
    values: np.ndarray

    def __post_init__(self):
        times = tuple(float(t) for t in self.times)
        values = np.array(self.values, dtype=float)
        if not times or times[0] != 0.0:
            raise ValueError("profile must start at t=0")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("profile breakpoints must be strictly increasing")
        if len(values) != len(times):
            raise ValueError("one value per breakpoint is required")
        values.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        widths = np.diff(np.array(times))
        steps = values[:-1] * widths.reshape((-1,) + (1,) * (values.ndim - 1))
        cum = np.concatenate([np.zeros((1,) + values.shape[1:]), np.cumsum(steps, axis=0)])
        object.__setattr__(self, "_cumulative", cum)

    @classmethod
    def constant(cls, value) -> PiecewiseConstant:
        return cls((0.0,), np.array([value], dtype=float))

    def __call__(self, t: float):
        k = max(int(np.searchsorted(self.times, t, side="right")) - 1, 0)
        return self.values[k]

    def integral(self, t: float):
        """Integral of the signal over [0, t]."""
        k = max(int(np.searchsorted(self.times, t, side="right")) - 1, 0)
        return self._cumulative[k] + self.values[k] * (t - self.times[k])

    def pieces(self, t0: float, t1: float):
        """``(duration, value)`` over the constant pieces covering [t0, t1]."""
        edges = [t for t in self.times if t0 < t < t1]
        bounds = [t0, *edges, t1]
        return [(b - a, self(a)) for a, b in zip(bounds, bounds[1:])]


@dataclass(frozen=True)
class VirtualTrajectory:
    """Reference translation ``r``, heading ``theta`` and scale ``s`` at time ``t``."""

    r: np.ndarray
    theta: float
    s: float
    v: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant([0.0, 0.0]))
    omega: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(0.0))
    alpha: PiecewiseConstant = field(default_factory=lambda: PiecewiseConstant.constant(0.0))
    t: float = 0.0

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)
        if not self.s > 0:
            raise InvalidScaleError(f"scale must be positive, got {self.s!r}")

    @property
    def rotation(self) -> np.ndarray:
        return rotation_matrix(self.theta)

    def inputs(self, t: float | None = None):
        """``(v, omega, alpha)`` in effect at time ``t``."""
        t = self.t if t is None else t
        return np.asarray(self.v(t)), float(self.omega(t)), float(self.alpha(t))

    def state_at(self, t: float):
        """``(r, theta, s)`` at time ``t >= self.t`` in closed form."""
        r = self.r + self.v.integral(t) - self.v.integral(self.t)
        theta = self.theta + float(self.omega.integral(t) - self.omega.integral(self.t))
        s = _grow(self.s, float(self.alpha.integral(t) - self.alpha.integral(self.t)), t)
        return r, theta, s

    def at(self, t: float) -> VirtualTrajectory:
        if t == self.t:
            return self
        r, theta, s = self.state_at(t)
        return VirtualTrajectory(r, theta, s, self.v, self.omega, self.alpha, t)


def _grow(s: float, log_factor: float, t: float) -> float:
    try:
        out = s * math.exp(log_factor)
    except OverflowError:
        out = math.inf
    if not 0.0 < out < math.inf:
        raise DivergenceError(f"reference scale left the finite positive range at t={t!r}", time=t)
    return out


def step_virtual(chi: VirtualTrajectory, dt: float) -> VirtualTrajectory:
    """Advance the reference exactly; piecewise-constant inputs integrate in closed form."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    r, theta, log_s = chi.r.copy(), chi.theta, math.log(chi.s)
    for h, v in chi.v.pieces(chi.t, chi.t + dt):
        r = r + np.asarray(v) * h
    for h, w in chi.omega.pieces(chi.t, chi.t + dt):
        theta += float(w) * h
    for h, a in chi.alpha.pieces(chi.t, chi.t + dt):
        log_s += float(a) * h
    return VirtualTrajectory(r, theta, _grow(1.0, log_s, chi.t + dt), chi.v, chi.omega, chi.alpha, chi.t + dt)


def control_maneuver(p, chi: VirtualTrajectory, g: InteractionGraph, t: float | None = None, q0=None) -> np.ndarray:
    """``-Q(theta) c + 1 (x) v + (I (x) Omega + alpha) c`` with ``c = p - 1 (x) r``.

    ``chi`` must be the reference state at time ``t``; ``q0`` may pass the
    precomputed anchored matrix to skip rebuilding it.
    """
    if not chi.s > 0:
        raise InvalidScaleError(f"scale must be positive, got {chi.s!r}")
    if g.anchor is None:
        raise ValueError("maneuvering requires an anchored graph")
    if q0 is None:
        q0 = system_matrix(g)
    v, omega, alpha = chi.inputs(t)
    return _maneuver_field(np.asarray(p, dtype=float), chi.r, chi.rotation, v, omega, alpha, q0)


def _maneuver_field(p, r, rot, v, omega, alpha, q0):
    c = p.reshape(-1, 2) - r
    # Q(theta) c = (I (x) R) Q0 (I (x) R^T) c
    qc = (q0 @ (c @ rot).ravel()).reshape(-1, 2) @ rot.T
    u = -qc + v + c @ (omega * OMEGA_HAT).T + alpha * c
    return u.ravel()


def moving_frame(p, chi: VirtualTrajectory) -> np.ndarray:
    """``zeta = (1/s) (I (x) R^T) (p - 1 (x) r)``."""
    if not chi.s > 0:
        raise InvalidScaleError(f"scale must be positive, got {chi.s!r}")
    c = np.asarray(p, dtype=float).reshape(-1, 2) - chi.r
    return ((c @ chi.rotation) / chi.s).ravel()


def from_moving_frame(zeta, chi: VirtualTrajectory) -> np.ndarray:
    z = np.asarray(zeta, dtype=float).reshape(-1, 2)
    return (chi.s * z @ chi.rotation.T + chi.r).ravel()


@dataclass(frozen=True)
class StaticLaw:
    """``p' = -Q p`` with Q the graph's system matrix rotated by ``theta``."""

    graph: InteractionGraph
    theta: float = 0.0

    @property
    def matrix(self) -> np.ndarray:
        if self.theta == 0.0:
            return system_matrix(self.graph)
        return rotated_laplacian(self.graph, self.theta)


@dataclass(frozen=True)
class ManeuverLaw:
    graph: InteractionGraph
    chi0: VirtualTrajectory


@dataclass
class SimulationResult:
    times: np.ndarray
    states: np.ndarray  # (samples, 2n)
    residual_series: list[ResidualReport]
    virtual_series: list[VirtualTrajectory] | None = None
    dt: float = 0.0
    steps: int = 0

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def frame_states(self) -> np.ndarray:
        """States in the law's own frame (moving frame for maneuvers)."""
        if self.virtual_series is None:
            return self.states
        return np.array([moving_frame(p, chi) for p, chi in zip(self.states, self.virtual_series)])


def default_step(q: np.ndarray) -> tuple[float, float]:
    """``(dt, T)`` with ``dt = 0.5/lambda_max`` and ``lambda_min+ * T = 30``."""
    spec = eigendecompose(q)
    return 0.5 / float(spec.eigenvalues[-1]), 30.0 / convergence_rate(spec)


def rk4_step_maps(a, b, h: float):
    """Classical RK4 for ``y' = A(t) y + b(t)`` folded into affine step maps.

    ``a`` and ``b`` hold the field at the three stage times of each step,
    shapes (steps, 3, m, m) and (steps, 3, m). Returns ``(M, c)`` so that one
    RK4 step is ``y -> M[k] @ y + c[k]``.
    """
    a0, am, a1 = a[:, 0], a[:, 1], a[:, 2]
    b0, bm, b1 = b[:, 0], b[:, 1], b[:, 2]
    eye = np.eye(a.shape[-1])
    k1, c1 = a0, b0
    k2 = am + h / 2 * am @ k1
    c2 = h / 2 * np.einsum("kij,kj->ki", am, c1) + bm
    k3 = am + h / 2 * am @ k2
    c3 = h / 2 * np.einsum("kij,kj->ki", am, c2) + bm
    k4 = a1 + h * a1 @ k3
    c4 = h * np.einsum("kij,kj->ki", a1, c3) + b1
    return eye + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4), h / 6 * (c1 + 2 * c2 + 2 * c3 + c4)


def _maneuver_affine(q0, chi0: VirtualTrajectory, ts, input_ts=None):
    """``u = A(t) p + b(t)`` of the maneuvering law at the times ``ts``.

    Inputs ``v, omega, alpha`` are sampled at ``input_ts`` (default ``ts``).
    """
    n = q0.shape[0] // 2
    ts = np.asarray(ts, dtype=float)
    input_ts = ts if input_ts is None else np.asarray(input_ts, dtype=float)
    r = chi0.r + _batch_integral(chi0.v, ts) - chi0.v.integral(chi0.t)
    theta = chi0.theta + _batch_integral(chi0.omega, ts) - chi0.omega.integral(chi0.t)
    v = _batch_value(chi0.v, input_ts)
    omega = _batch_value(chi0.omega, input_ts)
    alpha = _batch_value(chi0.alpha, input_ts)
    cos, sin = np.cos(theta), np.sin(theta)
    rot = np.stack([np.stack([cos, -sin], -1), np.stack([sin, cos], -1)], -2)
    qb = q0.reshape(n, 2, n, 2)
    qt = np.einsum("tac,icjd,tbd->tiajb", rot, qb, rot).reshape(len(ts), 2 * n, 2 * n)
    local = omega[:, None, None] * OMEGA_HAT + alpha[:, None, None] * np.eye(2)
    a = -qt + np.einsum("ij,tab->tiajb", np.eye(n), local).reshape(len(ts), 2 * n, 2 * n)
    ones_r = np.tile(r, (1, n))
    b = -np.einsum("tij,tj->ti", a, ones_r) + np.tile(v, (1, n))
    return a, b


def _batch_value(sig: PiecewiseConstant, ts):
    k = np.maximum(np.searchsorted(sig.times, ts, side="right") - 1, 0)
    return sig.values[k]


def _batch_integral(sig: PiecewiseConstant, ts):
    k = np.maximum(np.searchsorted(sig.times, ts, side="right") - 1, 0)
    dt = ts - np.asarray(sig.times)[k]
    vals = sig.values[k]
    return sig._cumulative[k] + vals * dt.reshape((-1,) + (1,) * (vals.ndim - 1))


def integrate(law, p0, T: float | None = None, dt: float | None = None, max_samples: int = MAX_SAMPLES) -> SimulationResult:
    """Classical RK4 on a uniform grid of ``ceil(T/dt)`` steps ending exactly at T.

    Both laws are affine in p, so each step is evaluated as a precomposed
    affine map (algebraically identical to the four-stage scheme). Residuals
    are reported in the law's frame: rotated back by ``theta`` for a rotated
    static law, the moving frame for a maneuver.
    """
    g = law.graph
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (2 * g.n,):
        raise ShapeError(f"expected a configuration of length {2 * g.n}, got {p0.shape}")
    q = law.matrix if isinstance(law, StaticLaw) else system_matrix(g)
    spec = eigendecompose(q)
    lam_max = float(spec.eigenvalues[-1])
    if dt is None:
        dt = 0.5 / lam_max
    if T is None:
        T = 30.0 / convergence_rate(spec)
    if dt <= 0 or T < dt:
        raise ValueError(f"need 0 < dt <= T, got dt={dt!r}, T={T!r}")
    if isinstance(law, StaticLaw) and dt >= 2.0 / lam_max:
        raise UnstableStepError(f"dt={dt!r} exceeds the stability limit 2/lambda_max={2.0 / lam_max!r}")

    m = 2 * g.n
    steps = math.ceil(T / dt - 1e-9)
    h = T / steps
    stride = max(1, math.ceil(steps / (max_samples - 1)))
    group = dihedral_group(g.n, g.base_angle)
    e = incidence(g)
    times, states, reports = [], [], []
    virtual = None

    if isinstance(law, StaticLaw):
        back = rotation_matrix(law.theta)
        step_m, step_c = rk4_step_maps(np.broadcast_to(-q, (1, 3, m, m)), np.zeros((1, 3, m)), h)

        def frame(y, t):
            return (y.reshape(-1, 2) @ back).ravel()

        def maps(k0, k1):
            return np.broadcast_to(step_m, (k1 - k0, m, m)), np.broadcast_to(step_c, (k1 - k0, m))
    else:
        chi0 = law.chi0
        virtual = []

        def frame(y, t):
            return moving_frame(y, chi0.at(t))

        def maps(k0, k1):
            ks = np.arange(k0, k1)
            ts = np.stack([ks * h, (ks + 0.5) * h, (ks + 1) * h], axis=1).ravel()
            # inputs are held at their mid-step value so no stage straddles a breakpoint
            a, b = _maneuver_affine(q, chi0, ts, np.repeat((ks + 0.5) * h, 3))
            return rk4_step_maps(a.reshape(-1, 3, m, m), b.reshape(-1, 3, m), h)

    def record(k, y):
        t = k * h
        times.append(t)
        states.append(y.copy())
        reports.append(residuals(frame(y, t), g, group, e))
        if virtual is not None:
            virtual.append(chi0.at(t))

    chunk = max(1, 2 ** 21 // (m * m))
    y = p0.copy()
    record(0, y)
    for k0 in range(0, steps, chunk):
        k1 = min(steps, k0 + chunk)
        step_m, step_c = maps(k0, k1)
        for k in range(k0, k1):
            y = step_m[k - k0] @ y + step_c[k - k0]
            if not np.isfinite(y).all():
                t = (k + 1) * h
                raise DivergenceError(f"state became non-finite at t={t!r}", time=t)
            if (k + 1) % stride == 0 or k + 1 == steps:
                record(k + 1, y)
    return SimulationResult(np.array(times), np.array(states), reports, virtual, h, steps)
