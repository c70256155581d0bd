"""Scenario files and the analyze / simulate / predict commands.

Scenario files are JSON. Vertex labels in files are 1-based, as in the
agent numbering ``p1x, p1y, ...`` of the trajectory CSV.

Example::

    {
      "name": "example4",
      "n": 6,
      "removed_edge": [6, 1],
      "family": "anchored-reflection",
      "anchor_vertex": 1,
      "p0": {"seed": 7, "low": -2.0, "high": 2.0}
    }

Optional keys: ``base_angle`` (radians), ``dt``, ``horizon`` and, for the
``maneuver`` family, ``maneuver`` with ``r0``, ``theta0``, ``s0`` and
breakpoint lists ``v: [[t, vx, vy], ...]``, ``omega: [[t, w], ...]``,
``alpha: [[t, a], ...]``.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    build_v0,
    chain_transforms,
    convergence_rate,
    eigendecompose,
    predict_steady_state,
    propagate_mirrors,
    residuals,
)
from .dynamics import (
    ManeuverLaw,
    PiecewiseConstant,
    StaticLaw,
    VirtualTrajectory,
    integrate,
    moving_frame,
)
from .errors import ScenarioError
from .laplacian import (
    REFLECTIONAL,
    ROTATIONAL,
    InteractionGraph,
    assign_edges,
    spanning_tree,
    system_matrix,
    with_anchor,
)
from .symmetry import MirrorLine, default_base_angle, dihedral_group, vertex_mirror_angle

FAMILIES = ("rotational", "reflection", "anchored-reflection", "maneuver")
ANCHORED = ("anchored-reflection", "maneuver")
KNOWN_KEYS = {"name", "n", "removed_edge", "family", "base_angle", "anchor_vertex", "p0", "dt", "horizon", "maneuver"}


@dataclass(frozen=True)
class Maneuver:
    r0: tuple[float, float] = (0.0, 0.0)
    theta0: float = 0.0
    s0: float = 1.0
    v: tuple = ((0.0, 0.0, 0.0),)
    omega: tuple = ((0.0, 0.0),)
    alpha: tuple = ((0.0, 0.0),)

    def trajectory(self) -> VirtualTrajectory:
        def profile(rows):
            rows = np.asarray(rows, dtype=float)
            values = rows[:, 1:] if rows.shape[1] > 2 else rows[:, 1]
            return PiecewiseConstant(tuple(rows[:, 0]), values)

        return VirtualTrajectory(np.array(self.r0), self.theta0, self.s0, profile(self.v), profile(self.omega), profile(self.alpha))


@dataclass(frozen=True)
class Scenario:
    name: str
    n: int
    removed_edge: tuple[int, int]  # 1-based
    family: str
    base_angle: float
    anchor_vertex: int | None = None  # 1-based
    p0: tuple | None = None  # explicit (n, 2) rows
    seed: int | None = None
    box: tuple[float, float] = (-1.0, 1.0)
    dt: float | None = None
    horizon: float | None = None
    maneuver: Maneuver | None = field(default=None)

    def graph(self) -> InteractionGraph:
        i, j = self.removed_edge
        g = spanning_tree(self.n, (i - 1, j - 1))
        g = InteractionGraph(g.n, g.edges, base_angle=self.base_angle)
        g = assign_edges(g, ROTATIONAL if self.family == "rotational" else REFLECTIONAL)
        if self.family in ANCHORED:
            g = with_anchor(g, self.anchor_vertex - 1)
        return g

    def initial_configuration(self) -> np.ndarray:
        if self.p0 is not None:
            return np.asarray(self.p0, dtype=float).ravel()
        rng = np.random.default_rng(self.seed)
        return rng.uniform(self.box[0], self.box[1], size=2 * self.n)

    def law(self, g: InteractionGraph | None = None):
        g = self.graph() if g is None else g
        if self.family == "maneuver":
            return ManeuverLaw(g, (self.maneuver or Maneuver()).trajectory())
        return StaticLaw(g)


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for lineno, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return lineno
    return None


def _fail(text: str, key: str, message: str):
    line = _line_of(text, key)
    where = f"line {line}: " if line else ""
    raise ScenarioError(f"{where}{key}: {message}")


def _number(text, key, value, integer=False):
    ok = isinstance(value, int) if integer else isinstance(value, (int, float))
    if isinstance(value, bool) or not ok or (not integer and not math.isfinite(value)):
        _fail(text, key, f"expected {'an integer' if integer else 'a finite number'}, got {value!r}")
    return value


def _rows(text, key, value, width):
    if not isinstance(value, list) or not value:
        _fail(text, key, "expected a non-empty list of rows")
    for row in value:
        if not isinstance(row, list) or len(row) != width:
            _fail(text, key, f"each row must have {width} numbers, got {row!r}")
        for x in row:
            _number(text, key, x)
    return tuple(tuple(float(x) for x in row) for row in value)


def parse_scenario_text(text: str, default_name: str = "scenario") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno}: malformed JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError("line 1: scenario must be a JSON object")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        _fail(text, unknown[0], "unknown field")
    for key in ("n", "removed_edge", "family"):
        if key not in data:
            raise ScenarioError(f"missing field: {key}")

    n = _number(text, "n", data["n"], integer=True)
    if n < 3:
        _fail(text, "n", f"need at least 3 agents, got {n}")
    family = data["family"]
    if family not in FAMILIES:
        _fail(text, "family", f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
    edge = data["removed_edge"]
    if not (isinstance(edge, list) and len(edge) == 2):
        _fail(text, "removed_edge", "expected a pair of vertex labels")
    i, j = (_number(text, "removed_edge", x, integer=True) for x in edge)
    if not (1 <= i <= n and 1 <= j <= n and (i - j) % n in (1, n - 1)):
        _fail(text, "removed_edge", f"({i}, {j}) is not an edge of C_{n}")
    base = data.get("base_angle")
    base = default_base_angle(n) if base is None else float(_number(text, "base_angle", base))

    anchor = data.get("anchor_vertex")
    if family in ANCHORED and anchor is None:
        _fail(text, "family", f"family {family!r} requires anchor_vertex")
    if anchor is not None:
        anchor = _number(text, "anchor_vertex", anchor, integer=True)
        if not 1 <= anchor <= n:
            _fail(text, "anchor_vertex", f"vertex {anchor} outside 1..{n}")

    p0, seed, box = None, None, (-1.0, 1.0)
    raw = data.get("p0", {"seed": 0})
    if isinstance(raw, list):
        p0 = _rows(text, "p0", raw, 2)
        if len(p0) != n:
            _fail(text, "p0", f"expected {n} positions, got {len(p0)}")
    elif isinstance(raw, dict):
        seed = _number(text, "p0", raw.get("seed", 0), integer=True)
        low = float(_number(text, "p0", raw.get("low", -1.0)))
        high = float(_number(text, "p0", raw.get("high", 1.0)))
        if not low < high:
            _fail(text, "p0", "random box needs low < high")
        box = (low, high)
    else:
        _fail(text, "p0", "expected a list of positions or a {seed, low, high} object")

    dt = data.get("dt")
    if dt is not None and _number(text, "dt", dt) <= 0:
        _fail(text, "dt", "must be positive")
    horizon = data.get("horizon")
    if horizon is not None and _number(text, "horizon", horizon) <= 0:
        _fail(text, "horizon", "must be positive")

    maneuver = None
    if "maneuver" in data:
        m = data["maneuver"]
        if not isinstance(m, dict):
            _fail(text, "maneuver", "expected an object")
        r0 = m.get("r0", [0.0, 0.0])
        if not (isinstance(r0, list) and len(r0) == 2):
            _fail(text, "r0", "expected [x, y]")
        for x in r0:
            _number(text, "r0", x)
        s0 = float(_number(text, "s0", m.get("s0", 1.0)))
        if s0 <= 0:
            _fail(text, "s0", "scale must be positive")
        profiles = {}
        for key, width in (("v", 3), ("omega", 2), ("alpha", 2)):
            default = [[0.0] * width]
            rows = _rows(text, key, m.get(key, default), width)
            times = [row[0] for row in rows]
            if times[0] != 0.0 or any(b <= a for a, b in zip(times, times[1:])):
                _fail(text, key, "breakpoint times must start at 0 and increase strictly")
            profiles[key] = rows
        maneuver = Maneuver(
            (float(r0[0]), float(r0[1])),
            float(_number(text, "theta0", m.get("theta0", 0.0))),
            s0,
            profiles["v"],
            profiles["omega"],
            profiles["alpha"],
        )
    elif family == "maneuver":
        maneuver = Maneuver()

    return Scenario(
        name=str(data.get("name", default_name)),
        n=n,
        removed_edge=(i, j),
        family=family,
        base_angle=base,
        anchor_vertex=anchor,
        p0=p0,
        seed=seed,
        box=box,
        dt=None if dt is None else float(dt),
        horizon=None if horizon is None else float(horizon),
        maneuver=maneuver,
    )


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario_text(text, path.stem)


def preset_path(name: str) -> Path:
    """Path of a bundled preset such as ``"example4"``."""
    return Path(str(resources.files("dihedral_formation") / "presets" / f"{name}.json"))


def _matrix(m) -> list:
    return [[float(x) for x in row] for row in np.asarray(m)]


def cmd_analyze(scenario: Scenario) -> dict:
    g = scenario.graph()
    q = system_matrix(g)
    spec = eigendecompose(q)
    root = g.anchor.vertex if g.anchor is not None else 0
    mirror = g.anchor.mirror if g.anchor is not None else MirrorLine.from_angle(vertex_mirror_angle(0, g.n, g.base_angle))
    chain = chain_transforms(g, root)
    lines = propagate_mirrors(g, root, mirror)
    out = {
        "version": __version__,
        "name": scenario.name,
        "n": g.n,
        "family": scenario.family,
        "edges": [[i + 1, j + 1] for i, j in g.edges],
        "null_dim": spec.null_dim,
        "eigenvalues": [float(x) for x in spec.eigenvalues],
        "convergence_rate": convergence_rate(spec),
        "chain_root": root + 1,
        "chained_transforms": [_matrix(s) for s in chain.S],
        "mirror_angles": [line.angle for line in lines],
    }
    if g.anchor is not None:
        v0 = build_v0(chain, g.anchor.mirror.direction)
        out["v0"] = [float(x) for x in v0]
        out["v0_norm_sq"] = float(v0 @ v0)
    return out


def _steady_state(scenario: Scenario, g: InteractionGraph, p0: np.ndarray) -> np.ndarray:
    """Limit of the static flow (in the moving frame for maneuvers)."""
    if g.anchor is not None:
        chain = chain_transforms(g, g.anchor.vertex)
        return predict_steady_state(p0, build_v0(chain, g.anchor.mirror.direction), g.n)
    return eigendecompose(system_matrix(g)).null_projection(p0)


def cmd_predict(scenario: Scenario) -> dict:
    g = scenario.graph()
    p0 = scenario.initial_configuration()
    out = {"version": __version__, "name": scenario.name, "family": scenario.family}
    if scenario.family == "maneuver":
        chi = scenario.law(g).chi0
        zeta0 = moving_frame(p0, chi)
        out["frame"] = "moving"
        out["zeta_inf"] = [float(x) for x in _steady_state(scenario, g, zeta0)]
    else:
        out["frame"] = "inertial"
        out["p_inf"] = [float(x) for x in _steady_state(scenario, g, p0)]
    return out


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _report_dict(rep) -> dict:
    anchor = None if math.isnan(rep.anchor_residual) else rep.anchor_residual
    return {"edge": rep.edge_residual, "anchor": anchor, "full_group": rep.full_group_residual}


def default_out_dir(scenario: Scenario) -> Path:
    return Path(os.environ.get("DF_OUT_DIR", "df_out")) / scenario.name


def cmd_simulate(scenario: Scenario, out_dir=None, dt: float | None = None, horizon: float | None = None) -> dict:
    """Run the scenario and write ``trajectory.csv``, ``residuals.csv`` and
    ``summary.json`` (plus ``virtual.csv`` for maneuvers) into ``out_dir``."""
    g = scenario.graph()
    law = scenario.law(g)
    p0 = scenario.initial_configuration()
    dt = dt if dt is not None else scenario.dt
    horizon = horizon if horizon is not None else scenario.horizon
    result = integrate(law, p0, T=horizon, dt=dt)

    out = Path(out_dir) if out_dir is not None else default_out_dir(scenario)
    out.mkdir(parents=True, exist_ok=True)
    header = ["t"] + [f"p{i + 1}{axis}" for i in range(g.n) for axis in "xy"]
    with open(out / "trajectory.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for t, p in zip(result.times, result.states):
            w.writerow([_fmt(t)] + [_fmt(x) for x in p])
    with open(out / "residuals.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "edge_residual", "anchor_residual", "full_group_residual"])
        for t, rep in zip(result.times, result.residual_series):
            w.writerow([_fmt(t), _fmt(rep.edge_residual), _fmt(rep.anchor_residual), _fmt(rep.full_group_residual)])
    if result.virtual_series is not None:
        with open(out / "virtual.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "rx", "ry", "theta", "s"])
            for t, chi in zip(result.times, result.virtual_series):
                w.writerow([_fmt(t), _fmt(chi.r[0]), _fmt(chi.r[1]), _fmt(chi.theta), _fmt(chi.s)])

    final = result.frame_states()[-1]
    predicted = _steady_state(scenario, g, moving_frame(p0, law.chi0) if scenario.family == "maneuver" else p0)
    summary = {
        "version": __version__,
        "name": scenario.name,
        "n": g.n,
        "family": scenario.family,
        "frame": "moving" if scenario.family == "maneuver" else "inertial",
        "dt": result.dt,
        "horizon": float(result.times[-1]),
        "steps": result.steps,
        "samples": len(result.times),
        "convergence_rate": convergence_rate(eigendecompose(system_matrix(g))),
        "terminal_residuals": _report_dict(result.residual_series[-1]),
        "terminal_norm": float(np.linalg.norm(final)),
        "steady_state_gap": float(np.linalg.norm(final - predicted)),
    }
    if scenario.family == "maneuver":
        chi = result.virtual_series[-1]
        summary["terminal_virtual"] = {"r": [float(x) for x in chi.r], "theta": chi.theta, "s": chi.s}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    summary["out_dir"] = str(out)
    return summary

