"""Scenario files (YAML) for the command-line front end.

Example::

    dynamics:
      A: [[-2.21, 2.40], [0.43, -0.44]]
      B: [[0.27], [0.0]]
      E: [[0.06, 0.6]]
      s: [1.0, 1.0]
    protocol: {beta: 1.0, gamma: 13.0}        # rho defaults to 1/beta
    graph: {kind: random_regular, n: 150, d: 5, seed: 0}
    sim:
      t_end: 20.0
      dt: 0.001
      output_stride: 100
      init: {kind: random, scale: 5.0, seed: 0}
    outputs: out/paper-d5

``graph`` may instead be ``{file: path/to/edges.txt}`` (relative to the
scenario file) and ``sim.init`` may be ``{kind: explicit, states: [[...], ...]}``.
"""
from dataclasses import dataclass, replace
from importlib import resources
import math
import os

import yaml

from .errors import ScenarioError
from .graphs import Graph, gen_complete, gen_cycle, gen_erdos_renyi, gen_path, gen_random_regular
from .regulator import AgentDynamics
from .simulator import SimConfig

PRESETS = ("paper-d5", "paper-d7")
GRAPH_KINDS = ("random_regular", "erdos_renyi", "complete", "path", "cycle")


def _number(value, path, positive=False, nonneg=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(path, f"expected a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ScenarioError(path, "must be finite")
    if positive and not value > 0:
        raise ScenarioError(path, f"must be positive, got {value:g}")
    if nonneg and value < 0:
        raise ScenarioError(path, f"must be nonnegative, got {value:g}")
    return value


def _integer(value, path, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ScenarioError(path, f"must be >= {minimum}, got {value}")
    return value


def _matrix(value, path):
    if not isinstance(value, list) or not value:
        raise ScenarioError(path, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ScenarioError(f"{path}[{i}]", "expected a non-empty list of numbers")
        rows.append([_number(x, f"{path}[{i}][{j}]") for j, x in enumerate(row)])
    if len({len(r) for r in rows}) != 1:
        raise ScenarioError(path, "rows have different lengths")
    return rows


def _vector(value, path):
    if not isinstance(value, list) or not value:
        raise ScenarioError(path, "expected a non-empty list of numbers")
    return [_number(x, f"{path}[{i}]") for i, x in enumerate(value)]


def _section(raw, key, path=""):
    full = f"{path}{key}"
    if key not in raw:
        raise ScenarioError(full, "missing")
    if not isinstance(raw[key], dict):
        raise ScenarioError(full, "expected a mapping")
    return raw[key]


def _unknown(section, allowed, path):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ScenarioError(f"{path}.{extra[0]}", "unknown field")


def _parse_dynamics(raw):
    sec = _section(raw, "dynamics")
    _unknown(sec, ("A", "B", "E", "s"), "dynamics")
    for key in ("A", "B", "E", "s"):
        if key not in sec:
            raise ScenarioError(f"dynamics.{key}", "missing")
    A = _matrix(sec["A"], "dynamics.A")
    B = _matrix(sec["B"], "dynamics.B")
    E = _matrix(sec["E"], "dynamics.E")
    s = _vector(sec["s"], "dynamics.s")
    n = len(A)
    if len(A[0]) != n:
        raise ScenarioError("dynamics.A", f"must be square, got {n}x{len(A[0])}")
    if len(B) != n:
        raise ScenarioError("dynamics.B", f"expected {n} rows to match A, got {len(B)}")
    m = len(B[0])
    if len(E) != m or len(E[0]) != n:
        raise ScenarioError("dynamics.E", f"expected shape {m}x{n}, got {len(E)}x{len(E[0])}")
    if len(s) != n:
        raise ScenarioError("dynamics.s", f"expected {n} entries, got {len(s)}")
    for i in range(n):
        for j in range(n):
            if i != j and A[i][j] < 0:
                raise ScenarioError(f"dynamics.A[{i}][{j}]", f"off-diagonal entry {A[i][j]:g} is negative; A must be Metzler")
    for i, row in enumerate(E):
        for j, x in enumerate(row):
            if x < 0:
                raise ScenarioError(f"dynamics.E[{i}][{j}]", f"entry {x:g} is negative; E must be nonnegative")
    for i, x in enumerate(s):
        if not x > 0:
            raise ScenarioError(f"dynamics.s[{i}]", f"entry {x:g} must be strictly positive")
    return {"A": A, "B": B, "E": E, "s": s}


def _parse_protocol(raw):
    sec = _section(raw, "protocol")
    _unknown(sec, ("beta", "gamma", "rho"), "protocol")
    for key in ("beta", "gamma"):
        if key not in sec:
            raise ScenarioError(f"protocol.{key}", "missing")
    beta = _number(sec["beta"], "protocol.beta", positive=True)
    gamma = _number(sec["gamma"], "protocol.gamma", positive=True)
    if beta > gamma:
        raise ScenarioError("protocol.beta", f"beta = {beta:g} exceeds gamma = {gamma:g}")
    rho = sec.get("rho")
    rho = 1.0 / beta if rho is None else _number(rho, "protocol.rho", positive=True)
    return {"beta": beta, "gamma": gamma, "rho": rho}


def _parse_graph(raw, base_dir):
    sec = _section(raw, "graph")
    if "file" in sec:
        _unknown(sec, ("file",), "graph")
        if not isinstance(sec["file"], str):
            raise ScenarioError("graph.file", "expected a path string")
        path = sec["file"]
        if base_dir and not os.path.isabs(path):
            path = os.path.normpath(os.path.join(base_dir, path))
        return {"file": path}
    _unknown(sec, ("kind", "n", "d", "p_edge", "seed"), "graph")
    kind = sec.get("kind")
    if kind not in GRAPH_KINDS:
        raise ScenarioError("graph.kind", f"expected one of {', '.join(GRAPH_KINDS)}, got {kind!r}")
    if "n" not in sec:
        raise ScenarioError("graph.n", "missing")
    out = {"kind": kind, "n": _integer(sec["n"], "graph.n", 1)}
    if kind == "random_regular":
        if "d" not in sec:
            raise ScenarioError("graph.d", "missing")
        out["d"] = _integer(sec["d"], "graph.d", 1)
    if kind == "erdos_renyi":
        if "p_edge" not in sec:
            raise ScenarioError("graph.p_edge", "missing")
        out["p_edge"] = _number(sec["p_edge"], "graph.p_edge", positive=True)
    if kind in ("random_regular", "erdos_renyi"):
        out["seed"] = _integer(sec.get("seed", 0), "graph.seed", 0)
    return out


def _parse_sim(raw, n_agents, n):
    sec = raw.get("sim", {})
    if not isinstance(sec, dict):
        raise ScenarioError("sim", "expected a mapping")
    _unknown(sec, ("t_end", "dt", "output_stride", "init"), "sim")
    out = {
        "t_end": _number(sec.get("t_end", 20.0), "sim.t_end", positive=True),
        "dt": _number(sec.get("dt", 1e-3), "sim.dt", positive=True),
        "output_stride": _integer(sec.get("output_stride", 100), "sim.output_stride", 1),
    }
    if out["dt"] > out["t_end"]:
        raise ScenarioError("sim.dt", "must not exceed sim.t_end")
    init = sec.get("init", {"kind": "random"})
    if not isinstance(init, dict):
        raise ScenarioError("sim.init", "expected a mapping")
    kind = init.get("kind", "random")
    if kind == "random":
        _unknown(init, ("kind", "scale", "seed"), "sim.init")
        out["init"] = {
            "kind": "random",
            "scale": _number(init.get("scale", 5.0), "sim.init.scale", nonneg=True),
            "seed": _integer(init.get("seed", 0), "sim.init.seed", 0),
        }
    elif kind == "explicit":
        _unknown(init, ("kind", "states"), "sim.init")
        states = _matrix(init.get("states"), "sim.init.states")
        if n_agents is not None and len(states) != n_agents:
            raise ScenarioError("sim.init.states", f"expected {n_agents} agent rows, got {len(states)}")
        if len(states[0]) != n:
            raise ScenarioError("sim.init.states", f"each row needs {n} entries, got {len(states[0])}")
        out["init"] = {"kind": "explicit", "states": states}
    else:
        raise ScenarioError("sim.init.kind", f"expected 'random' or 'explicit', got {kind!r}")
    return out


@dataclass(frozen=True)
class Scenario:
    """Validated scenario. All fields are plain data so equality is structural."""

    dynamics: dict
    protocol: dict
    graph: dict
    sim: dict
    outputs: str

    def to_dict(self):
        return {
            "dynamics": self.dynamics,
            "protocol": self.protocol,
            "graph": self.graph,
            "sim": self.sim,
            "outputs": self.outputs,
        }

    def agent(self):
        d = self.dynamics
        return AgentDynamics(d["A"], d["B"], d["E"], d["s"])

    def build_graph(self):
        g = self.graph
        if "file" in g:
            return Graph.load(g["file"])
        kind, n = g["kind"], g["n"]
        if kind == "random_regular":
            return gen_random_regular(n, g["d"], g["seed"])
        if kind == "erdos_renyi":
            return gen_erdos_renyi(n, g["p_edge"], g["seed"])
        if n == 1:
            return Graph(1, ())
        return {"complete": gen_complete, "path": gen_path, "cycle": gen_cycle}[kind](n)

    def sim_config(self):
        s = self.sim
        init = s["init"]
        kwargs = {"t_end": s["t_end"], "dt": s["dt"], "output_stride": s["output_stride"]}
        if init["kind"] == "explicit":
            kwargs["x0"] = init["states"]
        else:
            kwargs["init_scale"] = init["scale"]
            kwargs["init_seed"] = init["seed"]
        return SimConfig(**kwargs)

    def with_seed(self, seed):
        """Copy with the graph and random-init seeds replaced by ``seed``."""
        graph = dict(self.graph)
        if "seed" in graph:
            graph["seed"] = seed
        sim = dict(self.sim)
        if sim["init"]["kind"] == "random":
            sim["init"] = {**sim["init"], "seed": seed}
        return replace(self, graph=graph, sim=sim)


def parse_scenario(raw, base_dir=None):
    """Validate a decoded scenario mapping; errors name the offending field."""
    if not isinstance(raw, dict):
        raise ScenarioError("<root>", "expected a mapping")
    _unknown(raw, ("dynamics", "protocol", "graph", "sim", "outputs"), "<root>")
    dynamics = _parse_dynamics(raw)
    protocol = _parse_protocol(raw)
    graph = _parse_graph(raw, base_dir)
    n_agents = graph.get("n")
    sim = _parse_sim(raw, n_agents, len(dynamics["A"]))
    outputs = raw.get("outputs", "lrsync-out")
    if not isinstance(outputs, str):
        raise ScenarioError("outputs", "expected a directory path string")
    return Scenario(dynamics=dynamics, protocol=protocol, graph=graph, sim=sim, outputs=outputs)


def preset_text(name):
    return resources.files("lrsync").joinpath("scenarios", f"{name}.yaml").read_text(encoding="utf-8")


def load_scenario(ref):
    """Load a scenario from a file path or a preset name such as ``paper-d5``."""
    if os.path.exists(ref):
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
        base_dir = os.path.dirname(os.path.abspath(ref))
    elif ref in PRESETS:
        text, base_dir = preset_text(ref), None
    else:
        raise ScenarioError("--scenario", f"no such file or preset: {ref!r}")
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"YAML syntax error: {exc}") from None
    return parse_scenario(raw, base_dir)
