"""YAML experiment configuration.

Example::

    topology:
      type: star            # or "tree" with node_count, root, edges, end_nodes
      n: 3
    channels:
      axis: X               # one axis, or a list with one entry per edge
      theta: [0.8, 0.3, 0.4]
      # theta4: [[0.7, 0.1, 0.1, 0.1], ...]   depolarizing, dense engine only
    scheme:
      name: GHZ_X           # Z_BASIS_X_CHANNELS | GHZ_X | GHZ_Y | GHZ_Z
      regime: low           # low | high (Z scheme only)
      engine: flip          # flip | dense
    circuit:                # optional per-node overrides of the preset
      nodes:
        - node: 3
          qubits: 2
          gates: [[TOFFOLI_N, 0, 1]]
          eta: {1: 0, 2: 1}
    experiment:
      shots: [1000, 10000, 100000]
      trials: 5
      seed: 7
    output:
      dir: out
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .channels import AXES, ChannelModel, make_depolarizing, make_single_pauli
from .distribution import SCHEME_AXIS, SCHEMES, CircuitSpec, IndexMap, NodeCircuit, preset
from .errors import ConfigError, QntomoError, UnsupportedModelError
from .fisher import DIRECT
from .topology import RootedTree, StarTopology, build_tree


@dataclass
class ExperimentConfig:
    topology: RootedTree
    channels: list[ChannelModel]
    scheme: str
    regime: str = "low"
    engine: str = "flip"
    shots: list[int] = field(default_factory=lambda: [10_000])
    trials: int = 1
    seed: int = 0
    out_dir: Path = Path("out")
    circuit_overrides: list[dict] = field(default_factory=list)
    workers: int = 1

    @property
    def thetas(self) -> np.ndarray:
        """Identity probability of each channel (single-Pauli channels only)."""
        out = []
        for e, ch in enumerate(self.channels):
            if getattr(ch, "axis", None) is None:
                raise UnsupportedModelError(f"channel {e} is not a single-Pauli channel")
            out.append(ch.identity_probability)
        return np.array(out)

    @property
    def axes(self) -> list[str | None]:
        return [getattr(ch, "axis", None) for ch in self.channels]

    def circuit(self) -> tuple[CircuitSpec, IndexMap]:
        if self.scheme == DIRECT:
            raise UnsupportedModelError("the direct single-channel model has no distribution circuit")
        if isinstance(self.topology, StarTopology):
            circuit, eta = preset(self.scheme, self.topology)
        elif self.circuit_overrides:
            circuit, eta = CircuitSpec({}, _basis_of(self.scheme)), {}
        else:
            raise ConfigError("circuit: presets need a star topology; give circuit.nodes for a tree")
        for entry in self.circuit_overrides:
            circuit = circuit.replace_node(entry["node"], entry["circuit"])
            if entry["eta"]:
                eta = {k: v for k, v in eta.items() if k[0] != entry["node"]}
                eta.update({(entry["node"], int(u)): int(q) for u, q in entry["eta"].items()})
        return circuit, eta

    def with_overrides(self, **kw) -> ExperimentConfig:
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def _basis_of(scheme: str) -> str:
    return "Z" if scheme.startswith("Z") or scheme == DIRECT else "GHZ"


def _need(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"{where}.{key}: required field missing")
    return section[key]


def _section(raw: dict, name: str, required: bool = True) -> dict:
    sec = raw.get(name)
    if sec is None:
        if required:
            raise ConfigError(f"{name}: required section missing")
        return {}
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: must be a mapping")
    return sec


def _topology(sec: dict) -> RootedTree:
    kind = str(sec.get("type", "star")).lower()
    try:
        if kind == "star":
            n = int(_need(sec, "n", "topology"))
            if n == 1:
                return build_tree([(0, 1)], 0, [0, 1])
            return StarTopology(n)
        if kind == "tree":
            return build_tree(
                _need(sec, "edges", "topology"),
                int(_need(sec, "root", "topology")),
                _need(sec, "end_nodes", "topology"),
                sec.get("node_count"),
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"topology: {exc}") from exc
    raise ConfigError(f"topology.type: expected 'star' or 'tree', got {kind!r}")


def _channels(sec: dict, num_edges: int) -> list[ChannelModel]:
    if "theta4" in sec:
        rows = sec["theta4"]
        if len(rows) != num_edges:
            raise ConfigError(f"channels.theta4: need {num_edges} rows, got {len(rows)}")
        try:
            return [make_depolarizing(r) for r in rows]
        except QntomoError as exc:
            raise ConfigError(f"channels.theta4: {exc}") from exc
    theta = _need(sec, "theta", "channels")
    if not isinstance(theta, list) or len(theta) != num_edges:
        raise ConfigError(f"channels.theta: need a list of {num_edges} values")
    for i, t in enumerate(theta):
        if not isinstance(t, (int, float)) or not 0 <= t <= 1:
            raise ConfigError(f"channels.theta[{i}]: {t!r} is not a probability in [0, 1]")
    axis = sec.get("axis", "X")
    axes = axis if isinstance(axis, list) else [axis] * num_edges
    if len(axes) != num_edges:
        raise ConfigError(f"channels.axis: need {num_edges} entries, got {len(axes)}")
    for i, a in enumerate(axes):
        if str(a).upper() not in AXES:
            raise ConfigError(f"channels.axis[{i}]: {a!r} is not one of {AXES}")
    return [make_single_pauli(a, t) for a, t in zip(axes, theta)]


def _shots(value) -> list[int]:
    shots = value if isinstance(value, list) else [value]
    out = []
    for i, s in enumerate(shots):
        if isinstance(s, bool) or not isinstance(s, (int, float)) or int(s) != s or s < 1:
            raise ConfigError(f"experiment.shots[{i}]: {s!r} must be a positive integer")
        out.append(int(s))
    if any(b <= a for a, b in zip(out, out[1:])):
        raise ConfigError("experiment.shots: schedule must be strictly increasing")
    return out


def _overrides(sec: dict) -> list[dict]:
    out = []
    for i, entry in enumerate(sec.get("nodes", []) or []):
        where = f"circuit.nodes[{i}]"
        try:
            nc = NodeCircuit(int(_need(entry, "qubits", where)), tuple(tuple(g) for g in entry.get("gates", [])))
        except QntomoError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        out.append({"node": int(_need(entry, "node", where)), "circuit": nc, "eta": entry.get("eta", {}) or {}})
    return out


def config_from_dict(raw: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping of sections")
    tree = _topology(_section(raw, "topology"))
    channels = _channels(_section(raw, "channels"), len(tree.edges))
    sch = _section(raw, "scheme")
    name = str(_need(sch, "name", "scheme")).upper()
    if name not in SCHEMES + (DIRECT,):
        raise ConfigError(f"scheme.name: {name!r} is not one of {SCHEMES + (DIRECT,)}")
    regime = str(sch.get("regime", "low")).lower()
    if regime not in ("low", "high"):
        raise ConfigError(f"scheme.regime: expected 'low' or 'high', got {regime!r}")
    engine = str(sch.get("engine", "flip")).lower()
    if engine not in ("flip", "dense"):
        raise ConfigError(f"scheme.engine: expected 'flip' or 'dense', got {engine!r}")
    exp = _section(raw, "experiment")
    trials = exp.get("trials", 1)
    if not isinstance(trials, int) or trials < 1:
        raise ConfigError(f"experiment.trials: {trials!r} must be an integer >= 1")
    seed = exp.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"experiment.seed: {seed!r} must be a non-negative integer")
    workers = exp.get("workers", 1)
    out = _section(raw, "output", required=False)
    out_dir = Path(out.get("dir", "out"))
    if base_dir is not None and not out_dir.is_absolute():
        out_dir = base_dir / out_dir
    cfg = ExperimentConfig(
        topology=tree,
        channels=channels,
        scheme=name,
        regime=regime,
        engine=engine,
        shots=_shots(_need(exp, "shots", "experiment")),
        trials=trials,
        seed=seed,
        out_dir=out_dir,
        circuit_overrides=_overrides(_section(raw, "circuit", required=False)),
        workers=int(workers),
    )
    check_channel_model(cfg)
    return cfg


def check_channel_model(cfg: ExperimentConfig) -> None:
    """Reject channel sets the chosen scheme cannot handle."""
    axes = cfg.axes
    single = all(a is not None for a in axes)
    if single and len(set(axes)) > 1:
        raise UnsupportedModelError(
            f"unsupported model: mixed-axis stars ({'/'.join(axes)}) are not supported; "
            "every channel must use the same Pauli operator"
        )
    if cfg.scheme == DIRECT:
        return
    if not single and cfg.engine != "dense":
        raise UnsupportedModelError("unsupported model: depolarizing channels need scheme.engine: dense")
    if single and cfg.engine == "flip" and axes[0] != SCHEME_AXIS[cfg.scheme]:
        raise UnsupportedModelError(
            f"unsupported model: scheme {cfg.scheme} expects {SCHEME_AXIS[cfg.scheme]} channels, got {axes[0]}"
        )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw)
