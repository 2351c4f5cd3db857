from __future__ import annotations

import pytest
import yaml

from qntomo.config import config_from_dict, load_config
from qntomo.distribution import GHZ_X, Z_BASIS
from qntomo.errors import ConfigError, UnsupportedModelError
from qntomo.fisher import DIRECT
from qntomo.topology import StarTopology


def base(**changes):
    raw = {
        "topology": {"type": "star", "n": 3},
        "channels": {"axis": "X", "theta": [0.8, 0.3, 0.4]},
        "scheme": {"name": "GHZ_X"},
        "experiment": {"shots": [1000, 10000], "trials": 2, "seed": 7},
    }
    for key, value in changes.items():
        section, _, field = key.partition("__")
        if value is None:
            del raw[section][field]
        else:
            raw[section][field] = value
    return raw


def test_defaults():
    cfg = config_from_dict(base())
    assert isinstance(cfg.topology, StarTopology)
    assert cfg.scheme == GHZ_X and cfg.regime == "low" and cfg.engine == "flip"
    assert cfg.thetas.tolist() == [0.8, 0.3, 0.4]
    assert cfg.shots == [1000, 10000] and cfg.trials == 2 and cfg.seed == 7


def test_load_from_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(base()))
    assert load_config(path).scheme == GHZ_X


def test_yaml_syntax_error_reports_line(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("topology:\n  n: [3\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(path)


@pytest.mark.parametrize(
    "change, field",
    [
        ({"experiment__shots": [0]}, "experiment.shots[0]"),
        ({"experiment__shots": [100, 100]}, "experiment.shots"),
        ({"experiment__trials": 0}, "experiment.trials"),
        ({"experiment__seed": -1}, "experiment.seed"),
        ({"channels__theta": [0.8, 1.3, 0.4]}, "channels.theta[1]"),
        ({"channels__theta": [0.8, 0.3]}, "channels.theta"),
        ({"channels__axis": "W"}, "channels.axis[0]"),
        ({"scheme__name": "BELL"}, "scheme.name"),
        ({"scheme__regime": "medium"}, "scheme.regime"),
        ({"scheme__engine": "gpu"}, "scheme.engine"),
        ({"topology__type": "ring"}, "topology.type"),
        ({"experiment__shots": None}, "experiment.shots"),
    ],
)
def test_validation_names_the_field(change, field):
    with pytest.raises(ConfigError) as info:
        config_from_dict(base(**change))
    assert str(info.value).startswith(field)


def test_mixed_axes_rejected():
    with pytest.raises(UnsupportedModelError, match="unsupported model"):
        config_from_dict(base(channels__axis=["X", "Y", "X"]))


def test_axis_scheme_mismatch():
    with pytest.raises(UnsupportedModelError):
        config_from_dict(base(channels__axis="Z"))


def test_depolarizing_needs_dense():
    raw = base(channels__theta=None)
    raw["channels"]["theta4"] = [[0.7, 0.1, 0.1, 0.1]] * 3
    with pytest.raises(UnsupportedModelError):
        config_from_dict(raw)
    raw["scheme"]["engine"] = "dense"
    cfg = config_from_dict(raw)
    with pytest.raises(UnsupportedModelError):
        cfg.thetas


def test_single_channel_network():
    raw = base(scheme__name=DIRECT, channels__theta=[0.8])
    raw["topology"]["n"] = 1
    cfg = config_from_dict(raw)
    assert len(cfg.topology.edges) == 1


def test_circuit_override():
    raw = base()
    raw["circuit"] = {"nodes": [{"node": 3, "qubits": 2, "gates": [["TOFFOLI_N", 0, 1]]}]}
    circuit, eta = config_from_dict(raw).circuit()
    assert circuit.preset is None
    assert eta[(3, 2)] == 1


def test_with_overrides():
    cfg = config_from_dict(base()).with_overrides(seed=3, scheme=None)
    assert cfg.seed == 3 and cfg.scheme == GHZ_X
    assert cfg.with_overrides(scheme=Z_BASIS).scheme == Z_BASIS
