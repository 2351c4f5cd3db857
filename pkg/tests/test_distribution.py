from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qntomo import dense
from qntomo.channels import make_depolarizing
from qntomo.distribution import (
    GHZ_X,
    GHZ_Y,
    GHZ_Z,
    SCHEME_AXIS,
    SCHEMES,
    Z_BASIS,
    CircuitSpec,
    Gate,
    NodeCircuit,
    distribute,
    flip_distribution,
    outcome_indices,
    preset,
    scheme_state,
    simulate_shots,
    single_pauli_channels,
)
from qntomo.errors import CircuitError, InvalidParameterError, UnsupportedModelError
from qntomo.states import GhzLabel
from qntomo.topology import StarTopology, build_tree
from qntomo.validation import drop_gate, ghz_diagonality


def z_oracle(theta):
    """Brute-force Z-basis distribution: S_j = F_0 xor F_j."""
    n = len(theta)
    out = {}
    for flips in itertools.product((0, 1), repeat=n):
        w = np.prod([1 - t if f else t for t, f in zip(theta, flips)])
        key = "".join(str(flips[0] ^ f) for f in flips[1:])
        out[key] = out.get(key, 0.0) + w
    return out


def test_z_scheme_example(theta):
    d = flip_distribution(Z_BASIS, theta)
    assert d.probability("11") == pytest.approx(0.8 * 0.7 * 0.6 + 0.2 * 0.3 * 0.4, abs=1e-15)
    assert d.probability("00") == pytest.approx(0.18, abs=1e-15)
    assert d.probability("10") == pytest.approx(0.26, abs=1e-15)
    assert d.probability("01") == pytest.approx(0.20, abs=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_z_scheme_against_brute_force(n):
    theta = np.linspace(0.15, 0.85, n)
    d = flip_distribution(Z_BASIS, theta)
    for label, p in z_oracle(theta).items():
        assert d.probability(label) == pytest.approx(p, abs=1e-14)


def test_noiseless_z_scheme():
    rho = scheme_state(Z_BASIS, [1.0, 1.0, 1.0], engine="dense")
    assert dense.diagonalize_in_basis(rho, "Z").as_dict() == {"00": 1.0}


def test_ghz_x_phase_bit(theta):
    d = flip_distribution(GHZ_X, theta)
    assert d.probs[4:].sum() == pytest.approx(0.2, abs=1e-15)


@pytest.mark.parametrize("scheme", [GHZ_X, GHZ_Y, GHZ_Z])
def test_noiseless_ghz(scheme):
    rho = scheme_state(scheme, [1.0, 1.0, 1.0], engine="dense")
    np.testing.assert_allclose(rho.matrix, dense.ghz_projector(GhzLabel("00", 0)), atol=1e-14)


def test_y_root_flip_sets_parity():
    # a single Y error on the root channel: b xor parity(s) = 1
    idx = outcome_indices(GHZ_Y, np.array([[1, 0, 0]]))[0]
    rho = scheme_state(GHZ_Y, [0.0, 1.0, 1.0], engine="dense")
    d = dense.diagonalize_in_basis(rho, "GHZ")
    assert d.probs[idx] == pytest.approx(1.0)
    lab = d.labels()[idx]
    assert (lab.b + lab.s.count("1")) % 2 == 1


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("scheme", SCHEMES)
def test_engines_agree(scheme, n):
    star = StarTopology(n)
    circuit, eta = preset(scheme, star)
    for theta in itertools.product((0.1, 0.5, 0.9), repeat=n):
        channels = single_pauli_channels(SCHEME_AXIS[scheme], theta)
        rho = distribute(star, circuit, eta, channels, engine="dense")
        exact = dense.diagonalize_in_basis(rho, circuit.basis)
        np.testing.assert_allclose(exact.probs, flip_distribution(scheme, theta).probs, atol=1e-10)


def test_z_preset_shape():
    circuit, eta = preset(Z_BASIS, StarTopology(3))
    centre = circuit.node(3)
    assert centre.num_qubits == 2
    assert centre.gates == (Gate("TOFFOLI_N", (0, 1)),)
    assert eta[(3, 1)] == 0 and eta[(3, 2)] == 1


def test_z_preset_n2_is_relay():
    circuit, _ = preset(Z_BASIS, StarTopology(2))
    (gate,) = circuit.node(2).gates
    np.testing.assert_allclose(dense.generalized_toffoli(len(gate.qubits)), np.eye(2))


def test_dropping_hz_breaks_diagonality():
    circuit, eta = preset(GHZ_X, StarTopology(3))
    assert ghz_diagonality(circuit, eta, 3, "X").passed
    assert not ghz_diagonality(drop_gate(circuit, 3, "HZ"), eta, 3, "X").passed


def test_flip_engine_rejects_wrong_axis():
    star = StarTopology(3)
    circuit, eta = preset(GHZ_X, star)
    with pytest.raises(UnsupportedModelError):
        distribute(star, circuit, eta, single_pauli_channels("Z", [0.9] * 3), engine="flip")


def test_flip_engine_rejects_custom_circuits():
    star = StarTopology(3)
    circuit, eta = preset(GHZ_X, star)
    custom = drop_gate(circuit, 3, "HZ")
    with pytest.raises(UnsupportedModelError):
        distribute(star, custom, eta, single_pauli_channels("X", [0.9] * 3), engine="flip")


def test_dense_handles_depolarizing_channels():
    star = StarTopology(3)
    circuit, eta = preset(GHZ_X, star)
    channels = [make_depolarizing([0.7, 0.1, 0.1, 0.1])] * 3
    rho = distribute(star, circuit, eta, channels, engine="dense")
    assert rho.trace() == pytest.approx(1.0)
    assert dense.basis_probabilities(rho, "GHZ").sum() == pytest.approx(1.0)


def test_channel_count_checked():
    star = StarTopology(3)
    circuit, eta = preset(Z_BASIS, star)
    with pytest.raises(InvalidParameterError):
        distribute(star, circuit, eta, single_pauli_channels("X", [0.9] * 2))


def test_register_rules():
    star = StarTopology(3)
    circuit, eta = preset(Z_BASIS, star)
    with pytest.raises(CircuitError):
        # centre keeping an extra qubit
        distribute(star, circuit.replace_node(3, NodeCircuit(3, ())), eta, single_pauli_channels("X", [1] * 3))
    with pytest.raises(CircuitError):
        distribute(star, circuit, {k: v for k, v in eta.items() if k != (3, 2)}, single_pauli_channels("X", [1] * 3))
    with pytest.raises(CircuitError):
        NodeCircuit(1, (("CNOT", 0, 1),))


def test_custom_tree_distribution():
    # root 0 -> relay 1 -> relay 2 -> leaf 3: a Bell pair survives three bit-flip hops
    tree = build_tree([(0, 1), (1, 2), (2, 3)], 0, [0, 3])
    bell = NodeCircuit(2, (("H", 0), ("CNOT", 0, 1)))
    relay = NodeCircuit(1, ())
    circuit = CircuitSpec({0: bell, 1: relay, 2: relay, 3: NodeCircuit(1, ())}, "GHZ")
    eta = {(0, 1): 1, (1, 2): 0, (2, 3): 0}
    theta = [0.9, 0.8, 0.7]
    log: list = []
    rho = distribute(tree, circuit, eta, single_pauli_channels("X", theta), log=log)
    # composed flip probability of three hops
    t = theta[0] * theta[1] + (1 - theta[0]) * (1 - theta[1])
    t = t * theta[2] + (1 - t) * (1 - theta[2])
    d = dense.diagonalize_in_basis(rho, "GHZ")
    assert d.probability("0|0") == pytest.approx(t)
    assert d.probability("1|0") == pytest.approx(1 - t)
    assert [e for _, e, _ in log] == [0, 1, 2]


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(SCHEMES), st.integers(min_value=2, max_value=7), st.data())
def test_flip_distribution_normalized(scheme, n, data):
    theta = data.draw(st.lists(st.floats(min_value=0, max_value=1), min_size=n, max_size=n))
    d = flip_distribution(scheme, theta)
    assert abs(d.probs.sum() - 1) < 1e-12
    assert d.probs.min() >= 0


def test_shot_simulation_matches_distribution(theta):
    idx = simulate_shots(GHZ_X, theta, 200_000, np.random.default_rng(0))
    freq = np.bincount(idx, minlength=8) / idx.size
    np.testing.assert_allclose(freq, flip_distribution(GHZ_X, theta).probs, atol=0.005)
