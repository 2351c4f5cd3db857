"""Level-by-level tree state distribution and the star scheme presets.

A node's register holds ``n_v`` qubits.  For a non-root node the qubit it
receives from its predecessor is local qubit 0 and the remaining ``n_v - 1``
start in ``|0>``.  After the node's gate list runs, local qubit ``eta[v, u]``
is transmitted to successor ``u`` through the channel on edge ``(v, u)``.

Two engines realise the same process:

``"dense"``
    exact density-matrix evolution (any circuit, any mixed-unitary channel);
``"flip"``
    label algebra for the presets with single-Pauli channels: each channel
    either does nothing or applies its Pauli, and the outcome label is a
    function of the flip pattern.  The exact distribution is obtained by
    enumerating all ``2**n`` flip patterns.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import dense
from .channels import PAULIS, ChannelModel, SinglePauliChannel, make_single_pauli
from .errors import CircuitError, InvalidParameterError, UnsupportedModelError
from .states import DiagonalState, bit_table
from .topology import RootedTree, StarTopology

Z_BASIS = "Z_BASIS_X_CHANNELS"
GHZ_X = "GHZ_X"
GHZ_Y = "GHZ_Y"
GHZ_Z = "GHZ_Z"
SCHEMES = (Z_BASIS, GHZ_X, GHZ_Y, GHZ_Z)

SCHEME_AXIS = {Z_BASIS: "X", GHZ_X: "X", GHZ_Y: "Y", GHZ_Z: "Z"}
SCHEME_BASIS = {Z_BASIS: "Z", GHZ_X: "GHZ", GHZ_Y: "GHZ", GHZ_Z: "GHZ"}

_ONE_QUBIT = {
    "I": PAULIS["I"],
    "H": dense.H,
    "X": PAULIS["X"],
    "Y": PAULIS["Y"],
    "Z": PAULIS["Z"],
    "XHX": PAULIS["X"] @ dense.H @ PAULIS["X"],
    # matrix product: Z first, then H
    "HZ": dense.H @ PAULIS["Z"],
}
GATE_NAMES = tuple(_ONE_QUBIT) + ("CNOT", "TOFFOLI_N")


class Gate(NamedTuple):
    name: str
    qubits: tuple[int, ...]


def gate_matrix(gate: Gate) -> np.ndarray:
    name, qubits = gate.name.upper(), gate.qubits
    if name in _ONE_QUBIT:
        if len(qubits) != 1:
            raise CircuitError(f"{name} acts on one qubit, got {qubits}")
        return _ONE_QUBIT[name]
    if name == "CNOT":
        if len(qubits) != 2:
            raise CircuitError(f"CNOT acts on (control, target), got {qubits}")
        return dense.CNOT
    if name == "TOFFOLI_N":
        return dense.generalized_toffoli(len(qubits))
    raise CircuitError(f"unknown gate {gate.name!r}; expected one of {GATE_NAMES}")


@dataclass(frozen=True)
class NodeCircuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        gates = tuple(
            g if isinstance(g, Gate) else Gate(str(g[0]).upper(), tuple(int(q) for q in g[1:]))
            for g in self.gates
        )
        for g in gates:
            gate_matrix(g)
            if any(not 0 <= q < self.num_qubits for q in g.qubits):
                raise CircuitError(f"gate {g} addresses qubits outside a {self.num_qubits}-qubit register")
        object.__setattr__(self, "gates", gates)


IndexMap = dict  # (sender, receiver) -> local output qubit index of the sender


@dataclass(frozen=True)
class CircuitSpec:
    """Per-node gate lists.  ``preset`` names the scheme when the circuit came from a preset."""

    nodes: dict[int, NodeCircuit]
    basis: str = "Z"
    preset: str | None = None
    star_size: int | None = field(default=None, compare=False)

    def node(self, v: int) -> NodeCircuit | None:
        return self.nodes.get(v)

    def replace_node(self, v: int, circuit: NodeCircuit) -> CircuitSpec:
        """Copy with one node's circuit swapped; the result is no longer a preset."""
        nodes = dict(self.nodes)
        nodes[v] = circuit
        return CircuitSpec(nodes, self.basis, None, self.star_size)


# --- validation ----------------------------------------------------------------


@dataclass(frozen=True)
class _Plan:
    registers: dict[int, int]
    retained_root: tuple[int, ...]
    final_nodes: tuple[int, ...]


def _effective_circuit(tree: RootedTree, circuit: CircuitSpec, v: int) -> NodeCircuit:
    nc = circuit.node(v)
    if nc is not None:
        return nc
    if v == tree.root:
        raise CircuitError("the root has no circuit")
    succ = tree.successors(v)
    return NodeCircuit(max(1, len(succ)))


def validate_circuit(tree: RootedTree, circuit: CircuitSpec, eta: IndexMap) -> _Plan:
    """Check register sizes and the index map against the tree.

    Non-root nodes with successors keep no qubit; childless nodes keep the one
    they receive; the root keeps at most one.
    """
    if tree.node_count < 2:
        raise CircuitError("distribution needs at least one edge")
    registers = {}
    retained_root: tuple[int, ...] = ()
    final_nodes = []
    for v in range(tree.node_count):
        nc = _effective_circuit(tree, circuit, v)
        succ = tree.successors(v)
        n_v = nc.num_qubits
        if v != tree.root and n_v < 1:
            raise CircuitError(f"node {v} must hold the qubit it receives")
        outs = []
        for u in succ:
            if (v, u) not in eta:
                raise CircuitError(f"index map has no entry for ({v}, {u})")
            q = int(eta[(v, u)])
            if not 0 <= q < n_v:
                raise CircuitError(f"eta({v}, {u}) = {q} outside node {v}'s {n_v}-qubit register")
            outs.append(q)
        if len(set(outs)) != len(outs):
            raise CircuitError(f"eta is not injective at node {v}")
        kept = tuple(q for q in range(n_v) if q not in outs)
        if v == tree.root:
            if len(kept) > 1:
                raise CircuitError(f"root keeps {len(kept)} qubits; at most one allowed (n_r = |S_r| + 1)")
            retained_root = kept
        elif succ:
            if kept:
                raise CircuitError(f"intermediate node {v} would keep qubits {kept}; need n_v = |S_v|")
        else:
            if n_v != 1:
                raise CircuitError(f"childless node {v} must have a 1-qubit register, got {n_v}")
            final_nodes.append(v)
        registers[v] = n_v
    return _Plan(registers, retained_root, tuple(final_nodes))


# --- presets ---------------------------------------------------------------------


def _check_star(star) -> StarTopology:
    if not isinstance(star, StarTopology):
        raise UnsupportedModelError("presets are defined for star topologies")
    return star


def _fanout_eta(star: StarTopology) -> IndexMap:
    c = star.center
    eta = {(0, c): None}
    eta.update({(c, j + 1): j for j in range(star.n - 1)})
    return eta


def preset_z_basis(star: StarTopology) -> tuple[CircuitSpec, IndexMap]:
    """Root sends ``|0>``; the centre fans the received bit out with a generalized Toffoli."""
    star = _check_star(star)
    n, c = star.n, star.center
    centre_qubits = n - 1
    nodes = {
        0: NodeCircuit(1, ()),
        c: NodeCircuit(centre_qubits, (Gate("TOFFOLI_N", tuple(range(centre_qubits))),)),
    }
    nodes.update({j: NodeCircuit(1, ()) for j in range(1, n)})
    eta = _fanout_eta(star)
    eta[(0, c)] = 0
    return CircuitSpec(nodes, "Z", Z_BASIS, n), eta


def preset_ghz(star: StarTopology, axis: str) -> tuple[CircuitSpec, IndexMap]:
    """Root shares a Bell pair with the centre, which fans it out to a GHZ state.

    X and Y channels use root ``[H(0), CNOT(0,1), XHX(0), Z(0)]`` and centre
    ``[HZ(0), TOFFOLI_N]``: the root's phase correction ``Z`` makes an
    unflipped run land on ``Phi_0^0``.  Z channels use a bare Bell pair, a
    centre that conjugates every outgoing qubit with ``H``, and end-nodes
    that undo the ``H`` on arrival, so end-channel Z errors act as X errors.
    """
    star = _check_star(star)
    axis = str(axis).upper()
    if axis not in ("X", "Y", "Z"):
        raise InvalidParameterError(f"axis must be X, Y or Z, got {axis!r}")
    n, c = star.n, star.center
    k = n - 1
    fan = Gate("TOFFOLI_N", tuple(range(k)))
    bell = (Gate("H", (0,)), Gate("CNOT", (0, 1)))
    leaf_gates: tuple[Gate, ...] = ()
    if axis in ("X", "Y"):
        root = NodeCircuit(2, bell + (Gate("XHX", (0,)), Gate("Z", (0,))))
        centre = NodeCircuit(k, (Gate("HZ", (0,)), fan))
    else:
        root = NodeCircuit(2, bell)
        centre = NodeCircuit(k, (fan,) + tuple(Gate("H", (q,)) for q in range(k)))
        leaf_gates = (Gate("H", (0,)),)
    nodes = {0: root, c: centre}
    nodes.update({j: NodeCircuit(1, leaf_gates) for j in range(1, n)})
    eta = _fanout_eta(star)
    eta[(0, c)] = 1
    return CircuitSpec(nodes, "GHZ", f"GHZ_{axis}", n), eta


def preset(name: str, star: StarTopology) -> tuple[CircuitSpec, IndexMap]:
    name = name.upper()
    if name == Z_BASIS:
        return preset_z_basis(star)
    if name in (GHZ_X, GHZ_Y, GHZ_Z):
        return preset_ghz(star, name[-1])
    raise InvalidParameterError(f"unknown scheme {name!r}; expected one of {SCHEMES}")


# --- engines ---------------------------------------------------------------------


def single_pauli_channels(axis: str | Sequence[str], thetas) -> list[SinglePauliChannel]:
    thetas = list(np.asarray(thetas, dtype=float).reshape(-1))
    axes = [axis] * len(thetas) if isinstance(axis, str) else list(axis)
    if len(axes) != len(thetas):
        raise InvalidParameterError("one axis per channel required")
    return [make_single_pauli(a, t) for a, t in zip(axes, thetas)]


def distribute(
    tree: RootedTree,
    circuit: CircuitSpec,
    eta: IndexMap,
    channels: Sequence[ChannelModel],
    engine: str = "dense",
    log: list | None = None,
):
    """Run the distribution process.

    Returns a :class:`~qntomo.dense.DensityMatrix` (dense engine) or a
    :class:`~qntomo.states.DiagonalState` (flip engine) over the root's kept
    qubit followed by the childless nodes in ascending label order.  When
    ``log`` is a list, ``("channel", edge_id, receiver)`` events are appended
    to it.
    """
    if len(channels) != len(tree.edges):
        raise InvalidParameterError(f"need {len(tree.edges)} channels, got {len(channels)}")
    plan = validate_circuit(tree, circuit, eta)
    if engine == "dense":
        return _distribute_dense(tree, circuit, eta, channels, plan, log)
    if engine == "flip":
        return _distribute_flip(tree, circuit, channels, log)
    raise InvalidParameterError(f"engine must be 'dense' or 'flip', got {engine!r}")


def _distribute_dense(tree, circuit, eta, channels, plan: _Plan, log):
    total = plan.registers[tree.root] + sum(
        plan.registers[v] - 1 for v in range(tree.node_count) if v != tree.root
    )
    if total > dense.MAX_QUBITS:
        raise dense.CapacityError(
            f"distribution needs {total} qubits; dense engine is capped at {dense.MAX_QUBITS}"
        )
    state = dense.DensityMatrix.zero(total)
    next_free = 0
    inbound: dict[int, int] = {}
    holder: dict[int, int] = {}
    for level in tree.levels:
        for v in level:
            n_v = plan.registers[v]
            if v == tree.root:
                local = list(range(next_free, next_free + n_v))
                next_free += n_v
            else:
                received = inbound.pop(v)
                edge = tree.incoming_channel(v)
                state = dense.apply_channel(state, channels[edge], received)
                if log is not None:
                    log.append(("channel", edge, v))
                local = [received] + list(range(next_free, next_free + n_v - 1))
                next_free += n_v - 1
            for g in _effective_circuit(tree, circuit, v).gates:
                state = dense.apply_gate(state, gate_matrix(g), [local[q] for q in g.qubits])
            for u in tree.successors(v):
                inbound[u] = local[int(eta[(v, u)])]
            for q in range(n_v):
                if v == tree.root and q in plan.retained_root:
                    holder[v] = local[q]
                elif not tree.successors(v):
                    holder[v] = local[q]
    order = [holder[tree.root]] if plan.retained_root else []
    order += [holder[v] for v in plan.final_nodes]
    return dense.permute_qubits(state, order)


def _preset_axis_check(circuit: CircuitSpec, channels) -> np.ndarray:
    scheme = circuit.preset
    if scheme not in SCHEMES:
        raise UnsupportedModelError("the flip engine only runs preset circuits")
    want = SCHEME_AXIS[scheme]
    thetas = []
    for e, ch in enumerate(channels):
        if not isinstance(ch, SinglePauliChannel):
            raise UnsupportedModelError(f"channel {e} is not a single-Pauli channel")
        if ch.axis != want:
            raise UnsupportedModelError(
                f"scheme {scheme} needs {want} channels on every edge; channel {e} is {ch.axis}"
            )
        thetas.append(ch.identity_probability)
    return np.array(thetas)


def _distribute_flip(tree, circuit: CircuitSpec, channels, log) -> DiagonalState:
    if not isinstance(tree, StarTopology) or tree.n != circuit.star_size:
        raise UnsupportedModelError("the flip engine needs the star the preset was built for")
    thetas = _preset_axis_check(circuit, channels)
    if log is not None:
        log.extend(("channel", e, tree.edges[e][0] if e else tree.center) for e in range(len(channels)))
    return flip_distribution(circuit.preset, thetas)


# Outcome of the root->centre hop, as the 2-qubit GHZ label (s1, b) seen by
# the centre after its local gates, for (no flip, flip) on channel 0.
_ROOT_RESPONSE = {GHZ_X: ((0, 0), (0, 1)), GHZ_Y: ((0, 0), (1, 1)), GHZ_Z: ((0, 0), (0, 1))}
# Pauli felt by the GHZ state for an end-channel flip (Z is conjugated to X by the Hadamards).
_END_AXIS = {GHZ_X: "X", GHZ_Y: "Y", GHZ_Z: "X"}


def outcome_indices(scheme: str, flips: np.ndarray) -> np.ndarray:
    """Outcome label index for each row of a ``(M, n)`` flip array.

    Z scheme: ``S_j = F_0 xor F_j``.  GHZ schemes: the centre's 2-qubit label
    is fanned out to ``s = s1 * (1...1)``; end flips then act by label algebra
    (X toggles ``s_j``; Y toggles ``s_j`` and ``b``).
    """
    flips = np.asarray(flips, dtype=np.int64)
    if flips.ndim != 2 or flips.shape[1] < 1:
        raise InvalidParameterError("flips must be a (shots, channels) array")
    n = flips.shape[1]
    f0, fe = flips[:, 0], flips[:, 1:]
    weights = 1 << np.arange(n - 2, -1, -1, dtype=np.int64)
    if scheme == Z_BASIS:
        bits = fe ^ f0[:, None]
        return bits @ weights
    if scheme not in _ROOT_RESPONSE:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    (s_no, b_no), (s_yes, b_yes) = _ROOT_RESPONSE[scheme]
    s1 = np.where(f0 == 1, s_yes, s_no)
    b = np.where(f0 == 1, b_yes, b_no)
    s = fe ^ s1[:, None]
    if _END_AXIS[scheme] == "Y":
        b = b ^ (fe.sum(axis=1) & 1)
    return b * (1 << (n - 1)) + s @ weights


def flip_weights(thetas) -> tuple[np.ndarray, np.ndarray]:
    """All ``2**n`` flip patterns and their probabilities ``prod theta^(1-F) (1-theta)^F``."""
    thetas = np.asarray(thetas, dtype=float)
    flips = bit_table(thetas.size)
    w = np.where(flips == 1, 1.0 - thetas, thetas).prod(axis=1)
    return flips, w


def flip_distribution(scheme: str, thetas) -> DiagonalState:
    """Exact outcome distribution by enumerating every flip pattern."""
    scheme = scheme.upper()
    if scheme not in SCHEMES:
        raise InvalidParameterError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    thetas = np.asarray(thetas, dtype=float).reshape(-1)
    if thetas.size < 2:
        raise InvalidParameterError("a star scheme needs at least two channels")
    if np.any(thetas < 0) or np.any(thetas > 1):
        raise InvalidParameterError(f"thetas must lie in [0, 1], got {thetas}")
    if thetas.size > 20:
        raise dense.CapacityError("exact flip enumeration is limited to 20 channels")
    flips, w = flip_weights(thetas)
    idx = outcome_indices(scheme, flips)
    n = thetas.size
    num_qubits = n - 1 if SCHEME_BASIS[scheme] == "Z" else n
    probs = np.bincount(idx, weights=w, minlength=2**num_qubits)
    return DiagonalState(SCHEME_BASIS[scheme], num_qubits, probs)


def simulate_shots(scheme: str, thetas, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Per-shot Monte Carlo: draw every channel's flip, return the outcome index of each shot."""
    flips = (rng.random((shots, len(thetas))) >= np.asarray(thetas, dtype=float)).astype(np.int64)
    return outcome_indices(scheme.upper(), flips)


def scheme_state(scheme: str, thetas, engine: str = "flip"):
    """Convenience: build the star, preset and channels for ``thetas`` and distribute."""
    scheme = scheme.upper()
    thetas = np.asarray(thetas, dtype=float).reshape(-1)
    star = StarTopology(thetas.size)
    circuit, eta = preset(scheme, star)
    channels = single_pauli_channels(SCHEME_AXIS[scheme], thetas)
    return distribute(star, circuit, eta, channels, engine)
