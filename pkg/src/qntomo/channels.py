"""Mixed-unitary qubit channels.

``theta`` is always the probability of the identity branch: a single-Pauli
channel acts as ``rho -> theta * rho + (1 - theta) * sigma rho sigma``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameterError

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)

PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}
AXES = ("X", "Y", "Z")

_TOL = 1e-12


def _as_axis(axis) -> str:
    axis = str(axis).upper()
    if axis not in AXES:
        raise InvalidParameterError(f"axis must be one of {AXES}, got {axis!r}")
    return axis


@dataclass(frozen=True, eq=False)
class ChannelModel:
    """Channel ``rho -> sum_k theta[k] U_k rho U_k^dagger``."""

    unitaries: tuple[np.ndarray, ...]
    theta: np.ndarray

    def __post_init__(self):
        unitaries = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if len(unitaries) != theta.size or not unitaries:
            raise InvalidParameterError("need one probability per unitary")
        for u in unitaries:
            if u.shape != (2, 2) or not np.allclose(u.conj().T @ u, I2, atol=_TOL, rtol=0):
                raise InvalidParameterError("channel operators must be 2x2 unitaries")
        if np.any(theta < -_TOL) or np.any(theta > 1 + _TOL):
            raise InvalidParameterError(f"probabilities must lie in [0, 1], got {theta}")
        if abs(theta.sum() - 1.0) > _TOL:
            raise InvalidParameterError(f"probabilities must sum to 1, got {theta.sum()!r}")
        theta = np.clip(theta, 0.0, 1.0)
        theta.setflags(write=False)
        object.__setattr__(self, "unitaries", unitaries)
        object.__setattr__(self, "theta", theta)

    def kraus(self) -> list[np.ndarray]:
        return kraus_operators(self)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Act on a single-qubit density matrix."""
        return sum(t * u @ rho @ u.conj().T for t, u in zip(self.theta, self.unitaries))


@dataclass(frozen=True, eq=False)
class SinglePauliChannel(ChannelModel):
    axis: str = field(default="X")

    @classmethod
    def create(cls, axis, theta: float) -> SinglePauliChannel:
        axis = _as_axis(axis)
        theta = float(theta)
        if not 0.0 <= theta <= 1.0:
            raise InvalidParameterError(f"theta must lie in [0, 1], got {theta}")
        return cls((I2, PAULIS[axis]), np.array([theta, 1.0 - theta]), axis)

    @property
    def identity_probability(self) -> float:
        return float(self.theta[0])

    @property
    def flip_probability(self) -> float:
        return float(self.theta[1])


def make_single_pauli(axis, theta: float) -> SinglePauliChannel:
    return SinglePauliChannel.create(axis, theta)


def make_depolarizing(theta4) -> ChannelModel:
    """Pauli channel with weights on ``[I, X, Y, Z]``.

    Collapses to a :class:`SinglePauliChannel` when only one Pauli carries weight.
    """
    theta4 = np.asarray(theta4, dtype=float).reshape(-1)
    if theta4.size != 4:
        raise InvalidParameterError("depolarizing channel needs four probabilities")
    if np.any(theta4 < -_TOL) or abs(theta4.sum() - 1.0) > _TOL:
        raise InvalidParameterError(f"not a probability vector: {theta4}")
    nonzero = [k for k in (1, 2, 3) if theta4[k] > 0]
    if len(nonzero) == 1:
        return make_single_pauli(AXES[nonzero[0] - 1], theta4[0])
    return ChannelModel((I2, X, Y, Z), theta4)


def identity_channel() -> ChannelModel:
    return ChannelModel((I2,), np.array([1.0]))


def sample_flip(channel: SinglePauliChannel, rng: np.random.Generator) -> int:
    """1 when the Pauli branch fires (probability ``1 - theta``)."""
    return int(rng.random() >= channel.identity_probability)


def sample_flips(thetas, size: int, rng: np.random.Generator) -> np.ndarray:
    """Vectorised flips: array ``(size, len(thetas))`` of 0/1, column ``e`` flips w.p. ``1 - thetas[e]``."""
    thetas = np.asarray(thetas, dtype=float)
    return (rng.random((size, thetas.size)) >= thetas).astype(np.uint8)


def kraus_operators(channel: ChannelModel) -> list[np.ndarray]:
    """Kraus form ``K_k = sqrt(theta_k) U_k``; zero-weight branches are dropped."""
    return [np.sqrt(t) * u for t, u in zip(channel.theta, channel.unitaries) if t > 0]


def compose_same_axis(a: SinglePauliChannel, b: SinglePauliChannel) -> SinglePauliChannel:
    """Sequential application of two channels sharing a Pauli axis."""
    if a.axis != b.axis:
        raise InvalidParameterError("composition rule only holds for a shared axis")
    ta, tb = a.identity_probability, b.identity_probability
    return make_single_pauli(a.axis, ta * tb + (1 - ta) * (1 - tb))
