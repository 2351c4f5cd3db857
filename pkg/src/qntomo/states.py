"""Outcome labels and diagonal (classical) states.

Two label families are used:

* ``"Z"`` basis over ``m`` bits: the label is a bit string, first character is
  the first qubit (end-node 1 in the star schemes). Index = ``int(label, 2)``.
* ``"GHZ"`` basis over ``n`` qubits: :class:`GhzLabel` ``(s, b)`` with
  ``len(s) == n - 1``. Index = ``b * 2**(n-1) + int(s, 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

from .errors import InvalidParameterError

BASES = ("Z", "GHZ")


class GhzLabel(NamedTuple):
    s: str
    b: int

    @property
    def num_qubits(self) -> int:
        return len(self.s) + 1

    def __str__(self) -> str:
        return f"{self.s}|{self.b}"

    @classmethod
    def parse(cls, text: str) -> GhzLabel:
        s, sep, b = text.strip().partition("|")
        if not sep or b not in ("0", "1") or any(c not in "01" for c in s):
            raise InvalidParameterError(f"bad GHZ label {text!r}")
        return cls(s, int(b))


Label = Union[str, GhzLabel]


def index_to_label(basis: str, num_qubits: int, index: int) -> Label:
    if basis == "Z":
        return format(index, f"0{num_qubits}b") if num_qubits else ""
    half = 2 ** (num_qubits - 1)
    b, s = divmod(int(index), half)
    s_str = format(s, f"0{num_qubits - 1}b") if num_qubits > 1 else ""
    return GhzLabel(s_str, b)


def label_to_index(basis: str, num_qubits: int, label: Label) -> int:
    if basis == "Z":
        label = str(label)
        if len(label) != num_qubits:
            raise InvalidParameterError(f"label {label!r} does not have {num_qubits} bits")
        return int(label, 2) if label else 0
    if isinstance(label, str):
        label = GhzLabel.parse(label)
    if label.num_qubits != num_qubits:
        raise InvalidParameterError(f"label {label} does not index {num_qubits} qubits")
    s = int(label.s, 2) if label.s else 0
    return label.b * 2 ** (num_qubits - 1) + s


def all_labels(basis: str, num_qubits: int) -> list[Label]:
    return [index_to_label(basis, num_qubits, i) for i in range(2**num_qubits)]


def bit_table(num_bits: int) -> np.ndarray:
    """``(2**num_bits, num_bits)`` array; row ``i`` holds the bits of ``i``, most significant first."""
    idx = np.arange(2**num_bits)
    shifts = np.arange(num_bits - 1, -1, -1)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class DiagonalState:
    """Probability vector over the labels of a fixed basis, indexed as described above."""

    basis: str
    num_qubits: int
    probs: np.ndarray

    def __post_init__(self):
        if self.basis not in BASES:
            raise InvalidParameterError(f"unknown basis {self.basis!r}")
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        if probs.size != 2**self.num_qubits:
            raise InvalidParameterError("probability vector has the wrong length")
        if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidParameterError("not a normalized probability vector")
        probs = np.clip(probs, 0.0, None)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    def labels(self) -> list[Label]:
        return all_labels(self.basis, self.num_qubits)

    def probability(self, label: Label) -> float:
        return float(self.probs[label_to_index(self.basis, self.num_qubits, label)])

    def as_dict(self, keep_zeros: bool = False) -> dict[Label, float]:
        return {
            lab: float(p)
            for lab, p in zip(self.labels(), self.probs)
            if keep_zeros or p > 0
        }

    def __repr__(self) -> str:
        return f"DiagonalState({self.basis}, n={self.num_qubits}, {self.as_dict()})"
