"""Shot sampling, outcome records and Z-scheme marginals."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dense
from .errors import InvalidParameterError, WrongSchemeError
from .states import DiagonalState, Label, all_labels, bit_table, label_to_index

RECORD_FORMAT = "qntomo-record v1"
CHUNK_SHOTS = 1 << 20


@dataclass(frozen=True, eq=False)
class OutcomeRecord:
    """Histogram of ``shots`` measurement outcomes over a basis' labels."""

    basis: str
    num_qubits: int
    counts: np.ndarray
    seed: int | None = None
    scheme: str | None = None

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64).reshape(-1)
        if counts.size != 2**self.num_qubits:
            raise InvalidParameterError("histogram length does not match the label set")
        if np.any(counts < 0):
            raise InvalidParameterError("negative counts")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def shots(self) -> int:
        return int(self.counts.sum())

    @property
    def star_size(self) -> int:
        """Number of star end-nodes ``n`` implied by the label length."""
        return self.num_qubits + 1 if self.basis == "Z" else self.num_qubits

    def labels(self) -> list[Label]:
        return all_labels(self.basis, self.num_qubits)

    def count(self, label: Label) -> int:
        return int(self.counts[label_to_index(self.basis, self.num_qubits, label)])

    def frequencies(self) -> np.ndarray:
        return self.counts / self.shots

    def __add__(self, other: OutcomeRecord) -> OutcomeRecord:
        if (self.basis, self.num_qubits, self.scheme) != (other.basis, other.num_qubits, other.scheme):
            raise InvalidParameterError("cannot merge records of different schemes")
        return OutcomeRecord(self.basis, self.num_qubits, self.counts + other.counts, self.seed, self.scheme)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {RECORD_FORMAT}\n")
        buf.write(
            f"# scheme={self.scheme or ''},basis={self.basis},n={self.star_size},"
            f"N={self.shots},seed={'' if self.seed is None else self.seed}\n"
        )
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["label", "count"])
        for lab, c in zip(self.labels(), self.counts):
            writer.writerow([str(lab), int(c)])
        return buf.getvalue()

    def write(self, path) -> Path:
        path = Path(path)
        path.write_text(self.to_csv())
        return path

    @classmethod
    def from_csv(cls, text: str) -> OutcomeRecord:
        lines = text.splitlines()
        if not lines or lines[0].strip() != f"# {RECORD_FORMAT}":
            raise InvalidParameterError(f"not a {RECORD_FORMAT} file")
        meta = dict(item.split("=", 1) for item in lines[1].lstrip("# ").split(","))
        basis = meta["basis"]
        n = int(meta["n"])
        num_qubits = n - 1 if basis == "Z" else n
        counts = np.zeros(2**num_qubits, dtype=np.int64)
        for row in csv.DictReader(lines[2:]):
            counts[label_to_index(basis, num_qubits, row["label"])] = int(row["count"])
        if counts.sum() != int(meta["N"]):
            raise InvalidParameterError("record counts do not sum to N")
        seed = int(meta["seed"]) if meta.get("seed") else None
        return cls(basis, num_qubits, counts, seed, meta.get("scheme") or None)

    @classmethod
    def read(cls, path) -> OutcomeRecord:
        return cls.from_csv(Path(path).read_text())


def _chunk_counts(probs: np.ndarray, shots: int, seed_seq: np.random.SeedSequence) -> np.ndarray:
    return np.random.default_rng(seed_seq).multinomial(shots, probs)


def sample(
    dist: DiagonalState,
    shots: int,
    seed: int | None,
    *,
    scheme: str | None = None,
    workers: int = 1,
) -> OutcomeRecord:
    """Draw ``shots`` iid outcomes from ``dist``.

    Shots are split into fixed-size chunks, each with its own child of
    ``SeedSequence(seed)``, so the histogram does not depend on ``workers``.
    """
    if shots < 1:
        raise InvalidParameterError(f"need at least one shot, got {shots}")
    probs = np.asarray(dist.probs, dtype=float)
    probs = probs / probs.sum()
    n_chunks = math.ceil(shots / CHUNK_SHOTS)
    sizes = [CHUNK_SHOTS] * (n_chunks - 1) + [shots - CHUNK_SHOTS * (n_chunks - 1)]
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    if workers > 1 and n_chunks > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda a: _chunk_counts(probs, *a), zip(sizes, children)))
    else:
        parts = [_chunk_counts(probs, s, c) for s, c in zip(sizes, children)]
    return OutcomeRecord(dist.basis, dist.num_qubits, np.sum(parts, axis=0), seed, scheme)


def measure_dense(
    state: dense.DensityMatrix, basis: str, shots: int, seed: int | None, *, scheme: str | None = None
) -> OutcomeRecord:
    """Projective measurement of a dense state in the Z or GHZ basis (Born rule)."""
    probs = dense.basis_probabilities(state, basis)
    return sample(DiagonalState(basis, state.num_qubits, probs), shots, seed, scheme=scheme)


@dataclass(frozen=True, eq=False)
class Marginals:
    """``p[j-1] = Pr[S_j = 1]`` and ``pair[j-1, k-1] = Pr[S_j = S_k = 1]`` (diagonal equals ``p``)."""

    p: np.ndarray
    pair: np.ndarray
    shots: int | None = None

    @property
    def num_bits(self) -> int:
        return self.p.size

    def p_j(self, j: int) -> float:
        return float(self.p[j - 1])

    def p_jk(self, j: int, k: int) -> float:
        return float(self.pair[j - 1, k - 1])


def marginals(source: OutcomeRecord | DiagonalState) -> Marginals:
    """Single-bit and pairwise flip frequencies of a Z-basis record (or exact distribution)."""
    if source.basis != "Z":
        raise WrongSchemeError("marginals are defined for Z-basis outcomes only")
    if isinstance(source, OutcomeRecord):
        weights = source.counts.astype(float)
        total = float(source.shots)
        shots = source.shots
    else:
        weights = np.asarray(source.probs, dtype=float)
        total = float(weights.sum())
        shots = None
    return marginals_from_weights(weights, source.num_qubits, total, shots)


def marginals_from_weights(weights, num_bits: int, total: float | None = None, shots=None) -> Marginals:
    weights = np.asarray(weights, dtype=float)
    if total is None:
        total = float(weights.sum())
    bits = bit_table(num_bits).astype(float)
    p = weights @ bits / total
    pair = (bits * weights[:, None]).T @ bits / total
    return Marginals(p, pair, shots)
