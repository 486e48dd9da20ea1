"""QUBO problems: representation, energy evaluation, exhaustive ground truth,
instance generators, and a plain-text file format.

Conventions used throughout the package:

* The objective is ``E(x) = x^T Q x`` for ``x`` in {0,1}^n with ``Q`` stored
  as a full symmetric matrix, so every off-diagonal pair contributes twice.
* A bitstring is a tuple ``(x_0, ..., x_{n-1})``; its basis index packs bit
  ``x_j`` at position ``j`` (qubit 0 is the least significant bit).  When
  written as text, qubit 0 comes first: ``"110"`` is index 3.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

Bitstring = Tuple[int, ...]

MAX_ENUM_QUBITS = 26


class QuboParseError(ValueError):
    """Raised when a QUBO file cannot be parsed."""


def bits_to_index(bits: Sequence[int]) -> int:
    """Pack a bitstring into its basis index (bit j of the index = qubit j)."""
    idx = 0
    for j, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {j} is {b!r}, expected 0 or 1")
        idx |= int(b) << j
    return idx


def index_to_bits(index: int, n: int) -> Bitstring:
    """Unpack a basis index into an n-bit tuple (qubit 0 first)."""
    return tuple((index >> j) & 1 for j in range(n))


def parse_bits(text: str) -> Bitstring:
    """Parse a textual bitstring such as "0110" (qubit 0 is the first char)."""
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"invalid bitstring {text!r}")
    return tuple(int(c) for c in text)


def format_bits(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


@dataclasses.dataclass(frozen=True)
class QuboMatrix:
    """Symmetric real n x n matrix defining a QUBO objective."""

    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {q.shape}")
        if q.shape[0] < 1:
            raise ValueError("empty matrix")
        if not np.all(np.isfinite(q)):
            raise ValueError("matrix entries must be finite")
        if np.max(np.abs(q - q.T)) > 1e-12:
            raise ValueError("matrix must be symmetric (tolerance 1e-12)")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]


@dataclasses.dataclass(frozen=True)
class GroundTruth:
    """Exhaustive ground truth: global optimum set plus an optional
    engineered false-minimum manifold."""

    min_energy: float
    optimal_states: Tuple[Bitstring, ...]
    false_min_states: Tuple[Bitstring, ...] = ()
    false_min_energy: Optional[float] = None

    def __post_init__(self):
        if not self.optimal_states:
            raise ValueError("optimal_states must be non-empty")
        if self.false_min_states:
            if self.false_min_energy is None:
                raise ValueError("false_min_energy required with false_min_states")
            if self.false_min_energy <= self.min_energy:
                raise ValueError("false_min_energy must exceed min_energy")
            if set(self.false_min_states) & set(self.optimal_states):
                raise ValueError("optimal and false-minimum sets overlap")


@dataclasses.dataclass(frozen=True)
class GadgetParams:
    """Parameters of the engineered false-minimum instance generator."""

    n_cut: int
    n_gadget: int
    j_gadget: float
    j_couple: float
    bias: float
    seed: Optional[int] = None

    def __post_init__(self):
        if self.n_cut < 1 or self.n_gadget < 1:
            raise ValueError("n_cut and n_gadget must be >= 1")
        for name in ("j_gadget", "j_couple", "bias"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def n(self) -> int:
        return self.n_cut + 2 * self.n_gadget


@dataclasses.dataclass(frozen=True)
class GadgetInstance:
    """Generated instance: the matrix, the planted cut solution, and whether
    the cut block had degenerate optima (tie broken lexicographically)."""

    matrix: QuboMatrix
    sol: Bitstring
    cut_ties: bool


def energy(Q: QuboMatrix, x: Sequence[int]) -> float:
    """E(x) = x^T Q x (off-diagonal pairs counted twice)."""
    if len(x) != Q.n:
        raise ValueError(f"bitstring length {len(x)} != problem size {Q.n}")
    v = np.asarray(x, dtype=float)
    return float(v @ Q.q @ v)


def energy_table(Q: QuboMatrix, method: str = "doubling") -> np.ndarray:
    """Energies of all 2^n basis states, indexed by basis index.

    Methods (all agree to 1e-12; see tests):
        doubling -- extend the table one qubit at a time, O(2^n * n) vectorized
        naive    -- chunked x^T Q x over explicit bit matrices, O(2^n * n^2)
        gray     -- single-bit-flip incremental walk in Gray-code order
    """
    n = Q.n
    if n > MAX_ENUM_QUBITS:
        raise ValueError(f"n={n} exceeds enumeration cap {MAX_ENUM_QUBITS}")
    if method == "doubling":
        return _energy_table_doubling(Q.q)
    if method == "naive":
        return _energy_table_naive(Q.q)
    if method == "gray":
        return _energy_table_gray(Q.q)
    raise ValueError(f"unknown method {method!r}")


def _energy_table_doubling(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    table = np.zeros(1)
    for k in range(n):
        # setting bit k adds q[k,k] plus twice its coupling to every set bit j<k
        lin = np.zeros(1 << k)
        for j in range(k):
            lin.reshape(-1, 2, 1 << j)[:, 1, :] += 2.0 * q[j, k]
        table = np.concatenate([table, table + q[k, k] + lin])
    return table


def _energy_table_naive(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    out = np.empty(1 << n)
    chunk = 1 << min(n, 14)
    cols = np.arange(n)
    for start in range(0, 1 << n, chunk):
        z = np.arange(start, min(start + chunk, 1 << n))
        bits = ((z[:, None] >> cols[None, :]) & 1).astype(float)
        out[z] = np.einsum("zi,ij,zj->z", bits, q, bits)
    return out


def _energy_table_gray(q: np.ndarray) -> np.ndarray:
    n = q.shape[0]
    out = np.empty(1 << n)
    x = np.zeros(n)
    e = 0.0
    out[0] = 0.0
    for i in range(1, 1 << n):
        k = (i & -i).bit_length() - 1
        coupling = float(q[k] @ x) - q[k, k] * x[k]
        e += (1.0 - 2.0 * x[k]) * (q[k, k] + 2.0 * coupling)
        x[k] = 1.0 - x[k]
        out[i ^ (i >> 1)] = e
    return out


def exhaustive_solve(Q: QuboMatrix) -> GroundTruth:
    """Enumerate all basis states and return every minimum-energy bitstring
    (ties within 1e-12 absolute), in ascending index order."""
    table = energy_table(Q)
    min_e = float(table.min())
    idx = np.flatnonzero(table <= min_e + 1e-12)
    states = tuple(index_to_bits(int(z), Q.n) for z in idx)
    return GroundTruth(min_energy=min_e, optimal_states=states)


def attach_false_minima(
    truth: GroundTruth, Q: QuboMatrix, states: Iterable[Bitstring]
) -> GroundTruth:
    """Return a copy of `truth` carrying `states` as the false-minimum set.

    Validates that the states share one energy level strictly above the
    optimum and do not intersect the optimal set.
    """
    states = tuple(tuple(int(b) for b in s) for s in states)
    if not states:
        return truth
    energies = np.array([energy(Q, s) for s in states])
    if np.ptp(energies) > 1e-9:
        raise ValueError("false-minimum states do not share a single energy level")
    return GroundTruth(
        min_energy=truth.min_energy,
        optimal_states=truth.optimal_states,
        false_min_states=states,
        false_min_energy=float(energies[0]),
    )


def generate_gadget_problem(
    params: GadgetParams, rng: Optional[np.random.Generator] = None
) -> GadgetInstance:
    """Build an engineered instance whose unique optimum is ``sol ++ 0...0``
    while ``~sol ++ 1...1 ++ (anything)`` forms a degenerate manifold exactly
    ``bias`` above it, with the trailing `n_gadget` partner bits free.

    Construction, on n = n_cut + 2*n_gadget variables:
      1. weighted max-cut block on the first n_cut variables, weights W
         drawn uniformly from [-1, 1] in row-major pair order;
      2. ``sol`` = lexicographically smallest minimizer of that block;
      3. each cut variable couples to every gadget variable with weight
         s_i * j_couple/(n_gadget*n_cut), s_i = 2*sol_i - 1, written in the
         same diagonal-compensated form as the cut edges;
      4. all-to-all gadget block: -j_gadget off-diagonal, +j_gadget added to
         both diagonals per pair;
      5. each gadget variable i gets a partner i + n_gadget: -1 off-diagonal,
         +2 on the partner diagonal (partner bit is free when bit i is set);
      6. diagonal bias -s_i * bias/n_cut on each cut variable.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    nc, ng = params.n_cut, params.n_gadget
    n = params.n
    q = np.zeros((n, n))

    for i in range(nc):
        for j in range(i + 1, nc):
            w = rng.uniform(-1.0, 1.0)
            q[i, j] += w
            q[j, i] += w
            q[i, i] -= w
            q[j, j] -= w

    cut_table = _energy_table_doubling(q[:nc, :nc])
    min_idx = np.flatnonzero(cut_table <= cut_table.min() + 1e-12)
    candidates = sorted(index_to_bits(int(z), nc) for z in min_idx)
    sol = candidates[0]
    ties = len(candidates) > 1

    c = params.j_couple / (ng * nc)
    for i in range(nc):
        s = 2 * sol[i] - 1
        for j in range(nc, nc + ng):
            q[i, j] += s * c
            q[j, i] += s * c
            q[i, i] -= s * c
            q[j, j] -= s * c

    for i in range(nc, nc + ng):
        for j in range(i + 1, nc + ng):
            q[i, j] -= params.j_gadget
            q[j, i] -= params.j_gadget
            q[i, i] += params.j_gadget
            q[j, j] += params.j_gadget

    for i in range(nc, nc + ng):
        q[i, i + ng] -= 1.0
        q[i + ng, i] -= 1.0
        q[i + ng, i + ng] += 2.0

    for i in range(nc):
        q[i, i] -= (2 * sol[i] - 1) * params.bias / nc

    return GadgetInstance(matrix=QuboMatrix(q), sol=sol, cut_ties=ties)


def false_minimum_manifold(sol: Sequence[int], n_cut: int, n_gadget: int) -> Tuple[Bitstring, ...]:
    """All 2^n_gadget states ``~sol ++ 1^n_gadget ++ y`` (partner bits free)."""
    if len(sol) != n_cut:
        raise ValueError(f"sol length {len(sol)} != n_cut {n_cut}")
    head = tuple(1 - int(b) for b in sol) + (1,) * n_gadget
    return tuple(head + index_to_bits(y, n_gadget) for y in range(1 << n_gadget))


def gadget_ground_truth(instance: GadgetInstance) -> GroundTruth:
    """Exhaustive ground truth of a generated instance with its false-minimum
    manifold attached.  Sizes are recovered from the instance itself."""
    n_cut = len(instance.sol)
    n_gadget = (instance.matrix.n - n_cut) // 2
    truth = exhaustive_solve(instance.matrix)
    manifold = false_minimum_manifold(instance.sol, n_cut, n_gadget)
    return attach_false_minima(truth, instance.matrix, manifold)


def random_qubo(n: int, rng: np.random.Generator) -> QuboMatrix:
    """Symmetric matrix with i.i.d. uniform [-1, 1] entries.

    Draws the upper triangle including the diagonal in row-major order and
    mirrors it, so a fixed seed gives the same matrix on every platform that
    shares the generator algorithm.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    q = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            v = rng.uniform(-1.0, 1.0)
            q[i, j] = v
            q[j, i] = v
    return QuboMatrix(q)


def save_qubo(Q: QuboMatrix, path) -> None:
    """Write a QUBO to a text file.

    Format: first line ``n <count>``; one ``i j value`` line per nonzero
    entry with i <= j (symmetric completion implied); ``#`` starts a comment;
    values carry 17 significant digits so the round-trip is lossless.
    """
    lines = [f"n {Q.n}"]
    for i in range(Q.n):
        for j in range(i, Q.n):
            v = Q.q[i, j]
            if v != 0.0:
                lines.append(f"{i} {j} {v:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_qubo(path) -> QuboMatrix:
    """Parse a QUBO file written by `save_qubo` (or by hand).

    Entries may appear in either triangle; a conflicting duplicate or a
    mirrored pair differing by more than 1e-12 is rejected.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()

    def err(ln: int, col: int, msg: str) -> QuboParseError:
        return QuboParseError(f"{path}: line {ln}, column {col}: {msg}")

    n = None
    q = None
    written = None
    for ln, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None:
            if fields[0] != "n" or len(fields) != 2:
                raise err(ln, 1, "expected header 'n <count>'")
            try:
                n = int(fields[1])
            except ValueError:
                raise err(ln, raw.find(fields[1]) + 1, f"bad qubit count {fields[1]!r}")
            if n < 1 or n > MAX_ENUM_QUBITS:
                raise err(ln, 1, f"qubit count {n} outside [1, {MAX_ENUM_QUBITS}]")
            q = np.zeros((n, n))
            written = np.zeros((n, n), dtype=bool)
            continue
        if len(fields) != 3:
            raise err(ln, 1, f"expected 'i j value', got {len(fields)} fields")
        try:
            i = int(fields[0])
            j = int(fields[1])
        except ValueError:
            raise err(ln, 1, f"bad index in {line!r}")
        if not (0 <= i < n and 0 <= j < n):
            raise err(ln, 1, f"index ({i}, {j}) outside [0, {n})")
        try:
            v = float(fields[2])
        except ValueError:
            raise err(ln, raw.find(fields[2]) + 1, f"bad value {fields[2]!r}")
        if not math.isfinite(v):
            raise err(ln, raw.find(fields[2]) + 1, "value must be finite")
        a, b = min(i, j), max(i, j)
        if written[a, b]:
            if abs(q[a, b] - v) > 1e-12:
                raise err(ln, 1, f"entry ({i}, {j}) conflicts with earlier value (asymmetric input)")
            continue
        written[a, b] = True
        q[a, b] = v
        q[b, a] = v
    if n is None:
        raise QuboParseError(f"{path}: line 1, column 1: empty file (missing 'n <count>' header)")
    return QuboMatrix(q)
