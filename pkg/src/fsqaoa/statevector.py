"""Dense complex statevector engine.

Index convention: bit j of a basis index is the value of qubit j, so qubit 0
is the least significant bit.  All gate kernels are strided single-qubit
passes over the amplitude array.

Operator conventions (fixed package-wide):

* phase separator: ``amp[z] *= exp(-i * gamma * E(z))`` -- diagonal, imprints
  the QUBO objective;
* mixer: per qubit j the rotation ``exp(+i * (beta*zeta_j/2) * X_j)``, i.e.
  the 2x2 matrix ``[[cos t, i sin t], [i sin t, cos t]]`` with
  ``t = beta*zeta_j/2``.  ``beta`` is the nominal layer angle and ``zeta_j``
  in [0, 1] scales it per qubit; ``zeta_j = 0`` freezes the qubit.

Only the relative sign between the two operators is physical (conjugating
both leaves every probability and every metric element unchanged); this
pairing is the one under which a gamma-heavy schedule tail concentrates
amplitude on low energies.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .qubo_core import QuboMatrix, bits_to_index, energy_table

MAX_QUBITS = 26


class StateVector:
    """2^n complex amplitudes with unit norm."""

    __slots__ = ("amps",)

    def __init__(self, amps: np.ndarray):
        amps = np.asarray(amps, dtype=complex)
        if amps.ndim != 1 or amps.size < 2 or amps.size & (amps.size - 1):
            raise ValueError("amplitude array length must be a power of two >= 2")
        self.amps = amps

    @property
    def n(self) -> int:
        return self.amps.size.bit_length() - 1

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


def plus_state(n: int) -> StateVector:
    """Uniform superposition |+>^n: every amplitude 2^(-n/2)."""
    if not 1 <= n <= MAX_QUBITS:
        raise ValueError(f"n={n} outside [1, {MAX_QUBITS}]")
    return StateVector(np.full(1 << n, 2.0 ** (-n / 2), dtype=complex))


def basis_state(bits: Sequence[int]) -> StateVector:
    """Computational basis state |bits>."""
    amps = np.zeros(1 << len(bits), dtype=complex)
    amps[bits_to_index(bits)] = 1.0
    return StateVector(amps)


def product_state(spec: str) -> StateVector:
    """Product state from a character per qubit: '0', '1', '+' or '-'.

    Character i describes qubit i, e.g. "01+-": qubit 0 in |0>, qubit 1 in
    |1>, qubit 2 in |+>, qubit 3 in |->.
    """
    single = {
        "0": np.array([1.0, 0.0], dtype=complex),
        "1": np.array([0.0, 1.0], dtype=complex),
        "+": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2.0),
        "-": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2.0),
    }
    if not spec or any(c not in single for c in spec):
        raise ValueError(f"state spec {spec!r} must be non-empty over 0, 1, +, -")
    amps = np.ones(1, dtype=complex)
    for c in spec:
        # qubit j is bit j, so later qubits go into the slower index half
        amps = np.concatenate([amps * single[c][0], amps * single[c][1]])
    return StateVector(amps)


def apply_phase_separator(
    psi: StateVector, Q: QuboMatrix, gamma: float, energies: np.ndarray | None = None
) -> StateVector:
    """amp[z] *= exp(-i*gamma*E(z)).  Mutates and returns `psi`.

    Pass a precomputed `energies` table (from `energy_table`) to amortize the
    per-index objective over many layers.
    """
    if energies is None:
        if Q.n != psi.n:
            raise ValueError(f"matrix size {Q.n} != state size {psi.n}")
        energies = energy_table(Q)
    elif energies.shape != psi.amps.shape:
        raise ValueError("energy table length does not match the state")
    psi.amps *= np.exp(-1j * gamma * energies)
    return psi


def apply_mixer(psi: StateVector, beta: float, zeta: Sequence[float]) -> StateVector:
    """Per-qubit X rotation exp(+i*(beta*zeta_j/2)*X_j).  Mutates and returns
    `psi`.  The per-qubit passes commute, so their order is irrelevant."""
    zeta = np.asarray(zeta, dtype=float)
    if zeta.shape != (psi.n,):
        raise ValueError(f"zeta length {zeta.shape} != qubit count {psi.n}")
    if np.any(zeta < 0.0) or np.any(zeta > 1.0):
        raise ValueError("zeta entries must lie in [0, 1]")
    amps = psi.amps
    for j in range(psi.n):
        t = 0.5 * beta * zeta[j]
        v = amps.reshape(-1, 2, 1 << j)
        amps = (np.cos(t) * v + 1j * np.sin(t) * v[:, ::-1, :]).reshape(-1)
    psi.amps = amps
    return psi


def x_expectation(psi: StateVector, j: int) -> float:
    """<X_j> computed exactly from the amplitudes."""
    if not 0 <= j < psi.n:
        raise ValueError(f"qubit {j} outside [0, {psi.n})")
    v = psi.amps.reshape(-1, 2, 1 << j)
    return float(np.real(np.sum(np.conj(v) * v[:, ::-1, :])))


def xx_expectation(psi: StateVector, j: int, k: int) -> float:
    """<X_j X_k> computed exactly from the amplitudes."""
    n = psi.n
    if not (0 <= j < n and 0 <= k < n):
        raise ValueError(f"qubit pair ({j}, {k}) outside [0, {n})")
    if j == k:
        return 1.0
    lo, hi = min(j, k), max(j, k)
    v = psi.amps.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)
    return float(np.real(np.sum(np.conj(v) * v[:, ::-1, :, ::-1, :])))


def probability(psi: StateVector, x: Sequence[int]) -> float:
    """|<x|psi>|^2 for a basis bitstring."""
    if len(x) != psi.n:
        raise ValueError(f"bitstring length {len(x)} != qubit count {psi.n}")
    return float(np.abs(psi.amps[bits_to_index(x)]) ** 2)


def manifold_probability(psi: StateVector, states: Iterable[Sequence[int]]) -> float:
    """Total probability of a set of basis bitstrings."""
    return float(sum(probability(psi, x) for x in states))


def _probabilities(psi: StateVector) -> np.ndarray:
    p = np.abs(psi.amps) ** 2
    return p / p.sum()


def sample(psi: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """`shots` i.i.d. computational-basis draws as a (shots, n) 0/1 array."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    idx = rng.choice(psi.amps.size, size=shots, p=_probabilities(psi))
    return ((idx[:, None] >> np.arange(psi.n)[None, :]) & 1).astype(np.uint8)


def sample_x_basis(psi: StateVector, shots: int, rng: np.random.Generator) -> np.ndarray:
    """`shots` i.i.d. X-basis draws as a (shots, n) array of +-1 outcomes."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    amps = psi.amps.copy()
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(psi.n):
        v = amps.reshape(-1, 2, 1 << j)
        plus = (v[:, 0, :] + v[:, 1, :]) * inv_sqrt2
        minus = (v[:, 0, :] - v[:, 1, :]) * inv_sqrt2
        v[:, 0, :] = plus
        v[:, 1, :] = minus
    p = np.abs(amps.reshape(-1)) ** 2
    idx = rng.choice(amps.size, size=shots, p=p / p.sum())
    bits = (idx[:, None] >> np.arange(psi.n)[None, :]) & 1
    return (1 - 2 * bits).astype(np.int8)


def overlap(psi: StateVector, phi: StateVector) -> complex:
    """<psi|phi>."""
    if psi.amps.size != phi.amps.size:
        raise ValueError("states have different sizes")
    return complex(np.vdot(psi.amps, phi.amps))


def dump_amplitudes(psi: StateVector, path) -> None:
    """Debug CSV dump: one `index,bits,re,im,prob` row per amplitude, with
    bits written qubit-0 first."""
    n = psi.n
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("index,bits,re,im,prob\n")
        for z, a in enumerate(psi.amps):
            bits = "".join(str((z >> k) & 1) for k in range(n))
            fh.write(f"{z},{bits},{a.real:.17g},{a.imag:.17g},{abs(a) ** 2:.17g}\n")
