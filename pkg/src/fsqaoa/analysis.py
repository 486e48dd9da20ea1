"""Diagnostics and statistics: layer phases of eigenstates, the r-map that
locates where the phase preference between two eigenstates flips, success and
false-minimum probabilities, X-basis-resolved three-qubit quantities,
empirical CDFs and standard errors.

Phase sign convention (inherited from the engine): a basis state acquires
phase -gamma*E(z) per layer, and a qubit held in |+> acquires +beta/2 (in |->,
-beta/2).  Degenerate manifolds whose free qubits sit in |+> therefore pick
up extra phase per layer, and states that the schedule dynamically reinforces
are the ones with the LARGER layer phase.  The location of a phase crossing
between two eigenstates is convention-independent.
"""

from __future__ import annotations

import dataclasses
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .protocols import RunRecord, apply_layer
from .qubo_core import Bitstring, GroundTruth, QuboMatrix, bits_to_index, energy_table
from .statevector import StateVector, manifold_probability, overlap

_UNDEFINED_PHASE = 1e-12


def layer_phase(
    psi: StateVector,
    Q: QuboMatrix,
    gamma: float,
    beta: float,
    energies: Optional[np.ndarray] = None,
    layer_order: str = "prose",
) -> float:
    """arg <psi| U(gamma, beta) |psi> with zeta = 1, branch cut at pi.

    For a layer eigenstate this is the eigenvalue phase; for a basis state or
    a degenerate-manifold |+>-completed state the overlap still factorizes
    into real cos terms times the accumulated phase, so the angle remains the
    physically relevant one.  The caller is responsible for staying in
    regimes where the phase does not wrap.
    """
    evolved = apply_layer(psi.copy(), Q, gamma, beta, np.ones(psi.n), energies, layer_order)
    ov = overlap(psi, evolved)
    if abs(ov) < _UNDEFINED_PHASE:
        raise ValueError("overlap magnitude below 1e-12; phase undefined")
    return float(np.angle(ov))


@dataclasses.dataclass(frozen=True)
class PhaseMap:
    """Layer phases of two competing states along the schedule parameter
    r = gamma/(gamma+beta), with gamma = r*tau and beta = (1-r)*tau.

    `true_larger[i]` says whether the first ("true") state has the larger
    phase at r_grid[i], i.e. whether it is the dynamically preferred one.
    """

    r_grid: np.ndarray
    tau: float
    phase_true: np.ndarray
    phase_false: np.ndarray
    true_larger: np.ndarray

    def sign_changes(self) -> np.ndarray:
        """Grid locations where the phase preference flips: midpoints of
        intervals with a strict sign change, plus grid points where the two
        phases are exactly equal."""
        signs = np.sign(self.phase_true - self.phase_false)
        out = list(self.r_grid[signs == 0.0])
        nz = np.flatnonzero(signs)
        for j in np.flatnonzero(signs[nz[:-1]] * signs[nz[1:]] < 0):
            a, b = nz[j], nz[j + 1]
            if b == a + 1:
                out.append((self.r_grid[a] + self.r_grid[b]) / 2.0)
        return np.sort(np.asarray(out, dtype=float))


def phase_difference_map(
    Q: QuboMatrix,
    state_true: StateVector,
    state_false: StateVector,
    tau: float,
    r_grid: Sequence[float],
    energies: Optional[np.ndarray] = None,
) -> PhaseMap:
    """Evaluate both layer phases on a grid of r in (0, 1).

    The phase of each state is arg <psi|U(r*tau, (1-r)*tau)|psi>, defined
    whenever the overlap magnitude exceeds 1e-12.  For the competing states
    of an engineered problem (an energy eigenstate vs. a degenerate-manifold
    state with its free qubits in |+>) the overlap phase isolates exactly the
    accumulated phase-separator and mixer angles, even though qubits held in
    a basis state contribute cos factors to the overlap magnitude.
    """
    r_grid = np.asarray(r_grid, dtype=float)
    if np.any(r_grid <= 0.0) or np.any(r_grid >= 1.0):
        raise ValueError("r values must lie strictly inside (0, 1)")
    if energies is None:
        energies = energy_table(Q)
    phases = []
    for state, label in ((state_true, "true"), (state_false, "false")):
        row = np.empty(r_grid.size)
        for i, r in enumerate(r_grid):
            gamma, beta = r * tau, (1.0 - r) * tau
            evolved = apply_layer(state.copy(), Q, gamma, beta, np.ones(state.n), energies)
            ov = overlap(state, evolved)
            if abs(ov) < _UNDEFINED_PHASE:
                raise ValueError(
                    f"phase of state_{label} undefined at r={r:.6g} "
                    f"(|overlap| = {abs(ov):.3g})"
                )
            row[i] = np.angle(ov)
        phases.append(row)
    phase_true, phase_false = phases
    return PhaseMap(
        r_grid=r_grid,
        tau=float(tau),
        phase_true=phase_true,
        phase_false=phase_false,
        true_larger=phase_true > phase_false,
    )


def success_probability(
    source: Union[RunRecord, StateVector], truth: GroundTruth
) -> float:
    """Total probability on the optimal set."""
    return _manifold_prob(source, truth.optimal_states)


def false_min_probability(
    source: Union[RunRecord, StateVector], truth: GroundTruth
) -> float:
    """Total probability on the false-minimum set (0 when the set is empty)."""
    return _manifold_prob(source, truth.false_min_states)


def _manifold_prob(source, states: Iterable[Bitstring]) -> float:
    states = tuple(states)
    if not states:
        return 0.0
    if isinstance(source, StateVector):
        return manifold_probability(source, states)
    if source.final_probs is not None:
        return float(sum(source.final_probs[bits_to_index(s)] for s in states))
    raise ValueError("record has no full distribution; rerun with n <= 20")


def three_qubit_quantities(psi: StateVector) -> Dict[str, float]:
    """Quantities of the three-qubit experiment, with qubit 2 resolved in the
    X basis.

    Returns P(00+), P(00-), an upper bound on P(110) reachable from its two
    X-resolved components under maximal constructive interference,
    ``(sqrt(P(11+)) + sqrt(P(11-)))^2 / 2``, and the mean of the three.
    """
    if psi.n != 3:
        raise ValueError("three_qubit_quantities needs exactly 3 qubits")
    a = psi.amps
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    p00_plus = abs((a[0] + a[4]) * inv_sqrt2) ** 2
    p00_minus = abs((a[0] - a[4]) * inv_sqrt2) ** 2
    p11_plus = abs((a[3] + a[7]) * inv_sqrt2) ** 2
    p11_minus = abs((a[3] - a[7]) * inv_sqrt2) ** 2
    p110_upper = (np.sqrt(p11_plus) + np.sqrt(p11_minus)) ** 2 / 2.0
    return {
        "p00_plus": float(p00_plus),
        "p00_minus": float(p00_minus),
        "p110_upper": float(p110_upper),
        "mean": float((p00_plus + p00_minus + p110_upper) / 3.0),
    }


def three_qubit_sampled(
    psi: StateVector, shots: int, rng: np.random.Generator
) -> Tuple[Dict[str, float], Dict[str, float]]:
    """Shot-based estimate of `three_qubit_quantities` with standard errors.

    Measures qubits 0 and 1 in the computational basis and qubit 2 in the X
    basis (multinomial over the 8 joint outcomes); the upper bound and mean
    are plug-in estimates with first-order propagated errors.
    """
    if psi.n != 3:
        raise ValueError("three_qubit_sampled needs exactly 3 qubits")
    a = psi.amps
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    probs = np.empty(8)
    for z in range(4):
        lo, hi = a[z], a[z + 4]
        probs[z] = abs((lo + hi) * inv_sqrt2) ** 2
        probs[z + 4] = abs((lo - hi) * inv_sqrt2) ** 2
    probs /= probs.sum()
    counts = rng.multinomial(shots, probs)
    est = counts / shots
    se = np.sqrt(est * (1.0 - est) / shots)

    p00p, p00m = est[0], est[4]
    p11p, p11m = est[3], est[7]
    sqrt_sum = np.sqrt(p11p) + np.sqrt(p11m)
    p110_upper = sqrt_sum**2 / 2.0
    # d(upper)/dP(11s) = sqrt_sum / (2 sqrt(P(11s)))
    grads = [
        0.0 if p <= 0 else sqrt_sum / (2.0 * np.sqrt(p)) for p in (p11p, p11m)
    ]
    se_upper = np.hypot(grads[0] * se[3], grads[1] * se[7])
    se_mean = np.sqrt(se[0] ** 2 + se[4] ** 2 + se_upper**2) / 3.0
    values = {
        "p00_plus": float(p00p),
        "p00_minus": float(p00m),
        "p110_upper": float(p110_upper),
        "mean": float((p00p + p00m + p110_upper) / 3.0),
    }
    errors = {
        "p00_plus": float(se[0]),
        "p00_minus": float(se[4]),
        "p110_upper": float(se_upper),
        "mean": float(se_mean),
    }
    return values, errors


def cdf(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Empirical CDF: sorted values with fraction <= value (ties share the
    upper rank).  Non-decreasing and ending at 1.0."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValueError("need at least one value")
    frac = np.searchsorted(v, v, side="right") / v.size
    return v, frac


def standard_error(samples: Sequence[float]) -> float:
    """Standard error of the mean: std(ddof=1) / sqrt(N)."""
    s = np.asarray(samples, dtype=float)
    if s.size < 2:
        raise ValueError("need at least two samples")
    return float(s.std(ddof=1) / np.sqrt(s.size))


def hamming_phase_points(
    Q: QuboMatrix,
    states: Sequence[Bitstring],
    gamma: float,
    beta: float,
    energies: Optional[np.ndarray] = None,
) -> List[Tuple[int, float, int]]:
    """Generic export for phase-versus-weight plots over basis states.

    For each supplied basis state returns (Hamming weight, layer phase,
    number of supplied states one bit flip away).
    """
    from .statevector import basis_state

    if energies is None:
        energies = energy_table(Q)
    indices = [bits_to_index(s) for s in states]
    index_set = set(indices)
    out = []
    for s, z in zip(states, indices):
        weight = int(sum(s))
        phase = layer_phase(basis_state(s), Q, gamma, beta, energies)
        adjacency = sum(1 for j in range(Q.n) if (z ^ (1 << j)) in index_set)
        out.append((weight, phase, adjacency))
    return out
