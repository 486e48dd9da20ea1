"""Annealing-style schedules, layer application, and the three mixer
strategies (unmodified / suppressed / thresholded) with full tracing.

A protocol run starts from |+>^n and applies p layers in increasing l, so the
schedule is mixer-dominant first.  Layer l applies the phase separator with
gamma_l and then the mixer with beta_l (order "prose"; "literal" swaps the
two operators inside each layer).  After each layer the metric diagonal is
measured -- exactly, or from X-basis shots -- and the strategy's rule turns
the previous layer's diagonal into the next layer's per-qubit zeta row.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from . import __version__ as _ENGINE_VERSION
from .metric import fs_diagonal, fs_diagonal_sampled
from .qubo_core import (
    GroundTruth,
    QuboMatrix,
    bits_to_index,
    energy_table,
    format_bits,
    index_to_bits,
)
from .statevector import (
    StateVector,
    apply_mixer,
    apply_phase_separator,
    plus_state,
    sample_x_basis,
)

_DEGENERATE_F = 1e-12
_FULL_DIST_MAX_QUBITS = 20
_TOP_K = 64

LAYER_ORDERS = ("prose", "literal")


def tau_of_p(p: int) -> float:
    """Per-layer angle budget tau(p) = pi / (2 * p^0.25)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    return np.pi / (2.0 * p**0.25)


@dataclasses.dataclass(frozen=True)
class Schedule:
    """Per-layer (gamma_l, beta_l) pairs with gamma_l + beta_l = tau."""

    gammas: np.ndarray
    betas: np.ndarray
    tau: float

    def __post_init__(self):
        g = np.array(self.gammas, dtype=float)
        b = np.array(self.betas, dtype=float)
        if g.ndim != 1 or g.shape != b.shape or g.size < 1:
            raise ValueError("gammas and betas must be equal-length 1-d arrays")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if np.any(g <= 0) or np.any(b <= 0):
            raise ValueError("all angles must be strictly positive")
        if np.max(np.abs(g + b - self.tau)) > 1e-9:
            raise ValueError("gamma_l + beta_l must equal tau for every layer")
        if np.any(np.diff(g) <= 0) or np.any(np.diff(b) >= 0):
            raise ValueError("gammas must increase and betas decrease strictly")
        g.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "gammas", g)
        object.__setattr__(self, "betas", b)

    @property
    def p(self) -> int:
        return self.gammas.size


def linear_aqa_schedule(p: int, tau: float) -> Schedule:
    """gamma_l = r_l*tau, beta_l = (1-r_l)*tau with r_l = (l+1)/(p+1).

    r never reaches 0 or 1, so no layer is trivial.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if tau <= 0:
        raise ValueError("tau must be positive")
    r = np.arange(1, p + 1) / (p + 1)
    return Schedule(gammas=r * tau, betas=(1.0 - r) * tau, tau=float(tau))


@dataclasses.dataclass(frozen=True)
class MixerStrategy:
    """One of the three zeta-update strategies.

    unmodified  -- zeta = 1 on every qubit and layer.
    suppressed  -- zeta_j for layer l is the previous layer's F_jj divided by
                   its maximum over all qubits, measured on the modified run
                   itself; layer 0 uses zeta = 1.
    thresholded -- a full unmodified baseline pass is run first; the
                   suppressed rule is then applied only to qubits whose final
                   baseline F_jj fell below theta, zeta_j = 1 elsewhere.
    """

    kind: str
    theta: float = 0.2

    def __post_init__(self):
        if self.kind not in ("unmodified", "suppressed", "thresholded"):
            raise ValueError(f"unknown strategy {self.kind!r}")
        if not 0.0 < self.theta < 1.0:
            raise ValueError("theta must lie strictly inside (0, 1)")

    @classmethod
    def coerce(cls, value: Union["MixerStrategy", str]) -> "MixerStrategy":
        if isinstance(value, cls):
            return value
        return cls(kind=str(value))


@dataclasses.dataclass
class RunRecord:
    """Full trace of one protocol run.

    `zetas` row l is the zeta vector applied in layer l (row 0 all ones);
    `f_diagonals` row l is the metric diagonal measured after layer l.  For
    n <= 20 the full final probability distribution is kept (indexed by basis
    index); above that only the top-64 states.  For a thresholded run the
    internal baseline pass is retained in `baseline`.
    """

    strategy: str
    theta: Optional[float]
    n: int
    p: int
    tau: Optional[float]
    gammas: np.ndarray
    betas: np.ndarray
    layer_order: str
    metric_mode: str
    seed: Optional[int]
    zetas: np.ndarray
    f_diagonals: np.ndarray
    degenerate_f: bool
    final_probs: Optional[np.ndarray]
    top_states: Optional[list]
    success_prob: Optional[float]
    false_min_prob: Optional[float]
    problem_hash: str
    engine_version: str = _ENGINE_VERSION
    record_version: int = 1
    fixed_zeta: Optional[np.ndarray] = None
    baseline: Optional["RunRecord"] = None
    final_state: Optional[StateVector] = dataclasses.field(
        default=None, repr=False, compare=False
    )  # populated only with keep_state=True; never serialized

    def to_json_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "record_version": self.record_version,
            "engine_version": self.engine_version,
            "strategy": self.strategy,
            "theta": self.theta,
            "n": self.n,
            "p": self.p,
            "tau": self.tau,
            "gammas": arr(self.gammas),
            "betas": arr(self.betas),
            "layer_order": self.layer_order,
            "metric_mode": self.metric_mode,
            "seed": self.seed,
            "zetas": arr(self.zetas),
            "f_diagonals": arr(self.f_diagonals),
            "degenerate_f": self.degenerate_f,
            "final_probs": arr(self.final_probs),
            "top_states": self.top_states,
            "success_prob": self.success_prob,
            "false_min_prob": self.false_min_prob,
            "problem_hash": self.problem_hash,
            "fixed_zeta": arr(self.fixed_zeta),
            "baseline": None if self.baseline is None else self.baseline.to_json_dict(),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "RunRecord":
        def arr(x):
            return None if x is None else np.asarray(x, dtype=float)

        return cls(
            strategy=d["strategy"],
            theta=d["theta"],
            n=d["n"],
            p=d["p"],
            tau=d["tau"],
            gammas=arr(d["gammas"]),
            betas=arr(d["betas"]),
            layer_order=d["layer_order"],
            metric_mode=d["metric_mode"],
            seed=d["seed"],
            zetas=arr(d["zetas"]),
            f_diagonals=arr(d["f_diagonals"]),
            degenerate_f=d["degenerate_f"],
            final_probs=arr(d["final_probs"]),
            top_states=d["top_states"],
            success_prob=d["success_prob"],
            false_min_prob=d["false_min_prob"],
            problem_hash=d["problem_hash"],
            engine_version=d["engine_version"],
            record_version=d["record_version"],
            fixed_zeta=arr(d["fixed_zeta"]),
            baseline=None if d["baseline"] is None else cls.from_json_dict(d["baseline"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def traces_identical(a: RunRecord, b: RunRecord) -> bool:
    """Bit-for-bit equality of the numerical traces of two runs (zeta rows,
    metric rows, final distribution), ignoring strategy labels."""
    if a.final_probs is None or b.final_probs is None:
        same_dist = a.top_states == b.top_states
    else:
        same_dist = np.array_equal(a.final_probs, b.final_probs)
    return (
        np.array_equal(a.zetas, b.zetas)
        and np.array_equal(a.f_diagonals, b.f_diagonals)
        and same_dist
    )


def problem_hash(Q: QuboMatrix) -> str:
    h = hashlib.sha256()
    h.update(str(Q.n).encode())
    h.update(np.ascontiguousarray(Q.q).tobytes())
    return h.hexdigest()[:16]


def parse_metric_mode(mode: str) -> Tuple[str, Optional[int]]:
    """Parse "exact" or "sampled:<shots>" into (kind, shots)."""
    if mode == "exact":
        return "exact", None
    if mode.startswith("sampled:"):
        shots = int(mode.split(":", 1)[1])
        if shots < 1:
            raise ValueError("sampled metric mode needs shots >= 1")
        return "sampled", shots
    raise ValueError(f"metric mode must be 'exact' or 'sampled:<shots>', got {mode!r}")


def apply_layer(
    psi: StateVector,
    Q: QuboMatrix,
    gamma: float,
    beta: float,
    zeta: Sequence[float],
    energies: Optional[np.ndarray] = None,
    layer_order: str = "prose",
) -> StateVector:
    """One protocol layer.  "prose" applies the phase separator first, then
    the mixer; "literal" swaps them.  Mutates and returns `psi`."""
    if layer_order not in LAYER_ORDERS:
        raise ValueError(f"layer order must be one of {LAYER_ORDERS}, got {layer_order!r}")
    if layer_order == "prose":
        apply_phase_separator(psi, Q, gamma, energies)
        apply_mixer(psi, beta, zeta)
    else:
        apply_mixer(psi, beta, zeta)
        apply_phase_separator(psi, Q, gamma, energies)
    return psi


def evolve_plain(
    energies: np.ndarray,
    n: int,
    gammas: Sequence[float],
    betas: Sequence[float],
    layer_order: str = "prose",
) -> StateVector:
    """Final state of a zeta = 1 angle sequence from |+>^n, without tracing.
    This is the hot path for the variational optimizer."""
    psi = plus_state(n)
    ones = np.ones(n)
    for g, b in zip(gammas, betas):
        if layer_order == "prose":
            psi.amps *= np.exp(-1j * g * energies)
            apply_mixer(psi, b, ones)
        else:
            apply_mixer(psi, b, ones)
            psi.amps *= np.exp(-1j * g * energies)
    return psi


ZetaRule = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, bool]]


def _ones_rule(n: int) -> ZetaRule:
    def rule(f_prev, zeta_prev):
        return np.ones(n), False

    return rule


def _suppressed_rule(n: int, mask: np.ndarray) -> ZetaRule:
    """Normalize the previous layer's diagonal by its maximum over all
    qubits, applied on `mask` only.  If every entry is ~0 the previous zeta
    row is kept (no information, no change) and the run is flagged."""

    def rule(f_prev, zeta_prev):
        m = float(f_prev.max())
        if m < _DEGENERATE_F:
            return zeta_prev.copy(), True
        out = np.ones(n)
        out[mask] = f_prev[mask] / m
        return out, False

    return rule


def _forward(
    energies: np.ndarray,
    n: int,
    schedule: Schedule,
    rule: ZetaRule,
    layer_order: str,
    metric_kind: str,
    metric_shots: Optional[int],
    rng: Optional[np.random.Generator],
    zeta0: Optional[np.ndarray] = None,
) -> Tuple[StateVector, np.ndarray, np.ndarray, bool]:
    psi = plus_state(n)
    zeta = np.ones(n) if zeta0 is None else np.asarray(zeta0, dtype=float).copy()
    zrows, frows = [], []
    degenerate = False
    for l in range(schedule.p):
        if l > 0:
            zeta, flagged = rule(frows[-1], zeta)
            degenerate = degenerate or flagged
        if layer_order == "prose":
            psi.amps *= np.exp(-1j * schedule.gammas[l] * energies)
            apply_mixer(psi, schedule.betas[l], zeta)
        else:
            apply_mixer(psi, schedule.betas[l], zeta)
            psi.amps *= np.exp(-1j * schedule.gammas[l] * energies)
        zrows.append(zeta.copy())
        if metric_kind == "exact":
            frows.append(fs_diagonal(psi))
        else:
            frows.append(fs_diagonal_sampled(sample_x_basis(psi, metric_shots, rng))[0])
    return psi, np.array(zrows), np.array(frows), degenerate


def _finalize_record(
    psi: StateVector,
    Q: QuboMatrix,
    schedule: Schedule,
    strategy_label: str,
    theta: Optional[float],
    zetas: np.ndarray,
    frows: np.ndarray,
    degenerate: bool,
    layer_order: str,
    metric_mode: str,
    seed: Optional[int],
    truth: Optional[GroundTruth],
    fixed_zeta: Optional[np.ndarray] = None,
    baseline: Optional[RunRecord] = None,
) -> RunRecord:
    probs = np.abs(psi.amps) ** 2
    n = Q.n
    if n <= _FULL_DIST_MAX_QUBITS:
        final_probs, top_states = probs, None
    else:
        order = np.argsort(probs)[::-1][:_TOP_K]
        final_probs = None
        top_states = [[format_bits(index_to_bits(int(z), n)), float(probs[z])] for z in order]
    success = false_min = None
    if truth is not None:
        success = float(sum(probs[bits_to_index(s)] for s in truth.optimal_states))
        false_min = float(sum(probs[bits_to_index(s)] for s in truth.false_min_states))
    return RunRecord(
        strategy=strategy_label,
        theta=theta,
        n=n,
        p=schedule.p,
        tau=schedule.tau,
        gammas=np.array(schedule.gammas),
        betas=np.array(schedule.betas),
        layer_order=layer_order,
        metric_mode=metric_mode,
        seed=seed,
        zetas=zetas,
        f_diagonals=frows,
        degenerate_f=degenerate,
        final_probs=final_probs,
        top_states=top_states,
        success_prob=success,
        false_min_prob=false_min,
        problem_hash=problem_hash(Q),
        fixed_zeta=None if fixed_zeta is None else np.asarray(fixed_zeta, dtype=float),
        baseline=baseline,
    )


def run_protocol(
    Q: QuboMatrix,
    schedule: Schedule,
    strategy: Union[MixerStrategy, str],
    metric_mode: str = "exact",
    rng: Optional[np.random.Generator] = None,
    truth: Optional[GroundTruth] = None,
    layer_order: str = "prose",
    seed: Optional[int] = None,
    keep_state: bool = False,
) -> RunRecord:
    """Run one full protocol and return its RunRecord.

    The thresholded strategy first executes a complete unmodified baseline
    pass (recorded in the result's `baseline` field); qubits whose final
    baseline F_jj fell below theta are then suppressed on a second pass.  In
    sampled metric mode both passes draw from the same `rng` stream, baseline
    first, so a fixed seed fully determines the run.  With `keep_state` the
    final StateVector is attached to the record (in memory only).
    """
    strategy = MixerStrategy.coerce(strategy)
    if layer_order not in LAYER_ORDERS:
        raise ValueError(f"layer order must be one of {LAYER_ORDERS}, got {layer_order!r}")
    metric_kind, metric_shots = parse_metric_mode(metric_mode)
    if metric_kind == "sampled" and rng is None:
        raise ValueError("sampled metric mode requires an rng")
    energies = energy_table(Q)
    n = Q.n

    baseline_record = None
    if strategy.kind == "unmodified":
        rule = _ones_rule(n)
    elif strategy.kind == "suppressed":
        rule = _suppressed_rule(n, np.ones(n, dtype=bool))
    else:
        psi_b, z_b, f_b, d_b = _forward(
            energies, n, schedule, _ones_rule(n), layer_order, metric_kind, metric_shots, rng
        )
        baseline_record = _finalize_record(
            psi_b, Q, schedule, "unmodified", None, z_b, f_b, d_b,
            layer_order, metric_mode, seed, truth,
        )
        rule = _suppressed_rule(n, f_b[-1] < strategy.theta)

    psi, zetas, frows, degenerate = _forward(
        energies, n, schedule, rule, layer_order, metric_kind, metric_shots, rng
    )
    theta = strategy.theta if strategy.kind == "thresholded" else None
    record = _finalize_record(
        psi, Q, schedule, strategy.kind, theta, zetas, frows, degenerate,
        layer_order, metric_mode, seed, truth, baseline=baseline_record,
    )
    if keep_state:
        record.final_state = psi
    return record


def run_fixed_zeta(
    Q: QuboMatrix,
    schedule: Schedule,
    zeta_fixed: Sequence[float],
    metric_mode: str = "exact",
    rng: Optional[np.random.Generator] = None,
    truth: Optional[GroundTruth] = None,
    layer_order: str = "prose",
    seed: Optional[int] = None,
    keep_state: bool = False,
) -> RunRecord:
    """Run the protocol with one user-supplied zeta vector on every layer.
    `zeta_fixed` of all ones reproduces the unmodified strategy."""
    zeta_fixed = np.asarray(zeta_fixed, dtype=float)
    if zeta_fixed.shape != (Q.n,):
        raise ValueError(f"zeta length {zeta_fixed.shape} != problem size {Q.n}")
    metric_kind, metric_shots = parse_metric_mode(metric_mode)
    if metric_kind == "sampled" and rng is None:
        raise ValueError("sampled metric mode requires an rng")
    energies = energy_table(Q)

    def rule(f_prev, zeta_prev):
        return zeta_fixed.copy(), False

    psi, zetas, frows, degenerate = _forward(
        energies, Q.n, schedule, rule, layer_order, metric_kind, metric_shots, rng,
        zeta0=zeta_fixed,
    )
    record = _finalize_record(
        psi, Q, schedule, "fixed_zeta", None, zetas, frows, degenerate,
        layer_order, metric_mode, seed, truth, fixed_zeta=zeta_fixed,
    )
    if keep_state:
        record.final_state = psi
    return record
