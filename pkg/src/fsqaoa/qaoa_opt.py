"""Variational optimization of the 2p layer angles against a shot-sampled
energy expectation, with best-so-far convergence aggregation.

The optimizer is COBYLA (derivative-free, linear-approximation trust region)
with early termination disabled (tolerance zero), so a run stops only at
`max_iters` objective evaluations.  Each evaluation simulates the zeta = 1
circuit once, samples `shots_per_iter` solutions for the noisy objective, and
also records the exact success probability of that iterate for analysis.
"""

from __future__ import annotations

import dataclasses
import json
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .protocols import evolve_plain, tau_of_p
from .qubo_core import GroundTruth, QuboMatrix, bits_to_index, energy_table

INIT_POLICIES = ("random_uniform", "aqa_warm_start")


@dataclasses.dataclass(frozen=True)
class OptConfig:
    """Settings for one optimization ensemble."""

    p: int
    max_iters: int = 300
    shots_per_iter: int = 1000
    n_runs: int = 100
    init_policy: str = "random_uniform"
    seed: int = 0

    def __post_init__(self):
        if self.p < 1 or self.max_iters < 1 or self.shots_per_iter < 1 or self.n_runs < 1:
            raise ValueError("p, max_iters, shots_per_iter and n_runs must be positive")
        if self.init_policy not in INIT_POLICIES:
            raise ValueError(f"init_policy must be one of {INIT_POLICIES}")


@dataclasses.dataclass
class OptRun:
    """Trace of a single optimization run.

    `objectives` holds the sampled objective per evaluation and
    `exact_objectives` the shot-free expectation at the same iterates;
    `best_gammas`/`best_betas` is the iterate with the lowest exact
    objective.  `best_so_far` is the running maximum of `success_trace`
    padded to `max_iters` entries, hence non-decreasing.
    """

    best_gammas: np.ndarray
    best_betas: np.ndarray
    objectives: np.ndarray
    exact_objectives: np.ndarray
    success_trace: Optional[np.ndarray]
    best_so_far: Optional[np.ndarray]
    converged: bool
    message: str
    seed: Optional[int]
    init_angles: np.ndarray

    def to_json_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "best_gammas": arr(self.best_gammas),
            "best_betas": arr(self.best_betas),
            "objectives": arr(self.objectives),
            "exact_objectives": arr(self.exact_objectives),
            "success_trace": arr(self.success_trace),
            "best_so_far": arr(self.best_so_far),
            "converged": self.converged,
            "message": self.message,
            "seed": self.seed,
            "init_angles": arr(self.init_angles),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "OptRun":
        def arr(x):
            return None if x is None else np.asarray(x, dtype=float)

        return cls(
            best_gammas=arr(d["best_gammas"]),
            best_betas=arr(d["best_betas"]),
            objectives=arr(d["objectives"]),
            exact_objectives=arr(d["exact_objectives"]),
            success_trace=arr(d["success_trace"]),
            best_so_far=arr(d["best_so_far"]),
            converged=d["converged"],
            message=d["message"],
            seed=d["seed"],
            init_angles=arr(d["init_angles"]),
        )

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "OptRun":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def energy_objective(
    Q: QuboMatrix,
    gammas: Sequence[float],
    betas: Sequence[float],
    shots: Optional[int],
    rng: Optional[np.random.Generator] = None,
    energies: Optional[np.ndarray] = None,
    layer_order: str = "prose",
) -> float:
    """Mean sampled energy of the zeta = 1 circuit with the given angles.

    With `shots=None` returns the exact expectation sum_z |amp_z|^2 E(z).
    Angle vectors may be empty, in which case the state stays uniform.
    """
    gammas = np.asarray(gammas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    if gammas.shape != betas.shape:
        raise ValueError("gammas and betas must have equal length")
    if energies is None:
        energies = energy_table(Q)
    psi = evolve_plain(energies, Q.n, gammas, betas, layer_order)
    probs = np.abs(psi.amps) ** 2
    probs /= probs.sum()
    if shots is None:
        return float(probs @ energies)
    if rng is None:
        raise ValueError("shot-sampled objective requires an rng")
    counts = rng.multinomial(shots, probs)
    return float(counts @ energies) / shots


def optimize(
    Q: QuboMatrix,
    config: OptConfig,
    truth: Optional[GroundTruth] = None,
    rng: Optional[np.random.Generator] = None,
    shots="from_config",
    layer_order: str = "prose",
) -> OptRun:
    """One derivative-free optimization of (gammas, betas) from a fresh start.

    Deterministic for a fixed rng state: the initial angles, every shot draw
    and COBYLA itself are all reproducible.  Pass `shots=None` for an exact
    (noiseless) objective.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    if shots == "from_config":
        shots = config.shots_per_iter
    energies = energy_table(Q)
    p = config.p
    tau = tau_of_p(p)
    if config.init_policy == "random_uniform":
        x0 = rng.uniform(0.0, tau, size=2 * p)
    else:
        r = np.arange(1, p + 1) / (p + 1)
        x0 = np.concatenate([r * tau, (1.0 - r) * tau])

    opt_idx = None
    if truth is not None:
        opt_idx = np.array([bits_to_index(s) for s in truth.optimal_states])

    objectives: List[float] = []
    exact_objectives: List[float] = []
    success_trace: List[float] = []
    iterates: List[np.ndarray] = []

    def fun(x: np.ndarray) -> float:
        psi = evolve_plain(energies, Q.n, x[:p], x[p:], layer_order)
        probs = np.abs(psi.amps) ** 2
        probs /= probs.sum()
        exact = float(probs @ energies)
        if shots is None:
            value = exact
        else:
            counts = rng.multinomial(shots, probs)
            value = float(counts @ energies) / shots
        objectives.append(value)
        exact_objectives.append(exact)
        if opt_idx is not None:
            success_trace.append(float(probs[opt_idx].sum()))
        iterates.append(x.copy())
        return value

    result = minimize(
        fun, x0, method="COBYLA", tol=0.0, options={"maxiter": config.max_iters}
    )

    best = int(np.argmin(exact_objectives))
    best_x = iterates[best]
    trace = best_curve = None
    if opt_idx is not None:
        trace = np.array(success_trace)
        best_curve = np.maximum.accumulate(trace)
        if best_curve.size < config.max_iters:
            pad = np.full(config.max_iters - best_curve.size, best_curve[-1])
            best_curve = np.concatenate([best_curve, pad])
        else:
            best_curve = best_curve[: config.max_iters]
    return OptRun(
        best_gammas=best_x[:p],
        best_betas=best_x[p:],
        objectives=np.array(objectives),
        exact_objectives=np.array(exact_objectives),
        success_trace=trace,
        best_so_far=best_curve,
        converged=bool(result.success),
        message=str(result.message),
        seed=None,
        init_angles=x0,
    )


def optimize_many(
    Q: QuboMatrix,
    config: OptConfig,
    truth: Optional[GroundTruth] = None,
    layer_order: str = "prose",
) -> List[OptRun]:
    """`config.n_runs` independent optimizations with spawned RNG streams."""
    runs = []
    for k, seq in enumerate(np.random.SeedSequence(config.seed).spawn(config.n_runs)):
        run = optimize(Q, config, truth=truth, rng=np.random.default_rng(seq),
                       layer_order=layer_order)
        run.seed = k
        runs.append(run)
    return runs


def aggregate_convergence(runs: Sequence[OptRun]) -> Tuple[np.ndarray, np.ndarray]:
    """Per-iteration mean and standard error of the best-so-far success
    probability across runs (SE = sample std with ddof=1 over sqrt(n))."""
    curves = [r.best_so_far for r in runs]
    if not curves or any(c is None for c in curves):
        raise ValueError("every run needs a best_so_far trace (optimize with truth)")
    stacked = np.vstack(curves)
    mean = stacked.mean(axis=0)
    if stacked.shape[0] > 1:
        se = stacked.std(axis=0, ddof=1) / np.sqrt(stacked.shape[0])
    else:
        se = np.zeros(stacked.shape[1])
    return mean, se


def final_histogram(runs: Sequence[OptRun], bins: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    """Histogram (counts, edges) of each run's final best-so-far success."""
    finals = np.array([r.best_so_far[-1] for r in runs])
    counts, edges = np.histogram(finals, bins=bins, range=(0.0, max(1e-9, finals.max())))
    return counts, edges
