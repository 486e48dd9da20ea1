import numpy as np
import pytest

from fsqaoa import (
    OptConfig,
    OptRun,
    QuboMatrix,
    aggregate_convergence,
    energy_objective,
    energy_table,
    evolve_plain,
    exhaustive_solve,
    final_histogram,
    load_qubo,
    optimize,
    optimize_many,
)

from conftest import FIXTURES


def test_objective_zero_qubo_is_zero():
    Q = QuboMatrix(np.zeros((3, 3)))
    assert energy_objective(Q, [0.3], [0.4], shots=None) == 0.0
    rng = np.random.default_rng(0)
    assert energy_objective(Q, [0.3], [0.4], shots=100, rng=rng) == 0.0


def test_exact_objective_equals_distribution_mean():
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    energies = energy_table(Q)
    gammas, betas = [0.6, 0.3], [0.5, 0.2]
    psi = evolve_plain(energies, Q.n, gammas, betas)
    probs = np.abs(psi.amps) ** 2
    expect = float(probs @ energies)
    assert energy_objective(Q, gammas, betas, shots=None) == pytest.approx(expect, abs=1e-12)


def test_empty_angles_give_uniform_average():
    # p=0 circuit stays uniform: objective = mean_z E(z)
    rng = np.random.default_rng(127)
    m = rng.uniform(-1, 1, size=(4, 4))
    Q = QuboMatrix((m + m.T) / 2.0)
    got = energy_objective(Q, [], [], shots=None)
    q = Q.q
    expect = np.sum(np.diag(q)) / 2.0 + (np.sum(q) - np.sum(np.diag(q))) / 4.0
    assert got == pytest.approx(expect, abs=1e-10)


def test_sampled_objective_converges_to_exact():
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    exact = energy_objective(Q, [0.7], [0.5], shots=None)
    rng = np.random.default_rng(131)
    est = energy_objective(Q, [0.7], [0.5], shots=100_000, rng=rng)
    energies = energy_table(Q)
    spread = float(np.max(energies) - np.min(energies))
    assert abs(est - exact) < 4 * spread / np.sqrt(100_000)


def test_sampled_objective_requires_rng():
    Q = QuboMatrix(np.zeros((2, 2)))
    with pytest.raises(ValueError):
        energy_objective(Q, [0.1], [0.1], shots=10)


def test_single_qubit_grid_optimum():
    # E(x) = -x: ground state |1> with energy -1.  A depth-1 exact-objective
    # optimization should land within 0.05 of the best grid value.
    Q = QuboMatrix(np.array([[-1.0]]))
    grid_best = np.inf
    taus = np.linspace(0.01, np.pi / 2, 60)
    for g in taus:
        for b in taus:
            grid_best = min(grid_best, energy_objective(Q, [g], [b], shots=None))
    config = OptConfig(p=1, max_iters=150, shots_per_iter=1, n_runs=1, seed=3)
    run = optimize(Q, config, rng=np.random.default_rng(3), shots=None)
    found = float(np.min(run.exact_objectives))
    assert found <= grid_best + 0.05


def test_optimize_deterministic_and_traced():
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    truth = exhaustive_solve(Q)
    config = OptConfig(p=2, max_iters=40, shots_per_iter=64, n_runs=1, seed=7)
    a = optimize(Q, config, truth=truth, rng=np.random.default_rng(7))
    b = optimize(Q, config, truth=truth, rng=np.random.default_rng(7))
    assert np.array_equal(a.objectives, b.objectives)
    assert np.array_equal(a.best_gammas, b.best_gammas)
    assert len(a.objectives) == 40
    assert a.best_so_far.size == 40
    assert np.all(np.diff(a.best_so_far) >= 0.0)
    # best angles correspond to the lowest exact objective seen
    k = int(np.argmin(a.exact_objectives))
    assert a.exact_objectives[k] == np.min(a.exact_objectives)
    got = energy_objective(Q, a.best_gammas, a.best_betas, shots=None)
    assert got == pytest.approx(a.exact_objectives[k], abs=1e-12)


def test_warm_start_initial_angles():
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    config = OptConfig(p=3, max_iters=2, shots_per_iter=8, n_runs=1,
                       init_policy="aqa_warm_start", seed=0)
    run = optimize(Q, config, rng=np.random.default_rng(0))
    from fsqaoa import tau_of_p

    tau = tau_of_p(3)
    r = np.arange(1, 4) / 4.0
    assert np.allclose(run.init_angles[:3], r * tau)
    assert np.allclose(run.init_angles[3:], (1 - r) * tau)


def test_optimize_many_distinct_seeds():
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    truth = exhaustive_solve(Q)
    config = OptConfig(p=1, max_iters=15, shots_per_iter=32, n_runs=3, seed=1)
    runs = optimize_many(Q, config, truth=truth)
    assert [r.seed for r in runs] == [0, 1, 2]
    assert not np.array_equal(runs[0].init_angles, runs[1].init_angles)


def test_aggregate_convergence_arithmetic():
    def mk(curve):
        c = np.asarray(curve, dtype=float)
        return OptRun(
            best_gammas=np.zeros(1), best_betas=np.zeros(1),
            objectives=np.zeros(c.size), exact_objectives=np.zeros(c.size),
            success_trace=c, best_so_far=c, converged=True, message="",
            seed=0, init_angles=np.zeros(2),
        )

    mean, se = aggregate_convergence([mk([0.0, 1.0]), mk([1.0, 1.0])])
    assert np.allclose(mean, [0.5, 1.0])
    # sample std (ddof=1) of {0,1} is sqrt(1/2); SE divides by sqrt(2)
    assert np.allclose(se, [0.5, 0.0])


def test_final_histogram_counts():
    def mk(v):
        return OptRun(
            best_gammas=np.zeros(1), best_betas=np.zeros(1),
            objectives=np.zeros(1), exact_objectives=np.zeros(1),
            success_trace=np.array([v]), best_so_far=np.array([v]),
            converged=True, message="", seed=0, init_angles=np.zeros(2),
        )

    counts, edges = final_histogram([mk(0.1), mk(0.2), mk(0.9)], bins=3)
    assert counts.sum() == 3
    assert edges[0] == 0.0
    assert edges[-1] == pytest.approx(0.9)


def test_run_disk_round_trip(tmp_path):
    Q = load_qubo(FIXTURES / "three_qubit.qubo")
    truth = exhaustive_solve(Q)
    config = OptConfig(p=1, max_iters=10, shots_per_iter=16, n_runs=1, seed=2)
    run = optimize(Q, config, truth=truth, rng=np.random.default_rng(2))
    path = tmp_path / "run.json"
    run.save(path)
    back = OptRun.load(path)
    assert np.array_equal(back.objectives, run.objectives)
    assert np.array_equal(back.best_so_far, run.best_so_far)
    assert back.converged == run.converged
