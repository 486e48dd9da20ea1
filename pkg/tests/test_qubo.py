import numpy as np
import pytest

from fsqaoa import (
    GadgetParams,
    QuboMatrix,
    QuboParseError,
    attach_false_minima,
    bits_to_index,
    energy,
    energy_table,
    exhaustive_solve,
    false_minimum_manifold,
    format_bits,
    gadget_ground_truth,
    generate_gadget_problem,
    index_to_bits,
    load_qubo,
    parse_bits,
    random_qubo,
    save_qubo,
)
from helpers import naive_energy

from conftest import FIXTURES


def test_bit_round_trips():
    assert bits_to_index((1, 1, 0)) == 3
    assert bits_to_index((0, 0, 1)) == 4
    assert parse_bits("110") == (1, 1, 0)
    assert format_bits((0, 0, 1)) == "001"
    rng = np.random.default_rng(7)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        z = int(rng.integers(0, 1 << n))
        assert bits_to_index(index_to_bits(z, n)) == z


def test_qubo_matrix_validation():
    QuboMatrix(np.zeros((1, 1)))
    with pytest.raises(ValueError):
        QuboMatrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(ValueError):
        QuboMatrix(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        QuboMatrix(np.zeros((2, 3)))
    Q = QuboMatrix(np.eye(2))
    with pytest.raises(ValueError):
        Q.q[0, 0] = 5.0


def test_energy_against_double_loop():
    rng = np.random.default_rng(11)
    for _ in range(30):
        n = int(rng.integers(1, 7))
        m = rng.uniform(-2, 2, size=(n, n))
        Q = QuboMatrix((m + m.T) / 2.0)
        bits = tuple(int(b) for b in rng.integers(0, 2, size=n))
        assert energy(Q, bits) == pytest.approx(naive_energy(Q.q, bits), abs=1e-12)


def test_energy_table_methods_agree():
    rng = np.random.default_rng(13)
    for n in (1, 2, 5, 8):
        m = rng.uniform(-1, 1, size=(n, n))
        Q = QuboMatrix((m + m.T) / 2.0)
        ref = energy_table(Q, method="naive")
        for method in ("doubling", "gray"):
            assert np.max(np.abs(energy_table(Q, method=method) - ref)) < 1e-12
        z = int(rng.integers(0, 1 << n))
        assert ref[z] == pytest.approx(naive_energy(Q.q, index_to_bits(z, n)), abs=1e-10)


def test_exhaustive_solve_orders_ties_by_index():
    Q = QuboMatrix(np.zeros((2, 2)))
    truth = exhaustive_solve(Q)
    assert truth.min_energy == 0.0
    assert truth.optimal_states == ((0, 0), (1, 0), (0, 1), (1, 1))


def test_three_qubit_fixture_ground_truth():
    truth = exhaustive_solve(load_qubo(FIXTURES / "three_qubit.qubo"))
    assert truth.min_energy == pytest.approx(0.0, abs=1e-12)
    assert set(truth.optimal_states) == {(0, 0, 0), (1, 1, 0), (0, 0, 1)}


def test_random16_fixture_ground_truth():
    truth = exhaustive_solve(load_qubo(FIXTURES / "random16.qubo"))
    assert len(truth.optimal_states) == 1
    assert bits_to_index(truth.optimal_states[0]) == 27507
    assert truth.min_energy == pytest.approx(-20.806578, abs=1e-9)


def test_gadget14_fixture_ground_truth():
    truth = exhaustive_solve(load_qubo(FIXTURES / "gadget14.qubo"))
    assert truth.optimal_states == (parse_bits("00110100000000"),)


def test_generator_structure():
    params = GadgetParams(n_cut=4, n_gadget=3, j_gadget=0.25, j_couple=0.5, bias=1.5, seed=0)
    rng = np.random.default_rng(0)
    inst = generate_gadget_problem(params, rng)
    q = inst.matrix.q
    n_cut, n_gadget = params.n_cut, params.n_gadget
    assert inst.matrix.n == n_cut + 2 * n_gadget
    for i in range(n_gadget):
        g = n_cut + i
        p = n_cut + n_gadget + i
        # partner coupling: -1 off diagonal, +2 on the partner diagonal only
        assert q[g, p] == -1.0
        assert q[p, p] == 2.0
        # partner rows couple only to their own gadget qubit
        row = np.delete(q[p], [g, p])
        assert np.all(row == 0.0)
        for j in range(i + 1, n_gadget):
            assert q[g, n_cut + j] == -params.j_gadget


def test_generator_false_manifold_gap_equals_bias():
    rng = np.random.default_rng(3)
    for seed_draw in range(5):
        params = GadgetParams(n_cut=3, n_gadget=2, j_gadget=0.25, j_couple=0.5,
                              bias=1.5, seed=seed_draw)
        inst = generate_gadget_problem(params, rng)
        truth = gadget_ground_truth(inst)
        assert truth.false_min_energy is not None
        assert truth.false_min_energy - truth.min_energy == pytest.approx(1.5, abs=1e-9)
        assert len(truth.false_min_states) == 1 << params.n_gadget


def test_generator_optimum_is_sol_with_gadgets_clear():
    rng = np.random.default_rng(5)
    params = GadgetParams(n_cut=4, n_gadget=2, j_gadget=0.25, j_couple=0.5, bias=1.5, seed=9)
    for _ in range(5):
        inst = generate_gadget_problem(params, rng)
        truth = exhaustive_solve(inst.matrix)
        expected = inst.sol + (0,) * (2 * params.n_gadget)
        # diagonal bias breaks cut-block ties, so the full optimum is unique
        assert truth.optimal_states == (expected,)
        # the cut block itself is a pure cut function, so the complement of
        # sol always ties it and the flag is always set
        assert inst.cut_ties


def test_generator_deterministic():
    params = GadgetParams(n_cut=4, n_gadget=3, j_gadget=0.25, j_couple=0.5, bias=1.5, seed=0)
    a = generate_gadget_problem(params, np.random.default_rng(42))
    b = generate_gadget_problem(params, np.random.default_rng(42))
    assert np.array_equal(a.matrix.q, b.matrix.q)
    assert a.sol == b.sol


def test_false_minimum_manifold_shape():
    states = false_minimum_manifold((0, 1), 2, 2)
    # cut bits flipped, gadget qubits set, partner qubits free
    assert set(states) == {
        (1, 0, 1, 1, 0, 0), (1, 0, 1, 1, 1, 0), (1, 0, 1, 1, 0, 1), (1, 0, 1, 1, 1, 1),
    }


def test_attach_false_minima_rejects_split_levels():
    Q = QuboMatrix(np.diag([1.0, 2.0]))
    truth = exhaustive_solve(Q)
    with pytest.raises(ValueError):
        attach_false_minima(truth, Q, ((1, 0), (0, 1)))


def test_random_qubo_deterministic_and_symmetric():
    a = random_qubo(6, np.random.default_rng(123))
    b = random_qubo(6, np.random.default_rng(123))
    assert np.array_equal(a.q, b.q)
    assert np.all(np.abs(a.q) <= 1.0)
    assert np.array_equal(a.q, a.q.T)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(17)
    for n in (1, 3, 7):
        m = rng.uniform(-3, 3, size=(n, n))
        Q = QuboMatrix((m + m.T) / 2.0)
        path = tmp_path / f"q{n}.qubo"
        save_qubo(Q, path)
        back = load_qubo(path)
        assert np.max(np.abs(back.q - Q.q)) == 0.0


def test_load_rejects_malformed(tmp_path):
    cases = {
        "empty.qubo": "",
        "noheader.qubo": "0 0 1.0\n",
        "badnum.qubo": "n 2\n0 0 x\n",
        "dup.qubo": "n 2\n0 0 1.0\n0 0 2.0\n",
        "asym.qubo": "n 2\n0 1 1.0\n1 0 2.0\n",
        "range.qubo": "n 2\n0 5 1.0\n",
        "shortline.qubo": "n 2\n0 0\n",
        "inf.qubo": "n 1\n0 0 inf\n",
    }
    for name, text in cases.items():
        path = tmp_path / name
        path.write_text(text)
        with pytest.raises(QuboParseError):
            load_qubo(path)


def test_load_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.qubo"
    path.write_text("n 2\n0 0 1.0\n1 1 oops\n")
    with pytest.raises(QuboParseError, match="line 3"):
        load_qubo(path)
    # comments and duplicate symmetric entries within tolerance are fine
    ok = tmp_path / "ok.qubo"
    ok.write_text("# comment\nn 2\n0 1 0.25  # edge\n1 0 0.25\n")
    assert load_qubo(ok).q[1, 0] == 0.25
