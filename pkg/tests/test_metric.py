import numpy as np
import pytest

from fsqaoa import (
    StateVector,
    apply_mixer,
    basis_state,
    fs_diagonal,
    fs_diagonal_sampled,
    fs_element,
    fs_matrix,
    plus_state,
    product_state,
    sample_x_basis,
    x_expectation,
    xx_expectation,
)
from helpers import random_state


def test_diagonal_range_and_special_states():
    rng = np.random.default_rng(73)
    for _ in range(30):
        psi = random_state(int(rng.integers(1, 7)), rng)
        f = fs_diagonal(psi)
        assert np.all(f >= 0.0) and np.all(f <= 1.0)
    assert np.max(np.abs(fs_diagonal(plus_state(5)))) < 1e-14
    assert np.max(np.abs(fs_diagonal(basis_state((0, 1, 0))) - 1.0)) < 1e-14
    assert np.max(np.abs(fs_diagonal(product_state("-+-")))) < 1e-14


def test_diagonal_equals_definition():
    rng = np.random.default_rng(79)
    psi = random_state(5, rng)
    f = fs_diagonal(psi)
    for j in range(5):
        assert f[j] == pytest.approx(1.0 - x_expectation(psi, j) ** 2, abs=1e-12)


def test_epsilon_state_closed_form():
    # Nearly-free qubit: the rest of the register in |psi_0> with the qubit
    # in |+>, plus an orthogonal eps admixture |psi_1>|1>.  Orthogonality of
    # psi_0 and psi_1 kills every cross term in <X>, so both natural
    # normalizations have sharp closed forms:
    #   sqrt(1-eps^2), eps coefficients:  <X> = 1 - eps^2,
    #                                     F = 1-(1-eps^2)^2 = eps^2(2-eps^2)
    #   1, eps then renormalize:          <X> = 1/(1+eps^2),
    #                                     F = 1 - (1+eps^2)^(-2)
    # and both scale as 2 eps^2 for small eps.
    rng = np.random.default_rng(83)
    n_rest = 3
    plus = np.array([1.0, 1.0]) / np.sqrt(2.0)
    one = np.array([0.0, 1.0])
    for eps in (0.1, 0.3, 0.7):
        a = rng.normal(size=1 << n_rest) + 1j * rng.normal(size=1 << n_rest)
        a /= np.linalg.norm(a)
        b = rng.normal(size=1 << n_rest) + 1j * rng.normal(size=1 << n_rest)
        b -= (a.conj() @ b) * a
        b /= np.linalg.norm(b)
        base = np.concatenate([a * plus[0], a * plus[1]]).astype(complex)
        mix = np.concatenate([b * one[0], b * one[1]]).astype(complex)

        psi = StateVector(np.sqrt(1.0 - eps**2) * base + eps * mix)
        assert x_expectation(psi, n_rest) == pytest.approx(1.0 - eps**2, abs=1e-12)
        f_last = fs_diagonal(psi)[n_rest]
        assert f_last == pytest.approx(eps**2 * (2.0 - eps**2), abs=1e-12)

        amps = base + eps * mix
        psi = StateVector(amps / np.linalg.norm(amps))
        assert x_expectation(psi, n_rest) == pytest.approx(1.0 / (1.0 + eps**2), abs=1e-12)
        f_last = fs_diagonal(psi)[n_rest]
        assert f_last == pytest.approx(1.0 - (1.0 + eps**2) ** -2, abs=1e-12)
        if eps <= 0.1:
            assert f_last == pytest.approx(2 * eps**2, rel=0.05)


def test_element_matches_covariance():
    rng = np.random.default_rng(89)
    psi = random_state(4, rng)
    for j in range(4):
        for k in range(4):
            if j == k:
                continue
            expect = xx_expectation(psi, j, k) - x_expectation(psi, j) * x_expectation(psi, k)
            assert fs_element(psi, j, k) == pytest.approx(expect, abs=1e-12)


def test_element_on_bell_and_product_states():
    bell = StateVector(np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))
    assert fs_element(bell, 0, 1) == pytest.approx(1.0, abs=1e-12)
    prod = product_state("++")
    assert fs_element(prod, 0, 1) == pytest.approx(0.0, abs=1e-12)


def test_matrix_symmetric_and_psd():
    rng = np.random.default_rng(97)
    for _ in range(10):
        psi = random_state(4, rng)
        F = fs_matrix(psi)
        assert np.max(np.abs(F - F.T)) < 1e-12
        assert np.min(np.linalg.eigvalsh(F)) > -1e-10
        assert np.max(np.abs(np.diag(F) - fs_diagonal(psi))) < 1e-12


def test_diagonal_invariant_under_mixer():
    rng = np.random.default_rng(101)
    psi = random_state(6, rng)
    before = fs_diagonal(psi)
    for _ in range(5):
        apply_mixer(psi, rng.uniform(-2, 2), rng.uniform(0, 1, size=6))
    assert np.max(np.abs(fs_diagonal(psi) - before)) < 1e-12


def test_sampled_diagonal_matches_exact():
    rng = np.random.default_rng(103)
    psi = random_state(4, rng)
    shots = 100_000
    samples = sample_x_basis(psi, shots, rng)
    est, se = fs_diagonal_sampled(samples)
    exact = fs_diagonal(psi)
    for j in range(4):
        assert abs(est[j] - exact[j]) < 4 * se[j] + 1e-9
        assert se[j] < 0.05


def test_sampled_diagonal_rejects_empty():
    with pytest.raises(ValueError):
        fs_diagonal_sampled(np.empty((0, 3)))
