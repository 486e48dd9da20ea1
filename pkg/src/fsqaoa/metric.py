"""Fubini-Study metric elements of the per-qubit X-rotation control family.

For controls t_j entering through exp(i*t_j*X_j), the (real) metric is
``F_jk = <X_j X_k> - <X_j><X_k>``, so the diagonal is ``F_jj = 1 - <X_j>^2``.
F_jj measures how much state-space motion the j-th rotation produces: 0 on an
X eigenstate (the rotation only rephases it), 1 on a computational basis
state.  All entries are invariant under `apply_mixer`, which commutes with
every X observable.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from .statevector import StateVector, x_expectation, xx_expectation

_NEGATIVE_TOL = 1e-12


def _clamp(f: np.ndarray) -> np.ndarray:
    if np.any(f < -_NEGATIVE_TOL):
        raise RuntimeError(
            f"metric diagonal entry {f.min()} below -{_NEGATIVE_TOL}; "
            "the state is corrupted (norm drift?)"
        )
    return np.maximum(f, 0.0)


def fs_diagonal(psi: StateVector) -> np.ndarray:
    """Diagonal metric elements F_jj = 1 - <X_j>^2, exact, each in [0, 1]."""
    x = np.array([x_expectation(psi, j) for j in range(psi.n)])
    return _clamp(1.0 - x * x)


def fs_element(psi: StateVector, j: int, k: int) -> float:
    """Single metric element F_jk = <X_j X_k> - <X_j><X_k>."""
    if j == k:
        return float(fs_diagonal(psi)[j])
    return xx_expectation(psi, j, k) - x_expectation(psi, j) * x_expectation(psi, k)


def fs_matrix(psi: StateVector) -> np.ndarray:
    """Full n x n metric matrix (symmetric, positive semidefinite)."""
    n = psi.n
    x = np.array([x_expectation(psi, j) for j in range(n)])
    m = np.empty((n, n))
    for j in range(n):
        m[j, j] = 1.0 - x[j] * x[j]
        for k in range(j + 1, n):
            m[j, k] = m[k, j] = xx_expectation(psi, j, k) - x[j] * x[k]
    return m


def fs_diagonal_sampled(x_samples: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Estimate the metric diagonal from X-basis measurement outcomes.

    `x_samples` is a (shots, n) array of +-1 outcomes (see `sample_x_basis`).
    Returns the plug-in estimate ``1 - mean^2`` per qubit together with its
    propagated standard error ``2*|mean|*se(mean)``.
    """
    x_samples = np.asarray(x_samples)
    if x_samples.ndim != 2 or x_samples.shape[0] < 1:
        raise ValueError("need a non-empty (shots, n) array of +-1 outcomes")
    shots = x_samples.shape[0]
    mean = x_samples.mean(axis=0)
    f = 1.0 - mean * mean
    if shots > 1:
        se_mean = x_samples.std(axis=0, ddof=1) / np.sqrt(shots)
    else:
        se_mean = np.full(x_samples.shape[1], np.nan)
    return f, 2.0 * np.abs(mean) * se_mean
