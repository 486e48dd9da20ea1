"""Shared oracles for the test suite.

Everything here is built the slow, obvious way (explicit 2^n x 2^n matrices,
double loops) so the fast kernels in the package have something independent
to be checked against.
"""

import numpy as np

from fsqaoa import QuboMatrix, StateVector

I2 = np.eye(2, dtype=complex)
X2 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def naive_energy(q, bits):
    """x^T Q x by explicit double loop."""
    q = np.asarray(q, dtype=float)
    n = q.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += q[i, j] * bits[i] * bits[j]
    return total


def kron_chain(mats):
    """Tensor product with qubit 0 as the least significant index bit, so
    mats[j] acts on qubit j."""
    op = np.array([[1.0 + 0.0j]])
    for m in mats:
        op = np.kron(m, op)
    return op


def dense_x(n, j):
    return kron_chain([X2 if k == j else I2 for k in range(n)])


def dense_phase_matrix(Q, gamma):
    """diag(exp(-i gamma E(z))) built from the double-loop energy."""
    q = np.asarray(Q.q)
    n = q.shape[0]
    energies = np.array(
        [naive_energy(q, [(z >> k) & 1 for k in range(n)]) for z in range(1 << n)]
    )
    return np.diag(np.exp(-1j * gamma * energies))


def dense_mixer_matrix(n, beta, zeta):
    """prod_j exp(+i (beta zeta_j / 2) X_j) as an explicit matrix."""
    mats = []
    for j in range(n):
        t = 0.5 * beta * zeta[j]
        mats.append(np.cos(t) * I2 + 1j * np.sin(t) * X2)
    return kron_chain(mats)


def dense_layer_matrix(Q, gamma, beta, zeta, layer_order="prose"):
    """One layer as a matrix; prose order applies the phase separator first
    in time, i.e. U = U_mix . U_phase on column vectors."""
    P = dense_phase_matrix(Q, gamma)
    M = dense_mixer_matrix(Q.n, beta, zeta)
    return M @ P if layer_order == "prose" else P @ M


def mod_global_phase(amps, reference):
    """Rotate `amps` so its largest-|reference| component matches the phase
    of `reference` there; returns the rotated copy."""
    k = int(np.argmax(np.abs(reference)))
    if abs(reference[k]) < 1e-12 or abs(amps[k]) < 1e-12:
        raise ValueError("cannot fix global phase on a vanishing amplitude")
    rot = (reference[k] / abs(reference[k])) * (abs(amps[k]) / amps[k])
    return amps * rot


def random_state(n, rng):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    return StateVector(amps)


def random_symmetric_qubo(n, rng, scale=1.0):
    m = rng.uniform(-scale, scale, size=(n, n))
    return QuboMatrix((m + m.T) / 2.0)
