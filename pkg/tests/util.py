"""Shared random-instance generators for the test suite.

All randomness flows through explicitly seeded numpy Generators so every
test is reproducible.
"""

import numpy as np

from qprob import DensityOperator, Observable, QuantumChannel


def rand_unitary(rng, d):
    Z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def rand_hermitian(rng, d, scale=1.0):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (A + A.conj().T)


def rand_observable(rng, d, scale=1.0):
    return Observable(rand_hermitian(rng, d, scale))


def rand_density(rng, d, pure=False):
    if pure:
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v = v / np.linalg.norm(v)
        return DensityOperator(np.outer(v, v.conj()))
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M = A @ A.conj().T
    return DensityOperator(M / np.trace(M).real)


def rand_kraus_channel(rng, d, n_ops=3):
    """Random CPTP map from a Haar-ish isometry sliced into Kraus blocks."""
    Z = rng.normal(size=(n_ops * d, d)) + 1j * rng.normal(size=(n_ops * d, d))
    Q, _ = np.linalg.qr(Z)
    return QuantumChannel.from_kraus([Q[i * d:(i + 1) * d, :] for i in range(n_ops)])


def rand_channel(rng, d):
    if rng.random() < 0.5:
        return QuantumChannel.unitary(rand_unitary(rng, d))
    return rand_kraus_channel(rng, d)
