import numpy as np
import pytest

from qprob import (
    DensityOperator,
    Observable,
    QuantumChannel,
    apply_channel,
    coherence_part,
    dephase,
    gibbs_state,
    pure_state,
)
from qprob.errors import NotPositiveSemidefinite
from qprob.operators import PAULI_X, PAULI_Z
from util import rand_density, rand_kraus_channel, rand_unitary


def test_density_validation():
    rho = DensityOperator(np.eye(2) / 2)
    assert rho.dim == 2
    with pytest.raises(NotPositiveSemidefinite):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.6, 0.6]))


def test_density_clips_tiny_negatives():
    rho = DensityOperator(np.diag([1.0 + 5e-11, -5e-11]))
    vals = np.linalg.eigvalsh(rho.matrix)
    assert vals.min() >= 0
    assert abs(np.trace(rho.matrix).real - 1.0) < 1e-14


def test_unchecked_keeps_hermiticity_and_trace():
    M = np.diag([1.3, -0.3])
    rho = DensityOperator.unchecked(M)
    assert np.allclose(rho.matrix, M)
    with pytest.raises(ValueError):
        DensityOperator.unchecked(np.diag([1.0, 1.0]))


def test_pure_state_normalizes():
    rho = pure_state([3.0, 4.0])
    assert abs(np.trace(rho.matrix).real - 1.0) < 1e-14
    assert abs(np.trace(rho.matrix @ rho.matrix).real - 1.0) < 1e-12


def test_gibbs_state_stability_large_beta():
    H = Observable(np.diag([0.0, 50.0, 100.0]))
    rho = gibbs_state(H, 1000.0)
    np.testing.assert_allclose(np.diag(rho.matrix).real, [1.0, 0.0, 0.0],
                               atol=1e-300)


def test_gibbs_infinite_temperature():
    H = Observable(PAULI_Z)
    rho = gibbs_state(H, 0.0)
    np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-14)


def test_channel_unitary_and_kraus_trace_preserving():
    rng = np.random.default_rng(3)
    for _ in range(20):
        d = int(rng.integers(2, 6))
        ch = rand_kraus_channel(rng, d)
        rho = rand_density(rng, d)
        out = apply_channel(ch, rho)
        assert abs(np.trace(out.matrix).real - 1.0) < 1e-10
        # Heisenberg adjoint is unital
        assert np.linalg.norm(ch.adjoint(np.eye(d)) - np.eye(d)) < 1e-9


def test_channel_rejects_bad_inputs():
    with pytest.raises(ValueError):
        QuantumChannel.unitary(np.array([[1.0, 0.0], [0.0, 2.0]]))
    with pytest.raises(ValueError):
        QuantumChannel.from_kraus([np.eye(2) * 0.5])


def test_dephase_plus_coherence_recovers_state():
    rng = np.random.default_rng(5)
    for _ in range(20):
        rho = rand_density(rng, 4)
        from util import rand_observable
        O = rand_observable(rng, 4)
        chi = coherence_part(rho, O)
        recon = dephase(rho, O).matrix + chi
        assert np.linalg.norm(recon - rho.matrix) < 1e-12
        assert abs(np.trace(chi)) < 1e-12
        # dephasing is idempotent
        twice = dephase(dephase(rho, O), O)
        assert np.linalg.norm(twice.matrix - dephase(rho, O).matrix) < 1e-12


def test_dephase_in_diagonal_basis_kills_offdiagonals():
    rho = DensityOperator(np.array([[0.5, 0.3], [0.3, 0.5]]))
    out = dephase(rho, Observable(PAULI_Z))
    np.testing.assert_allclose(out.matrix, np.eye(2) / 2, atol=1e-14)
