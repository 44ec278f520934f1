"""Measurement-scheme simulations.

Three routes to the quasiprobability content of a two-time statistics:

  * the weak-TPM route, where a non-selective first measurement replaces the
    selective one and the Margenau-Hill table is recovered by an affine
    combination of ordinary probabilities;
  * the interferometric route, where an auxiliary qubit picks up the
    characteristic function as a Ramsey phase;
  * the detector-assisted route, where a momentum-superposed pointer reads
    out a modified characteristic function and a position density built from
    the non-demolition table.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    CONDITION_LIMIT,
    GRID_MASS_TOL,
    PROJECTOR_TOL,
    DimensionMismatch,
    GridTooNarrow,
    IllConditionedGrid,
    NotAProjector,
)
from .operators import PAULI_X, PAULI_Y, PAULI_Z, as_matrix, check_hermitian
from .quasiprob import AtomDistribution, ndqp
from .states import DensityOperator, Observable, QuantumChannel

__all__ = [
    "RamseyReadout",
    "DetectorSpec",
    "PositionDistribution",
    "ReconstructionResult",
    "wtpm_probability",
    "mhq_from_wtpm",
    "ramsey_simulate",
    "default_u_grid",
    "reconstruct_distribution",
    "detector_phase",
    "ndqp_distribution",
    "detector_position",
]

_HADAMARD = (PAULI_X + PAULI_Z) / np.sqrt(2.0)
_P0 = np.array([[1.0, 0.0], [0.0, 0.0]], dtype=complex)
_P1 = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)


@dataclass(frozen=True)
class RamseyReadout:
    """Auxiliary-qubit Pauli expectations per phase value u."""

    samples: tuple              # tuple of (u, sx, sy)

    def __post_init__(self):
        for u, sx, sy in self.samples:
            if abs(sx) > 1 + 1e-10 or abs(sy) > 1 + 1e-10:
                raise ValueError("auxiliary expectation outside [-1, 1]")

    @property
    def us(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def values(self) -> np.ndarray:
        """Complex readout sx + i*sy per sample."""
        return np.array([s[1] + 1j * s[2] for s in self.samples])


@dataclass(frozen=True)
class DetectorSpec:
    """Pointer parameters: coupling kappa, momentum separation p0, position
    width sigma, and the readout grid (x_min, x_max, n_points)."""

    kappa: float
    p0: float
    sigma: float
    grid: tuple = (-6.0, 6.0, 1201)

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.grid[2] < 2:
            raise ValueError("grid needs at least two points")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.grid[0], self.grid[1], int(self.grid[2]))


@dataclass(frozen=True)
class PositionDistribution:
    xs: np.ndarray
    density: np.ndarray
    incoherent: np.ndarray
    coherent: np.ndarray

    def __post_init__(self):
        if np.min(self.density) < -1e-12:
            raise ValueError("negative position density")

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.xs))


@dataclass(frozen=True)
class ReconstructionResult:
    distribution: AtomDistribution
    residual: float
    condition_number: float


def _check_projector(P, dim=None) -> np.ndarray:
    M = check_hermitian(P)
    if dim is not None and M.shape[0] != dim:
        raise DimensionMismatch("projector dimension mismatch")
    if np.linalg.norm(M @ M - M) > PROJECTOR_TOL * max(1.0, M.shape[0]):
        raise NotAProjector(
            f"idempotency residual {np.linalg.norm(M @ M - M):.3e}"
        )
    return M


def wtpm_probability(rho: DensityOperator, Pi_s1, channel: QuantumChannel,
                     Pi_s2) -> float:
    """Probability of the second outcome after a non-selective first
    measurement restricted to {Pi, I - Pi}:
    tr[Pi^H_{s2} (Pi rho Pi + Pi_perp rho Pi_perp)].
    """
    P1 = _check_projector(Pi_s1, rho.dim)
    P2 = _check_projector(Pi_s2, rho.dim)
    Pperp = np.eye(rho.dim) - P1
    lumped = P1 @ rho.matrix @ P1 + Pperp @ rho.matrix @ Pperp
    w = np.trace(channel.adjoint(P2) @ lumped)
    return float(w.real)


def mhq_from_wtpm(p_joint: float, p_s2: float, w: float) -> float:
    """Recover the Margenau-Hill entry from three measured probabilities."""
    return p_joint + 0.5 * (p_s2 - w)


def _embed_system(A, dim_aux: int = 2) -> np.ndarray:
    return np.kron(as_matrix(A), np.eye(dim_aux, dtype=complex))


def ramsey_simulate(rho: DensityOperator, O1: Observable,
                    channel: QuantumChannel, O2: Observable,
                    u_grid) -> RamseyReadout:
    """Simulate the full interferometric circuit on system x auxiliary qubit.

    Per phase u: Hadamard on the ancilla; conditional phase accumulation
    exp(-i*u*O1) on the |0> branch; the system channel; conditional
    exp(-i*u*O2) on the |1> branch; a final ancilla sigma-x gate. The
    ancilla expectations then satisfy sx + i*sy = G(u) exactly.
    """
    if not (rho.dim == O1.dim == channel.dim == O2.dim):
        raise DimensionMismatch("ramsey registers have mismatched dimensions")
    d = rho.dim
    had = np.kron(np.eye(d, dtype=complex), _HADAMARD)
    sxg = np.kron(np.eye(d, dtype=complex), PAULI_X)
    mx = np.kron(np.eye(d, dtype=complex), PAULI_X)
    my = np.kron(np.eye(d, dtype=complex), PAULI_Y)
    samples = []
    for u in np.asarray(u_grid, dtype=float):
        E1 = O1.spectrum.apply_function(lambda lam: np.exp(-1j * u * lam))
        E2 = O2.spectrum.apply_function(lambda lam: np.exp(-1j * u * lam))
        F1 = np.kron(E1, _P0) + np.kron(np.eye(d, dtype=complex), _P1)
        F2 = np.kron(np.eye(d, dtype=complex), _P0) + np.kron(E2, _P1)
        X = np.kron(rho.matrix, _P0)
        X = had @ X @ had.conj().T
        X = F1 @ X @ F1.conj().T
        Y = np.zeros_like(X)
        for K in channel.kraus:
            KE = _embed_system(K)
            Y += KE @ X @ KE.conj().T
        X = F2 @ Y @ F2.conj().T
        X = sxg @ X @ sxg.conj().T
        sx = float(np.trace(mx @ X).real)
        sy = float(np.trace(my @ X).real)
        samples.append((float(u), sx, sy))
    return RamseyReadout(samples=tuple(samples))


def default_u_grid(atom_values) -> np.ndarray:
    """4 x (number of atoms) phases uniform on [0, 2*pi/gap), where gap is
    the smallest atom spacing (Nyquist-style conditioning)."""
    v = np.sort(np.asarray(atom_values, dtype=float).reshape(-1))
    n = v.size
    if n == 1:
        return np.linspace(0.0, 1.0, 4, endpoint=False)
    gap = float(np.min(np.diff(v)))
    if gap <= 0:
        raise ValueError("atom values must be distinct")
    return np.linspace(0.0, 2.0 * np.pi / gap, 4 * n, endpoint=False)


def reconstruct_distribution(readout: RamseyReadout,
                             atom_values) -> ReconstructionResult:
    """Least-squares inversion of G(u_j) = sum_a w_a exp(i*u_j*v_a) on a
    known finite atom support."""
    v = np.sort(np.asarray(atom_values, dtype=float).reshape(-1))
    us = readout.us
    if us.size < v.size:
        raise ValueError("need at least as many phase samples as atoms")
    E = np.exp(1j * np.outer(us, v))
    cond = float(np.linalg.cond(E))
    if cond > CONDITION_LIMIT:
        raise IllConditionedGrid(cond)
    b = readout.values
    w, *_ = np.linalg.lstsq(E, b, rcond=None)
    residual = float(np.linalg.norm(E @ w - b))
    return ReconstructionResult(
        distribution=AtomDistribution(values=v, weights=w),
        residual=residual,
        condition_number=cond,
    )


def detector_phase(rho: DensityOperator, O1: Observable,
                   channel: QuantumChannel, O2: Observable,
                   kappa_p0: float) -> complex:
    """Modified characteristic function read out by the momentum-superposed
    pointer: sum over the non-demolition table of
    q3(s1,s1',s2) * exp(i*kappa*p0*[o_{s2} - (o_{s1}+o_{s1'})/2])."""
    table = ndqp(rho, O1, channel, O2)
    o1, o2 = table.outcomes1, table.outcomes2
    # phase[a, ap, b] = o2[b] - (o1[a] + o1[ap]) / 2
    phase = (o2[None, None, :]
             - 0.5 * (o1[:, None, None] + o1[None, :, None]))
    return complex(np.sum(table.q3 * np.exp(1j * kappa_p0 * phase)))


def ndqp_distribution(rho: DensityOperator, O1: Observable,
                      channel: QuantumChannel, O2: Observable,
                      coalesce_tol: float = None) -> AtomDistribution:
    """Atom distribution over o_{s2} - (o_{s1}+o_{s1'})/2.

    The (s1,s1') and (s1',s1) contributions land on the same atom, so every
    weight is real (possibly negative).
    """
    table = ndqp(rho, O1, channel, O2)
    o1, o2 = table.outcomes1, table.outcomes2
    values, weights = [], []
    for a in range(o1.size):
        for ap in range(o1.size):
            for b in range(o2.size):
                values.append(float(o2[b] - 0.5 * (o1[a] + o1[ap])))
                weights.append(table.q3[a, ap, b])
    scale = max(1.0, float(np.max(np.abs(np.concatenate([o1, o2])))))
    if coalesce_tol is None:
        coalesce_tol = 1e-9 * scale
    dist = AtomDistribution.from_pairs(values, weights, coalesce_tol)
    if np.max(np.abs(dist.weights.imag)) > 1e-10:
        raise ValueError("non-demolition distribution weights are not real")
    return AtomDistribution(values=dist.values,
                            weights=dist.weights.real.astype(complex))


def _gauss(x, sigma):
    # normalized so that the squared modulus integrates to one
    return (2.0 * np.pi * sigma ** 2) ** (-0.25) * np.exp(-x ** 2 / (4.0 * sigma ** 2))


def detector_position(rho: DensityOperator, O1: Observable,
                      channel: QuantumChannel, O2: Observable,
                      spec: DetectorSpec) -> PositionDistribution:
    """Pointer position density after the impulsive coupling:
    P(x) = sum q3(s1,s1',s2) g(x - kappa*(o_{s2}-o_{s1})) g(x - kappa*(o_{s2}-o_{s1'})).

    Split into the incoherent (s1' = s1) and coherent (s1' != s1) parts.
    """
    table = ndqp(rho, O1, channel, O2)
    o1, o2 = table.outcomes1, table.outcomes2
    xs = spec.xs
    inc = np.zeros_like(xs)
    coh = np.zeros_like(xs)
    for a in range(o1.size):
        for ap in range(o1.size):
            for b in range(o2.size):
                g_a = _gauss(xs - spec.kappa * (o2[b] - o1[a]), spec.sigma)
                g_ap = _gauss(xs - spec.kappa * (o2[b] - o1[ap]), spec.sigma)
                term = (table.q3[a, ap, b] * g_a * g_ap).real
                if a == ap:
                    inc += term
                else:
                    coh += term
    density = inc + coh
    density = np.where(np.abs(density) < 1e-15, 0.0, density)
    mass = float(np.trapezoid(density, xs))
    if abs(1.0 - mass) > GRID_MASS_TOL:
        raise GridTooNarrow(
            f"grid captures {mass:.6f} of the unit mass "
            f"(missing more than {GRID_MASS_TOL})"
        )
    return PositionDistribution(xs=xs, density=density, incoherent=inc, coherent=coh)
