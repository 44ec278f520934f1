"""Density operators, observables, quantum channels, and the
dephased + coherent split rho = D[rho] + chi.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EIGENVALUE_CLIP,
    GROUP_TOL,
    HERMITICITY_TOL,
    TRACE_TOL,
    DimensionMismatch,
    NotPositiveSemidefinite,
)
from .operators import (
    SpectralDecomposition,
    as_matrix,
    check_hermitian,
    hermitian_eig,
)

__all__ = [
    "DensityOperator",
    "Observable",
    "QuantumChannel",
    "gibbs_state",
    "dephase",
    "coherence_part",
    "heisenberg",
    "apply_channel",
    "pure_state",
]


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace operator.

    Validation clips eigenvalues in [-EIGENVALUE_CLIP, 0) to zero and
    renormalizes; anything more negative is a hard error.
    """

    matrix: np.ndarray

    def __post_init__(self):
        M = check_hermitian(self.matrix)
        M = 0.5 * (M + M.conj().T)
        vals, vecs = np.linalg.eigh(M)
        if vals.min() < -EIGENVALUE_CLIP:
            raise NotPositiveSemidefinite(
                f"density eigenvalue {vals.min():.3e} below -{EIGENVALUE_CLIP:.1e}"
            )
        tr = float(np.trace(M).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density trace {tr!r} deviates from 1 beyond {TRACE_TOL}")
        if vals.min() < 0.0:
            vals = np.clip(vals, 0.0, None)
            M = (vecs * vals) @ vecs.conj().T
            M = M / np.trace(M).real
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def unchecked(cls, matrix) -> "DensityOperator":
        """Hermitian unit-trace matrix without the positivity check.

        Intended for analytic families whose reported functionals are linear
        in the matrix and remain meaningful outside the physical parameter
        region; use the normal constructor whenever positivity matters.
        """
        M = check_hermitian(matrix)
        M = 0.5 * (M + M.conj().T)
        tr = float(np.trace(M).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond {TRACE_TOL}")
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", M)
        return obj


def pure_state(psi) -> DensityOperator:
    """|psi><psi| from a (not necessarily normalized) state vector."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero state vector")
    v = v / n
    return DensityOperator(np.outer(v, v.conj()))


@dataclass(frozen=True)
class Observable:
    """Hermitian operator with its (degeneracy-grouped) spectral decomposition."""

    matrix: np.ndarray
    spectrum: SpectralDecomposition = field(default=None)
    label: str = ""

    def __post_init__(self):
        M = check_hermitian(self.matrix)
        object.__setattr__(self, "matrix", M)
        if self.spectrum is None:
            object.__setattr__(self, "spectrum", hermitian_eig(M))
        recon = self.spectrum.reconstruct()
        if np.linalg.norm(recon - M) > 1e-9 * max(1.0, np.linalg.norm(M)):
            raise ValueError("spectrum does not reconstruct the observable")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class QuantumChannel:
    """CPTP map given either by a unitary or a Kraus list.

    Kraus lists are stored verbatim (no canonicalization); the Heisenberg
    adjoint only needs the list.
    """

    kraus: tuple                   # tuple of ndarray
    is_unitary: bool = False

    @classmethod
    def unitary(cls, U) -> "QuantumChannel":
        M = as_matrix(U)
        residual = np.linalg.norm(M.conj().T @ M - np.eye(M.shape[0]))
        if residual > 1e-10 * max(1.0, M.shape[0]):
            raise ValueError(f"matrix is not unitary (residual {residual:.3e})")
        return cls(kraus=(M,), is_unitary=True)

    @classmethod
    def from_kraus(cls, ops) -> "QuantumChannel":
        Ks = tuple(as_matrix(K) for K in ops)
        if not Ks:
            raise ValueError("empty Kraus list")
        d = Ks[0].shape[0]
        total = np.zeros((d, d), dtype=complex)
        for K in Ks:
            if K.shape != (d, d):
                raise DimensionMismatch("Kraus operators of unequal dimension")
            total += K.conj().T @ K
        if np.linalg.norm(total - np.eye(d)) > 1e-9 * d:
            raise ValueError("Kraus operators do not satisfy sum K^dag K = I")
        return cls(kraus=Ks, is_unitary=False)

    @classmethod
    def identity(cls, dim: int) -> "QuantumChannel":
        return cls(kraus=(np.eye(dim, dtype=complex),), is_unitary=True)

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def apply(self, A) -> np.ndarray:
        """Schroedinger action: sum_a K_a A K_a^dag."""
        M = as_matrix(A)
        if M.shape[0] != self.dim:
            raise DimensionMismatch("channel/operand dimension mismatch")
        out = np.zeros_like(M)
        for K in self.kraus:
            out += K @ M @ K.conj().T
        return out

    def adjoint(self, A) -> np.ndarray:
        """Heisenberg action: sum_a K_a^dag A K_a; maps identity to identity."""
        M = as_matrix(A)
        if M.shape[0] != self.dim:
            raise DimensionMismatch("channel/operand dimension mismatch")
        out = np.zeros_like(M)
        for K in self.kraus:
            out += K.conj().T @ M @ K
        return out


def gibbs_state(H: Observable, beta: float) -> DensityOperator:
    """exp(-beta*H)/Z computed spectrally (stable at large beta)."""
    if not np.isfinite(beta):
        raise ValueError("beta must be finite")
    vals = H.spectrum.eigenvalues
    # shift by the ground energy so the largest weight is exactly 1
    w = np.exp(-beta * (vals - vals.min()))
    Z = sum(wi * np.trace(P).real for wi, P in zip(w, H.spectrum.projectors))
    M = np.zeros((H.dim, H.dim), dtype=complex)
    for wi, P in zip(w, H.spectrum.projectors):
        M += (wi / Z) * P
    return DensityOperator(M)


def dephase(rho: DensityOperator, O: Observable) -> DensityOperator:
    """Projector-sandwich dephasing in the eigenbasis of O."""
    if rho.dim != O.dim:
        raise DimensionMismatch("state/observable dimension mismatch")
    M = np.zeros((rho.dim, rho.dim), dtype=complex)
    for P in O.spectrum.projectors:
        M += P @ rho.matrix @ P
    return DensityOperator(M)


def coherence_part(rho: DensityOperator, O: Observable) -> np.ndarray:
    """chi = rho - dephase(rho, O); traceless remainder of the coherences."""
    return rho.matrix - dephase(rho, O).matrix


def heisenberg(channel: QuantumChannel, A) -> np.ndarray:
    return channel.adjoint(A)


def apply_channel(channel: QuantumChannel, rho: DensityOperator) -> DensityOperator:
    return DensityOperator(channel.apply(rho.matrix))
