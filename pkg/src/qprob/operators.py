"""Dense complex matrix algebra and Hermitian spectral machinery.

Everything downstream (tables, channels, presets) is built on the
degeneracy-grouped spectral decomposition produced here: each distinct
eigenvalue owns one projector onto its full eigenspace, so rank > 1
branches are first-class citizens.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    GROUP_TOL,
    HERMITICITY_TOL,
    DimensionMismatch,
    NonHermitianInput,
)

__all__ = [
    "SpectralDecomposition",
    "hermitian_eig",
    "expm_hermitian",
    "commutator",
    "anticommutator",
    "kron",
    "trace",
    "dagger",
    "matmul",
    "as_matrix",
    "check_hermitian",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "ID2",
]

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)


def as_matrix(A) -> np.ndarray:
    """Coerce to a square complex ndarray and validate finiteness."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] < 1:
        raise DimensionMismatch("matrix dimension must be >= 1")
    if not np.all(np.isfinite(M.real)) or not np.all(np.isfinite(M.imag)):
        raise ValueError("matrix has non-finite entries")
    return M


def check_hermitian(A, tol: float = HERMITICITY_TOL) -> np.ndarray:
    M = as_matrix(A)
    residual = np.max(np.abs(M - M.conj().T))
    if residual > tol:
        raise NonHermitianInput(residual, tol)
    return M


def dagger(A) -> np.ndarray:
    return as_matrix(A).conj().T


def trace(A) -> complex:
    return complex(np.trace(as_matrix(A)))


def matmul(A, B) -> np.ndarray:
    MA, MB = as_matrix(A), as_matrix(B)
    if MA.shape[1] != MB.shape[0]:
        raise DimensionMismatch(f"cannot multiply {MA.shape} by {MB.shape}")
    return MA @ MB


def commutator(A, B) -> np.ndarray:
    MA, MB = as_matrix(A), as_matrix(B)
    if MA.shape != MB.shape:
        raise DimensionMismatch(f"commutator of {MA.shape} with {MB.shape}")
    return MA @ MB - MB @ MA


def anticommutator(A, B) -> np.ndarray:
    MA, MB = as_matrix(A), as_matrix(B)
    if MA.shape != MB.shape:
        raise DimensionMismatch(f"anticommutator of {MA.shape} with {MB.shape}")
    return MA @ MB + MB @ MA


def kron(A, B) -> np.ndarray:
    return np.kron(as_matrix(A), as_matrix(B))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalue/projector pairs of a Hermitian operator, degeneracy-grouped.

    eigenvalues are strictly increasing; projectors[i] projects onto the full
    eigenspace of eigenvalues[i] (rank >= 1).
    """

    eigenvalues: np.ndarray            # real, strictly increasing
    projectors: tuple                  # tuple of ndarray
    source_dim: int

    @property
    def n_branches(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for lam, P in zip(self.eigenvalues, self.projectors):
            out += lam * P
        return out

    def apply_function(self, f) -> np.ndarray:
        """Sum f(eigenvalue) * projector over branches."""
        out = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for lam, P in zip(self.eigenvalues, self.projectors):
            out += f(lam) * P
        return out

    def validate(self, tol: float = 1e-8) -> None:
        total = np.zeros((self.source_dim, self.source_dim), dtype=complex)
        for i, P in enumerate(self.projectors):
            if np.linalg.norm(P - P.conj().T) > 1e-10:
                raise NonHermitianInput(np.max(np.abs(P - P.conj().T)))
            if np.linalg.norm(P @ P - P) > 1e-8:
                raise ValueError(f"branch {i} projector is not idempotent")
            total += P
        if np.linalg.norm(total - np.eye(self.source_dim)) > tol:
            raise ValueError("projectors do not resolve the identity")
        if np.any(np.diff(self.eigenvalues) <= 0):
            raise ValueError("branch eigenvalues are not strictly increasing")


def hermitian_eig(H, group_tol: float = GROUP_TOL) -> SpectralDecomposition:
    """Spectral decomposition with relative-tolerance degeneracy grouping.

    Eigenvalues within group_tol * max(1, |lambda|) of each other are merged
    into a single branch whose projector spans the combined eigenspace.
    """
    M = check_hermitian(H)
    vals, vecs = np.linalg.eigh(M)
    dim = M.shape[0]

    groups: list[list[int]] = [[0]]
    for i in range(1, dim):
        ref = vals[groups[-1][0]]
        if abs(vals[i] - ref) <= group_tol * max(1.0, abs(ref)):
            groups[-1].append(i)
        else:
            groups.append([i])

    eigenvalues = np.array([float(np.mean(vals[g])) for g in groups])
    projectors = []
    for g in groups:
        V = vecs[:, g]
        projectors.append(V @ V.conj().T)
    return SpectralDecomposition(
        eigenvalues=eigenvalues, projectors=tuple(projectors), source_dim=dim
    )


def expm_hermitian(H, c: complex, group_tol: float = GROUP_TOL) -> np.ndarray:
    """exp(c*H) for Hermitian H via the spectral decomposition.

    Unitary within 1e-10 when Re(c) = 0.
    """
    dec = hermitian_eig(H, group_tol=group_tol)
    return dec.apply_function(lambda lam: np.exp(c * lam))
