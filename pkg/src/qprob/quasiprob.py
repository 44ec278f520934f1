"""Core two-time statistics.

Given an initial state rho, a first observable O1 measured at t1, a CPTP
channel Phi connecting the two times, and a second observable O2 measured
at t2 (in the Heisenberg picture, Pi^H = Phi^dag[Pi]), this module builds

  * the TPM joint probability     p(s1,s2) = tr[Pi^H_{s2} Pi_{s1} rho Pi_{s1}]
  * the Kirkwood-Dirac table      q(s1,s2) = tr[Pi^H_{s2} Pi_{s1} rho]
  * the Margenau-Hill table       Re q = (1/2) tr[{Pi^H_{s2}, Pi_{s1}} rho]
  * the non-demolition table      q3(s1,s1',s2) = tr[Pi^H_{s2} Pi_{s1} rho Pi_{s1'}]

together with the induced atom distribution of Delta o = o_{s2} - o_{s1},
its characteristic function, weak values, and the non-positivity functional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    COALESCE_TOL,
    SUPPORT_TOL,
    DimensionMismatch,
    OrthogonalPostselection,
)
from .operators import expm_hermitian
from .states import DensityOperator, Observable, QuantumChannel

__all__ = [
    "OutcomePairTable",
    "AtomDistribution",
    "NdqpTable",
    "pair_table",
    "tpm_joint",
    "kdq",
    "mhq",
    "ndqp",
    "nonpositivity",
    "no_signaling_residual",
    "distribution",
    "characteristic",
    "weak_value",
    "moments",
]


def _heisenberg_projectors(channel: QuantumChannel, O2: Observable):
    return [channel.adjoint(P) for P in O2.spectrum.projectors]


def _check_dims(rho, O1, channel, O2):
    if not (rho.dim == O1.dim == channel.dim == O2.dim):
        raise DimensionMismatch(
            f"dims (rho={rho.dim}, O1={O1.dim}, channel={channel.dim}, O2={O2.dim})"
        )


@dataclass(frozen=True)
class OutcomePairTable:
    """Joint two-time table over spectral branches of (O1, O2).

    q is the Kirkwood-Dirac table in the stated ordering; p_tpm is the TPM
    companion computed from the same branches.
    """

    outcomes1: np.ndarray      # eigenvalue per branch of O1, ascending
    outcomes2: np.ndarray
    q: np.ndarray              # complex, shape (n1, n2)
    p_tpm: np.ndarray          # real, shape (n1, n2)
    ordering: str = "KDQ1"

    def validate(self, tol: float = 1e-10) -> None:
        total = complex(self.q.sum())
        if abs(total - 1.0) > tol:
            raise ValueError(f"sum q = {total!r} deviates from 1")
        if abs(self.p_tpm.sum() - 1.0) > tol:
            raise ValueError("sum p_tpm deviates from 1")
        if self.p_tpm.min() < -1e-12:
            raise ValueError("negative TPM probability")

    @property
    def mhq(self) -> np.ndarray:
        return self.q.real


@dataclass(frozen=True)
class AtomDistribution:
    """Finite list of (real value, complex weight) atoms, values increasing."""

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=complex).reshape(-1)
        if v.size != w.size or v.size == 0:
            raise ValueError("values/weights size mismatch or empty distribution")
        if np.any(np.diff(v) <= 0):
            raise ValueError("atom values must be strictly increasing")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_pairs(cls, values, weights, coalesce_tol: float = None) -> "AtomDistribution":
        """Sort and merge atoms whose values coincide within tolerance."""
        v = np.asarray(values, dtype=float).reshape(-1)
        w = np.asarray(weights, dtype=complex).reshape(-1)
        if coalesce_tol is None:
            scale = max(1.0, float(np.max(np.abs(v))) if v.size else 1.0)
            coalesce_tol = COALESCE_TOL * scale
        order = np.argsort(v, kind="stable")
        v, w = v[order], w[order]
        starts = np.empty(v.size, dtype=bool)
        starts[0] = True
        np.greater(np.diff(v), coalesce_tol, out=starts[1:])
        idx = np.flatnonzero(starts)
        return cls(v[idx], np.add.reduceat(w, idx))

    def moment(self, k: int) -> complex:
        return complex(np.sum(self.weights * self.values ** k))

    def characteristic(self, u: complex) -> complex:
        return complex(np.sum(self.weights * np.exp(1j * u * self.values)))

    def total(self) -> complex:
        return complex(self.weights.sum())


@dataclass(frozen=True)
class NdqpTable:
    """Three-index non-demolition table q3[s1, s1', s2].

    The s1' = s1 diagonal equals the TPM joint; summing the off-diagonal
    terms over s1' reproduces q - p.
    """

    outcomes1: np.ndarray
    outcomes2: np.ndarray
    q3: np.ndarray             # complex, shape (n1, n1, n2)

    @property
    def tpm_diagonal(self) -> np.ndarray:
        n1 = len(self.outcomes1)
        return np.array([[self.q3[a, a, b].real for b in range(len(self.outcomes2))]
                         for a in range(n1)])


def pair_table(rho: DensityOperator, O1: Observable, channel: QuantumChannel,
               O2: Observable, ordering: str = "KDQ1") -> OutcomePairTable:
    """KDQ table (chosen ordering) together with its TPM companion."""
    _check_dims(rho, O1, channel, O2)
    if ordering not in ("KDQ1", "KDQ2"):
        raise ValueError(f"unknown ordering {ordering!r}")
    P1 = O1.spectrum.projectors
    P2H = _heisenberg_projectors(channel, O2)
    n1, n2 = len(P1), len(P2H)
    q = np.zeros((n1, n2), dtype=complex)
    p = np.zeros((n1, n2), dtype=float)
    R = rho.matrix
    for a, Pa in enumerate(P1):
        PaR = Pa @ R
        PaRPa = PaR @ Pa
        for b, Pb in enumerate(P2H):
            q[a, b] = np.trace(Pb @ PaR)
            p[a, b] = np.trace(Pb @ PaRPa).real
    if ordering == "KDQ2":
        q = q.conj()
    return OutcomePairTable(
        outcomes1=O1.spectrum.eigenvalues.copy(),
        outcomes2=O2.spectrum.eigenvalues.copy(),
        q=q, p_tpm=p, ordering=ordering,
    )


def tpm_joint(rho, O1, channel, O2) -> OutcomePairTable:
    """Two-point-measurement joint probability table (p_tpm payload)."""
    return pair_table(rho, O1, channel, O2)


def kdq(rho, O1, channel, O2, ordering: str = "KDQ1") -> OutcomePairTable:
    return pair_table(rho, O1, channel, O2, ordering=ordering)


def mhq(rho, O1, channel, O2) -> np.ndarray:
    """Margenau-Hill table: entrywise real part of the KDQ1 table."""
    return pair_table(rho, O1, channel, O2).q.real


def ndqp(rho: DensityOperator, O1: Observable, channel: QuantumChannel,
         O2: Observable) -> NdqpTable:
    _check_dims(rho, O1, channel, O2)
    P1 = O1.spectrum.projectors
    P2H = _heisenberg_projectors(channel, O2)
    n1, n2 = len(P1), len(P2H)
    q3 = np.zeros((n1, n1, n2), dtype=complex)
    R = rho.matrix
    for a, Pa in enumerate(P1):
        for ap, Pap in enumerate(P1):
            M = Pa @ R @ Pap
            for b, Pb in enumerate(P2H):
                q3[a, ap, b] = np.trace(Pb @ M)
    return NdqpTable(
        outcomes1=O1.spectrum.eigenvalues.copy(),
        outcomes2=O2.spectrum.eigenvalues.copy(),
        q3=q3,
    )


def nonpositivity(table) -> float:
    """Non-positivity functional: -1 + sum |q|.

    Zero iff every entry is real and nonnegative; strictly positive when any
    entry has negative or imaginary parts.
    """
    q = table.q if isinstance(table, OutcomePairTable) else np.asarray(table)
    return float(np.sum(np.abs(q)) - 1.0)


def no_signaling_residual(table_matrix, rho: DensityOperator,
                          channel: QuantumChannel, O2: Observable) -> float:
    """max over s2 of |sum_{s1} table(s1,s2) - tr[Pi^H_{s2} rho]|.

    For a KDQ table the residual vanishes identically; for the TPM joint it
    measures the invasiveness of the first measurement.
    """
    M = np.asarray(table_matrix)
    P2H = _heisenberg_projectors(channel, O2)
    residual = 0.0
    for b, Pb in enumerate(P2H):
        unperturbed = complex(np.trace(Pb @ rho.matrix))
        residual = max(residual, abs(complex(M[:, b].sum()) - unperturbed))
    return residual


def distribution(table: OutcomePairTable, which: str = "kdq",
                 coalesce_tol: float = None) -> AtomDistribution:
    """Atom distribution of Delta o = o_{s2} - o_{s1} induced by the table."""
    src = table.q if which == "kdq" else table.p_tpm.astype(complex)
    values, weights = [], []
    for a, oa in enumerate(table.outcomes1):
        for b, ob in enumerate(table.outcomes2):
            values.append(ob - oa)
            weights.append(src[a, b])
    if coalesce_tol is None:
        scale = max(1.0, float(np.max(np.abs(np.concatenate(
            [table.outcomes1, table.outcomes2])))))
        coalesce_tol = COALESCE_TOL * scale
    return AtomDistribution.from_pairs(values, weights, coalesce_tol)


def characteristic(rho: DensityOperator, O1: Observable, channel: QuantumChannel,
                   O2: Observable, u: complex) -> complex:
    """G(u) = tr[exp(-i*u*O1) rho Phi^dag[exp(i*u*O2)]]; u may be complex."""
    _check_dims(rho, O1, channel, O2)
    E1 = O1.spectrum.apply_function(lambda lam: np.exp(-1j * u * lam))
    E2 = O2.spectrum.apply_function(lambda lam: np.exp(1j * u * lam))
    return complex(np.trace(E1 @ rho.matrix @ channel.adjoint(E2)))


def weak_value(O1: Observable, psi, post) -> complex:
    """<post|O1|psi> / <post|psi>; may be anomalous (outside the spectrum)."""
    v = np.asarray(psi, dtype=complex).reshape(-1)
    f = np.asarray(post, dtype=complex).reshape(-1)
    if v.size != O1.dim or f.size != O1.dim:
        raise DimensionMismatch("state vectors do not match observable dimension")
    v = v / np.linalg.norm(v)
    f = f / np.linalg.norm(f)
    overlap = complex(f.conj() @ v)
    if abs(overlap) <= 1e-12:
        raise OrthogonalPostselection(
            f"|<post|psi>| = {abs(overlap):.3e} below 1e-12"
        )
    return complex(f.conj() @ O1.matrix @ v) / overlap


def moments(dist: AtomDistribution, k: int) -> complex:
    if k < 1:
        raise ValueError("moment order must be >= 1")
    return dist.moment(k)
