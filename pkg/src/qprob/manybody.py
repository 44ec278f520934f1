"""Out-of-time-ordered correlators and Loschmidt echoes expressed through
the two-time quasiprobability machinery.

Both probes are characteristic functions of a Kirkwood-Dirac table: the
OTOC with V(u) = exp(i*u*O) generated by an observable O, the Loschmidt
amplitude with the time t itself playing the role of the phase variable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .operators import PAULI_X, PAULI_Z, as_matrix, expm_hermitian, kron
from .quasiprob import OutcomePairTable, pair_table
from .states import DensityOperator, Observable, QuantumChannel, gibbs_state

__all__ = [
    "OtocSpec",
    "LoschmidtSpec",
    "otoc",
    "oto_commutator",
    "otoc_kdq",
    "otoc_characteristic",
    "otoc_mhq_characteristic",
    "two_qubit_otoc_preset",
    "loschmidt_amplitude",
    "loschmidt_kdq",
    "qubit_loschmidt_preset",
    "QubitLoschmidtPreset",
]


@dataclass(frozen=True)
class OtocSpec:
    """Initial state rho, unitary perturbation Y, observable generating
    V(u) = exp(i*u*obs), and the dynamics generator H."""

    rho: DensityOperator
    Y: np.ndarray
    obs: Observable
    H: Observable

    def __post_init__(self):
        Y = as_matrix(self.Y)
        if not (self.rho.dim == Y.shape[0] == self.obs.dim == self.H.dim):
            raise DimensionMismatch("OTOC ingredients have mismatched dimensions")
        res = np.linalg.norm(Y.conj().T @ Y - np.eye(Y.shape[0]))
        if res > 1e-10 * max(1.0, Y.shape[0]):
            raise ValueError(f"perturbation Y is not unitary (residual {res:.3e})")
        object.__setattr__(self, "Y", Y)

    def heisenberg_perturbation(self, t: float) -> np.ndarray:
        U = expm_hermitian(self.H.matrix, -1j * t)
        return U.conj().T @ self.Y @ U

    def v_of(self, u: float) -> np.ndarray:
        return self.obs.spectrum.apply_function(lambda lam: np.exp(1j * u * lam))


def otoc(spec: OtocSpec, t: float, u: float) -> complex:
    """F(t) = <Y_t^dag V^dag Y_t V> with V = exp(i*u*obs)."""
    Yt = spec.heisenberg_perturbation(t)
    V = spec.v_of(u)
    return complex(np.trace(
        spec.rho.matrix @ Yt.conj().T @ V.conj().T @ Yt @ V))


def oto_commutator(spec: OtocSpec, t: float, u: float) -> float:
    """C(t) = (1/2) <[Y_t, V]^dag [Y_t, V]>; equals 1 - Re F for unitary V, Y."""
    Yt = spec.heisenberg_perturbation(t)
    V = spec.v_of(u)
    comm = Yt @ V - V @ Yt
    return float(np.trace(spec.rho.matrix @ comm.conj().T @ comm).real / 2.0)


def otoc_kdq(spec: OtocSpec, t: float) -> OutcomePairTable:
    """Two-time table q(s1, s2) = <Y_t^dag Pi_{s2} Y_t Pi_{s1}> over the
    branches of obs; the 'channel' between the two measurements is
    conjugation by the scrambled perturbation Y_t."""
    Yt = spec.heisenberg_perturbation(t)
    return pair_table(spec.rho, spec.obs, QuantumChannel.unitary(Yt), spec.obs)


def otoc_characteristic(spec: OtocSpec, t: float, u: float) -> complex:
    """Characteristic function of the table; equals otoc(spec, t, u)."""
    table = otoc_kdq(spec, t)
    o1, o2 = table.outcomes1, table.outcomes2
    phases = np.exp(1j * u * (o1[:, None] - o2[None, :]))
    return complex(np.sum(table.q * phases))


def otoc_mhq_characteristic(spec: OtocSpec, t: float, u: float) -> complex:
    """Symmetrized-table characteristic; its real content matches 1 - C."""
    table = otoc_kdq(spec, t)
    o1, o2 = table.outcomes1, table.outcomes2
    phases = np.exp(1j * u * (o1[:, None] - o2[None, :]))
    return complex(np.sum(table.q.real * phases))


def two_qubit_otoc_preset(B1: float, B2: float, J: float,
                          beta: float) -> OtocSpec:
    """Two qubits with fields B1, B2 and an xx coupling J, a thermal initial
    state, the perturbation sigma-z on qubit 1, and V generated by sigma-z
    on qubit 2."""
    H = (B1 * kron(PAULI_Z, np.eye(2)) + B2 * kron(np.eye(2), PAULI_Z)
         + J * kron(PAULI_X, PAULI_X))
    Hobs = Observable(H, label="two-qubit xx-coupled")
    return OtocSpec(
        rho=gibbs_state(Hobs, beta),
        Y=kron(PAULI_Z, np.eye(2)),
        obs=Observable(kron(np.eye(2), PAULI_Z), label="sz on qubit 2"),
        H=Hobs,
    )


@dataclass(frozen=True)
class LoschmidtSpec:
    rho: DensityOperator
    H0: Observable
    Hdelta: Observable

    def __post_init__(self):
        if not (self.rho.dim == self.H0.dim == self.Hdelta.dim):
            raise DimensionMismatch("Loschmidt ingredients have mismatched dims")


def loschmidt_amplitude(spec: LoschmidtSpec, t: float) -> complex:
    """G(t) = tr[rho exp(i*H0*t) exp(-i*Hdelta*t)]."""
    A = expm_hermitian(spec.H0.matrix, 1j * t)
    B = expm_hermitian(spec.Hdelta.matrix, -1j * t)
    return complex(np.trace(spec.rho.matrix @ A @ B))


def loschmidt_kdq(spec: LoschmidtSpec) -> OutcomePairTable:
    """Time-independent table q(n, m) = tr[rho Pi_n Pi^(delta)_m], with n a
    branch of H0 and m a branch of Hdelta (conjugate ordering, so that
    G(t) = sum q(n,m) exp(-i(E^delta_m - E_n) t))."""
    return pair_table(spec.rho, spec.H0,
                      QuantumChannel.identity(spec.rho.dim),
                      spec.Hdelta, ordering="KDQ2")


def loschmidt_from_table(table: OutcomePairTable, t: float) -> complex:
    E0, Ed = table.outcomes1, table.outcomes2
    phases = np.exp(-1j * t * (Ed[None, :] - E0[:, None]))
    return complex(np.sum(table.q * phases))


@dataclass(frozen=True)
class QubitLoschmidtPreset:
    """Equal superposition state quenched from B*sz to B*sz + delta*sx."""

    B: float
    delta: float
    spec: LoschmidtSpec

    @property
    def B_delta(self) -> float:
        return float(np.hypot(self.B, self.delta))

    @property
    def mixing_angle(self) -> float:
        """Rotation from the sz eigenbasis to the quenched eigenbasis."""
        return float(np.arctan2(self.delta, self.B + self.B_delta))

    def amplitude_closed_form(self, t: float) -> complex:
        B, d, Bd = self.B, self.delta, self.B_delta
        return complex(
            np.cos(B * t) * np.cos(Bd * t)
            + (B * np.sin(B * t) - 1j * d * np.cos(B * t)) * np.sin(Bd * t) / Bd
        )

    def table_closed_form(self) -> np.ndarray:
        """q entries indexed by ascending branches of (H0, Hdelta):
        row 0 = energy -B, column 0 = energy -B_delta."""
        B, d, Bd = self.B, self.delta, self.B_delta
        q = np.zeros((2, 2), dtype=complex)
        for a in range(2):          # ascending H0 branch: eigenvalue (2a-1)B
            for b in range(2):      # ascending Hdelta branch
                sign_n = 1.0 if a == 1 else -1.0     # (-1)^n with n=0 the +B branch
                sign_m = 1.0 if b == 1 else -1.0
                q[a, b] = (Bd + sign_m * (d + sign_n * B)) / (4.0 * Bd)
        return q


def qubit_loschmidt_preset(B: float, delta: float) -> QubitLoschmidtPreset:
    from .states import pure_state
    psi = np.array([1.0, 1.0]) / np.sqrt(2.0)
    spec = LoschmidtSpec(
        rho=pure_state(psi),
        H0=Observable(B * PAULI_Z, label="pre-quench"),
        Hdelta=Observable(B * PAULI_Z + delta * PAULI_X, label="post-quench"),
    )
    return QubitLoschmidtPreset(B=B, delta=delta, spec=spec)
