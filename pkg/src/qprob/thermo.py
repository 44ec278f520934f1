"""Work and heat statistics built on the two-time quasiprobability tables.

Sign conventions, fixed once:
  W = E_f - E_i   (work done ON the system)
  Q = E_ic - E_fc (energy lost by the cold body; Q > 0 = backflow candidate)
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    SUPPORT_TOL,
    THERMAL_FLOOR,
    DimensionMismatch,
    NotPositiveSemidefinite,
    RankDeficiencyWarning,
    SingularThermalState,
    ZeroSupportProjector,
)
from .operators import PAULI_X, PAULI_Y, PAULI_Z, as_matrix, commutator
from .quasiprob import AtomDistribution, OutcomePairTable, distribution, pair_table
from .states import (
    DensityOperator,
    Observable,
    QuantumChannel,
    coherence_part,
    dephase,
    gibbs_state,
)

__all__ = [
    "WorkProtocol",
    "HeatExchangeSpec",
    "ExtractionBoundReport",
    "WorkVarianceReport",
    "work_table",
    "work_distribution",
    "free_energy_difference",
    "jarzynski_tpm",
    "jarzynski_kdq",
    "average_work",
    "extractable_work",
    "classical_bound",
    "work_variance",
    "heat_table",
    "average_heat",
    "strong_backflow_threshold",
    "exchange_fluctuation",
    "driven_qubit_preset",
    "DrivenQubitPreset",
    "two_qubit_heat_preset",
]


@dataclass(frozen=True)
class WorkProtocol:
    """Initial/final Hamiltonians, the connecting channel, and the state."""

    H1: Observable
    H2: Observable
    channel: QuantumChannel
    rho: DensityOperator

    def __post_init__(self):
        if not (self.H1.dim == self.H2.dim == self.channel.dim == self.rho.dim):
            raise DimensionMismatch("work protocol dimensions differ")


def work_table(protocol: WorkProtocol) -> OutcomePairTable:
    return pair_table(protocol.rho, protocol.H1, protocol.channel, protocol.H2)


def work_distribution(protocol: WorkProtocol, which: str = "kdq") -> AtomDistribution:
    return distribution(work_table(protocol), which=which)


def _log_partition(H: Observable, beta: float) -> float:
    vals = H.spectrum.eigenvalues
    ranks = np.array([np.trace(P).real for P in H.spectrum.projectors])
    shifted = -beta * (vals - vals.min())
    return float(-beta * vals.min() + np.log(np.sum(ranks * np.exp(shifted))))


def free_energy_difference(H1: Observable, H2: Observable, beta: float) -> float:
    """Delta F = -(1/beta) ln(Z2/Z1); beta -> 0 limit taken analytically."""
    if beta < 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and nonnegative")
    if beta == 0.0:
        if H1.dim != H2.dim:
            raise DimensionMismatch("beta=0 limit needs equal dimensions")
        return float((np.trace(H2.matrix) - np.trace(H1.matrix)).real / H1.dim)
    return -(_log_partition(H2, beta) - _log_partition(H1, beta)) / beta


def _gibbs_and_inverse(H: Observable, beta: float):
    """Gibbs weights per branch and the spectral inverse of the Gibbs state."""
    vals = H.spectrum.eigenvalues
    ranks = np.array([np.trace(P).real for P in H.spectrum.projectors])
    w = np.exp(-beta * (vals - vals.min()))
    Z = float(np.sum(ranks * w))
    w = w / Z
    if w.min() < THERMAL_FLOOR:
        raise SingularThermalState(
            f"Gibbs eigenvalue {w.min():.3e} underflows at beta={beta}"
        )
    rho_th = np.zeros((H.dim, H.dim), dtype=complex)
    inv = np.zeros((H.dim, H.dim), dtype=complex)
    for wi, P in zip(w, H.spectrum.projectors):
        rho_th += wi * P
        inv += (1.0 / wi) * P
    return rho_th, inv


def jarzynski_tpm(protocol: WorkProtocol, beta: float):
    """Returns (lhs, rhs, gamma): <exp(-beta W)>_TPM, exp(-beta DF)*gamma,
    and the efficacy gamma = tr[rho_th(t1)^-1 D1[rho] Phi^dag[rho_th(t2)]]."""
    _, inv1 = _gibbs_and_inverse(protocol.H1, beta)
    rho_th2, _ = _gibbs_and_inverse(protocol.H2, beta)
    table = work_table(protocol)
    E1, E2 = table.outcomes1, table.outcomes2
    lhs = float(np.sum(table.p_tpm
                       * np.exp(-beta * (E2[None, :] - E1[:, None]))))
    deph = dephase(protocol.rho, protocol.H1).matrix
    gamma = float(np.trace(inv1 @ deph @ protocol.channel.adjoint(rho_th2)).real)
    dF = free_energy_difference(protocol.H1, protocol.H2, beta)
    rhs = float(np.exp(-beta * dF) * gamma)
    return lhs, rhs, gamma


def jarzynski_kdq(protocol: WorkProtocol, beta: float):
    """Returns (lhs, Gamma): <exp(-beta W)>_KDQ and the coherent correction
    Gamma = tr[rho_th(t1)^-1 rho Phi^dag[rho_th(t2)]]."""
    _, inv1 = _gibbs_and_inverse(protocol.H1, beta)
    rho_th2, _ = _gibbs_and_inverse(protocol.H2, beta)
    table = work_table(protocol)
    E1, E2 = table.outcomes1, table.outcomes2
    lhs = complex(np.sum(table.q
                         * np.exp(-beta * (E2[None, :] - E1[:, None]))))
    Gamma = complex(np.trace(
        inv1 @ protocol.rho.matrix @ protocol.channel.adjoint(rho_th2)))
    return lhs, Gamma


def average_work(protocol: WorkProtocol, which: str = "kdq") -> float:
    m1 = work_distribution(protocol, which=which).moment(1)
    if abs(m1.imag) > 1e-10:
        raise ValueError(f"first work moment has imaginary part {m1.imag:.3e}")
    return float(m1.real)


def extractable_work(protocol: WorkProtocol, which: str = "kdq") -> float:
    return -average_work(protocol, which=which)


@dataclass(frozen=True)
class ExtractionBoundReport:
    avg_work_kdq: float
    avg_work_tpm: float
    classical_bound: float
    activities: np.ndarray          # Lambda_if, shape (n1, n2); 0 where undefined
    violation: bool                 # extractable KDQ work exceeds the bound


def classical_bound(protocol: WorkProtocol) -> ExtractionBoundReport:
    """Upper bound on TPM-extractable work,
    sum over E_i >= E_f of (E_i - E_f) sqrt(p_if * p_f),
    with the interference activities Lambda_if = Re[q_if]/sqrt(p_if*p_f)."""
    table = work_table(protocol)
    E1, E2 = table.outcomes1, table.outcomes2
    P2H = [protocol.channel.adjoint(P) for P in protocol.H2.spectrum.projectors]
    p_f = np.array([np.trace(P @ protocol.rho.matrix).real for P in P2H])

    purity = float(np.trace(protocol.rho.matrix @ protocol.rho.matrix).real)
    ranks1 = [round(np.trace(P).real) for P in protocol.H1.spectrum.projectors]
    ranks2 = [round(np.trace(P).real) for P in protocol.H2.spectrum.projectors]
    if purity < 1.0 - 1e-9 or any(r != 1 for r in ranks1 + ranks2):
        warnings.warn(
            "activity decomposition assumes a pure state and rank-1 branches; "
            "bound computed anyway",
            RankDeficiencyWarning,
        )

    bound = 0.0
    activities = np.zeros_like(table.p_tpm)
    for a, Ei in enumerate(E1):
        for b, Ef in enumerate(E2):
            prod = table.p_tpm[a, b] * p_f[b]
            root = np.sqrt(max(prod, 0.0))
            if Ei >= Ef:
                bound += (Ei - Ef) * root
            if root > 1e-12:
                activities[a, b] = table.q[a, b].real / root
    w_kdq = average_work(protocol, "kdq")
    w_tpm = average_work(protocol, "tpm")
    return ExtractionBoundReport(
        avg_work_kdq=w_kdq,
        avg_work_tpm=w_tpm,
        classical_bound=float(bound),
        activities=activities,
        violation=(-w_kdq) > bound + 1e-10,
    )


@dataclass(frozen=True)
class WorkVarianceReport:
    variance: complex
    re: float
    im: float
    robertson_bound: float          # 2 * DeltaH(t1) * DeltaH^H(t2)
    covariance: float               # symmetrized quantum covariance


def work_variance(protocol: WorkProtocol) -> WorkVarianceReport:
    """Complex work variance <W^2> - <W>^2 over the KDQ table.

    The real part equals Var[H(t1)] + Var[H^H(t2)] - 2 Cov (symmetrized);
    the imaginary part is a pure non-commutativity term bounded by the
    Robertson product 2 DeltaH(t1) DeltaH^H(t2).
    """
    dist = work_distribution(protocol, "kdq")
    var = dist.moment(2) - dist.moment(1) ** 2
    R = protocol.rho.matrix
    A = protocol.H1.matrix
    B = protocol.channel.adjoint(protocol.H2.matrix)
    mA = np.trace(R @ A).real
    mB = np.trace(R @ B).real
    a = A - mA * np.eye(protocol.rho.dim)
    b = B - mB * np.eye(protocol.rho.dim)
    varA = float(np.trace(R @ a @ a).real)
    varB = float(np.trace(R @ b @ b).real)
    cov = float(0.5 * np.trace(R @ (a @ b + b @ a)).real)
    robertson = 2.0 * np.sqrt(max(varA, 0.0) * max(varB, 0.0))
    return WorkVarianceReport(
        variance=var,
        re=float(var.real),
        im=float(var.imag),
        robertson_bound=robertson,
        covariance=cov,
    )


# ---------------------------------------------------------------------------
# heat exchange between two locally-thermal bodies
# ---------------------------------------------------------------------------

def _partial_trace(M: np.ndarray, dc: int, dh: int, keep: str) -> np.ndarray:
    T = M.reshape(dc, dh, dc, dh)
    if keep == "c":
        return np.trace(T, axis1=1, axis2=3)
    return np.trace(T, axis1=0, axis2=2)


@dataclass(frozen=True)
class HeatExchangeSpec:
    """Two bodies with local Hamiltonians Hc, Hh at inverse temperatures
    beta_c > beta_h, a joint state whose reductions are the local Gibbs
    states, and an energy-preserving joint unitary."""

    Hc: Observable
    Hh: Observable
    beta_c: float
    beta_h: float
    rho: DensityOperator
    U: np.ndarray

    def __post_init__(self):
        dc, dh = self.Hc.dim, self.Hh.dim
        U = as_matrix(self.U)
        if self.rho.dim != dc * dh or U.shape[0] != dc * dh:
            raise DimensionMismatch("joint-space dimensions inconsistent")
        object.__setattr__(self, "U", U)
        Htot = np.kron(self.Hc.matrix, np.eye(dh)) + np.kron(np.eye(dc), self.Hh.matrix)
        res = np.linalg.norm(commutator(Htot, U))
        if res > 1e-9:
            raise ValueError(
                f"unitary is not energy preserving: ||[H,U]|| = {res:.3e}"
            )
        for keep, H, beta in (("c", self.Hc, self.beta_c),
                              ("h", self.Hh, self.beta_h)):
            red = _partial_trace(self.rho.matrix, dc, dh, keep)
            th = gibbs_state(H, beta).matrix
            if np.linalg.norm(red - th) > 1e-9:
                raise ValueError(
                    f"reduced state of body {keep!r} is not the local Gibbs state"
                )

    @property
    def total_hamiltonian(self) -> np.ndarray:
        return (np.kron(self.Hc.matrix, np.eye(self.Hh.dim))
                + np.kron(np.eye(self.Hc.dim), self.Hh.matrix))

    def joint_projectors(self):
        """Local-branch quadruple structure: lists of (E_c, E_h, projector)."""
        out = []
        for Ec, Pc in zip(self.Hc.spectrum.eigenvalues, self.Hc.spectrum.projectors):
            for Eh, Ph in zip(self.Hh.spectrum.eigenvalues, self.Hh.spectrum.projectors):
                out.append((float(Ec), float(Eh), np.kron(Pc, Ph)))
        return out


def heat_table(spec: HeatExchangeSpec) -> np.ndarray:
    """Four-index KDQ table q[ic, ih, fc, fh] over local branch quadruples."""
    nc = spec.Hc.spectrum.n_branches
    nh = spec.Hh.spectrum.n_branches
    joint = spec.joint_projectors()
    q = np.zeros((nc, nh, nc, nh), dtype=complex)
    R = spec.rho.matrix
    U = spec.U
    heis = [U.conj().T @ P @ U for _, _, P in joint]
    for i, (_, _, Pi) in enumerate(joint):
        ic, ih = divmod(i, nh)
        PiR = Pi @ R
        for f, PfH in enumerate(heis):
            fc, fh = divmod(f, nh)
            q[ic, ih, fc, fh] = np.trace(PfH @ PiR)
    return q


def average_heat(spec: HeatExchangeSpec) -> float:
    """<Q> = tr[(rho - U rho U^dag) Hc]; positive = cold-to-hot backflow."""
    HcI = np.kron(spec.Hc.matrix, np.eye(spec.Hh.dim))
    evolved = spec.U @ spec.rho.matrix @ spec.U.conj().T
    return float(np.trace((spec.rho.matrix - evolved) @ HcI).real)


def strong_backflow_threshold(spec: HeatExchangeSpec) -> float:
    """ln(d)/(beta_c - beta_h): backflows above it witness entanglement."""
    dbeta = spec.beta_c - spec.beta_h
    if dbeta <= 0:
        raise ValueError("needs beta_c > beta_h")
    return float(np.log(spec.Hc.dim) / dbeta)


def exchange_fluctuation(spec: HeatExchangeSpec):
    """Returns (lhs, upsilon) of the coherence-corrected exchange relation
    <exp(DI + Dbeta*Q)>_KDQ = 1 + Upsilon, with the stochastic mutual
    information I and Q = E_ic - E_fc."""
    joint = spec.joint_projectors()
    R = spec.rho.matrix
    U = spec.U
    dbeta = spec.beta_c - spec.beta_h
    th_c = gibbs_state(spec.Hc, spec.beta_c).matrix
    th_h = gibbs_state(spec.Hh, spec.beta_h).matrix

    # exp(I_j) = tr[Pi_j rho] / (tr[Pi_jc th_c] tr[Pi_jh th_h]) per quadruple
    nc = spec.Hc.spectrum.n_branches
    nh = spec.Hh.spectrum.n_branches
    pc = np.array([np.trace(P @ th_c).real for P in spec.Hc.spectrum.projectors])
    ph = np.array([np.trace(P @ th_h).real for P in spec.Hh.spectrum.projectors])
    pop = np.array([np.trace(P @ R).real for _, _, P in joint])
    expI = np.array([pop[j] / (pc[j // nh] * ph[j % nh])
                     for j in range(len(joint))])

    # coherence remainder w.r.t. the local-branch product projectors (the
    # degenerate global levels are NOT merged: the table is four-indexed)
    deph = np.zeros_like(R)
    for _, _, P in joint:
        deph += P @ R @ P
    chi = R - deph

    heis = [U.conj().T @ P @ U for _, _, P in joint]
    lhs = 0.0 + 0.0j
    upsilon = 0.0 + 0.0j
    for i, (Eic, _, Pi) in enumerate(joint):
        if pop[i] <= SUPPORT_TOL:
            # zero-support branch: Pi rho = 0 for PSD rho, every term vanishes
            residual = np.linalg.norm(Pi @ R)
            if residual > 1e-12:
                raise ZeroSupportProjector(
                    f"branch {i} has population {pop[i]:.3e} but overlap "
                    f"{residual:.3e}"
                )
            continue
        for f, (Efc, _, _) in enumerate(joint):
            q_if = complex(np.trace(heis[f] @ Pi @ R))
            weight = np.exp(dbeta * (Eic - Efc)) * expI[f] / expI[i]
            lhs += q_if * weight
            num = complex(np.trace(heis[f] @ Pi @ chi))
            upsilon += num * pop[f] / pop[i]
    return complex(lhs), complex(upsilon)


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DrivenQubitPreset:
    """Circularly driven qubit:
    H(t) = (1/2)[Omega(cos(dt) sx + sin(dt) sy) + d sz], exactly solvable with
    U(t) = exp(-i d sz t/2) exp(-i Omega sx t/2). The state is prepared with
    populations (p, 1-p) and real coherence c in the H(0) eigenbasis."""

    Omega: float
    delta: float
    p: float
    c: float
    t: float
    protocol: WorkProtocol

    @property
    def gap(self) -> float:
        return float(np.hypot(self.Omega, self.delta))

    def analytic_table(self) -> np.ndarray:
        """Closed-form KDQ entries [[q--, q-+], [q+-, q++]] (index order:
        initial branch ascending, final branch ascending)."""
        O, d, p, c, t = self.Omega, self.delta, self.p, self.c, self.t
        D = self.gap
        D2 = D * D
        cos, sin = np.cos(O * t), np.sin(O * t)
        q_mm = (p * (d * d + 2 * O * O) - c * d * O
                + d * (p * d + c * O) * cos + 1j * c * d * D * sin) / (2 * D2)
        q_mp = d * np.sin(O * t / 2) * (
            -1j * c * np.cos(O * t / 2) / D
            + (p * d + c * O) * np.sin(O * t / 2) / D2)
        q_pm = (d * ((1 - p) * d - c * O) * (1 - cos)
                - 1j * c * d * D * sin) / (2 * D2)
        q_pp = ((1 - p) * (d * d + 2 * O * O) + c * d * O
                + d * ((1 - p) * d - c * O) * cos + 1j * c * d * D * sin) / (2 * D2)
        return np.array([[q_mm, q_mp], [q_pm, q_pp]])


def _hamiltonian_at(Omega: float, delta: float, t: float) -> np.ndarray:
    return 0.5 * (Omega * (np.cos(delta * t) * PAULI_X
                           + np.sin(delta * t) * PAULI_Y)
                  + delta * PAULI_Z)


def driven_qubit_preset(Omega: float, delta: float, p: float, c: float,
                        t: float) -> DrivenQubitPreset:
    H1 = Observable(_hamiltonian_at(Omega, delta, 0.0), label="H(0)")
    H2 = Observable(_hamiltonian_at(Omega, delta, t), label="H(t)")
    from .operators import expm_hermitian
    U = (expm_hermitian(PAULI_Z, -0.5j * delta * t)
         @ expm_hermitian(PAULI_X, -0.5j * Omega * t))
    # state written in the H(0) eigenbasis: population p on the lower branch,
    # real coherence c between the two branches
    vals, vecs = np.linalg.eigh(H1.matrix)
    lo, hi = vecs[:, 0], vecs[:, 1]
    rho = (p * np.outer(lo, lo.conj()) + (1 - p) * np.outer(hi, hi.conj())
           + c * (np.outer(lo, hi.conj()) + np.outer(hi, lo.conj())))
    return DrivenQubitPreset(
        Omega=Omega, delta=delta, p=p, c=c, t=t,
        protocol=WorkProtocol(H1=H1, H2=H2,
                              channel=QuantumChannel.unitary(U),
                              rho=DensityOperator(rho)),
    )


def two_qubit_heat_preset(p: float, eta: float, xi: float, theta: float,
                          beta_c: float, beta_h: float) -> HeatExchangeSpec:
    """Two resonant qubits (unit gap) with locally thermal marginals, a
    coherence eta*exp(i*xi) in the one-excitation sector, and a partial-swap
    unitary of angle theta.

    The one-excitation block is required to be positive (the stated eta
    bound); the corner populations may be formally negative for small p.
    Every functional reported on this family (average heat, the KDQ heat
    table) is linear in the state matrix, so the family stays meaningful as
    an analytic continuation; pick p >= 1/a_c + 1/a_h - 1 for a physical
    state.
    """
    a_c = 1.0 + np.exp(-beta_c)
    a_h = 1.0 + np.exp(-beta_h)
    acc = 1.0 / a_c - p
    ahh = 1.0 / a_h - p
    if acc < -1e-12 or ahh < -1e-12:
        raise NotPositiveSemidefinite("p exceeds a thermal ground population")
    if abs(eta) > np.sqrt(max(acc, 0.0) * max(ahh, 0.0)) + 1e-12:
        raise NotPositiveSemidefinite(
            f"|eta|={abs(eta)} violates the bound "
            f"sqrt({acc:.6f} * {ahh:.6f})"
        )
    last = 1.0 - p - acc - ahh
    rho = np.array([
        [p, 0, 0, 0],
        [0, acc, eta * np.exp(1j * xi), 0],
        [0, eta * np.exp(-1j * xi), ahh, 0],
        [0, 0, 0, last],
    ], dtype=complex)
    ct, st = np.cos(theta), np.sin(theta)
    U = np.array([
        [1, 0, 0, 0],
        [0, ct, -st, 0],
        [0, st, ct, 0],
        [0, 0, 0, 1],
    ], dtype=complex)
    Hloc = Observable(-0.5 * PAULI_Z, label="local qubit")
    return HeatExchangeSpec(
        Hc=Hloc, Hh=Hloc, beta_c=beta_c, beta_h=beta_h,
        rho=DensityOperator.unchecked(rho), U=U,
    )
