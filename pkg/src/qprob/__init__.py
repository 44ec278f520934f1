"""Quasiprobability statistics of two-time quantum measurements.

Kirkwood-Dirac, Margenau-Hill, and non-demolition tables; measurement
schemes that access them; work/heat fluctuation relations; OTOC and
Loschmidt-echo probes; free-fermion Ising quench work distributions.
"""

__version__ = "0.1.0"

from .errors import (
    AtomExplosion,
    DimensionMismatch,
    GridTooNarrow,
    IllConditionedGrid,
    NonHermitianInput,
    NotAProjector,
    NotPositiveSemidefinite,
    OrthogonalPostselection,
    QprobError,
    RankDeficiencyWarning,
    SingularThermalState,
    UndefinedAngle,
    ZeroSupportProjector,
)
from .operators import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    SpectralDecomposition,
    commutator,
    expm_hermitian,
    hermitian_eig,
)
from .states import (
    DensityOperator,
    Observable,
    QuantumChannel,
    apply_channel,
    coherence_part,
    dephase,
    gibbs_state,
    pure_state,
)
from .quasiprob import (
    AtomDistribution,
    NdqpTable,
    OutcomePairTable,
    characteristic,
    distribution,
    kdq,
    mhq,
    ndqp,
    no_signaling_residual,
    nonpositivity,
    pair_table,
    tpm_joint,
    weak_value,
)
from .schemes import (
    DetectorSpec,
    PositionDistribution,
    RamseyReadout,
    ReconstructionResult,
    default_u_grid,
    detector_phase,
    detector_position,
    mhq_from_wtpm,
    ndqp_distribution,
    ramsey_simulate,
    reconstruct_distribution,
    wtpm_probability,
)
from .thermo import (
    DrivenQubitPreset,
    ExtractionBoundReport,
    HeatExchangeSpec,
    WorkProtocol,
    WorkVarianceReport,
    average_heat,
    average_work,
    classical_bound,
    driven_qubit_preset,
    exchange_fluctuation,
    extractable_work,
    free_energy_difference,
    heat_table,
    jarzynski_kdq,
    jarzynski_tpm,
    strong_backflow_threshold,
    two_qubit_heat_preset,
    work_distribution,
    work_table,
    work_variance,
)
from .manybody import (
    LoschmidtSpec,
    OtocSpec,
    QubitLoschmidtPreset,
    loschmidt_amplitude,
    loschmidt_kdq,
    oto_commutator,
    otoc,
    otoc_characteristic,
    otoc_kdq,
    otoc_mhq_characteristic,
    qubit_loschmidt_preset,
    two_qubit_otoc_preset,
)
from .ising import (
    IsingQuenchSpec,
    ModeTransitionTable,
    angle_difference,
    assemble_distribution,
    bogoliubov_angle,
    dispersion,
    mode_oracle,
    mode_table,
    moments_sweep,
    quasimomenta,
)
