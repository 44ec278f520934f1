"""Exception hierarchy and shared numerical tolerances.

All tolerances are overridable per call; the module-level constants are the
single source of the defaults quoted in docstrings elsewhere.
"""

# -- default tolerances -------------------------------------------------------

HERMITICITY_TOL = 1e-10        # max |A - A^dag| entrywise
GROUP_TOL = 1e-9               # relative eigenvalue merge tolerance
PROJECTOR_TOL = 1e-10          # idempotency / orthogonality residual
TRACE_TOL = 1e-10              # density trace deviation from 1
EIGENVALUE_CLIP = 1e-10        # negative density eigenvalues clipped up to here
COALESCE_TOL = 1e-9            # relative atom-value coalescing tolerance
CONDITION_LIMIT = 1e12         # reconstruction grid conditioning limit
GRID_MASS_TOL = 1e-3           # detector-grid truncated-mass limit
THERMAL_FLOOR = 1e-300         # smallest admissible Gibbs eigenvalue
ATOM_CAP = 10_000_000          # assembly atom-count cap
CRITICAL_MODE_TOL = 1e-14      # single-particle energy below which a mode is critical
SUPPORT_TOL = 1e-14            # projector support floor in ratio denominators


class QprobError(Exception):
    """Base class for all library errors."""


class NonHermitianInput(QprobError):
    """A matrix required to be Hermitian is not, within tolerance."""

    def __init__(self, residual, tol=HERMITICITY_TOL):
        self.residual = float(residual)
        self.tol = float(tol)
        super().__init__(
            f"matrix is not Hermitian: max |A - A^dag| = {self.residual:.3e} "
            f"exceeds {self.tol:.1e}"
        )


class DimensionMismatch(QprobError):
    """Operands have incompatible dimensions."""


class NotAProjector(QprobError):
    """An operator expected to be an orthogonal projector fails the check."""


class OrthogonalPostselection(QprobError):
    """Weak-value post-selection state orthogonal to the pre-selection."""


class NotPositiveSemidefinite(QprobError):
    """A density operator has an eigenvalue below the admissible floor."""


class SingularThermalState(QprobError):
    """A Gibbs state eigenvalue underflows; its inverse is meaningless."""


class ZeroSupportProjector(QprobError):
    """A projector has (numerically) zero overlap with the state where a
    ratio requires nonzero support."""


class IllConditionedGrid(QprobError):
    """The sample grid for distribution reconstruction is too ill-conditioned."""

    def __init__(self, condition_number, limit=CONDITION_LIMIT):
        self.condition_number = float(condition_number)
        super().__init__(
            f"reconstruction grid condition number {self.condition_number:.3e} "
            f"exceeds {limit:.1e}"
        )


class GridTooNarrow(QprobError):
    """Detector position grid misses more probability mass than allowed."""


class AtomExplosion(QprobError):
    """Distribution assembly exceeded the configured atom-count cap."""


class UndefinedAngle(QprobError):
    """Bogoliubov angle requested at a critical (gapless) mode."""


class RankDeficiencyWarning(UserWarning):
    """Activity decomposition unavailable (mixed state or degenerate branch);
    the classical bound is still computed."""
