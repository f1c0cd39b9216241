"""Split-step Fourier simulation and plane-wave stability analysis for the
cubic nonlinear Schrodinger equation on a d-dimensional torus."""

from .errors import (
    BlowUpError,
    ClassSetMismatchError,
    ConfigError,
    DegenerateSignError,
    DomainError,
    MassDeficitError,
    NegativeDiscriminantError,
    NotLinearlyStableError,
    ObserverError,
    TorusNLSError,
    UnstableModeError,
    ZeroCarrierModeError,
)
from .spectral import (
    Grid,
    Mode,
    PlaneWaveSpec,
    SpectralField,
    mod_reduce,
    project_away,
    sobolev_norm,
    trig_interpolate,
)
from .integrator import (
    StepScheme,
    StepVariant,
    integrate,
    linear_flow,
    nonlinear_flow,
    step,
)
from .stability import (
    ComboWitness,
    FrequencyTable,
    LinearStabilityReport,
    ResonanceReport,
    build_frequency_table,
    cfl_max_h,
    check_assumption1,
    check_assumption2,
    growth_factor,
    mode_matrix,
    mu,
    n_of_j,
    omega,
    varpi,
)
from .transforms import (
    DiagonalizerSet,
    XiField,
    build_diagonalizers,
    u_to_xi,
    xi_to_u,
)
from .diagnostics import (
    InstabilityReport,
    SuperActionSet,
    TrajectoryDiagnostics,
    TrajectoryRecorder,
    default_snapshot_windows,
    detect_instability,
    emit,
    super_actions,
    weighted_deviation,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "Grid",
    "Mode",
    "PlaneWaveSpec",
    "SpectralField",
    "mod_reduce",
    "project_away",
    "sobolev_norm",
    "trig_interpolate",
    "StepScheme",
    "StepVariant",
    "integrate",
    "linear_flow",
    "nonlinear_flow",
    "step",
    "ComboWitness",
    "FrequencyTable",
    "LinearStabilityReport",
    "ResonanceReport",
    "build_frequency_table",
    "cfl_max_h",
    "check_assumption1",
    "check_assumption2",
    "growth_factor",
    "mode_matrix",
    "mu",
    "n_of_j",
    "omega",
    "varpi",
    "DiagonalizerSet",
    "XiField",
    "build_diagonalizers",
    "u_to_xi",
    "xi_to_u",
    "InstabilityReport",
    "SuperActionSet",
    "TrajectoryDiagnostics",
    "TrajectoryRecorder",
    "default_snapshot_windows",
    "detect_instability",
    "emit",
    "super_actions",
    "weighted_deviation",
    "TorusNLSError",
    "BlowUpError",
    "ClassSetMismatchError",
    "ConfigError",
    "DegenerateSignError",
    "DomainError",
    "MassDeficitError",
    "NegativeDiscriminantError",
    "NotLinearlyStableError",
    "ObserverError",
    "UnstableModeError",
    "ZeroCarrierModeError",
]
