"""Correlations and entanglement of two decay fragments coupled as oscillators."""
from .analytic import (
    WidthTrajectory,
    alpha,
    alpha_bounds,
    alpha_free,
    perfect_correlation_density,
    phase_coeff,
    wavefunction,
    wavefunction_density,
    width_trajectory,
)
from .entangle import (
    EntanglementReport,
    entanglement_report,
    free_decay_exponent,
    momentum_profile,
    purity_trace,
    schmidt_per_volume,
)
from .errors import (
    ConfigError,
    DomainTooSmallError,
    FragcorrError,
    NumericalError,
    ParameterDomainError,
    PreconditionError,
    RegimeError,
    ResolutionError,
    ShapeError,
)
from .model import (
    MomentState,
    Regime,
    RegimeTag,
    SystemParams,
    classify_regime,
    derive_params,
    min_uncertainty_state,
)
from .moments import (
    AlignmentReport,
    alignment_report,
    evolve_moments,
    mean_position,
    tan_theta,
    tan_theta_asymptote,
    variance_X,
)

__version__ = "0.1.0"
