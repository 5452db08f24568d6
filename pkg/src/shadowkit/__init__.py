"""shadowkit: certified shadowing for nonautonomous difference and differential equations.

Given a linear part, a parameterized nonlinearity with its Lipschitz
envelope, and an approximate solution whose defect is bounded by an
envelope, the package certifies a contraction constant q and a forcing
bound L, solves for the exact nearby solution within the ball of radius
L / (1 - q) by Picard iteration, and differentiates the correction with
respect to the parameter to second order.
"""

from .bridge import (
    QuadratureScheme,
    apply_T_continuous,
    compiled_bridge,
    estimate_bounds_continuous,
    refined_sup,
    scheme_from_dichotomy,
    solve_shadow_continuous,
)
from .dichotomy import DichotomyCertificate, certify_dichotomy
from .errors import (
    ConfigError,
    DomainMismatchError,
    IntegrationError,
    JetUnavailableError,
    NoDichotomyError,
    NonConvergenceError,
    NotAContractionError,
    ShadowkitError,
    SingularLinearPartError,
    WindowBoundsError,
)
from .gallery import GALLERY_NAMES, GalleryProblem, gallery
from .jets import (
    ParameterJet,
    apply_dTdlambda,
    apply_dTdz,
    fd_jet_oracle,
    measured_dz_norm,
    richardson_ratio,
    solve_jet1,
    solve_jet2,
)
from .linear_continuous import LinearPartContinuous, evolution, green_continuous
from .linear_discrete import (
    LinearPartDiscrete,
    ProjectionFamily,
    cocycle,
    green_discrete,
)
from .solver import (
    BoundEstimates,
    ShadowResult,
    apply_T_discrete,
    estimate_bounds_discrete,
    hyers_ulam_constants,
    solve_shadow_discrete,
    uniqueness_probe,
)
from .systems import (
    ContinuousSystem,
    DefectEnvelope,
    DefectReport,
    DiscreteSystem,
    Nonlinearity,
    PseudoOrbitDiscrete,
    PseudoSolutionContinuous,
    defect_continuous,
    defect_discrete,
)
from .windows import ContinuousWindow, DiscreteWindow

__version__ = "0.1.0"

__all__ = [
    "BoundEstimates",
    "ConfigError",
    "ContinuousSystem",
    "ContinuousWindow",
    "DefectEnvelope",
    "DefectReport",
    "DichotomyCertificate",
    "DiscreteSystem",
    "DiscreteWindow",
    "DomainMismatchError",
    "GALLERY_NAMES",
    "GalleryProblem",
    "IntegrationError",
    "JetUnavailableError",
    "LinearPartContinuous",
    "LinearPartDiscrete",
    "NoDichotomyError",
    "NonConvergenceError",
    "NotAContractionError",
    "Nonlinearity",
    "ParameterJet",
    "ProjectionFamily",
    "PseudoOrbitDiscrete",
    "PseudoSolutionContinuous",
    "QuadratureScheme",
    "ShadowResult",
    "ShadowkitError",
    "SingularLinearPartError",
    "WindowBoundsError",
    "apply_T_continuous",
    "apply_T_discrete",
    "apply_dTdlambda",
    "apply_dTdz",
    "certify_dichotomy",
    "cocycle",
    "compiled_bridge",
    "defect_continuous",
    "defect_discrete",
    "estimate_bounds_continuous",
    "estimate_bounds_discrete",
    "evolution",
    "fd_jet_oracle",
    "gallery",
    "green_continuous",
    "green_discrete",
    "hyers_ulam_constants",
    "measured_dz_norm",
    "refined_sup",
    "richardson_ratio",
    "scheme_from_dichotomy",
    "solve_jet1",
    "solve_jet2",
    "solve_shadow_continuous",
    "solve_shadow_discrete",
    "uniqueness_probe",
]
