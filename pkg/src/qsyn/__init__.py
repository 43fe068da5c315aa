"""Robust coherent-feedback synthesis for pumped optical cavities.

Given a two-mirror parametric cavity whose pump phase and amplitude
fluctuate within known bounds, the package synthesizes an
output-feedback controller guaranteeing a disturbance attenuation level
across the whole fluctuation range, completes it with vacuum noise
ports so it is implementable as a physical cavity, and analyzes the
resulting closed loop (norm sweeps, feasibility maps, quadratic
stability certificates).
"""

from .errors import (
    CertificateUnavailable,
    ConfigError,
    CouplingFailure,
    DimensionError,
    ImaginaryAxisError,
    NoStabilizingSolution,
    NotRealizable,
    NumericalError,
    QsynError,
    SingularMatrixError,
    StructureError,
    UnstableLoop,
)
from .config import RunConfig, load_config, parse_config
from .model import Decomposition, OpoParams, UncertainPlant, build_plant, delta_a, rho_bound
from .riccati import (
    ExistenceReport,
    FeasibilityRecord,
    RiccatiProblem,
    RiccatiSolution,
    assemble_pair,
    epsilon_feasibility,
    existence_check,
    solve_care,
)
from .synthesis import ControllerParams, synthesize, synthesize_nominal
from .realizability import (
    CavityRealization,
    PrReport,
    RealizedController,
    augment_noise,
    extract_cavity,
    pr_check,
)
from .hinf import (
    ClosedLoop,
    RandomBeta,
    SweepRecord,
    ZeroBeta,
    close_loop,
    hinf_norm,
    quadratic_stability_certificate,
    sweep,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateUnavailable",
    "ConfigError",
    "CouplingFailure",
    "DimensionError",
    "ImaginaryAxisError",
    "NoStabilizingSolution",
    "NotRealizable",
    "NumericalError",
    "QsynError",
    "SingularMatrixError",
    "StructureError",
    "UnstableLoop",
    "RunConfig",
    "load_config",
    "parse_config",
    "Decomposition",
    "OpoParams",
    "UncertainPlant",
    "build_plant",
    "delta_a",
    "rho_bound",
    "ExistenceReport",
    "FeasibilityRecord",
    "RiccatiProblem",
    "RiccatiSolution",
    "assemble_pair",
    "epsilon_feasibility",
    "existence_check",
    "solve_care",
    "ControllerParams",
    "synthesize",
    "synthesize_nominal",
    "CavityRealization",
    "PrReport",
    "RealizedController",
    "augment_noise",
    "extract_cavity",
    "pr_check",
    "ClosedLoop",
    "RandomBeta",
    "SweepRecord",
    "ZeroBeta",
    "close_loop",
    "hinf_norm",
    "quadratic_stability_certificate",
    "sweep",
    "__version__",
]
