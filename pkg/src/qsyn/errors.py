"""Exception taxonomy.

Every failure mode the package reports deliberately maps onto one of these
classes; the CLI turns them into process exit codes (see qsyn.cli).
"""

from __future__ import annotations


class QsynError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(QsynError):
    """Malformed configuration or input file (CLI exit code 1)."""


class DimensionError(QsynError):
    """Matrix arguments with incompatible or invalid shapes."""


class NumericalError(QsynError):
    """Iteration failed to converge, bracket expansion failed, or a
    residual exceeded its certified bound (CLI exit code 3)."""


class SingularMatrixError(NumericalError):
    """Linear solve hit a (near-)singular coefficient matrix."""


class ImaginaryAxisError(NumericalError):
    """An eigenvalue sits on the imaginary axis where a spectral gap is
    required (stable/antistable splitting undefined)."""


class NoStabilizingSolution(QsynError):
    """The algebraic Riccati equation admits no stabilizing solution
    (CLI exit code 2).  ``reason`` distinguishes an imaginary-axis
    Hamiltonian eigenvalue from a singular basis block."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class CouplingFailure(QsynError):
    """Spectral-radius coupling condition failed: zeta(XY) >= 1
    (CLI exit code 2)."""

    def __init__(self, radius: float):
        super().__init__(f"coupling condition failed: zeta(XY) = {radius:.6g} >= 1")
        self.radius = radius


class NotRealizable(QsynError):
    """Noise augmentation cannot produce a physically realizable
    controller (a canonical pairing block of the commutation defect is
    negative)."""

    def __init__(self, block_value: float):
        super().__init__(
            f"noise factorization infeasible: pairing block {block_value:.6g} < 0"
        )
        self.block_value = block_value


class StructureError(QsynError):
    """Controller matrices lack the structure an operation requires
    (e.g. cavity extraction on a non-passive realization)."""


class UnstableLoop(QsynError):
    """Closed-loop state matrix is not Hurwitz where stability is a
    precondition."""


class CertificateUnavailable(QsynError):
    """The quadratic-stability certificate Riccati equation has no
    positive stabilizing solution at the requested attenuation level."""
