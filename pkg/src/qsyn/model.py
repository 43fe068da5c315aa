"""Quadrature-space model of a two-mirror optical parametric oscillator
whose pump may fluctuate in phase and amplitude.

The physical cavity mode couples to two external fields: mirror 1 carries
the disturbance input and the measured output, mirror 2 the control input
and the regulated output.  Pump phase detuning dphi and relative amplitude
deviation dbeta shift the nonlinear-gain term of the drift matrix; the
shift is written as a norm-bounded structured perturbation
``delta_A = H1 F E1`` with ``F^T F <= rho^2 I`` so that robust synthesis
can absorb it.  Two decompositions of the same physics are supported
(plus the fluctuation-free nominal model):

* ``PASSIVE`` — nominal drift keeps only the damping term; the whole gain
  block is treated as uncertainty (bound rho = 1 + beta_bound).
* ``ACTIVE``  — nominal drift keeps the dphi = 0 gain; only the deviation
  is uncertainty (bound rho = sqrt(2 - 2 cos(alpha)) + beta_bound for
  phase range [-alpha, alpha]).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import mat

#: Canonical quadrature commutation block [[0, 1], [-1, 0]].
SYMPLECTIC_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


class Decomposition(enum.Enum):
    """How the fluctuating gain is split into nominal part + uncertainty."""

    PASSIVE = "passive"
    ACTIVE = "active"
    NOMINAL = "nominal"


@dataclass(frozen=True)
class OpoParams:
    """Cavity and pump parameters.

    kappa1, kappa2 : mirror coupling rates (positive); total kappa is
        their sum.
    chi : nominal pump gain magnitude (non-negative).
    phase_range : closed interval of admissible pump phase detuning,
        containing 0, inside [-pi, pi].
    beta_bound : bound on the relative pump amplitude deviation
        |dbeta/beta| (0 <= beta_bound < 1).
    """

    kappa1: float
    kappa2: float
    chi: float
    phase_range: tuple[float, float] = (-math.pi, math.pi)
    beta_bound: float = 0.0

    def __post_init__(self) -> None:
        if not (self.kappa1 > 0 and self.kappa2 > 0):
            raise ValueError("mirror rates kappa1, kappa2 must be positive")
        if self.chi < 0:
            raise ValueError("gain chi must be non-negative")
        lo, hi = self.phase_range
        if not (lo <= 0.0 <= hi):
            raise ValueError("phase_range must contain 0")
        if lo < -math.pi - 1e-12 or hi > math.pi + 1e-12:
            raise ValueError("phase_range must lie within [-pi, pi]")
        if not (0.0 <= self.beta_bound < 1.0):
            raise ValueError("beta_bound must satisfy 0 <= beta_bound < 1")

    @property
    def kappa(self) -> float:
        return self.kappa1 + self.kappa2


@dataclass(frozen=True, eq=False)
class UncertainPlant:
    """State-space data of the uncertain plant.

    State is the quadrature pair of the cavity mode; inputs are
    (control u, disturbance w), outputs (regulated z, measured y):

        dx = (A + delta_A) x dt + B1 du + B2 dw
        z  = C1 x + D1 u
        y  = C2 x + D2 w

    with delta_A = H1 F(t) E1, F^T F <= rho^2 I.
    """

    params: OpoParams
    decomposition: Decomposition
    a: np.ndarray
    b1: np.ndarray
    b2: np.ndarray
    c1: np.ndarray
    d1: np.ndarray
    c2: np.ndarray
    d2: np.ndarray
    h1: np.ndarray
    e1: np.ndarray
    rho: float
    theta: np.ndarray = field(default_factory=lambda: SYMPLECTIC_J.copy())

    def __post_init__(self) -> None:
        n = self.a.shape[0]
        for name in ("a", "b1", "b2", "c1", "d1", "c2", "d2", "h1", "e1", "theta"):
            mat.as_matrix(getattr(self, name), name)
        if self.a.shape != (n, n) or self.theta.shape != (n, n):
            raise ValueError("a and theta must be square and same-sized")
        if mat.frobenius(self.theta + self.theta.T) > 1e-12:
            raise ValueError("theta must be antisymmetric")
        if mat.frobenius(self.theta @ self.theta + np.eye(n)) > 1e-12:
            raise ValueError("theta must square to -I")
        if self.rho < 0:
            raise ValueError("uncertainty bound rho must be non-negative")
        if self.decomposition is Decomposition.NOMINAL:
            if self.rho != 0.0 or mat.frobenius(self.h1) > 0 or mat.frobenius(self.e1) > 0:
                raise ValueError("nominal plant must carry no uncertainty channel")


def rho_bound(params: OpoParams, decomposition: Decomposition) -> float:
    """Smallest uniform gain bound on the uncertainty block F(t) over the
    declared phase range and amplitude deviation."""
    if decomposition is Decomposition.NOMINAL:
        return 0.0
    if decomposition is Decomposition.PASSIVE:
        return 1.0 + params.beta_bound
    alpha = max(abs(params.phase_range[0]), abs(params.phase_range[1]))
    return math.sqrt(max(2.0 - 2.0 * math.cos(alpha), 0.0)) + params.beta_bound


def build_plant(params: OpoParams, decomposition: Decomposition) -> UncertainPlant:
    """Assemble the uncertain quadrature plant for one decomposition."""
    kappa = params.kappa
    eye = np.eye(2)
    if decomposition is Decomposition.PASSIVE:
        a = -(kappa / 2.0) * eye
        h1 = params.chi * eye
        e1 = eye.copy()
        rho = rho_bound(params, decomposition)
    elif decomposition is Decomposition.ACTIVE:
        a = -(kappa / 2.0) * eye + params.chi * np.diag([1.0, -1.0])
        h1 = params.chi * eye
        e1 = eye.copy()
        rho = rho_bound(params, decomposition)
    elif decomposition is Decomposition.NOMINAL:
        # the true dphi = 0 plant: same drift as the active nominal part
        a = -(kappa / 2.0) * eye + params.chi * np.diag([1.0, -1.0])
        h1 = np.zeros((2, 2))
        e1 = np.zeros((2, 2))
        rho = 0.0
    else:  # pragma: no cover
        raise ValueError(f"unknown decomposition {decomposition!r}")
    sk1 = math.sqrt(params.kappa1)
    sk2 = math.sqrt(params.kappa2)
    return UncertainPlant(
        params=params,
        decomposition=decomposition,
        a=a,
        b1=sk2 * eye,
        b2=sk1 * eye,
        c1=sk2 * eye,
        d1=-eye,
        c2=sk1 * eye,
        d2=-eye,
        h1=h1,
        e1=e1,
        rho=rho,
    )


def delta_a(
    params: OpoParams,
    decomposition: Decomposition,
    dphi: float,
    dbeta_ratio: float = 0.0,
) -> np.ndarray:
    """Drift perturbation at a frozen fluctuation (dphi, dbeta/beta).

    The passive split carries the whole gain block; the active and
    nominal splits carry only the deviation from the dphi = 0 gain.  The
    sum ``A + delta_a`` is the same physical drift for every split.
    """
    lo, hi = params.phase_range
    tol = 1e-12
    if not (lo - tol <= dphi <= hi + tol):
        raise ValueError(f"dphi={dphi:.6g} outside phase range [{lo:.6g}, {hi:.6g}]")
    if not (0.0 <= dbeta_ratio <= params.beta_bound + tol):
        raise ValueError(
            f"dbeta_ratio={dbeta_ratio:.6g} outside [0, {params.beta_bound:.6g}]"
        )
    c, s = math.cos(dphi), math.sin(dphi)
    rot = np.array([[c, s], [s, -c]])
    chi = params.chi
    if decomposition is Decomposition.PASSIVE:
        return chi * (1.0 + dbeta_ratio) * rot
    # active / nominal: deviation from the dphi = 0 gain block
    base = np.array([[-1.0 + c, s], [s, 1.0 - c]])
    return chi * (base + dbeta_ratio * rot)
