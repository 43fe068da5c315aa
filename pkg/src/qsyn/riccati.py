"""Scaled algebraic Riccati equations for robust attenuation synthesis.

The synthesis couples two continuous-time algebraic Riccati equations in
canonical form

    Ahat^T X + X Ahat - X Bhat X + Chat = 0,

one driven by the regulated output (primal) and one by the measurement
(dual, stored transposed into the same canonical form).  Both carry the
uncertainty scaling ``epsilon`` and the attenuation level ``gamma``.
Solutions are computed from the stable invariant subspace of the
associated Hamiltonian matrix.

For the two-mirror cavity model the existence question reduces to scalar
inequalities in the physical rates; ``existence_check`` evaluates them
and ``epsilon_feasibility`` inverts them into admissible scaling
intervals.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import mat
from .errors import ImaginaryAxisError, NoStabilizingSolution, NumericalError, SingularMatrixError
from .model import Decomposition, OpoParams, UncertainPlant, rho_bound

#: Certified residual factor: solutions satisfy
#: ||residual|| <= RESIDUAL_FACTOR * (1 + ||X||)^2 * max coefficient norm.
RESIDUAL_FACTOR = 1e-8


class RiccatiSide(enum.Enum):
    PRIMAL = "primal"
    DUAL = "dual"
    GENERIC = "generic"


@dataclass(frozen=True, eq=False)
class RiccatiProblem:
    """Canonical-form Riccati coefficients (quadratic term symmetric)."""

    ahat: np.ndarray
    bhat: np.ndarray
    chat: np.ndarray
    side: RiccatiSide = RiccatiSide.GENERIC

    def __post_init__(self) -> None:
        n = self.ahat.shape[0]
        for name in ("ahat", "bhat", "chat"):
            m = mat.as_matrix(getattr(self, name), name, square=True)
            if m.shape != (n, n):
                raise ValueError("coefficient matrices must share one size")
        scale = max(mat.frobenius(self.bhat), mat.frobenius(self.chat), 1.0)
        for name in ("bhat", "chat"):
            m = getattr(self, name)
            if mat.frobenius(m - m.T) > 1e-10 * scale:
                raise ValueError(f"{name} is not symmetric")
            object.__setattr__(self, name, 0.5 * (m + m.T))

    def bhat_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the (symmetric) quadratic coefficient."""
        return float(mat.eigenvalues(self.bhat).real.min())


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    """Stabilizing solution with its certification data."""

    x: np.ndarray
    residual_norm: float
    closed_loop_eigs: np.ndarray


def solve_care(problem: RiccatiProblem) -> RiccatiSolution:
    """Stabilizing solution of the canonical Riccati equation.

    Builds the Hamiltonian ``[[Ahat, -Bhat], [-Chat, -Ahat^T]]``, takes
    the basis of its stable invariant subspace ``[U1; U2]`` and returns
    ``X = U2 U1^{-1}`` (symmetrized).  Failure modes map to
    :class:`NoStabilizingSolution`: a Hamiltonian eigenvalue on the
    imaginary axis, a wrong stable dimension, or a (near-)singular U1.
    """
    ah, bh, ch = problem.ahat, problem.bhat, problem.chat
    n = ah.shape[0]
    if problem.side is RiccatiSide.PRIMAL:
        min_eig = problem.bhat_min_eigenvalue()
        if min_eig < -1e-12 * max(1.0, mat.frobenius(bh)):
            warnings.warn(
                "primal quadratic coefficient is indefinite "
                f"(min eigenvalue {min_eig:.3e}); existence theory does not apply",
                RuntimeWarning,
                stacklevel=2,
            )
    hamiltonian = np.block([[ah, -bh], [-ch, -ah.T]])
    try:
        basis = mat.stable_subspace(hamiltonian)
    except ImaginaryAxisError as exc:
        raise NoStabilizingSolution(
            f"Hamiltonian eigenvalue on the imaginary axis: {exc}"
        ) from exc
    if basis.shape[1] != n:
        raise NoStabilizingSolution(
            f"stable subspace has dimension {basis.shape[1]}, expected {n}"
        )
    u1, u2 = basis[:n, :], basis[n:, :]
    try:
        x = mat.solve_linear(u1.T, u2.T).T
    except SingularMatrixError as exc:
        raise NoStabilizingSolution(f"singular stable-basis block: {exc}") from exc
    x = 0.5 * (x + x.T)
    residual = mat.frobenius(ah.T @ x + x @ ah - x @ bh @ x + ch)
    coeff_scale = max(mat.frobenius(ah), mat.frobenius(bh), mat.frobenius(ch))
    bound = RESIDUAL_FACTOR * (1.0 + mat.frobenius(x)) ** 2 * coeff_scale
    if residual > bound:
        raise NumericalError(
            f"Riccati residual {residual:.3e} exceeds certified bound {bound:.3e}"
        )
    eigs = mat.eigenvalues(ah - bh @ x)
    if float(eigs.real.max()) >= 0.0:
        raise NoStabilizingSolution(
            f"candidate solution is not stabilizing (max Re = {eigs.real.max():.3e})"
        )
    return RiccatiSolution(x=x, residual_norm=residual, closed_loop_eigs=eigs)


def assemble_pair(
    plant: UncertainPlant, gamma: float, epsilon: float
) -> tuple[RiccatiProblem, RiccatiProblem]:
    """Primal and dual canonical Riccati problems at (gamma, epsilon)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    a, b1, b2 = plant.a, plant.b1, plant.b2
    c1, d1, c2, d2 = plant.c1, plant.d1, plant.c2, plant.d2
    h1, e1, rho = plant.h1, plant.e1, plant.rho
    n = a.shape[0]
    eye = np.eye(n)
    ig2 = 1.0 / gamma**2

    g = d1.T @ d1
    g_inv = mat.solve_linear(g, np.eye(g.shape[0]))
    prim_a = a - b1 @ g_inv @ d1.T @ c1
    prim_b = b1 @ g_inv @ b1.T - epsilon * rho**2 * (h1 @ h1.T) - ig2 * (b2 @ b2.T)
    prim_c = c1.T @ (eye - d1 @ g_inv @ d1.T) @ c1 + (1.0 / epsilon) * (e1.T @ e1)

    g0 = d2 @ d2.T
    g0_inv = mat.solve_linear(g0, np.eye(g0.shape[0]))
    dual_a = (a - b2 @ d2.T @ g0_inv @ c2).T
    dual_b = gamma**2 * (c2.T @ g0_inv @ c2) - (1.0 / epsilon) * (e1.T @ e1) - c1.T @ c1
    dual_c = ig2 * (b2 @ (np.eye(b2.shape[1]) - d2.T @ g0_inv @ d2) @ b2.T) + epsilon * rho**2 * (h1 @ h1.T)

    return (
        RiccatiProblem(prim_a, prim_b, prim_c, RiccatiSide.PRIMAL),
        RiccatiProblem(dual_a, dual_b, dual_c, RiccatiSide.DUAL),
    )


@dataclass(frozen=True)
class ExistenceReport:
    """Closed-form existence conditions at one (gamma, epsilon) point.

    ``branch`` tells which Riccati equation the conditions govern
    ("primal" when kappa2 - kappa1/gamma^2 > 0, else "dual").  Each entry
    is (name, slack, satisfied): slack >= 0 (or > 0 for strict entries)
    means satisfied.
    """

    branch: str
    inequalities: tuple[tuple[str, float, bool], ...]

    @property
    def satisfied(self) -> bool:
        return all(ok for _, _, ok in self.inequalities)


def existence_inequalities(
    params: OpoParams,
    decomposition: Decomposition,
    gamma: float,
    epsilon: float,
    rho: float,
) -> ExistenceReport:
    """Evaluate the scalar existence conditions at an explicit bound rho."""
    if gamma <= 0 or epsilon <= 0:
        raise ValueError("gamma and epsilon must be positive")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    k1, k2, chi = params.kappa1, params.kappa2, params.chi
    g2 = gamma**2
    selector = k2 - k1 / g2
    dk = k1 - k2
    entries: list[tuple[str, float, bool]] = []
    if decomposition is Decomposition.NOMINAL:
        # no uncertainty channel: only the branch/controllability scalars remain
        if selector > 0:
            return ExistenceReport("primal", (("definiteness", selector, True),))
        floor = k1 * g2 - k2 - 1.0 / epsilon
        return ExistenceReport("dual", (("epsilon_floor", floor, floor >= 0.0),))
    if decomposition is Decomposition.PASSIVE:
        gain_terms = (0.0,)
    else:  # active: the detuned axes split the spectral-gap condition in two
        gain_terms = (-4.0 * chi * dk, 4.0 * chi * dk)
    rho_sq = rho**2
    if selector > 0:
        slack = selector - chi**2 * epsilon * rho_sq
        entries.append(("definiteness", slack, slack > 0.0))
        for label, gain in _gap_labels(gain_terms):
            if decomposition is Decomposition.PASSIVE:
                bracket = dk**2 - 4.0 * chi**2 * rho_sq
            else:
                bracket = dk**2 + gain + 4.0 * chi**2 * (1.0 - rho_sq)
            value = epsilon * g2 * bracket + 4.0 * (g2 * k2 - k1)
            entries.append((label, value, value >= 0.0))
        return ExistenceReport("primal", tuple(entries))
    floor = k1 * g2 - k2 - 1.0 / epsilon
    entries.append(("epsilon_floor", floor, floor >= 0.0))
    for label, gain in _gap_labels(gain_terms):
        if decomposition is Decomposition.PASSIVE:
            bracket = dk**2 - 4.0 * chi**2 * rho_sq
        else:
            bracket = dk**2 + gain + 4.0 * chi**2 * (1.0 - rho_sq)
        value = 4.0 * chi**2 * rho_sq * epsilon * (g2 * k1 - k2) + bracket
        entries.append((label, value, value >= 0.0))
    return ExistenceReport("dual", tuple(entries))


def _gap_labels(gain_terms: tuple[float, ...]):
    if len(gain_terms) == 1:
        yield "spectral_gap", gain_terms[0]
    else:
        yield "spectral_gap_plus_axis", gain_terms[0]
        yield "spectral_gap_minus_axis", gain_terms[1]


def existence_check(
    params: OpoParams,
    decomposition: Decomposition,
    gamma: float,
    epsilon: float,
) -> ExistenceReport:
    """Existence conditions with rho taken from the decomposition's own
    fluctuation bound."""
    return existence_inequalities(
        params, decomposition, gamma, epsilon, rho_bound(params, decomposition)
    )


@dataclass(frozen=True)
class FeasibilityRecord:
    """Admissible uncertainty-scaling interval at one (gamma, rho)."""

    gamma: float
    rho: float
    eps_lower: float
    eps_upper: float
    feasible: bool


def epsilon_feasibility(
    params: OpoParams,
    decomposition: Decomposition,
    gamma_grid,
    rho_list,
) -> list[FeasibilityRecord]:
    """Closed-form inversion of the existence conditions over a grid.

    On the primal branch (kappa2 - kappa1/gamma^2 > 0) the admissible set
    is the open interval (0, (kappa2 - kappa1/gamma^2) / (chi^2 rho^2));
    the spectral-gap conditions never bind earlier.  On the dual branch
    the set is a half-line with eps_lower = 1/(kappa1 gamma^2 - kappa2)
    when that denominator is positive, and empty otherwise.
    """
    records: list[FeasibilityRecord] = []
    k1, k2, chi = params.kappa1, params.kappa2, params.chi
    for gamma in gamma_grid:
        if gamma <= 0:
            raise ValueError("gamma grid entries must be positive")
        g2 = gamma**2
        selector = k2 - k1 / g2
        for rho in rho_list:
            if rho < 0:
                raise ValueError("rho entries must be non-negative")
            if selector > 0:
                denom = chi**2 * rho**2
                upper = selector / denom if denom > 0 else math.inf
                records.append(FeasibilityRecord(gamma, rho, 0.0, upper, True))
                continue
            floor_den = k1 * g2 - k2
            if floor_den > 0:
                records.append(
                    FeasibilityRecord(gamma, rho, 1.0 / floor_den, math.inf, True)
                )
            else:
                records.append(FeasibilityRecord(gamma, rho, 0.0, 0.0, False))
    return records


def eps_upper_by_bisection(
    params: OpoParams,
    decomposition: Decomposition,
    gamma: float,
    rho: float,
    *,
    lo: float = 1e-12,
    hi: float = 1e6,
    iters: int = 60,
) -> float:
    """Upper endpoint of the primal-branch epsilon interval by bisection
    on the inequality report (fallback/cross-check for the closed form).

    Returns 0.0 when even ``lo`` is infeasible and ``inf`` when ``hi`` is
    still feasible.
    """

    def ok(eps: float) -> bool:
        report = existence_inequalities(params, decomposition, gamma, eps, rho)
        return report.branch == "primal" and report.satisfied

    if not ok(lo):
        return 0.0
    if ok(hi):
        return math.inf
    a, b = lo, hi
    for _ in range(iters):
        mid = 0.5 * (a + b)
        if ok(mid):
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
