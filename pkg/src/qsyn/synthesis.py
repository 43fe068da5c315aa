"""Output-feedback controller synthesis from the scaled Riccati pair.

``synthesize`` solves the primal and dual equations at a given
attenuation level and uncertainty scaling, checks the spectral coupling
condition between the two solutions, and assembles the controller
state-space matrices.  ``synthesize_nominal`` is the same construction
on the fluctuation-free plant, where the uncertainty channels vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import mat
from .errors import CouplingFailure, SingularMatrixError
from .model import Decomposition, UncertainPlant
from .riccati import RiccatiSolution, assemble_pair, solve_care


@dataclass(frozen=True, eq=False)
class ControllerParams:
    """State-space controller with the Riccati data that produced it."""

    ac: np.ndarray
    bc: np.ndarray
    cc: np.ndarray
    x: RiccatiSolution
    y: RiccatiSolution
    coupling_radius: float
    gamma: float
    epsilon: float
    rho: float
    kind: Decomposition

    @property
    def order(self) -> int:
        return self.ac.shape[0]


def coupling_radius(x: np.ndarray, y: np.ndarray) -> float:
    """Spectral radius of the Riccati-solution product X Y."""
    return float(np.abs(mat.eigenvalues(x @ y)).max())


def synthesize(plant: UncertainPlant, gamma: float, epsilon: float) -> ControllerParams:
    """Robust attenuation controller at level gamma with scaling epsilon.

    Raises :class:`NoStabilizingSolution` when either Riccati equation
    has no stabilizing solution and :class:`CouplingFailure` when the
    spectral radius of X Y reaches one.
    """
    primal, dual = assemble_pair(plant, gamma, epsilon)
    x_sol = solve_care(primal)
    y_sol = solve_care(dual)
    x, y = x_sol.x, y_sol.x

    radius = coupling_radius(x, y)
    if radius >= 1.0:
        raise CouplingFailure(radius)

    a, b1, b2 = plant.a, plant.b1, plant.b2
    c1, d1, c2, d2 = plant.c1, plant.d1, plant.c2, plant.d2
    n = a.shape[0]
    ig2 = 1.0 / gamma**2

    g = d1.T @ d1
    cc = -mat.solve_linear(g, b1.T @ x + d1.T @ c1)

    gain_weight = ig2 * (d2 @ d2.T)
    rhs = (y @ c2.T + ig2 * (b2 @ d2.T)) @ mat.solve_linear(
        gain_weight, np.eye(gain_weight.shape[0])
    )
    try:
        bc = mat.solve_linear(np.eye(n) - y @ x, rhs)
    except SingularMatrixError as exc:
        raise CouplingFailure(radius) from exc

    correction = (
        epsilon * plant.rho**2 * (plant.h1 @ plant.h1.T)
        + ig2 * ((b2 - bc @ d2) @ b2.T)
    ) @ x
    ac = a + b1 @ cc - bc @ c2 + correction

    return ControllerParams(
        ac=ac,
        bc=bc,
        cc=cc,
        x=x_sol,
        y=y_sol,
        coupling_radius=radius,
        gamma=gamma,
        epsilon=epsilon,
        rho=plant.rho,
        kind=plant.decomposition,
    )


def synthesize_nominal(plant: UncertainPlant, gamma: float) -> ControllerParams:
    """Controller for the fluctuation-free model (rho = 0).

    The scaling drops out of every coefficient when the uncertainty
    channels are zero, so any positive placeholder works; 1.0 is used.
    """
    if plant.decomposition is not Decomposition.NOMINAL:
        raise ValueError("nominal synthesis expects a nominal-decomposition plant")
    return synthesize(plant, gamma, 1.0)
