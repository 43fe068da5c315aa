"""Physical realizability of the synthesized controller.

A quadrature-form system can be implemented as an open quantum device
only when its drift and input matrices preserve the canonical
commutation relations:

    Ac Theta + Theta Ac^T + sum_i B_i J B_i^T = 0,

with Theta the state commutation matrix and J the single-field
symplectic form, and when one input field is canonically paired with the
emitted output, B = Theta Cc^T J.  ``augment_noise`` completes a bare
controller with the extra vacuum-noise ports that enforce these
constraints; ``pr_check`` verifies them; ``extract_cavity`` reads mirror
coupling rates back out of a realization whose blocks are scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import mat
from .errors import NotRealizable, StructureError
from .model import SYMPLECTIC_J
from .synthesis import ControllerParams

#: Relative tolerance for the commutation / pairing residual checks.
PR_TOL = 1e-8

#: Threshold below which the leftover commutation defect needs no extra port.
NEGLIGIBLE_DEFECT = 1e-10


def block_symplectic(size: int) -> np.ndarray:
    """Block-diagonal symplectic form for ``size`` quadratures."""
    if size % 2 != 0:
        raise ValueError("quadrature dimension must be even")
    out = np.zeros((size, size))
    for k in range(0, size, 2):
        out[k : k + 2, k : k + 2] = SYMPLECTIC_J
    return out


@dataclass(frozen=True, eq=False)
class PrReport:
    """Residuals of the physical-realizability conditions."""

    commutation_residual: float
    pairing_residual: float
    passed: bool


@dataclass(frozen=True, eq=False)
class CavityRealization:
    """Mirror coupling rates of a controller that is itself one cavity."""

    kappa1: float
    kappa2: float
    kappa3: float
    rate_residual: float

    @property
    def kappa(self) -> float:
        return self.kappa1 + self.kappa2 + self.kappa3


@dataclass(frozen=True, eq=False)
class RealizedController:
    """Controller together with its commutation-completing noise ports."""

    controller: ControllerParams
    theta: np.ndarray
    bv1: np.ndarray
    bv2: np.ndarray
    report: PrReport
    cavity: CavityRealization | None

    @property
    def noise_blocks(self) -> tuple[np.ndarray, ...]:
        blocks = [self.controller.bc, self.bv1]
        if self.bv2.shape[1]:
            blocks.append(self.bv2)
        return tuple(blocks)


def output_coupling(cc: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Input block canonically paired with the emitted field, Theta Cc^T J."""
    return theta @ cc.T @ block_symplectic(cc.shape[0])


def _pairing_residual(block: np.ndarray, expected: np.ndarray) -> float:
    """Distance to the canonical pairing, up to quadrature mirroring.

    Both quadrature orderings of the emitted field are physically
    equivalent, so the residual is taken against the expected coupling
    and its mirrored copy S expected S (S swaps each quadrature pair).
    """
    s_rows = np.zeros((expected.shape[0], expected.shape[0]))
    for k in range(0, expected.shape[0], 2):
        s_rows[k, k + 1] = s_rows[k + 1, k] = 1.0
    s_cols = np.zeros((expected.shape[1], expected.shape[1]))
    for k in range(0, expected.shape[1], 2):
        s_cols[k, k + 1] = s_cols[k + 1, k] = 1.0
    mirrored = s_rows @ expected @ s_cols
    return min(mat.frobenius(block - expected), mat.frobenius(block - mirrored))


def pr_check(
    ac: np.ndarray,
    noise_blocks,
    cc: np.ndarray | None = None,
    *,
    theta: np.ndarray | None = None,
    tol: float = PR_TOL,
) -> PrReport:
    """Residuals of the commutation and output-pairing conditions.

    ``noise_blocks`` is the sequence of input matrices, one per field
    (each with an even number of columns).  When ``cc`` is given and
    nonzero, at least one block must realize the canonical output
    coupling; the pairing residual is the best match over blocks.
    """
    ac = mat.as_matrix(ac, "ac", square=True)
    n = ac.shape[0]
    if theta is None:
        theta = block_symplectic(n)
    total = ac @ theta + theta @ ac.T
    scale = max(1.0, mat.frobenius(ac))
    for i, block in enumerate(noise_blocks):
        b = mat.as_matrix(block, f"noise block {i}")
        if b.shape[0] != n or b.shape[1] % 2 != 0:
            raise ValueError(f"noise block {i} has shape {b.shape}, expected ({n}, even)")
        if b.shape[1] == 0:
            continue
        total = total + b @ block_symplectic(b.shape[1]) @ b.T
        scale = max(scale, mat.frobenius(b) ** 2)
    commutation = mat.frobenius(total)

    pairing = 0.0
    if cc is not None and mat.frobenius(cc) > 0.0:
        expected = output_coupling(cc, theta)
        candidates = [
            _pairing_residual(np.asarray(b, dtype=float), expected)
            for b in noise_blocks
            if np.asarray(b).shape == expected.shape
        ]
        pairing = min(candidates) if candidates else mat.frobenius(expected)
        scale = max(scale, mat.frobenius(expected))

    passed = commutation <= tol * scale and pairing <= tol * scale
    return PrReport(commutation_residual=commutation, pairing_residual=pairing, passed=passed)


def _skew_noise_block(defect: np.ndarray) -> np.ndarray:
    """Real block B with B J B^T equal to the antisymmetric ``defect``.

    Eigenpairs +i*lam (lam > 0) of the defect give columns
    sqrt(2*lam) * (Re w, Im w); eigenvector phases are normalized so the
    construction is deterministic.
    """
    n = defect.shape[0]
    scale = max(1.0, mat.frobenius(defect))
    if mat.frobenius(defect + defect.T) > 1e-8 * scale:
        raise NotRealizable(float(mat.frobenius(defect + defect.T)))
    t, q = mat.schur_decomposition(defect.astype(complex))
    columns: list[np.ndarray] = []
    for k in range(n):
        lam = t[k, k].imag
        if lam <= 1e-12 * scale:
            continue
        w = q[:, k]
        mags = np.abs(w)
        top = float(mags.max())
        idx = int(np.nonzero(mags >= top * (1.0 - 1e-8))[0][0])
        w = w * (abs(w[idx]) / w[idx])
        factor = math.sqrt(2.0 * lam)
        columns.append(factor * w.real)
        columns.append(factor * w.imag)
    if not columns:
        return np.zeros((n, 0))
    block = np.column_stack(columns)
    rebuilt = block @ block_symplectic(block.shape[1]) @ block.T
    if mat.frobenius(rebuilt - defect) > 1e-8 * scale:
        raise NotRealizable(float(mat.frobenius(rebuilt - defect)))
    return block


def augment_noise(controller: ControllerParams, theta: np.ndarray | None = None) -> RealizedController:
    """Complete a controller with the vacuum ports that make it physical.

    The first added port realizes the canonical output pairing
    Theta Cc^T J; a second port absorbs whatever commutation defect
    remains.  The returned realization always satisfies ``pr_check`` up
    to numerical residuals.
    """
    n = controller.order
    if theta is None:
        theta = block_symplectic(n)
    ac, bc, cc = controller.ac, controller.bc, controller.cc
    bv1 = output_coupling(cc, theta)
    defect = -(
        ac @ theta
        + theta @ ac.T
        + bc @ block_symplectic(bc.shape[1]) @ bc.T
        + bv1 @ block_symplectic(bv1.shape[1]) @ bv1.T
    )
    scale = max(1.0, mat.frobenius(ac), mat.frobenius(bc) ** 2, mat.frobenius(bv1) ** 2)
    if mat.frobenius(defect) <= NEGLIGIBLE_DEFECT * scale:
        bv2 = np.zeros((n, 0))
    else:
        bv2 = _skew_noise_block(defect)
    blocks = [bc, bv1] + ([bv2] if bv2.shape[1] else [])
    report = pr_check(ac, blocks, cc, theta=theta)
    try:
        cavity = extract_cavity(ac, blocks)
    except StructureError:
        cavity = None
    return RealizedController(
        controller=controller, theta=theta, bv1=bv1, bv2=bv2, report=report, cavity=cavity
    )


def _scalar_multiple(m: np.ndarray, name: str, rtol: float = 1e-6) -> float:
    if m.shape[0] != m.shape[1]:
        raise StructureError(f"{name} is not square: {m.shape}")
    n = m.shape[0]
    s = float(np.trace(m).real) / n
    defect = mat.frobenius(m - s * np.eye(n))
    if defect > rtol * max(1.0, abs(s) * math.sqrt(n)):
        raise StructureError(f"{name} is not a scalar multiple of the identity")
    return s


def extract_cavity(ac: np.ndarray, noise_blocks) -> CavityRealization:
    """Read three-mirror coupling rates from a scalar realization.

    Requires the drift and every noise block to be scalar multiples of
    the identity: then each block b*I is a mirror with rate kappa = b^2
    and the drift must balance the total damping, a = -sum(kappa)/2.
    Raises :class:`StructureError` when the realization has no such
    single-cavity reading.
    """
    ac = mat.as_matrix(ac, "ac", square=True)
    a = _scalar_multiple(np.asarray(ac, dtype=float), "drift")
    rates: list[float] = []
    for i, block in enumerate(noise_blocks):
        b = np.asarray(block, dtype=float)
        if b.shape[1] == 0:
            rates.append(0.0)
            continue
        value = _scalar_multiple(b, f"noise block {i}")
        rates.append(value**2)
    while len(rates) < 3:
        rates.append(0.0)
    if len(rates) > 3:
        raise StructureError(f"expected at most three mirrors, got {len(rates)}")
    total = sum(rates)
    residual = abs(2.0 * a + total)
    if residual > 1e-3 * max(1.0, total):
        raise StructureError(
            f"drift does not balance the mirror damping: |2a + sum kappa| = {residual:.3e}"
        )
    return CavityRealization(
        kappa1=rates[0], kappa2=rates[1], kappa3=rates[2], rate_residual=residual
    )
