"""Plain-text serialization of synthesis results.

Scalars and matrix entries are written with nine significant digits
(``%.9g``), so a written value re-read and re-written reproduces the
exact same text.  A matrix is one line: row count, column count, then
the entries row-major.  Result files are ``key = value`` lists; sweep
and feasibility tables are comma-separated with a header row.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .hinf import SweepRecord
from .realizability import RealizedController
from .riccati import FeasibilityRecord
from .synthesis import ControllerParams

#: Significant digits used for every number written to disk.
SIG_DIGITS = 9

_FMT = f"%.{SIG_DIGITS}g"

SWEEP_HEADER = "dphi,dbeta_ratio,stable,hinf_norm"
FEASIBILITY_HEADER = "gamma,rho,eps_lower,eps_upper,feasible"


def format_scalar(value: float) -> str:
    return _FMT % float(value)


def format_matrix(m) -> str:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2:
        raise ValueError("only 2-D matrices are serialized")
    head = [str(arr.shape[0]), str(arr.shape[1])]
    return " ".join(head + [_FMT % v for v in arr.reshape(-1)])


def parse_matrix(text: str) -> np.ndarray:
    parts = text.split()
    if len(parts) < 2:
        raise ConfigError(f"matrix literal too short: {text!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
        values = [float(p) for p in parts[2:]]
    except ValueError as exc:
        raise ConfigError(f"bad matrix literal: {text!r}") from exc
    if rows < 0 or cols < 0 or len(values) != rows * cols:
        raise ConfigError(
            f"matrix literal claims {rows}x{cols} but carries {len(values)} entries"
        )
    return np.array(values).reshape(rows, cols)


def parse_kv(text: str) -> dict[str, str]:
    """Read a ``key = value`` file body, preserving order."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def render_kv(pairs: dict[str, str]) -> str:
    return "".join(f"{key} = {value}\n" for key, value in pairs.items())


def controller_pairs(controller: ControllerParams) -> dict[str, str]:
    return {
        "Ac": format_matrix(controller.ac),
        "Bc": format_matrix(controller.bc),
        "Cc": format_matrix(controller.cc),
        "X": format_matrix(controller.x.x),
        "Y": format_matrix(controller.y.x),
        "zeta_xy": format_scalar(controller.coupling_radius),
        "gamma": format_scalar(controller.gamma),
        "epsilon": format_scalar(controller.epsilon),
        "rho": format_scalar(controller.rho),
    }


def controller_to_text(controller: ControllerParams) -> str:
    return render_kv(controller_pairs(controller))


def realized_to_text(realized: RealizedController) -> str:
    pairs = controller_pairs(realized.controller)
    pairs["Bv1"] = format_matrix(realized.bv1)
    pairs["Bv2"] = format_matrix(realized.bv2)
    pairs["pr_residual"] = format_scalar(
        max(realized.report.commutation_residual, realized.report.pairing_residual)
    )
    if realized.cavity is not None:
        pairs["cavity.kappa1"] = format_scalar(realized.cavity.kappa1)
        pairs["cavity.kappa2"] = format_scalar(realized.cavity.kappa2)
        pairs["cavity.kappa3"] = format_scalar(realized.cavity.kappa3)
    return render_kv(pairs)


def sweep_to_csv(records) -> str:
    lines = [SWEEP_HEADER]
    for rec in records:
        lines.append(
            ",".join(
                (
                    format_scalar(rec.dphi),
                    format_scalar(rec.dbeta_ratio),
                    "true" if rec.stable else "false",
                    format_scalar(rec.norm),
                )
            )
        )
    return "\n".join(lines) + "\n"


def parse_sweep_csv(text: str) -> list[SweepRecord]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != SWEEP_HEADER:
        raise ConfigError("missing sweep header row")
    records = []
    for line in lines[1:]:
        dphi, ratio, stable, norm = line.split(",")
        records.append(
            SweepRecord(
                dphi=float(dphi),
                dbeta_ratio=float(ratio),
                stable=stable == "true",
                norm=float(norm),
            )
        )
    return records


def feasibility_to_csv(records) -> str:
    lines = [FEASIBILITY_HEADER]
    for rec in records:
        lines.append(
            ",".join(
                (
                    format_scalar(rec.gamma),
                    format_scalar(rec.rho),
                    format_scalar(rec.eps_lower),
                    format_scalar(rec.eps_upper),
                    "true" if rec.feasible else "false",
                )
            )
        )
    return "\n".join(lines) + "\n"


def parse_feasibility_csv(text: str) -> list[FeasibilityRecord]:
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines or lines[0] != FEASIBILITY_HEADER:
        raise ConfigError("missing feasibility header row")
    records = []
    for line in lines[1:]:
        gamma, rho, lo, hi, feasible = line.split(",")
        records.append(
            FeasibilityRecord(
                gamma=float(gamma),
                rho=float(rho),
                eps_lower=float(lo),
                eps_upper=float(hi),
                feasible=feasible == "true",
            )
        )
    return records


def plot_script(csv_name: str, gamma: float, image_name: str = "sweep.png") -> str:
    """Gnuplot script plotting the sweep norm against the target level."""
    return "\n".join(
        (
            "set terminal png size 960,600",
            f"set output '{image_name}'",
            "set datafile separator ','",
            "set xlabel 'pump phase offset (rad)'",
            "set ylabel 'closed-loop H-infinity norm'",
            "set grid",
            "set key top right",
            f"plot '{csv_name}' every ::1 using 1:4 with lines lw 2 title 'closed loop', \\",
            f"     {format_scalar(gamma)} with lines dt 2 lw 2 title 'target level'",
            "",
        )
    )
