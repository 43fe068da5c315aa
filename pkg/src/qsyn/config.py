"""Run configuration: a small INI-style format with typed sections.

Four sections drive a run::

    [plant]
    kappa1 = 0.0011      # input mirror rate
    kappa2 = 0.8264      # output mirror rate
    chi = 0.0414         # pump gain
    phase_lo = -3.14159265
    phase_hi = 3.14159265
    beta_bound = 0.0

    [synthesis]
    gamma = 0.05
    epsilon = 1.0
    decomposition = passive   # passive | active | nominal

    [sweep]
    phi_points = 629
    seed = 0
    beta_mode = zero          # zero | random

    [output]
    directory = .
    emit_plots = false

``#`` starts a comment (whole-line or trailing).  Unknown sections or
keys, missing required keys, and untypable values raise
:class:`ConfigError` with the offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .model import Decomposition, OpoParams

_REQUIRED = {("plant", "kappa1"), ("plant", "kappa2"), ("plant", "chi"), ("synthesis", "gamma")}

_SCHEMA = {
    "plant": {"kappa1", "kappa2", "chi", "phase_lo", "phase_hi", "beta_bound"},
    "synthesis": {"gamma", "epsilon", "decomposition"},
    "sweep": {"phi_points", "seed", "beta_mode"},
    "output": {"directory", "emit_plots"},
}


@dataclass(frozen=True)
class SweepSettings:
    phi_points: int = 629
    seed: int = 0
    beta_mode: str = "zero"


@dataclass(frozen=True)
class OutputSettings:
    directory: str = "."
    emit_plots: bool = False


@dataclass(frozen=True)
class RunConfig:
    params: OpoParams
    decomposition: Decomposition
    gamma: float
    epsilon: float = 1.0
    sweep: SweepSettings = field(default_factory=SweepSettings)
    output: OutputSettings = field(default_factory=OutputSettings)


def _as_float(raw: str, where: str) -> float:
    try:
        value = float(raw)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"{where}: value must be finite")
    return value


def _as_int(raw: str, where: str) -> int:
    try:
        return int(raw, 10)
    except ValueError as exc:
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from exc


def _as_bool(raw: str, where: str) -> bool:
    lowered = raw.lower()
    if lowered in {"true", "yes", "1", "on"}:
        return True
    if lowered in {"false", "no", "0", "off"}:
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse configuration text into a validated :class:`RunConfig`."""
    values: dict[tuple[str, str], str] = {}
    section: str | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{source}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in _SCHEMA:
                raise ConfigError(f"{where}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"{where}: key outside any section")
        key, _, raw_value = line.partition("=")
        key = key.strip().lower()
        value = raw_value.strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}]")
        if not value:
            raise ConfigError(f"{where}: empty value for {key!r}")
        if (section, key) in values:
            raise ConfigError(f"{where}: duplicate key {key!r} in [{section}]")
        values[(section, key)] = value

    for sec, key in sorted(_REQUIRED):
        if (sec, key) not in values:
            raise ConfigError(f"{source}: missing required key {key!r} in [{sec}]")

    def pick(sec: str, key: str, default: str | None = None) -> str | None:
        return values.get((sec, key), default)

    where = source
    try:
        params = OpoParams(
            kappa1=_as_float(values[("plant", "kappa1")], where),
            kappa2=_as_float(values[("plant", "kappa2")], where),
            chi=_as_float(values[("plant", "chi")], where),
            phase_range=(
                _as_float(pick("plant", "phase_lo", repr(-math.pi)), where),
                _as_float(pick("plant", "phase_hi", repr(math.pi)), where),
            ),
            beta_bound=_as_float(pick("plant", "beta_bound", "0"), where),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    name = pick("synthesis", "decomposition", "passive").lower()
    try:
        decomposition = Decomposition(name)
    except ValueError as exc:
        raise ConfigError(f"{source}: unknown decomposition {name!r}") from exc

    gamma = _as_float(values[("synthesis", "gamma")], where)
    epsilon = _as_float(pick("synthesis", "epsilon", "1.0"), where)
    if gamma <= 0:
        raise ConfigError(f"{source}: gamma must be positive")
    if epsilon <= 0:
        raise ConfigError(f"{source}: epsilon must be positive")

    beta_mode = pick("sweep", "beta_mode", "zero").lower()
    if beta_mode not in {"zero", "random"}:
        raise ConfigError(f"{source}: unknown beta_mode {beta_mode!r}")
    phi_points = _as_int(pick("sweep", "phi_points", "629"), where)
    if phi_points < 2:
        raise ConfigError(f"{source}: phi_points must be at least 2")
    sweep = SweepSettings(
        phi_points=phi_points,
        seed=_as_int(pick("sweep", "seed", "0"), where),
        beta_mode=beta_mode,
    )
    output = OutputSettings(
        directory=pick("output", "directory", "."),
        emit_plots=_as_bool(pick("output", "emit_plots", "false"), where),
    )
    return RunConfig(
        params=params,
        decomposition=decomposition,
        gamma=gamma,
        epsilon=epsilon,
        sweep=sweep,
        output=output,
    )


def load_config(path) -> RunConfig:
    """Read and parse a configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, source=str(path))
