"""Command-line interface.

Four subcommands cover the workflow:

- ``qsyn synthesize``  controller synthesis + physical realization
- ``qsyn feasibility`` scaling intervals over an attenuation grid
- ``qsyn sweep``       closed-loop norm across pump phase offsets
- ``qsyn check``       realizability residuals + stability certificate

Exit codes: 0 success; 1 usage or configuration problem; 2 the requested
synthesis is infeasible; 3 a numerical computation failed; 4 the
realizability check failed.  ``QSYN_SEED`` overrides the configured
sweep seed.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import __version__, hinf, serialize
from .config import RunConfig, load_config
from .errors import (
    CertificateUnavailable,
    ConfigError,
    CouplingFailure,
    NoStabilizingSolution,
    NotRealizable,
    NumericalError,
    UnstableLoop,
)
from .model import Decomposition, build_plant
from .realizability import augment_noise
from .riccati import epsilon_feasibility
from .synthesis import synthesize, synthesize_nominal

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_NUMERICAL = 3
EXIT_PR_FAILED = 4

_INFEASIBLE = (NoStabilizingSolution, CouplingFailure, NotRealizable)
_NUMERICAL = (NumericalError, UnstableLoop, CertificateUnavailable)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures reported as exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="path to the run configuration")
    common.add_argument("--out", help="output directory (default: config [output] directory)")
    common.add_argument("--tol", type=float, default=hinf.NORM_TOL, help="norm bisection tolerance")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")

    parser = _Parser(prog="qsyn", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"qsyn {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True

    p_syn = sub.add_parser(
        "synthesize", parents=[common], help="synthesize and physically realize a controller"
    )
    p_syn.set_defaults(func=cmd_synthesize)

    p_feas = sub.add_parser(
        "feasibility", parents=[common], help="scaling feasibility over an attenuation grid"
    )
    p_feas.add_argument("--gamma-lo", type=float, required=True)
    p_feas.add_argument("--gamma-hi", type=float, required=True)
    p_feas.add_argument("--gamma-points", type=int, default=50)
    p_feas.add_argument(
        "--rho",
        action="append",
        type=float,
        default=None,
        metavar="RHO",
        help="uncertainty bound (repeatable)",
    )
    p_feas.set_defaults(func=cmd_feasibility)

    p_sweep = sub.add_parser(
        "sweep", parents=[common], help="closed-loop norm across pump phase offsets"
    )
    p_sweep.add_argument("--phi-points", type=int, help="override the configured grid size")
    p_sweep.add_argument("--seed", type=int, help="override the configured sweep seed")
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser(
        "check", parents=[common], help="realizability residuals and stability certificate"
    )
    p_check.set_defaults(func=cmd_check)
    return parser


def _out_dir(args, cfg: RunConfig) -> str:
    directory = args.out if args.out is not None else cfg.output.directory
    os.makedirs(directory, exist_ok=True)
    return directory


def _write(directory: str, name: str, text: str) -> str:
    path = os.path.join(directory, name)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)
    return path


def _synthesize_from_config(cfg: RunConfig):
    plant = build_plant(cfg.params, cfg.decomposition)
    if cfg.decomposition is Decomposition.NOMINAL:
        controller = synthesize_nominal(plant, cfg.gamma)
    else:
        controller = synthesize(plant, cfg.gamma, cfg.epsilon)
    return plant, controller


def cmd_synthesize(args) -> int:
    cfg = load_config(args.config)
    _, controller = _synthesize_from_config(cfg)
    realized = augment_noise(controller)
    directory = _out_dir(args, cfg)
    ctrl_path = _write(directory, "controller.txt", serialize.controller_to_text(controller))
    real_path = _write(directory, "realized.txt", serialize.realized_to_text(realized))
    print(f"decomposition {cfg.decomposition.value}, gamma {cfg.gamma:g}, epsilon {cfg.epsilon:g}")
    print(f"coupling radius {controller.coupling_radius:.6g}")
    print(
        "pr residuals: commutation "
        f"{realized.report.commutation_residual:.3e}, pairing "
        f"{realized.report.pairing_residual:.3e}"
    )
    if realized.cavity is not None:
        cav = realized.cavity
        print(
            f"cavity rates: kappa1 {cav.kappa1:.6g}, kappa2 {cav.kappa2:.6g}, "
            f"kappa3 {cav.kappa3:.6g}"
        )
    print(f"wrote {ctrl_path}")
    print(f"wrote {real_path}")
    return EXIT_OK


def cmd_feasibility(args) -> int:
    cfg = load_config(args.config)
    rhos = args.rho if args.rho else []
    if not rhos:
        print("error: at least one --rho is required", file=sys.stderr)
        return EXIT_USAGE
    if args.gamma_lo <= 0 or args.gamma_hi < args.gamma_lo or args.gamma_points < 1:
        print("error: need 0 < gamma-lo <= gamma-hi and gamma-points >= 1", file=sys.stderr)
        return EXIT_USAGE
    if args.gamma_points == 1:
        gammas = [args.gamma_lo]
    else:
        step = (args.gamma_hi - args.gamma_lo) / (args.gamma_points - 1)
        gammas = [args.gamma_lo + k * step for k in range(args.gamma_points)]
    records = epsilon_feasibility(cfg.params, cfg.decomposition, gammas, rhos)
    directory = _out_dir(args, cfg)
    path = _write(directory, "feasibility.csv", serialize.feasibility_to_csv(records))
    feasible = sum(1 for rec in records if rec.feasible)
    print(f"{feasible} of {len(records)} grid points feasible")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    plant, controller = _synthesize_from_config(cfg)
    phi_points = args.phi_points if args.phi_points is not None else cfg.sweep.phi_points
    if phi_points < 2:
        print("error: --phi-points must be at least 2", file=sys.stderr)
        return EXIT_USAGE
    seed = cfg.sweep.seed
    if args.seed is not None:
        seed = args.seed
    env_seed = os.environ.get("QSYN_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError:
            print(f"error: QSYN_SEED must be an integer, got {env_seed!r}", file=sys.stderr)
            return EXIT_USAGE
    if cfg.sweep.beta_mode == "random":
        beta = hinf.RandomBeta(seed=seed, bound=cfg.params.beta_bound)
    else:
        beta = hinf.ZeroBeta()
    records = hinf.sweep(
        plant, controller, phi_points=phi_points, beta=beta, threads=max(1, args.threads)
    )
    directory = _out_dir(args, cfg)
    path = _write(directory, "sweep.csv", serialize.sweep_to_csv(records))
    finite = [rec.norm for rec in records if rec.stable]
    unstable = len(records) - len(finite)
    if finite:
        print(f"norm range [{min(finite):.6g}, {max(finite):.6g}] over {len(records)} points")
    print(f"{unstable} unstable points")
    print(f"wrote {path}")
    if cfg.output.emit_plots:
        script = serialize.plot_script("sweep.csv", cfg.gamma)
        print(f"wrote {_write(directory, 'sweep.gp', script)}")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_config(args.config)
    plant, controller = _synthesize_from_config(cfg)
    realized = augment_noise(controller)
    report = realized.report
    print(
        "pr residuals: commutation "
        f"{report.commutation_residual:.3e}, pairing {report.pairing_residual:.3e}"
    )
    certificate = hinf.quadratic_stability_certificate(
        plant, controller, cfg.gamma, cfg.epsilon
    )
    print(
        f"certificate margin {certificate.worst_margin:.3e} over "
        f"{certificate.grid_points} grid points: "
        + ("valid" if certificate.valid else "INVALID")
    )
    if not report.passed:
        print("realizability check FAILED", file=sys.stderr)
        return EXIT_PR_FAILED
    if not certificate.valid:
        print("stability certificate INVALID", file=sys.stderr)
        return EXIT_NUMERICAL
    print("all checks passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except _INFEASIBLE as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except _NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
