#!/usr/bin/env python3
"""Benchmark the dense kernel backends against each other.

Times the three decomposition primitives (eigenvalues, Schur form,
linear solve) on random matrices at the dimensions the synthesis
pipeline actually produces, for every importable backend of
``qsyn.mat`` (the compiled Cython kernels and the pure-Python
fallback).  A full phase sweep is then timed end-to-end in one
subprocess per backend, selected through the ``QSYN_PURE`` environment
variable, so the facade's import-time backend binding is respected.

Usage::

    python benchmarks/bench_backends.py [--sizes 4,8,16] [--repeats 7]
        [--inner 20] [--sweep-points 61] [--seed 0]

Per-call times are the median over ``--repeats`` timed batches of
``--inner`` calls each feeding on pre-drawn matrices.
"""

from __future__ import annotations

import argparse
import os
import statistics
import subprocess
import sys
import time

import numpy as np

from qsyn.mat import BACKEND, available_backends

SWEEP_SNIPPET = """
import time
from qsyn import Decomposition, OpoParams, build_plant, synthesize
from qsyn.hinf import sweep
import qsyn.mat as mat

plant = build_plant(
    OpoParams(kappa1=0.0011, kappa2=0.8264, chi=0.0414), Decomposition.PASSIVE
)
controller = synthesize(plant, 0.05, 1.0)
start = time.perf_counter()
sweep(plant, controller, phi_points={points})
print(f"{{mat.BACKEND}} {{time.perf_counter() - start:.6f}}")
"""


def parse_args(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument(
        "--sizes",
        default="4,8,16",
        help="comma-separated matrix dimensions (default: 4,8,16)",
    )
    parser.add_argument("--repeats", type=int, default=7, help="timed batches per case")
    parser.add_argument("--inner", type=int, default=20, help="calls per timed batch")
    parser.add_argument(
        "--sweep-points", type=int, default=61, help="grid size of the end-to-end sweep"
    )
    parser.add_argument("--seed", type=int, default=0, help="matrix draw seed")
    parser.add_argument(
        "--skip-sweep", action="store_true", help="omit the subprocess sweep comparison"
    )
    args = parser.parse_args(argv)
    try:
        args.sizes = [int(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError:
        parser.error(f"--sizes must be comma-separated integers, got {args.sizes!r}")
    if not args.sizes or min(args.sizes) < 1:
        parser.error("--sizes needs at least one positive dimension")
    return args


def median_per_call(fn, batches, repeats, inner):
    """Median seconds per call of ``fn`` over pre-drawn argument batches."""
    samples = []
    for r in range(repeats):
        batch = batches[r % len(batches)]
        start = time.perf_counter()
        for arg in batch:
            fn(*arg)
        samples.append((time.perf_counter() - start) / inner)
    return statistics.median(samples)


def kernel_timings(backends, sizes, repeats, inner, seed):
    """{(kernel, size): {backend: seconds-per-call}} over random draws."""
    rng = np.random.Generator(np.random.Philox(seed))
    results = {}
    for n in sizes:
        eig_args = [
            [(rng.normal(size=(n, n)),) for _ in range(inner)] for _ in range(repeats)
        ]
        # diagonally shifted draws keep the solves comfortably conditioned
        solve_args = [
            [
                (
                    rng.normal(size=(n, n)) + 3.0 * np.sqrt(n) * np.eye(n),
                    rng.normal(size=(n, n)),
                )
                for _ in range(inner)
            ]
            for _ in range(repeats)
        ]
        cases = {
            "eig": (eig_args, lambda impl: impl.eig),
            "schur": (eig_args, lambda impl: (lambda a: impl.schur(a, want_q=True))),
            "solve": (solve_args, lambda impl: impl.solve),
        }
        for kernel, (batches, pick) in cases.items():
            row = {}
            for name, impl in backends.items():
                row[name] = median_per_call(pick(impl), batches, repeats, inner)
            results[(kernel, n)] = row
    return results


def sweep_timings(backends, points):
    """End-to-end sweep wall time per backend, measured in subprocesses."""
    timings = {}
    for name in backends:
        env = dict(os.environ)
        env["QSYN_PURE"] = "1" if name == "pure" else "0"
        proc = subprocess.run(
            [sys.executable, "-c", SWEEP_SNIPPET.format(points=points)],
            capture_output=True,
            text=True,
            env=env,
            check=True,
        )
        reported, elapsed = proc.stdout.split()
        if reported != name:
            raise RuntimeError(
                f"subprocess selected backend {reported!r}, expected {name!r}"
            )
        timings[name] = float(elapsed)
    return timings


def format_seconds(value):
    if value < 1e-3:
        return f"{value * 1e6:>11.1f} us"
    if value < 1.0:
        return f"{value * 1e3:>11.2f} ms"
    return f"{value:>12.3f} s"


def print_table(title, rows, columns):
    print(title)
    header = f"{'case':<14}" + "".join(f"{c:>14}" for c in columns)
    if len(columns) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, row in rows:
        line = f"{label:<14}" + "".join(format_seconds(row[c]) for c in columns)
        if len(columns) == 2:
            line += f"{row[columns[1]] / row[columns[0]]:>9.1f}x"
        print(line)
    print()


def main(argv=None) -> int:
    args = parse_args(argv)
    backends = available_backends()
    order = [name for name in ("compiled", "pure") if name in backends]
    print(f"backends: {', '.join(order)}  (active: {BACKEND})")
    print()

    results = kernel_timings(backends, args.sizes, args.repeats, args.inner, args.seed)
    rows = [
        (f"{kernel} n={n}", results[(kernel, n)])
        for kernel in ("eig", "schur", "solve")
        for n in args.sizes
    ]
    print_table("kernel medians (per call)", rows, order)

    if not args.skip_sweep:
        timings = sweep_timings(backends, args.sweep_points)
        print_table(
            f"phase sweep, {args.sweep_points} points (subprocess wall time)",
            [("sweep", timings)],
            order,
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
