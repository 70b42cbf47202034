"""Command line entry point of the benchmark harness."""

from __future__ import annotations

import argparse
import sys
import time

from .bench import emit_report, generate_grid, run_experiment
from .geometry import DEFAULT_ZERO_TOL
from .positioning import DEFAULT_VOF_TOL

FULL_GRID = (10, 20)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="plicbench",
        description="Position two nested planes over a grid of normals and fractions and report truncation counts.",
    )
    p.add_argument("--shape", default="cube", help="cube, dodeca, notched or off:<path> (default: cube)")
    p.add_argument("--m-normal", type=int, default=6, help="normal lattice resolution (default: 6)")
    p.add_argument("--m-vof", type=int, default=10, help="number of linearly spaced fractions (default: 10)")
    p.add_argument("--eps1", type=float, default=1e-9, help="smallest fraction (default: 1e-9)")
    p.add_argument("--eps2", type=float, default=1e-5, help="largest logarithmic tail fraction (default: 1e-5)")
    p.add_argument("--zero-tol", type=float, default=DEFAULT_ZERO_TOL)
    p.add_argument("--vof-tol", type=float, default=DEFAULT_VOF_TOL)
    p.add_argument("--method", choices=("proposed", "baseline", "both"), default="proposed")
    p.add_argument("--threads", type=int, default=None, help="worker processes (default: $PLICBENCH_THREADS or 1)")
    p.add_argument("--out", required=True, help="output directory for the CSV files")
    p.add_argument("--full-grid", action="store_true", help="use M_n=10, M_alpha=20")
    p.add_argument("--seed", type=int, default=0, help="seed of the conservation audit sample")
    p.add_argument("--audit-fraction", type=float, default=0.01)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    m_normal, m_vof = FULL_GRID if args.full_grid else (args.m_normal, args.m_vof)
    try:
        grid = generate_grid(m_normal, m_vof, args.eps1, args.eps2)
        started = time.perf_counter()
        report = run_experiment(
            grid, args.shape, args.method, args.threads, args.zero_tol, args.vof_tol,
            args.audit_fraction, args.seed,
        )
        elapsed = time.perf_counter() - started
        emit_report(report, args.out)
    except (ValueError, OSError) as exc:
        print(f"plicbench: {exc}", file=sys.stderr)
        return 1
    for key, value in report.summary().items():
        print(f"{key}: {value}")
    print(f"elapsed_s: {elapsed:.1f}")
    if report.defects:
        print(f"plicbench: {len(report.defects)} defect(s), see {args.out}/defects.csv", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
