#!/usr/bin/env python3
"""Render optimizer convergence curves from a variant-comparison CSV.

Reads the per-seed summary written by the CLI's ``compare-pso`` command
(columns ``seed``, ``variant``, ``iterations_to_1pct``, ``final_fitness``).
When the per-iteration trace table (``traces.csv``, columns ``seed``,
``variant``, ``iteration``, ``gbest_fitness``) sits next to the input file,
the figure shows each variant's median global-best fitness versus iteration
with an interquartile band across seeds. Without traces the figure falls
back to the per-seed iteration counts alone. Either way each variant is
annotated with its median iterations-to-within-1%-of-final value, and the
same numbers are printed to stdout.

Usage::

    plot_convergence.py --in compare.csv --out convergence.png

The script is a read-only consumer of the CSV contract; it exits nonzero
with a message on a missing file, malformed CSV, missing columns, or an
empty table.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

COMPARE_COLUMNS = ("seed", "variant", "iterations_to_1pct", "final_fitness")
TRACE_COLUMNS = ("seed", "variant", "iteration", "gbest_fitness")

VARIANT_COLORS = {"improved": "tab:blue", "standard": "tab:orange"}


def load_table(path: str, required: tuple[str, ...]) -> pd.DataFrame:
    """Read and validate a CSV table; exit with a message otherwise."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise SystemExit(f"error: cannot read {path}: no such file")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise SystemExit(f"error: malformed CSV {path}: {exc}")
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise SystemExit(f"error: {path} is missing column(s): {', '.join(missing)}")
    if frame.empty:
        raise SystemExit(f"error: {path} has no data rows")
    numeric = [column for column in required if column != "variant"]
    try:
        for column in numeric:
            frame[column] = pd.to_numeric(frame[column])
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"error: non-numeric data in {path}: {exc}")
    return frame


def load_sibling_traces(compare_path: str) -> pd.DataFrame | None:
    """Return the per-iteration trace table next to compare.csv, if present."""
    sibling = Path(compare_path).parent / "traces.csv"
    if not sibling.exists():
        return None
    return load_table(str(sibling), TRACE_COLUMNS)


def render(
    compare: pd.DataFrame, traces: pd.DataFrame | None, out_path: str
) -> dict[str, float]:
    medians = compare.groupby("variant")["iterations_to_1pct"].median().to_dict()
    fig, axis = plt.subplots(figsize=(8.0, 5.0), constrained_layout=True)

    if traces is not None:
        for variant, group in traces.groupby("variant"):
            color = VARIANT_COLORS.get(variant)
            by_iteration = group.groupby("iteration")["gbest_fitness"]
            median_curve = by_iteration.median()
            lower = by_iteration.quantile(0.25)
            upper = by_iteration.quantile(0.75)
            axis.plot(
                median_curve.index, median_curve.values,
                label=f"{variant} (median)", color=color,
            )
            axis.fill_between(
                median_curve.index, lower.values, upper.values,
                alpha=0.25, linewidth=0, color=color,
            )
        if (traces["gbest_fitness"] > 0).all():
            axis.set_yscale("log")
        for variant, median_iterations in sorted(medians.items()):
            axis.axvline(
                median_iterations, color=VARIANT_COLORS.get(variant),
                linestyle="--", alpha=0.7,
            )
        axis.set_xlabel("iteration")
        axis.set_ylabel("global-best fitness")
    else:
        for variant, group in compare.groupby("variant"):
            axis.scatter(
                group["seed"], group["iterations_to_1pct"],
                label=variant, color=VARIANT_COLORS.get(variant), alpha=0.8,
            )
        for variant, median_iterations in sorted(medians.items()):
            axis.axhline(
                median_iterations, color=VARIANT_COLORS.get(variant),
                linestyle="--", alpha=0.7,
            )
        axis.set_xlabel("seed")
        axis.set_ylabel("iterations to within 1% of final")

    for position, (variant, median_iterations) in enumerate(sorted(medians.items())):
        axis.text(
            0.98, 0.92 - 0.07 * position,
            f"{variant}: median {median_iterations:g} iterations to 1%",
            transform=axis.transAxes, ha="right", fontsize="small",
            color=VARIANT_COLORS.get(variant),
        )
    axis.set_title("Optimizer convergence by swarm variant")
    axis.grid(True, alpha=0.3)
    axis.legend(loc="best", fontsize="small")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return medians


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Render convergence comparison curves from compare-pso output."
    )
    parser.add_argument(
        "--in", dest="input", required=True, metavar="COMPARE_CSV",
        help="per-seed comparison table written by the CLI's compare-pso command",
    )
    parser.add_argument(
        "--out", dest="output", required=True, metavar="IMAGE",
        help="output image path (format from extension, e.g. convergence.png)",
    )
    args = parser.parse_args(argv)
    compare = load_table(args.input, COMPARE_COLUMNS)
    traces = load_sibling_traces(args.input)
    medians = render(compare, traces, args.output)
    summary = ", ".join(
        f"{variant} {median:g}" for variant, median in sorted(medians.items())
    )
    print(f"wrote {args.output} (median iterations to 1%: {summary})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
