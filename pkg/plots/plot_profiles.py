#!/usr/bin/env python3
"""Render joint position/velocity/acceleration profiles from a trajectory CSV.

Reads the long-format file written by the planner CLI (columns ``t``,
``joint``, ``q``, ``v``, ``a``; one row per joint per sample instant) and
draws three stacked panels sharing the time axis — position, velocity, and
acceleration — with one line per joint.

Usage::

    plot_profiles.py --in trajectory.csv --out profiles.png

The script is a read-only consumer of the CSV contract; it exits nonzero with
a message on a missing file, malformed CSV, missing columns, or an empty
table.
"""

from __future__ import annotations

import argparse
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

REQUIRED_COLUMNS = ("t", "joint", "q", "v", "a")

PANELS = (
    ("q", "position [rad]"),
    ("v", "velocity [rad/s]"),
    ("a", "acceleration [rad/s$^2$]"),
)


def load_trajectory(path: str) -> pd.DataFrame:
    """Read and validate a trajectory table; exit with a message otherwise."""
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise SystemExit(f"error: cannot read {path}: no such file")
    except (pd.errors.EmptyDataError, pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise SystemExit(f"error: malformed CSV {path}: {exc}")
    missing = [column for column in REQUIRED_COLUMNS if column not in frame.columns]
    if missing:
        raise SystemExit(f"error: {path} is missing column(s): {', '.join(missing)}")
    if frame.empty:
        raise SystemExit(f"error: {path} has no data rows")
    try:
        converted = {c: pd.to_numeric(frame[c]) for c in REQUIRED_COLUMNS}
    except (TypeError, ValueError) as exc:
        raise SystemExit(f"error: non-numeric data in {path}: {exc}")
    return pd.DataFrame(converted)


def render(frame: pd.DataFrame, out_path: str) -> None:
    fig, axes = plt.subplots(
        len(PANELS), 1, sharex=True, figsize=(8.0, 9.0), constrained_layout=True
    )
    for axis, (column, label) in zip(axes, PANELS):
        for joint_id, group in frame.groupby("joint", sort=True):
            ordered = group.sort_values("t")
            axis.plot(ordered["t"], ordered[column], label=f"joint {int(joint_id)}")
        axis.set_ylabel(label)
        axis.grid(True, alpha=0.3)
    axes[0].set_title("Joint trajectory profiles")
    axes[0].legend(loc="best", fontsize="small")
    axes[-1].set_xlabel("time [s]")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        description="Render q/v/a profile panels from a planner trajectory CSV."
    )
    parser.add_argument(
        "--in", dest="input", required=True, metavar="TRAJECTORY_CSV",
        help="trajectory table written by the planner CLI",
    )
    parser.add_argument(
        "--out", dest="output", required=True, metavar="IMAGE",
        help="output image path (format from extension, e.g. profiles.png)",
    )
    args = parser.parse_args(argv)
    frame = load_trajectory(args.input)
    render(frame, args.output)
    joints = frame["joint"].nunique()
    print(f"wrote {args.output} ({joints} joint(s), {len(frame)} samples)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
