"""Command-line front end: plan trajectories, compare optimizers, check kernels.

Subcommands
-----------
plan         Optimize a config's joints and write trajectory.csv, times.json,
             and convergence.csv into the output directory.
compare-pso  Run the improved and standard swarm variants over many seeds and
             write compare.csv, per-iteration traces.csv, and summary.json
             with the median iterations-to-1% ratio.
kernels      Evaluate the closed-form vision formulas against hand-computed
             values and print a pass/fail table.

Exit codes: 0 success, 1 configuration problem, 2 no feasible trajectory,
3 kernel-check failure. All floats are serialized with 17 significant
digits and files are written atomically (temp file + rename).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import statistics
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from . import vision_kernels as vk
from .chaos import Bounds
from .errors import ConfigError, InfeasibleAfterSync, NoFeasibleSolution
from .limits import KinematicLimits
from .planner import JointSpec, PlanningProblem, plan, sample
from .poly353 import BoundaryConditions, JointWaypoints
from .pso import SwarmConfig, iterations_to_within, run

DEFAULT_SEED = 353
DEFAULT_DT = 0.01

_TOP_KEYS = {"joints", "bounds", "swarm", "sync_mode", "seed"}
_JOINT_KEYS = {"waypoints", "limits", "boundary"}
_LIMIT_KEYS = {"v_max", "a_max"}
_BOUNDARY_KEYS = {"v0", "a0", "vf", "af"}
_SWARM_KEYS = {
    "m",
    "N",
    "omega_max",
    "omega_min",
    "c11",
    "c21",
    "alpha",
    "phi",
    "mu",
    "penalty",
    "stagnation_window",
}
_SWARM_DEFAULTS = {
    "m": 24,
    "N": 60,
    "omega_max": 0.86,
    "omega_min": 0.44,
    "c11": 1.3,
    "c21": 1.3,
    "alpha": 0.3,
    "phi": 0.6,
    "mu": 4.0,
    "penalty": 1e3,
    "stagnation_window": 10,
}


@dataclass(frozen=True)
class RunManifest:
    """Everything one invocation needs, resolved from flags plus defaults."""

    command: str
    config: Optional[Path]
    out_dir: Optional[Path]
    seed: Optional[int]
    dt: float
    sync: Optional[str]
    seeds: int
    n_workers: int


class _Parser(argparse.ArgumentParser):
    """Routes usage errors through the exit-code contract (1, not argparse's 2)."""

    def error(self, message: str):  # noqa: D102 - argparse hook
        raise ConfigError(message)


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _write_csv(path: Path, header: list[str], rows) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    _atomic_write(path, buffer.getvalue())


def _check_keys(obj, allowed: set, where: str, required=()) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {unknown}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{where}: missing required key {key!r}")


def _build_joint(entry, where: str) -> JointSpec:
    _check_keys(entry, _JOINT_KEYS, where, required=("waypoints", "limits"))
    waypoints = entry["waypoints"]
    if not isinstance(waypoints, list) or len(waypoints) != 4:
        raise ConfigError(f"{where}.waypoints must be a list of 4 numbers")
    _check_keys(entry["limits"], _LIMIT_KEYS, f"{where}.limits", required=("v_max", "a_max"))
    boundary = BoundaryConditions()
    if "boundary" in entry:
        _check_keys(entry["boundary"], _BOUNDARY_KEYS, f"{where}.boundary")
        bc = entry["boundary"]
        boundary = BoundaryConditions(
            v_start=float(bc.get("v0", 0.0)),
            a_start=float(bc.get("a0", 0.0)),
            v_end=float(bc.get("vf", 0.0)),
            a_end=float(bc.get("af", 0.0)),
        )
    try:
        return JointSpec(
            waypoints=JointWaypoints(*(float(q) for q in waypoints)),
            limits=KinematicLimits(
                v_max=float(entry["limits"]["v_max"]),
                a_max=float(entry["limits"]["a_max"]),
            ),
            boundary=boundary,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def load_config(path: Path) -> tuple[PlanningProblem, dict, int, str]:
    """Parse and validate a problem config.

    Returns (problem, swarm keyword fields, seed, sync_mode). Unknown keys
    anywhere in the document are rejected.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc

    _check_keys(raw, _TOP_KEYS, "config", required=("joints", "bounds"))
    if not isinstance(raw["joints"], list) or not raw["joints"]:
        raise ConfigError("config.joints must be a non-empty list")
    joints = tuple(
        _build_joint(entry, f"joints[{i}]") for i, entry in enumerate(raw["joints"])
    )

    _check_keys(raw["bounds"], {"t_min", "t_max"}, "config.bounds", required=("t_min", "t_max"))
    try:
        bounds = Bounds.cube(
            float(raw["bounds"]["t_min"]), float(raw["bounds"]["t_max"]), 3
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.bounds: {exc}") from exc

    sync_mode = raw.get("sync_mode", "shared")
    seed = raw.get("seed", DEFAULT_SEED)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError(f"config.seed must be a nonnegative integer, got {seed!r}")

    swarm_raw = dict(_SWARM_DEFAULTS)
    if "swarm" in raw:
        _check_keys(raw["swarm"], _SWARM_KEYS, "config.swarm")
        swarm_raw.update(raw["swarm"])
    try:
        swarm_fields = {
            "m": int(swarm_raw["m"]),
            "n_iterations": int(swarm_raw["N"]),
            "omega_max": float(swarm_raw["omega_max"]),
            "omega_min": float(swarm_raw["omega_min"]),
            "c11": float(swarm_raw["c11"]),
            "c21": float(swarm_raw["c21"]),
            "alpha": float(swarm_raw["alpha"]),
            "phi": float(swarm_raw["phi"]),
            "mu": float(swarm_raw["mu"]),
            "penalty_coefficient": float(swarm_raw["penalty"]),
            "stagnation_window": int(swarm_raw["stagnation_window"]),
        }
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.swarm: {exc}") from exc

    try:
        problem = PlanningProblem(joints=joints, bounds=bounds, sync_mode=sync_mode)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config: {exc}") from exc
    return problem, swarm_fields, seed, sync_mode


def _swarm_config(manifest: RunManifest, problem, swarm_fields, seed, variant="improved"):
    try:
        return SwarmConfig(
            bounds=problem.bounds,
            seed=seed,
            variant=variant,
            n_workers=manifest.n_workers,
            **swarm_fields,
        )
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config.swarm: {exc}") from exc


def cmd_plan(manifest: RunManifest) -> int:
    problem, swarm_fields, seed_cfg, sync_cfg = load_config(manifest.config)
    seed = manifest.seed if manifest.seed is not None else seed_cfg
    sync = manifest.sync if manifest.sync is not None else sync_cfg
    try:
        problem = dataclasses.replace(problem, sync_mode=sync)
    except ValueError as exc:
        raise ConfigError(f"config: {exc}") from exc
    cfg = _swarm_config(manifest, problem, swarm_fields, seed)

    trajectory, history = plan(problem, cfg)
    per_joint = sample(trajectory, manifest.dt)

    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        manifest.out_dir / "trajectory.csv",
        ["t", "joint", "q", "v", "a"],
        (
            [_fmt(s.t), str(j), _fmt(s.q), _fmt(s.v), _fmt(s.a)]
            for j, samples in enumerate(per_joint)
            for s in samples
        ),
    )
    times = trajectory.times
    _atomic_write(
        manifest.out_dir / "times.json",
        "{\n"
        f'  "t1": {_fmt(times.t1)},\n'
        f'  "t2": {_fmt(times.t2)},\n'
        f'  "t3": {_fmt(times.t3)},\n'
        f'  "total": {_fmt(times.total)}\n'
        "}\n",
    )
    _write_csv(
        manifest.out_dir / "convergence.csv",
        ["iteration", "gbest_fitness", "omega", "c1", "c2", "perturbed"],
        (
            [
                str(rec.iteration),
                _fmt(rec.gbest_fitness),
                _fmt(rec.omega),
                _fmt(rec.c1),
                _fmt(rec.c2),
                str(int(rec.perturbed)),
            ]
            for rec in history
        ),
    )
    print(
        f"planned {len(problem.joints)} joint(s): total {times.total:.6f} s "
        f"(t1={times.t1:.6f}, t2={times.t2:.6f}, t3={times.t3:.6f}) -> {manifest.out_dir}"
    )
    return 0


def cmd_compare_pso(manifest: RunManifest) -> int:
    if manifest.seeds < 20:
        raise ConfigError(f"compare-pso needs at least 20 seeds, got {manifest.seeds}")
    problem, swarm_fields, seed_cfg, _sync = load_config(manifest.config)
    base_seed = manifest.seed if manifest.seed is not None else seed_cfg

    rows = []
    trace_rows = []
    reached: dict[str, list[int]] = {"improved": [], "standard": []}
    for offset in range(manifest.seeds):
        seed = base_seed + offset
        for variant in ("improved", "standard"):
            cfg = _swarm_config(manifest, problem, swarm_fields, seed, variant)
            result = run(cfg, problem)
            needed = iterations_to_within(result.history, 0.01)
            reached[variant].append(needed)
            rows.append(
                [str(seed), variant, str(needed), _fmt(result.best_fitness)]
            )
            trace_rows.extend(
                [str(seed), variant, str(rec.iteration), _fmt(rec.gbest_fitness)]
                for rec in result.history
            )

    manifest.out_dir.mkdir(parents=True, exist_ok=True)
    _write_csv(
        manifest.out_dir / "compare.csv",
        ["seed", "variant", "iterations_to_1pct", "final_fitness"],
        rows,
    )
    _write_csv(
        manifest.out_dir / "traces.csv",
        ["seed", "variant", "iteration", "gbest_fitness"],
        trace_rows,
    )
    median_improved = statistics.median(reached["improved"])
    median_standard = statistics.median(reached["standard"])
    ratio = median_improved / median_standard
    _atomic_write(
        manifest.out_dir / "summary.json",
        "{\n"
        f'  "median_iterations_improved": {_fmt(median_improved)},\n'
        f'  "median_iterations_standard": {_fmt(median_standard)},\n'
        f'  "ratio": {_fmt(ratio)}\n'
        "}\n",
    )
    print(
        f"median iterations to 1%: improved {median_improved:g}, "
        f"standard {median_standard:g}, ratio {ratio:.3f} -> {manifest.out_dir}"
    )
    return 0


def _kernel_checks() -> list[tuple[str, Callable[[], bool]]]:
    ln3 = math.log(3.0)

    def grad_matches() -> bool:
        params = vk.FocalLossParams(alpha_t=0.25, gamma_f=2.0)
        h = 1e-6
        for p in (0.1, 0.5, 0.9):
            numeric = (vk.focal_loss(p + h, params) - vk.focal_loss(p - h, params)) / (2 * h)
            analytic = vk.focal_loss_grad(p, params)
            if abs(numeric - analytic) > 1e-6 * max(1.0, abs(analytic)):
                return False
        return True

    def fusion_example() -> bool:
        inputs = vk.FusionInputs(
            w=np.array([2.0, 1.0, 1.0]),
            x0=np.array(4.0),
            x1=np.array(0.0),
            x2=np.array(0.0),
        )
        fused = vk.bifpn_fuse(inputs)
        y = 2.0 / 4.0001 * 4.0
        return (
            fused.shape == (2,)
            and math.isclose(fused[0], 4.0, rel_tol=0.0, abs_tol=0.0)
            and math.isclose(fused[1], vk.silu(y), rel_tol=1e-12)
        )

    return [
        ("eca_kernel_size(128) == 5", lambda: vk.eca_kernel_size(128) == 5),
        ("eca_kernel_size(512) == 7", lambda: vk.eca_kernel_size(512) == 7),
        ("eca_kernel_size(2) == 1 (clamped)", lambda: vk.eca_kernel_size(2) == 1),
        ("eca_kernel_size(256) tie rounds up to 7", lambda: vk.eca_kernel_size(256) == 7),
        (
            "zero conv kernel yields uniform 0.5 weights",
            lambda: np.allclose(
                vk.eca_channel_weights(np.arange(8.0), np.zeros(3)), 0.5
            ),
        ),
        (
            "channel weights match hand sigmoid values",
            lambda: np.allclose(
                vk.eca_channel_weights(np.array([0.0, ln3, -ln3]), np.array([1.0])),
                [0.5, 0.75, 0.25],
                atol=1e-12,
            ),
        ),
        (
            "normalized weights sum to S/(S+eps)",
            lambda: math.isclose(
                float(np.sum(vk.normalized_fusion_weights([1.0, 2.0, 3.0]))),
                6.0 / 6.0001,
                rel_tol=1e-12,
            ),
        ),
        (
            "weight normalization preserves order",
            lambda: bool(
                np.all(np.diff(vk.normalized_fusion_weights([0.2, 1.0, 3.0])) > 0)
            ),
        ),
        ("silu(0) == 0", lambda: vk.silu(0.0) == 0.0),
        ("scalar fusion example matches hand value", fusion_example),
        ("focal_loss(1.0) == 0", lambda: vk.focal_loss(1.0) == 0.0),
        (
            "focal_loss(0.5; 0.25, 2) == 0.0625*ln(2)",
            lambda: math.isclose(
                vk.focal_loss(0.5), 0.0625 * math.log(2.0), rel_tol=1e-12
            ),
        ),
        ("focal gradient matches finite differences", grad_matches),
    ]


def cmd_kernels(_manifest: RunManifest) -> int:
    failures = 0
    for name, check in _kernel_checks():
        try:
            ok = check()
        except Exception as exc:  # a crash is a failure, not an abort
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} kernel check(s) failed", file=sys.stderr)
        return 3
    return 0


def _worker_count() -> int:
    raw = os.environ.get("TRAJOPT_THREADS", "1")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"TRAJOPT_THREADS must be an integer, got {raw!r}") from exc
    return max(1, value)


def _build_parser() -> _Parser:
    parser = _Parser(prog="trajopt353", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_plan = sub.add_parser("plan", help="optimize a config and write CSV artifacts")
    p_plan.add_argument("--config", required=True, type=Path)
    p_plan.add_argument("--out", required=True, type=Path)
    p_plan.add_argument("--seed", type=int, default=None, help=f"default {DEFAULT_SEED} unless set in config")
    p_plan.add_argument("--dt", type=float, default=DEFAULT_DT)
    p_plan.add_argument("--sync", choices=("shared", "per-joint-max"), default=None)

    p_cmp = sub.add_parser("compare-pso", help="improved vs standard over many seeds")
    p_cmp.add_argument("--config", required=True, type=Path)
    p_cmp.add_argument("--out", required=True, type=Path)
    p_cmp.add_argument("--seed", type=int, default=None)
    p_cmp.add_argument("--seeds", type=int, default=20)

    sub.add_parser("kernels", help="verify the closed-form vision formulas")
    return parser


_HANDLERS = {"plan": cmd_plan, "compare-pso": cmd_compare_pso, "kernels": cmd_kernels}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "dt", DEFAULT_DT) <= 0.0:
            raise ConfigError(f"--dt must be positive, got {args.dt}")
        manifest = RunManifest(
            command=args.command,
            config=getattr(args, "config", None),
            out_dir=getattr(args, "out", None),
            seed=getattr(args, "seed", None),
            dt=getattr(args, "dt", DEFAULT_DT),
            sync=getattr(args, "sync", None),
            seeds=getattr(args, "seeds", 20),
            n_workers=_worker_count(),
        )
        return _HANDLERS[manifest.command](manifest)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NoFeasibleSolution, InfeasibleAfterSync) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry_point() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
