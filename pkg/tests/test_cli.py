"""End-to-end tests of the command-line interface and its file contracts."""

import csv
import json
import math

import pytest

from trajopt353 import cli
from trajopt353 import vision_kernels as vk


def _write_config(path, **overrides):
    config = {
        "joints": [
            {
                "waypoints": [0.0, 0.8, 0.3, 1.1],
                "limits": {"v_max": 2.0, "a_max": 8.0},
            }
        ],
        "bounds": {"t_min": 0.1, "t_max": 6.0},
        "swarm": {"m": 6, "N": 10},
        "seed": 11,
    }
    config.update(overrides)
    path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    return path


def _run(argv):
    return cli.main([str(a) for a in argv])


# ---------------------------------------------------------------------------
# plan
# ---------------------------------------------------------------------------


def test_plan_writes_all_artifacts(tmp_path):
    config = _write_config(tmp_path / "cfg.json")
    out = tmp_path / "out"
    assert _run(["plan", "--config", config, "--out", out]) == 0

    times = json.loads((out / "times.json").read_text())
    assert set(times) == {"t1", "t2", "t3", "total"}
    assert times["total"] == pytest.approx(
        times["t1"] + times["t2"] + times["t3"], abs=1e-12
    )

    with open(out / "trajectory.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["t", "joint", "q", "v", "a"]
    expected = math.ceil(times["total"] / 0.01 - 1e-9) + 1
    assert len(rows) - 1 == 1 * expected
    assert rows[1][0] == "0" and rows[1][1] == "0"
    assert float(rows[-1][0]) == pytest.approx(times["total"])

    with open(out / "convergence.csv", newline="") as handle:
        conv = list(csv.reader(handle))
    assert conv[0] == ["iteration", "gbest_fitness", "omega", "c1", "c2", "perturbed"]
    assert len(conv) - 1 == 10
    fitness = [float(r[1]) for r in conv[1:]]
    assert all(b <= a for a, b in zip(fitness, fitness[1:]))
    assert {r[5] for r in conv[1:]} <= {"0", "1"}


def test_plan_reruns_are_bit_identical(tmp_path):
    config = _write_config(tmp_path / "cfg.json")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert _run(["plan", "--config", config, "--out", out_a]) == 0
    assert _run(["plan", "--config", config, "--out", out_b]) == 0
    for name in ("trajectory.csv", "times.json", "convergence.csv"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_plan_respects_dt_flag(tmp_path):
    config = _write_config(tmp_path / "cfg.json")
    out = tmp_path / "out"
    assert _run(["plan", "--config", config, "--out", out, "--dt", "0.1"]) == 0
    times = json.loads((out / "times.json").read_text())
    with open(out / "trajectory.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert len(rows) - 1 == math.ceil(times["total"] / 0.1 - 1e-9) + 1


def test_plan_sync_override(tmp_path):
    config = _write_config(tmp_path / "cfg.json")
    out = tmp_path / "out"
    assert _run(
        ["plan", "--config", config, "--out", out, "--sync", "per-joint-max"]
    ) == 0
    assert (out / "times.json").exists()


def test_plan_infeasible_instance_exits_2(tmp_path, capsys):
    # This reversal path needs a peak speed above 1.5 rad/s even with every
    # segment at the 6 s bound, so planning must fail cleanly.
    config = _write_config(
        tmp_path / "cfg.json",
        joints=[
            {
                "waypoints": [0.0, 2.0, -1.0, 2.5],
                "limits": {"v_max": 1.5, "a_max": 3.0},
            }
        ],
        swarm={"m": 4, "N": 5},
    )
    out = tmp_path / "out"
    assert _run(["plan", "--config", config, "--out", out]) == 2
    assert "error" in capsys.readouterr().err
    assert not (out / "times.json").exists()


# ---------------------------------------------------------------------------
# config validation -> exit 1
# ---------------------------------------------------------------------------


def test_zero_velocity_limit_rejected(tmp_path, capsys):
    config = _write_config(
        tmp_path / "cfg.json",
        joints=[{"waypoints": [0, 1, 2, 3], "limits": {"v_max": 0.0, "a_max": 1.0}}],
    )
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    assert "v_max" in capsys.readouterr().err


def test_unknown_keys_rejected(tmp_path, capsys):
    config = _write_config(tmp_path / "cfg.json", extra={"oops": 1})
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    assert "unknown keys" in capsys.readouterr().err

    config = _write_config(tmp_path / "cfg2.json", swarm={"m": 6, "N": 10, "mass": 2})
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    assert "mass" in capsys.readouterr().err


def test_malformed_json_reports_line_and_column(tmp_path, capsys):
    config = tmp_path / "broken.json"
    config.write_text('{\n  "joints": [,]\n}\n', encoding="utf-8")
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    err = capsys.readouterr().err
    assert f"{config}:2:" in err


def test_missing_config_file(tmp_path, capsys):
    assert _run(["plan", "--config", tmp_path / "nope.json", "--out", tmp_path]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_missing_required_flag(tmp_path, capsys):
    assert _run(["plan", "--out", tmp_path / "out"]) == 1
    assert "error" in capsys.readouterr().err


def test_nonpositive_dt_rejected(tmp_path, capsys):
    config = _write_config(tmp_path / "cfg.json")
    assert _run(["plan", "--config", config, "--out", tmp_path, "--dt", "0"]) == 1
    assert "--dt" in capsys.readouterr().err


def test_bad_thread_env_rejected(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("TRAJOPT_THREADS", "many")
    config = _write_config(tmp_path / "cfg.json")
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    assert "TRAJOPT_THREADS" in capsys.readouterr().err


def test_boundary_and_bounds_validation(tmp_path, capsys):
    config = _write_config(tmp_path / "cfg.json", bounds={"t_min": 6.0, "t_max": 0.1})
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    capsys.readouterr()

    config = _write_config(
        tmp_path / "cfg2.json",
        joints=[
            {
                "waypoints": [0, 1, 2, 3],
                "limits": {"v_max": 1, "a_max": 1},
                "boundary": {"v0": 0.1, "upstream": 2},
            }
        ],
    )
    assert _run(["plan", "--config", config, "--out", tmp_path / "out"]) == 1
    assert "boundary" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# compare-pso
# ---------------------------------------------------------------------------


def test_compare_pso_writes_table_and_summary(tmp_path):
    config = _write_config(tmp_path / "cfg.json", swarm={"m": 4, "N": 8})
    out = tmp_path / "out"
    assert _run(["compare-pso", "--config", config, "--out", out]) == 0

    with open(out / "compare.csv", newline="") as handle:
        rows = list(csv.reader(handle))
    assert rows[0] == ["seed", "variant", "iterations_to_1pct", "final_fitness"]
    assert len(rows) - 1 == 20 * 2
    assert {r[1] for r in rows[1:]} == {"improved", "standard"}
    seeds = sorted({int(r[0]) for r in rows[1:]})
    assert seeds == list(range(11, 31))

    summary = json.loads((out / "summary.json").read_text())
    assert set(summary) == {
        "median_iterations_improved",
        "median_iterations_standard",
        "ratio",
    }
    assert summary["ratio"] == pytest.approx(
        summary["median_iterations_improved"] / summary["median_iterations_standard"]
    )

    with open(out / "traces.csv", newline="") as handle:
        traces = list(csv.reader(handle))
    assert traces[0] == ["seed", "variant", "iteration", "gbest_fitness"]
    assert len(traces) - 1 == 20 * 2 * 8  # seeds x variants x iterations
    per_run = [float(r[3]) for r in traces[1:9]]
    assert all(b <= a for a, b in zip(per_run, per_run[1:]))


def test_compare_pso_rejects_too_few_seeds(tmp_path, capsys):
    config = _write_config(tmp_path / "cfg.json")
    out = tmp_path / "out"
    assert _run(["compare-pso", "--config", config, "--out", out, "--seeds", "5"]) == 1
    assert "at least 20" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def test_kernels_all_pass(capsys):
    assert _run(["kernels"]) == 0
    out = capsys.readouterr().out
    lines = [line for line in out.splitlines() if line.strip()]
    assert len(lines) == 13
    assert all(line.startswith("PASS") for line in lines)


def test_kernels_failure_exits_3(monkeypatch, capsys):
    monkeypatch.setattr(vk, "eca_kernel_size", lambda C, p=None: 99)
    assert _run(["kernels"]) == 3
    captured = capsys.readouterr()
    assert "FAIL" in captured.out
    assert "failed" in captured.err
