"""Command-line benchmark driver.

Subcommands:
  run       execute one optimizer or baseline run and persist its trace
  compare   join traces onto a common iteration axis for plotting
  gen-data  write the dataset behind a profile as columnar text

All CSV output is comma-separated with '\\n' line endings, '.' decimal
points, and a mandatory header.  Floats are written with repr, so a
rerun of the same config produces byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    apply_overrides,
    build_problem,
    config_to_json,
    load_profile,
    parse_config,
    to_optimizer_config,
    to_psgd_config,
)
from .parallel import RunRecord, run_psmco
from .problems import PSGDRecord, run_psgd_baseline


def _fmt(x) -> str:
    """Deterministic scalar formatting: shortest round-trip repr."""
    if isinstance(x, (np.floating, float)):
        return repr(float(x))
    return str(x)


# ---------------------------------------------------------------------------
# trace and summary serialization


def psmco_trace_lines(record: RunRecord) -> List[str]:
    m = record.config.m_workers
    header = ["problem", "t", "m_star", "f_value", "theta_0", "theta_1"]
    header += [f"log_z_{j}" for j in range(m)]
    lines = [",".join(header)]
    for row in record.rows:
        cells = [record.problem, str(row.iteration), str(row.worker), _fmt(row.f_value)]
        cells += [_fmt(v) for v in row.theta]
        cells += [_fmt(v) for v in row.log_z]
        lines.append(",".join(cells))
    return lines


def psgd_trace_lines(problem_name: str, record: PSGDRecord) -> List[str]:
    lines = ["problem,t,f_best"]
    for t, value in enumerate(record.f_best):
        lines.append(f"{problem_name},{t},{_fmt(value)}")
    return lines


def _summary_lines(pairs) -> List[str]:
    return [f"{k}={v}" for k, v in pairs]


def run_and_persist(config: RunConfig, out_dir: str) -> None:
    """Execute the configured run and write its artifacts into out_dir.

    Files: config.json (canonical echo), trace.csv, summary.txt, and
    particles.csv when the config keeps final particles.  Contents are
    deterministic given the config.
    """
    problem = build_problem(config)
    os.makedirs(out_dir, exist_ok=True)

    if config.algorithm == "psmco":
        final, record = run_psmco(
            problem.model,
            problem.space,
            to_optimizer_config(config),
            problem_name=config.problem,
        )
        trace = psmco_trace_lines(record)
        summary = _summary_lines(
            [
                ("problem", config.problem),
                ("algorithm", config.algorithm),
                ("n", config.n),
                ("seed", config.seed),
                ("iterations", record.rows[-1].iteration),
                ("best_worker", final.worker),
                ("f_final", _fmt(final.f_value)),
                ("theta_final_0", _fmt(final.theta[0])),
                ("theta_final_1", _fmt(final.theta[1])),
                ("log_z_final", _fmt(final.log_z)),
            ]
        )
        particles = None
        if record.final_particles is not None:
            particles = ["worker,particle,theta_0,theta_1"]
            for w in range(record.final_particles.shape[0]):
                for p in range(record.final_particles.shape[1]):
                    theta = record.final_particles[w, p]
                    particles.append(
                        f"{w},{p}," + ",".join(_fmt(v) for v in theta)
                    )
        wall = record.wall_time
    else:
        record = run_psgd_baseline(problem, to_psgd_config(config))
        trace = psgd_trace_lines(config.problem, record)
        best = int(np.argmin(record.f_final))
        summary = _summary_lines(
            [
                ("problem", config.problem),
                ("algorithm", config.algorithm),
                ("n", config.n),
                ("seed", config.seed),
                ("iterations", record.config.iterations),
                ("f_final", _fmt(float(record.f_final[best]))),
                ("theta_final_0", _fmt(record.thetas[best, 0])),
                ("theta_final_1", _fmt(record.thetas[best, 1])),
            ]
        )
        particles = None
        wall = None

    with open(os.path.join(out_dir, "config.json"), "w") as fh:
        fh.write(config_to_json(config))
    with open(os.path.join(out_dir, "trace.csv"), "w") as fh:
        fh.write("\n".join(trace) + "\n")
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write("\n".join(summary) + "\n")
    if particles is not None:
        with open(os.path.join(out_dir, "particles.csv"), "w") as fh:
            fh.write("\n".join(particles) + "\n")
    if wall is not None:
        print(f"wall_time_seconds={wall:.3f}")


# ---------------------------------------------------------------------------
# compare


def _read_trace(path: str) -> Tuple[str, dict]:
    """Returns (problem_name, {iteration: f}) from a trace CSV."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty trace file")
    header = lines[0].split(",")
    try:
        t_col = header.index("t")
        p_col = header.index("problem")
    except ValueError:
        raise ConfigError(f"{path}: missing mandatory columns") from None
    if "f_value" in header:
        f_col = header.index("f_value")
    elif "f_best" in header:
        f_col = header.index("f_best")
    else:
        raise ConfigError(f"{path}: no cost column (f_value or f_best)")
    problem = None
    values = {}
    for ln in lines[1:]:
        cells = ln.split(",")
        if problem is None:
            problem = cells[p_col]
        values[int(cells[t_col])] = float(cells[f_col])
    if problem is None or not values:
        raise ConfigError(f"{path}: trace has a header but no rows")
    return problem, values


def emit_compare(psmco_path: str, psgd_paths: Sequence[str], out_path: str) -> None:
    """Join one optimizer trace with up to two baseline traces.

    Baseline columns follow argument order: the first path is labelled
    f_psgd_good_init, the second f_psgd_bad_init.  Traces are joined on
    the iterations they share (the coarsest emission axis).  Nothing is
    written unless the join is non-empty and all problem ids agree.
    """
    if len(psgd_paths) > 2:
        raise ConfigError("compare accepts at most two baseline traces")
    problem, psmco_vals = _read_trace(psmco_path)
    baseline_cols = ["f_psgd_good_init", "f_psgd_bad_init"][: len(psgd_paths)]
    baselines = []
    for path in psgd_paths:
        b_problem, b_vals = _read_trace(path)
        if b_problem != problem:
            raise ConfigError(
                f"problem mismatch: {psmco_path} is {problem!r} but {path} is {b_problem!r}"
            )
        baselines.append(b_vals)

    shared = set(psmco_vals)
    for b in baselines:
        shared &= set(b)
    shared = sorted(shared)
    if not shared:
        raise ConfigError("traces share no iterations; nothing to compare")

    lines = [",".join(["iter", "f_psmco"] + baseline_cols)]
    for t in shared:
        cells = [str(t), _fmt(psmco_vals[t])]
        cells += [_fmt(b[t]) for b in baselines]
        lines.append(",".join(cells))
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# gen-data


def write_dataset(config: RunConfig, out_path: str) -> None:
    problem = build_problem(config)
    if config.problem == "sigmoid":
        lines = ["x,y"]
        for xi, yi in zip(problem.x, problem.y):
            lines.append(f"{_fmt(xi)},{_fmt(yi)}")
    else:
        parts = problem.means.shape[1]
        header = []
        for k in range(parts):
            header += [f"mean{k}_x", f"mean{k}_y"]
        lines = [",".join(["i"] + header)]
        for i in range(problem.means.shape[0]):
            flat = problem.means[i].ravel()
            lines.append(",".join([str(i)] + [_fmt(v) for v in flat]))
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# argument parsing and dispatch


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="psmco",
        description="Benchmark driver for the parallel particle optimizer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute one run and persist its trace")
    src = run_p.add_mutually_exclusive_group(required=True)
    src.add_argument("--profile", help="named config profile")
    src.add_argument("--config", help="path to a JSON config document")
    run_p.add_argument("--seed", type=int, default=None, help="run seed (non-negative)")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="config override, may repeat",
    )

    cmp_p = sub.add_parser("compare", help="join traces onto a common axis")
    cmp_p.add_argument("--psmco", required=True, help="optimizer trace CSV")
    cmp_p.add_argument(
        "--psgd",
        action="append",
        default=[],
        help="baseline trace CSV; first is the good init, second the bad init",
    )
    cmp_p.add_argument("--out", required=True, help="output CSV path")

    gen_p = sub.add_parser("gen-data", help="write a profile's dataset as CSV")
    gen_p.add_argument("--profile", required=True)
    gen_p.add_argument("--seed", type=int, default=None, help="dataset seed")
    gen_p.add_argument("--out", required=True, help="output CSV path")
    return parser


def _config_for_run(args) -> RunConfig:
    if args.profile is not None:
        doc = load_profile(args.profile)
    else:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from None
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
    doc = apply_overrides(doc, args.override)
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("seed must be non-negative")
        doc["seed"] = args.seed
    return parse_config(doc)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            config = _config_for_run(args)
            run_and_persist(config, args.out)
        elif args.command == "compare":
            emit_compare(args.psmco, args.psgd, args.out)
        else:  # gen-data
            doc = load_profile(args.profile)
            if args.seed is not None:
                if args.seed < 0:
                    raise ConfigError("seed must be non-negative")
                doc["data_seed"] = args.seed
            config = parse_config(doc)
            write_dataset(config, args.out)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except RuntimeError as e:
        print(f"run failed: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
