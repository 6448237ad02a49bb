"""Command-line front end: generate instances, sweep fronts, analyze results.

Every output file gets a ``*.manifest.json`` sidecar echoing the command,
its configuration and solver statistics, so any run can be reproduced from
its artifacts alone.
"""

from __future__ import annotations

import glob
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click

from .analysis import (
    LabeledFront,
    RunStats,
    build_report,
    count_distinct,
    summarize_stats,
    write_correlation_csv,
    write_stats_csv,
)
from .errors import InfeasibleModelError, LotcutError
from .generator import GeneratorConfig, generate
from .instance import Instance
from .milp import MilpStatus
from .model import RelaxMode
from .patterns import PatternSet
from .scalarize import (
    biobjective_from_instance,
    compute_payoff,
    epsilon_sweep,
    filter_nondominated,
    read_front_csv,
    weighting_sweep,
    write_front_csv,
)

DEFAULT_SWEEP_POINTS = 50
DEFAULT_HEURISTIC_PATTERNS = 15


@dataclass
class RunManifest:
    """Reproducibility sidecar: everything needed to rerun a command."""

    command: str
    config: dict
    seeds: list = field(default_factory=list)
    group: int | None = None
    method: str | None = None
    sweep_count: int | None = None
    class_id: int | None = None
    outputs: list = field(default_factory=list)
    wall_time: float = 0.0
    solver_stats: dict = field(default_factory=dict)

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(asdict(self), indent=2) + "\n")

    @staticmethod
    def load(path: Path) -> dict:
        return json.loads(path.read_text())


def manifest_path_for(output: Path) -> Path:
    return output.with_suffix(".manifest.json") if output.suffix else Path(
        str(output) + ".manifest.json")


@click.group()
def main():
    """Bi-objective production-and-cutting planning toolkit."""


@main.command("generate")
@click.option("--class", "class_id", type=int, required=True,
              help="Instance class id (1-12).")
@click.option("--seed", type=int, required=True, help="Base seed.")
@click.option("--count", type=int, default=1, show_default=True,
              help="How many instances; seeds are seed..seed+count-1.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=".",
              show_default=True)
def cmd_generate(class_id: int, seed: int, count: int, out_dir: str):
    """Write one or more seeded benchmark instances as JSON files."""
    if class_id not in range(1, 13):
        raise click.UsageError(f"--class must be in 1..12, got {class_id}")
    if count < 1:
        raise click.UsageError("--count must be positive")
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    for offset in range(count):
        started = time.perf_counter()
        inst_seed = seed + offset
        config = GeneratorConfig(class_id=class_id, seed=inst_seed)
        inst = generate(config)
        path = directory / f"class{class_id}_seed{inst_seed}.json"
        inst.save(path)
        manifest = RunManifest(
            command="generate",
            config={"class": class_id, "seed": inst_seed, "count": count,
                    "out": str(directory)},
            seeds=[inst_seed],
            class_id=class_id,
            outputs=[str(path)],
            wall_time=time.perf_counter() - started,
        )
        manifest.write(manifest_path_for(path))
        click.echo(f"wrote {path}")


def _plan_payload(point) -> dict:
    plan = point.plan
    payload = {"control": point.control, "status": point.status}
    if plan is not None:
        payload.update(
            x=plan.x.tolist(), w=plan.w.tolist(), z=plan.z.tolist(),
            y=[[block.tolist() for block in row] for row in plan.y],
            e=plan.e.tolist(),
        )
    return payload


@main.command("solve")
@click.option("--instance", "instance_path", type=click.Path(exists=True, dir_okay=False),
              required=True)
@click.option("--group", type=click.IntRange(1, 3), required=True,
              help="1: heuristic patterns, integer; 2: all patterns, integer; "
                   "3: all patterns, only the setup indicator integer.")
@click.option("--method", type=click.Choice(["weighting", "epsilon"]), required=True)
@click.option("--points", type=int, default=DEFAULT_SWEEP_POINTS, show_default=True)
@click.option("--n-patterns", type=int, default=DEFAULT_HEURISTIC_PATTERNS,
              show_default=True, help="Pattern budget per machine for group 1.")
@click.option("--time-limit", type=float, default=None,
              help="Per-solve wall-clock limit in seconds.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--dump-solutions", is_flag=True,
              help="Also write the decision variables of every sweep point.")
def cmd_solve(instance_path: str, group: int, method: str, points: int,
              n_patterns: int, time_limit: float | None, out_path: str,
              dump_solutions: bool):
    """Sweep one instance and write its front CSV (plus manifest sidecar)."""
    if points < 1:
        raise click.UsageError("--points must be positive")
    started = time.perf_counter()
    inst = Instance.load(instance_path)
    instance_manifest = manifest_path_for(Path(instance_path))
    class_id = None
    inst_seed = None
    if instance_manifest.exists():
        meta = RunManifest.load(instance_manifest)
        class_id = meta.get("class_id")
        seeds = meta.get("seeds") or []
        inst_seed = seeds[0] if seeds else None

    limit = n_patterns if group == 1 else None
    relax = RelaxMode.RELAXED_EXCEPT_Z if group == 3 else RelaxMode.INTEGER
    try:
        pattern_set = PatternSet.build(inst, limit=limit)
        bi = biobjective_from_instance(inst, pattern_set, relax)
        payoff = compute_payoff(bi, time_limit=time_limit)
        sweep = weighting_sweep if method == "weighting" else epsilon_sweep
        front = sweep(bi, points, payoff=payoff, time_limit=time_limit)
    except InfeasibleModelError as exc:
        raise click.ClickException(f"instance {instance_path} is infeasible: {exc}")
    except LotcutError as exc:
        raise click.ClickException(str(exc))

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_front_csv(front, out)
    outputs = [str(out)]
    if dump_solutions:
        dump = out.with_suffix(out.suffix + ".solutions.json") if out.suffix else Path(
            str(out) + ".solutions.json")
        dump.write_text(json.dumps([_plan_payload(p) for p in front.points], indent=2) + "\n")
        outputs.append(str(dump))

    statuses = [p.status for p in front.points]
    manifest = RunManifest(
        command="solve",
        config={"instance": str(instance_path), "group": group, "method": method,
                "points": points, "n_patterns": n_patterns if group == 1 else None,
                "time_limit": time_limit, "dump_solutions": dump_solutions},
        seeds=[inst_seed] if inst_seed is not None else [],
        group=group,
        method=method,
        sweep_count=points,
        class_id=class_id,
        outputs=outputs,
        wall_time=time.perf_counter() - started,
        solver_stats={
            "solves": len(front.points),
            "optimal": sum(1 for s in statuses if s == MilpStatus.OPTIMAL.value),
            "nodes": sum(p.nodes for p in front.points),
            "n_vars": front.n_vars,
            "n_rows": front.n_rows,
            "sweep_time": front.wall_time,
            "ideal": front.payoff.z_star.tolist(),
            "nadir": front.payoff.z_nadir.tolist(),
        },
    )
    manifest.write(manifest_path_for(out))
    click.echo(f"wrote {out} ({len(front.front)} nondominated of {len(front.points)} points)")
    if any(s != MilpStatus.OPTIMAL.value for s in statuses):
        click.echo("warning: not every sweep point reached optimality", err=True)
        sys.exit(1)


@main.command("analyze")
@click.option("--fronts", "fronts_glob", required=True,
              help="Glob of front CSV files to aggregate.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True)
def cmd_analyze(fronts_glob: str, out_dir: str):
    """Aggregate front CSVs into correlation and run-statistics CSVs."""
    started = time.perf_counter()
    paths = sorted(glob.glob(fronts_glob))
    if not paths:
        raise click.UsageError(f"no files match {fronts_glob!r}")
    labeled: list[LabeledFront] = []
    stats: list[RunStats] = []
    for raw in paths:
        path = Path(raw)
        points = read_front_csv(path)
        meta: dict = {}
        sidecar = manifest_path_for(path)
        if sidecar.exists():
            meta = RunManifest.load(sidecar)
        class_id = meta.get("class_id")
        method = meta.get("method") or (points[0].method if points else "unknown")
        optimal = [p for p in points if p.status == MilpStatus.OPTIMAL.value]
        front_points = tuple(filter_nondominated(optimal))
        labeled.append(LabeledFront(class_id=class_id, instance=path.stem,
                                    method=method, points=front_points))
        solver_stats = meta.get("solver_stats", {})
        stats.append(RunStats(
            class_id=class_id, instance=path.stem, method=method,
            nd=count_distinct(front_points),
            time_s=float(solver_stats.get("sweep_time", 0.0)),
            nv=int(solver_stats.get("n_vars", 0)),
            nc=int(solver_stats.get("n_rows", 0)),
        ))

    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    report = build_report(labeled)
    correlations_path = directory / "correlations.csv"
    stats_path = directory / "stats.csv"
    write_correlation_csv(report, correlations_path)
    write_stats_csv(summarize_stats(stats), stats_path)
    manifest = RunManifest(
        command="analyze",
        config={"fronts": fronts_glob, "out": out_dir, "inputs": [str(p) for p in paths]},
        outputs=[str(correlations_path), str(stats_path)],
        wall_time=time.perf_counter() - started,
        solver_stats={"fronts": len(paths), "skipped": len(report.skipped)},
    )
    manifest.write(directory / "analysis.manifest.json")
    click.echo(f"wrote {correlations_path} and {stats_path}")


if __name__ == "__main__":
    main()
