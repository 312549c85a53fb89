"""Command line entry point: ``boxpush plan --map FILE ...``."""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import report as rpt
from .box_model import WorldMap
from .mapfile import MapError, load_map
from .planner import DEFAULT_ITERATIONS, DEFAULT_POPULATION, RunReport, make_optimizer, run_planner
from .svg import render_svg

logger = logging.getLogger("boxpush")

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2
FORMATS = ("text", "csv", "svg")


@dataclass
class ExperimentSpec:
    map_path: str
    algorithm: str = "mopso"
    repetitions: int = 10
    seed: int = 0
    population: int = DEFAULT_POPULATION
    iterations: int = DEFAULT_ITERATIONS
    archive_size: int = 100
    grid_divisions: int = 10
    mutation_rate: float = 1.0
    max_steps: int = 50
    out_dir: str = "out"
    formats: tuple[str, ...] = ("text", "csv")
    jobs: int = 1

    def __post_init__(self):
        if self.algorithm not in ("mopso", "nsga2", "both"):
            raise ValueError(f"algorithm must be mopso, nsga2 or both, got {self.algorithm!r}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        unknown = set(self.formats) - set(FORMATS)
        if unknown:
            raise ValueError(f"unknown output format(s): {', '.join(sorted(unknown))}")

    @property
    def algorithms(self) -> list[str]:
        return ["nsga2", "mopso"] if self.algorithm == "both" else [self.algorithm]

    def optimizer(self, algorithm: str):
        if algorithm == "mopso":
            return make_optimizer(
                "mopso",
                self.population,
                self.iterations,
                archive_size=self.archive_size,
                grid_divisions=self.grid_divisions,
                mutation_rate=self.mutation_rate,
            )
        return make_optimizer("nsga2", self.population, self.iterations)


def _run_one(args) -> RunReport:
    world, optimizer, seed, max_steps = args
    return run_planner(world, optimizer, seed=seed, max_steps=max_steps)


def run_batch(world: WorldMap, optimizer, seeds, max_steps: int = 50, jobs: int = 1) -> list[RunReport]:
    tasks = [(world, optimizer, s, max_steps) for s in seeds]
    if jobs <= 1 or len(tasks) == 1:
        return [_run_one(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_one, tasks))


def _prepare_out_dir(path: Path) -> None:
    path.mkdir(parents=True, exist_ok=True)
    probe = path / ".write-test"
    probe.write_text("")
    probe.unlink()


def run_experiment(spec: ExperimentSpec, stdout=None) -> int:
    """Run every repetition of every requested algorithm and write the artifacts."""
    stdout = stdout or sys.stdout
    try:
        world = load_map(spec.map_path)
    except MapError as exc:
        print(f"error: {spec.map_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: cannot read map {spec.map_path}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(spec.out_dir)
    try:
        _prepare_out_dir(out)
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc}", file=sys.stderr)
        return EXIT_IO

    seeds = range(spec.seed, spec.seed + spec.repetitions)
    results: dict[str, list[RunReport]] = {}
    for algo in spec.algorithms:
        logger.info("running %s x%d on %s", algo, spec.repetitions, spec.map_path)
        results[algo] = run_batch(world, spec.optimizer(algo), seeds, spec.max_steps, spec.jobs)

    title = (
        f"Map: {spec.map_path}  algorithm: {spec.algorithm}  repetitions: {spec.repetitions}  "
        f"seeds: {seeds.start}..{seeds.stop - 1}  population: {spec.population}  iterations: {spec.iterations}"
    )
    files: dict[str, str] = {}
    text = rpt.text_report(title, results)
    if "text" in spec.formats:
        files["report.txt"] = text
    if "csv" in spec.formats:
        for algo, reports in results.items():
            files[f"steps_{algo}.csv"] = rpt.steps_csv(rpt.step_table(reports))
            files[f"diagnostics_{algo}.csv"] = rpt.diagnostics_csv(reports)
            files[f"trajectory_{algo}.csv"] = rpt.trajectory_csv(reports)
        if len(results) > 1:
            files["comparison.csv"] = rpt.comparison_csv([rpt.summarize(r) for r in results.values()])
    if "svg" in spec.formats:
        for algo, reports in results.items():
            for r in reports:
                files[f"trajectory_{algo}_seed{r.seed}.svg"] = render_svg(r, world)

    try:
        for name, content in files.items():
            (out / name).write_text(content, encoding="utf-8")
    except OSError as exc:
        print(f"error: writing {out}: {exc}", file=sys.stderr)
        return EXIT_IO
    if "text" in spec.formats:
        stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boxpush", description="Two-robot box-pushing planner experiments.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    plan = sub.add_parser("plan", help="plan box trajectories on a map and tabulate energy/time")
    plan.add_argument("--map", required=True, help="map file, or a bundled map name (map1, map2)")
    plan.add_argument("--algo", default="mopso", choices=["mopso", "nsga2", "both"])
    plan.add_argument("--seed", type=int, default=0, help="base seed; repetition i uses seed+i")
    plan.add_argument("--reps", type=int, default=10)
    plan.add_argument("--pop", type=int, default=DEFAULT_POPULATION, help="swarm / population size")
    plan.add_argument("--iters", type=int, default=DEFAULT_ITERATIONS, help="iterations / generations")
    plan.add_argument("--archive", type=int, default=100, help="MOPSO archive capacity")
    plan.add_argument("--grid-div", type=int, default=10, help="MOPSO grid divisions per objective")
    plan.add_argument("--mut-rate", type=float, default=1.0, help="MOPSO mutation rate in (0, 1]")
    plan.add_argument("--max-steps", type=int, default=50)
    plan.add_argument("--out", default="out", help="output directory")
    plan.add_argument("--format", default="text,csv", help="comma list of text, csv, svg")
    plan.add_argument("--jobs", type=int, default=1, help="run repetitions in this many processes")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        spec = ExperimentSpec(
            map_path=args.map,
            algorithm=args.algo,
            repetitions=args.reps,
            seed=args.seed,
            population=args.pop,
            iterations=args.iters,
            archive_size=args.archive,
            grid_divisions=args.grid_div,
            mutation_rate=args.mut_rate,
            max_steps=args.max_steps,
            out_dir=args.out,
            formats=tuple(f.strip() for f in args.format.split(",") if f.strip()),
            jobs=args.jobs,
        )
        if not 0 < spec.mutation_rate <= 1 or min(spec.population, spec.iterations, spec.archive_size, spec.grid_divisions) < 1:
            raise ValueError("population, iterations, archive and grid-div must be >= 1 and mut-rate in (0, 1]")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run_experiment(spec)


if __name__ == "__main__":
    sys.exit(main())
