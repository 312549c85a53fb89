"""Step tables, comparison tables and CSV writers for planner runs."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass
from decimal import Decimal

import numpy as np

from .planner import GOAL_REACHED, STALLED, STEP_LIMIT, RunReport

METHOD_LABELS = {"mopso": "MOPSO", "nsga2": "NSGA-II"}

STEPS_HEADER = ["step", "avg_energy_j", "avg_time_s", "runs_at_step"]
COMPARISON_HEADER = ["method", "total_energy_kj", "total_time_s", "total_steps"]
DIAGNOSTICS_HEADER = [
    "seed", "step", "pivot_x", "pivot_y", "f1r", "f1t", "d1", "d", "alpha",
    "t1", "t2", "t3", "e1", "e2", "e3", "e4", "f1", "f2", "s_remaining", "clearance", "archive_size",
]
TRAJECTORY_HEADER = ["seed", "step", "cg_x", "cg_y", "theta"]


@dataclass
class StepRow:
    step: int
    energy: float
    time: float
    runs: int


@dataclass
class MethodSummary:
    algorithm: str
    mean_energy_j: float
    mean_time_s: float
    mean_steps: float
    runs: int
    terminations: dict[str, int]

    @property
    def label(self) -> str:
        return METHOD_LABELS.get(self.algorithm, self.algorithm)


def step_table(reports: list[RunReport]) -> list[StepRow]:
    """Per-step means over the runs that reached each step index."""
    longest = max((r.n_steps for r in reports), default=0)
    rows = []
    for i in range(longest):
        reached = [r.steps[i] for r in reports if r.n_steps > i]
        rows.append(
            StepRow(
                step=i + 1,
                energy=float(np.mean([s.breakdown.f2 for s in reached])),
                time=float(np.mean([s.breakdown.f1 for s in reached])),
                runs=len(reached),
            )
        )
    return rows


def summarize(reports: list[RunReport]) -> MethodSummary:
    counts = Counter(r.termination for r in reports)
    return MethodSummary(
        algorithm=reports[0].algorithm,
        mean_energy_j=float(np.mean([r.total_energy for r in reports])),
        mean_time_s=float(np.mean([r.total_time for r in reports])),
        mean_steps=float(np.mean([r.n_steps for r in reports])),
        runs=len(reports),
        terminations={k: counts.get(k, 0) for k in (GOAL_REACHED, STEP_LIMIT, STALLED)},
    )


def _f2(x: float) -> str:
    return f"{x:.2f}"


def step_totals(rows: list[StepRow]) -> tuple[str, str]:
    """Column totals computed from the printed two-decimal values, so they add up exactly."""
    energy = sum((Decimal(_f2(r.energy)) for r in rows), Decimal("0.00"))
    time = sum((Decimal(_f2(r.time)) for r in rows), Decimal("0.00"))
    return f"{energy:.2f}", f"{time:.2f}"


def steps_csv(rows: list[StepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STEPS_HEADER)
    for r in rows:
        w.writerow([r.step, _f2(r.energy), _f2(r.time), r.runs])
    energy, time = step_totals(rows)
    w.writerow(["total", energy, time, ""])
    return buf.getvalue()


def comparison_csv(summaries: list[MethodSummary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COMPARISON_HEADER)
    for s in summaries:
        w.writerow([s.label, f"{s.mean_energy_j / 1000:.3f}", _f2(s.mean_time_s), f"{s.mean_steps:.1f}"])
    return buf.getvalue()


def diagnostics_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(DIAGNOSTICS_HEADER)
    for r in reports:
        for s in r.steps:
            d, b = s.decision, s.breakdown
            values = [d.pivot[0], d.pivot[1], d.f1r, d.f1t, d.d1, d.d, d.alpha,
                      b.t1, b.t2, b.t3, b.e1, b.e2, b.e3, b.e4, b.f1, b.f2, b.s_remaining, b.clearance]
            w.writerow([r.seed, s.step, *(f"{v:.6f}" for v in values), s.archive_size])
    return buf.getvalue()


def trajectory_csv(reports: list[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for r in reports:
        w.writerow([r.seed, 0, f"{r.start.cg[0]:.6f}", f"{r.start.cg[1]:.6f}", f"{r.start.theta:.6f}"])
        for s in r.steps:
            w.writerow([r.seed, s.step, f"{s.post.cg[0]:.6f}", f"{s.post.cg[1]:.6f}", f"{s.post.theta:.6f}"])
    return buf.getvalue()


def direction_lines(mopso: MethodSummary, nsga2: MethodSummary) -> list[str]:
    """Relative difference of MOPSO against NSGA-II, with reversals called out."""
    lines = []
    for name, a, b in (
        ("energy", mopso.mean_energy_j, nsga2.mean_energy_j),
        ("time", mopso.mean_time_s, nsga2.mean_time_s),
    ):
        rel = (a - b) / b * 100.0 if b else 0.0
        verdict = "better" if rel < 0 else ("equal" if rel == 0 else "WORSE")
        lines.append(f"MOPSO total {name}: {rel:+.1f}% vs NSGA-II ({verdict})")
    return lines


def text_report(title: str, per_algorithm: dict[str, list[RunReport]]) -> str:
    out = [title, ""]
    summaries = {}
    for algo, reports in per_algorithm.items():
        label = METHOD_LABELS.get(algo, algo)
        rows = step_table(reports)
        summaries[algo] = summary = summarize(reports)
        out.append(f"Step by step energy and time for {label} ({summary.runs} runs)")
        out.append(f"{'Step':>5}  {'Average Energy (J)':>18}  {'Average Time (s)':>16}  {'Runs':>4}")
        for r in rows:
            out.append(f"{r.step:>5}  {_f2(r.energy):>18}  {_f2(r.time):>16}  {r.runs:>4}")
        energy, time = step_totals(rows)
        out.append(f"{'Total':>5}  {energy:>18}  {time:>16}")
        t = summary.terminations
        out.append(
            f"Runs: {t[GOAL_REACHED]} goal-reached, {t[STEP_LIMIT]} step-limit, {t[STALLED]} stalled"
        )
        stalled = [r.seed for r in reports if r.termination == STALLED]
        if stalled:
            out.append(f"Stalled seeds: {', '.join(map(str, stalled))}")
        out.append("")
    if len(summaries) > 1:
        out.append("Comparison between NSGA-II and MOPSO")
        out.append(f"{'Method':<8}  {'Total Energy (KJ)':>17}  {'Total Time (s)':>14}  {'Total No of steps':>17}")
        for s in summaries.values():
            out.append(f"{s.label:<8}  {s.mean_energy_j / 1000:>17.3f}  {s.mean_time_s:>14.2f}  {s.mean_steps:>17.1f}")
        if "mopso" in summaries and "nsga2" in summaries:
            out.extend(direction_lines(summaries["mopso"], summaries["nsga2"]))
        out.append("")
    return "\n".join(out)
