"""Benchmark runner: many tasks, per-task metrics, aggregated report.

Simulation oracles: an operation is correct iff it changed device state
(or is a Wait); a reflection is correct iff its verdict equals the scenario
oracle outcome recorded at execution time.  Task failures are recorded as
failed runs and never abort the suite.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .criteria import CompletionCriteria, evaluate_criteria, load_criteria
from .embedding import make_embedder
from .errors import MarError
from .metrics import (
    MetricsRecord,
    compute_cr,
    compute_efficiency,
    compute_oa,
    compute_ra,
    judge_sr,
)
from .memory import TaskInstruction
from .orchestrator import RunConfig, run_task
from .providers import ProviderScript, ScriptedProvider
from .retrieval import load_kb_dir
from .scenario import load_scenario
from .simulator import SimulatedDevice
from .trajectory import Trajectory


@dataclass(frozen=True)
class SuiteEntry:
    task: str
    scenario_path: str
    criteria_path: str
    script_path: str | None = None
    judgments_path: str | None = None
    category: str = "default"


def load_suite(path: str | Path) -> list[SuiteEntry]:
    base = Path(path).parent
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = []
    for item in raw:
        entries.append(
            SuiteEntry(
                task=item["task"],
                scenario_path=str(base / item["scenario"]),
                criteria_path=str(base / item["criteria"]),
                script_path=str(base / item["script"]) if item.get("script") else None,
                judgments_path=(
                    str(base / item["judgments"]) if item.get("judgments") else None
                ),
                category=item.get("category", "default"),
            )
        )
    return entries


def score_trajectory(
    trajectory: Trajectory | dict,
    criteria: CompletionCriteria,
    manual_judgments: dict[int, bool] | None = None,
    max_steps: int = 30,
    repeat_cap: int = 5,
) -> MetricsRecord:
    """Metrics for one finished run, using the simulation oracles."""
    data = trajectory.to_dict() if isinstance(trajectory, Trajectory) else trajectory
    result = evaluate_criteria(data, criteria, manual_judgments)
    cr = compute_cr(result.completed, result.total)
    steps = data["steps"]
    n = len(steps)
    if n > 0:
        correct_ops = sum(
            1 for s in steps if s.get("changed") or s.get("action") == "Wait at null"
        )
        scored = [s for s in steps if s.get("oracle_outcome")]
        correct_reflections = sum(
            1 for s in scored if s.get("outcome") == s.get("oracle_outcome")
        )
        oa = compute_oa(correct_ops, n)
        ra = compute_ra(correct_reflections, n) if scored else None
        efficiency = compute_efficiency(cr, n)
    else:
        oa = None
        ra = None
        efficiency = 0.0
    erroneous = _erroneous_completion(data, result)
    verdict = judge_sr(data, erroneous, max_steps=max_steps, repeat_cap=repeat_cap)
    return MetricsRecord(
        cr=cr,
        oa=oa,
        ra=ra,
        steps=n,
        efficiency=efficiency,
        sr=verdict.success,
        sr_conditions={
            "within_step_cap": verdict.within_step_cap,
            "no_erroneous_completion": verdict.no_erroneous_completion,
            "no_over_repetition": verdict.no_over_repetition,
        },
    )


def _erroneous_completion(data: dict, result) -> bool:
    """In simulation: the agent declared DONE while an automatically
    checkable item is still unmet (manual items cannot refute the claim)."""
    if data.get("termination") != "ManagerDone":
        return False
    for index, ok in enumerate(result.per_item):
        if index in result.missing_manual:
            continue
        if not ok:
            return True
    return False


def run_suite_entry(entry: SuiteEntry, cfg: RunConfig) -> dict:
    scenario = load_scenario(entry.scenario_path)
    backend = SimulatedDevice(scenario)
    if entry.script_path is None:
        raise MarError(f"suite entry {entry.task!r} has no provider script")
    provider = ScriptedProvider(ProviderScript.load(entry.script_path))
    embedder = make_embedder(cfg.embedder)
    if cfg.kb_dir:
        manager_kb, registry = load_kb_dir(cfg.kb_dir, embedder)
    else:
        from .retrieval import ManagerKB, OperatorKBRegistry

        manager_kb, registry = ManagerKB([], embedder), OperatorKBRegistry()
    trajectory = run_task(
        TaskInstruction(entry.task),
        backend,
        provider,
        manager_kb,
        registry,
        cfg,
        kb_root=cfg.kb_dir,
    )
    criteria = load_criteria(entry.criteria_path)
    judgments = None
    if entry.judgments_path:
        from .criteria import load_judgments

        judgments = load_judgments(entry.judgments_path)
    record = score_trajectory(
        trajectory, criteria, judgments, cfg.max_steps, cfg.repeat_cap
    )
    return {
        "task": entry.task,
        "category": entry.category,
        "termination": trajectory.termination,
        "metrics": record.to_dict(),
        "error": None,
    }


def run_benchmark(
    suite: list[SuiteEntry], cfg: RunConfig, workers: int = 1
) -> dict:
    """Run every suite entry and aggregate per-category and overall means."""
    if not suite:
        raise MarError("benchmark suite is empty")

    def _one(entry: SuiteEntry) -> dict:
        try:
            return run_suite_entry(entry, cfg)
        except Exception as exc:  # recorded, never fatal to the suite
            return {
                "task": entry.task,
                "category": entry.category,
                "termination": None,
                "metrics": None,
                "error": f"{type(exc).__name__}: {exc}",
            }

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_one, suite))
    else:
        results = [_one(entry) for entry in suite]

    categories = sorted({r["category"] for r in results})
    aggregates = {"overall": _aggregate(results)}
    for category in categories:
        aggregates[category] = _aggregate(
            [r for r in results if r["category"] == category]
        )
    return {"tasks": results, "aggregates": aggregates}


def _aggregate(results: list[dict]) -> dict:
    scored = [r["metrics"] for r in results if r["metrics"] is not None]
    failed = len(results) - len(scored)
    if not scored:
        return {"tasks": len(results), "failed_runs": failed}
    mean_cr = _mean([m["cr"] for m in scored])
    mean_steps = _mean([m["steps"] for m in scored])
    oa_values = [m["oa"] for m in scored if m["oa"] is not None]
    ra_values = [m["ra"] for m in scored if m["ra"] is not None]
    return {
        "tasks": len(results),
        "failed_runs": failed,
        "cr": mean_cr,
        "oa": _mean(oa_values) if oa_values else None,
        "ra": _mean(ra_values) if ra_values else None,
        "steps": mean_steps,
        "efficiency": compute_efficiency(mean_cr, mean_steps) if mean_steps else 0.0,
        "sr": 100.0 * sum(1 for m in scored if m["sr"]) / len(results),
    }


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def format_report(report: dict) -> str:
    """Aligned text table mirroring the aggregate columns."""
    header = f"{'Category':<20} {'CR':>6} {'OA':>6} {'RA':>6} {'Steps':>6} {'Effic.':>7} {'SR':>6}"
    lines = [header, "-" * len(header)]
    for name, agg in report["aggregates"].items():
        if "cr" not in agg:
            lines.append(f"{name:<20} (no scored runs)")
            continue
        oa = f"{agg['oa']:.1f}" if agg.get("oa") is not None else "--"
        ra = f"{agg['ra']:.1f}" if agg.get("ra") is not None else "--"
        lines.append(
            f"{name:<20} {agg['cr']:>6.1f} {oa:>6} {ra:>6} "
            f"{agg['steps']:>6.1f} {agg['efficiency']:>7.2f} {agg['sr']:>6.1f}"
        )
    return "\n".join(lines)


def save_report(report: dict, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "report.json"
    path.write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (out / "report.txt").write_text(format_report(report) + "\n", encoding="utf-8")
    return path
