"""Command-line interface: run tasks, evaluate trajectories, run benchmark
suites, and drive the knowledge-base pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .benchmark import format_report, load_suite, run_benchmark, save_report, score_trajectory
from .criteria import load_criteria, load_judgments
from .embedding import make_embedder
from .errors import MarError
from .kb_builder import (
    CurationDecision,
    RawTrace,
    StagingKBLogger,
    build_manager_kb,
    curate,
    filter_traces,
    init_staging,
    load_decisions,
    load_staged,
    save_decisions,
)
from .memory import TaskInstruction
from .orchestrator import RunConfig, run_task
from .providers import HttpProvider, ProviderScript, ScriptedProvider
from .retrieval import load_kb_dir
from .scenario import load_scenario
from .simulator import SimulatedDevice
from .trajectory import load_trajectory


def _read_task(value: str) -> str:
    path = Path(value)
    if path.is_file():
        text = path.read_text(encoding="utf-8").strip()
        if path.suffix == ".json":
            return json.loads(text)["task"]
        return text
    return value


def _build_provider(spec: str):
    if spec.startswith("scripted:"):
        return ScriptedProvider(ProviderScript.load(spec[len("scripted:"):]))
    if spec == "http":
        return HttpProvider()
    raise MarError(f"unknown provider spec {spec!r} (use scripted:<file> or http)")


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        max_steps=args.max_steps,
        repeat_cap=args.repeat_cap,
        k_retrieve=args.k,
        provider=args.provider,
        embedder=args.embedder,
        kb_dir=args.kb,
        scenario_path=args.scenario,
        log_kb=args.log_kb,
        out_dir=args.out,
    )
    scenario = load_scenario(args.scenario)
    backend = SimulatedDevice(scenario)
    provider = _build_provider(args.provider)
    embedder = make_embedder(args.embedder)
    manager_kb, registry = load_kb_dir(args.kb, embedder)
    logger = StagingKBLogger(args.log_kb) if args.log_kb else None
    trajectory = run_task(
        TaskInstruction(_read_task(args.task)),
        backend,
        provider,
        manager_kb,
        registry,
        cfg,
        kb_logger=logger,
        kb_root=args.kb,
    )
    print(f"termination: {trajectory.termination} after {len(trajectory.steps)} steps")
    if args.out:
        print(f"trajectory written to {Path(args.out) / 'trajectory.json'}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    data = load_trajectory(args.trajectory)
    criteria = load_criteria(args.criteria)
    judgments = load_judgments(args.judgments) if args.judgments else None
    record = score_trajectory(data, criteria, judgments)
    from .criteria import evaluate_criteria

    result = evaluate_criteria(data, criteria, judgments)
    for index, (item, ok) in enumerate(zip(criteria.items, result.per_item)):
        flag = "x" if ok else " "
        suffix = " (manual judgment missing)" if index in result.missing_manual else ""
        print(f"[{flag}] {item.description or item.kind}{suffix}")
    print(
        f"CR {record.cr:.1f}  steps {record.steps}  efficiency {record.efficiency:.2f}  "
        f"SR {'success' if record.sr else 'failure'}"
    )
    report = {
        "task_id": criteria.task_id,
        "per_item": list(result.per_item),
        "missing_manual": list(result.missing_manual),
        "metrics": record.to_dict(),
    }
    out_path = Path(args.trajectory) / "evaluation.json"
    out_path.write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    print(f"evaluation written to {out_path}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    suite = load_suite(args.suite)
    cfg = RunConfig(embedder=args.embedder, kb_dir=args.kb)
    report = run_benchmark(suite, cfg, workers=args.workers)
    print(format_report(report))
    if args.out:
        path = save_report(report, args.out)
        print(f"report written to {path}")
    return 0


def _cmd_kb_log(args: argparse.Namespace) -> int:
    staging = init_staging(args.staging)
    print(f"staging directory ready at {staging} "
          f"(enable logging with: mar run --log-kb {staging})")
    return 0


def _cmd_kb_filter(args: argparse.Namespace) -> int:
    in_dir = Path(args.in_dir)
    traces = []
    for path in sorted(in_dir.glob("*.json")):
        obj = json.loads(path.read_text(encoding="utf-8"))
        traces.append(
            RawTrace(
                task_id=obj["task_id"],
                records=obj["records"],
                success=bool(obj["success"]),
            )
        )
    kept = filter_traces(traces)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for trace in kept:
        payload = {
            "task_id": trace.task_id,
            "success": trace.success,
            "records": trace.records,
        }
        name = "".join(c if c.isalnum() else "_" for c in trace.task_id)
        (out_dir / f"{name}.json").write_text(
            json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    print(f"kept {len(kept)} of {len(traces)} traces")
    return 0


def _cmd_kb_build_manager(args: argparse.Namespace) -> int:
    path = Path(args.in_file)
    entries: list[tuple[str, str]] = []
    if path.suffix == ".tsv":
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            instruction, _, steps = line.partition("\t")
            entries.append((instruction.strip(), steps.strip()))
    else:
        raw = json.loads(path.read_text(encoding="utf-8"))
        for item in raw:
            if isinstance(item, dict):
                entries.append((item["instruction"], item["human_steps"]))
            else:
                entries.append((item[0], item[1]))
    docs = build_manager_kb(entries, args.out)
    print(f"wrote {len(docs)} planner docs to {args.out}")
    return 0


def _cmd_kb_curate(args: argparse.Namespace) -> int:
    decisions = load_decisions(args.decisions) if args.decisions else []
    staged = load_staged(args.staging)
    decided = {d.entry_id for d in decisions}
    pending = [e for e in staged if e.id not in decided]
    if pending and args.interactive:
        from .actions import render_action

        for entry in pending:
            print(f"--- entry {entry.id} [{entry.app}] ---")
            print(f"subtask:    {entry.subtask}")
            print(f"action:     {render_action(entry.action)}")
            print(f"screenshot: {entry.screenshot}")
            while True:
                answer = input("verdict [a]ccept / [r]eject / [e]dit: ").strip().lower()
                if answer in ("a", "accept"):
                    decisions.append(CurationDecision(entry.id, "accept"))
                    break
                if answer in ("r", "reject"):
                    decisions.append(CurationDecision(entry.id, "reject"))
                    break
                if answer in ("e", "edit"):
                    raw = input("replacement JSON (subtask/action/app/screenshot): ")
                    decisions.append(
                        CurationDecision(entry.id, "edit", json.loads(raw))
                    )
                    break
            if args.decisions:
                save_decisions(decisions, args.decisions)
    counts = curate(args.staging, decisions, args.out)
    for app, count in counts.items():
        print(f"{app}: {count} docs")
    print(f"operator KB written under {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mar",
        description="Retrieval-augmented hierarchical agent loop for mobile "
        "UI automation, with a deterministic simulator and evaluation harness.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one task")
    run.add_argument("--task", required=True, help="task text or a file containing it")
    run.add_argument("--scenario", required=True, help="scenario JSON file")
    run.add_argument("--provider", required=True, help="scripted:<script.json> or http")
    run.add_argument("--kb", required=True, help="knowledge-base directory")
    run.add_argument("--max-steps", type=int, default=30)
    run.add_argument("--repeat-cap", type=int, default=5)
    run.add_argument("--k", type=int, default=3, help="planner exemplars to retrieve")
    run.add_argument("--embedder", default=None,
                 help="fallback or http:<url>; default follows MAR_EMBEDDER_URL")
    run.add_argument("--log-kb", default=None, help="staging dir for KB logging")
    run.add_argument("--out", default=None, help="trajectory output directory")
    run.set_defaults(func=_cmd_run)

    ev = sub.add_parser("eval", help="score a persisted trajectory")
    ev.add_argument("--trajectory", required=True, help="trajectory directory")
    ev.add_argument("--criteria", required=True, help="completion criteria JSON")
    ev.add_argument("--judgments", default=None, help="manual judgments JSON")
    ev.set_defaults(func=_cmd_eval)

    bench = sub.add_parser("bench", help="run a benchmark suite")
    bench.add_argument("--suite", required=True, help="suite JSON file")
    bench.add_argument("--out", default=None, help="report output directory")
    bench.add_argument("--workers", type=int, default=1)
    bench.add_argument("--embedder", default=None)
    bench.add_argument("--kb", default=None, help="knowledge-base directory")
    bench.set_defaults(func=_cmd_bench)

    kb = sub.add_parser("kb", help="knowledge-base pipeline")
    kb_sub = kb.add_subparsers(dest="kb_command", required=True)

    kb_log = kb_sub.add_parser("log", help="initialize a staging directory")
    kb_log.add_argument("--staging", required=True)
    kb_log.set_defaults(func=_cmd_kb_log)

    kb_filter = kb_sub.add_parser("filter", help="filter raw traces")
    kb_filter.add_argument("--in", dest="in_dir", required=True)
    kb_filter.add_argument("--out", required=True)
    kb_filter.set_defaults(func=_cmd_kb_filter)

    kb_build = kb_sub.add_parser("build-manager", help="emit the planner KB")
    kb_build.add_argument("--in", dest="in_file", required=True, help="tsv or json")
    kb_build.add_argument("--out", required=True)
    kb_build.set_defaults(func=_cmd_kb_build_manager)

    kb_curate = kb_sub.add_parser("curate", help="review staged executor entries")
    kb_curate.add_argument("--staging", required=True)
    kb_curate.add_argument("--decisions", default=None, help="resumable decisions file")
    kb_curate.add_argument("--out", required=True)
    kb_curate.add_argument("--interactive", action="store_true")
    kb_curate.set_defaults(func=_cmd_kb_curate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MarError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
