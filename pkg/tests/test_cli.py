import json

import pytest

from mar.cli import main


@pytest.fixture()
def run_args(ramen_dir, tmp_path):
    out = tmp_path / "run"
    return [
        "run",
        "--task", str(ramen_dir / "task.json"),
        "--scenario", str(ramen_dir / "scenario.json"),
        "--provider", f"scripted:{ramen_dir / 'script.json'}",
        "--kb", str(ramen_dir / "kb"),
        "--out", str(out),
    ], out


class TestRun:
    def test_run_writes_trajectory(self, run_args, capsys):
        args, out = run_args
        assert main(args) == 0
        captured = capsys.readouterr().out
        assert "ManagerDone" in captured
        data = json.loads((out / "trajectory.json").read_text())
        assert len(data["steps"]) == 9
        assert (out / "shots" / "initial.json").exists()

    def test_run_with_kb_logging(self, ramen_dir, tmp_path, capsys):
        out = tmp_path / "run"
        staging = tmp_path / "staging"
        args = [
            "run",
            "--task", str(ramen_dir / "task.json"),
            "--scenario", str(ramen_dir / "scenario.json"),
            "--provider", f"scripted:{ramen_dir / 'script.json'}",
            "--kb", str(ramen_dir / "kb"),
            "--log-kb", str(staging),
            "--out", str(out),
        ]
        assert main(args) == 0
        records = (staging / "records.jsonl").read_text().splitlines()
        assert len(records) == 9

    def test_unknown_provider_spec_fails_cleanly(self, ramen_dir, capsys):
        args = [
            "run",
            "--task", "whatever",
            "--scenario", str(ramen_dir / "scenario.json"),
            "--provider", "telepathy",
            "--kb", str(ramen_dir / "kb"),
        ]
        assert main(args) == 1
        assert "error:" in capsys.readouterr().err


class TestEval:
    def test_eval_after_run(self, run_args, ramen_dir, capsys):
        args, out = run_args
        main(args)
        assert main([
            "eval",
            "--trajectory", str(out),
            "--criteria", str(ramen_dir / "criteria.json"),
        ]) == 0
        captured = capsys.readouterr().out
        assert "CR 100.0" in captured
        report = json.loads((out / "evaluation.json").read_text())
        assert report["metrics"]["sr"] is True
        assert all(report["per_item"])


class TestBench:
    def test_bench_with_bundled_suite(self, ramen_dir, tmp_path, capsys):
        assert main([
            "bench",
            "--suite", str(ramen_dir / "suite.json"),
            "--kb", str(ramen_dir / "kb"),
            "--out", str(tmp_path / "report"),
        ]) == 0
        report = json.loads((tmp_path / "report" / "report.json").read_text())
        assert report["aggregates"]["overall"]["sr"] == 100.0


class TestKb:
    def test_kb_log_initializes_staging(self, tmp_path, capsys):
        staging = tmp_path / "staging"
        assert main(["kb", "log", "--staging", str(staging)]) == 0
        assert (staging / "records.jsonl").exists()
        assert (staging / "shots").is_dir()

    def test_kb_filter(self, tmp_path, capsys):
        in_dir = tmp_path / "traces"
        in_dir.mkdir()
        (in_dir / "a.json").write_text(json.dumps({
            "task_id": "t1", "success": True,
            "records": [{"subtask": "s", "screenshot": "x.json",
                         "action": 'Tap at {"x": 1, "y": 2}'}] * 12,
        }))
        (in_dir / "b.json").write_text(json.dumps({
            "task_id": "t1", "success": False,
            "records": [{"subtask": "s", "screenshot": "x.json",
                         "action": 'Tap at {"x": 1, "y": 2}'}] * 3,
        }))
        out = tmp_path / "filtered"
        assert main(["kb", "filter", "--in", str(in_dir), "--out", str(out)]) == 0
        assert "kept 1 of 2" in capsys.readouterr().out
        kept = json.loads((out / "t1.json").read_text())
        assert len(kept["records"]) == 12

    def test_kb_build_manager_from_tsv(self, tmp_path, capsys):
        source = tmp_path / "tasks.tsv"
        source.write_text("task one\tsteps one\ntask two\tsteps two\n")
        out = tmp_path / "manager.jsonl"
        assert main(["kb", "build-manager", "--in", str(source), "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 2

    def test_kb_build_manager_from_json(self, tmp_path):
        source = tmp_path / "tasks.json"
        source.write_text(json.dumps([
            {"instruction": "task one", "human_steps": "steps one"},
        ]))
        out = tmp_path / "manager.jsonl"
        assert main(["kb", "build-manager", "--in", str(source), "--out", str(out)]) == 0

    def test_kb_curate_with_decisions_file(self, tmp_path, capsys):
        from mar.actions import Tap
        from mar.kb_builder import StagingKBLogger
        from mar.memory import Screenshot

        staging = tmp_path / "staging"
        logger = StagingKBLogger(staging)
        shot = Screenshot(image=b'{"screen": "s"}', width=10, height=10,
                          source="sim", screen_id="s")
        logger.log_step("Maps", "tap it", shot, Tap(1, 1))
        decisions = tmp_path / "decisions.json"
        decisions.write_text(json.dumps([{"id": 1, "verdict": "accept"}]))
        out = tmp_path / "kb"
        assert main([
            "kb", "curate",
            "--staging", str(staging),
            "--decisions", str(decisions),
            "--out", str(out),
        ]) == 0
        assert "Maps: 1 docs" in capsys.readouterr().out
        assert (out / "operator" / "maps.jsonl").exists()
