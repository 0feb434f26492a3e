"""CLI surface: commands, artifacts on disk, and exit codes."""

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from pathlib import Path

import pytest
from click.testing import CliRunner

from cogmcts import RunConfig, seed_artifact
from cogmcts.backends import BackendConfig
from cogmcts.cli import main

from conftest import build_kp_script, kp_response


@pytest.fixture
def runner():
    return CliRunner()


def write_scripted_config(tmp_path, **overrides) -> Path:
    script = tmp_path / "script.json"
    script.write_text(json.dumps(build_kp_script()))
    cfg = RunConfig(problem="kp", size_params={"n": 20, "capacity": 5.0},
                    n_instances=4, n_init=4, budget=20, seed=1, **overrides)
    cfg.backend = BackendConfig(kind="scripted", script_path=str(script))
    path = tmp_path / "config.json"
    cfg.save(path)
    return path


class TestGenInstances:
    def test_writes_dataset(self, runner, tmp_path):
        out = tmp_path / "data.json"
        result = runner.invoke(main, ["gen-instances", "--problem", "kp",
                                      "--n-instances", "3", "--seed", "7",
                                      "--param", "n=10",
                                      "--param", "capacity=2.5",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        doc = json.loads(out.read_text())
        assert len(doc["instances"]) == 3

    def test_bad_param_syntax(self, runner, tmp_path):
        result = runner.invoke(main, ["gen-instances", "--problem", "kp",
                                      "--param", "n10",
                                      "--out", str(tmp_path / "x.json")])
        assert result.exit_code == 1


class TestRun:
    def test_scripted_run_writes_outputs(self, runner, tmp_path):
        cfg_path = write_scripted_config(tmp_path)
        out = tmp_path / "run"
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        for name in ("report.json", "config.json", "events.jsonl",
                     "tree.json", "knowledge.json", "best_artifact.json",
                     "transcript.jsonl", "digest.txt"):
            assert (out / name).exists(), name
        assert "best reward" in result.output

    def test_flag_overrides_apply(self, runner, tmp_path):
        cfg_path = write_scripted_config(tmp_path)
        out = tmp_path / "run"
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--budget", "12", "--seed", "9",
                                      "--disable-action", "em2",
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        saved = json.loads((out / "config.json").read_text())
        assert saved["budget"] == 12
        assert saved["seed"] == 9
        assert saved["disabled_actions"] == ["em2"]

    def test_explicit_dataset_is_used(self, runner, tmp_path):
        cfg_path = write_scripted_config(tmp_path)
        data = tmp_path / "data.json"
        runner.invoke(main, ["gen-instances", "--problem", "kp",
                             "--n-instances", "4", "--seed", "3",
                             "--param", "n=20", "--param", "capacity=5.0",
                             "--out", str(data)])
        out = tmp_path / "run"
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--dataset", str(data),
                                      "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads((out / "report.json").read_text())
        from cogmcts.cop.instances import load_dataset
        assert report["dataset_digest"] == load_dataset(data).digest()

    def test_live_without_key_exits_one(self, runner, tmp_path, monkeypatch):
        monkeypatch.delenv("COGMCTS_API_KEY", raising=False)
        cfg = RunConfig()
        cfg.backend = BackendConfig(kind="live", endpoint="http://127.0.0.1:1",
                                    model_name="m")
        path = tmp_path / "cfg.json"
        cfg.save(path)
        result = runner.invoke(main, ["run", "--config", str(path)])
        assert result.exit_code == 1
        assert "COGMCTS_API_KEY" in result.output


class FlakyOnceHandler(BaseHTTPRequestHandler):
    calls = 0
    fail_at = 10**9
    failed = False

    def do_POST(self):
        cls = type(self)
        self.rfile.read(int(self.headers["Content-Length"]))
        cls.calls += 1
        if cls.calls == cls.fail_at and not cls.failed:
            cls.failed = True
            self.send_response(400)
            self.end_headers()
            return
        text = kp_response(round(0.5 + 0.01 * cls.calls, 4), 1.0, 0.0,
                           note=f"live {cls.calls}")
        data = json.dumps(
            {"choices": [{"message": {"content": text}}]}).encode()
        self.send_response(200)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, *args):
        pass


@pytest.fixture
def flaky_server():
    FlakyOnceHandler.calls = 0
    FlakyOnceHandler.failed = False
    FlakyOnceHandler.fail_at = 10**9
    server = HTTPServer(("127.0.0.1", 0), FlakyOnceHandler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_address[1]}"
    server.shutdown()


class TestAbortAndResume:
    def live_config(self, tmp_path, endpoint) -> Path:
        cfg = RunConfig(problem="kp", size_params={"n": 20, "capacity": 5.0},
                        n_instances=4, n_init=4, budget=20, seed=1)
        cfg.backend = BackendConfig(kind="live", endpoint=endpoint,
                                    model_name="stub", max_retries=0)
        path = tmp_path / "cfg.json"
        cfg.save(path)
        return path

    def test_mid_run_outage_checkpoints_then_resumes(self, runner, tmp_path,
                                                     flaky_server,
                                                     monkeypatch):
        monkeypatch.setenv("COGMCTS_API_KEY", "sk-test")
        cfg_path = self.live_config(tmp_path, flaky_server)
        out = tmp_path / "run"
        FlakyOnceHandler.fail_at = 14
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(out)])
        assert result.exit_code == 2, result.output
        checkpoint = out / "checkpoint.json"
        assert checkpoint.exists()

        resumed = runner.invoke(main, ["run", "--config", str(cfg_path),
                                       "--resume", str(checkpoint),
                                       "--out", str(out)])
        assert resumed.exit_code == 0, resumed.output
        report = json.loads((out / "report.json").read_text())
        assert report["budget"]["identity_holds"]

    def test_outage_during_init_exits_two_without_checkpoint(
            self, runner, tmp_path, flaky_server, monkeypatch):
        monkeypatch.setenv("COGMCTS_API_KEY", "sk-test")
        cfg_path = self.live_config(tmp_path, flaky_server)
        out = tmp_path / "run"
        FlakyOnceHandler.fail_at = 2
        result = runner.invoke(main, ["run", "--config", str(cfg_path),
                                      "--out", str(out)])
        assert result.exit_code == 2
        assert not (out / "checkpoint.json").exists()


class TestEvalAndReport:
    def test_eval_prints_reward(self, runner, tmp_path):
        data = tmp_path / "data.json"
        runner.invoke(main, ["gen-instances", "--problem", "kp",
                             "--n-instances", "2", "--seed", "0",
                             "--param", "n=15", "--param", "capacity=4.0",
                             "--out", str(data)])
        art = tmp_path / "artifact.json"
        art.write_text(json.dumps(seed_artifact("kp").to_dict()))
        result = runner.invoke(main, ["eval", "--dataset", str(data),
                                      "--artifact", str(art)])
        assert result.exit_code == 0, result.output
        assert "reward" in result.output

    def test_report_renders_tables_and_figure(self, runner, tmp_path):
        cfg_path = write_scripted_config(tmp_path)
        out = tmp_path / "run"
        assert runner.invoke(main, ["run", "--config", str(cfg_path),
                                    "--out", str(out)]).exit_code == 0
        result = runner.invoke(main, ["report", "--run-dir", str(out)])
        assert result.exit_code == 0, result.output
        assert (out / "trajectory.csv").exists()
        assert (out / "actions.csv").exists()
        assert (out / "knowledge.txt").exists()
        assert (out / "trajectory.png").stat().st_size > 0
        header = (out / "trajectory.csv").read_text().splitlines()[0]
        assert header == "t,best_reward"

    def test_report_csv_is_stable_across_renders(self, runner, tmp_path):
        cfg_path = write_scripted_config(tmp_path)
        out = tmp_path / "run"
        runner.invoke(main, ["run", "--config", str(cfg_path),
                             "--out", str(out)])
        runner.invoke(main, ["report", "--run-dir", str(out)])
        first = (out / "trajectory.csv").read_bytes()
        runner.invoke(main, ["report", "--run-dir", str(out)])
        assert (out / "trajectory.csv").read_bytes() == first
