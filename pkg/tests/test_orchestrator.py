"""Search loop behavior: budget accounting, monotone progress, knowledge
routing cadence, determinism, checkpoint/resume, and ablations."""

import json

import pytest

from cogmcts import (BackendUnavailableError, ConfigurationError, Orchestrator,
                     RunAborted, RunConfig, ScriptedBackend)
from cogmcts.cop.kp import baseline_gc

from conftest import build_kp_script, scripted_config


def small_cfg(script_path, **overrides):
    defaults = dict(problem="kp", size_params={"n": 30, "capacity": 7.5},
                    n_instances=8, n_init=6, budget=46, seed=5)
    defaults.update(overrides)
    return scripted_config(script_path, **defaults)


@pytest.fixture
def run_report(kp_script_path):
    orch = Orchestrator(small_cfg(kp_script_path))
    report = orch.run()
    return orch, report


class TestRunInvariants:
    def test_budget_identity(self, run_report):
        _, report = run_report
        b = report.budget
        assert b["identity_holds"]
        assert b["final_t"] == b["n_init"] + b["widenings"] \
            + b["iterations"] * b["fanout_sum"]
        assert b["final_t"] >= 46

    def test_trajectory_is_monotone(self, run_report):
        _, report = run_report
        rewards = [p["best_reward"] for p in report.trajectory]
        assert all(b >= a for a, b in zip(rewards, rewards[1:]))

    def test_best_at_least_ratio_greedy(self, run_report):
        orch, report = run_report
        assert report.best_reward >= baseline_gc(orch.dataset) - 1e-9

    def test_root_quality_equals_best_reward(self, run_report):
        orch, report = run_report
        assert orch.tree.root.q == pytest.approx(report.best_reward)

    def test_knowledge_routing_cadence(self, run_report):
        _, report = run_report
        iters = report.budget["iterations"]
        cycle = 2
        routed = len(report.knowledge["positive"]) \
            + len(report.knowledge["negative"])
        assert routed == iters // cycle

    def test_node_ids_are_dense_and_sequential(self, run_report):
        orch, _ = run_report
        ids = sorted(orch.tree.nodes)
        assert ids == list(range(len(ids)))

    def test_events_cover_every_budget_unit(self, run_report):
        _, report = run_report
        spent = sum(1 for e in report.events if e["phase"] in
                    ("init", "widen", "expand"))
        assert spent == report.budget["final_t"]

    def test_elites_sorted_and_capped(self, run_report):
        orch, _ = run_report
        nodes = orch.elites.nodes(orch.tree)
        assert len(nodes) <= orch.config.elite_k
        rewards = [n.reward for n in nodes]
        assert rewards == sorted(rewards, reverse=True)


class TestDeterminism:
    def test_identical_rerun_digest(self, kp_script_path):
        a = Orchestrator(small_cfg(kp_script_path)).run()
        b = Orchestrator(small_cfg(kp_script_path)).run()
        assert a.digest() == b.digest()

    def test_seed_changes_digest(self, kp_script_path):
        a = Orchestrator(small_cfg(kp_script_path)).run()
        b = Orchestrator(small_cfg(kp_script_path, seed=6)).run()
        assert a.digest() != b.digest()

    def test_digest_ignores_elapsed(self, run_report):
        _, report = run_report
        before = report.digest()
        report.elapsed_s = 123.0
        assert report.digest() == before


class FlakyBackend:
    """Raises once at the configured call index, then delegates."""

    def __init__(self, inner: ScriptedBackend, fail_at: int):
        self.inner = inner
        self.fail_at = fail_at
        self.calls = 0

    def chat(self, req):
        self.calls += 1
        if self.calls == self.fail_at:
            raise BackendUnavailableError("injected outage")
        return self.inner.chat(req)

    def state(self):
        return self.inner.state()

    def restore(self, state):
        self.inner.restore(state)


class TestCheckpointResume:
    def run_flaky(self, script_path, fail_at):
        cfg = small_cfg(script_path)
        inner = ScriptedBackend.from_path(cfg.backend.script_path)
        orch = Orchestrator(cfg, backend=FlakyBackend(inner, fail_at))
        with pytest.raises(RunAborted) as aborted:
            orch.run()
        return cfg, aborted.value.state

    def resume(self, script_path, state):
        cfg = small_cfg(script_path)
        inner = ScriptedBackend.from_path(cfg.backend.script_path)
        orch = Orchestrator(cfg, backend=inner)
        # Scripted cursors live in the checkpoint; restore flows through run().
        inner.restore(state["backend_cursor"])
        return orch.run(resume_state=state)

    def test_resumed_run_matches_uninterrupted(self, kp_script_path):
        reference = Orchestrator(small_cfg(kp_script_path)).run()
        _, state = self.run_flaky(kp_script_path, fail_at=40)
        assert state is not None
        resumed = self.resume(kp_script_path, state)
        assert resumed.digest() == reference.digest()

    def test_checkpoint_is_json_serializable(self, kp_script_path):
        _, state = self.run_flaky(kp_script_path, fail_at=40)
        rebuilt = json.loads(json.dumps(state))
        resumed = self.resume(kp_script_path, rebuilt)
        assert resumed.budget["identity_holds"]

    def test_failure_during_init_has_no_checkpoint(self, kp_script_path):
        cfg, state = self.run_flaky(kp_script_path, fail_at=2)
        assert state is None


class TestAblation:
    def test_disabled_actions_never_called(self, kp_script_path):
        cfg = small_cfg(kp_script_path,
                        disabled_actions=["em1", "em2"], budget=24)
        orch = Orchestrator(cfg)
        report = orch.run()
        tags = set(orch.transcript.tags())
        assert "em1" not in tags and "em2" not in tags
        actions = {e["action"] for e in report.events
                   if e["phase"] == "expand"}
        assert actions <= {"m1", "m2"}
        assert report.budget["identity_holds"]
        assert report.budget["fanout_sum"] == 2

    def test_unknown_disabled_action_rejected(self):
        cfg = RunConfig(disabled_actions=["zz"])
        with pytest.raises(ConfigurationError):
            cfg.validate()


class TestWidening:
    def test_eligible_internal_node_widens_during_descent(self, kp_script_path):
        cfg = small_cfg(kp_script_path, budget=30)
        orch = Orchestrator(cfg)
        orch._initialize()
        orch._iterate()  # gives one leaf a batch of children
        internal = next(n for n in orch.tree.evaluated_nodes()
                        if n.children)
        internal.n_visits = 100  # force the widening condition
        internal.q = orch.bounds.q_max + 10.0  # make descent pass through it
        orch.bounds.q_max = internal.q
        before = orch.widenings
        orch._iterate()
        assert orch.widenings == before + 1
        assert any(e["phase"] == "widen" for e in orch.events)
        assert orch.t == orch.config.n_init + orch.widenings \
            + orch.iteration * orch.config.fanout_sum()


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = RunConfig(problem="tsp", size_params={"n": 9}, budget=40,
                        disabled_actions=["m2"])
        path = tmp_path / "cfg.json"
        cfg.save(path)
        assert RunConfig.load(path) == cfg

    def test_validation_errors(self):
        with pytest.raises(ConfigurationError):
            RunConfig(problem="xx").validate()
        with pytest.raises(ConfigurationError):
            RunConfig(budget=5, n_init=10).validate()
        with pytest.raises(ConfigurationError):
            RunConfig(thinking_cycle=0).validate()
        with pytest.raises(ConfigurationError):
            RunConfig(disabled_actions=["em1", "em2", "m1", "m2"]).validate()

    def test_active_fanouts_respect_ablation(self):
        cfg = RunConfig(disabled_actions=["em1"])
        assert cfg.active_fanouts()["em1"] == 0
        assert cfg.fanout_sum() == 3
