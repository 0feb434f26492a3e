"""Search orchestrator: drives initialization, UCT selection with
progressive widening, guided expansion, evaluation, backpropagation,
cyclic cognition with knowledge routing, and run reporting."""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .actions import (ActionContext, action_em1, action_em2, action_i,
                      action_m1, action_m2)
from .artifacts import HeuristicArtifact, TEMPLATE_DIALECT
from .backends import TranscriptLog, make_backend
from .cognition import (CandidateSet, CognitiveGuidance, ExperienceRecord,
                        KnowledgeBase, build_ccs, ckv_route, complex_cognition,
                        rapid_cognition)
from .config import RunConfig
from .cop.instances import (Dataset, SIGNATURE_KIND, generate_instances)
from .errors import (BackendUnavailableError, CognitionUnavailableError,
                     InitializationError, RunAborted)
from .executor import HeuristicExecutor
from .templates import GC_DOCUMENT, TemplateDocument
from .tree import QualityBounds, SearchTree, lambda_decay, update_bounds

DEFAULT_SEED_DOCS = {
    "kp": GC_DOCUMENT,
    "tsp": TemplateDocument("inverse-distance", {"alpha": 1.0}),
    "op": TemplateDocument("prize-distance-ratio", {"alpha": 1.0, "beta": 1.0}),
    "cvrp": TemplateDocument("savings-style", {"alpha": 1.0}),
    "mkp": TemplateDocument("density-over-tightness",
                            {"alpha": 1.0, "beta": 1.0, "gamma": 0.0}),
}

SEED_DESCRIPTIONS = {
    "kp": "Greedy value-to-weight ratio selection",
    "tsp": "Prefer short edges via inverse distance",
    "op": "Prefer high prize per unit distance",
    "cvrp": "Prefer high-savings merges",
    "mkp": "Prefer dense items with low aggregate load",
}


def seed_artifact(problem: str) -> HeuristicArtifact:
    doc = DEFAULT_SEED_DOCS[problem]
    return HeuristicArtifact(description=SEED_DESCRIPTIONS[problem],
                             dialect=TEMPLATE_DIALECT, payload=doc.render(),
                             signature_kind=SIGNATURE_KIND[problem])


@dataclass
class EliteSet:
    """Top heuristics by own reward, best first; always holds the global best."""

    capacity: int
    node_ids: list[int] = field(default_factory=list)

    def update(self, tree: SearchTree, new_ids) -> None:
        pool = set(self.node_ids) | set(new_ids)
        ranked = sorted(pool, key=lambda i: (-tree.node(i).reward, i))
        self.node_ids = ranked[:self.capacity]

    def nodes(self, tree: SearchTree) -> list:
        return [tree.node(i) for i in self.node_ids]


@dataclass
class RunReport:
    config: dict
    dataset_digest: str
    best_reward: float
    best_artifact: dict
    trajectory: list
    events: list
    tree: dict
    knowledge: dict
    budget: dict
    retries: list
    elapsed_s: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        """Content digest over everything except wall-clock timing."""
        doc = self.to_dict()
        doc.pop("elapsed_s")
        canonical = json.dumps(doc, sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


class Orchestrator:
    """One search run over a fixed dataset with a fixed backend."""

    def __init__(self, config: RunConfig, backend=None,
                 executor: Optional[HeuristicExecutor] = None,
                 dataset: Optional[Dataset] = None,
                 transcript: Optional[TranscriptLog] = None):
        config.validate()
        self.config = config
        self.transcript = transcript or TranscriptLog()
        self.backend = backend or make_backend(config.backend, self.transcript)
        self.dataset = dataset or generate_instances(
            config.problem, config.n_instances, config.dataset_seed,
            **config.size_params)
        framework = dict(config.framework_params)
        framework.setdefault("seed", config.seed)
        self.executor = executor or HeuristicExecutor(
            config.problem, config.executor, framework)

        self.ctx = ActionContext(problem=config.problem,
                                 signature_kind=SIGNATURE_KIND[config.problem],
                                 code_dialect=config.executor.code_dialect,
                                 personas=tuple(config.personas),
                                 char_budget=config.prompt_char_budget)
        self.tree = SearchTree(depth_cap=config.depth_cap,
                               widening_factor=config.widening_factor)
        self.bounds = QualityBounds()
        self.elites = EliteSet(capacity=config.elite_k)
        self.kb = KnowledgeBase(capacity=config.kb_capacity)
        self.rng = np.random.default_rng(config.seed)

        self.t = 0
        self.iteration = 0
        self.widenings = 0
        self.trajectory: list[dict] = []
        self.events: list[dict] = []
        self._seen_digests: set[str] = set()
        self._cycle_best_before: Optional[float] = None
        self._cycle_record: Optional[ExperienceRecord] = None
        self._cycle_guidance: Optional[CognitiveGuidance] = None

    # State access -------------------------------------------------------

    @property
    def best_node(self):
        assert self.elites.node_ids, "no evaluated heuristic yet"
        return self.tree.node(self.elites.node_ids[0])

    @property
    def best_reward(self) -> float:
        return self.best_node.reward

    def _event(self, action: str, phase: str, status: str,
               node_id=None, reward=None, lam=0.0) -> None:
        self.events.append({
            "t": self.t, "iteration": self.iteration, "phase": phase,
            "action": action, "status": status, "node": node_id,
            "reward": reward, "lambda": round(lam, 12),
            "q_max": self.bounds.q_max, "q_min": self.bounds.q_min,
        })

    # Attachment ---------------------------------------------------------

    def _attach(self, parent_id: int, artifact: HeuristicArtifact,
                action: str, phase: str, lam: float) -> Optional[int]:
        """Evaluate one candidate; attach it if it is new and evaluable."""
        if artifact.digest in self._seen_digests:
            self._event(action, phase, "duplicate", lam=lam)
            return None
        self._seen_digests.add(artifact.digest)
        result = self.executor.evaluate(artifact, self.dataset)
        if result.status != "ok":
            self._event(action, phase, result.status, lam=lam)
            return None
        node = self.tree.add_child(parent_id, artifact, q=result.reward,
                                   origin_action=action,
                                   created_at_budget=self.t)
        self._event(action, phase, "ok", node_id=node.id,
                    reward=result.reward, lam=lam)
        return node.id

    # Phases -------------------------------------------------------------

    def _initialize(self) -> None:
        seed = seed_artifact(self.config.problem)
        artifacts = action_i(self.ctx, seed, self.config.n_init, self.backend)
        new_ids = []
        for artifact in artifacts:
            node_id = self._attach(self.tree.root.id, artifact, "i", "init",
                                   lam=self.config.lambda0)
            if node_id is not None:
                new_ids.append(node_id)
        n_invalid = self.config.n_init - len(artifacts)
        for _ in range(n_invalid):
            self._event("i", "init", "invalid", lam=self.config.lambda0)
        if not new_ids:
            raise InitializationError("no initial heuristic survived evaluation")
        self.t = self.config.n_init
        self.tree.root.n_visits = self.config.n_init
        self.bounds = update_bounds(
            self.bounds, [self.tree.node(i).reward for i in new_ids])
        self.elites.update(self.tree, new_ids)
        # Root quality starts at the best observed reward (its own q is a
        # placeholder); max-style backpropagation keeps it current after.
        self.tree.root.q = self.best_reward
        self.tree.root.reward = self.best_reward
        self.trajectory.append({"t": self.t, "best_reward": self.best_reward})

    def _descend(self, lam: float):
        """UCT descent; existing internal nodes may widen by one child."""
        node = self.tree.root
        while not node.is_leaf and node.depth < self.tree.depth_cap:
            if node.artifact is not None and self.tree.widening_eligible(node):
                artifact = action_m1(self.ctx, node, self.backend)
                self.widenings += 1
                child_id = None
                if artifact is not None:
                    child_id = self._attach(node.id, artifact, "m1", "widen", lam)
                else:
                    self._event("m1", "widen", "invalid", lam=lam)
                self.t += 1
                if child_id is not None:
                    self.bounds = update_bounds(
                        self.bounds, [self.tree.node(child_id).reward])
                    self.tree.backpropagate(node.id, 1)
                    self.elites.update(self.tree, [child_id])
            node = self.tree.best_uct_child(node, self.bounds, lam)
        return node

    def _cognition(self, ccs: CandidateSet) -> None:
        """Build one experience record and guidance for the coming cycle."""
        try:
            record = rapid_cognition(ccs, self.backend,
                                     cycle_index=self.iteration // self.config.thinking_cycle,
                                     created_at_budget=self.t)
            guidance = complex_cognition(record, self.kb, self.backend,
                                         g_pos=self.config.guidance_pos,
                                         g_neg=self.config.guidance_neg,
                                         char_budget=self.config.prompt_char_budget)
        except CognitionUnavailableError:
            self._cycle_record = None
            self._cycle_guidance = None
            return
        self._cycle_record = record
        self._cycle_guidance = guidance

    def _expand(self, leaf, ccs: CandidateSet, lam: float) -> list[int]:
        parent = leaf if leaf.depth < self.tree.depth_cap \
            else self.tree.node(leaf.parent)
        guidance = self._cycle_guidance
        fanouts = self.config.active_fanouts()
        new_ids = []

        def run_batch(action, artifacts, expected):
            for artifact in artifacts:
                node_id = self._attach(parent.id, artifact, action, "expand", lam)
                if node_id is not None:
                    new_ids.append(node_id)
            for _ in range(expected - len(artifacts)):
                self._event(action, "expand", "invalid", lam=lam)

        if fanouts.get("em1"):
            arts = action_em1(self.ctx, ccs, guidance, fanouts["em1"],
                              self.backend, global_best=self.best_node)
            run_batch("em1", arts, fanouts["em1"])
        if fanouts.get("em2"):
            art = action_em2(self.ctx, self.best_node.artifact,
                             self.best_reward, guidance, self.backend)
            run_batch("em2", [art] if art else [], fanouts["em2"])
        if fanouts.get("m1"):
            art = action_m1(self.ctx, leaf, self.backend)
            run_batch("m1", [art] if art else [], fanouts["m1"])
        if fanouts.get("m2"):
            art = action_m2(self.ctx, leaf, self.backend)
            run_batch("m2", [art] if art else [], fanouts["m2"])
        return new_ids

    def _iterate(self) -> None:
        cfg = self.config
        cycle_pos = self.iteration % cfg.thinking_cycle
        lam = lambda_decay(self.t, cfg.budget, cfg.lambda0)

        leaf = self._descend(lam)
        ccs = build_ccs(leaf, self.elites.nodes(self.tree), cfg.real_m, self.rng)

        if cycle_pos == 0:
            self._cycle_best_before = self.best_reward
            self._cognition(ccs)

        new_ids = self._expand(leaf, ccs, lam)
        self.t += cfg.fanout_sum()
        if new_ids:
            self.bounds = update_bounds(
                self.bounds, [self.tree.node(i).reward for i in new_ids])
        self.tree.backpropagate(leaf.id, cfg.fanout_sum())
        self.elites.update(self.tree, new_ids)
        self.trajectory.append({"t": self.t, "best_reward": self.best_reward})

        if cycle_pos == cfg.thinking_cycle - 1 and self._cycle_record is not None:
            side = ckv_route(self._cycle_record, self._cycle_best_before,
                             self.best_reward, self.kb, cfg.ckv_epsilon)
            self._event("ckv", "route", side, lam=lam)
            self._cycle_record = None
        self.iteration += 1

    # Run loop -----------------------------------------------------------

    def run(self, resume_state: Optional[dict] = None) -> RunReport:
        start = time.monotonic()
        if resume_state is not None:
            self._restore(resume_state)
        else:
            try:
                self._initialize()
            except BackendUnavailableError as exc:
                raise RunAborted(f"backend failed during initialization: {exc}",
                                 state=None)
        while self.t < self.config.budget:
            snapshot = self.to_state()
            try:
                self._iterate()
            except BackendUnavailableError as exc:
                raise RunAborted(f"backend failed at t={self.t}: {exc}",
                                 state=snapshot)
        self.executor.close()
        return self._report(time.monotonic() - start)

    def _report(self, elapsed_s: float) -> RunReport:
        fanout_sum = self.config.fanout_sum()
        budget = {
            "n_init": self.config.n_init,
            "widenings": self.widenings,
            "iterations": self.iteration,
            "fanout_sum": fanout_sum,
            "final_t": self.t,
            "identity_holds": self.t == (self.config.n_init + self.widenings
                                         + self.iteration * fanout_sum),
        }
        best = self.best_node
        return RunReport(
            config=self.config.to_dict(),
            dataset_digest=self.dataset.digest(),
            best_reward=best.reward,
            best_artifact=best.artifact.to_dict(),
            trajectory=list(self.trajectory),
            events=list(self.events),
            tree=self.tree.snapshot(),
            knowledge=self.kb.to_dict(),
            budget=budget,
            retries=list(self.ctx.retries_logged),
            elapsed_s=elapsed_s,
        )

    # Checkpointing ------------------------------------------------------

    def to_state(self) -> dict:
        state = {
            "t": self.t,
            "iteration": self.iteration,
            "widenings": self.widenings,
            "bounds": {"q_max": self.bounds.q_max, "q_min": self.bounds.q_min},
            "tree": self.tree.to_state(),
            "elites": list(self.elites.node_ids),
            "kb": self.kb.to_dict(),
            "rng": json.loads(json.dumps(self.rng.bit_generator.state)),
            "trajectory": list(self.trajectory),
            "events": list(self.events),
            "seen_digests": sorted(self._seen_digests),
            "retries": list(self.ctx.retries_logged),
            "cycle": {
                "best_before": self._cycle_best_before,
                "record": (self._cycle_record.to_dict()
                           if self._cycle_record else None),
                "guidance": (asdict(self._cycle_guidance)
                             if self._cycle_guidance else None),
            },
        }
        if hasattr(self.backend, "state"):
            state["backend_cursor"] = self.backend.state()
        return state

    def _restore(self, state: dict) -> None:
        self.t = state["t"]
        self.iteration = state["iteration"]
        self.widenings = state["widenings"]
        self.bounds = QualityBounds(**state["bounds"])
        self.tree = SearchTree.from_state(state["tree"])
        self.elites = EliteSet(capacity=self.config.elite_k,
                               node_ids=list(state["elites"]))
        self.kb = KnowledgeBase.from_dict(state["kb"])
        self.rng = np.random.default_rng()
        self.rng.bit_generator.state = state["rng"]
        self.trajectory = list(state["trajectory"])
        self.events = list(state["events"])
        self._seen_digests = set(state["seen_digests"])
        self.ctx.retries_logged = list(state["retries"])
        cycle = state["cycle"]
        self._cycle_best_before = cycle["best_before"]
        self._cycle_record = (ExperienceRecord.from_dict(cycle["record"])
                              if cycle["record"] else None)
        self._cycle_guidance = (CognitiveGuidance(**cycle["guidance"])
                                if cycle["guidance"] else None)
        if "backend_cursor" in state and hasattr(self.backend, "restore"):
            self.backend.restore(state["backend_cursor"])
