"""The five expansion actions: prompt assembly and response parsing that
turn LLM text into heuristic-artifact candidates."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .artifacts import HeuristicArtifact, parse_response
from .backends import ChatRequest, GENERATION_TEMPERATURE
from .cognition import CandidateSet, CognitiveGuidance
from .errors import InitializationError, ParseError
from .prompting import DEFAULT_PERSONAS, FORMAT_CONTRACT, TASK_DESCRIPTIONS
from .prompting import render
from .tree import HeuristicNode

ACTIONS = ("i", "em1", "em2", "m1", "m2")

RETRY_SUFFIX = "\n\nReminder: " + FORMAT_CONTRACT


@dataclass
class ActionContext:
    """Everything prompt assembly needs beyond the action's own arguments."""

    problem: str
    signature_kind: str
    code_dialect: str = "python"
    personas: tuple = DEFAULT_PERSONAS
    char_budget: int = 20000
    retries_logged: list[str] = field(default_factory=list)

    @property
    def task(self) -> str:
        return TASK_DESCRIPTIONS[self.problem]

    def parse(self, text: str) -> HeuristicArtifact:
        return parse_response(text, self.signature_kind, self.code_dialect)


def _generate_one(ctx: ActionContext, backend, prompt: str, tag: str,
                  system_text: Optional[str] = None) -> Optional[HeuristicArtifact]:
    """One generation call with a single format-reminder retry."""
    prompt = prompt[:ctx.char_budget]
    for attempt in range(2):
        text = prompt if attempt == 0 else prompt + RETRY_SUFFIX
        req = ChatRequest(user_text=text, temperature=GENERATION_TEMPERATURE,
                          tag=tag)
        if system_text:
            req.system_text = system_text
        try:
            return ctx.parse(backend.chat(req))
        except ParseError as exc:
            ctx.retries_logged.append(f"{tag}: {exc.code}")
    return None


def _guidance_fields(guidance: Optional[CognitiveGuidance]) -> dict:
    g = guidance or CognitiveGuidance()
    return {
        "keywords": ", ".join(g.keywords) or "(none)",
        "recommendations": ", ".join(g.recommendations) or "(none)",
        "avoidances": ", ".join(g.avoidances) or "(none)",
        "explanations": ", ".join(g.explanations) or "(none)",
    }


def action_i(ctx: ActionContext, seed: HeuristicArtifact, n: int,
             backend) -> list[HeuristicArtifact]:
    """Initialization: n generation calls cycling through role personas."""
    assert n >= 1
    artifacts = []
    for k in range(n):
        persona = ctx.personas[k % len(ctx.personas)]
        prompt = render("action_i", persona=persona, task=ctx.task,
                        seed_description=seed.description,
                        seed_code=seed.payload, format_contract=FORMAT_CONTRACT)
        artifact = _generate_one(ctx, backend, prompt, tag="i",
                                 system_text=persona)
        if artifact is not None:
            artifacts.append(artifact)
    if not artifacts:
        raise InitializationError("initialization produced zero valid heuristics")
    return artifacts


def action_em1(ctx: ActionContext, ccs: CandidateSet,
               guidance: Optional[CognitiveGuidance], m: int, backend,
               global_best: Optional[HeuristicNode] = None) -> list[HeuristicArtifact]:
    """Contrast-driven generation over sliding rank-ordered pairs."""
    members = ccs.members()
    if len(members) == 1 and global_best is not None \
            and global_best.id != members[0].id:
        members = members + [global_best]
    g = _guidance_fields(guidance)
    artifacts = []
    n_members = len(members)
    for j in range(m):
        a = members[j % n_members]
        b = members[(j + 1) % n_members] if n_members > 1 else a
        prompt = render(
            "action_em1", task=ctx.task,
            reward_a=f"{a.reward:.6f}", description_a=a.artifact.description,
            code_a=a.artifact.payload,
            reward_b=f"{b.reward:.6f}", description_b=b.artifact.description,
            code_b=b.artifact.payload,
            recommendations=g["recommendations"], avoidances=g["avoidances"],
            format_contract=FORMAT_CONTRACT)
        artifact = _generate_one(ctx, backend, prompt, tag="em1")
        if artifact is not None:
            artifacts.append(artifact)
    return artifacts


def action_em2(ctx: ActionContext, best_artifact: HeuristicArtifact,
               best_reward: float, guidance: Optional[CognitiveGuidance],
               backend) -> Optional[HeuristicArtifact]:
    """Global-best-guided generation: one call embedding the full guidance."""
    g = _guidance_fields(guidance)
    prompt = render(
        "action_em2", task=ctx.task, reward=f"{best_reward:.6f}",
        description=best_artifact.description, code=best_artifact.payload,
        format_contract=FORMAT_CONTRACT, **g)
    return _generate_one(ctx, backend, prompt, tag="em2")


def action_m1(ctx: ActionContext, node: HeuristicNode,
              backend) -> Optional[HeuristicArtifact]:
    """Structural mutation of the node's heuristic."""
    prompt = render(
        "action_m1", task=ctx.task, reward=f"{node.reward:.6f}",
        description=node.artifact.description, code=node.artifact.payload,
        format_contract=FORMAT_CONTRACT)
    return _generate_one(ctx, backend, prompt, tag="m1")


def action_m2(ctx: ActionContext, node: HeuristicNode,
              backend) -> Optional[HeuristicArtifact]:
    """Parameter/strategy fine-tuning of the node's heuristic."""
    prompt = render(
        "action_m2", task=ctx.task, reward=f"{node.reward:.6f}",
        description=node.artifact.description, code=node.artifact.payload,
        format_contract=FORMAT_CONTRACT)
    return _generate_one(ctx, backend, prompt, tag="m2")
