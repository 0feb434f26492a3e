"""Cognitive guidance pipeline: candidate-set construction with rank-decay
weighted elite sampling, rapid and complex cognition, and consistency-based
routing of experience into positive/negative knowledge bases."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .backends import ChatRequest, COGNITION_TEMPERATURE
from .errors import CognitionUnavailableError, FixtureError
from .prompting import render
from .tree import HeuristicNode

DEFAULT_EPSILON = 1e-9
DEFAULT_KB_CAPACITY = 10


@dataclass
class ExperienceRecord:
    cycle_index: int
    text: str
    ccs_digests: list[str] = field(default_factory=list)
    created_at_budget: int = 0

    def __post_init__(self):
        assert self.text, "experience text must be non-empty"
        assert self.cycle_index >= 0

    def to_dict(self) -> dict:
        return {"cycle_index": self.cycle_index, "text": self.text,
                "ccs_digests": list(self.ccs_digests),
                "created_at_budget": self.created_at_budget}

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperienceRecord":
        return cls(**doc)


@dataclass
class KnowledgeBase:
    """FIFO-bounded positive (validated) and negative (invalidated) records."""

    positive: list[ExperienceRecord] = field(default_factory=list)
    negative: list[ExperienceRecord] = field(default_factory=list)
    capacity: int = DEFAULT_KB_CAPACITY

    def add_positive(self, record: ExperienceRecord) -> None:
        self.positive.append(record)
        del self.positive[:-self.capacity]

    def add_negative(self, record: ExperienceRecord) -> None:
        self.negative.append(record)
        del self.negative[:-self.capacity]

    def to_dict(self) -> dict:
        return {"capacity": self.capacity,
                "positive": [r.to_dict() for r in self.positive],
                "negative": [r.to_dict() for r in self.negative]}

    @classmethod
    def from_dict(cls, doc: dict) -> "KnowledgeBase":
        return cls(positive=[ExperienceRecord.from_dict(r) for r in doc["positive"]],
                   negative=[ExperienceRecord.from_dict(r) for r in doc["negative"]],
                   capacity=doc["capacity"])


@dataclass
class CognitiveGuidance:
    keywords: list[str] = field(default_factory=list)
    recommendations: list[str] = field(default_factory=list)
    avoidances: list[str] = field(default_factory=list)
    explanations: list[str] = field(default_factory=list)

    def empty(self) -> bool:
        return not (self.keywords or self.recommendations
                    or self.avoidances or self.explanations)


@dataclass
class CandidateSet:
    uct_member: HeuristicNode
    elite_members: list[tuple[HeuristicNode, int]] = field(default_factory=list)

    def members(self) -> list[HeuristicNode]:
        """All members, ordered by own reward descending (ties by node id)."""
        nodes = [self.uct_member] + [n for n, _ in self.elite_members]
        return sorted(nodes, key=lambda n: (-n.reward, n.id))

    def digests(self) -> list[str]:
        return [n.artifact.digest for n in self.members() if n.artifact]


def elite_weights(ranks: list[int], n_elite: int) -> np.ndarray:
    """Rank-decayed sampling probabilities: w_i = 1/(r_i + 1 + N), normalized."""
    if not ranks:
        return np.zeros(0)
    w = 1.0 / (np.asarray(ranks, dtype=float) + 1.0 + n_elite)
    return w / w.sum()


def weighted_sample_without_replacement(rng: np.random.Generator,
                                        probs: np.ndarray, k: int) -> list[int]:
    """Sequential draws with renormalization; first draw distributes as probs."""
    remaining = list(range(len(probs)))
    weights = np.asarray(probs, dtype=float).copy()
    picked = []
    for _ in range(min(k, len(remaining))):
        total = weights[remaining].sum()
        u = rng.random() * total
        acc = 0.0
        chosen_pos = len(remaining) - 1
        for pos, idx in enumerate(remaining):
            acc += weights[idx]
            if u < acc:
                chosen_pos = pos
                break
        picked.append(remaining.pop(chosen_pos))
    return picked


def build_ccs(uct_node: HeuristicNode, elite_nodes: list[HeuristicNode],
              real_m: int, rng: np.random.Generator) -> CandidateSet:
    """Union of the UCT-selected node and a weighted elite sample.

    ``elite_nodes`` must be ordered best-first; ranks are 1-based.
    """
    if not elite_nodes or real_m <= 0:
        return CandidateSet(uct_member=uct_node)
    ranks = list(range(1, len(elite_nodes) + 1))
    probs = elite_weights(ranks, len(elite_nodes))
    picked = weighted_sample_without_replacement(rng, probs, real_m)
    members = [(elite_nodes[i], ranks[i]) for i in sorted(picked)
               if elite_nodes[i].id != uct_node.id]
    return CandidateSet(uct_member=uct_node, elite_members=members)


def _member_summary(node: HeuristicNode) -> str:
    return (f"[reward {node.reward:.6f}] {node.artifact.description}\n"
            f"{node.artifact.payload}")


def rapid_cognition(ccs: CandidateSet, backend, cycle_index: int = 0,
                    created_at_budget: int = 0) -> ExperienceRecord:
    """Pairwise comparison of rank-ordered members plus one synthesis call."""
    members = ccs.members()
    assert members, "candidate set must be non-empty"
    analyses = []
    for better, other in zip(members, members[1:]):
        prompt = render(
            "rapid_pair",
            reward_a=f"{better.reward:.6f}", description_a=better.artifact.description,
            code_a=better.artifact.payload,
            reward_b=f"{other.reward:.6f}", description_b=other.artifact.description,
            code_b=other.artifact.payload)
        analyses.append(backend.chat(ChatRequest(
            user_text=prompt, temperature=COGNITION_TEMPERATURE, tag="rapid-pair")))
    synth_prompt = render(
        "rapid_synth",
        member_summaries="\n\n".join(_member_summary(m) for m in members),
        pair_analyses="\n\n".join(analyses) if analyses else "(single candidate)")
    text = backend.chat(ChatRequest(
        user_text=synth_prompt, temperature=COGNITION_TEMPERATURE, tag="rapid-synth"))
    if not text.strip():
        raise CognitionUnavailableError("empty rapid-cognition synthesis")
    return ExperienceRecord(cycle_index=cycle_index, text=text.strip(),
                            ccs_digests=ccs.digests(),
                            created_at_budget=created_at_budget)


_SECTION_LABELS = {
    "keywords": "keywords",
    "recommendations": "recommendations",
    "avoid": "avoidances",
    "avoidances": "avoidances",
    "explanations": "explanations",
}

_LABEL_RE = re.compile(
    r"^(keywords|recommendations|avoidances|avoid|explanations)\s*:\s*(.*)$",
    re.IGNORECASE)


def parse_guidance(text: str) -> CognitiveGuidance:
    """Parse labeled plain-text sections; missing sections become empty lists."""
    guidance = CognitiveGuidance()
    current: Optional[list[str]] = None
    for line in text.splitlines():
        match = _LABEL_RE.match(line.strip())
        if match:
            current = getattr(guidance, _SECTION_LABELS[match.group(1).lower()])
            rest = match.group(2).strip()
            if rest:
                current.extend(p.strip() for p in rest.split(",") if p.strip())
        elif current is not None and line.strip():
            current.extend(p.strip() for p in line.split(",") if p.strip())
    return guidance


def complex_cognition(record: ExperienceRecord, kb: KnowledgeBase, backend,
                      g_pos: int = 3, g_neg: int = 3,
                      char_budget: int = 20000) -> CognitiveGuidance:
    """Fuse fresh empirical knowledge with recent validated/invalidated
    records into structured guidance. Retries once on unparseable output."""
    positive = [r.text for r in kb.positive[-g_pos:]]
    negative = [r.text for r in kb.negative[-g_neg:]]
    # Truncate oldest knowledge first if the prompt would overflow.
    while True:
        prompt = render(
            "complex",
            empirical=record.text,
            positive="\n".join(positive) if positive else "(none)",
            negative="\n".join(negative) if negative else "(none)")
        if len(prompt) <= char_budget or not (positive or negative):
            break
        if len(positive) >= len(negative):
            positive.pop(0)
        else:
            negative.pop(0)

    for attempt in range(2):
        suffix = "" if attempt == 0 else (
            "\n\nReminder: respond with the four labeled sections exactly: "
            "Keywords: / Recommendations: / Avoid: / Explanations:")
        try:
            response = backend.chat(ChatRequest(
                user_text=prompt + suffix, temperature=COGNITION_TEMPERATURE,
                tag="complex"))
        except FixtureError:
            raise
        guidance = parse_guidance(response)
        if not guidance.empty():
            return guidance
    raise CognitionUnavailableError("guidance response unparseable after retry")


def ckv_route(record: ExperienceRecord, best_before: float, best_after: float,
              kb: KnowledgeBase, epsilon: float = DEFAULT_EPSILON) -> str:
    """Route experience by whether the global-best reward moved past epsilon."""
    if abs(best_after - best_before) > epsilon:
        kb.add_positive(record)
        return "positive"
    kb.add_negative(record)
    return "negative"
