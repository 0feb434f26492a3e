"""MCTS tree: node storage, normalized decay-weighted UCT, progressive
widening eligibility, quality bounds, and max-style backpropagation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .artifacts import HeuristicArtifact
from .errors import ConfigurationError, StateError

SNAPSHOT_SCHEMA = "tree-snapshot/1"

ORIGIN_ACTIONS = ("root", "i", "em1", "em2", "m1", "m2")


@dataclass
class QualityBounds:
    """Observed quality range used to normalize the UCT exploitation term."""

    q_max: float = -1e5
    q_min: float = 0.0

    def degenerate(self) -> bool:
        return self.q_max - self.q_min < 1e-12


@dataclass
class HeuristicNode:
    id: int
    parent: Optional[int]
    depth: int
    q: float = 0.0
    reward: float = 0.0  # own evaluation reward; q may later track subtree max
    n_visits: int = 0
    origin_action: str = "root"
    created_at_budget: int = 0
    artifact: Optional[HeuristicArtifact] = None
    children: list[int] = field(default_factory=list)

    @property
    def is_leaf(self) -> bool:
        return not self.children


def lambda_decay(t: int, budget_cap: int, lambda0: float) -> float:
    """Linearly decayed exploration weight: lambda0 * (T - t) / T."""
    if budget_cap <= 0:
        raise ConfigurationError("budget cap must be positive")
    return lambda0 * (budget_cap - t) / budget_cap


def uct_score(child_q: float, child_n: int, parent_n: int,
              bounds: QualityBounds, lam: float) -> float:
    """Normalized exploitation plus decayed exploration bonus.

    With degenerate bounds the exploitation term is fixed at 0.5.
    """
    if bounds.degenerate():
        exploit = 0.5
    else:
        exploit = (child_q - bounds.q_min) / (bounds.q_max - bounds.q_min)
    return exploit + lam * math.sqrt(math.log(parent_n + 1) / child_n)


def update_bounds(bounds: QualityBounds, children_q: Iterable[float]) -> QualityBounds:
    """Widen bounds elementwise with a batch of finite child qualities."""
    qs = list(children_q)
    if not qs:
        return replace(bounds)
    return QualityBounds(q_max=max(bounds.q_max, max(qs)),
                         q_min=min(bounds.q_min, min(qs)))


class SearchTree:
    """Single-writer MCTS tree keyed by integer node ids."""

    def __init__(self, depth_cap: int = 10, widening_factor: float = 2.0):
        self.depth_cap = depth_cap
        self.widening_factor = widening_factor
        self._next_id = 0
        self.nodes: dict[int, HeuristicNode] = {}
        self.root = self._new_node(parent=None, depth=0, origin_action="root")

    def _new_node(self, parent, depth, origin_action, artifact=None,
                  q=0.0, n_visits=0, created_at_budget=0) -> HeuristicNode:
        node = HeuristicNode(id=self._next_id, parent=parent, depth=depth,
                             q=q, reward=q, n_visits=n_visits,
                             origin_action=origin_action,
                             created_at_budget=created_at_budget, artifact=artifact)
        self._next_id += 1
        self.nodes[node.id] = node
        return node

    def node(self, node_id: int) -> HeuristicNode:
        return self.nodes[node_id]

    def add_child(self, parent_id: int, artifact: HeuristicArtifact, q: float,
                  origin_action: str, created_at_budget: int) -> HeuristicNode:
        parent = self.nodes[parent_id]
        if parent.depth + 1 > self.depth_cap:
            raise StateError(f"child would exceed depth cap {self.depth_cap}")
        child = self._new_node(parent=parent_id, depth=parent.depth + 1,
                               origin_action=origin_action, artifact=artifact,
                               q=q, n_visits=1, created_at_budget=created_at_budget)
        parent.children.append(child.id)
        return child

    def best_uct_child(self, node: HeuristicNode, bounds: QualityBounds,
                       lam: float) -> HeuristicNode:
        if not node.children:
            raise StateError("node has no children")
        # Ties broken by lowest node id; children are stored in id order.
        best, best_score = None, -math.inf
        for cid in sorted(node.children):
            child = self.nodes[cid]
            score = uct_score(child.q, child.n_visits, node.n_visits, bounds, lam)
            if score > best_score:
                best, best_score = child, score
        return best

    def select_path(self, bounds: QualityBounds, lam: float) -> HeuristicNode:
        """Walk from the root by argmax UCT until a leaf or the depth cap."""
        node = self.root
        if node.is_leaf:
            raise StateError("tree has no evaluated children")
        while not node.is_leaf and node.depth < self.depth_cap:
            node = self.best_uct_child(node, bounds, lam)
        return node

    def widening_eligible(self, node: HeuristicNode) -> bool:
        if node.depth >= self.depth_cap:
            return False
        return node.n_visits > self.widening_factor * len(node.children)

    def backpropagate(self, from_id: int, batch_size: int) -> None:
        """Push max child quality and the batch visit count up to the root.

        Quality never decreases: a node whose own reward exceeds every
        child keeps it, so the root always carries the best observed reward.
        """
        node_id: Optional[int] = from_id
        while node_id is not None:
            node = self.nodes[node_id]
            finite = [self.nodes[c].q for c in node.children
                      if math.isfinite(self.nodes[c].q)]
            if finite:
                node.q = max(node.q, max(finite))
            node.n_visits += batch_size
            node_id = node.parent

    def evaluated_nodes(self) -> list[HeuristicNode]:
        return [n for n in self.nodes.values() if n.id != self.root.id]

    def snapshot(self) -> dict:
        """Versioned read-only export of every node for reporting."""
        return {
            "schema": SNAPSHOT_SCHEMA,
            "nodes": [
                {
                    "id": n.id,
                    "parent": n.parent,
                    "depth": n.depth,
                    "q": n.q,
                    "n_visits": n.n_visits,
                    "origin_action": n.origin_action,
                    "created_at_budget": n.created_at_budget,
                    "artifact_digest": n.artifact.digest if n.artifact else None,
                }
                for n in sorted(self.nodes.values(), key=lambda n: n.id)
            ],
        }

    # Checkpoint support -------------------------------------------------

    def to_state(self) -> dict:
        return {
            "depth_cap": self.depth_cap,
            "widening_factor": self.widening_factor,
            "next_id": self._next_id,
            "nodes": [
                {
                    "id": n.id, "parent": n.parent, "depth": n.depth,
                    "q": n.q, "reward": n.reward, "n_visits": n.n_visits,
                    "origin_action": n.origin_action,
                    "created_at_budget": n.created_at_budget,
                    "children": list(n.children),
                    "artifact": n.artifact.to_dict() if n.artifact else None,
                }
                for n in self.nodes.values()
            ],
        }

    @classmethod
    def from_state(cls, state: dict) -> "SearchTree":
        tree = cls.__new__(cls)
        tree.depth_cap = state["depth_cap"]
        tree.widening_factor = state["widening_factor"]
        tree._next_id = state["next_id"]
        tree.nodes = {}
        for rec in state["nodes"]:
            art = HeuristicArtifact.from_dict(rec["artifact"]) if rec["artifact"] else None
            node = HeuristicNode(id=rec["id"], parent=rec["parent"],
                                 depth=rec["depth"], q=rec["q"],
                                 reward=rec["reward"],
                                 n_visits=rec["n_visits"],
                                 origin_action=rec["origin_action"],
                                 created_at_budget=rec["created_at_budget"],
                                 artifact=art, children=list(rec["children"]))
            tree.nodes[node.id] = node
        tree.root = tree.nodes[0]
        return tree
