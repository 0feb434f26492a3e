"""Prompt template assets and rendering helpers."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from string import Template

FORMAT_CONTRACT = (
    "Respond with a short description of the heuristic enclosed in a single "
    "pair of curly braces, followed by exactly one fenced code block whose "
    "info string names the dialect ('template' for a parameterized-template "
    "JSON document, or the configured code dialect for raw code)."
)

TASK_DESCRIPTIONS = {
    "kp": "0-1 knapsack: score remaining items each step; the highest-scoring "
          "feasible item is packed until nothing fits.",
    "tsp": "traveling salesman: produce an edge indicator matrix that guides "
           "a penalty-based 2-opt local search.",
    "op": "orienteering: produce an edge attractiveness matrix that guides "
          "ant-colony route construction under a length budget.",
    "cvrp": "capacitated vehicle routing: produce an edge attractiveness "
            "matrix that guides ant-colony route construction under capacity.",
    "mkp": "multiple knapsack: produce a per-item attractiveness vector that "
           "guides ant-colony item selection under multiple constraints.",
}

DEFAULT_PERSONAS = (
    "You are an expert in heuristic optimization with decades of practice "
    "designing construction heuristics.",
    "You are a professor of operations research who favors mathematically "
    "principled scoring rules.",
    "You are a statistical physicist who thinks about optimization landscapes "
    "in terms of energy and entropy.",
    "You are a competitive-programming champion known for simple, robust "
    "greedy rules with sharp tie-breaking.",
)


@lru_cache(maxsize=None)
def _load(name: str) -> Template:
    text = resources.files("cogmcts.prompts").joinpath(f"{name}.txt").read_text()
    return Template(text)


def render(name: str, **fields: str) -> str:
    return _load(name).safe_substitute(**fields)
