"""Shared fixtures: scripted-response builders for deterministic runs."""

from __future__ import annotations

import json

import pytest

from cogmcts import RunConfig, ScriptedBackend
from cogmcts.backends import BackendConfig


def response_text(description: str, payload: str,
                  dialect: str = "template") -> str:
    return ("Here is a heuristic.\n\n{" + description + "}\n\n"
            "```" + dialect + "\n" + payload + "\n```\n")


def template_payload(template_id: str, **params) -> str:
    return json.dumps({"template": template_id, "params": params})


def kp_response(alpha: float, beta: float, gamma: float,
                note: str = "variant") -> str:
    payload = template_payload("value-weight-ratio",
                               alpha=alpha, beta=beta, gamma=gamma)
    desc = f"KP scorer {note} a={alpha} b={beta} g={gamma}"
    return response_text(desc, payload)


def guidance_text(i: int = 0) -> str:
    return (f"Keywords: ratio, density, capacity\n"
            f"Recommendations: weigh value against weight, respect remaining capacity\n"
            f"Avoid: ignoring item weights\n"
            f"Explanations: ratio ordering approximates the LP relaxation ({i})")


def analysis_text(i: int = 0) -> str:
    return (f"The better heuristic exploits the value-to-weight ratio more "
            f"directly and avoids overweighting raw value ({i}).")


def kp_param_grid(count: int, start: int = 0):
    """Deterministic distinct (alpha, beta, gamma) triples."""
    triples = []
    k = start
    while len(triples) < count:
        alpha = round(0.5 + 0.125 * (k % 30), 4)
        beta = round(0.75 + 0.0625 * ((k // 30) % 40), 4)
        gamma = round(-0.5 + 0.05 * ((k // 1200) % 30), 4)
        triples.append((alpha, beta, gamma))
        k += 1
    return triples


def build_kp_script(n_generation: int = 400, n_cognition: int = 200,
                    include_gc: bool = True) -> list[dict]:
    """Scripted entries for a KP run, generous enough to avoid exhaustion.

    The first initialization response is the exact ratio greedy when
    ``include_gc`` is set, so the search provably contains the baseline.
    """
    entries = []
    grid = iter(kp_param_grid(5 * n_generation, start=1))

    def gen_entries(tag, count, first=None):
        texts = [first] if first else []
        while len(texts) < count:
            a, b, g = next(grid)
            texts.append(kp_response(a, b, g, note=tag))
        for text in texts:
            entries.append({"tag": tag, "text": text})

    gc_text = kp_response(1.0, 1.0, 0.0, note="ratio greedy") \
        if include_gc else None
    gen_entries("i", n_generation // 4, first=gc_text)
    for tag in ("em1", "em2", "m1", "m2"):
        gen_entries(tag, n_generation)
    for i in range(n_cognition):
        entries.append({"tag": "rapid-pair", "text": analysis_text(i)})
    for i in range(n_cognition // 4):
        entries.append({"tag": "rapid-synth",
                        "text": f"Synthesis: favor ratio-driven scoring ({i})."})
        entries.append({"tag": "complex", "text": guidance_text(i)})
    return entries


def scripted_config(script_path, **overrides) -> RunConfig:
    cfg = RunConfig(**overrides)
    cfg.backend = BackendConfig(kind="scripted", script_path=str(script_path))
    return cfg


@pytest.fixture
def kp_script_path(tmp_path):
    path = tmp_path / "script.json"
    path.write_text(json.dumps(build_kp_script()))
    return path


@pytest.fixture
def kp_backend(kp_script_path):
    return ScriptedBackend.from_path(kp_script_path)
