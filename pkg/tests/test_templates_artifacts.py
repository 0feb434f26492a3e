"""Response parsing, template validation, digests, and native evaluation."""

import json

import numpy as np
import pytest

from cogmcts import GC_DOCUMENT, ParseError, TemplateDocument, parse_response
from cogmcts.artifacts import HeuristicArtifact, payload_digest
from cogmcts.cop.instances import generate_instances
from cogmcts.cop.kp import gc_scorer, kp_construct
from cogmcts.templates import (EPSILON, REGISTRY, native_matrix, native_scorer,
                               reference_external_code)


def wrap(description, payload, dialect="template"):
    return "{" + description + "}\n```" + dialect + "\n" + payload + "\n```"


GC_PAYLOAD = GC_DOCUMENT.render()


class TestParseResponse:
    def test_happy_path_template(self):
        art = parse_response(wrap("ratio greedy", GC_PAYLOAD), "step-scorer")
        assert art.dialect == "template"
        assert art.description == "ratio greedy"
        assert art.signature_kind == "step-scorer"

    def test_happy_path_python_code(self):
        text = wrap("custom", "def score(state):\n    return state['values']",
                    dialect="python")
        art = parse_response(text, "step-scorer")
        assert art.dialect == "python"

    def test_first_fence_wins(self):
        text = ("{pick the first}\n```template\n" + GC_PAYLOAD
                + "\n```\n```python\ndef score(s): return s\n```")
        art = parse_response(text, "step-scorer")
        assert art.dialect == "template"

    def test_description_outside_fence(self):
        # A brace block inside the fence must not count as the description.
        text = ("```python\ndef score(s):\n    return {'a': 1}\n```\n"
                "{real description}")
        art = parse_response(text, "step-scorer")
        assert art.description == "real description"

    def test_missing_description(self):
        with pytest.raises(ParseError) as err:
            parse_response("```template\n" + GC_PAYLOAD + "\n```", "step-scorer")
        assert err.value.code == "no-description"

    def test_missing_code(self):
        with pytest.raises(ParseError) as err:
            parse_response("{only a description}", "step-scorer")
        assert err.value.code == "no-code"

    def test_unknown_dialect(self):
        with pytest.raises(ParseError) as err:
            parse_response(wrap("x", "whatever", dialect="ruby"), "step-scorer")
        assert err.value.code == "unknown-dialect"

    def test_bad_template_unknown_id(self):
        payload = json.dumps({"template": "nope", "params": {}})
        with pytest.raises(ParseError) as err:
            parse_response(wrap("x", payload), "step-scorer")
        assert err.value.code == "bad-template"

    def test_template_signature_mismatch(self):
        payload = json.dumps({"template": "inverse-distance",
                              "params": {"alpha": 1.0}})
        with pytest.raises(ParseError) as err:
            parse_response(wrap("x", payload), "step-scorer")
        assert err.value.code == "bad-template"


class TestTemplateDocument:
    def test_out_of_range_parameter(self):
        payload = json.dumps({"template": "value-weight-ratio",
                              "params": {"alpha": 9.0}})
        with pytest.raises(ParseError) as err:
            TemplateDocument.parse(payload)
        assert err.value.code == "bad-template"

    def test_unknown_parameter(self):
        payload = json.dumps({"template": "value-weight-ratio",
                              "params": {"delta": 1.0}})
        with pytest.raises(ParseError) as err:
            TemplateDocument.parse(payload)
        assert err.value.code == "bad-template"

    def test_registry_covers_every_problem(self):
        covered = set()
        for spec in REGISTRY.values():
            covered.update(spec.problems)
        assert covered == {"kp", "tsp", "op", "cvrp", "mkp"}

    def test_render_parse_round_trip(self):
        doc = TemplateDocument.parse(GC_DOCUMENT.render())
        assert doc == GC_DOCUMENT


class TestDigests:
    def test_template_digest_ignores_json_formatting(self):
        loose = json.dumps({"params": {"alpha": 1.0, "beta": 1.0,
                                       "gamma": 0.0},
                            "template": "value-weight-ratio"}, indent=3)
        assert payload_digest("template", loose) == \
            payload_digest("template", GC_PAYLOAD)

    def test_code_digest_ignores_trailing_whitespace(self):
        a = payload_digest("python", "def f():  \n    return 1\n\n")
        b = payload_digest("python", "def f():\n    return 1")
        assert a == b

    def test_distinct_payloads_distinct_digests(self):
        other = TemplateDocument("value-weight-ratio", {"alpha": 2.0}).render()
        assert payload_digest("template", other) != \
            payload_digest("template", GC_PAYLOAD)

    def test_artifact_render_reparses_identically(self):
        art = parse_response(wrap("round trip", GC_PAYLOAD), "step-scorer")
        again = parse_response(art.render(), "step-scorer")
        assert again.digest == art.digest
        assert again.description == art.description


class TestNativeEvaluation:
    def test_gc_template_matches_exact_ratio_ordering(self):
        dataset = generate_instances("kp", 5, seed=11, n=30, capacity=7.5)
        for inst in dataset.instances:
            scorer = native_scorer(GC_DOCUMENT, inst)
            got = kp_construct(inst, scorer)
            want = kp_construct(inst, gc_scorer(inst))
            assert got == pytest.approx(want, abs=1e-9)

    def test_inverse_distance_matrix(self):
        dataset = generate_instances("tsp", 1, seed=1, n=6)
        inst = dataset.instances[0]
        doc = TemplateDocument("inverse-distance", {"alpha": 2.0})
        got = native_matrix(doc, inst)
        want = (1.0 / (inst.distance + EPSILON)) ** 2.0
        np.testing.assert_allclose(got, want)

    def test_matrix_template_rejects_scorer_use(self):
        dataset = generate_instances("kp", 1, seed=1, n=5, capacity=2.0)
        doc = TemplateDocument("inverse-distance", {})
        with pytest.raises(ParseError):
            native_scorer(doc, dataset.instances[0])

    def test_reference_code_exists_for_all_templates(self):
        for template_id in REGISTRY:
            code = reference_external_code(TemplateDocument(template_id, {}))
            assert "def matrix" in code or "def score" in code
            compile(code, "<generated>", "exec")
