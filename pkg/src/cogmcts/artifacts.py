"""Heuristic artifacts: description + code payload + digesting and the
response format contract (brace-delimited description, fenced code block)."""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

from .errors import ParseError
from .templates import TemplateDocument, REGISTRY

TEMPLATE_DIALECT = "template"
SIGNATURE_KINDS = ("edge-matrix", "item-vector", "step-scorer")

_FENCE_RE = re.compile(r"```([A-Za-z][\w-]*)?[ \t]*\n(.*?)```", re.DOTALL)
_DESC_RE = re.compile(r"\{([^{}]+)\}", re.DOTALL)


def normalize_payload(payload: str) -> str:
    lines = [line.rstrip() for line in payload.strip().splitlines()]
    return "\n".join(lines)


def payload_digest(dialect: str, payload: str) -> str:
    if dialect == TEMPLATE_DIALECT:
        # Canonical JSON so formatting differences never split identities.
        canonical = TemplateDocument.parse(payload).render()
    else:
        canonical = normalize_payload(payload)
    h = hashlib.sha256()
    h.update(dialect.encode())
    h.update(b"\x00")
    h.update(canonical.encode())
    return h.hexdigest()


@dataclass
class HeuristicArtifact:
    description: str
    dialect: str
    payload: str
    signature_kind: str
    digest: str = ""

    def __post_init__(self):
        if not self.payload.strip():
            raise ParseError("no-code", "empty payload")
        if self.signature_kind not in SIGNATURE_KINDS:
            raise ParseError("unknown-dialect",
                             f"bad signature kind {self.signature_kind!r}")
        if not self.digest:
            self.digest = payload_digest(self.dialect, self.payload)

    def template_document(self) -> TemplateDocument:
        return TemplateDocument.parse(self.payload)

    def render(self) -> str:
        """Serialize back into the response format the parser accepts."""
        return (
            "{" + self.description.strip() + "}\n\n"
            "```" + self.dialect + "\n" + self.payload.strip() + "\n```\n"
        )

    def to_dict(self) -> dict:
        return {"description": self.description, "dialect": self.dialect,
                "payload": self.payload, "signature_kind": self.signature_kind,
                "digest": self.digest}

    @classmethod
    def from_dict(cls, doc: dict) -> "HeuristicArtifact":
        return cls(description=doc["description"], dialect=doc["dialect"],
                   payload=doc["payload"], signature_kind=doc["signature_kind"],
                   digest=doc.get("digest", ""))


def parse_response(text: str, signature_kind: str,
                   code_dialect: str = "python") -> HeuristicArtifact:
    """Extract the first description block and the first fenced code block.

    The fence's info string selects the dialect: ``template`` for the
    parameterized-template document, the configured code dialect name for
    generated code. Template documents are validated structurally.
    """
    fences = list(_FENCE_RE.finditer(text))
    if not fences:
        raise ParseError("no-code", "no fenced code block")
    fence = fences[0]
    lang = (fence.group(1) or "").strip().lower()
    payload = fence.group(2).strip()
    if not payload:
        raise ParseError("no-code", "empty code block")
    if lang == TEMPLATE_DIALECT:
        dialect = TEMPLATE_DIALECT
    elif lang == code_dialect:
        dialect = code_dialect
    else:
        raise ParseError("unknown-dialect", f"unknown fence dialect {lang!r}")

    # The description is the first brace block outside any fence.
    masked = _FENCE_RE.sub(lambda m: " " * len(m.group(0)), text)
    desc_match = _DESC_RE.search(masked)
    if desc_match is None or not desc_match.group(1).strip():
        raise ParseError("no-description", "no brace-delimited description")
    description = desc_match.group(1).strip()

    if dialect == TEMPLATE_DIALECT:
        doc = TemplateDocument.parse(payload)
        template_kind = REGISTRY[doc.template_id].signature_kind
        if template_kind != signature_kind:
            raise ParseError(
                "bad-template",
                f"template {doc.template_id!r} has signature {template_kind},"
                f" expected {signature_kind}")
    return HeuristicArtifact(description=description, dialect=dialect,
                             payload=payload, signature_kind=signature_kind)
