"""Rule-based extraction of a three-layer requirements network.

A requirement starts at the beginning of a line with a dotted-decimal id
(``1``, ``1.2``, ``3.1.4``) followed by whitespace; any following lines
without an id continue its text. The network has three edge layers:

* hierarchy -- ``1.2`` is a child of ``1``
* reference -- textual cross-references such as ``see 1.2`` or ``REQ-1.2``
* entity_mention -- a requirement mentions a lexicon term
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import UsageError, ValidationError
from .graph import EdgeRecord, NodeKind, NodeRecord, WeightedGraph
from .tasks import IntegrationTask

log = logging.getLogger(__name__)

HIERARCHY = "hierarchy"
REFERENCE = "reference"
ENTITY_MENTION = "entity_mention"
LAYERS = (HIERARCHY, REFERENCE, ENTITY_MENTION)

DEFAULT_REF_PATTERNS = (
    r"\b(?:see|per|ref\.?|as defined in)\s+(\d+(?:\.\d+)*)",
    r"\bREQ-(\d+(?:\.\d+)*)",
)

_ID = re.compile(r"\d+(?:\.\d+)*")
_LINE_START = re.compile(r"^(\d[\d.]*)(?=\s|$)\s*(.*)$")


@dataclass(frozen=True)
class RequirementRecord:
    id: str
    text: str
    parent_id: str | None = None
    refs: tuple[str, ...] = ()
    entities: tuple[str, ...] = ()


@dataclass(frozen=True)
class ParsedDocument:
    records: tuple[RequirementRecord, ...]
    unresolved: tuple[tuple[str, str], ...] = ()  # (source id, missing target id)
    warnings: tuple[str, ...] = ()


def _parent(req_id: str) -> str | None:
    head, sep, _ = req_id.rpartition(".")
    return head if sep else None


def _compile_refs(patterns: Iterable[str]) -> list[re.Pattern]:
    out = []
    for pat in patterns:
        try:
            rx = re.compile(pat, re.IGNORECASE)
        except re.error as exc:
            raise UsageError(f"invalid reference pattern {pat!r}: {exc}") from exc
        if rx.groups != 1:
            raise UsageError(f"reference pattern {pat!r} must have exactly one capturing group")
        out.append(rx)
    return out


def _compile_lexicon(lexicon: Iterable[str]) -> list[tuple[str, re.Pattern]]:
    terms: dict[str, str] = {}
    for term in lexicon:
        term = " ".join(term.split())
        if term and term.lower() not in terms:
            terms[term.lower()] = term
    return [
        (term, re.compile(r"(?<!\w)" + re.escape(term).replace(r"\ ", r"\s+") + r"(?!\w)", re.IGNORECASE))
        for term in terms.values()
    ]


def read_lexicon(text: str) -> list[str]:
    """Newline-separated terms; blank lines and ``#`` comments are ignored."""
    return [t for t in (line.split("#", 1)[0].strip() for line in text.splitlines()) if t]


def parse_requirements(
    doc: str,
    lexicon: Iterable[str] = (),
    ref_patterns: Sequence[str] | None = None,
) -> ParsedDocument:
    raw: list[list] = []  # [id, [text lines]]
    problems = []
    warnings = []
    preamble = 0
    for lineno, line in enumerate(doc.splitlines(), 1):
        stripped = line.strip()
        m = _LINE_START.match(line)
        if m:
            token, rest = m.groups()
            if not _ID.fullmatch(token):
                problems.append(f"line {lineno}: malformed requirement id {token!r}")
                continue
            raw.append([token, [rest.strip()] if rest.strip() else []])
        elif stripped:
            if raw:
                raw[-1][1].append(stripped)
            else:
                preamble += 1
    if preamble:
        warnings.append(f"ignored {preamble} line(s) before the first requirement")

    seen: dict[str, int] = {}
    for req_id, _ in raw:
        seen[req_id] = seen.get(req_id, 0) + 1
    dupes = sorted(k for k, v in seen.items() if v > 1)
    problems.extend(f"duplicate requirement id {d!r}" for d in dupes)
    if problems:
        raise ValidationError("requirements document failed validation", problems)

    ref_rx = _compile_refs(DEFAULT_REF_PATTERNS if ref_patterns is None else ref_patterns)
    terms = _compile_lexicon(lexicon)
    records = []
    unresolved = []
    for req_id, lines in raw:
        text = " ".join(lines)
        refs: list[str] = []
        for rx in ref_rx:
            for m in rx.finditer(text):
                target = m.group(1)
                if target == req_id or target in refs:
                    continue
                if target in seen:
                    refs.append(target)
                elif (req_id, target) not in unresolved:
                    unresolved.append((req_id, target))
                    log.warning("requirement %s references unknown requirement %s", req_id, target)
        hits = []
        for order, (term, rx) in enumerate(terms):
            m = rx.search(text)
            if m:
                hits.append((m.start(), order, term))
        records.append(
            RequirementRecord(
                id=req_id,
                text=text,
                parent_id=_parent(req_id),
                refs=tuple(refs),
                entities=tuple(term for _, _, term in sorted(hits)),
            )
        )
    for src, dst in unresolved:
        warnings.append(f"unresolved reference {src} -> {dst}")
    return ParsedDocument(tuple(records), tuple(unresolved), tuple(warnings))


@dataclass(frozen=True)
class LayerEdge:
    layer: str
    u: str
    v: str


def entity_node_id(name: str) -> str:
    return f"entity:{name}"


@dataclass(frozen=True)
class LayeredRequirementGraph:
    requirements: tuple[str, ...]
    entities: tuple[str, ...]
    edges: tuple[LayerEdge, ...]
    weights: Mapping[str, float] = field(default_factory=lambda: dict.fromkeys(LAYERS, 1.0))
    warnings: tuple[str, ...] = ()

    def layer_edges(self, layer: str) -> list[LayerEdge]:
        return [e for e in self.edges if e.layer == layer]

    def edge_counts(self) -> dict[str, int]:
        return {layer: len(self.layer_edges(layer)) for layer in LAYERS}

    def roots(self) -> list[str]:
        """Requirements without a parent edge, in document order."""
        children = {e.v for e in self.layer_edges(HIERARCHY)}
        return [r for r in self.requirements if r not in children]


def build_layered_graph(
    records: Sequence[RequirementRecord], weights: Mapping[str, float] | None = None
) -> LayeredRequirementGraph:
    w = dict.fromkeys(LAYERS, 1.0)
    if weights:
        unknown = set(weights) - set(LAYERS)
        if unknown:
            raise UsageError(f"unknown layer(s) in weights: {', '.join(sorted(unknown))}")
        w.update(weights)
    bad = [k for k, v in w.items() if not v > 0]
    if bad:
        raise ValidationError(f"layer weights must be positive: {', '.join(bad)}")

    ids = [r.id for r in records]
    known = set(ids)
    edges: list[LayerEdge] = []
    warnings = []
    pairs: set[tuple[str, frozenset]] = set()

    def add(layer, u, v):
        key = (layer, frozenset((u, v)))
        if u != v and key not in pairs:
            pairs.add(key)
            edges.append(LayerEdge(layer, u, v))

    for r in records:
        if r.parent_id is None:
            continue
        if r.parent_id in known:
            add(HIERARCHY, r.parent_id, r.id)
        else:
            warnings.append(f"requirement {r.id} has no parent {r.parent_id} in the document")
    for r in records:
        for target in r.refs:
            if target in known:
                add(REFERENCE, r.id, target)
    entities: list[str] = []
    for r in records:
        for name in r.entities:
            if name not in entities:
                entities.append(name)
            add(ENTITY_MENTION, r.id, entity_node_id(name))
    return LayeredRequirementGraph(tuple(ids), tuple(entities), tuple(edges), w, tuple(warnings))


def project(
    layered: LayeredRequirementGraph,
    layers: Iterable[str] = LAYERS,
    collapse_entities: bool = False,
    alpha_table: Mapping[str, float] | None = None,
) -> WeightedGraph:
    """Merge the selected layers into one simple weighted graph.

    Parallel edges from different layers (or several shared entities)
    become one edge carrying the sum of their layer weights.
    """
    layers = list(dict.fromkeys(layers))
    if not layers:
        raise UsageError("at least one layer must be selected")
    unknown = set(layers) - set(LAYERS)
    if unknown:
        raise UsageError(f"unknown layer(s): {', '.join(sorted(unknown))}; valid: {', '.join(LAYERS)}")
    alpha_table = dict(alpha_table or {})
    bad = [k for k, v in alpha_table.items() if not v > 0]
    if bad:
        raise ValidationError(f"alpha_table entries must be positive: {', '.join(bad)}", bad)

    merged: dict[frozenset, list] = {}

    def add(u, v, weight):
        key = frozenset((u, v))
        if key in merged:
            merged[key][2] += weight
        else:
            merged[key] = [u, v, weight]

    for layer in (HIERARCHY, REFERENCE):
        if layer in layers:
            for e in layered.layer_edges(layer):
                add(e.u, e.v, layered.weights[layer])

    keep_entities = ENTITY_MENTION in layers and not collapse_entities
    if ENTITY_MENTION in layers:
        mentions = layered.layer_edges(ENTITY_MENTION)
        if collapse_entities:
            by_entity: dict[str, list[str]] = {}
            for e in mentions:
                by_entity.setdefault(e.v, []).append(e.u)
            for reqs in by_entity.values():
                for i, a in enumerate(reqs):
                    for b in reqs[i + 1:]:
                        add(a, b, layered.weights[ENTITY_MENTION])
        else:
            for e in mentions:
                add(e.u, e.v, layered.weights[ENTITY_MENTION])

    nodes = [
        NodeRecord(r, alpha_table.get(r, 1.0), r, NodeKind.REQUIREMENT) for r in layered.requirements
    ]
    if keep_entities:
        nodes += [
            NodeRecord(entity_node_id(name), alpha_table.get(name, 1.0), name, NodeKind.ENTITY)
            for name in layered.entities
        ]
    edges = [EdgeRecord(u, v, w) for u, v, w in merged.values()]
    return WeightedGraph(tuple(nodes), tuple(edges))


def _subtree(layered: LayeredRequirementGraph, root: str) -> set[str]:
    children: dict[str, list[str]] = {}
    for e in layered.layer_edges(HIERARCHY):
        children.setdefault(e.u, []).append(e.v)
    out, stack = set(), [root]
    while stack:
        node = stack.pop()
        out.add(node)
        stack.extend(children.get(node, ()))
    return out


def layered_task(
    layered: LayeredRequirementGraph,
    task_id: str,
    layers: Iterable[str] = LAYERS,
    collapse_entities: bool = False,
    alpha_table: Mapping[str, float] | None = None,
    provenance: str | None = None,
) -> IntegrationTask:
    """View a requirements network as an integration task.

    Each top-level requirement subtree (restricted to requirement nodes) is
    one component; the full projection is the assembly.
    """
    layers = list(layers)
    if HIERARCHY not in layers:
        raise UsageError("task emission needs the hierarchy layer so components are connected")
    assembly = project(layered, layers, collapse_entities, alpha_table)
    components = tuple(assembly.subgraph(_subtree(layered, root)) for root in layered.roots())
    return IntegrationTask(task_id, components, assembly, provenance)


def extraction_report(parsed: ParsedDocument, layered: LayeredRequirementGraph, graph: WeightedGraph) -> dict:
    return {
        "requirements": len(parsed.records),
        "entities": len(layered.entities),
        "layer_edges": layered.edge_counts(),
        "graph": {"nodes": graph.n, "edges": graph.e},
        "unresolved_refs": [{"source": s, "target": t} for s, t in parsed.unresolved],
        "warnings": list(parsed.warnings) + list(layered.warnings),
    }
