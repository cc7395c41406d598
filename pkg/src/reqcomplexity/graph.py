"""Weighted undirected graphs and their matrix representations.

Nodes carry a component complexity ``alpha``; edges either derive their
interface weight as ``sqrt(alpha_u * alpha_v)`` or carry an explicit one.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import ValidationError


class NodeKind(str, enum.Enum):
    GENERIC = "generic"
    REQUIREMENT = "requirement"
    ENTITY = "entity"


class MatrixKind(str, enum.Enum):
    ADJACENCY = "adjacency"
    LAPLACIAN = "laplacian"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"


@dataclass(frozen=True)
class NodeRecord:
    id: str
    alpha: float = 1.0
    label: str | None = None
    kind: NodeKind = NodeKind.GENERIC

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValidationError(f"node {self.id!r}: alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "kind", NodeKind(self.kind))


@dataclass(frozen=True)
class EdgeRecord:
    u: str
    v: str
    weight: float | None = None  # None -> derived from the endpoint alphas

    def __post_init__(self):
        if self.weight is not None and not (self.weight > 0 and math.isfinite(self.weight)):
            raise ValidationError(f"edge {self.u}-{self.v}: weight must be positive, got {self.weight!r}")

    @property
    def weight_mode(self) -> str:
        return "derived" if self.weight is None else "explicit"


@dataclass(frozen=True)
class WeightedGraph:
    nodes: tuple[NodeRecord, ...] = ()
    edges: tuple[EdgeRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        problems = []
        seen = set()
        for node in self.nodes:
            if node.id in seen:
                problems.append(f"duplicate node id {node.id!r}")
            seen.add(node.id)
        pairs = set()
        for e in self.edges:
            if e.u not in seen or e.v not in seen:
                problems.append(f"edge {e.u}-{e.v} references an unknown node")
            if e.u == e.v:
                problems.append(f"self-loop on {e.u!r}")
            key = frozenset((e.u, e.v))
            if key in pairs:
                problems.append(f"duplicate edge {e.u}-{e.v}")
            pairs.add(key)
        if problems:
            raise ValidationError("invalid graph: " + "; ".join(problems), problems)

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[str, str]],
        nodes: Iterable[str] = (),
        alpha: Mapping[str, float] | None = None,
    ) -> "WeightedGraph":
        """Build a derived-weight graph from ``(u, v)`` pairs.

        Nodes listed in ``nodes`` come first (so isolated vertices can be
        given); the rest are added in order of first appearance.
        """
        alpha = alpha or {}
        edges = [(str(u), str(v)) for u, v in edges]
        order = list(dict.fromkeys([str(n) for n in nodes] + [x for e in edges for x in e]))
        return cls(
            tuple(NodeRecord(i, float(alpha.get(i, 1.0))) for i in order),
            tuple(EdgeRecord(u, v) for u, v in edges),
        )

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def e(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    @cached_property
    def alphas(self) -> np.ndarray:
        return np.array([node.alpha for node in self.nodes], dtype=float)

    def edge_weight(self, edge: EdgeRecord) -> float:
        if edge.weight is not None:
            return edge.weight
        a = self.alphas
        return math.sqrt(a[self.index[edge.u]] * a[self.index[edge.v]])

    @cached_property
    def neighbors(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in self.nodes]
        for edge in self.edges:
            i, j = self.index[edge.u], self.index[edge.v]
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def subgraph(self, node_ids: Iterable[str]) -> "WeightedGraph":
        keep = set(node_ids)
        return WeightedGraph(
            tuple(nd for nd in self.nodes if nd.id in keep),
            tuple(ed for ed in self.edges if ed.u in keep and ed.v in keep),
        )

    def relabel(self, mapping: Mapping[str, str]) -> "WeightedGraph":
        return WeightedGraph(
            tuple(NodeRecord(mapping[nd.id], nd.alpha, nd.label, nd.kind) for nd in self.nodes),
            tuple(EdgeRecord(mapping[ed.u], mapping[ed.v], ed.weight) for ed in self.edges),
        )


@dataclass(frozen=True)
class SystemMatrix:
    kind: MatrixKind
    entries: np.ndarray = field(repr=False)

    @property
    def trace(self) -> float:
        return float(np.trace(self.entries))

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _weight_matrix(g: WeightedGraph, topology_only: bool) -> np.ndarray:
    w = np.zeros((g.n, g.n))
    for edge in g.edges:
        i, j = g.index[edge.u], g.index[edge.v]
        value = 1.0 if topology_only else g.edge_weight(edge)
        w[i, j] = w[j, i] = value
    return w


def build_matrix(g: WeightedGraph, kind: MatrixKind | str, topology_only: bool = False) -> SystemMatrix:
    """Adjacency, Laplacian or normalized Laplacian of ``g``.

    In weighted mode the adjacency diagonal holds the node alphas and the
    Laplacian is ``S - W + diag(alpha)``. The normalized Laplacian never
    includes the alpha term; isolated nodes give all-zero rows.
    """
    kind = MatrixKind(kind)
    w = _weight_matrix(g, topology_only)
    strength = w.sum(axis=1)
    if kind is MatrixKind.ADJACENCY:
        m = w
        if not topology_only:
            m[np.diag_indices(g.n)] = g.alphas
    elif kind is MatrixKind.LAPLACIAN:
        m = -w
        m[np.diag_indices(g.n)] = strength if topology_only else strength + g.alphas
    else:
        inv_sqrt = np.zeros(g.n)
        nz = strength > 0
        inv_sqrt[nz] = 1.0 / np.sqrt(strength[nz])
        m = -w * np.outer(inv_sqrt, inv_sqrt)
        m[np.diag_indices(g.n)] = nz.astype(float)
    m.setflags(write=False)
    return SystemMatrix(kind, m)


def connected_components(g: WeightedGraph) -> list[list[str]]:
    """Components as lists of node ids, in order of their first node."""
    seen = [False] * g.n
    out = []
    for start in range(g.n):
        if seen[start]:
            continue
        seen[start] = True
        comp, queue = [], deque([start])
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in g.neighbors[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        out.append([g.nodes[i].id for i in sorted(comp)])
    return out


def cycle_rank(g: WeightedGraph) -> int:
    """First Betti number ``e - n + p``."""
    return g.e - g.n + len(connected_components(g))


def _eccentricity(g: WeightedGraph, source: int) -> int:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        i = queue.popleft()
        for j in g.neighbors[i]:
            if j not in dist:
                dist[j] = dist[i] + 1
                queue.append(j)
    return max(dist.values())


def diameter(g: WeightedGraph) -> int:
    """Longest shortest hop-path, taken over all components."""
    if g.n == 0:
        raise ValidationError("diameter of an empty graph is undefined")
    return max(_eccentricity(g, i) for i in range(g.n))


# -- standard families, mostly for tests and examples ------------------------

def complete_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges(
        [(i, j) for i in range(n) for j in range(i + 1, n)], nodes=map(str, range(n))
    )


def path_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, i + 1) for i in range(n - 1)], nodes=map(str, range(n)))


def cycle_graph(n: int) -> WeightedGraph:
    return WeightedGraph.from_edges([(i, (i + 1) % n) for i in range(n)])


def star_graph(k: int) -> WeightedGraph:
    """K_{1,k}: hub ``0`` joined to ``k`` leaves."""
    return WeightedGraph.from_edges([(0, i) for i in range(1, k + 1)])


def disjoint_union(*graphs: WeightedGraph) -> WeightedGraph:
    nodes, edges = [], []
    for idx, g in enumerate(graphs):
        mapping = {nd.id: f"{idx}:{nd.id}" for nd in g.nodes}
        h = g.relabel(mapping)
        nodes.extend(h.nodes)
        edges.extend(h.edges)
    return WeightedGraph(tuple(nodes), tuple(edges))


# -- interchange --------------------------------------------------------------

def _num(x: float) -> float:
    return float(f"{x:.10g}")


def graph_to_dict(g: WeightedGraph) -> dict:
    nodes = []
    for nd in g.nodes:
        rec = {"id": nd.id, "alpha": _num(nd.alpha)}
        if nd.label is not None:
            rec["label"] = nd.label
        rec["kind"] = nd.kind.value
        nodes.append(rec)
    edges = []
    for ed in g.edges:
        rec = {"u": ed.u, "v": ed.v}
        if ed.weight is not None:
            rec["weight"] = _num(ed.weight)
        edges.append(rec)
    return {"nodes": nodes, "edges": edges}


def graph_from_dict(doc: Mapping) -> WeightedGraph:
    try:
        nodes = tuple(
            NodeRecord(
                str(rec["id"]),
                float(rec.get("alpha", 1.0)),
                rec.get("label"),
                NodeKind(rec.get("kind", "generic")),
            )
            for rec in doc.get("nodes", [])
        )
        edges = tuple(
            EdgeRecord(
                str(rec["u"]),
                str(rec["v"]),
                None if rec.get("weight") is None else float(rec["weight"]),
            )
            for rec in doc.get("edges", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed graph document: {exc}") from exc
    return WeightedGraph(nodes, edges)


def parse_edge_list(text: str) -> WeightedGraph:
    """``u v`` per line; blank lines and ``#`` comments are skipped."""
    pairs: list[tuple[str, str]] = []
    singles: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            singles.append(parts[0])
        elif len(parts) == 2:
            pairs.append((parts[0], parts[1]))
        else:
            raise ValidationError(f"edge list line {lineno}: expected 'u v', got {line!r}")
    order = list(dict.fromkeys([x for p in pairs for x in p] + singles))
    return WeightedGraph.from_edges(pairs, nodes=order)


def dumps_graph(g: WeightedGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def read_graph(path: str | Path) -> WeightedGraph:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
        return graph_from_dict(doc)
    return parse_edge_list(text)

