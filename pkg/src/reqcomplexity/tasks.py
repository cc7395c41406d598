"""Molecule-level and integration-level metrics for integration tasks, and
baseline profiles used to flag outlying tasks."""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .errors import UsageError, ValidationError
from .graph import WeightedGraph, connected_components, graph_from_dict, graph_to_dict
from .spectral import spectral_metrics
from .structural import DEFAULT_ABSOLUTE_DENSITY, structural_report

MOLECULE_METRICS = (
    "Total Cyclomatic Complexity",
    "Average Cyclomatic Complexity",
    "Average GE",
    "Average LGE",
    "Average Density",
    "Average Absolute Density",
)
INTEGRATION_METRICS = (
    "Integration GE",
    "Integration LGE",
    "Integration Density",
    "Integration Absolute Density",
    "Integration Density Delta",
    "Integration Load",
)

BASELINE_SCHEMA = "reqcomplexity.baseline/1"


@dataclass(frozen=True)
class IntegrationTask:
    task_id: str
    components: tuple[WeightedGraph, ...]
    assembly: WeightedGraph
    provenance: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        problems = []
        assembled = set(self.assembly.index)
        seen: dict[str, int] = {}
        for k, comp in enumerate(self.components):
            if comp.n and len(connected_components(comp)) != 1:
                problems.append(f"component {k} is not connected")
            for node_id in comp.index:
                if node_id in seen:
                    problems.append(f"node {node_id!r} appears in components {seen[node_id]} and {k}")
                seen[node_id] = k
                if node_id not in assembled:
                    problems.append(f"component {k} node {node_id!r} is missing from the assembly")
        if problems:
            raise ValidationError(f"task {self.task_id!r}: " + "; ".join(problems), problems)


def _mean(values: list[float]) -> float | None:
    return math.fsum(values) / len(values) if values else None


def _component_metrics(g: WeightedGraph, topology_only: bool, absolute_density_definition: str):
    spec = spectral_metrics(g, ("GE", "LGE"), topology_only)
    return spec, structural_report(g, absolute_density_definition)


def _molecule_level(t: IntegrationTask, topology_only: bool, absolute_density_definition: str):
    if not t.components:
        raise UsageError(f"task {t.task_id!r} has no components")
    per = [_component_metrics(c, topology_only, absolute_density_definition) for c in t.components]
    cc = [s.cyclomatic for _, s in per]
    dens = [s.density for _, s in per if s.density is not None]
    absd = [s.absolute_density for _, s in per if s.absolute_density is not None]
    values = {
        "Total Cyclomatic Complexity": float(sum(cc)),
        "Average Cyclomatic Complexity": _mean(cc),
        "Average GE": _mean([m["GE"] for m, _ in per]),
        "Average LGE": _mean([m["LGE"] for m, _ in per]),
        "Average Density": _mean(dens),
        "Average Absolute Density": _mean(absd),
    }
    skipped = {
        "Average Density": len(per) - len(dens),
        "Average Absolute Density": len(per) - len(absd),
    }
    return values, {k: v for k, v in skipped.items() if v}


def molecule_level_metrics(
    t: IntegrationTask,
    topology_only: bool = False,
    absolute_density_definition: str = DEFAULT_ABSOLUTE_DENSITY,
) -> dict[str, float | None]:
    """Molecule-level metrics, totalled or averaged over the components.

    Components where a density-family metric is undefined are left out of
    that average; an average over nothing is ``None``.
    """
    return _molecule_level(t, topology_only, absolute_density_definition)[0]


def integration_level_metrics(
    t: IntegrationTask,
    topology_only: bool = False,
    absolute_density_definition: str = DEFAULT_ABSOLUTE_DENSITY,
    delta: bool = False,
) -> dict[str, float | None]:
    """Integration-level metrics of the assembled graph.

    With ``delta=True`` each value is instead the assembly value minus the
    component total (GE, LGE, Load) or component mean (density family).
    """
    if t.assembly.n == 0:
        raise UsageError(f"task {t.task_id!r} has an empty assembly")
    spec, s = _component_metrics(t.assembly, topology_only, absolute_density_definition)
    values: dict[str, float | None] = {
        "Integration GE": spec["GE"],
        "Integration LGE": spec["LGE"],
        "Integration Density": s.density,
        "Integration Absolute Density": s.absolute_density,
        "Integration Density Delta": s.density_delta,
        "Integration Load": float(s.load),
    }
    if not delta:
        return values
    per = [_component_metrics(c, topology_only, absolute_density_definition) for c in t.components]
    parts = {
        "Integration GE": math.fsum(m["GE"] for m, _ in per),
        "Integration LGE": math.fsum(m["LGE"] for m, _ in per),
        "Integration Load": float(sum(r.load for _, r in per)),
        "Integration Density": _mean([r.density for _, r in per if r.density is not None]),
        "Integration Absolute Density": _mean(
            [r.absolute_density for _, r in per if r.absolute_density is not None]
        ),
        "Integration Density Delta": _mean(
            [r.density_delta for _, r in per if r.density_delta is not None]
        ),
    }
    return {
        k: None if v is None or parts[k] is None else v - parts[k] for k, v in values.items()
    }


@dataclass(frozen=True)
class TaskMetricRow:
    task_id: str
    molecule_level: dict[str, float | None] = field(default_factory=dict)
    integration_level: dict[str, float | None] = field(default_factory=dict)
    skipped: dict[str, int] = field(default_factory=dict)

    def flat(self) -> dict[str, float | None]:
        return {**self.molecule_level, **self.integration_level}


def analyze_task(
    t: IntegrationTask,
    level: str = "both",
    topology_only: bool = False,
    absolute_density_definition: str = DEFAULT_ABSOLUTE_DENSITY,
    delta: bool = False,
) -> TaskMetricRow:
    if level not in ("molecule", "integration", "both"):
        raise UsageError(f"level must be molecule, integration or both, got {level!r}")
    mol, skipped = {}, {}
    integ = {}
    if level in ("molecule", "both"):
        mol, skipped = _molecule_level(t, topology_only, absolute_density_definition)
    if level in ("integration", "both"):
        integ = integration_level_metrics(t, topology_only, absolute_density_definition, delta)
    return TaskMetricRow(t.task_id, mol, integ, skipped)


# -- baselines -------------------------------------------------------------------

@dataclass(frozen=True)
class BaselineProfile:
    stats: dict[str, tuple[float, float]]  # metric -> (mean, sample sd)
    corpus_size: int
    created_at: str | None = None

    def to_dict(self) -> dict:
        return {
            "schema": BASELINE_SCHEMA,
            "corpus_size": self.corpus_size,
            "created_at": self.created_at,
            "metrics": {
                name: {"mean": float(f"{m:.10g}"), "sd": float(f"{s:.10g}")}
                for name, (m, s) in self.stats.items()
            },
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "BaselineProfile":
        if doc.get("schema") != BASELINE_SCHEMA:
            raise ValidationError(f"not a baseline profile (schema {doc.get('schema')!r})")
        try:
            stats = {k: (float(v["mean"]), float(v["sd"])) for k, v in doc["metrics"].items()}
            return cls(stats, int(doc["corpus_size"]), doc.get("created_at"))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed baseline profile: {exc}") from exc


@dataclass(frozen=True)
class BaselineFlag:
    metric: str
    value: float
    reason: str  # "deviation" or "unknown metric"
    mean: float | None = None
    sd: float | None = None
    z: float | None = None


def _row_values(row) -> Mapping[str, float | None]:
    return row.flat() if isinstance(row, TaskMetricRow) else row


def baseline_build(rows: Sequence, timestamp: bool = True) -> BaselineProfile:
    """Per-metric mean and sample standard deviation over a corpus of rows.

    Rows are ``TaskMetricRow`` objects or plain ``{metric: value}`` maps;
    metrics with fewer than two defined values are left out.
    """
    if len(rows) < 2:
        raise UsageError(f"a baseline needs at least 2 rows, got {len(rows)}")
    collected: dict[str, list[float]] = {}
    for row in rows:
        for name, value in _row_values(row).items():
            if value is not None:
                collected.setdefault(name, []).append(float(value))
    stats = {
        name: (statistics.fmean(vals), statistics.stdev(vals))
        for name, vals in collected.items()
        if len(vals) >= 2
    }
    created = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    return BaselineProfile(stats, len(rows), created)


def baseline_check(profile: BaselineProfile, row, z_threshold: float = 2.0) -> list[BaselineFlag]:
    if not z_threshold > 0:
        raise UsageError(f"z threshold must be positive, got {z_threshold}")
    flags = []
    for name, value in _row_values(row).items():
        if value is None:
            continue
        if name not in profile.stats:
            flags.append(BaselineFlag(name, value, "unknown metric"))
            continue
        mean, sd = profile.stats[name]
        dev = value - mean
        if sd > 0:
            z = dev / sd
            if abs(dev) > z_threshold * sd:
                flags.append(BaselineFlag(name, value, "deviation", mean, sd, z))
        elif dev != 0:
            flags.append(BaselineFlag(name, value, "deviation", mean, sd, math.copysign(math.inf, dev)))
    return flags


# -- task files --------------------------------------------------------------------

def task_from_dict(doc: Mapping) -> IntegrationTask:
    try:
        return IntegrationTask(
            str(doc["task_id"]),
            tuple(graph_from_dict(c) for c in doc["components"]),
            graph_from_dict(doc["assembly"]),
            doc.get("provenance"),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed task document: missing or invalid {exc}") from exc


def task_to_dict(t: IntegrationTask) -> dict:
    doc = {
        "task_id": t.task_id,
        "components": [graph_to_dict(c) for c in t.components],
        "assembly": graph_to_dict(t.assembly),
    }
    if t.provenance is not None:
        doc["provenance"] = t.provenance
    return doc


def read_task(path: str | Path) -> IntegrationTask:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON: {exc}") from exc
    return task_from_dict(doc)

