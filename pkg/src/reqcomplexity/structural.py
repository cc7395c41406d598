"""Non-spectral structural metrics: cyclomatic complexity, density family, load."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

from .errors import DomainError, UsageError
from .graph import WeightedGraph, connected_components, cycle_rank, diameter


def cyclomatic_complexity(g: WeightedGraph) -> int:
    return g.e - g.n + 2 * len(connected_components(g))


def density(g: WeightedGraph) -> float:
    if g.n < 2:
        raise DomainError(f"density needs at least 2 nodes, got {g.n}")
    return g.e / (g.n * (g.n - 1) / 2)


def density_delta(g: WeightedGraph) -> float:
    """Density in excess of a spanning tree's ``2/n``."""
    return density(g) - 2.0 / g.n


def _density_x_diameter(g: WeightedGraph) -> float:
    return density(g) * diameter(g)


# Absolute density has no standard formula; alternatives can be
# registered here and selected by name.
ABSOLUTE_DENSITY_DEFINITIONS: dict[str, Callable[[WeightedGraph], float]] = {
    "density_x_diameter": _density_x_diameter,
}
DEFAULT_ABSOLUTE_DENSITY = "density_x_diameter"


def absolute_density(
    g: WeightedGraph, definition: str | Callable[[WeightedGraph], float] = DEFAULT_ABSOLUTE_DENSITY
) -> float:
    if g.n < 2:
        raise DomainError(f"absolute density needs at least 2 nodes, got {g.n}")
    if g.e == 0:
        raise DomainError("absolute density is undefined for an edgeless graph")
    if callable(definition):
        return definition(g)
    try:
        fn = ABSOLUTE_DENSITY_DEFINITIONS[definition]
    except KeyError:
        raise UsageError(
            f"unknown absolute density definition {definition!r}; "
            f"known: {', '.join(ABSOLUTE_DENSITY_DEFINITIONS)}"
        ) from None
    return fn(g)


def load(g: WeightedGraph) -> int:
    """Number of independent loops (dimension of the cycle space)."""
    return cycle_rank(g)


@dataclass(frozen=True)
class StructuralReport:
    n: int
    e: int
    p: int
    cyclomatic: int
    load: int
    density: float | None
    density_delta: float | None
    absolute_density: float | None

    def as_dict(self) -> dict:
        return asdict(self)


def structural_report(
    g: WeightedGraph, absolute_density_definition: str = DEFAULT_ABSOLUTE_DENSITY
) -> StructuralReport:
    """All structural metrics; entries undefined for ``g`` are ``None``."""
    p = len(connected_components(g))
    dens = dens_delta = abs_dens = None
    if g.n >= 2:
        dens = density(g)
        dens_delta = density_delta(g)
        if g.e > 0:
            abs_dens = absolute_density(g, absolute_density_definition)
    return StructuralReport(
        n=g.n,
        e=g.e,
        p=p,
        cyclomatic=g.e - g.n + 2 * p,
        load=g.e - g.n + p,
        density=dens,
        density_delta=dens_delta,
        absolute_density=abs_dens,
    )
