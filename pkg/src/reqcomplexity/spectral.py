"""Spectra and the generalized spectral complexity metric.

Every metric here has the form ``f(gamma * sum_i g(lambda_i(M) - tr(M)/n))``
with ``(f, g)`` either ``(identity, abs)`` (the energy family) or
``(log, exp)`` (the natural-connectivity family), ``gamma`` either 1 or
``1/n``, and ``M`` one of the three system matrices. The twelve
combinations carry the names GE, LGE, NLGE, NC, LNC, NLNC and their
``n``-suffixed normalized variants.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError, UsageError, ValidationError
from .graph import MatrixKind, SystemMatrix, WeightedGraph, build_matrix


class FG(str, enum.Enum):
    ABS_LINEAR = "abs_linear"  # f(x) = x, g(y) = |y|
    EXP_LOG = "exp_log"  # f(x) = ln x, g(y) = e^y


class Gamma(str, enum.Enum):
    ONE = "one"
    ONE_OVER_N = "one_over_n"


_PREFIX = {
    MatrixKind.ADJACENCY: "",
    MatrixKind.LAPLACIAN: "L",
    MatrixKind.NORMALIZED_LAPLACIAN: "NL",
}
_BASE = {FG.ABS_LINEAR: "GE", FG.EXP_LOG: "NC"}


@dataclass(frozen=True)
class MetricSpec:
    fg: FG
    gamma: Gamma
    matrix: MatrixKind

    @property
    def name(self) -> str:
        suffix = "n" if self.gamma is Gamma.ONE_OVER_N else ""
        return _PREFIX[self.matrix] + _BASE[self.fg] + suffix

    @classmethod
    def from_name(cls, name: str) -> "MetricSpec":
        try:
            return METRIC_SPECS[name]
        except KeyError:
            raise UsageError(
                f"unknown spectral metric {name!r}; valid names: {', '.join(METRIC_NAMES)}"
            ) from None


METRIC_SPECS: dict[str, MetricSpec] = {}
for _fg in FG:
    for _gamma in Gamma:
        for _kind in MatrixKind:
            _spec = MetricSpec(_fg, _gamma, _kind)
            METRIC_SPECS[_spec.name] = _spec
METRIC_NAMES: tuple[str, ...] = (
    "GE", "LGE", "NLGE", "NC", "LNC", "NLNC",
    "GEn", "LGEn", "NLGEn", "NCn", "LNCn", "NLNCn",
)
assert set(METRIC_NAMES) == set(METRIC_SPECS)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues in ascending order, plus ``tr(M)/n`` of the source matrix."""

    eigenvalues: np.ndarray = field(repr=False)
    source_kind: MatrixKind | None
    trace_over_n: float

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


def zero_tolerance(m: SystemMatrix | np.ndarray) -> float:
    """Threshold under which an eigenvalue of ``m`` counts as zero."""
    a = m.entries if isinstance(m, SystemMatrix) else np.asarray(m)
    norm = float(np.abs(a).sum(axis=1).max()) if a.size else 0.0
    return 1e-9 * max(1.0, norm)


def eigendecompose(m: SystemMatrix | np.ndarray, vectors: bool = False):
    """Eigenvalues (ascending) of a symmetric matrix.

    With ``vectors=True`` returns ``(spectrum, eigenvectors)`` where column
    ``k`` of the second item belongs to eigenvalue ``k``.
    """
    kind = m.kind if isinstance(m, SystemMatrix) else None
    a = m.entries if isinstance(m, SystemMatrix) else np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    if not np.array_equal(a, a.T):
        raise ValidationError("eigendecompose requires an exactly symmetric matrix")
    n = a.shape[0]
    if n == 0:
        vals, vecs = np.zeros(0), np.zeros((0, 0))
    elif vectors:
        vals, vecs = np.linalg.eigh(a)
    else:
        vals, vecs = np.linalg.eigvalsh(a), None
    spectrum = Spectrum(vals, kind, float(np.trace(a)) / n if n else 0.0)
    return (spectrum, vecs) if vectors else spectrum


def _apply(spec: MetricSpec, spectrum: Spectrum) -> float:
    n = spectrum.n
    if n == 0:
        if spec.fg is FG.ABS_LINEAR:
            return 0.0
        raise DomainError(f"{spec.name} is undefined on the empty graph (log of an empty sum)")
    centered = spectrum.eigenvalues - spectrum.trace_over_n
    gamma = 1.0 if spec.gamma is Gamma.ONE else 1.0 / n
    if spec.fg is FG.ABS_LINEAR:
        return gamma * math.fsum(np.abs(centered))
    shift = float(centered.max())
    return shift + math.log(math.fsum(np.exp(centered - shift))) + math.log(gamma)


def evaluate_metric(g: WeightedGraph, spec: MetricSpec, topology_only: bool = False) -> float:
    return _apply(spec, eigendecompose(build_matrix(g, spec.matrix, topology_only)))


def named_metric(g: WeightedGraph, name: str, topology_only: bool = False) -> float:
    return evaluate_metric(g, MetricSpec.from_name(name), topology_only)


def spectral_metrics(
    g: WeightedGraph, names: Iterable[str] = METRIC_NAMES, topology_only: bool = False
) -> dict[str, float]:
    """Several named metrics at once, decomposing each matrix only once."""
    specs = [MetricSpec.from_name(name) for name in names]
    spectra: dict[MatrixKind, Spectrum] = {}
    out = {}
    for spec in specs:
        if spec.matrix not in spectra:
            spectra[spec.matrix] = eigendecompose(build_matrix(g, spec.matrix, topology_only))
        out[spec.name] = _apply(spec, spectra[spec.matrix])
    return out
