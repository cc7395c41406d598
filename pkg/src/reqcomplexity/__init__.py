"""Spectral and structural complexity metrics for requirement and system graphs."""

__version__ = "0.1.0"

from .errors import ComplexityError, DomainError, UsageError, ValidationError
from .graph import (
    EdgeRecord,
    MatrixKind,
    NodeKind,
    NodeRecord,
    SystemMatrix,
    WeightedGraph,
    build_matrix,
    connected_components,
    cycle_rank,
    diameter,
)
from .spectral import METRIC_NAMES, MetricSpec, Spectrum, eigendecompose, evaluate_metric, named_metric
from .structural import (
    StructuralReport,
    absolute_density,
    cyclomatic_complexity,
    density,
    density_delta,
    load,
    structural_report,
)
from .stats import correlate, fisher_ci, ks_normal, ols_poly, pearson, t_cdf
from .tasks import (
    BaselineProfile,
    IntegrationTask,
    TaskMetricRow,
    baseline_build,
    baseline_check,
    integration_level_metrics,
    molecule_level_metrics,
)
from .extract import build_layered_graph, parse_requirements, project
