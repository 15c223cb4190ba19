"""geonull: curvature, nullity, and splitting-tensor numerics for coordinate metrics.

The package computes Riemann curvature, the nullity distribution ker R and its
codimension (conullity), the splitting tensor of a unit nullity field, and the
Riccati evolution of that tensor along nullity geodesics, for metrics given in
coordinates, including a small catalog of example families driven by a
user-supplied warping function p.
"""

from .exprcalc import DomainError, Expression, Jet2, ParseError, eval_jet2, parse, to_source
from .numcore import (
    KernelResult,
    SingularMatrixError,
    eigenvalues,
    invert,
    kernel,
)
from .metricspace import (
    CatalogEntry,
    ChartDomainError,
    MetricField,
    Provenance,
    CATALOG,
    catalog_conullity3,
    catalog_euclidean,
    catalog_polar,
    catalog_product,
    catalog_sekigawa,
    catalog_sphere,
    fd_jet,
    finite_difference_field,
)
from .curvature import (
    CurvatureData,
    DegeneratePlaneError,
    NullityResult,
    bianchi2_residual,
    christoffel,
    curvature_data,
    nullity,
    riemann,
    scalar_curvature,
    sectional,
)
from .flows import (
    FlatnessReport,
    GeodesicPath,
    IncompletenessReport,
    NullityGeodesicReport,
    ParallelFrame,
    flatness_probe,
    geodesic,
    incompleteness_probe,
    nullity_geodesic_check,
    parallel_transport,
    sampled_path,
)
from .splitting import (
    AlignmentError,
    BlockInvariants,
    EvolutionReport,
    KernelDimensionError,
    NonUnitFieldError,
    RiccatiBlowupError,
    SplittingTensor,
    classify,
    evolve_along_nullity_geodesic,
    kernel_section,
    nullity_field,
    riccati_closed_form,
    riccati_ode,
    splitting_tensor,
    trace_det_evolution,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError",
    "BlockInvariants",
    "CATALOG",
    "CatalogEntry",
    "ChartDomainError",
    "CurvatureData",
    "DegeneratePlaneError",
    "DomainError",
    "EvolutionReport",
    "Expression",
    "FlatnessReport",
    "GeodesicPath",
    "IncompletenessReport",
    "Jet2",
    "KernelDimensionError",
    "KernelResult",
    "MetricField",
    "NonUnitFieldError",
    "NullityGeodesicReport",
    "NullityResult",
    "ParallelFrame",
    "ParseError",
    "Provenance",
    "RiccatiBlowupError",
    "SingularMatrixError",
    "SplittingTensor",
    "bianchi2_residual",
    "catalog_conullity3",
    "catalog_euclidean",
    "catalog_polar",
    "catalog_product",
    "catalog_sekigawa",
    "catalog_sphere",
    "christoffel",
    "classify",
    "curvature_data",
    "eigenvalues",
    "eval_jet2",
    "evolve_along_nullity_geodesic",
    "fd_jet",
    "finite_difference_field",
    "flatness_probe",
    "geodesic",
    "incompleteness_probe",
    "invert",
    "kernel",
    "kernel_section",
    "nullity",
    "nullity_field",
    "nullity_geodesic_check",
    "parallel_transport",
    "parse",
    "riccati_closed_form",
    "riccati_ode",
    "riemann",
    "sampled_path",
    "scalar_curvature",
    "sectional",
    "splitting_tensor",
    "to_source",
    "trace_det_evolution",
]
