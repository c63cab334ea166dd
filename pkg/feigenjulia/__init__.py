from . import certificates, oracles, render, reports
from .__version__ import __version__
from .certificates import (
    Certifier,
    area_certificate_from_sups,
    assemble_recursion,
    bisect_delta,
    certify_area,
    certify_delta,
    fixed_threshold_induction,
    render_summary,
    solve_quadratic_fixed_point,
    uv_recursion_step,
)
from .dynamics import (
    UnimodalQuadratic,
    chebyshev,
    chebyshev_semiconjugacy_check,
    critical_orbit,
    fixed_points,
    iterate_with_derivative,
    preimages,
)
from .engine import Engine
from .oracles import (
    box_counting_dimension,
    cascade_lambda_oracle,
    cross_check,
    escape_fraction_mc,
    escape_time_grid,
    julia_escape_membership,
)
from .regions import Difference, Disk, EmptyRegion, Plane, Region, region_membership, sample_grid
from .renormalization import (
    DomainSystem,
    accumulation_parameter,
    build_domain_system,
    cvitanovic_solve,
    evaluate_fixed_point,
    find_superattracting_parameter,
    lemma_class_report,
    scaling_estimators,
)
from .series import (
    OrbitFamily,
    chebyshev_profile_stability,
    enumerate_family,
    expansion_lemma_sweep,
    family_sup,
    measure_expansion_profile,
    minimal_return_time,
    parse_family,
    pressure_critical_exponent,
    rescaling_residual,
)
from .types import (
    AreaCertificate,
    AreaMode,
    CertificateError,
    CertificateStatus,
    CombinatoricsSpec,
    ConfigError,
    DeltaBisection,
    DeltaCertificate,
    DimensionEstimate,
    DynamicsError,
    ErrorCode,
    EscapeFraction,
    ExpansionProfile,
    FeigenjuliaError,
    GridSpec,
    NoReturnError,
    NonConvergenceError,
    OracleError,
    Precision,
    QuadraticRecursion,
    RecursionMode,
    RegionError,
    RenormalizationError,
    RenormFixedPointApprox,
    RunConfig,
    SeriesBound,
    SeriesBudget,
    SeriesError,
    Settings,
)

settings = Settings()
"""Global settings object that applies to every `Engine.get_default()` caller."""


__all__ = [
    # types
    "AreaCertificate",
    "AreaMode",
    "CertificateError",
    "CertificateStatus",
    "CombinatoricsSpec",
    "ConfigError",
    "DeltaBisection",
    "DeltaCertificate",
    "DimensionEstimate",
    "DynamicsError",
    "ErrorCode",
    "EscapeFraction",
    "ExpansionProfile",
    "FeigenjuliaError",
    "GridSpec",
    "NoReturnError",
    "NonConvergenceError",
    "OracleError",
    "Precision",
    "QuadraticRecursion",
    "RecursionMode",
    "RegionError",
    "RenormalizationError",
    "RenormFixedPointApprox",
    "RunConfig",
    "SeriesBound",
    "SeriesBudget",
    "SeriesError",
    "Settings",
    # dynamics and regions
    "UnimodalQuadratic",
    "chebyshev",
    "chebyshev_semiconjugacy_check",
    "critical_orbit",
    "fixed_points",
    "iterate_with_derivative",
    "preimages",
    "Region",
    "Plane",
    "EmptyRegion",
    "Disk",
    "Difference",
    "region_membership",
    "sample_grid",
    # renormalization
    "DomainSystem",
    "accumulation_parameter",
    "build_domain_system",
    "cvitanovic_solve",
    "evaluate_fixed_point",
    "find_superattracting_parameter",
    "lemma_class_report",
    "scaling_estimators",
    # series
    "OrbitFamily",
    "chebyshev_profile_stability",
    "enumerate_family",
    "expansion_lemma_sweep",
    "family_sup",
    "measure_expansion_profile",
    "minimal_return_time",
    "parse_family",
    "pressure_critical_exponent",
    "rescaling_residual",
    # certificates
    "Certifier",
    "area_certificate_from_sups",
    "assemble_recursion",
    "bisect_delta",
    "certify_area",
    "certify_delta",
    "fixed_threshold_induction",
    "render_summary",
    "solve_quadratic_fixed_point",
    "uv_recursion_step",
    # oracles
    "box_counting_dimension",
    "cascade_lambda_oracle",
    "cross_check",
    "escape_fraction_mc",
    "escape_time_grid",
    "julia_escape_membership",
    # engine and package globals
    "Engine",
    "settings",
    # modules
    "certificates",
    "oracles",
    "render",
    "reports",
    # version
    "__version__",
]
