from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Type, TypeVar

try:
    # pydantic v2 import
    from pydantic import BaseModel, ConfigDict, Field, ValidationError
    from pydantic_settings import BaseSettings, SettingsConfigDict

    pydantic_v2 = True
except ImportError:
    # pydantic v1 import
    from pydantic.v1 import BaseModel, BaseSettings, ConfigDict, Field, ValidationError

    pydantic_v2 = False

from typing_extensions import Literal, Self

ModelT = TypeVar("ModelT", bound=BaseModel)

Point = Tuple[float, float]
"A complex number serialized as `(real, imag)`"


class ErrorCode(str, Enum):
    """
    Machine-readable failure codes carried by every `FeigenjuliaError`
    """

    overflow = "overflow"
    config = "config"
    no_bracket = "no_bracket"
    no_fixed_point = "no_fixed_point"
    nonconverged = "nonconverged"
    singular_jacobian = "singular_jacobian"
    nesting_violation = "nesting_violation"
    first_return_violation = "first_return_violation"
    postcritical_collision = "postcritical_collision"
    budget_exceeded = "budget_exceeded"
    critical_hit = "critical_hit"
    empty_grid = "empty_grid"
    no_expansion = "no_expansion"
    divergent_tail = "divergent_tail"
    no_return = "no_return"
    bad_fit = "bad_fit"
    noncontractive = "noncontractive"
    uncertifiable_range = "uncertifiable_range"
    nonmonotone = "nonmonotone"
    degenerate_fit = "degenerate_fit"
    range = "range"
    parse = "parse"
    io = "io"


class FeigenjuliaError(Exception):
    """
    Base exception for all feigenjulia errors
    """

    def __init__(self, message: str, code: Optional[ErrorCode] = None):
        super().__init__(message)
        self.code = code


class DynamicsError(FeigenjuliaError):
    """
    Error class when iterating the quadratic family fails
    """


class RegionError(FeigenjuliaError):
    """
    Error class for malformed regions or empty sampling grids
    """


class RenormalizationError(FeigenjuliaError):
    """
    Error class when a renormalization search or solve fails
    """


class NonConvergenceError(RenormalizationError):
    """
    Error class when the fixed-point Newton iteration does not converge
    """

    def __init__(self, message: str, residual_history: Sequence[float]):
        super().__init__(message, ErrorCode.nonconverged)
        self.residual_history = list(residual_history)


class SeriesError(FeigenjuliaError):
    """
    Error class when a Poincaré series evaluation fails
    """


class NoReturnError(SeriesError):
    """
    Error class when no sampled orbit returns within the iteration budget
    """

    def __init__(self, message: str, lower_bound: int):
        super().__init__(message, ErrorCode.no_return)
        self.lower_bound = lower_bound


class CertificateError(FeigenjuliaError):
    """
    Error class for invalid certificate inputs
    """


class OracleError(FeigenjuliaError):
    """
    Error class when an independent oracle cannot produce an estimate
    """


class ConfigError(FeigenjuliaError):
    """
    Error class for invalid configuration, flags or input files
    """


class Precision(str, Enum):
    """
    Arithmetic used by the renormalization solver
    """

    double = "double"
    extended = "extended"


class Membership(str, Enum):
    """
    Tri-state answer of a region membership query
    """

    inside = "inside"
    outside = "outside"
    uncertain = "uncertain"


class CertificateStatus(str, Enum):
    """
    Outcome of a certificate run
    """

    certified = "certified"
    no_fixed_point = "no_fixed_point"
    input_divergent = "input_divergent"
    failed = "failed"


class RecursionMode(str, Enum):
    """
    How the six coefficients of the quadratic recursion are obtained

    - `direct`: one sup per coefficient family
    - `dominating`: three dominating families, each feeding two coefficients
    """

    direct = "direct"
    dominating = "dominating"


class AreaMode(str, Enum):
    """
    How the escape-area induction is closed
    """

    direct = "direct"
    fixed_threshold = "fixed_threshold"


class Settings(BaseSettings):
    """
    Process-wide settings, overridable through `FEIGENJULIA_*` environment variables
    """

    threads: Optional[int] = Field(default=None, ge=1)
    "Worker cap for the shared pool; `None` means CPU count - 1 (at least 1)"

    output_dir: str = "runs"
    "Directory under which every CLI run writes its artifacts"

    log_level: str = "WARNING"
    "Level handed to `logging.basicConfig` by the CLI"

    precision: Precision = Precision.double
    "Default arithmetic for the renormalization solver"

    node_budget: int = Field(default=50_000_000, ge=1)
    "Default cap on enumerated tree nodes per series evaluation"

    if pydantic_v2:
        model_config = SettingsConfigDict(env_prefix="feigenjulia_")
    else:

        class Config:
            env_prefix = "feigenjulia_"


class RunConfig(BaseModel):
    """
    Effective configuration of one CLI run (defaults < config file < flags)
    """

    period: int = Field(default=10, ge=2, le=16)
    rho: float = Field(default=0.05, gt=0.0, le=0.1)
    degree: int = Field(default=20, ge=8, le=64)
    delta: float = Field(default=1.8, gt=1.0, le=2.0)
    delta_min: float = Field(default=1.0, ge=1.0, lt=2.0)
    delta_max: float = Field(default=2.0, gt=1.0, le=2.0)
    tolerance: float = Field(default=0.05, gt=0.0, lt=1.0)
    bisect: bool = False
    depth: int = Field(default=12, ge=0, le=40)
    prune_threshold: float = Field(default=1e-9, ge=0.0)
    grid_radii: int = Field(default=10, ge=1, le=512)
    grid_angles: int = Field(default=20, ge=1, le=4096)
    node_budget: Optional[int] = Field(default=None, ge=1)
    profile_depth: int = Field(default=10, ge=1, le=22)
    profile_samples: int = Field(default=64, ge=1, le=100_000)
    samples: int = Field(default=100_000, ge=1)
    mc_budget: int = Field(default=200, ge=1)
    return_budget: int = Field(default=2000, ge=1)
    k_max: int = Field(default=30, ge=1, le=10_000)
    seed: int = Field(default=0, ge=0)
    precision: Optional[Precision] = None
    output_dir: Optional[str] = None
    recursion_mode: RecursionMode = RecursionMode.direct
    area_mode: AreaMode = AreaMode.direct
    tracking: float = Field(default=0.5, gt=0.0, lt=1.0)
    resolutions: List[int] = Field(default_factory=lambda: [256, 512, 1024, 2048])
    max_iter: int = Field(default=256, ge=1, le=100_000)
    cascade_levels: int = Field(default=8, ge=2, le=10)
    p_min: int = Field(default=5, ge=3, le=16)
    p_max: int = Field(default=11, ge=3, le=16)
    family: str = "A'<-[U\\V']-+A'"
    kappa: float = Field(default=0.3, gt=0.0, lt=0.5)
    epsilon: float = Field(default=0.3, gt=0.0, lt=2.0)
    c: Optional[float] = Field(default=None, ge=-0.25, le=2.0)
    image_format: Literal["ppm", "png"] = "ppm"

    if pydantic_v2:
        model_config = ConfigDict(extra="forbid")
    else:

        class Config:
            extra = "forbid"


def model_dump(model: BaseModel) -> Dict[str, Any]:
    """
    Dumps a record to plain python values, using field aliases (`lambda`).
    """

    if pydantic_v2:
        return model.model_dump(mode="python", by_alias=True)
    return model.dict(by_alias=True)


def model_validate(cls: Type[ModelT], data: Any) -> ModelT:
    if pydantic_v2:
        return cls.model_validate(data)
    return cls.parse_obj(data)


def model_copy(model: ModelT, update: Optional[Dict[str, Any]] = None) -> ModelT:
    if pydantic_v2:
        return model.model_copy(update=update)
    return model.copy(update=update)


def model_json_schema(cls: Type[BaseModel]) -> Dict[str, Any]:
    if pydantic_v2:
        return cls.model_json_schema(by_alias=True)
    return cls.schema(by_alias=True)


def model_field_names(cls: Type[BaseModel]) -> List[str]:
    if pydantic_v2:
        return list(cls.model_fields)
    return list(cls.__fields__)


def model_fields_set(model: BaseModel) -> set:
    "Fields given explicitly (or read from the environment for settings)"
    if pydantic_v2:
        return set(model.model_fields_set)
    return set(model.__fields_set__)


def to_point(z: complex) -> Point:
    z = complex(z)
    return (z.real, z.imag)


class _AliasedModel(BaseModel):
    """
    Records carrying a `lambda` field, stored as `lambda_` in python
    """

    if pydantic_v2:
        model_config = ConfigDict(populate_by_name=True)
    else:

        class Config:
            allow_population_by_field_name = True


class SemiconjugacyReport(BaseModel):
    samples: int
    inner_radius: float
    outer_radius: float
    seed: int
    max_residual: float
    "Largest `|T(z^2) - Ch(T(z))|` over the samples"

    min_abs_derivative: float
    max_abs_derivative: float


class CombinatoricsSpec(BaseModel):
    """
    Itinerary of a superattracting orbit of period `p`: the signs of
    `f^i(0)` for `i = 1..p-1`, with `+1` on the right of the critical point.
    """

    period: int = Field(ge=2)
    signs: Tuple[int, ...]

    def __init__(self, **data: Any) -> None:
        super().__init__(**data)
        if len(self.signs) != self.period - 1:
            raise ConfigError(
                f"period {self.period} needs {self.period - 1} signs, got {len(self.signs)}",
                ErrorCode.range,
            )
        if any(s not in (-1, 1) for s in self.signs):
            raise ConfigError(f"signs must be +1 or -1, got {self.signs}", ErrorCode.config)

    @classmethod
    def closest_to_chebyshev(cls, period: int) -> Self:
        """
        `(+, -, ..., -)`: the period-p combinatorics whose parameter is closest to 2.
        """

        if period < 2:
            raise ConfigError(f"period must be at least 2, got {period}", ErrorCode.range)
        return cls(period=period, signs=(1,) + (-1,) * (period - 2))

    @classmethod
    def doubling(cls, n: int) -> Self:
        """
        The n-th step of the period-doubling cascade (period `2**n`).
        """

        if n < 1:
            raise ConfigError(f"doubling level must be at least 1, got {n}", ErrorCode.range)
        spec = cls(period=2, signs=(1,))
        base = cls(period=2, signs=(1,))
        for _ in range(n - 1):
            spec = spec.tuned(base)
        return spec

    def tuned(self, inner: "CombinatoricsSpec") -> Self:
        """
        Star product `self * inner`: `self` is repeated `inner.period` times,
        separated by the signs of `inner`, flipped when `self` has an odd
        number of `+` signs.
        """

        flip = -1 if sum(1 for s in self.signs if s > 0) % 2 else 1
        signs: List[int] = list(self.signs)
        for s in inner.signs:
            signs.append(flip * s)
            signs.extend(self.signs)
        return type(self)(period=self.period * inner.period, signs=tuple(signs))

    @property
    def word(self) -> str:
        return "".join("R" if s > 0 else "L" for s in self.signs)


class ParameterReport(BaseModel):
    period: int
    word: str
    c: float
    residual: float
    "`|f_c^p(0)|` at the refined parameter"


class RenormFixedPointApprox(_AliasedModel):
    """
    Even polynomial `g(x) = g(0) + sum a_i x^(2i)` approximately solving
    `g(x) = lambda^-1 g^p(lambda x)` with `g(-2) = -2`.
    """

    period: int
    degree: int
    lambda_: float = Field(alias="lambda")
    coefficients: List[float]
    "`g(0), a_1, ..., a_N`"

    residual: float
    validity_radius: float = 2.0
    iterations: int = 0
    residual_history: List[float] = Field(default_factory=list)
    precision: Precision = Precision.double
    seed_parameter: Optional[float] = None


class ScalingEstimates(BaseModel):
    period: int
    parameter: float
    beta_rescale: float
    julia_ratio: float
    solver: Optional[float] = None
    spread: float


class GridSpec(BaseModel):
    """
    Log-polar sampling grid (or a circle grid when `circle_radius` is set)
    """

    n_radii: int = Field(default=10, ge=1)
    n_angles: int = Field(default=20, ge=1)
    half_plane: bool = True
    "Sample only the upper half plane; regions of real maps are symmetric under conjugation"

    circle_radius: Optional[float] = Field(default=None, gt=0.0)


class DomainSummary(_AliasedModel):
    period: int
    rho: float
    parameter: float
    lambda_: float = Field(alias="lambda")
    u_prime_radii: Tuple[float, float]
    diam_u_prime: float
    u_core_radius: float
    nesting_margin: float
    nesting_ok: bool
    first_return: bool
    postcritical_clearance: bool
    postcritical_margin: float
    min_return_time: Optional[int] = None
    tracking: float
    strict: bool


class LemmaClassRow(BaseModel):
    p: int
    c_p: float
    f0: float
    alpha_p: float
    eta_p: float
    abs_lambda: float
    diam_u_prime: float
    s1_length: float
    modulus_proxy: float
    min_return_time: int


class LevelSumRow(BaseModel):
    depth: int
    count: int
    sum: float


class SeriesBound(BaseModel):
    """
    Sup over a target region of a truncated Poincaré series
    """

    family: str
    delta: float
    j: int
    point_estimate: float
    "Largest truncated sum over the sampled terminals"

    upper_bound: float
    "Largest distortion-corrected sum plus tail and pruned mass"

    tail_bound: float
    pruned_mass: float
    terminals: int
    nodes: int
    margin: float
    argmax: Point
    grid: GridSpec
    uncertain: int = 0
    flags: List[str] = Field(default_factory=list)
    level_sums: List[float] = Field(default_factory=list)
    level_counts: List[int] = Field(default_factory=list)


class SeriesBudget(BaseModel):
    """
    Truncation and sampling knobs shared by every series evaluation of a run
    """

    depth: int = Field(default=12, ge=0)
    prune_threshold: float = Field(default=1e-9, ge=0.0)
    grid: GridSpec = Field(default_factory=GridSpec)
    node_budget: int = Field(default=50_000_000, ge=1)
    profile_depth: int = Field(default=10, ge=1)
    profile_samples: int = Field(default=64, ge=1)
    return_budget: int = Field(default=2000, ge=1)
    tracking: float = Field(default=0.5, gt=0.0, lt=1.0)

    @classmethod
    def from_config(cls, config: RunConfig, settings: Optional[Settings] = None) -> Self:
        node_budget = config.node_budget
        if node_budget is None:
            node_budget = settings.node_budget if settings else 50_000_000
        return cls(
            depth=config.depth,
            prune_threshold=config.prune_threshold,
            grid=GridSpec(n_radii=config.grid_radii, n_angles=config.grid_angles),
            node_budget=node_budget,
            profile_depth=config.profile_depth,
            profile_samples=config.profile_samples,
            return_budget=config.return_budget,
            tracking=config.tracking,
        )


class ExpansionWitness(BaseModel):
    terminal: Point
    start: Point
    steps: int
    derivative: float
    orbit: List[Point]


class ExpansionProfile(BaseModel):
    """
    Measured constants of `|Df^k(x)| >= K (2 - eps)^k` for orbits avoiding V'
    """

    k_est: float = Field(gt=0.0)
    eps_est: float = Field(gt=0.0, lt=2.0)
    region: str
    source: str
    samples: int
    depth: int
    min_ratio: float
    witness: Optional[ExpansionWitness] = None


class PressureEstimate(BaseModel):
    delta_cr: float
    raw_root: float
    bracket: Tuple[float, float]
    clamped: bool
    rms: float
    depth: int
    point: Point


class ExpansionSweepReport(BaseModel):
    period: int
    parameter: float
    kappa: float
    epsilon: float
    rho: float
    circle_radii: Tuple[float, float]
    cusp_margin: float
    "Smallest `|y|^(2-kappa) / |f(y) - 2|` on the sampled circles"

    cusp_pass: bool
    cusp_worst: Point
    return_min_ratio: float
    "Smallest `|Df^m(y)| / (2-eps)^m` over the sampled points of A'"

    return_fraction: float
    return_pass: bool
    return_worst: Point
    max_return_steps: int
    samples: int
    inner_radius: float = 0.0
    "Smallest `|y|` among the sampled points of A'"


class RescalingResidual(BaseModel):
    point: Point
    g_steps: int
    delta: float
    lhs: float
    rhs: float
    residual: float


class FixedPointSolution(BaseModel):
    s: float
    trace: List[float]
    residual: float


class QuadraticRecursion(BaseModel):
    """
    Coefficients of `s -> alpha + beta s + gamma s^2` bounding the truncated sums
    """

    delta: float
    a1: float
    a2: float
    a3: float
    b1: float
    b2: float
    b3: float
    alpha: float
    beta: float
    gamma: float
    mode: RecursionMode = RecursionMode.direct
    inputs: List[SeriesBound] = Field(default_factory=list)

    @classmethod
    def from_sups(
        cls,
        delta: float,
        a1: float,
        a2: float,
        a3: float,
        b1: float,
        b2: float,
        b3: float,
        *,
        mode: RecursionMode = RecursionMode.direct,
        inputs: Optional[List[SeriesBound]] = None,
    ) -> Self:
        return cls(
            delta=delta,
            a1=a1,
            a2=a2,
            a3=a3,
            b1=b1,
            b2=b2,
            b3=b3,
            alpha=1.0 + a1 + a2 * (1.0 + a3),
            beta=b1 + b2 * (1.0 + a3) + a2 * b3,
            gamma=b2 * b3,
            mode=mode,
            inputs=inputs or [],
        )


class DeltaCertificate(BaseModel):
    period: int
    rho: float
    delta: float
    status: CertificateStatus
    recursion: Optional[QuadraticRecursion] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    gamma: Optional[float] = None
    inputs: List[SeriesBound] = Field(default_factory=list)
    "The six family sups behind `alpha, beta, gamma`, as in `recursion`"

    fixed_point: Optional[FixedPointSolution] = None
    residual: Optional[float] = None
    "Relative self-similarity residual of the truncated sums"

    sufficient_shape: bool = False
    profile: Optional[ExpansionProfile] = None
    config: Optional[Dict[str, Any]] = None
    version: str = ""
    error: Optional[str] = None
    label: str = "numeric"


class DeltaProbe(BaseModel):
    delta: float
    status: CertificateStatus
    s: Optional[float] = None


class DeltaBisection(BaseModel):
    period: int
    rho: float
    delta_range: Tuple[float, float]
    tolerance: float
    delta_star: float
    monotone: bool
    certificate: DeltaCertificate
    chain: List[DeltaProbe]


class DeltaTrendRow(BaseModel):
    period: int
    delta_star: Optional[float] = None
    status: CertificateStatus


class DeltaTrend(BaseModel):
    rows: List[DeltaTrendRow]
    slack: float
    nonincreasing: bool


class UVSups(BaseModel):
    """
    Sups at delta = 2 feeding one step of the area induction
    """

    s_v: float = Field(ge=0.0)
    s_a: float = Field(ge=0.0)
    s_q: float = Field(ge=0.0)
    s_n: float = Field(ge=0.0)


class AreaCertificate(BaseModel):
    period: int
    rho: float
    q1: float
    q2: float
    q3: float
    q4: float
    k_value: float
    threshold_checks: Dict[str, bool]
    u_trace: List[float]
    v_trace: List[float]
    u_cap: float
    area_ratio: float
    escape_area_bound: float
    mode: AreaMode
    status: CertificateStatus
    failed_at: Optional[int] = None
    error: Optional[str] = None
    inputs: List[SeriesBound] = Field(default_factory=list)
    version: str = ""
    label: str = "numeric"


class EscapeResult(BaseModel):
    escaped: bool
    step: Optional[int] = None


class BoxCount(BaseModel):
    size: float
    count: int


class DimensionEstimate(BaseModel):
    value: float
    ladder: List[BoxCount]
    residual: float
    c: float
    max_iter: int


class DimensionReport(BaseModel):
    box: DimensionEstimate
    pressure: Optional[PressureEstimate] = None


class CascadeEstimate(_AliasedModel):
    lambda_: float = Field(alias="lambda")
    error_bar: float
    ratios: List[float]
    parameters: List[float]
    levels: int


class CascadeReport(BaseModel):
    oracle: CascadeEstimate
    solver: Optional[RenormFixedPointApprox] = None
    difference: Optional[float] = None


class EscapeFraction(BaseModel):
    k: int
    drawn: int
    accepted: int
    hits: int
    undetermined: int
    fraction: float
    ci_low: float
    ci_high: float
    budget: int
    seed: int


class Manifest(BaseModel):
    command: str
    argv: List[str]
    config: Dict[str, Any]
    versions: Dict[str, str]
    wall_time: float
    artifacts: List[str]
    exit_code: int
    error: Optional[str] = None
