"""
The quadratic family `f_c(x) = c - x^2` near the Chebyshev map `Ch(x) = 2 - x^2`.
"""

import cmath
import logging
import math
from typing import NamedTuple, Tuple, Union

import numpy as np

from . import types

logger = logging.getLogger(__name__)

Number = Union[complex, float]

CHEBYSHEV_PARAMETER = 2.0


class CocycleResult(NamedTuple):
    value: complex
    derivative: complex
    steps: int


class PreimagePair(NamedTuple):
    principal: complex
    opposite: complex

    @property
    def critical(self) -> bool:
        "Both preimages coincide with the critical point 0"
        return self.principal == 0


class UnimodalQuadratic:
    """
    The map `x -> c - x^2` acting on the complex plane.

    At `c = 2` it is the Chebyshev polynomial with fixed points `-2` and `1`.
    """

    __slots__ = ("_c",)

    def __init__(self, c: float) -> None:
        c = float(c)
        if not math.isfinite(c):
            raise types.DynamicsError(f"parameter c must be finite, got {c!r}", types.ErrorCode.config)
        self._c = c

    @property
    def c(self) -> float:
        return self._c

    def __call__(self, z):
        return self._c - z * z

    @staticmethod
    def derivative(z):
        return -2 * z

    def fixed_points(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return fixed_points(self)

    def to_standard_form(self) -> float:
        """
        Returns `c'` such that `z -> z^2 + c'` is conjugate to this map through `z -> -z`.
        """

        return -self._c

    def __eq__(self, other: object) -> bool:
        return isinstance(other, UnimodalQuadratic) and other._c == self._c

    def __hash__(self) -> int:
        return hash(("UnimodalQuadratic", self._c))

    def __repr__(self) -> str:
        return f"UnimodalQuadratic(c={self._c!r})"


def chebyshev() -> UnimodalQuadratic:
    return UnimodalQuadratic(CHEBYSHEV_PARAMETER)


def iterate_with_derivative(f: UnimodalQuadratic, z: Number, k: int) -> CocycleResult:
    """
    Computes `f^k(z)` together with the cocycle `Df^k(z) = prod f'(f^i(z))`.

    Raises:
        DynamicsError: with code `overflow` naming the first step that left the floats.
    """

    if k < 0:
        raise types.DynamicsError(f"iteration count must be non-negative, got {k}", types.ErrorCode.config)

    value = complex(z)
    derivative = complex(1.0)
    for step in range(1, k + 1):
        derivative *= -2 * value
        value = f.c - value * value
        if not (cmath.isfinite(value) and cmath.isfinite(derivative)):
            raise types.DynamicsError(
                f"orbit of {z!r} overflowed at step {step} of {k}",
                types.ErrorCode.overflow,
            )
    return CocycleResult(value, derivative, k)


def iterate_array(f: UnimodalQuadratic, z, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Vectorized `iterate_with_derivative`; overflowing entries become `inf`/`nan`
    instead of raising.
    """

    values = np.array(z, dtype=complex, copy=True)
    derivatives = np.ones_like(values)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k):
            derivatives *= -2 * values
            values = f.c - values * values
    return values, derivatives


def iterate_real(f: UnimodalQuadratic, x, k: int) -> Tuple[np.ndarray, np.ndarray]:
    "Real-line variant of `iterate_array`"
    values = np.array(x, dtype=float, copy=True)
    derivatives = np.ones_like(values)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k):
            derivatives *= -2 * values
            values = f.c - values * values
    return values, derivatives


def preimages(f: UnimodalQuadratic, z: Number) -> PreimagePair:
    w = cmath.sqrt(f.c - complex(z))
    return PreimagePair(w, -w)


def preimage_branches(f: UnimodalQuadratic, z: np.ndarray) -> np.ndarray:
    "Principal preimages of an array of points; the opposite branch is the negation."
    return np.sqrt(f.c - np.asarray(z, dtype=complex))


def fixed_points(f: UnimodalQuadratic) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    """
    Returns `((alpha, Df(alpha)), (beta, Df(beta)))` where `beta < 0 < alpha`
    and `beta` is the expanding, orientation-preserving fixed point.
    """

    disc = 1.0 + 4.0 * f.c
    if disc < 0:
        raise types.DynamicsError(
            f"fixed points are not real for c = {f.c} < -1/4",
            types.ErrorCode.range,
        )
    root = math.sqrt(disc)
    alpha = (root - 1.0) / 2.0
    beta = -(1.0 + root) / 2.0
    return (alpha, -2.0 * alpha), (beta, -2.0 * beta)


def critical_orbit(f: UnimodalQuadratic, n: int) -> np.ndarray:
    "`[f(0), f^2(0), ..., f^n(0)]`"
    orbit = np.empty(n, dtype=float)
    x = 0.0
    for i in range(n):
        x = f.c - x * x
        orbit[i] = x
    return orbit


def itinerary(f: UnimodalQuadratic, p: int) -> Tuple[int, ...]:
    "Signs of `f^i(0)` for `i = 1..p-1`; 0 marks an exact hit of the critical point"
    return tuple(int(np.sign(x)) for x in critical_orbit(f, p - 1))


def first_entry_times(
    f: UnimodalQuadratic,
    points,
    radius: float,
    budget: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    First `k` in `1..budget` with `|f^k(z)| < radius` for each point.

    Returns:
        `(times, escaped)`: times are `-1` where no entry happened; `escaped`
        marks orbits proven to diverge, the rest of the misses are undetermined.
    """

    z = np.array(points, dtype=complex, copy=True).ravel()
    times = np.full(z.shape, -1, dtype=np.int64)
    escaped = np.zeros(z.shape, dtype=bool)
    active = np.ones(z.shape, dtype=bool)
    escape_radius = 2.0 + abs(f.c)

    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, budget + 1):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            w = f.c - z[idx] * z[idx]
            z[idx] = w
            mod = np.abs(w)
            entered = mod < radius
            times[idx[entered]] = k
            gone = ~entered & ~(mod <= escape_radius)
            escaped[idx[gone]] = True
            active[idx[entered | gone]] = False
    return times, escaped


def chebyshev_semiconjugacy_check(
    sample_count: int,
    annulus: Tuple[float, float],
    seed: int = 0,
) -> types.SemiconjugacyReport:
    """
    Samples the annulus `r_in < |z| < r_out` and measures how well
    `T(z) = -(z + 1/z)` carries squaring to the Chebyshev map:
    `T(z^2) = 2 - T(z)^2`.
    """

    r_in, r_out = annulus
    if not (1.0 < r_in < r_out) or not math.isfinite(r_out):
        raise types.ConfigError(
            f"annulus must satisfy 1 < r_in < r_out, got {annulus}",
            types.ErrorCode.range,
        )
    if sample_count <= 0:
        raise types.ConfigError(f"sample_count must be positive, got {sample_count}", types.ErrorCode.range)

    rng = np.random.default_rng(seed)
    radii = np.sqrt(rng.uniform(r_in**2, r_out**2, sample_count))
    angles = rng.uniform(0.0, 2.0 * math.pi, sample_count)
    z = radii * np.exp(1j * angles)

    lhs = -(z * z + 1.0 / (z * z))
    t = -(z + 1.0 / z)
    rhs = 2.0 - t * t
    scale = np.maximum(1.0, np.abs(lhs))
    dt = np.abs(1.0 - 1.0 / (z * z))

    report = types.SemiconjugacyReport(
        samples=sample_count,
        inner_radius=r_in,
        outer_radius=r_out,
        seed=seed,
        max_residual=float(np.max(np.abs(lhs - rhs) / scale)),
        min_abs_derivative=float(dt.min()),
        max_abs_derivative=float(dt.max()),
    )
    logger.debug("semi-conjugacy residual %.3e over %d samples", report.max_residual, sample_count)
    return report
