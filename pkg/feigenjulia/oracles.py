"""
Independent validators: escape-time membership, box-counting dimension,
the period-doubling λ oracle and the Monte Carlo escape fraction.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from . import types
from .dynamics import UnimodalQuadratic, critical_orbit, first_entry_times
from .engine import Engine
from .regions import INSIDE
from .renormalization import DomainSystem, aitken_limit, accumulation_parameter

logger = logging.getLogger(__name__)

MAX_RESOLUTION = 4096
MAX_CASCADE_LEVEL = 10
ROW_CHUNK = 128
SAMPLE_CHUNK = 65_536
BOX_HALF_WIDTH = 2.0

Box = Tuple[float, float, float, float]
"`(x_min, x_max, y_min, y_max)`"


def _escape_radius(c: float, escape_radius: Optional[float]) -> float:
    minimum = 2.0 + abs(c)
    if escape_radius is None:
        return minimum
    if escape_radius < minimum:
        raise types.ConfigError(
            f"escape radius {escape_radius} is below 2 + |c| = {minimum}",
            types.ErrorCode.range,
        )
    return float(escape_radius)


def julia_escape_membership(
    c: float,
    z: complex,
    max_iter: int = 256,
    escape_radius: Optional[float] = None,
) -> types.EscapeResult:
    """
    Escape-time test for `x -> c - x^2`. `step` is the first iterate beyond
    the escape radius (0 when `z` already is).
    """

    radius = _escape_radius(c, escape_radius)
    w = complex(z)
    for step in range(max_iter + 1):
        if abs(w) > radius:
            return types.EscapeResult(escaped=True, step=step)
        w = c - w * w
    return types.EscapeResult(escaped=False)


def _escape_rows(c: float, x: np.ndarray, y: np.ndarray, max_iter: int, radius: float) -> np.ndarray:
    z = (x[None, :] + 1j * y[:, None]).ravel()
    steps = np.full(z.shape, -1, dtype=np.int32)
    idx = np.arange(z.size)
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(max_iter + 1):
            out = np.abs(z) > radius
            steps[idx[out]] = step
            keep = ~out
            z, idx = z[keep], idx[keep]
            if idx.size == 0:
                break
            z = c - z * z
    return steps.reshape(y.size, x.size)


def escape_time_grid(
    c: float,
    box: Box,
    shape: Tuple[int, int],
    max_iter: int = 256,
    escape_radius: Optional[float] = None,
    engine: Optional[Engine] = None,
) -> np.ndarray:
    """
    Escape steps on a `rows x cols` lattice spanning the box, edges included.
    Retained points are `-1`. Rows run from `y_max` down to `y_min`.
    """

    rows, cols = shape
    if rows < 2 or cols < 2:
        raise types.ConfigError(f"grid shape must be at least 2x2, got {shape}", types.ErrorCode.range)
    x_min, x_max, y_min, y_max = box
    if not (x_min < x_max and y_min < y_max):
        raise types.ConfigError(f"degenerate box {box}", types.ErrorCode.range)

    radius = _escape_radius(c, escape_radius)
    x = np.linspace(x_min, x_max, cols)
    y = np.linspace(y_max, y_min, rows)
    chunks = [y[i : i + ROW_CHUNK] for i in range(0, rows, ROW_CHUNK)]
    engine = engine or Engine.get_default()
    parts = engine.map(lambda ys: _escape_rows(c, x, ys, max_iter, radius), chunks)
    return np.vstack(parts)


def _boundary_boxes(steps: np.ndarray) -> int:
    retained = steps < 0
    corners = (
        retained[:-1, :-1].astype(np.int8)
        + retained[1:, :-1]
        + retained[:-1, 1:]
        + retained[1:, 1:]
    )
    return int(np.count_nonzero((corners > 0) & (corners < 4)))


def box_counting_dimension(
    c: float,
    resolutions: Sequence[int] = (256, 512, 1024, 2048),
    max_iter: int = 256,
    engine: Optional[Engine] = None,
) -> types.DimensionEstimate:
    """
    Counts the boxes of `[-2, 2]^2` whose corners mix escaping and retained
    points and fits the slope of `log N` against `log(1/size)` over the top
    half of the ladder.

    Raises:
        ConfigError: with code `range` for unsorted, odd or oversized resolutions.
        OracleError: with code `degenerate_fit` for fewer than two levels or a zero count.
    """

    resolutions = list(resolutions)
    if any(b <= a for a, b in zip(resolutions, resolutions[1:])):
        raise types.ConfigError(f"resolutions must be strictly ascending, got {resolutions}", types.ErrorCode.range)
    bad = [r for r in resolutions if r < 2 or r % 2 or r > MAX_RESOLUTION]
    if bad:
        raise types.ConfigError(
            f"resolutions must be even and within [2, {MAX_RESOLUTION}], got {bad}",
            types.ErrorCode.range,
        )
    if len(resolutions) < 2:
        raise types.OracleError("box counting needs at least two resolutions", types.ErrorCode.degenerate_fit)

    box = (-BOX_HALF_WIDTH, BOX_HALF_WIDTH, -BOX_HALF_WIDTH, BOX_HALF_WIDTH)
    ladder: List[types.BoxCount] = []
    for resolution in resolutions:
        steps = escape_time_grid(c, box, (resolution + 1, resolution + 1), max_iter, engine=engine)
        count = _boundary_boxes(steps)
        ladder.append(types.BoxCount(size=2.0 * BOX_HALF_WIDTH / resolution, count=count))
        logger.debug("c=%g resolution %d: %d boundary boxes", c, resolution, count)

    zero = [b.size for b in ladder if b.count == 0]
    if zero:
        raise types.OracleError(f"no boundary boxes at sizes {zero}", types.ErrorCode.degenerate_fit)

    top = ladder[len(ladder) // 2 :] if len(ladder) >= 4 else ladder[-2:]
    x = np.log([1.0 / b.size for b in top])
    y = np.log([b.count for b in top])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))

    value = float(np.clip(slope, 0.0, 2.0))
    if value != slope:
        logger.warning("box-counting slope %.4f clipped to [0, 2]", slope)
    logger.info("box-counting dimension at c=%g: %.4f (rms %.2e)", c, value, residual)
    return types.DimensionEstimate(value=value, ladder=ladder, residual=residual, c=c, max_iter=max_iter)


def cascade_lambda_oracle(n_max: int = 8) -> types.CascadeEstimate:
    """
    Estimates the doubling scaling factor from `d_n = f^(2^(n-1))(0)` at the
    superattracting parameters of period `2^n`, `n = 1..n_max`.

    The `d_n` alternate in sign, so every ratio `d_(n+1) / d_n` is negative.
    """

    if not 2 <= n_max <= MAX_CASCADE_LEVEL:
        raise types.ConfigError(
            f"cascade depth must lie in [2, {MAX_CASCADE_LEVEL}], got {n_max}",
            types.ErrorCode.range,
        )

    _, parameters = accumulation_parameter(2, max_period=2**n_max)
    distances = [float(critical_orbit(UnimodalQuadratic(c), 2 ** (n - 1))[-1]) for n, c in enumerate(parameters, 1)]
    ratios = [b / a for a, b in zip(distances, distances[1:])]

    if len(ratios) >= 3:
        estimate = aitken_limit(ratios)
        error_bar = abs(estimate - ratios[-1])
    elif len(ratios) == 2:
        estimate = ratios[-1]
        error_bar = abs(ratios[-1] - ratios[-2])
    else:
        estimate = ratios[-1]
        error_bar = abs(ratios[-1])

    logger.info("cascade oracle with %d levels: lambda = %.6f +- %.1e", n_max, estimate, error_bar)
    return types.CascadeEstimate(
        lambda_=estimate,
        error_bar=error_bar,
        ratios=ratios,
        parameters=parameters,
        levels=n_max,
    )


def _fraction_chunk(
    f: UnimodalQuadratic,
    ds: DomainSystem,
    k: int,
    count: int,
    budget: int,
    seed: int,
    chunk: int,
) -> Tuple[int, int, int]:
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, chunk], dtype=np.uint64)))
    radius = ds.v_k(k).radius
    r = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    z = r * np.exp(1j * theta)

    z = z[ds.a_k(k).classify(z) == INSIDE]
    if z.size == 0:
        return 0, 0, 0
    times, escaped = first_entry_times(f, z, radius, budget)
    hits = int(np.count_nonzero(times > 0))
    undetermined = int(np.count_nonzero((times < 0) & ~escaped))
    return int(z.size), hits, undetermined


def escape_fraction_mc(
    f: UnimodalQuadratic,
    ds: DomainSystem,
    k: int,
    samples: int = 100_000,
    budget: int = 200,
    seed: int = 0,
    engine: Optional[Engine] = None,
) -> types.EscapeFraction:
    """
    Fraction of uniform samples of `A^k` whose forward orbit enters `V^k`
    within `budget` steps: a lower estimate of `area(X_k ∩ A^k) / area(A^k)`.

    Each chunk of samples draws from its own Philox stream keyed by
    `(seed, chunk)`, so results do not depend on the worker count.
    """

    if k < 1:
        raise types.ConfigError(f"k must be at least 1, got {k}", types.ErrorCode.range)
    if samples < 1 or budget < 1:
        raise types.ConfigError("samples and budget must be positive", types.ErrorCode.range)

    sizes = [min(SAMPLE_CHUNK, samples - start) for start in range(0, samples, SAMPLE_CHUNK)]
    engine = engine or Engine.get_default()
    parts = engine.map(
        lambda item: _fraction_chunk(f, ds, k, item[1], budget, seed, item[0]),
        list(enumerate(sizes)),
    )
    accepted = sum(p[0] for p in parts)
    hits = sum(p[1] for p in parts)
    undetermined = sum(p[2] for p in parts)

    if accepted:
        fraction = hits / accepted
        ci = stats.binomtest(hits, accepted).proportion_ci(confidence_level=0.95, method="wilson")
        ci_low, ci_high = float(ci.low), float(ci.high)
    else:
        logger.warning("no sample of %d landed in A^%d", samples, k)
        fraction, ci_low, ci_high = 0.0, 0.0, 1.0

    logger.info("escape fraction at k=%d: %.4f of %d samples (%d undetermined)", k, fraction, accepted, undetermined)
    return types.EscapeFraction(
        k=k,
        drawn=samples,
        accepted=accepted,
        hits=hits,
        undetermined=undetermined,
        fraction=fraction,
        ci_low=ci_low,
        ci_high=ci_high,
        budget=budget,
        seed=seed,
    )


def cross_check(fraction: types.EscapeFraction, bound: float) -> bool:
    """
    `fraction <= bound` up to the confidence half-width and the share of
    samples the budget left undetermined.
    """

    if fraction.accepted == 0:
        return True
    allowance = (fraction.ci_high - fraction.fraction) + fraction.undetermined / fraction.accepted
    return fraction.fraction <= bound + allowance
