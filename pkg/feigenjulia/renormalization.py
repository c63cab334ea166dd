"""
Renormalization near Chebyshev: superattracting parameters, scaling factors,
the period-p fixed point of renormalization and nested domain systems.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import numpy as np
from scipy import optimize

from . import types
from .dynamics import (
    UnimodalQuadratic,
    critical_orbit,
    first_entry_times,
    fixed_points,
    itinerary,
    iterate_real,
    iterate_with_derivative,
)
from .engine import Engine
from .regions import (
    INSIDE,
    OUTSIDE,
    Difference,
    Disk,
    Region,
    ScaledCopy,
    TrackedPullback,
    Union as RegionUnion,
    sample_grid,
)

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 1e-12
SCAN_POINTS = 20001
MAX_CASCADE_PERIOD = 256

FD_STEP = 1e-7
MAX_NEWTON_STEPS = 100
POLISH_STEPS = 10
MIN_DEGREE = 8
EXTENDED_PRECISION_BITS = 113

_ACCEPT_TOLERANCE = {types.Precision.double: 1e-8, types.Precision.extended: 1e-20}
_STOP_TOLERANCE = {types.Precision.double: 1e-13, types.Precision.extended: 1e-28}


def _critical_value_scan(spec: types.CombinatoricsSpec, grid: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    x = np.zeros_like(grid)
    valid = np.ones(grid.shape, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for sign in spec.signs:
            x = grid - x * x
            valid &= np.sign(x) == sign
        x = grid - x * x
    return x, valid


def _critical_value(c: float, period: int) -> Tuple[float, float]:
    "`f_c^p(0)` and its derivative with respect to `c`"
    x, dx = 0.0, 0.0
    for _ in range(period):
        dx = 1.0 - 2.0 * x * dx
        x = c - x * x
    return x, dx


def find_superattracting_parameter(
    spec: types.CombinatoricsSpec,
    tol: float = DEFAULT_TOLERANCE,
    interval: Optional[Tuple[float, float]] = None,
    scan_points: int = SCAN_POINTS,
) -> float:
    """
    Finds the largest `c` in the interval where the critical point is periodic
    with the given itinerary.

    The scan combines a uniform grid with geometric grids towards both ends
    of the interval, since `|c_p - 2|` shrinks like `4^-p`.

    Raises:
        RenormalizationError: with code `no_bracket` when no sign change of
            `f^p(0)` with a preserved itinerary is found.
    """

    lo, hi = interval if interval is not None else (0.0, 2.0)
    if not lo < hi:
        raise types.ConfigError(f"empty parameter interval ({lo}, {hi})", types.ErrorCode.range)

    width = hi - lo
    offsets = width * np.geomspace(1.0, 1e-15, scan_points)
    grid = np.unique(np.concatenate([np.linspace(lo, hi, scan_points), hi - offsets, lo + offsets]))
    grid = grid[(grid > lo) & (grid < hi)]

    values, valid = _critical_value_scan(spec, grid)
    sign = np.sign(values)
    bracket = valid[:-1] & valid[1:] & (sign[:-1] * sign[1:] < 0)
    candidates = np.flatnonzero(bracket)
    exact = np.flatnonzero(valid & (values == 0))

    if candidates.size == 0 and exact.size == 0:
        raise types.RenormalizationError(
            f"no sign change of f^{spec.period}(0) with itinerary {spec.word} in ({lo}, {hi})",
            types.ErrorCode.no_bracket,
        )

    if exact.size and (candidates.size == 0 or grid[exact[-1]] > grid[candidates[-1]]):
        root = float(grid[exact[-1]])
    else:
        k = candidates[-1]
        root = optimize.bisect(
            lambda c: _critical_value(c, spec.period)[0],
            float(grid[k]),
            float(grid[k + 1]),
            xtol=tol,
            maxiter=500,
        )

    f = UnimodalQuadratic(root)
    if itinerary(f, spec.period) != spec.signs:
        raise types.RenormalizationError(
            f"itinerary {spec.word} not reproduced at c = {root!r}",
            types.ErrorCode.no_bracket,
        )

    residual, dc = _critical_value(root, spec.period)
    floor = abs(dc) * float(np.spacing(root)) * 4.0
    if abs(residual) > max(tol, floor):
        logger.warning(
            "period %d: residual %.3e above tolerance %.1e and floor %.1e",
            spec.period,
            abs(residual),
            tol,
            floor,
        )
    elif abs(residual) > tol:
        logger.info("period %d: residual %.3e at the floating-point floor", spec.period, abs(residual))

    logger.info("superattracting parameter for %s: c = %.16g", spec.word, root)
    return root


def parameter_report(spec: types.CombinatoricsSpec, c: float) -> types.ParameterReport:
    return types.ParameterReport(
        period=spec.period,
        word=spec.word,
        c=c,
        residual=abs(_critical_value(c, spec.period)[0]),
    )


def aitken_limit(sequence: Sequence[float]) -> float:
    x0, x1, x2 = sequence[-3:]
    denominator = x2 - 2.0 * x1 + x0
    if denominator == 0:
        return x2
    return x2 - (x2 - x1) ** 2 / denominator


def accumulation_parameter(
    p: int,
    max_period: int = MAX_CASCADE_PERIOD,
) -> Tuple[float, List[float]]:
    """
    Locates the superattracting parameters of the p-tupling cascade
    (periods `p, p^2, ...` up to `max_period`) and extrapolates their limit.

    Returns:
        `(limit, parameters)`
    """

    base = types.CombinatoricsSpec.closest_to_chebyshev(p)
    spec = base
    parameters: List[float] = []
    interval: Optional[Tuple[float, float]] = None

    while spec.period <= max_period:
        c = find_superattracting_parameter(spec, interval=interval)
        parameters.append(c)
        gap = parameters[-1] - parameters[-2] if len(parameters) > 1 else 2.0 - c
        interval = (c, min(2.0, c + gap))
        spec = spec.tuned(base)

    limit = aitken_limit(parameters) if len(parameters) >= 3 else parameters[-1]
    logger.info("period %d cascade: %d levels, limit %.15g", p, len(parameters), limit)
    return limit, parameters


def _renormalization_fixed_point(f: UnimodalQuadratic, p: int, scan_points: int = 4000) -> float:
    """
    Smallest positive fixed point `x*` of `f^p` with `Df^p(x*) > 1`.
    """

    if p < 2:
        raise types.RenormalizationError(
            f"scaling factor needs period at least 2, got {p}",
            types.ErrorCode.no_fixed_point,
        )

    critical = iterate_with_derivative(f, f.c, p - 1)
    scale = max(abs(critical.derivative), 1.0)
    (_, _), (beta, _) = fixed_points(f)
    xs = np.geomspace(1e-3 / scale, abs(beta), scan_points)
    values, _ = iterate_real(f, xs, p)
    with np.errstate(invalid="ignore"):
        h = values - xs
        upward = np.flatnonzero((h[:-1] < 0) & (h[1:] >= 0))

    def g(x: float) -> float:
        return iterate_with_derivative(f, x, p).value.real - x

    for k in upward:
        x_star = optimize.brentq(g, float(xs[k]), float(xs[k + 1]), xtol=1e-15)
        if iterate_with_derivative(f, x_star, p).derivative.real > 1.0:
            return x_star

    raise types.RenormalizationError(
        f"no expanding positive fixed point of f^{p} for c = {f.c}",
        types.ErrorCode.no_fixed_point,
    )


def scaling_factor_estimate(f: UnimodalQuadratic, p: int) -> float:
    """
    Estimates the renormalization scaling factor `lambda = -x*/2`, where `x*`
    is the expanding fixed point of `f^p` bounding the small Julia set.

    Scaling law near Chebyshev: `|lambda_p| * 4^p` stays of order one.
    """

    x_star = _renormalization_fixed_point(f, p)
    lam = -x_star / 2.0
    logger.debug("period %d scaling factor %.6e at c = %.12g", p, lam, f.c)
    return lam


def scaling_estimators(
    f: UnimodalQuadratic,
    p: int,
    solver: Optional[float] = None,
) -> types.ScalingEstimates:
    x_star = _renormalization_fixed_point(f, p)
    beta_rescale = -x_star / 2.0
    julia_ratio = -2.0 * x_star / (1.0 + math.sqrt(1.0 + 4.0 * f.c))
    values = [beta_rescale, julia_ratio] + ([solver] if solver is not None else [])
    return types.ScalingEstimates(
        period=p,
        parameter=f.c,
        beta_rescale=beta_rescale,
        julia_ratio=julia_ratio,
        solver=solver,
        spread=max(values) - min(values),
    )


class _Collocation:
    """
    Residual of `g^p(lambda x) = lambda g(x)` at the positive Chebyshev nodes
    plus the normalization `g(-2) = -2`.

    Unknowns are `b_0..b_N, lambda` with `g(x) = sum b_i (x/2)^(2i)`.
    """

    def __init__(self, period: int, degree: int, precision: types.Precision) -> None:
        self.period = period
        self.degree = degree
        self.extended = precision == types.Precision.extended
        j = np.arange(1, degree + 2)
        if self.extended:
            self.nodes = np.array(
                [2 * mpmath.cos(mpmath.pi * (2 * int(k) - 1) / (4 * (degree + 1))) for k in j],
                dtype=object,
            )
        else:
            self.nodes = 2.0 * np.cos(np.pi * (2 * j - 1) / (4 * (degree + 1)))

    def g(self, b, y):
        t = (y / 2) ** 2
        acc = np.full(np.shape(y), b[-1], dtype=object if self.extended else float)
        for coefficient in b[-2::-1]:
            acc = acc * t + coefficient
        return acc

    def collocation(self, u) -> np.ndarray:
        b, lam = u[:-1], u[-1]
        y = lam * self.nodes
        for _ in range(self.period):
            y = self.g(b, y)
        return y - lam * self.g(b, self.nodes)

    def residual(self, u) -> np.ndarray:
        normalization = sum(u[:-1]) + 2
        if self.extended:
            return np.concatenate([self.collocation(u), np.array([normalization], dtype=object)])
        return np.append(self.collocation(u), normalization)

    def norm(self, values) -> float:
        if self.extended:
            return float(max(abs(v) for v in values))
        with np.errstate(invalid="ignore"):
            m = float(np.max(np.abs(values)))
        return m if math.isfinite(m) else math.inf

    def solve(self, jacobian, rhs):
        if self.extended:
            step = mpmath.lu_solve(mpmath.matrix(jacobian.tolist()), mpmath.matrix(list(rhs)))
            return np.array([step[i] for i in range(len(rhs))], dtype=object)
        return np.linalg.solve(jacobian, rhs)

    def jacobian(self, u, base):
        n = len(u)
        h = mpmath.mpf(FD_STEP) if self.extended else FD_STEP
        columns = []
        for i in range(n):
            shifted = u.copy()
            shifted[i] = shifted[i] + h
            columns.append((self.residual(shifted) - base) / h)
        return np.stack(columns, axis=1)


def _seed_vector(
    p: int,
    degree: int,
    seed: Union[None, float, types.RenormFixedPointApprox],
) -> Tuple[np.ndarray, Optional[float]]:
    b = np.zeros(degree + 2)
    if isinstance(seed, types.RenormFixedPointApprox):
        coefficients = seed.coefficients[: degree + 1]
        for i, a in enumerate(coefficients):
            b[i] = a * 4.0**i
        b[-1] = seed.lambda_
        return b, seed.seed_parameter

    if seed is None:
        try:
            c = accumulation_parameter(p)[0]
        except types.RenormalizationError as exc:
            logger.warning("cascade extrapolation failed (%s), seeding from c_%d", exc, p)
            c = find_superattracting_parameter(types.CombinatoricsSpec.closest_to_chebyshev(p))
    else:
        c = float(seed)

    f = UnimodalQuadratic(c)
    (_, _), (beta, _) = fixed_points(f)
    s = 2.0 / abs(beta)
    b[0] = s * c
    b[1] = -4.0 / s
    b[-1] = scaling_factor_estimate(f, p)
    return b, c


def _newton(
    problem: _Collocation, u, stop: float, max_iter: int
) -> Tuple[np.ndarray, np.ndarray, float, List[float], int]:
    """
    Damped Newton on the collocation residual, halving the step until the
    residual norm decreases; returns on `stop` or when no step helps.
    """

    residual = problem.residual(u)
    norm = problem.norm(residual)
    history = [norm]
    iterations = 0

    for iteration in range(max_iter):
        if norm < stop:
            break
        jacobian = problem.jacobian(u, residual)
        try:
            step = problem.solve(jacobian, -residual)
        except (np.linalg.LinAlgError, ZeroDivisionError) as exc:
            raise types.RenormalizationError(
                f"singular Jacobian at Newton step {iteration}: {exc}",
                types.ErrorCode.singular_jacobian,
            ) from exc
        if not problem.extended and not np.all(np.isfinite(step)):
            raise types.RenormalizationError(
                f"singular Jacobian at Newton step {iteration}",
                types.ErrorCode.singular_jacobian,
            )

        t = 1.0
        while t > 2.0**-30:
            trial = u + step * t
            trial_residual = problem.residual(trial)
            trial_norm = problem.norm(trial_residual)
            if trial_norm < norm:
                break
            t /= 2.0
        else:
            logger.debug("Newton stalled at residual %.3e after %d steps", norm, iteration)
            break

        u, residual, norm = trial, trial_residual, trial_norm
        history.append(norm)
        iterations += 1
        logger.debug("Newton step %d: damping %.3g, residual %.3e", iterations, t, norm)

    return u, residual, norm, history, iterations


def cvitanovic_solve(
    p: int,
    degree: int = 20,
    seed: Union[None, float, types.RenormFixedPointApprox] = None,
    precision: types.Precision = types.Precision.double,
    max_iter: int = MAX_NEWTON_STEPS,
) -> types.RenormFixedPointApprox:
    """
    Solves the fixed-point equation of period-p renormalization for an even
    polynomial of the given degree (in `x^2`) by collocation Newton.

    In double precision the finite-difference Jacobian limits Newton to a
    residual near `1e-8`; an iterate left above the stopping tolerance is
    polished by a few steps in extended precision before it is accepted.

    Args:
        p: The renormalization period.
        degree: Number `N` of even monomials beyond the constant, at least 8.
        seed: An approximation, a parameter `c` whose rescaled quadratic is
            used, or `None` for the extrapolated cascade limit.
        precision: `double`, or `extended` for 113-bit mpmath arithmetic.

    Raises:
        NonConvergenceError: with the residual history when Newton stalls above tolerance.
        RenormalizationError: with code `singular_jacobian`.
    """

    if p < 2:
        raise types.ConfigError(f"period must be at least 2, got {p}", types.ErrorCode.range)
    if degree < MIN_DEGREE:
        raise types.ConfigError(f"degree must be at least {MIN_DEGREE}, got {degree}", types.ErrorCode.range)

    precision = types.Precision(precision)
    start, seed_parameter = _seed_vector(p, degree, seed)

    with mpmath.workprec(EXTENDED_PRECISION_BITS):
        problem = _Collocation(p, degree, precision)
        u = np.array([mpmath.mpf(float(v)) for v in start], dtype=object) if problem.extended else start
        u, _, norm, history, iterations = _newton(problem, u, _STOP_TOLERANCE[precision], max_iter)

        if not problem.extended and norm >= _STOP_TOLERANCE[precision]:
            polish = _Collocation(p, degree, types.Precision.extended)
            lifted = np.array([mpmath.mpf(float(v)) for v in u], dtype=object)
            lifted, _, polished, steps, extra = _newton(polish, lifted, _STOP_TOLERANCE[precision], POLISH_STEPS)
            rounded = np.array([float(v) for v in lifted])
            rounded_norm = max(polished, problem.norm(problem.residual(rounded)))
            if rounded_norm < norm:
                u, norm = rounded, rounded_norm
                history.extend(steps[1:])
                iterations += extra
                logger.debug("extended polish: residual %.3e after %d steps", norm, extra)

        if norm >= _ACCEPT_TOLERANCE[precision]:
            raise types.NonConvergenceError(
                f"period {p} degree {degree}: residual {norm:.3e} after {iterations} Newton steps",
                history,
            )

        collocation = problem.norm(problem.collocation(u))
        coefficients = [float(u[i]) / 4.0**i for i in range(degree + 1)]
        lam = float(u[-1])

    logger.info("period %d fixed point: lambda = %.12g, residual %.3e", p, lam, collocation)
    return types.RenormFixedPointApprox(
        period=p,
        degree=degree,
        lambda_=lam,
        coefficients=coefficients,
        residual=collocation,
        iterations=iterations,
        residual_history=history,
        precision=precision,
        seed_parameter=seed_parameter,
    )


def evaluate_fixed_point(approx: types.RenormFixedPointApprox, x) -> np.ndarray:
    "Evaluates the even polynomial `g` of an approximation (Horner in `x^2`)"
    t = np.asarray(x, dtype=float) ** 2
    acc = np.full(t.shape, approx.coefficients[-1])
    for coefficient in approx.coefficients[-2::-1]:
        acc = acc * t + coefficient
    return acc


class DomainSystem:
    """
    Nested domains `U' ⊂ V' ⊂ U ⊂ V` of period-p renormalization:
    `V' = D(0, rho)`, `U'` the pullback of `V'` around 0, `U = U'/lambda`
    and `V = D(0, rho/|lambda|)`.
    """

    def __init__(
        self,
        f: UnimodalQuadratic,
        period: int,
        rho: float,
        lambda_: float,
        tracking: float = 0.5,
    ) -> None:
        self.f = f
        self.period = period
        self.rho = rho
        self.lambda_ = lambda_
        self.tracking = tracking

        self.v_prime = Disk(0.0, rho).named("V'")
        self.u_prime = TrackedPullback(f, period, self.v_prime, tracking).named("U'")
        self.u = ScaledCopy(1.0 / lambda_, self.u_prime).named("U")
        self.v = Disk(0.0, rho / abs(lambda_)).named("V")
        self.a = Difference(self.v, self.u).named("A")
        self.a_prime = Difference(self.v_prime, self.u_prime).named("A'")
        self.postcritical = critical_orbit(f, period)

        self.strict = True
        self.nesting_ok = False
        self.first_return = False
        self.postcritical_clearance = False
        self.nesting_margin = 0.0
        self.postcritical_margin = 0.0
        self.min_return_time: Optional[int] = None

    def u_k(self, k: int) -> Region:
        if k == 0:
            return self.u
        return ScaledCopy(self.lambda_**k, self.u).named(f"U^{k}")

    def v_k(self, k: int) -> Region:
        if k == 0:
            return self.v
        return Disk(0.0, abs(self.lambda_) ** (k - 1) * self.rho).named(f"V^{k}")

    def a_k(self, k: int) -> Region:
        if k == 0:
            return self.a
        return Difference(self.v_k(k), self.u_k(k)).named(f"A^{k}")

    def b_k(self, k: int) -> Region:
        "`U \\ (A^k ∪ V^(k+1))`"
        return Difference(self.u, RegionUnion(self.a_k(k), self.v_k(k + 1))).named(f"B^{k}")

    @property
    def u_prime_radii(self) -> Tuple[float, float]:
        radii = self.u_prime.ray_radii()
        return float(radii.min()), float(radii.max())

    @property
    def diam_u_prime(self) -> float:
        return 2.0 * self.u_prime_radii[1]

    def summary(self) -> types.DomainSummary:
        return types.DomainSummary(
            period=self.period,
            rho=self.rho,
            parameter=self.f.c,
            lambda_=self.lambda_,
            u_prime_radii=self.u_prime_radii,
            diam_u_prime=self.diam_u_prime,
            u_core_radius=self.u.core_radius(),
            nesting_margin=self.nesting_margin,
            nesting_ok=self.nesting_ok,
            first_return=self.first_return,
            postcritical_clearance=self.postcritical_clearance,
            postcritical_margin=self.postcritical_margin,
            min_return_time=self.min_return_time,
            tracking=self.tracking,
            strict=self.strict,
        )

    def __repr__(self) -> str:
        return f"DomainSystem(c={self.f.c!r}, period={self.period}, rho={self.rho})"


def sampled_return_times(
    ds: DomainSystem,
    grid: types.GridSpec,
    budget: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    First entry times into `V'` of the points of a full-circle grid of `A'`
    (the real axis included).

    Returns:
        `(points, times)` with `-1` for points that did not enter within `budget`.
    """

    full = types.model_copy(grid, {"half_plane": False})
    sample = sample_grid(ds.a_prime, full)
    lo, hi = ds.a_prime.radial_bounds()
    real_axis = np.geomspace(max(lo, hi * 1e-4), hi, grid.n_radii)
    real_axis = np.concatenate([real_axis, -real_axis]).astype(complex)
    real_axis = real_axis[ds.a_prime.classify(real_axis) != OUTSIDE]
    points = np.concatenate([sample.points, real_axis])
    times, _ = first_entry_times(ds.f, points, ds.rho, budget)
    return points, times


def _violation(code: types.ErrorCode, message: str, strict: bool) -> None:
    if strict:
        raise types.RenormalizationError(message, code)
    logger.warning(message)


def build_domain_system(
    f: UnimodalQuadratic,
    p: int,
    rho: float,
    strict: bool = True,
    tracking: float = 0.5,
    return_budget: int = 2000,
    return_grid: Optional[types.GridSpec] = None,
) -> DomainSystem:
    """
    Builds and verifies the nested domain system of period-p renormalization.

    Raises:
        ConfigError: with code `range` for `p < 3` or `rho` outside `(0, 1/10]`.
        RenormalizationError: in strict mode, with codes `nesting_violation`,
            `first_return_violation` or `postcritical_collision`, naming the sample.
    """

    if p < 3:
        raise types.ConfigError(f"domain systems need period at least 3, got {p}", types.ErrorCode.range)
    if not 0.0 < rho <= 0.1:
        raise types.ConfigError(f"rho must lie in (0, 1/10], got {rho}", types.ErrorCode.range)

    lam = scaling_factor_estimate(f, p)
    ds = DomainSystem(f, p, rho, lam, tracking)
    ds.strict = strict

    try:
        radii = ds.u_prime.ray_radii()
    except types.RegionError as exc:
        raise types.RenormalizationError(str(exc), types.ErrorCode.nesting_violation) from exc

    r_min, r_max = float(radii.min()), float(radii.max())
    theta = ds.u_prime.ray_angles()
    nesting_ok = True

    if r_max >= rho * (1.0 - 1e-9):
        nesting_ok = False
        k = int(np.argmax(radii))
        z = r_max * np.exp(1j * theta[k])
        _violation(
            types.ErrorCode.nesting_violation,
            f"U' is not inside V': boundary point {z:.6g} has |z| = {r_max:.3e} >= rho = {rho}",
            strict,
        )

    circle = rho * np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 64, endpoint=False))
    outside_u = np.flatnonzero(ds.u.classify(circle) != INSIDE)
    if outside_u.size:
        nesting_ok = False
        _violation(
            types.ErrorCode.nesting_violation,
            f"V' is not inside U: point {circle[outside_u[0]]:.6g} of the boundary of V' is not in U",
            strict,
        )
    ds.nesting_ok = nesting_ok
    ds.nesting_margin = ds.u.core_radius() - rho

    fractions = np.array([0.1, 0.5, 0.9])
    samples = (radii[:, None] * fractions[None, :] * np.exp(1j * theta)[:, None]).ravel()
    times, _ = first_entry_times(f, samples, rho, p)
    early = np.flatnonzero(times != p)
    ds.first_return = early.size == 0
    if early.size:
        k = early[0]
        _violation(
            types.ErrorCode.first_return_violation,
            f"point {samples[k]:.6g} of U' first enters V' at step {times[k]} instead of {p}",
            strict,
        )

    orbit = critical_orbit(f, 10 * p)
    collisions = np.flatnonzero(ds.a_prime.classify(orbit) != OUTSIDE)
    modulus = np.abs(orbit)
    clearance = np.where(modulus >= rho, modulus - rho, np.maximum(r_min - modulus, 0.0))
    ds.postcritical_margin = float(clearance.min())
    ds.postcritical_clearance = collisions.size == 0
    if collisions.size:
        k = collisions[0]
        _violation(
            types.ErrorCode.postcritical_collision,
            f"critical orbit point f^{k + 1}(0) = {orbit[k]:.6g} meets the closure of A'",
            strict,
        )

    grid = return_grid or types.GridSpec(n_radii=12, n_angles=48)
    _, returns = sampled_return_times(ds, grid, return_budget)
    returned = returns[returns > 0]
    ds.min_return_time = int(returned.min()) if returned.size else None

    logger.info(
        "domain system p=%d rho=%g: lambda=%.4e, U' radii [%.3e, %.3e], m=%s",
        p,
        rho,
        lam,
        r_min,
        r_max,
        ds.min_return_time,
    )
    return ds


def _s1_length(f: UnimodalQuadratic, p: int, alpha: float) -> float:
    """
    Length of the component of `f^-(p-1)(T')`, `T' = (-alpha, alpha)`, containing `f(0)`.
    """

    def h(x: float) -> float:
        return abs(iterate_with_derivative(f, x, p - 1).value.real) - alpha

    if h(f.c) >= 0:
        raise types.RenormalizationError(
            f"f^{p}(0) is not inside T' for c = {f.c}",
            types.ErrorCode.no_bracket,
        )

    ends = []
    for direction in (-1.0, 1.0):
        step = 1e-15
        inner = f.c
        while True:
            outer = f.c + direction * step
            if h(outer) >= 0:
                break
            inner = outer
            step *= 2.0
            if step > 4.0:
                raise types.RenormalizationError(
                    f"pullback of T' around f(0) is unbounded for c = {f.c}",
                    types.ErrorCode.no_bracket,
                )
        ends.append(optimize.brentq(h, inner, outer, xtol=1e-16))
    return ends[1] - ends[0]


def _lemma_row(p: int, rho: float, tracking: float) -> types.LemmaClassRow:
    c = find_superattracting_parameter(types.CombinatoricsSpec.closest_to_chebyshev(p))
    f = UnimodalQuadratic(c)
    (alpha, _), (_, eta) = fixed_points(f)
    ds = build_domain_system(f, p, rho, strict=True, tracking=tracking)
    if ds.min_return_time is None:
        raise types.NoReturnError(f"no sampled point of A' returns to V' for p = {p}", 2000)
    diam = ds.diam_u_prime
    return types.LemmaClassRow(
        p=p,
        c_p=c,
        f0=f(0.0),
        alpha_p=alpha,
        eta_p=eta,
        abs_lambda=abs(ds.lambda_),
        diam_u_prime=diam,
        s1_length=_s1_length(f, p, alpha),
        modulus_proxy=math.log(rho / (abs(ds.lambda_) * diam)),
        min_return_time=ds.min_return_time,
    )


def lemma_class_report(
    p_range: Tuple[int, int] = (5, 11),
    rho: float = 0.05,
    engine: Optional[Engine] = None,
    tracking: float = 0.5,
) -> List[types.LemmaClassRow]:
    """
    Tabulates the geometry of the closest-to-Chebyshev renormalizations for
    each period in the inclusive range, one row per period.
    """

    lo, hi = p_range
    if not 3 <= lo <= hi <= 16:
        raise types.ConfigError(f"period range must lie within [3, 16], got {p_range}", types.ErrorCode.range)

    engine = engine or Engine.get_default()
    rows = engine.map(lambda p: _lemma_row(p, rho, tracking), range(lo, hi + 1))
    logger.info("lemma class report for periods %d..%d done", lo, hi)
    return rows
