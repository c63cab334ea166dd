"""
Certificates built on the truncated series: the quadratic recursion bounding
`delta_cr <= delta` and the u/v induction behind the area-zero criterion.
"""

import concurrent.futures
import logging
import math
import os
import threading
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple

from . import types
from .__version__ import __version__
from .dynamics import UnimodalQuadratic
from .engine import Engine
from .regions import Difference
from .renormalization import DomainSystem, build_domain_system, find_superattracting_parameter
from .series import (
    family_sup,
    measure_expansion_profile,
    parse_family,
    rescaling_residual,
    tail_ratio,
)

logger = logging.getLogger(__name__)

DIRECT_FAMILIES: Dict[str, str] = {
    "a1": "A'<-[U\\V']-U\\V'",
    "a2": "A<-[U\\V']-U\\V'",
    "a3": "U'<-[U\\V']-U\\V'",
    "b1": "A'<-[U\\V']-+A'",
    "b2": "A<-[U\\V']-A'",
    "b3": "U'<-[U\\V']-A'",
}

DOMINATING_FAMILIES: Dict[str, str] = {
    "return": "V'<-[U\\V']-U\\V'",
    "outer": "A<-[U\\V']-U\\U'",
    "annulus": "V'<-[U\\V']-+A'",
}

_DOMINATED_BY = {
    "a1": "return",
    "a3": "return",
    "a2": "outer",
    "b2": "outer",
    "b1": "annulus",
    "b3": "annulus",
}

AREA_FAMILIES: Dict[str, str] = {
    "q1": "V'<-[U\\V']-+A'",
    "q2": "A<-[U\\V']-A'",
    "q3": "V'<-[U\\V']-U\\V'",
    "q4": "A<-[U\\V']-U\\V'",
}

FIXED_V_BOUND = 0.01
FIXED_N_BOUND = 0.01
FIXED_U_CEILING = 0.1
FIXED_V_CEILING = 0.25
CAP_WINDOW = 5
MONOTONE_CHECKS = 2


def solve_quadratic_fixed_point(
    alpha: float,
    beta: float,
    gamma: float,
    trace_steps: int = 8,
) -> Optional[types.FixedPointSolution]:
    """
    Smallest positive fixed point of `P(s) = alpha + beta s + gamma s^2`.

    Returns `None` when `beta >= 1` or the discriminant is negative.
    """

    if beta >= 1.0:
        return None
    disc = (1.0 - beta) ** 2 - 4.0 * alpha * gamma
    if disc < 0.0:
        return None

    # rationalized root, stable for gamma -> 0
    s = 2.0 * alpha / ((1.0 - beta) + math.sqrt(disc))
    slope = beta + 2.0 * gamma * s - 1.0
    if slope != 0.0:
        s -= (alpha + beta * s + gamma * s * s - s) / slope

    trace: List[float] = []
    value = 0.0
    for _ in range(trace_steps):
        value = alpha + beta * value + gamma * value * value
        trace.append(value)

    residual = abs(alpha + beta * s + gamma * s * s - s)
    return types.FixedPointSolution(s=s, trace=trace, residual=residual)


def sufficient_shape(recursion: types.QuadraticRecursion) -> bool:
    "`P` maps `[0, 2 alpha]` into itself"
    return recursion.beta < 1.0 / 3.0 and 2.0 * recursion.beta + 4.0 * recursion.alpha * recursion.gamma <= 1.0


def _recursion_fields(recursion: types.QuadraticRecursion) -> Dict[str, Any]:
    return {
        "recursion": recursion,
        "alpha": recursion.alpha,
        "beta": recursion.beta,
        "gamma": recursion.gamma,
        "inputs": list(recursion.inputs),
    }


def uv_recursion_step(u: float, sups: types.UVSups) -> Tuple[float, float]:
    """
    One step of the area induction: `v = x / (1 - x)` with `x = u (1 + s_n)`,
    then `u' = s_v + u (1 + v) s_a (1 + s_q)`.

    Raises:
        CertificateError: with code `noncontractive` when `x >= 1`.
    """

    x = u * (1.0 + sups.s_n)
    if x >= 1.0:
        raise types.CertificateError(
            f"u = {u:.6g} gives u (1 + s_n) = {x:.6g} >= 1",
            types.ErrorCode.noncontractive,
        )
    v = x / (1.0 - x)
    return sups.s_v + u * (1.0 + v) * sups.s_a * (1.0 + sups.s_q), v


def _induction(sups: types.UVSups, k_max: int) -> Tuple[List[float], List[float], Optional[int]]:
    u_trace = [0.0]
    v_trace: List[float] = []
    for k in range(k_max):
        try:
            u, v = uv_recursion_step(u_trace[-1], sups)
        except types.CertificateError:
            return u_trace, v_trace, k
        u_trace.append(u)
        v_trace.append(v)
    return u_trace, v_trace, None


def fixed_threshold_induction(k_value: float, k_max: int = 100) -> Tuple[List[float], List[float]]:
    """
    Runs the induction on the threshold sups `(1/100, 1/(5K+5), 2K, 1/100)`.

    Raises:
        CertificateError: with code `noncontractive` if a step blows up.
    """

    if k_value < 0:
        raise types.ConfigError(f"K must be non-negative, got {k_value}", types.ErrorCode.range)
    sups = types.UVSups(
        s_v=FIXED_V_BOUND,
        s_a=1.0 / (5.0 * k_value + 5.0),
        s_q=2.0 * k_value,
        s_n=FIXED_N_BOUND,
    )
    u_trace, v_trace, failed_at = _induction(sups, k_max)
    if failed_at is not None:
        raise types.CertificateError(
            f"threshold induction broke at step {failed_at} for K = {k_value}",
            types.ErrorCode.noncontractive,
        )
    return u_trace, v_trace


def threshold_checks(q1: float, q2: float, q3: float, q4: float) -> Dict[str, bool]:
    k_value = q3
    return {
        "q1 < 1/100": q1 < FIXED_V_BOUND,
        "q2 < 1/(5K+5)": q2 < 1.0 / (5.0 * k_value + 5.0),
        "q3 < 2K": q3 < 2.0 * k_value,
        "q4 < 1/100": q4 < FIXED_N_BOUND,
    }


def area_certificate_from_sups(
    p: int,
    rho: float,
    q1: float,
    q2: float,
    q3: float,
    q4: float,
    area_ratio: float,
    k_max: int = 30,
    mode: types.AreaMode = types.AreaMode.direct,
    inputs: Optional[List[types.SeriesBound]] = None,
) -> types.AreaCertificate:
    """
    The area induction on measured sups.

    In `direct` mode the measured sups drive the recursion and every `u_k`
    must stay below `2 max(u_1..u_5)`. In `fixed_threshold` mode the sups are
    compared against the fixed thresholds, which then drive the recursion.
    Either way `u_cap + (diam U' / 2 rho)^2 < 1` is required.
    """

    mode = types.AreaMode(mode)
    checks = threshold_checks(q1, q2, q3, q4)
    error: Optional[str] = None
    failed_at: Optional[int] = None

    if mode == types.AreaMode.fixed_threshold:
        violated = [name for name, ok in checks.items() if not ok and name != "q3 < 2K"]
        if violated:
            u_trace, v_trace = [0.0], []
            error = f"thresholds violated: {', '.join(violated)}"
        else:
            try:
                u_trace, v_trace = fixed_threshold_induction(q3, k_max)
            except types.CertificateError as exc:
                u_trace, v_trace = [0.0], []
                error = str(exc)
        u_cap = FIXED_U_CEILING
        if error is None and (max(u_trace) > FIXED_U_CEILING or max(v_trace, default=0.0) > FIXED_V_CEILING):
            error = f"induction left u <= {FIXED_U_CEILING} or v <= {FIXED_V_CEILING}"
    else:
        sups = types.UVSups(s_v=q1, s_a=q2, s_q=q3, s_n=q4)
        u_trace, v_trace, failed_at = _induction(sups, k_max)
        u_cap = 2.0 * max(u_trace[1 : CAP_WINDOW + 1], default=0.0)
        if failed_at is not None:
            error = f"u (1 + s_n) >= 1 at step {failed_at}"
        else:
            above = [k for k, u in enumerate(u_trace) if u > u_cap]
            if above:
                failed_at = above[0]
                error = f"u_{failed_at} = {u_trace[failed_at]:.6g} exceeds the cap {u_cap:.6g}"

    escape_bound = u_cap + area_ratio
    if error is None and escape_bound >= 1.0:
        error = f"u_cap + area ratio = {escape_bound:.6g} >= 1"

    status = types.CertificateStatus.certified if error is None else types.CertificateStatus.failed
    return types.AreaCertificate(
        period=p,
        rho=rho,
        q1=q1,
        q2=q2,
        q3=q3,
        q4=q4,
        k_value=q3,
        threshold_checks=checks,
        u_trace=u_trace,
        v_trace=v_trace,
        u_cap=u_cap,
        area_ratio=area_ratio,
        escape_area_bound=escape_bound,
        mode=mode,
        status=status,
        failed_at=failed_at,
        error=error,
        inputs=inputs or [],
        version=__version__,
    )


def _sups(
    f: UnimodalQuadratic,
    ds: DomainSystem,
    descriptors: Dict[str, str],
    delta: float,
    budget: types.SeriesBudget,
    profile: Optional[types.ExpansionProfile],
    engine: Engine,
) -> Dict[str, types.SeriesBound]:
    names = list(descriptors)
    bounds = engine.map(
        lambda name: family_sup(
            f,
            ds,
            parse_family(descriptors[name], ds),
            delta,
            grid=budget.grid,
            j=budget.depth,
            prune_threshold=budget.prune_threshold,
            profile=profile,
            node_budget=budget.node_budget,
            engine=engine,
        ),
        names,
    )
    return dict(zip(names, bounds))


def assemble_recursion(
    f: UnimodalQuadratic,
    ds: DomainSystem,
    delta: float,
    budget: types.SeriesBudget,
    profile: types.ExpansionProfile,
    mode: types.RecursionMode = types.RecursionMode.direct,
    engine: Optional[Engine] = None,
) -> types.QuadraticRecursion:
    """
    Measures the sups feeding the quadratic recursion.

    Raises:
        SeriesError: with code `divergent_tail` when the profile cannot bound the tails.
    """

    mode = types.RecursionMode(mode)
    engine = engine or Engine.get_default()

    if mode == types.RecursionMode.dominating:
        bounds = _sups(f, ds, DOMINATING_FAMILIES, delta, budget, profile, engine)
        values = {name: bounds[_DOMINATED_BY[name]].upper_bound for name in DIRECT_FAMILIES}
        inputs = [bounds[name] for name in DOMINATING_FAMILIES]
    else:
        bounds = _sups(f, ds, DIRECT_FAMILIES, delta, budget, profile, engine)
        values = {name: bound.upper_bound for name, bound in bounds.items()}
        inputs = [bounds[name] for name in DIRECT_FAMILIES]

    recursion = types.QuadraticRecursion.from_sups(delta, mode=mode, inputs=inputs, **values)
    logger.info(
        "recursion at delta=%g (%s): alpha=%.6g beta=%.6g gamma=%.6g",
        delta,
        mode.value,
        recursion.alpha,
        recursion.beta,
        recursion.gamma,
    )
    return recursion


class _Context(NamedTuple):
    f: UnimodalQuadratic
    ds: DomainSystem
    profile: types.ExpansionProfile


class _CertifierImpl:
    """
    Implementation of the Certifier class.
    """

    def __init__(
        self,
        *,
        engine: Engine,
        budget: types.SeriesBudget,
        config: Optional[types.RunConfig],
    ) -> None:
        self._engine = engine
        self.budget = budget
        self.config = config
        self._contexts: Dict[Tuple[int, float, Optional[float]], _Context] = {}
        self._lock = threading.Lock()

    def _config_snapshot(self) -> Optional[Dict[str, object]]:
        return types.model_dump(self.config) if self.config is not None else None

    def context(self, p: int, rho: float, f: Optional[UnimodalQuadratic] = None) -> _Context:
        key = (p, rho, f.c if f is not None else None)
        with self._lock:
            cached = self._contexts.get(key)
        if cached is not None:
            return cached

        if f is None:
            c = find_superattracting_parameter(types.CombinatoricsSpec.closest_to_chebyshev(p))
            f = UnimodalQuadratic(c)
        ds = build_domain_system(
            f,
            p,
            rho,
            tracking=self.budget.tracking,
            return_budget=self.budget.return_budget,
        )
        constraint = Difference(ds.u, ds.v_prime).named("U\\V'")
        profile = measure_expansion_profile(
            f,
            ds,
            constraint,
            [ds.a_prime, ds.a, ds.u_prime],
            depth=self.budget.profile_depth,
            samples=self.budget.profile_samples,
            source=Difference(ds.u, ds.u_prime).named("U\\U'"),
        )
        context = _Context(f, ds, profile)
        with self._lock:
            self._contexts[key] = context
        return context

    def certify_delta(
        self,
        p: int,
        rho: float,
        delta: float,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaCertificate:
        if not 0.0 < delta <= 2.0:
            raise types.ConfigError(f"delta must lie in (0, 2], got {delta}", types.ErrorCode.range)

        base = dict(
            period=p,
            rho=rho,
            delta=delta,
            config=self._config_snapshot(),
            version=__version__,
        )
        try:
            context = self.context(p, rho, f)
        except types.FeigenjuliaError as exc:
            logger.warning("certificate at delta=%g failed: %s", delta, exc)
            return types.DeltaCertificate(status=types.CertificateStatus.failed, error=str(exc), **base)

        r = tail_ratio(context.profile, delta)
        if delta <= 1.0 or r >= 1.0:
            return types.DeltaCertificate(
                status=types.CertificateStatus.input_divergent,
                profile=context.profile,
                error=f"tail ratio {r:.4f} >= 1" if r >= 1.0 else "series diverges for delta <= 1",
                **base,
            )

        try:
            recursion = assemble_recursion(
                context.f, context.ds, delta, self.budget, context.profile, mode, self._engine
            )
        except types.SeriesError as exc:
            status = (
                types.CertificateStatus.input_divergent
                if exc.code == types.ErrorCode.divergent_tail
                else types.CertificateStatus.failed
            )
            return types.DeltaCertificate(status=status, profile=context.profile, error=str(exc), **base)
        except types.FeigenjuliaError as exc:
            return types.DeltaCertificate(
                status=types.CertificateStatus.failed,
                profile=context.profile,
                error=str(exc),
                **base,
            )

        shape = sufficient_shape(recursion)
        residual = self._residual(context.ds, delta)
        infinite = [b.family for b in recursion.inputs if not math.isfinite(b.upper_bound)]
        if infinite:
            return types.DeltaCertificate(
                status=types.CertificateStatus.input_divergent,
                **_recursion_fields(recursion),
                residual=residual,
                sufficient_shape=shape,
                profile=context.profile,
                error=f"unbounded sups: {', '.join(infinite)}",
                **base,
            )

        solution = solve_quadratic_fixed_point(recursion.alpha, recursion.beta, recursion.gamma)
        status = (
            types.CertificateStatus.certified
            if solution is not None and solution.s > 0
            else types.CertificateStatus.no_fixed_point
        )
        logger.info("delta=%g for p=%d: %s", delta, p, status.value)
        return types.DeltaCertificate(
            status=status,
            **_recursion_fields(recursion),
            fixed_point=solution,
            residual=residual,
            sufficient_shape=shape,
            profile=context.profile,
            **base,
        )

    def _residual(self, ds: DomainSystem, delta: float) -> Optional[float]:
        try:
            return rescaling_residual(ds, delta=delta, node_budget=self.budget.node_budget).residual
        except types.FeigenjuliaError as exc:
            logger.debug("self-similarity residual unavailable: %s", exc)
            return None

    def bisect_delta(
        self,
        p: int,
        rho: float,
        delta_range: Tuple[float, float],
        tol: float,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaBisection:
        lo, hi = delta_range
        if not 0.0 < lo < hi <= 2.0:
            raise types.ConfigError(f"delta range must satisfy 0 < lo < hi <= 2, got {delta_range}", types.ErrorCode.range)
        if tol <= 0:
            raise types.ConfigError(f"tolerance must be positive, got {tol}", types.ErrorCode.range)

        chain: List[types.DeltaCertificate] = []

        def probe(delta: float) -> types.DeltaCertificate:
            certificate = self.certify_delta(p, rho, delta, f, mode)
            chain.append(certificate)
            return certificate

        best = probe(hi)
        if best.status != types.CertificateStatus.certified:
            raise types.CertificateError(
                f"period {p} is not certified at the upper endpoint delta = {hi}: {best.status.value}",
                types.ErrorCode.uncertifiable_range,
            )

        bottom = probe(lo)
        if bottom.status == types.CertificateStatus.certified:
            best = bottom
        else:
            a, b = lo, hi
            while b - a > tol:
                mid = 0.5 * (a + b)
                certificate = probe(mid)
                if certificate.status == types.CertificateStatus.certified:
                    b, best = mid, certificate
                else:
                    a = mid

        tried = [c.delta for c in chain]
        step = (hi - best.delta) / (MONOTONE_CHECKS + 1)
        for k in range(1, MONOTONE_CHECKS + 1):
            delta = best.delta + k * step
            if any(abs(delta - d) < 1e-12 for d in tried):
                continue
            if probe(delta).status != types.CertificateStatus.certified:
                raise types.CertificateError(
                    f"period {p}: delta = {delta:.6g} fails above the certified delta = {best.delta:.6g}",
                    types.ErrorCode.nonmonotone,
                )

        probes = [
            types.DeltaProbe(
                delta=c.delta,
                status=c.status,
                s=c.fixed_point.s if c.fixed_point is not None else None,
            )
            for c in chain
        ]
        return types.DeltaBisection(
            period=p,
            rho=rho,
            delta_range=(lo, hi),
            tolerance=tol,
            delta_star=best.delta,
            monotone=_monotone(probes),
            certificate=best,
            chain=probes,
        )

    def certify_area(
        self,
        p: int,
        rho: float,
        k_max: int = 30,
        mode: types.AreaMode = types.AreaMode.direct,
        f: Optional[UnimodalQuadratic] = None,
    ) -> types.AreaCertificate:
        try:
            context = self.context(p, rho, f)
            bounds = _sups(context.f, context.ds, AREA_FAMILIES, 2.0, self.budget, context.profile, self._engine)
        except types.FeigenjuliaError as exc:
            logger.warning("area certificate for p=%d failed: %s", p, exc)
            return types.AreaCertificate(
                period=p,
                rho=rho,
                q1=math.nan,
                q2=math.nan,
                q3=math.nan,
                q4=math.nan,
                k_value=math.nan,
                threshold_checks={},
                u_trace=[],
                v_trace=[],
                u_cap=math.nan,
                area_ratio=math.nan,
                escape_area_bound=math.nan,
                mode=types.AreaMode(mode),
                status=types.CertificateStatus.failed,
                error=str(exc),
                version=__version__,
            )

        area_ratio = (context.ds.diam_u_prime / (2.0 * rho)) ** 2
        return area_certificate_from_sups(
            p,
            rho,
            *(bounds[name].upper_bound for name in AREA_FAMILIES),
            area_ratio=area_ratio,
            k_max=k_max,
            mode=mode,
            inputs=[bounds[name] for name in AREA_FAMILIES],
        )

    def delta_trend(
        self,
        p_values: Sequence[int],
        rho: float,
        delta_range: Tuple[float, float],
        tol: float,
        slack: float = 0.05,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaTrend:
        rows: List[types.DeltaTrendRow] = []
        for p in p_values:
            try:
                result = self.bisect_delta(p, rho, delta_range, tol, mode=mode)
            except types.CertificateError as exc:
                logger.warning("no bound for p=%d: %s", p, exc)
                rows.append(types.DeltaTrendRow(period=p, status=types.CertificateStatus.failed))
                continue
            rows.append(
                types.DeltaTrendRow(
                    period=p,
                    delta_star=result.delta_star,
                    status=types.CertificateStatus.certified,
                )
            )

        stars = [row.delta_star for row in rows if row.delta_star is not None]
        nonincreasing = all(later <= earlier + slack for earlier, later in zip(stars, stars[1:]))
        return types.DeltaTrend(rows=rows, slack=slack, nonincreasing=nonincreasing)


def _monotone(probes: Sequence[types.DeltaProbe]) -> bool:
    "Every probe above a certified delta is certified as well"
    certified = [p.delta for p in probes if p.status == types.CertificateStatus.certified]
    if not certified:
        return True
    lowest = min(certified)
    return all(p.status == types.CertificateStatus.certified for p in probes if p.delta >= lowest)


class Certifier:
    """
    Certifies upper bounds on the critical exponent and the area-zero criterion
    for the closest-to-Chebyshev parameters.
    """

    def __init__(
        self,
        *,
        engine: Optional[Engine] = None,
        config: Optional[types.RunConfig] = None,
        budget: Optional[types.SeriesBudget] = None,
        max_workers: Optional[int] = None,
    ) -> None:
        """
        Initializes the `Certifier` with the given parameters.

        Args:
            `engine`: The `Engine` running the series evaluations. If `None` is given,
                the default engine is used.
            `config`: The run configuration snapshotted into every certificate.
            `budget`: The truncation budget. Derived from `config` when omitted.
            `max_workers`: The maximum number of parallel jobs when using the `_async`
                methods. By default it uses `os.cpu_count() - 1`

        Example:
            ```
            certifier = feigenjulia.Certifier()
            certificate = certifier.certify_delta(6, 0.05, 1.9)
            ```
        """
        self._engine = engine or Engine.get_default()
        if budget is None:
            budget = (
                types.SeriesBudget.from_config(config, self._engine.settings)
                if config is not None
                else types.SeriesBudget(node_budget=self._engine.settings.node_budget)
            )

        self._impl = _CertifierImpl(engine=self._engine, budget=budget, config=config)

        if not max_workers:
            max_workers = max(1, (os.cpu_count() or 1) - 1)

        self._executor = concurrent.futures.ThreadPoolExecutor(
            max_workers=max_workers,
            thread_name_prefix="certifier",
        )

    @property
    def budget(self) -> types.SeriesBudget:
        return self._impl.budget

    @property
    def config(self) -> Optional[types.RunConfig]:
        return self._impl.config

    def domain_system(self, p: int, rho: float, f: Optional[UnimodalQuadratic] = None) -> DomainSystem:
        "The cached domain system shared by all certificates of `(p, rho)`"
        return self._impl.context(p, rho, f).ds

    def expansion_profile(
        self, p: int, rho: float, f: Optional[UnimodalQuadratic] = None
    ) -> types.ExpansionProfile:
        return self._impl.context(p, rho, f).profile

    def certify_delta(
        self,
        p: int,
        rho: float,
        delta: float,
        *,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaCertificate:
        """
        Tries to certify `delta_cr <= delta` for period `p`.

        Failures downgrade the status instead of raising; only invalid
        arguments raise `ConfigError`.
        """

        return self._impl.certify_delta(p, rho, delta, f, mode)

    def certify_delta_async(
        self,
        p: int,
        rho: float,
        delta: float,
        *,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> "concurrent.futures.Future[types.DeltaCertificate]":
        return self._executor.submit(self._impl.certify_delta, p, rho, delta, f, mode)

    def bisect_delta(
        self,
        p: int,
        rho: float,
        delta_range: Tuple[float, float],
        tol: float,
        *,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaBisection:
        """
        Smallest certified delta in the range, up to `tol`.

        Raises:
            CertificateError: with code `uncertifiable_range` when the upper endpoint fails.
        """

        return self._impl.bisect_delta(p, rho, delta_range, tol, f, mode)

    def bisect_delta_async(
        self,
        p: int,
        rho: float,
        delta_range: Tuple[float, float],
        tol: float,
        *,
        f: Optional[UnimodalQuadratic] = None,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> "concurrent.futures.Future[types.DeltaBisection]":
        return self._executor.submit(self._impl.bisect_delta, p, rho, delta_range, tol, f, mode)

    def certify_area(
        self,
        p: int,
        rho: float,
        k_max: int = 30,
        *,
        mode: types.AreaMode = types.AreaMode.direct,
        f: Optional[UnimodalQuadratic] = None,
    ) -> types.AreaCertificate:
        return self._impl.certify_area(p, rho, k_max, mode, f)

    def certify_area_async(
        self,
        p: int,
        rho: float,
        k_max: int = 30,
        *,
        mode: types.AreaMode = types.AreaMode.direct,
        f: Optional[UnimodalQuadratic] = None,
    ) -> "concurrent.futures.Future[types.AreaCertificate]":
        return self._executor.submit(self._impl.certify_area, p, rho, k_max, mode, f)

    def delta_trend(
        self,
        p_values: Sequence[int],
        rho: float,
        delta_range: Tuple[float, float],
        tol: float,
        slack: float = 0.05,
        *,
        mode: types.RecursionMode = types.RecursionMode.direct,
    ) -> types.DeltaTrend:
        return self._impl.delta_trend(p_values, rho, delta_range, tol, slack, mode)


def certify_delta(
    f: Optional[UnimodalQuadratic],
    p: int,
    rho: float,
    delta: float,
    budget: Optional[types.SeriesBudget] = None,
    mode: types.RecursionMode = types.RecursionMode.direct,
) -> types.DeltaCertificate:
    return Certifier(budget=budget, max_workers=1).certify_delta(p, rho, delta, f=f, mode=mode)


def bisect_delta(
    f: Optional[UnimodalQuadratic],
    p: int,
    rho: float,
    delta_range: Tuple[float, float],
    tol: float,
    budget: Optional[types.SeriesBudget] = None,
) -> types.DeltaBisection:
    return Certifier(budget=budget, max_workers=1).bisect_delta(p, rho, delta_range, tol, f=f)


def certify_area(
    f: Optional[UnimodalQuadratic],
    p: int,
    rho: float,
    k_max: int = 30,
    mode: types.AreaMode = types.AreaMode.direct,
    budget: Optional[types.SeriesBudget] = None,
) -> types.AreaCertificate:
    return Certifier(budget=budget, max_workers=1).certify_area(p, rho, k_max, mode=mode, f=f)


def render_summary(certificate: types.BaseModel) -> str:
    """
    Plain-text summary of a delta or area certificate.
    """

    if isinstance(certificate, types.DeltaCertificate):
        lines = [
            f"delta certificate  p={certificate.period}  rho={certificate.rho}  delta={certificate.delta}",
            f"status: {certificate.status.value} ({certificate.label})",
        ]
        if certificate.recursion is not None:
            r = certificate.recursion
            lines.append(f"alpha={r.alpha:.6g}  beta={r.beta:.6g}  gamma={r.gamma:.6g}  mode={r.mode.value}")
            lines.append(f"sufficient shape: {'yes' if certificate.sufficient_shape else 'no'}")
        if certificate.fixed_point is not None:
            lines.append(f"fixed point s={certificate.fixed_point.s:.6g}")
        if certificate.residual is not None:
            lines.append(f"self-similarity residual: {certificate.residual:.3e}")
    elif isinstance(certificate, types.AreaCertificate):
        lines = [
            f"area certificate  p={certificate.period}  rho={certificate.rho}  mode={certificate.mode.value}",
            f"status: {certificate.status.value} ({certificate.label})",
            f"q1={certificate.q1:.4g}  q2={certificate.q2:.4g}  q3={certificate.q3:.4g}  q4={certificate.q4:.4g}",
            f"u_cap={certificate.u_cap:.4g}  escape area bound={certificate.escape_area_bound:.4g}",
        ]
        for name, ok in certificate.threshold_checks.items():
            lines.append(f"  {name}: {'pass' if ok else 'fail'}")
    else:
        raise TypeError(f"cannot summarize {type(certificate).__name__}")

    if certificate.error:
        lines.append(f"error: {certificate.error}")
    return "\n".join(lines) + "\n"
