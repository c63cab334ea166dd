"""
Orbit families in arrow notation and truncated Poincaré series over them.

A family `D <-[S]- E` collects the backward orbits `x_0 -> ... -> x_k` with
`x_0 ∈ E`, `x_k ∈ D` and every intermediate point in `S`; a `+` before the
source drops the trivial orbit. Each orbit weighs `|Df^k(x_0)|^-delta`.
"""

import logging
import math
import re
import warnings
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from . import types
from .dynamics import UnimodalQuadratic, critical_orbit
from .engine import Engine
from .regions import (
    INSIDE,
    OUTSIDE,
    UNCERTAIN,
    Difference,
    Disk,
    EmptyRegion,
    Intersection,
    Plane,
    Region,
    Union,
    sample_grid,
)
from .renormalization import (
    DomainSystem,
    build_domain_system,
    find_superattracting_parameter,
    sampled_return_times,
)

logger = logging.getLogger(__name__)

DEFAULT_DEPTH = 12
DEFAULT_PRUNE_THRESHOLD = 1e-9
DEFAULT_NODE_BUDGET = 50_000_000
DEFAULT_BATCH = 65_536

EPS_FLOOR = 1e-3
KOEBE_FACTOR = 0.25
PROFILE_SLACK = 0.05
MAX_PRESSURE_DEPTH = 22
MAX_DOUBLE_PERIOD = 14


class OrbitFamily:
    """
    Orbit family `target <-[via]- source`, `nontrivial` marking the `+`.
    """

    def __init__(
        self,
        target: Region,
        source: Region,
        via: Optional[Region] = None,
        nontrivial: bool = False,
    ) -> None:
        self.target = target
        self.source = source
        self.via = via if via is not None else Plane()
        self.nontrivial = nontrivial

    @property
    def descriptor(self) -> str:
        plus = "+" if self.nontrivial else ""
        if isinstance(self.via, Plane):
            return f"{self.target.label}<-{plus}{self.source.label}"
        return f"{self.target.label}<-[{self.via.label}]-{plus}{self.source.label}"

    def __repr__(self) -> str:
        return f"OrbitFamily({self.descriptor})"


_FAMILY_RE = re.compile(
    r"^\s*(?P<target>[^<]+?)\s*<-\s*(?:\[(?P<via>[^\]]*)\]\s*-\s*)?(?P<plus>\+)?\s*(?P<source>.+?)\s*$"
)
_TOKEN_RE = re.compile(r"\s*(?:(?P<name>[UVAB]'?(?:\^\d+)?|C|0)|(?P<op>[\\&|()]))")


class _RegionParser:
    """
    Recursive descent over `\\`, `&` (binding tighter) and `|`.
    """

    def __init__(self, text: str, ds: Optional[DomainSystem]) -> None:
        self.text = text
        self.ds = ds
        self.tokens: List[Tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN_RE.match(text, pos)
            if not m or m.end() == pos:
                raise types.ConfigError(f"cannot parse region {text!r} at offset {pos}", types.ErrorCode.parse)
            kind = "name" if m.group("name") else "op"
            self.tokens.append((kind, m.group(kind)))
            pos = m.end()
        self.index = 0

    def parse(self) -> Region:
        region = self._union()
        if self.index != len(self.tokens):
            raise types.ConfigError(f"trailing input in region {self.text!r}", types.ErrorCode.parse)
        return region

    def _peek(self) -> Optional[Tuple[str, str]]:
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def _union(self) -> Region:
        region = self._difference()
        while self._peek() == ("op", "|"):
            self.index += 1
            region = Union(region, self._difference())
        return region

    def _difference(self) -> Region:
        region = self._atom()
        while self._peek() in (("op", "\\"), ("op", "&")):
            op = self.tokens[self.index][1]
            self.index += 1
            other = self._atom()
            region = Difference(region, other) if op == "\\" else Intersection(region, other)
        return region

    def _atom(self) -> Region:
        token = self._peek()
        if token is None:
            raise types.ConfigError(f"unexpected end of region {self.text!r}", types.ErrorCode.parse)
        self.index += 1
        kind, value = token
        if token == ("op", "("):
            region = self._union()
            if self._peek() != ("op", ")"):
                raise types.ConfigError(f"unbalanced parenthesis in {self.text!r}", types.ErrorCode.parse)
            self.index += 1
            return region
        if kind == "op":
            raise types.ConfigError(f"unexpected {value!r} in region {self.text!r}", types.ErrorCode.parse)
        return self._resolve(value)

    def _resolve(self, name: str) -> Region:
        if name == "C":
            return Plane()
        if name == "0":
            return EmptyRegion()
        if self.ds is None:
            raise types.ConfigError(f"region {name!r} needs a domain system", types.ErrorCode.config)
        ds = self.ds
        base, _, power = name.partition("^")
        if power:
            k = int(power)
            scaled = {"U": ds.u_k, "V": ds.v_k, "A": ds.a_k, "B": ds.b_k}.get(base)
            if scaled is None:
                raise types.ConfigError(f"{base!r} has no scaled copies", types.ErrorCode.parse)
            return scaled(k)
        named: Dict[str, Region] = {
            "U": ds.u,
            "U'": ds.u_prime,
            "V": ds.v,
            "V'": ds.v_prime,
            "A": ds.a,
            "A'": ds.a_prime,
        }
        if name not in named:
            raise types.ConfigError(f"unknown region name {name!r}", types.ErrorCode.parse)
        return named[name]


def parse_region(text: str, ds: Optional[DomainSystem] = None) -> Region:
    return _RegionParser(text, ds).parse()


def parse_family(descriptor: str, ds: Optional[DomainSystem] = None) -> OrbitFamily:
    """
    Parses arrow syntax such as `A'<-[U\\V']-+A'` against a domain system.

    Raises:
        ConfigError: with code `parse` for malformed descriptors or unknown names.
    """

    m = _FAMILY_RE.match(descriptor)
    if not m:
        raise types.ConfigError(f"cannot parse orbit family {descriptor!r}", types.ErrorCode.parse)
    via = m.group("via")
    return OrbitFamily(
        target=parse_region(m.group("target"), ds),
        source=parse_region(m.group("source"), ds),
        via=parse_region(via, ds) if via is not None else None,
        nontrivial=m.group("plus") is not None,
    )


class FamilyEnumeration(NamedTuple):
    sum: float
    pruned_mass: float
    nodes: int
    level_sums: List[float]
    level_counts: List[int]
    uncertain: int
    budget_exceeded: bool
    univalence_radius: float = math.inf


def tail_ratio(profile: types.ExpansionProfile, delta: float) -> float:
    return 2.0 * (2.0 - profile.eps_est) ** (-delta)


def geometric_tail_bound(profile: types.ExpansionProfile, delta: float, j: int) -> float:
    """
    Bounds the series beyond level `j` by `K^-delta r^(j+1) / (1 - r)` with `r = 2 (2 - eps)^-delta`.

    Raises:
        SeriesError: with code `divergent_tail` when `r >= 1`.
    """

    r = tail_ratio(profile, delta)
    if r >= 1.0:
        raise types.SeriesError(
            f"tail ratio {r:.4f} >= 1 for delta = {delta} and eps = {profile.eps_est:.4f}",
            types.ErrorCode.divergent_tail,
        )
    return profile.k_est ** (-delta) * r ** (j + 1) / (1.0 - r)


def _critical_hit(z: complex, depth: int) -> types.SeriesError:
    return types.SeriesError(
        f"backward orbit of {z:.6g} reaches the critical point at depth {depth}",
        types.ErrorCode.critical_hit,
    )


def enumerate_family(
    f: UnimodalQuadratic,
    fam: OrbitFamily,
    z: complex,
    delta: float,
    j: int,
    prune_threshold: float = 0.0,
    profile: Optional[types.ExpansionProfile] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    batch_size: int = DEFAULT_BATCH,
) -> FamilyEnumeration:
    """
    Truncated Poincaré series of the family at `z` up to level `j`.

    The backward tree is walked depth first with an explicit stack of node
    batches, principal branch first. Subtrees are cut (and their tail bound
    charged to `pruned_mass`) only when an expansion profile is given.

    Every node also carries the radius of the disk around `z` on which its
    inverse branch stays univalent: a step from `y` back to `sqrt(c - y)`
    folds once the pulled back disk reaches the critical value `c`, so the
    radius is the running minimum of `|y - c| |Df^k(y)| / 4`. The smallest
    radius over counted orbits is returned as `univalence_radius`.

    Raises:
        SeriesError: with code `critical_hit` when a vanishing derivative would count.
    """

    if delta <= 0:
        raise types.ConfigError(f"delta must be positive, got {delta}", types.ErrorCode.range)
    if j < 0:
        raise types.ConfigError(f"truncation level must be non-negative, got {j}", types.ErrorCode.range)

    z = complex(z)
    level_sums = np.zeros(j + 1)
    level_counts = np.zeros(j + 1, dtype=np.int64)
    pruned_mass = 0.0
    nodes = 0
    uncertain = 0
    budget_exceeded = False
    univalence = math.inf

    cut_factor = None
    if profile is not None and prune_threshold > 0:
        r = tail_ratio(profile, delta)
        if r < 1.0:
            cut_factor = profile.k_est ** (-delta) * r / (1.0 - r)

    c = f.c
    stack = [(0, np.array([z]), np.zeros(1), np.full(1, np.inf))]
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        while stack:
            depth, points, log_d, radius = stack.pop()
            nodes += points.size
            if nodes > node_budget:
                budget_exceeded = True
                logger.warning("node budget %d exhausted at %s", node_budget, fam.descriptor)
                break

            codes = fam.source.classify(points)
            uncertain += int(np.count_nonzero(codes == UNCERTAIN))
            counted = codes != OUTSIDE
            if depth == 0 and fam.nontrivial:
                counted[:] = False
            if counted.any():
                if np.isneginf(log_d[counted]).any():
                    raise _critical_hit(z, depth)
                level_sums[depth] += np.exp(-delta * log_d[counted]).sum()
                level_counts[depth] += int(np.count_nonzero(counted))
                univalence = min(univalence, float(radius[counted].min()))

            if depth == j:
                continue

            if depth > 0:
                via = fam.via.classify(points)
                uncertain += int(np.count_nonzero(via == UNCERTAIN))
                expand = via != OUTSIDE
            else:
                expand = np.ones(points.shape, dtype=bool)

            if cut_factor is not None:
                bound = np.exp(-delta * log_d) * cut_factor
                cut = expand & (bound < prune_threshold)
                if cut.any():
                    pruned_mass += float(bound[cut].sum())
                    expand &= ~cut

            parents = points[expand]
            if parents.size == 0:
                continue
            parent_log = log_d[expand]
            if np.isneginf(parent_log).any():
                raise _critical_hit(z, depth)

            roots = np.sqrt(c - parents)
            child_log = parent_log + np.log(2.0 * np.abs(roots))
            reach = KOEBE_FACTOR * np.abs(c - parents) * np.exp(parent_log)
            child_radius = np.minimum(radius[expand], reach)
            children = np.concatenate([roots, -roots])
            logs = np.concatenate([child_log, child_log])
            radii = np.concatenate([child_radius, child_radius])
            chunks = range(0, children.size, batch_size)
            for start in reversed(chunks):
                window = slice(start, start + batch_size)
                stack.append((depth + 1, children[window], logs[window], radii[window]))

    return FamilyEnumeration(
        sum=float(level_sums.sum()),
        pruned_mass=pruned_mass,
        nodes=nodes,
        level_sums=level_sums.tolist(),
        level_counts=level_counts.tolist(),
        uncertain=uncertain,
        budget_exceeded=budget_exceeded,
        univalence_radius=univalence,
    )


def _postcritical_set(f: UnimodalQuadratic, ds: Optional[DomainSystem]) -> np.ndarray:
    if ds is not None:
        return ds.postcritical.astype(complex)
    return np.unique(critical_orbit(f, 64)).astype(complex)


def distortion_margins(
    points: np.ndarray,
    spacing: np.ndarray,
    postcritical: np.ndarray,
    univalence: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    `(1 + h/d)^2` per terminal, `d` the distance from the grid cell to the
    postcritical set; cells touching it get an infinite margin.

    When the enumerated branches of a terminal stay univalent on a larger
    disk (see `enumerate_family`), that radius replaces the distance.
    """

    reach = np.abs(points[:, None] - postcritical[None, :]).min(axis=1)
    if univalence is not None:
        reach = np.maximum(reach, univalence)
    distance = reach - spacing
    with np.errstate(divide="ignore"):
        margin = np.where(distance > 0, (1.0 + spacing / np.where(distance > 0, distance, 1.0)) ** 2, np.inf)
    return margin


def family_sup(
    f: UnimodalQuadratic,
    ds: Optional[DomainSystem],
    fam: OrbitFamily,
    delta: float,
    grid: Optional[types.GridSpec] = None,
    j: int = DEFAULT_DEPTH,
    prune_threshold: float = DEFAULT_PRUNE_THRESHOLD,
    profile: Optional[types.ExpansionProfile] = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    engine: Optional[Engine] = None,
) -> types.SeriesBound:
    """
    Sup of the truncated series over the target region, sampled on a grid.

    Terminals are enumerated concurrently. The upper bound of a terminal is
    `sum * M^delta + tail + pruned` with the distortion margin `M` of its cell.

    Raises:
        RegionError: with code `empty_grid` when the grid misses the target.
        SeriesError: with code `divergent_tail` when the profile cannot bound the tail.
    """

    grid = grid or types.GridSpec()
    if fam.source.is_empty:
        return types.SeriesBound(
            family=fam.descriptor,
            delta=delta,
            j=j,
            point_estimate=0.0,
            upper_bound=0.0,
            tail_bound=0.0,
            pruned_mass=0.0,
            terminals=0,
            nodes=0,
            margin=1.0,
            argmax=(0.0, 0.0),
            grid=grid,
        )

    sample = sample_grid(fam.target, grid)
    tail = geometric_tail_bound(profile, delta, j) if profile is not None else math.inf
    engine = engine or Engine.get_default()

    results = engine.map(
        lambda t: enumerate_family(f, fam, t, delta, j, prune_threshold, profile, node_budget),
        list(sample.points),
    )

    sums = np.array([r.sum for r in results])
    pruned = np.array([r.pruned_mass for r in results])
    univalence = np.array([r.univalence_radius for r in results])
    margins = distortion_margins(sample.points, sample.spacing, _postcritical_set(f, ds), univalence)
    with np.errstate(invalid="ignore"):
        uppers = sums * margins**delta + tail + pruned
    uppers = np.where(np.isnan(uppers), np.inf, uppers)
    budget_exceeded = any(r.budget_exceeded for r in results)

    flags = []
    if not math.isfinite(tail):
        flags.append("divergent")
    if budget_exceeded:
        flags.append("budget_exceeded")

    best = int(np.argmax(uppers)) if np.isfinite(uppers).any() else int(np.argmax(sums))
    point = int(np.argmax(sums))
    upper = math.inf if budget_exceeded else float(uppers.max())

    bound = types.SeriesBound(
        family=fam.descriptor,
        delta=delta,
        j=j,
        point_estimate=float(sums[point]),
        upper_bound=max(upper, float(sums[point])),
        tail_bound=tail,
        pruned_mass=float(pruned[best]),
        terminals=int(sample.points.size),
        nodes=int(sum(r.nodes for r in results)),
        margin=float(margins[best]),
        argmax=types.to_point(sample.points[best]),
        grid=grid,
        uncertain=int(sum(r.uncertain for r in results)),
        flags=flags,
        level_sums=results[point].level_sums,
        level_counts=results[point].level_counts,
    )
    logger.info(
        "sup of %s at delta=%g: point %.6g, upper %.6g over %d terminals",
        bound.family,
        delta,
        bound.point_estimate,
        bound.upper_bound,
        bound.terminals,
    )
    return bound


def level_sum_rows(bound: types.SeriesBound) -> List[types.LevelSumRow]:
    return [
        types.LevelSumRow(depth=k, count=count, sum=value)
        for k, (count, value) in enumerate(zip(bound.level_counts, bound.level_sums))
    ]


def _grid_for(samples: int) -> types.GridSpec:
    n_radii = max(1, int(math.sqrt(samples / 2.0)))
    return types.GridSpec(n_radii=n_radii, n_angles=max(1, math.ceil(samples / n_radii)))


def _spread(points: np.ndarray, count: int) -> np.ndarray:
    "At most `count` points taken evenly across the grid"
    if points.size <= count:
        return points
    return points[np.linspace(0, points.size - 1, count).astype(int)]


def _area_sample(region: Region, count: int) -> np.ndarray:
    """
    Cell midpoints of an even square grid over the region's bounding disk,
    kept when they are members; at most `count` of them.

    Raises:
        RegionError: with code `empty_grid` when no cell midpoint is a member.
    """

    _, hi = region.radial_bounds()
    n = 2 * math.ceil(math.sqrt(count / math.pi)) + 2
    axis = hi * (2.0 * (np.arange(n) + 0.5) / n - 1.0)
    points = (axis[None, :] + 1j * axis[:, None]).ravel()
    points = points[region.classify(points) != OUTSIDE]
    if points.size == 0:
        raise types.RegionError(f"no cell of a {n}x{n} grid lies in {region.label}", types.ErrorCode.empty_grid)
    return _spread(points, count)


def _forward_orbit(f: UnimodalQuadratic, x: complex, steps: int) -> List[types.Point]:
    orbit = [types.to_point(x)]
    for _ in range(steps):
        x = f.c - x * x
        orbit.append(types.to_point(x))
    return orbit


def measure_expansion_profile(
    f: UnimodalQuadratic,
    ds: Optional[DomainSystem],
    S: Region,
    targets: Sequence[Region],
    depth: int = 10,
    samples: int = 64,
    source: Optional[Region] = None,
    guard_radius: float = 1e-3,
    slack: float = PROFILE_SLACK,
) -> types.ExpansionProfile:
    """
    Measures `K, eps` with `|Df^k(x_0)| >= K (2 - eps)^k` on the backward
    orbits constrained to `S` from terminals sampled in the targets.

    Raises:
        SeriesError: with code `config` when `S` meets `V'` (or the guard disk),
            with code `no_expansion` when some sampled orbit has `|Df^k| <= 1`.
    """

    if depth < 1 or samples < 1:
        raise types.ConfigError("profile depth and samples must be positive", types.ErrorCode.range)

    guard = ds.v_prime if ds is not None else Disk(0.0, guard_radius)
    probe_radii = guard.radius * np.array([0.0, 0.25, 0.5, 0.75, 0.95])
    probe = (probe_radii[:, None] * np.exp(1j * np.linspace(0, 2 * np.pi, 16, endpoint=False))[None, :]).ravel()
    if (S.classify(probe) == INSIDE).any():
        raise types.SeriesError(
            f"constraint region {S.label} meets {guard.label} around the critical point",
            types.ErrorCode.config,
        )

    source = source if source is not None else S
    per_target = max(1, samples // max(1, len(targets)))
    terminals = np.concatenate([_spread(sample_grid(t, _grid_for(per_target)).points, per_target) for t in targets])

    minima = np.full(depth + 1, np.inf)
    best_ratio = math.inf
    witness = None
    rate_guess = math.log(2.0)

    with np.errstate(divide="ignore", invalid="ignore"):
        levels = []
        for terminal in terminals:
            points = np.array([terminal])
            logs = np.zeros(1)
            for k in range(1, depth + 1):
                if k > 1:
                    keep = S.classify(points) != OUTSIDE
                    points, logs = points[keep], logs[keep]
                if points.size == 0:
                    break
                roots = np.sqrt(f.c - points)
                step = logs + np.log(2.0 * np.abs(roots))
                points = np.concatenate([roots, -roots])
                logs = np.concatenate([step, step])
                in_source = source.classify(points) != OUTSIDE
                if not in_source.any():
                    continue
                candidate = logs[in_source]
                i = int(np.argmin(candidate))
                if candidate[i] <= 0.0:
                    x0 = complex(points[in_source][i])
                    raise types.SeriesError(
                        f"|Df^{k}| = {math.exp(candidate[i]):.4g} <= 1 on the orbit of {x0:.6g} "
                        f"ending at {complex(terminal):.6g}",
                        types.ErrorCode.no_expansion,
                    )
                if candidate[i] < minima[k]:
                    minima[k] = candidate[i]
                levels.append((k, float(candidate[i]), complex(points[in_source][i]), complex(terminal)))

    ks = np.flatnonzero(np.isfinite(minima))
    if ks.size == 0:
        raise types.SeriesError(
            f"no backward orbit constrained to {S.label} reaches {source.label}",
            types.ErrorCode.no_expansion,
        )
    fit = ks[ks >= max(1, depth // 2)]
    if fit.size >= 2:
        rate_guess = float(np.polyfit(fit, minima[fit], 1)[0])
    eps = float(np.clip(2.0 - math.exp(rate_guess), EPS_FLOOR, 2.0 - 1e-9))
    log_base = math.log(2.0 - eps)

    for k, log_d, x0, terminal in levels:
        ratio = log_d - k * log_base
        if ratio < best_ratio:
            best_ratio = ratio
            witness = types.ExpansionWitness(
                terminal=types.to_point(terminal),
                start=types.to_point(x0),
                steps=k,
                derivative=math.exp(log_d),
                orbit=_forward_orbit(f, x0, k),
            )

    min_ratio = math.exp(best_ratio)
    profile = types.ExpansionProfile(
        k_est=(1.0 - slack) * min_ratio,
        eps_est=eps,
        region=S.label,
        source=source.label,
        samples=int(terminals.size),
        depth=depth,
        min_ratio=min_ratio,
        witness=witness,
    )
    logger.info("expansion profile on %s: K=%.4g eps=%.4g (%d terminals)", S.label, profile.k_est, eps, profile.samples)
    return profile


def minimal_return_time(
    ds: DomainSystem,
    samples: int = 512,
    budget: int = 2000,
) -> int:
    """
    Least `k >= 1` with `f^k(x) ∈ V'` over sampled `x ∈ A'`.

    Raises:
        ConfigError: when `samples <= 0`.
        NoReturnError: when no sample returns within the budget.
    """

    if samples <= 0:
        raise types.ConfigError(f"samples must be positive, got {samples}", types.ErrorCode.range)
    n_radii = max(1, int(math.sqrt(samples / 4.0)))
    grid = types.GridSpec(n_radii=n_radii, n_angles=max(1, math.ceil(samples / n_radii)))
    _, times = sampled_return_times(ds, grid, budget)
    returned = times[times > 0]
    if returned.size == 0:
        raise types.NoReturnError(f"no sampled point of A' returns to V' within {budget} steps", budget)
    return int(returned.min())


def _pressure_levels(f: UnimodalQuadratic, z: complex, depth: int) -> List[np.ndarray]:
    points = np.array([complex(z)])
    logs = np.zeros(1)
    levels = []
    with np.errstate(divide="ignore"):
        for _ in range(depth):
            roots = np.sqrt(f.c - points)
            step = logs + np.log(2.0 * np.abs(roots))
            points = np.concatenate([roots, -roots])
            logs = np.concatenate([step, step])
            levels.append(logs)
    return levels


def pressure_critical_exponent(
    f: UnimodalQuadratic,
    z: complex,
    depth: int = 18,
    bracket: Tuple[float, float] = (0.5, 2.5),
    fit_threshold: float = 0.05,
) -> types.PressureEstimate:
    """
    Estimates the critical exponent as the root of the pressure `P(delta)`,
    the growth rate of the level sums of the full backward tree of `z`,
    fitted over the last `depth/2` levels.

    Raises:
        SeriesError: with code `bad_fit` when the regression RMS exceeds `fit_threshold`.
    """

    if not 4 <= depth <= MAX_PRESSURE_DEPTH:
        raise types.ConfigError(f"depth must lie in [4, {MAX_PRESSURE_DEPTH}], got {depth}", types.ErrorCode.range)
    lo, hi = bracket
    if not lo < hi:
        raise types.ConfigError(f"empty bracket {bracket}", types.ErrorCode.range)

    levels = _pressure_levels(f, z, depth)
    if any(np.isneginf(level).any() for level in levels):
        raise _critical_hit(complex(z), depth)
    ks = np.arange(depth - depth // 2, depth + 1)

    def fit(delta: float) -> Tuple[float, float]:
        log_z = np.array([logsumexp(-delta * levels[k - 1]) for k in ks])
        coefficients, residuals, *_ = np.polyfit(ks, log_z, 1, full=True)
        rms = math.sqrt(float(residuals[0]) / ks.size) if residuals.size else 0.0
        return float(coefficients[0]), rms

    def pressure(delta: float) -> float:
        return fit(delta)[0]

    p_lo, p_hi = pressure(lo), pressure(hi)
    if p_lo <= 0:
        root = lo
    elif p_hi >= 0:
        root = hi
    else:
        root = optimize.bisect(pressure, lo, hi, xtol=1e-6)

    _, rms = fit(root)
    if rms > fit_threshold:
        raise types.SeriesError(f"pressure regression RMS {rms:.3g} above {fit_threshold}", types.ErrorCode.bad_fit)

    estimate = min(max(root, 1.0), 2.0)
    clamped = estimate != root
    if clamped:
        message = f"critical exponent estimate {root:.4f} outside [1, 2], clamped to {estimate}"
        warnings.warn(message)
        logger.warning(message)

    return types.PressureEstimate(
        delta_cr=estimate,
        raw_root=root,
        bracket=(lo, hi),
        clamped=clamped,
        rms=rms,
        depth=depth,
        point=types.to_point(z),
    )


def expansion_lemma_sweep(
    p: int,
    kappa: float,
    epsilon: float,
    rho: float = 0.05,
    precision: types.Precision = types.Precision.double,
    samples: int = 100,
    circles: int = 8,
    outer_radius: Optional[float] = None,
    tracking: float = 0.5,
) -> types.ExpansionSweepReport:
    """
    Checks, at the closest-to-Chebyshev parameter of period p,
    (a) `|f(y) - 2| <= |y|^(2-kappa)` on circles between `2 diam U'` and the
    outer radius, and (b) `|Df^m(y)| >= (2-eps)^m` at the first `m >= 2`
    with `|f^m(y) + 2| > 1/10`, for `y` sampled uniformly by area in `A'`.

    Close to `U'`, where `|y|^2` is not yet large against `|c - 2|`, (b)
    needs larger p; `inner_radius` records how close the samples come.
    """

    if not 0.0 < kappa < 0.5:
        raise types.ConfigError(f"kappa must lie in (0, 1/2), got {kappa}", types.ErrorCode.range)
    if not 0.0 < epsilon < 2.0:
        raise types.ConfigError(f"epsilon must lie in (0, 2), got {epsilon}", types.ErrorCode.range)
    if p < 3 or (types.Precision(precision) == types.Precision.double and p > MAX_DOUBLE_PERIOD):
        raise types.ConfigError(
            f"period {p} outside the feasible range [3, {MAX_DOUBLE_PERIOD}] in {precision} mode",
            types.ErrorCode.range,
        )

    c = find_superattracting_parameter(types.CombinatoricsSpec.closest_to_chebyshev(p))
    f = UnimodalQuadratic(c)
    ds = build_domain_system(f, p, rho, strict=False, tracking=tracking)

    inner = 2.0 * ds.diam_u_prime
    outer = outer_radius if outer_radius is not None else rho
    radii = np.geomspace(inner, max(outer, inner), circles)
    angles = np.linspace(0.0, 2.0 * np.pi, 32, endpoint=False)
    y = (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()
    with np.errstate(divide="ignore"):
        cusp = np.abs(y) ** (2.0 - kappa) / np.abs(f(y) - 2.0)
    worst_cusp = int(np.argmin(cusp))

    points = _area_sample(ds.a_prime, samples)
    budget = 40 * p
    values = points.copy()
    log_d = np.zeros(points.shape)
    steps = np.full(points.shape, -1, dtype=np.int64)
    ratios = np.full(points.shape, np.inf)
    log_base = math.log(2.0 - epsilon)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for m in range(1, budget + 1):
            log_d = log_d + np.log(2.0 * np.abs(values))
            values = c - values * values
            hit = (steps < 0) & (m >= 2) & (np.abs(values + 2.0) > 0.1)
            steps[hit] = m
            ratios[hit] = np.exp(log_d[hit] - m * log_base)
            if (steps >= 0).all():
                break

    resolved = steps >= 0
    passed = resolved & (ratios >= 1.0)
    worst = int(np.argmin(ratios))
    report = types.ExpansionSweepReport(
        period=p,
        parameter=c,
        kappa=kappa,
        epsilon=epsilon,
        rho=rho,
        circle_radii=(float(radii[0]), float(radii[-1])),
        cusp_margin=float(cusp.min()),
        cusp_pass=bool(cusp.min() > 1.0),
        cusp_worst=types.to_point(y[worst_cusp]),
        return_min_ratio=float(ratios.min()),
        return_fraction=float(passed.mean()),
        return_pass=bool(passed.all()),
        return_worst=types.to_point(points[worst]),
        max_return_steps=int(steps.max()),
        samples=int(points.size),
        inner_radius=float(np.abs(points).min()),
    )
    logger.info(
        "expansion sweep p=%d: cusp margin %.4g, return ratio %.4g (%.0f%% pass)",
        p,
        report.cusp_margin,
        report.return_min_ratio,
        100 * report.return_fraction,
    )
    return report


def rescaling_residual(
    ds: DomainSystem,
    x: Optional[complex] = None,
    g_steps: int = 2,
    delta: float = 2.0,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> types.RescalingResidual:
    """
    Compares the truncated sums of `A <- U` at `x` and of `A' <-[U\\A']- U'`
    at `lambda x`, the latter counted in `p * g_steps` steps of `f`.
    """

    if x is None:
        lo, hi = ds.a.radial_bounds()
        x = math.sqrt(max(lo, hi * 1e-3) * hi) * np.exp(0.3j)
    f = ds.f
    lhs = enumerate_family(f, OrbitFamily(ds.a, ds.u), x, delta, g_steps, node_budget=node_budget)
    rhs = enumerate_family(
        f,
        OrbitFamily(ds.a_prime, ds.u_prime, via=Difference(ds.u, ds.a_prime)),
        ds.lambda_ * x,
        delta,
        ds.period * g_steps,
        node_budget=node_budget,
    )
    scale = max(lhs.sum, rhs.sum, 1e-300)
    return types.RescalingResidual(
        point=types.to_point(x),
        g_steps=g_steps,
        delta=delta,
        lhs=lhs.sum,
        rhs=rhs.sum,
        residual=abs(lhs.sum - rhs.sum) / scale,
    )


def chebyshev_profile_stability(
    depths: Sequence[int] = (6, 8, 10, 12),
    samples: int = 64,
) -> List[types.ExpansionProfile]:
    """
    Expansion profiles of the Chebyshev map away from the critical point
    (`|z| >= 0.3`) with terminals at distance at least 1/2 from `±2`.
    """

    f = UnimodalQuadratic(2.0)
    S = Difference(Plane(), Disk(0.0, 0.3)).named("C\\D(0.3)")
    target = Difference(Disk(0.0, 1.5), Disk(0.0, 0.3)).named("D(1.5)\\D(0.3)")
    return [measure_expansion_profile(f, None, S, [target], depth=d, samples=samples) for d in depths]

