"""
Tri-state regions of the dynamical plane and the polar grids used to sample them.

Every region classifies numpy arrays of points into `OUTSIDE`, `INSIDE` or
`UNCERTAIN` (within the region's margin of its boundary).
"""

import cmath
import logging
import math
from typing import NamedTuple, Optional, Tuple

import numpy as np

from . import types
from .dynamics import UnimodalQuadratic, critical_orbit

logger = logging.getLogger(__name__)

OUTSIDE = np.int8(0)
INSIDE = np.int8(1)
UNCERTAIN = np.int8(2)

_CODES = {
    int(OUTSIDE): types.Membership.outside,
    int(INSIDE): types.Membership.inside,
    int(UNCERTAIN): types.Membership.uncertain,
}

DEFAULT_MARGIN_SCALE = 1e-9


def _as_points(z) -> np.ndarray:
    return np.asarray(z, dtype=complex)


def _check_finite(name: str, value: complex) -> None:
    if not cmath.isfinite(complex(value)):
        raise types.RegionError(f"{name} must be finite, got {value!r}", types.ErrorCode.config)


class Region:
    """
    Base class of all regions.

    Subclasses implement `classify`; `radial_bounds` and `core_radius`
    describe where the region can live so that grids can be laid out.
    """

    _label: Optional[str] = None
    _margin: float = 0.0

    @property
    def margin(self) -> float:
        "Width of the band around the boundary reported as uncertain"
        return self._margin

    def classify(self, z) -> np.ndarray:
        raise NotImplementedError

    def radial_bounds(self) -> Tuple[float, float]:
        """
        `(r_lo, r_hi)` such that every member `z` has `r_lo <= |z| <= r_hi`.
        """

        return (0.0, math.inf)

    def core_radius(self) -> float:
        "Radius of a disk around 0 contained in the region (0 when unknown)"
        return 0.0

    @property
    def diameter(self) -> float:
        return 2.0 * self.radial_bounds()[1]

    @property
    def is_empty(self) -> bool:
        return False

    @property
    def label(self) -> str:
        return self._label or self._default_label()

    def _default_label(self) -> str:
        return type(self).__name__

    def named(self, label: str) -> "Region":
        self._label = label
        return self

    def __sub__(self, other: "Region") -> "Difference":
        return Difference(self, other)

    def __and__(self, other: "Region") -> "Intersection":
        return Intersection(self, other)

    def __or__(self, other: "Region") -> "Union":
        return Union(self, other)

    def __invert__(self) -> "Complement":
        return Complement(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.label}>"


class Plane(Region):
    def classify(self, z) -> np.ndarray:
        return np.full(np.shape(z), INSIDE, dtype=np.int8)

    def core_radius(self) -> float:
        return math.inf

    def _default_label(self) -> str:
        return "C"


class EmptyRegion(Region):
    def classify(self, z) -> np.ndarray:
        return np.full(np.shape(z), OUTSIDE, dtype=np.int8)

    def radial_bounds(self) -> Tuple[float, float]:
        return (0.0, 0.0)

    @property
    def is_empty(self) -> bool:
        return True

    def _default_label(self) -> str:
        return "0"


class Disk(Region):
    def __init__(self, center: complex, radius: float, margin: Optional[float] = None) -> None:
        _check_finite("disk center", center)
        if not math.isfinite(radius) or radius < 0:
            raise types.RegionError(
                f"disk radius must be finite and non-negative, got {radius!r}",
                types.ErrorCode.config,
            )
        self.center = complex(center)
        self.radius = float(radius)
        self._margin = DEFAULT_MARGIN_SCALE * 2.0 * self.radius if margin is None else float(margin)
        if self._margin < 0:
            raise types.RegionError(f"margin must be non-negative, got {margin!r}", types.ErrorCode.config)

    def classify(self, z) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            d = np.abs(_as_points(z) - self.center) - self.radius
            out = np.full(d.shape, OUTSIDE, dtype=np.int8)
            out[d < -self.margin] = INSIDE
            out[np.abs(d) <= self.margin] = UNCERTAIN
        return out

    def radial_bounds(self) -> Tuple[float, float]:
        m = abs(self.center)
        return (max(0.0, m - self.radius), m + self.radius)

    def core_radius(self) -> float:
        return max(0.0, self.radius - abs(self.center))

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def _default_label(self) -> str:
        if self.center == 0:
            return f"D({self.radius:g})"
        return f"D({self.center:g},{self.radius:g})"


class ScaledCopy(Region):
    """
    `factor * base`: contains `z` exactly when `base` contains `z / factor`.
    """

    def __init__(self, factor: complex, base: Region) -> None:
        _check_finite("scale factor", factor)
        if factor == 0:
            raise types.RegionError("scale factor must be non-zero", types.ErrorCode.config)
        self.factor = complex(factor)
        self.base = base

    @property
    def margin(self) -> float:
        return abs(self.factor) * self.base.margin

    def classify(self, z) -> np.ndarray:
        return self.base.classify(_as_points(z) / self.factor)

    def radial_bounds(self) -> Tuple[float, float]:
        lo, hi = self.base.radial_bounds()
        s = abs(self.factor)
        return (s * lo, s * hi)

    def core_radius(self) -> float:
        return abs(self.factor) * self.base.core_radius()

    @property
    def is_empty(self) -> bool:
        return self.base.is_empty

    def _default_label(self) -> str:
        return f"{self.factor:g}*{self.base.label}"


class TrackedPullback(Region):
    """
    Component of `f^-p(target)` around the critical point: `z` belongs when
    `f^i(f(z))` stays within `tracking * |f^(i+1)(0)|` of the critical orbit
    for `i = 0..p-2` and `f^p(z)` lands in the target disk.
    """

    _RAYS = 32
    _BISECTIONS = 60

    def __init__(
        self,
        f: UnimodalQuadratic,
        steps: int,
        target: Disk,
        tracking: float = 0.5,
        margin: Optional[float] = None,
    ) -> None:
        if steps < 1:
            raise types.RegionError(f"pullback needs at least one step, got {steps}", types.ErrorCode.config)
        if not 0 < tracking < 1:
            raise types.RegionError(f"tracking must lie in (0, 1), got {tracking}", types.ErrorCode.config)
        self.f = f
        self.steps = steps
        self.target = target
        self.tracking = float(tracking)
        self.orbit = critical_orbit(f, steps)
        self._rays: Optional[np.ndarray] = None
        self._fixed_margin = margin

    @property
    def margin(self) -> float:
        if self._fixed_margin is not None:
            return float(self._fixed_margin)
        return DEFAULT_MARGIN_SCALE * self.diameter

    def _pull(self, z: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        c = self.f.c
        tracked = np.ones(z.shape, dtype=bool)
        with np.errstate(over="ignore", invalid="ignore"):
            w = c - z * z
            deriv = -2 * z
            for i in range(self.steps - 1):
                ref = self.orbit[i]
                tracked &= np.abs(w - ref) < self.tracking * abs(ref)
                deriv = deriv * (-2 * w)
                w = c - w * w
        return w, deriv, tracked

    def _landing_inside(self, z: np.ndarray) -> np.ndarray:
        w, _, tracked = self._pull(z)
        with np.errstate(invalid="ignore"):
            return tracked & (np.abs(w - self.target.center) < self.target.radius)

    def classify(self, z) -> np.ndarray:
        z = _as_points(z)
        w, deriv, tracked = self._pull(z)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            gap = np.abs(w - self.target.center) - self.target.radius
            distance = np.abs(gap) / np.abs(deriv)
            out = np.full(z.shape, OUTSIDE, dtype=np.int8)
            out[tracked & (gap < 0)] = INSIDE
            out[tracked & (distance <= self.margin)] = UNCERTAIN
        return out

    def ray_angles(self) -> np.ndarray:
        "Angles of the boundary rays; the first one is the positive real axis"
        return np.pi * np.arange(self._RAYS) / self._RAYS

    def ray_radii(self) -> np.ndarray:
        """
        Boundary radius along `_RAYS` rays in `[0, pi)` (the region is symmetric under `z -> -z`).
        """

        if self._rays is None:
            direction = np.exp(1j * self.ray_angles())
            if not self._landing_inside(np.zeros(1, dtype=complex))[0]:
                raise types.RegionError(
                    f"critical point does not land in the target after {self.steps} steps",
                    types.ErrorCode.nesting_violation,
                )
            lo = np.zeros(self._RAYS)
            hi = np.full(self._RAYS, max(self.target.radius, 1e-300))
            for _ in range(2000):
                grow = self._landing_inside(hi * direction)
                if not grow.any():
                    break
                hi[grow] *= 2.0
            for _ in range(self._BISECTIONS):
                mid = 0.5 * (lo + hi)
                inside = self._landing_inside(mid * direction)
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            self._rays = hi
        return self._rays

    def radial_bounds(self) -> Tuple[float, float]:
        return (0.0, float(self.ray_radii().max()) * 1.05)

    def core_radius(self) -> float:
        return float(self.ray_radii().min()) * 0.999

    @property
    def diameter(self) -> float:
        return 2.0 * float(self.ray_radii().max())

    def _default_label(self) -> str:
        return f"f^-{self.steps}({self.target.label})"


class Complement(Region):
    def __init__(self, base: Region) -> None:
        self.base = base

    @property
    def margin(self) -> float:
        return self.base.margin

    def classify(self, z) -> np.ndarray:
        codes = self.base.classify(z)
        out = np.where(codes == INSIDE, OUTSIDE, INSIDE).astype(np.int8)
        out[codes == UNCERTAIN] = UNCERTAIN
        return out

    def _default_label(self) -> str:
        return f"~{self.base.label}"


class Intersection(Region):
    def __init__(self, first: Region, second: Region) -> None:
        self.first = first
        self.second = second

    @property
    def margin(self) -> float:
        return max(self.first.margin, self.second.margin)

    def classify(self, z) -> np.ndarray:
        a = self.first.classify(z)
        b = self.second.classify(z)
        both = (a == INSIDE) & (b == INSIDE)
        out = np.where(both, INSIDE, UNCERTAIN).astype(np.int8)
        out[(a == OUTSIDE) | (b == OUTSIDE)] = OUTSIDE
        return out

    def radial_bounds(self) -> Tuple[float, float]:
        lo_a, hi_a = self.first.radial_bounds()
        lo_b, hi_b = self.second.radial_bounds()
        return (max(lo_a, lo_b), min(hi_a, hi_b))

    def core_radius(self) -> float:
        return min(self.first.core_radius(), self.second.core_radius())

    @property
    def is_empty(self) -> bool:
        return self.first.is_empty or self.second.is_empty

    def _default_label(self) -> str:
        return f"{self.first.label}&{self.second.label}"


class Difference(Region):
    """
    `first` minus `second`: inside `first` and outside `second`.
    """

    def __init__(self, first: Region, second: Region) -> None:
        self.first = first
        self.second = second

    @property
    def margin(self) -> float:
        return max(self.first.margin, self.second.margin)

    def classify(self, z) -> np.ndarray:
        a = self.first.classify(z)
        b = self.second.classify(z)
        both = (a == INSIDE) & (b == OUTSIDE)
        out = np.where(both, INSIDE, UNCERTAIN).astype(np.int8)
        out[(a == OUTSIDE) | (b == INSIDE)] = OUTSIDE
        return out

    def radial_bounds(self) -> Tuple[float, float]:
        lo, hi = self.first.radial_bounds()
        return (max(lo, self.second.core_radius()), hi)

    @property
    def is_empty(self) -> bool:
        return self.first.is_empty

    def _default_label(self) -> str:
        return f"{self.first.label}\\{self.second.label}"


class Union(Region):
    def __init__(self, first: Region, second: Region) -> None:
        self.first = first
        self.second = second

    @property
    def margin(self) -> float:
        return max(self.first.margin, self.second.margin)

    def classify(self, z) -> np.ndarray:
        a = self.first.classify(z)
        b = self.second.classify(z)
        either = (a == INSIDE) | (b == INSIDE)
        out = np.where(either, INSIDE, UNCERTAIN).astype(np.int8)
        out[(a == OUTSIDE) & (b == OUTSIDE)] = OUTSIDE
        return out

    def radial_bounds(self) -> Tuple[float, float]:
        lo_a, hi_a = self.first.radial_bounds()
        lo_b, hi_b = self.second.radial_bounds()
        if self.first.is_empty:
            return (lo_b, hi_b)
        if self.second.is_empty:
            return (lo_a, hi_a)
        return (min(lo_a, lo_b), max(hi_a, hi_b))

    def core_radius(self) -> float:
        return max(self.first.core_radius(), self.second.core_radius())

    @property
    def is_empty(self) -> bool:
        return self.first.is_empty and self.second.is_empty

    def _default_label(self) -> str:
        return f"{self.first.label}|{self.second.label}"


def region_membership(region: Region, z: complex) -> types.Membership:
    _check_finite("query point", z)
    code = region.classify(np.array([z], dtype=complex))[0]
    return _CODES[int(code)]


class GridSample(NamedTuple):
    points: np.ndarray
    "Sample points that are members of the region (uncertain ones included)"

    spacing: np.ndarray
    "Half-diagonal of the grid cell around each point"

    codes: np.ndarray


def sample_grid(region: Region, grid: types.GridSpec) -> GridSample:
    """
    Lays a log-polar grid (cell midpoints) over the region's radial bounds, or
    a circle grid when `grid.circle_radius` is set, and keeps the members.

    Raises:
        RegionError: with code `empty_grid` when no grid point is a member.
    """

    span = math.pi if grid.half_plane else 2.0 * math.pi
    d_theta = span / grid.n_angles
    theta = d_theta * (np.arange(grid.n_angles) + 0.5)

    if grid.circle_radius is not None:
        points = grid.circle_radius * np.exp(1j * theta)
        spacing = np.full(points.shape, grid.circle_radius * d_theta / 2.0)
    else:
        if region.is_empty:
            raise types.RegionError(f"region {region.label} is empty", types.ErrorCode.empty_grid)
        lo, hi = region.radial_bounds()
        if not math.isfinite(hi):
            raise types.RegionError(
                f"region {region.label} is unbounded and cannot be sampled",
                types.ErrorCode.config,
            )
        if hi <= 0 or hi <= lo:
            raise types.RegionError(f"region {region.label} has no extent", types.ErrorCode.empty_grid)
        if lo <= 0:
            lo = hi * 1e-4
        step = math.log(hi / lo) / grid.n_radii
        radii = lo * np.exp(step * (np.arange(grid.n_radii) + 0.5))
        outer = radii * math.exp(step / 2.0)
        half = (outer - radii) + outer * d_theta / 2.0
        r_mesh, t_mesh = np.meshgrid(radii, theta, indexing="ij")
        points = (r_mesh * np.exp(1j * t_mesh)).ravel()
        spacing = np.repeat(half, grid.n_angles)

    codes = region.classify(points)
    keep = codes != OUTSIDE
    if not keep.any():
        raise types.RegionError(
            f"no grid point of {grid.n_radii}x{grid.n_angles} lies in {region.label}",
            types.ErrorCode.empty_grid,
        )
    uncertain = int(np.count_nonzero(codes == UNCERTAIN))
    if uncertain:
        logger.debug("%d uncertain grid points in %s", uncertain, region.label)
    return GridSample(points[keep], spacing[keep], codes[keep])
