import numpy as np
import pytest

import feigenjulia as fj
from feigenjulia.regions import INSIDE, OUTSIDE, UNCERTAIN, ScaledCopy, TrackedPullback
from tests.unit import factories


def test_disk_membership():
    disk = fj.Disk(0.5, 1.0)

    assert fj.region_membership(disk, 0.5 + 0.5j) == fj.types.Membership.inside
    assert fj.region_membership(disk, 2.0) == fj.types.Membership.outside
    assert fj.region_membership(disk, 1.5) == fj.types.Membership.uncertain


def test_disk_margin_scales_with_radius():
    disk = fj.Disk(0, 2.0)

    assert disk.margin == pytest.approx(4e-9)
    assert disk.classify([2.0 - 1e-8, 2.0 + 1e-9]).tolist() == [INSIDE, UNCERTAIN]


def test_disk_rejects_bad_radius():
    with pytest.raises(fj.RegionError) as excinfo:
        fj.Disk(0, -1.0)

    assert excinfo.value.code == fj.ErrorCode.config


def test_membership_rejects_non_finite_point():
    with pytest.raises(fj.RegionError):
        fj.region_membership(fj.Disk(0, 1.0), complex("nan"))


def test_difference_is_an_annulus():
    annulus = fj.Disk(0, 1.0) - fj.Disk(0, 0.5)

    codes = annulus.classify([0.1, 0.75j, 1.5])

    assert codes.tolist() == [OUTSIDE, INSIDE, OUTSIDE]
    assert annulus.radial_bounds() == (0.5, 1.0)


def test_boolean_combinators():
    left = fj.Disk(-0.5, 1.0)
    right = fj.Disk(0.5, 1.0)
    points = [-1.2, 0.0, 1.2, 3.0]

    assert (left & right).classify(points).tolist() == [OUTSIDE, INSIDE, OUTSIDE, OUTSIDE]
    assert (left | right).classify(points).tolist() == [INSIDE, INSIDE, INSIDE, OUTSIDE]
    assert (~left).classify(points).tolist() == [OUTSIDE, OUTSIDE, INSIDE, INSIDE]


def test_plane_and_empty_region():
    assert fj.Plane().classify([0.0, 1e6]).tolist() == [INSIDE, INSIDE]
    assert fj.EmptyRegion().classify([0.0]).tolist() == [OUTSIDE]
    assert fj.EmptyRegion().is_empty
    assert (fj.EmptyRegion() - fj.Disk(0, 1.0)).is_empty


def test_scaled_copy():
    scaled = ScaledCopy(0.1j, fj.Disk(0, 1.0))

    assert scaled.classify([0.05, 0.2]).tolist() == [INSIDE, OUTSIDE]
    assert scaled.radial_bounds() == pytest.approx((0.0, 0.1))
    assert scaled.margin == pytest.approx(0.1 * fj.Disk(0, 1.0).margin)


def test_scaled_copy_rejects_zero_factor():
    with pytest.raises(fj.RegionError):
        ScaledCopy(0, fj.Disk(0, 1.0))


def test_named_regions_keep_their_label():
    region = (fj.Disk(0, 1.0) - fj.Disk(0, 0.1)).named("A")

    assert region.label == "A"
    assert (region - fj.Disk(0, 0.5).named("V")).label == "A\\V"


def test_tracked_pullback_of_a_disk():
    """
    For `x -> -x^2` the preimage of `|w| < 1/4` is the disk `|z| < 1/2`.
    """

    pullback = TrackedPullback(fj.UnimodalQuadratic(0.0), 1, fj.Disk(0, 0.25))

    assert pullback.ray_radii() == pytest.approx(np.full(32, 0.5), rel=1e-9)
    assert pullback.classify([0.4, 0.3j, 0.6]).tolist() == [INSIDE, INSIDE, OUTSIDE]
    assert pullback.diameter == pytest.approx(1.0, rel=1e-9)


def test_tracked_pullback_requires_landing_critical_point():
    pullback = TrackedPullback(fj.UnimodalQuadratic(0.0), 1, fj.Disk(1.0, 0.1))

    with pytest.raises(fj.RegionError) as excinfo:
        pullback.ray_radii()

    assert excinfo.value.code == fj.ErrorCode.nesting_violation


def test_sample_grid_covers_annulus():
    annulus = fj.Disk(0, 1.0) - fj.Disk(0, 0.5)

    sample = fj.sample_grid(annulus, factories.GridSpecFactory())

    assert sample.points.size == 24
    assert np.all(np.abs(sample.points) > 0.5)
    assert np.all(np.abs(sample.points) < 1.0)
    assert np.all(sample.points.imag > 0)
    assert np.all(sample.spacing > 0)


def test_sample_grid_circle_mode():
    grid = factories.GridSpecFactory(circle_radius=0.3, half_plane=False)

    sample = fj.sample_grid(fj.Disk(0, 1.0), grid)

    assert sample.points.size == 6
    assert np.abs(sample.points) == pytest.approx(np.full(6, 0.3))


def test_sample_grid_errors():
    grid = factories.GridSpecFactory()

    with pytest.raises(fj.RegionError) as excinfo:
        fj.sample_grid(fj.EmptyRegion(), grid)
    assert excinfo.value.code == fj.ErrorCode.empty_grid

    with pytest.raises(fj.RegionError) as excinfo:
        fj.sample_grid(fj.Plane(), grid)
    assert excinfo.value.code == fj.ErrorCode.config
