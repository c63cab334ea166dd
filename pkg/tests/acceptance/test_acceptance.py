"""
Desk-scale runs at the default configuration. Each takes seconds to minutes;
select them with `pytest -m acceptance`.
"""

import numpy as np
import pytest

import feigenjulia as fj
from feigenjulia import certificates, dynamics, renormalization

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def certifier():
    return fj.Certifier(config=fj.RunConfig(), max_workers=1)


def test_period_three_parameter_solves_its_polynomial():
    c = fj.find_superattracting_parameter(fj.CombinatoricsSpec.closest_to_chebyshev(3))

    assert abs(c**3 - 2 * c**2 + c - 1) < 1e-10


@pytest.mark.parametrize("p", range(2, 13))
def test_itineraries(p):
    spec = fj.CombinatoricsSpec.closest_to_chebyshev(p)
    c = fj.find_superattracting_parameter(spec)

    assert dynamics.itinerary(fj.UnimodalQuadratic(c), p) == spec.signs


def test_solver_agrees_with_cascade():
    approx = fj.cvitanovic_solve(2, degree=20)
    oracle = fj.cascade_lambda_oracle(8)

    assert approx.residual < 1e-8
    assert abs(approx.lambda_ - oracle.lambda_) < 1e-3
    assert 1.0 / abs(approx.lambda_) == pytest.approx(2.5029, abs=1e-3)


def test_geometry_trends():
    rows = fj.lemma_class_report((5, 11), 0.05)

    for row in rows:
        assert 1.7 <= row.diam_u_prime ** (-1.0 / row.p) <= 2.3
        assert 0.1 <= row.abs_lambda * 4**row.p <= 10
        assert row.abs_lambda <= row.diam_u_prime / 4
    assert all(b.alpha_p > a.alpha_p for a, b in zip(rows, rows[1:]))
    assert all(b.eta_p > a.eta_p for a, b in zip(rows, rows[1:]))
    gaps = [2.0 - row.c_p for row in rows]
    assert all(0.15 <= b / a <= 0.4 for a, b in zip(gaps, gaps[1:]))


def test_chebyshev_expansion_is_stable_across_depths():
    profiles = fj.chebyshev_profile_stability((6, 8, 10, 12))

    constants = [profile.k_est for profile in profiles]
    assert max(constants) <= 1.1 * min(constants)


def test_expansion_sweeps():
    sweep = fj.expansion_lemma_sweep(12, 0.3, 0.3)

    assert sweep.cusp_pass
    assert sweep.return_pass
    assert sweep.cusp_margin > 1.0
    assert sweep.return_min_ratio > 1.0


def test_default_delta_certificate(certifier):
    certificate = certifier.certify_delta(10, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.certified
    assert certificate.recursion.beta < 1.0 / 3.0
    s = certificate.fixed_point.s
    r = certificate.recursion
    assert abs(r.alpha + r.beta * s + r.gamma * s * s - s) < 1e-12 * max(1.0, s)

    f = certifier.domain_system(10, 0.05).f
    assert fj.pressure_critical_exponent(f, complex(1.0, 1.0)).delta_cr <= 1.85


def test_certified_delta_is_nonincreasing_in_period(certifier):
    stars = [certifier.bisect_delta(p, 0.05, (1.0, 2.0), 0.05).delta_star for p in (8, 10, 12)]

    assert all(b <= a + 0.05 for a, b in zip(stars, stars[1:]))


@pytest.mark.parametrize("k_value", [0.5, 1.0, 2.0, 10.0])
def test_threshold_induction(k_value):
    u_trace, v_trace = fj.fixed_threshold_induction(k_value, 100)

    assert max(u_trace) <= 0.1
    assert max(v_trace) <= 0.25


def test_default_area_certificate_and_escape_fraction(certifier):
    certificate = certifier.certify_area(10, 0.05, 30)

    assert certificate.status == fj.CertificateStatus.certified
    assert np.isfinite(certificate.u_trace).all()

    ds = certifier.domain_system(10, 0.05)
    first = fj.escape_fraction_mc(ds.f, ds, 1, 100_000, 200, seed=7)
    second = fj.escape_fraction_mc(ds.f, ds, 1, 100_000, 200, seed=7)
    assert first == second
    assert first.fraction <= 0.2


@pytest.mark.parametrize("c, low, high", [(0.0, 0.95, 1.10), (2.0, 0.90, 1.10)])
def test_box_counting(c, low, high):
    assert low <= fj.box_counting_dimension(c, (512, 1024, 2048, 4096)).value <= high


def test_box_counting_near_chebyshev():
    c = renormalization.find_superattracting_parameter(fj.CombinatoricsSpec.closest_to_chebyshev(10))

    assert 1.0 <= fj.box_counting_dimension(c, (512, 1024, 2048, 4096), max_iter=1024).value <= 1.4


def test_summaries_render(certifier):
    text = certificates.render_summary(certifier.certify_delta(10, 0.05, 1.8))

    assert text.startswith("delta certificate  p=10")
