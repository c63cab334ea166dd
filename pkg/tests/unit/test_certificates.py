import json
import math
from types import SimpleNamespace

import pytest

import feigenjulia as fj
from feigenjulia import certificates, reports, types
from feigenjulia.certificates import (
    AREA_FAMILIES,
    DIRECT_FAMILIES,
    DOMINATING_FAMILIES,
    _CertifierImpl,
    _Context,
    _monotone,
    sufficient_shape,
    threshold_checks,
)
from tests.unit import factories

DIRECT_SUPS = {"a1": 0.1, "a2": 0.1, "a3": 0.1, "b1": 0.05, "b2": 0.05, "b3": 0.05}


def by_descriptor(families, values):
    return {families[name]: value for name, value in values.items()}


@pytest.fixture
def patch_sups(mocker):
    """
    Replaces the series sups with fixed values keyed by family descriptor.
    """

    def patch(values, side_effect=None):
        def fake_sup(f, ds, fam, delta, **kwargs):
            if side_effect is not None:
                raise side_effect
            return factories.SeriesBoundFactory(
                family=fam.descriptor,
                delta=delta,
                point_estimate=0.0,
                upper_bound=values[fam.descriptor],
            )

        return mocker.patch.object(certificates, "family_sup", side_effect=fake_sup)

    return patch


@pytest.fixture
def certifier(mocker, fake_domains, serial_engine):
    """
    A certifier whose domain system and expansion profile are stubbed out.
    """

    def make(profile=None, context_error=None):
        profile = profile or factories.ExpansionProfileFactory(k_est=1.0, eps_est=0.3)
        if context_error is not None:
            mocker.patch.object(_CertifierImpl, "context", side_effect=context_error)
        else:
            context = _Context(fj.UnimodalQuadratic(1.99), fake_domains, profile)
            mocker.patch.object(_CertifierImpl, "context", return_value=context)
        mocker.patch.object(_CertifierImpl, "_residual", return_value=0.01)
        return fj.Certifier(engine=serial_engine, budget=fj.SeriesBudget(), max_workers=1)

    return make


@pytest.mark.parametrize(
    "alpha, beta, gamma, expected",
    [
        (1.0, 0.5, 0.0, 2.0),
        (1.0, 1.0 / 3.0, 1.0 / 36.0, 1.6077),
        (1.21, 0.11, 0.0025, 1.36478),
    ],
)
def test_quadratic_fixed_point(alpha, beta, gamma, expected):
    solution = fj.solve_quadratic_fixed_point(alpha, beta, gamma)

    assert solution.s == pytest.approx(expected, rel=1e-4)
    assert solution.residual <= 1e-12 * max(1.0, solution.s)
    assert solution.trace[0] == alpha
    assert solution.trace == sorted(solution.trace)
    assert solution.trace[-1] <= solution.s


@pytest.mark.parametrize("alpha, beta, gamma", [(1.0, 0.5, 1.0), (1.0, 1.0, 0.0), (1.0, 1.5, 0.0)])
def test_quadratic_without_fixed_point(alpha, beta, gamma):
    assert fj.solve_quadratic_fixed_point(alpha, beta, gamma) is None


def test_sufficient_shape():
    assert sufficient_shape(factories.QuadraticRecursionFactory())
    assert not sufficient_shape(factories.QuadraticRecursionFactory(b1=0.4))


def test_recursion_coefficients():
    recursion = types.QuadraticRecursion.from_sups(1.8, **DIRECT_SUPS)

    assert recursion.alpha == pytest.approx(1.21)
    assert recursion.beta == pytest.approx(0.11)
    assert recursion.gamma == pytest.approx(0.0025)


def test_uv_recursion_step():
    sups = types.UVSups(s_v=0.01, s_a=0.1, s_q=1.0, s_n=0.01)

    u, v = fj.uv_recursion_step(0.1, sups)

    assert v == pytest.approx(0.101 / 0.899)
    assert u == pytest.approx(0.01 + 0.1 * (1 + 0.101 / 0.899) * 0.1 * 2.0)
    assert fj.uv_recursion_step(0.0, sups) == (0.01, 0.0)


def test_uv_recursion_step_noncontractive():
    sups = types.UVSups(s_v=0.01, s_a=0.1, s_q=1.0, s_n=0.02)

    with pytest.raises(fj.CertificateError) as excinfo:
        fj.uv_recursion_step(0.99, sups)

    assert excinfo.value.code == fj.ErrorCode.noncontractive


def test_threshold_induction_stays_small():
    u_trace, v_trace = fj.fixed_threshold_induction(2.0, 100)

    assert len(u_trace) == 101
    assert len(v_trace) == 100
    assert u_trace[0] == 0.0
    assert max(u_trace) <= 0.1
    assert max(v_trace) <= 0.25


def test_threshold_induction_rejects_negative_k():
    with pytest.raises(fj.ConfigError):
        fj.fixed_threshold_induction(-1.0)


def test_threshold_checks():
    checks = threshold_checks(0.005, 0.05, 2.0, 0.02)

    assert checks == {
        "q1 < 1/100": True,
        "q2 < 1/(5K+5)": True,
        "q3 < 2K": True,
        "q4 < 1/100": False,
    }


def test_area_certificate_direct():
    certificate = fj.area_certificate_from_sups(6, 0.05, 0.01, 1 / 15, 4.0, 0.01, area_ratio=0.01)

    assert certificate.status == fj.CertificateStatus.certified
    assert len(certificate.u_trace) == 31
    assert certificate.u_cap == pytest.approx(2 * max(certificate.u_trace[1:6]))
    assert max(certificate.u_trace) <= certificate.u_cap
    assert certificate.escape_area_bound == pytest.approx(certificate.u_cap + 0.01)
    assert certificate.escape_area_bound < 1


def test_area_certificate_direct_blows_up():
    certificate = fj.area_certificate_from_sups(6, 0.05, 0.5, 1.0, 1.0, 0.5, area_ratio=0.01)

    assert certificate.status == fj.CertificateStatus.failed
    assert certificate.failed_at == 2
    assert "u (1 + s_n) >= 1" in certificate.error


def test_area_certificate_direct_exceeds_cap():
    certificate = fj.area_certificate_from_sups(6, 0.05, 0.01, 0.45, 1.0, 0.0, area_ratio=0.01, k_max=100)

    assert certificate.status == fj.CertificateStatus.failed
    assert certificate.failed_at is not None


def test_area_certificate_fixed_threshold():
    certificate = fj.area_certificate_from_sups(
        6, 0.05, 0.005, 0.05, 2.0, 0.005, area_ratio=0.1, mode=fj.AreaMode.fixed_threshold
    )

    assert certificate.status == fj.CertificateStatus.certified
    assert certificate.u_cap == 0.1
    assert certificate.escape_area_bound == pytest.approx(0.2)
    assert all(certificate.threshold_checks.values())


def test_area_certificate_fixed_threshold_violated():
    certificate = fj.area_certificate_from_sups(
        6, 0.05, 0.5, 0.05, 2.0, 0.005, area_ratio=0.1, mode=fj.AreaMode.fixed_threshold
    )

    assert certificate.status == fj.CertificateStatus.failed
    assert "q1 < 1/100" in certificate.error
    assert not certificate.threshold_checks["q1 < 1/100"]


def test_area_certificate_requires_small_area_ratio():
    certificate = fj.area_certificate_from_sups(
        6, 0.05, 0.005, 0.05, 2.0, 0.005, area_ratio=0.95, mode=fj.AreaMode.fixed_threshold
    )

    assert certificate.status == fj.CertificateStatus.failed
    assert certificate.escape_area_bound >= 1


def test_certify_delta(certifier, patch_sups):
    sup = patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))

    certificate = certifier().certify_delta(6, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.certified
    assert certificate.recursion.alpha == pytest.approx(1.21)
    assert certificate.recursion.beta == pytest.approx(0.11)
    assert certificate.recursion.gamma == pytest.approx(0.0025)
    assert certificate.fixed_point.s == pytest.approx(1.36478, rel=1e-4)
    assert certificate.sufficient_shape
    assert certificate.residual == 0.01
    assert certificate.version == fj.__version__
    assert [b.family for b in certificate.recursion.inputs] == list(DIRECT_FAMILIES.values())
    assert sup.call_count == 6


def test_certificate_exposes_coefficients_at_top_level(certifier, patch_sups, tmp_path):
    patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))

    certificate = certifier().certify_delta(6, 0.05, 1.8)
    path = reports.write_report(certificate, tmp_path / "certificate.json")
    data = json.loads(path.read_text())

    required = {"period", "rho", "delta", "alpha", "beta", "gamma", "fixed_point", "status", "residual", "inputs"}
    assert required <= set(data)
    assert {"config", "version"} <= set(data)
    assert (data["alpha"], data["beta"], data["gamma"]) == pytest.approx((1.21, 0.11, 0.0025))
    assert [b["family"] for b in data["inputs"]] == list(DIRECT_FAMILIES.values())
    assert reports.read_report(path, types.DeltaCertificate) == certificate


def test_certify_delta_async(certifier, patch_sups):
    patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))

    future = certifier().certify_delta_async(6, 0.05, 1.8)

    assert future.result().status == fj.CertificateStatus.certified


def test_certify_delta_without_fixed_point(certifier, patch_sups):
    values = dict(DIRECT_SUPS, b1=0.5, b2=0.5, b3=0.5)
    patch_sups(by_descriptor(DIRECT_FAMILIES, values))

    certificate = certifier().certify_delta(6, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.no_fixed_point
    assert certificate.recursion.beta == pytest.approx(1.1)
    assert certificate.fixed_point is None
    assert not certificate.sufficient_shape


def test_certify_delta_with_unbounded_sup(certifier, patch_sups):
    values = dict(DIRECT_SUPS, a2=math.inf)
    patch_sups(by_descriptor(DIRECT_FAMILIES, values))

    certificate = certifier().certify_delta(6, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.input_divergent
    assert DIRECT_FAMILIES["a2"] in certificate.error


def test_certify_delta_with_divergent_tail(certifier, patch_sups):
    sup = patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))
    profile = factories.ExpansionProfileFactory(eps_est=1.9)

    certificate = certifier(profile=profile).certify_delta(6, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.input_divergent
    assert "tail ratio" in certificate.error
    assert sup.call_count == 0


def test_certify_delta_at_or_below_one(certifier, patch_sups):
    patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))

    certificate = certifier().certify_delta(6, 0.05, 0.9)

    assert certificate.status == fj.CertificateStatus.input_divergent


@pytest.mark.parametrize("delta", [0.0, -1.0, 2.5])
def test_certify_delta_rejects_delta_out_of_range(certifier, delta):
    with pytest.raises(fj.ConfigError):
        certifier().certify_delta(6, 0.05, delta)


def test_certify_delta_reports_failed_geometry(certifier):
    error = fj.RenormalizationError("U' is not inside V'", fj.ErrorCode.nesting_violation)

    certificate = certifier(context_error=error).certify_delta(6, 0.05, 1.8)

    assert certificate.status == fj.CertificateStatus.failed
    assert "not inside" in certificate.error


@pytest.mark.parametrize(
    "code, status",
    [
        (fj.ErrorCode.divergent_tail, fj.CertificateStatus.input_divergent),
        (fj.ErrorCode.critical_hit, fj.CertificateStatus.failed),
    ],
)
def test_certify_delta_series_errors(certifier, patch_sups, code, status):
    patch_sups({}, side_effect=fj.SeriesError("series trouble", code))

    certificate = certifier().certify_delta(6, 0.05, 1.8)

    assert certificate.status == status
    assert certificate.error == "series trouble"


def test_dominating_mode_uses_dominating_families(certifier, patch_sups):
    sup = patch_sups(by_descriptor(DOMINATING_FAMILIES, {"return": 0.1, "outer": 0.2, "annulus": 0.05}))

    certificate = certifier().certify_delta(6, 0.05, 1.8, mode=fj.RecursionMode.dominating)
    recursion = certificate.recursion

    assert sup.call_count == 3
    assert recursion.mode == fj.RecursionMode.dominating
    assert (recursion.a1, recursion.a3) == (0.1, 0.1)
    assert (recursion.a2, recursion.b2) == (0.2, 0.2)
    assert (recursion.b1, recursion.b3) == (0.05, 0.05)
    assert len(recursion.inputs) == 3


@pytest.fixture
def threshold_probe(mocker):
    """
    Stubs single certificates: certified exactly when delta reaches the threshold.
    """

    def patch(threshold):
        def fake_certify(p, rho, delta, f=None, mode=None):
            if delta >= threshold:
                return factories.DeltaCertificateFactory(period=p, rho=rho, delta=delta)
            return factories.DeltaCertificateFactory(
                period=p,
                rho=rho,
                delta=delta,
                status=fj.CertificateStatus.no_fixed_point,
                fixed_point=None,
            )

        return mocker.patch.object(_CertifierImpl, "certify_delta", side_effect=fake_certify)

    return patch


def test_bisect_delta(threshold_probe, serial_engine):
    threshold_probe(1.55)

    result = fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta(6, 0.05, (1.0, 2.0), 0.05)

    assert 1.55 <= result.delta_star <= 1.60
    assert result.certificate.delta == result.delta_star
    assert result.monotone
    assert [probe.delta for probe in result.chain][:3] == [2.0, 1.0, 1.5]
    assert len(result.chain) == 9


def test_bisect_delta_lower_endpoint_certified(threshold_probe, serial_engine):
    threshold_probe(0.5)

    result = fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta(6, 0.05, (1.2, 2.0), 0.05)

    assert result.delta_star == 1.2
    assert len(result.chain) == 4


def test_bisect_delta_upper_endpoint_fails(threshold_probe, serial_engine):
    threshold_probe(2.5)

    with pytest.raises(fj.CertificateError) as excinfo:
        fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta(6, 0.05, (1.0, 2.0), 0.05)

    assert excinfo.value.code == fj.ErrorCode.uncertifiable_range


def test_bisect_delta_rejects_a_gap_above_the_bound(mocker, serial_engine):
    def fake_certify(p, rho, delta, f=None, mode=None):
        if delta >= 1.55 and not 1.8 < delta < 1.9:
            return factories.DeltaCertificateFactory(period=p, rho=rho, delta=delta)
        return factories.DeltaCertificateFactory(
            period=p,
            rho=rho,
            delta=delta,
            status=fj.CertificateStatus.no_fixed_point,
            fixed_point=None,
        )

    certify = mocker.patch.object(_CertifierImpl, "certify_delta", side_effect=fake_certify)

    with pytest.raises(fj.CertificateError) as excinfo:
        fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta(6, 0.05, (1.0, 2.0), 0.05)

    assert excinfo.value.code == fj.ErrorCode.nonmonotone
    assert 1.8 < certify.call_args_list[-1].args[2] < 1.9


def test_bisect_delta_async(threshold_probe, serial_engine):
    threshold_probe(1.55)

    future = fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta_async(6, 0.05, (1.0, 2.0), 0.05)

    assert 1.55 <= future.result().delta_star <= 1.60


@pytest.mark.parametrize("delta_range, tol", [((1.5, 1.2), 0.05), ((1.0, 2.5), 0.05), ((1.0, 2.0), 0.0)])
def test_bisect_delta_validates(serial_engine, delta_range, tol):
    with pytest.raises(fj.ConfigError):
        fj.Certifier(engine=serial_engine, max_workers=1).bisect_delta(6, 0.05, delta_range, tol)


def test_monotone_chain():
    certified = fj.CertificateStatus.certified
    failed = fj.CertificateStatus.no_fixed_point

    assert _monotone([types.DeltaProbe(delta=2.0, status=certified), types.DeltaProbe(delta=1.5, status=failed)])
    assert not _monotone(
        [
            types.DeltaProbe(delta=1.5, status=certified),
            types.DeltaProbe(delta=1.75, status=failed),
        ]
    )


def test_delta_trend(mocker, serial_engine):
    stars = {5: 1.9, 6: 1.85}

    def fake_bisect(p, rho, delta_range, tol, f=None, mode=None):
        if p not in stars:
            raise fj.CertificateError("upper endpoint fails", fj.ErrorCode.uncertifiable_range)
        return SimpleNamespace(delta_star=stars[p])

    mocker.patch.object(_CertifierImpl, "bisect_delta", side_effect=fake_bisect)

    trend = fj.Certifier(engine=serial_engine, max_workers=1).delta_trend([5, 6, 7], 0.05, (1.0, 2.0), 0.05)

    assert [row.delta_star for row in trend.rows] == [1.9, 1.85, None]
    assert trend.rows[2].status == fj.CertificateStatus.failed
    assert trend.nonincreasing


def test_delta_trend_detects_growth(mocker, serial_engine):
    mocker.patch.object(
        _CertifierImpl,
        "bisect_delta",
        side_effect=lambda p, *args, **kwargs: SimpleNamespace(delta_star=1.5 + 0.1 * p),
    )

    trend = fj.Certifier(engine=serial_engine, max_workers=1).delta_trend([5, 6], 0.05, (1.0, 2.0), 0.05)

    assert not trend.nonincreasing


def test_certify_area(certifier, patch_sups):
    patch_sups(by_descriptor(AREA_FAMILIES, {"q1": 0.01, "q2": 1 / 15, "q3": 4.0, "q4": 0.01}))

    certificate = certifier().certify_area(6, 0.05)

    assert certificate.status == fj.CertificateStatus.certified
    assert certificate.area_ratio == pytest.approx(0.01)
    assert certificate.k_value == 4.0
    assert [b.family for b in certificate.inputs] == list(AREA_FAMILIES.values())


def test_certify_area_async(certifier, patch_sups):
    patch_sups(by_descriptor(AREA_FAMILIES, {"q1": 0.01, "q2": 1 / 15, "q3": 4.0, "q4": 0.01}))

    future = certifier().certify_area_async(6, 0.05)

    assert future.result().status == fj.CertificateStatus.certified


def test_certify_area_reports_failure(certifier):
    error = fj.RenormalizationError("no bracket", fj.ErrorCode.no_bracket)

    certificate = certifier(context_error=error).certify_area(6, 0.05)

    assert certificate.status == fj.CertificateStatus.failed
    assert math.isnan(certificate.q1)
    assert certificate.error == "no bracket"


def test_module_level_certify_delta(certifier, patch_sups):
    certifier()
    patch_sups(by_descriptor(DIRECT_FAMILIES, DIRECT_SUPS))

    certificate = fj.certify_delta(None, 6, 0.05, 1.8, budget=fj.SeriesBudget())

    assert certificate.status == fj.CertificateStatus.certified


def test_render_summary_of_delta_certificate():
    text = fj.render_summary(factories.DeltaCertificateFactory())

    assert "status: certified" in text
    assert "fixed point s=" in text
    assert "sufficient shape: yes" in text
    assert text.endswith("\n")


def test_render_summary_of_area_certificate():
    certificate = fj.area_certificate_from_sups(
        6, 0.05, 0.5, 0.05, 2.0, 0.005, area_ratio=0.1, mode=fj.AreaMode.fixed_threshold
    )

    text = fj.render_summary(certificate)

    assert "q1 < 1/100: fail" in text
    assert "error: thresholds violated" in text


def test_render_summary_rejects_other_records():
    with pytest.raises(TypeError):
        fj.render_summary(factories.GridSpecFactory())
