from types import SimpleNamespace

import pytest

import feigenjulia as fj
from feigenjulia.regions import Disk


@pytest.fixture(scope="session", autouse=True)
def faker_seed():
    """
    Seeds the faker library with a constant value.

    See: https://faker.readthedocs.io/en/master/pytest-fixtures.html
    """
    return 12345


@pytest.fixture
def engine():
    """
    A two-worker engine, independent of the package-wide default.
    """
    engine = fj.Engine(settings=fj.Settings(threads=2))
    yield engine
    engine.shutdown()


@pytest.fixture
def serial_engine():
    engine = fj.Engine(settings=fj.Settings(threads=1))
    yield engine
    engine.shutdown()


@pytest.fixture
def fake_domains():
    """
    A stand-in for a domain system: nested disks carrying the region names
    the orbit-family parser resolves, plus the geometry certificates read.
    """

    u = Disk(0, 0.5).named("U")
    u_prime = Disk(0, 0.01).named("U'")
    v = Disk(0, 0.05).named("V")
    v_prime = Disk(0, 0.02).named("V'")
    a = (u - v).named("A")
    a_prime = (v - v_prime).named("A'")
    return SimpleNamespace(
        u=u,
        u_prime=u_prime,
        v=v,
        v_prime=v_prime,
        a=a,
        a_prime=a_prime,
        diam_u_prime=0.01,
        u_k=lambda k: Disk(0, 0.02 * 0.1**k),
        v_k=lambda k: Disk(0, 0.05 * 0.1**k),
        a_k=lambda k: Disk(0, 0.05 * 0.1**k) - Disk(0, 0.02 * 0.1**k),
        b_k=lambda k: Disk(0, 0.5) - Disk(0, 0.05 * 0.1**k),
    )
