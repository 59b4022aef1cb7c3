import numpy as np
import pytest

from quadzip import annulus_domain, blob_domain, build_g_16, disc_domain, quadrature_data
from quadzip.zip import pack


@pytest.fixture(scope="session")
def disc():
    return disc_domain()


@pytest.fixture(scope="session")
def annulus():
    return annulus_domain(0.5)


@pytest.fixture(scope="session")
def blob3():
    return blob_domain(3, 7)


@pytest.fixture(scope="session")
def annulus_map(annulus):
    """Quadratized annulus at fit tolerance 1e-4, base point 0.7."""
    return build_g_16(annulus, 0.7, 1e-4)


@pytest.fixture(scope="session")
def annulus_data(annulus_map):
    return quadrature_data(annulus_map)


@pytest.fixture(scope="session")
def annulus_archive(annulus_map, annulus_data):
    return pack(annulus_map, annulus_data)


@pytest.fixture(scope="session")
def disc_map(disc):
    return build_g_16(disc, 0.0, 1e-8)


@pytest.fixture(scope="session")
def interior_annulus_points():
    rng = np.random.default_rng(11)
    r = np.sqrt(rng.uniform(0.6 ** 2, 0.9 ** 2, 20))
    return r * np.exp(2j * np.pi * rng.uniform(size=20))


_ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """record(k, ok, detail) stores the outcome of acceptance criterion k."""
    def _record(k: int, ok: bool, detail: str):
        _ACCEPTANCE[k] = (bool(ok), detail)
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
