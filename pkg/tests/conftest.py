from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def theories():
    from stonegpd import catalog
    return {name: catalog.load(name) for name in catalog.NAMES}


@pytest.fixture(scope="session")
def teq2():
    from stonegpd import catalog
    from stonegpd.logical import logical_groupoid
    t = catalog.load("t_eq")
    return logical_groupoid(t, 2, catalog.tracked(t))


@pytest.fixture(scope="session")
def graph2():
    from stonegpd import catalog
    from stonegpd.logical import logical_groupoid
    t = catalog.load("t_graph")
    return logical_groupoid(t, 2, catalog.tracked(t))
