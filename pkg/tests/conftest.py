import os

import numpy as np
import pytest

from tradespin import AnchorSpec, build_trade_network, trade_weights
from tradespin.synthetic import three_country, two_hub


def naive_shares(M):
    """Share matrices and probabilities from a raw matrix with plain loops.

    ``M[i][j]`` is the flow exported by j to i. Independent of the package.
    """
    n = len(M)
    exports = [sum(M[i][j] for i in range(n)) for j in range(n)]
    imports = [sum(M[i][j] for j in range(n)) for i in range(n)]
    total = sum(exports)
    S = [[M[i][j] / exports[j] if exports[j] else 0.0 for j in range(n)] for i in range(n)]
    Ss = [[M[j][i] / imports[j] if imports[j] else 0.0 for j in range(n)] for i in range(n)]
    P = [imports[c] / total for c in range(n)]
    Ps = [exports[c] / total for c in range(n)]
    return S, Ss, P, Ps


def naive_energy(M, sigma, c, weight=None):
    S, Ss, P, Ps = naive_shares(M)
    n = len(M)
    e = 0.0
    for cp in range(n):
        if cp == c:
            continue
        w = P[cp] + Ps[cp] if weight is None else weight[cp]
        e += 0.5 * sigma[cp] * (S[cp][c] + Ss[cp][c]) * w
    return e


@pytest.fixture
def toy():
    m = three_country()
    net = build_trade_network(m)
    return m, net, trade_weights(net), AnchorSpec({"A"}, {"B"})


@pytest.fixture(scope="session")
def hub():
    m = two_hub()
    net = build_trade_network(m)
    return m, net, trade_weights(net), AnchorSpec({"US"}, {"CN"})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def comtrade():
    """Loader for user-supplied UN Comtrade aggregates.

    Set ``TRADESPIN_COMTRADE`` to a flow CSV covering 2010, 2019 and 2020
    (optionally ``TRADESPIN_REGISTRY`` to a country registry and
    ``TRADESPIN_RUNS`` to the runs per grid point, default 1000).
    """
    path = os.environ.get("TRADESPIN_COMTRADE")
    if not path:
        pytest.skip("TRADESPIN_COMTRADE not set; reference-data criteria need the UN Comtrade aggregates")
    from tradespin.io import read_flows
    registry = os.environ.get("TRADESPIN_REGISTRY")
    cache = {}

    def load(year):
        if year not in cache:
            m, _ = read_flows(path, year, registry)
            cache[year] = (m, build_trade_network(m))
        return cache[year]

    load.runs = int(os.environ.get("TRADESPIN_RUNS", "1000"))
    load.workers = int(os.environ.get("TRADESPIN_WORKERS", str(os.cpu_count() or 1)))
    return load


# -- acceptance reporting --------------------------------------------------
# Tests marked ``acceptance(id, title)`` get one PASS/FAIL/SKIP line each in
# the terminal summary.

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(cid, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = report.__dict__.get("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        _ACCEPTANCE[marker] = status


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("acceptance")
    if m is not None:
        outcome.get_result().__dict__["acceptance"] = m.args


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")

    def key(args):
        cid = args[0]
        return (int("".join(ch for ch in cid if ch.isdigit()) or 0), cid)

    for args in sorted(_ACCEPTANCE, key=key):
        cid, title = args
        terminalreporter.write_line(f"{_ACCEPTANCE[args]:<4}  {cid:<4} {title}")
