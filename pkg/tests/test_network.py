import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tradespin import CountryTable, MoneyMatrix, build_trade_network, scale_matrix, top_countries
from tradespin.synthetic import three_country

from conftest import naive_shares


def single_edge():
    # one flow A -> B of value 7
    return MoneyMatrix.from_flows(2010, [("A", "B", 7.0)], CountryTable(("A", "B")))


def test_single_edge_normalization():
    net = build_trade_network(single_edge())
    A, B = 0, 1
    assert net.S[B, A] == 1
    # all of B's imports come from A; A imports nothing
    assert net.S_star[A, B] == 1
    assert np.all(net.S_star[:, A] == 0)
    assert net.P[B] == 1 and net.P_star[A] == 1
    assert net.P[A] == 0 and net.P_star[B] == 0
    # B exports nothing: its S column is zero, not NaN
    assert np.all(net.S[:, B] == 0)
    assert np.all(np.isfinite(net.S)) and np.all(np.isfinite(net.S_star))


def test_three_country_hand_values():
    net = build_trade_network(three_country())
    A, B, C = range(3)
    assert net.M_total == 120
    np.testing.assert_allclose(net.P, [0.25, 5 / 12, 1 / 3], rtol=0, atol=1e-15)
    np.testing.assert_allclose(net.P_star, [0.25, 5 / 12, 1 / 3], rtol=0, atol=1e-15)
    assert net.S[A, C] == pytest.approx(0.25, abs=1e-15)
    assert net.S_star[A, C] == pytest.approx(0.25, abs=1e-15)
    assert net.S[B, C] == pytest.approx(0.75, abs=1e-15)
    assert net.S_star[B, C] == pytest.approx(0.75, abs=1e-15)


def test_matches_naive_loops():
    rng = np.random.default_rng(3)
    M = rng.random((6, 6)) * (rng.random((6, 6)) < 0.6)
    np.fill_diagonal(M, 0)
    M[0, :] = 0
    M[:, 0] = 0
    M[1, 2] = 1.0
    net = build_trade_network(MoneyMatrix(2000, M, CountryTable(tuple("ABCDEF"))))
    S, Ss, P, Ps = naive_shares(M.tolist())
    np.testing.assert_allclose(net.S, S, atol=1e-15)
    np.testing.assert_allclose(net.S_star, Ss, atol=1e-15)
    np.testing.assert_allclose(net.P, P, atol=1e-15)
    np.testing.assert_allclose(net.P_star, Ps, atol=1e-15)


def test_top_countries():
    net = build_trade_network(single_edge())
    assert top_countries(net, "export", 1) == ["A"]
    assert top_countries(net, "import", 2) == ["B", "A"]
    # ties broken by iso code
    net3 = build_trade_network(MoneyMatrix.from_flows(
        0, [("A", "B", 1), ("B", "A", 1), ("C", "D", 1), ("D", "C", 1)], CountryTable(tuple("DCBA"))))
    assert top_countries(net3, "import", 4) == ["A", "B", "C", "D"]
    with pytest.raises(ValueError):
        top_countries(net, "import", 0)
    with pytest.raises(ValueError):
        top_countries(net, "sideways", 1)


def test_scale_matrix():
    m = three_country()
    assert np.array_equal(scale_matrix(m, 1).values, m.values)
    a, b = build_trade_network(m), build_trade_network(scale_matrix(m, 2))
    for name in ("S", "S_star", "P", "P_star"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    for bad in (0, -1.0):
        with pytest.raises(ValueError):
            scale_matrix(m, bad)


def test_matrix_validation(caplog):
    t = CountryTable(("A", "B"))
    with pytest.raises(ValueError):
        MoneyMatrix(0, np.zeros((2, 2)), t)
    with pytest.raises(ValueError):
        MoneyMatrix(0, [[0, -1], [1, 0]], t)
    with pytest.raises(ValueError):
        MoneyMatrix(0, np.ones((3, 3)), t)
    m = MoneyMatrix(0, [[5.0, 1.0], [2.0, 0.0]], t)
    assert m.values[0, 0] == 0
    assert "self-trade" in caplog.text


def test_country_table_validation():
    with pytest.raises(ValueError):
        CountryTable(("A",))
    with pytest.raises(ValueError):
        CountryTable(("A", "A"))
    with pytest.raises(ValueError):
        CountryTable(("A", "b"))
    t = CountryTable(("US", "CN"), ("United States", "China"))
    assert t.entries() == [("US", 0, "United States"), ("CN", 1, "China")]


def test_isolated_country_retained():
    m = MoneyMatrix.from_flows(0, [("A", "B", 3.0), ("B", "A", 1.0)], CountryTable(("A", "B", "Z")))
    net = build_trade_network(m)
    z = net.table.index("Z")
    assert net.P[z] == 0 and net.P_star[z] == 0
    assert np.all(net.S[:, z] == 0) and np.all(net.S_star[:, z] == 0)


matrices = st.integers(2, 12).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(0, 1e6, allow_subnormal=False))
)


@settings(max_examples=60, deadline=None)
@given(matrices, st.sampled_from([0.5, 3.0, 1e6, 1e-3]))
def test_invariants_and_scale(M, lam):
    np.fill_diagonal(M, 0)
    if not (M > 0).any():
        M[0, 1] = 1.0
    n = len(M)
    m = MoneyMatrix(0, M, CountryTable(tuple(f"C{i}" for i in range(n))))
    net = build_trade_network(m)
    net.check()
    assert net.M_in.sum() == pytest.approx(m.values.sum(), rel=1e-12)
    scaled = build_trade_network(scale_matrix(m, lam))
    for name in ("S", "S_star", "P", "P_star"):
        np.testing.assert_allclose(getattr(scaled, name), getattr(net, name), rtol=0, atol=1e-12)
