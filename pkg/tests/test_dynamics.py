import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tradespin import (
    AnchorSpec,
    CountryTable,
    LocalField,
    MoneyMatrix,
    SpinConfig,
    apply_flip_rule,
    build_trade_network,
    enumerate_fixed_points,
    interaction_energy,
    is_fixed_point,
    relax,
    scale_matrix,
    sweep,
    trade_weights,
)
from tradespin.dynamics import local_fields
from tradespin.synthetic import random_money_matrix

from conftest import naive_energy


def config(sigma, anchors, table):
    return SpinConfig.from_anchors(sigma, anchors, table)


def test_toy_field_hand_value(toy):
    m, net, w, anchors = toy
    for sc in (-1, 1):
        s = config([-1, 1, sc], anchors, net.table)
        # 1/2 * [(-1)(0.5)(0.5) + (+1)(1.5)(5/6)]
        assert interaction_energy(net, w, s, 2).value == pytest.approx(0.5, abs=1e-15)


def test_all_usd_partners_gives_negative_field(toy):
    m, net, w, anchors = toy
    s = SpinConfig([-1, -1, 1], [False, False, False])
    assert interaction_energy(net, w, s, 2).value < 0


def test_field_matches_naive_and_is_local(rng):
    for _ in range(50):
        n = int(rng.integers(2, 15))
        m = random_money_matrix(rng, n)
        net = build_trade_network(m)
        w = trade_weights(net)
        sigma = rng.choice([-1, 1], size=n)
        c = int(rng.integers(n))
        s = SpinConfig(sigma, np.zeros(n, bool))
        e = interaction_energy(net, w, s, c).value
        assert e == pytest.approx(naive_energy(m.values.tolist(), sigma.tolist(), c), abs=1e-14)
        flipped = sigma.copy()
        flipped[c] *= -1
        assert interaction_energy(net, w, SpinConfig(flipped, s.fixed_mask), c).value == e


def test_flip_rule():
    assert apply_flip_rule(LocalField(0, -0.3), 1) == -1
    assert apply_flip_rule(LocalField(0, 0.5), -1) == 1
    assert apply_flip_rule(LocalField(0, 0.0), 1) == 1
    assert apply_flip_rule(0.0, -1) == -1
    with pytest.raises(ValueError):
        apply_flip_rule(float("nan"), 1)
    with pytest.raises(ValueError):
        LocalField(0, float("inf"))


def test_spin_config_validation():
    with pytest.raises(ValueError):
        SpinConfig([1, 0, -1], [False] * 3)
    with pytest.raises(ValueError):
        SpinConfig([1, -1], [False] * 3)


def test_anchor_spec_validation():
    t = CountryTable(("A", "B", "C"))
    with pytest.raises(ValueError):
        AnchorSpec({"A"}, {"A"})
    with pytest.raises(ValueError):
        AnchorSpec(set(), {"A"})
    with pytest.raises(ValueError):
        AnchorSpec({"A"}, {"Q"}).validate(t)


def test_sweep_all_anchored_is_identity():
    m = MoneyMatrix.from_flows(0, [("A", "B", 1.0), ("B", "A", 2.0)], CountryTable(("A", "B")))
    net = build_trade_network(m)
    anchors = AnchorSpec({"A"}, {"B"})
    s = config([1, 1], anchors, net.table)
    out = sweep(net, trade_weights(net), s, np.random.default_rng(0))
    assert out == s
    assert is_fixed_point(net, trade_weights(net), s)


def test_sweep_toy_sets_c_to_cny(toy):
    m, net, w, anchors = toy
    for sc in (-1, 1):
        out = sweep(net, w, config([-1, 1, sc], anchors, net.table), np.random.default_rng(sc + 5))
        assert out.sigma[2] == 1


def test_field_evaluations_per_sweep(rng):
    m = random_money_matrix(rng, 194, density=0.3)
    net = build_trade_network(m)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    s = config(np.ones(194), anchors, net.table)
    res = relax(net, trade_weights(net), s, tau_max=1, rng=rng)
    assert res.field_evaluations == 192


def test_relax_toy_both_initial_states(toy):
    m, net, w, anchors = toy
    for sc in (-1, 1):
        res = relax(net, w, config([-1, 1, sc], anchors, net.table), 10, np.random.default_rng(0))
        assert res.converged
        assert res.final.sigma.tolist() == [-1, 1, 1]
        assert res.f_final == pytest.approx(1 / 3)
        assert res.trajectory[0] == (0, (1 + (sc < 0)) / 3)


def test_relax_fixed_point_input(toy):
    m, net, w, anchors = toy
    s = config([-1, 1, 1], anchors, net.table)
    res = relax(net, w, s, 10, np.random.default_rng(0))
    assert res.converged and res.tau_stop == 1
    assert [f for _, f in res.trajectory] == [1 / 3, 1 / 3]
    assert [t for t, _ in res.trajectory] == [0, 1]


def test_relax_rejects_zero_budget(toy):
    m, net, w, anchors = toy
    with pytest.raises(ValueError):
        relax(net, w, config([1, 1, 1], anchors, net.table), 0)


def test_enumerate_toy(toy):
    m, net, w, anchors = toy
    fps = enumerate_fixed_points(net, w, anchors)
    assert fps == {config([-1, 1, 1], anchors, net.table)}
    assert not is_fixed_point(net, w, config([-1, 1, -1], anchors, net.table))


def test_enumerate_usd_only_partners():
    # X and Y only trade with the USD anchor U; K (CNY anchor) trades with U only
    t = CountryTable(("U", "K", "X", "Y"))
    flows = [("U", "X", 1.0), ("X", "U", 1.0), ("U", "Y", 2.0), ("Y", "U", 1.0), ("U", "K", 1.0), ("K", "U", 1.0)]
    net = build_trade_network(MoneyMatrix.from_flows(0, flows, t))
    anchors = AnchorSpec({"U"}, {"K"})
    fps = enumerate_fixed_points(net, trade_weights(net), anchors)
    assert fps == {config([-1, 1, -1, -1], anchors, t)}


def test_enumerate_limit(rng):
    m = random_money_matrix(rng, 23)
    net = build_trade_network(m)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    with pytest.raises(ValueError):
        enumerate_fixed_points(net, trade_weights(net), anchors, max_free=20)


def brute_fixed_points(M, anchors_idx, n):
    """Fixed points by direct evaluation of the naive field for every assignment."""
    free = [i for i in range(n) if i not in anchors_idx]
    out = set()
    for bits in itertools.product([-1, 1], repeat=len(free)):
        sigma = [0] * n
        for i, v in anchors_idx.items():
            sigma[i] = v
        for i, b in zip(free, bits):
            sigma[i] = b
        ok = True
        for c in free:
            e = naive_energy(M, sigma, c)
            if (e < 0 and sigma[c] != -1) or (e > 0 and sigma[c] != 1):
                ok = False
                break
        if ok:
            out.add(tuple(sigma))
    return out


def test_enumeration_matches_naive_bruteforce(rng):
    for _ in range(15):
        n = int(rng.integers(3, 9))
        m = random_money_matrix(rng, n, density=0.6)
        net = build_trade_network(m)
        anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
        fps = enumerate_fixed_points(net, trade_weights(net), anchors)
        expected = brute_fixed_points(m.values.tolist(), {0: -1, 1: 1}, n)
        assert {tuple(int(x) for x in f.sigma) for f in fps} == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(3, 12))
def test_anchor_immutability_and_containment(seed, n):
    rng = np.random.default_rng(seed)
    m = random_money_matrix(rng, n, density=0.5)
    net = build_trade_network(m)
    w = trade_weights(net)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    s = config(rng.choice([-1, 1], n), anchors, net.table)
    res = relax(net, w, s, 10, rng)
    assert res.final.sigma[0] == -1 and res.final.sigma[1] == 1
    taus = [t for t, _ in res.trajectory]
    assert taus == list(range(len(taus)))
    assert all(0 <= f <= 1 for _, f in res.trajectory)
    if res.converged:
        assert is_fixed_point(net, w, res.final)
        assert res.final in enumerate_fixed_points(net, w, anchors)


def test_negation_antisymmetry(rng):
    for _ in range(20):
        n = int(rng.integers(2, 20))
        net = build_trade_network(random_money_matrix(rng, n))
        w = trade_weights(net)
        sigma = rng.choice([-1, 1], n)
        mask = np.zeros(n, bool)
        a = local_fields(net, w, SpinConfig(sigma, mask))
        b = local_fields(net, w, SpinConfig(-sigma, mask))
        assert np.array_equal(a, -b)


def test_determinism(rng):
    m = random_money_matrix(rng, 40)
    net = build_trade_network(m)
    w = trade_weights(net)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    s = config(rng.choice([-1, 1], 40), anchors, net.table)
    a = relax(net, w, s, 10, np.random.default_rng(99))
    b = relax(net, w, s, 10, np.random.default_rng(99))
    assert a == b


def test_scale_invariance_of_relax(rng):
    m = random_money_matrix(rng, 30)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    s = config(rng.choice([-1, 1], 30), anchors, m.table)
    ref = None
    for lam in (1.0, 0.5, 3.0, 1e6):
        net = build_trade_network(scale_matrix(m, lam))
        res = relax(net, trade_weights(net), s, 10, np.random.default_rng(7))
        if ref is None:
            ref = res
        assert res.trajectory == ref.trajectory and res.final == ref.final


def test_replacement_order_reports_fixed_points(rng):
    m = random_money_matrix(rng, 10)
    net = build_trade_network(m)
    w = trade_weights(net)
    anchors = AnchorSpec({m.table.codes[0]}, {m.table.codes[1]})
    fps = enumerate_fixed_points(net, w, anchors)
    for seed in range(20):
        s = config(np.random.default_rng(seed).choice([-1, 1], 10), anchors, net.table)
        res = relax(net, w, s, 30, np.random.default_rng(seed), order="replacement")
        if res.converged:
            assert res.final in fps
    with pytest.raises(ValueError):
        relax(net, w, s, 3, np.random.default_rng(0), order="shuffle")
