"""Small synthetic trade networks with known behaviour, for tests and demos."""
from __future__ import annotations

import itertools

import numpy as np

from .network import CountryTable, MoneyMatrix


def _symmetric(flows, a, b, value):
    flows.append((a, b, value))
    flows.append((b, a, value))


def three_country(year: int = 2010) -> MoneyMatrix:
    """A<->B 20, A<->C 10, B<->C 30 (each direction); total volume 120.

    With A anchored to USD and B to CNY, the unique steady state puts C in CNY.
    """
    flows = []
    _symmetric(flows, "A", "B", 20.0)
    _symmetric(flows, "A", "C", 10.0)
    _symmetric(flows, "B", "C", 30.0)
    return MoneyMatrix.from_flows(year, flows, CountryTable(("A", "B", "C")))


def ring(n: int, year: int = 2000, value: float = 1.0) -> MoneyMatrix:
    """Each country trades ``value`` both ways with its two ring neighbours."""
    codes = tuple(f"R{i:02d}" if n <= 100 else f"R{i:03d}" for i in range(n))
    M = np.zeros((n, n))
    for i in range(n):
        M[(i + 1) % n, i] += value
        M[(i - 1) % n, i] += value
    return MoneyMatrix(year, M, CountryTable(codes))


def two_hub(year: int = 2000, hub_link: float = 2.0, cny_link: float = 20.0, intra: float = 5.0,
            cross: float = 0.2, hub_trade: float = 50.0) -> MoneyMatrix:
    """Two anchored hubs, ``US`` and ``CN``, each with ten satellite countries.

    The satellites ``A0..A9`` of ``US`` trade heavily among themselves
    (``intra``) and moderately with their hub (``hub_link``); ``B0..B9`` trade
    among themselves and very heavily with ``CN`` (``cny_link``). Every other
    pair exchanges the weak ``cross`` flow. All flows are symmetric.

    With ``US`` anchored to USD and ``CN`` to CNY, the B bloc always ends in
    CNY while the A bloc moves as one block, so there are exactly two steady
    states: USD fraction 1/22 (A bloc in CNY) and 11/22 (A bloc in USD).
    """
    A = [f"A{i}" for i in range(10)]
    B = [f"B{i}" for i in range(10)]
    flows = []
    _symmetric(flows, "US", "CN", hub_trade)
    for a in A:
        _symmetric(flows, "US", a, hub_link)
        _symmetric(flows, "CN", a, cross)
    for b in B:
        _symmetric(flows, "CN", b, cny_link)
        _symmetric(flows, "US", b, cross)
    for x, y in itertools.combinations(A, 2):
        _symmetric(flows, x, y, intra)
    for x, y in itertools.combinations(B, 2):
        _symmetric(flows, x, y, intra)
    for a in A:
        for b in B:
            _symmetric(flows, a, b, cross)
    return MoneyMatrix.from_flows(year, flows, CountryTable(tuple(["US", "CN"] + A + B)))


def random_money_matrix(rng: np.random.Generator, n: int, density: float = 0.5,
                        year: int = 2000, prefix: str = "") -> MoneyMatrix:
    """Log-normal flows on a random directed support; always has some trade."""
    while True:
        M = rng.lognormal(0.0, 1.5, size=(n, n)) * (rng.random((n, n)) < density)
        np.fill_diagonal(M, 0.0)
        if M.sum() > 0:
            break
    codes = tuple(f"{prefix}{chr(65 + i // 26)}{chr(65 + i % 26)}" for i in range(n))
    return MoneyMatrix(year, M, CountryTable(codes))


def planted_blocks(rng: np.random.Generator, n: int = 30, contrast: float = 10.0,
                   year: int = 2000):
    """Two equal blocks; within-block flows ``contrast`` times the cross flows.

    Returns ``(matrix, labels)`` with ``labels[i]`` in {0, 1}.
    """
    labels = np.repeat([0, 1], [n // 2, n - n // 2])
    same = labels[:, None] == labels[None, :]
    base = rng.uniform(0.5, 1.5, size=(n, n))
    M = np.where(same, contrast * base, base)
    np.fill_diagonal(M, 0.0)
    codes = tuple(f"N{i:02d}" for i in range(n))
    return MoneyMatrix(year, M, CountryTable(codes)), labels
