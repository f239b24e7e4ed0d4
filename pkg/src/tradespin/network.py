"""Trade-network data model: country registry, money matrix, share matrices.

Convention: ``values[i, j]`` is the volume exported from country ``j`` to
country ``i`` (rows are importers, columns are exporters).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

STOCHASTIC_TOL = 1e-12


@dataclass(frozen=True)
class CountryTable:
    """Ordered registry of ISO2 codes; position in ``codes`` is the dense index."""

    codes: tuple[str, ...]
    names: tuple[str | None, ...] | None = None

    def __post_init__(self):
        codes = tuple(self.codes)
        object.__setattr__(self, "codes", codes)
        if len(codes) < 2:
            raise ValueError("a country table needs at least 2 countries")
        for c in codes:
            if not c or c != c.upper():
                raise ValueError(f"iso codes must be non-empty and uppercase: {c!r}")
        if len(set(codes)) != len(codes):
            raise ValueError("duplicate iso codes in country table")
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != len(codes):
                raise ValueError("names must align with codes")
            object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", {c: i for i, c in enumerate(codes)})

    def __len__(self):
        return len(self.codes)

    def index(self, code: str) -> int:
        try:
            return self._index[code]
        except KeyError:
            raise KeyError(f"unknown country code {code!r}") from None

    def indices(self, codes: Iterable[str]) -> np.ndarray:
        return np.array([self.index(c) for c in codes], dtype=np.intp)

    def __contains__(self, code):
        return code in self._index

    def entries(self):
        """List of ``(iso_code, index, name)`` triples."""
        names = self.names or (None,) * len(self.codes)
        return [(c, i, n) for i, (c, n) in enumerate(zip(self.codes, names))]


@dataclass(frozen=True, eq=False)
class MoneyMatrix:
    """Annual bilateral trade flows, ``values[importer, exporter]``."""

    year: int
    values: np.ndarray
    table: CountryTable

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        n = len(self.table)
        if v.shape != (n, n):
            raise ValueError(f"money matrix shape {v.shape} does not match {n} countries")
        if not np.all(np.isfinite(v)):
            raise ValueError("money matrix contains non-finite entries")
        if np.any(v < 0):
            raise ValueError("money matrix entries must be non-negative")
        diag = np.diagonal(v)
        if np.any(diag != 0):
            log.warning("dropping %d self-trade entries from money matrix", int(np.count_nonzero(diag)))
            np.fill_diagonal(v, 0.0)
        if not np.any(v > 0):
            raise ValueError("money matrix has zero total volume")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return len(self.table)

    @classmethod
    def from_flows(cls, year, flows: Iterable[tuple[str, str, float]], table: CountryTable):
        """Build from ``(exporter, importer, value)`` triples; duplicates are summed."""
        n = len(table)
        v = np.zeros((n, n))
        for exporter, importer, value in flows:
            v[table.index(importer), table.index(exporter)] += value
        return cls(year, v, table)


@dataclass(frozen=True, eq=False)
class TradeNetwork:
    """Share matrices and trade probabilities derived from one money matrix.

    Attributes
    ----------
    S : ndarray
        ``S[i, j] = M[i, j] / M_out[j]``, share of j's exports bought by i.
    S_star : ndarray
        ``S_star[i, j] = M[j, i] / M_in[j]``, share of j's imports sold by i.
    P, P_star : ndarray
        Import and export trade probabilities ``M_in / M_total``, ``M_out / M_total``.
    """

    S: np.ndarray
    S_star: np.ndarray
    P: np.ndarray
    P_star: np.ndarray
    M_total: float
    M_in: np.ndarray
    M_out: np.ndarray
    table: CountryTable
    year: int | None = None

    def __post_init__(self):
        for name in ("S", "S_star", "P", "P_star", "M_in", "M_out"):
            getattr(self, name).setflags(write=False)

    @property
    def n(self) -> int:
        return len(self.table)

    @property
    def volume(self) -> np.ndarray:
        """Total traded volume per country, ``M_in + M_out``."""
        return self.M_in + self.M_out

    def check(self, tol: float = STOCHASTIC_TOL):
        """Raise ``AssertionError`` if any stochasticity invariant is violated."""
        col_s = self.S.sum(axis=0)
        col_ss = self.S_star.sum(axis=0)
        assert np.all(np.abs(col_s[self.M_out > 0] - 1) <= tol)
        assert np.all(col_s[self.M_out == 0] == 0)
        assert np.all(np.abs(col_ss[self.M_in > 0] - 1) <= tol)
        assert np.all(col_ss[self.M_in == 0] == 0)
        for p in (self.P, self.P_star):
            assert abs(p.sum() - 1) <= tol
            assert np.all((p >= 0) & (p <= 1))
        assert abs(self.M_in.sum() - self.M_total) <= tol * self.M_total
        assert abs(self.M_out.sum() - self.M_total) <= tol * self.M_total


def _column_normalize(a, totals):
    out = np.zeros_like(a)
    nz = totals > 0
    out[:, nz] = a[:, nz] / totals[nz]
    return out


def build_trade_network(m: MoneyMatrix) -> TradeNetwork:
    """Derive the import/export share matrices and trade probabilities."""
    M = m.values
    M_out = M.sum(axis=0)  # exports of each column country
    M_in = M.sum(axis=1)   # imports of each row country
    total = float(M.sum())
    if total <= 0:
        raise ValueError("money matrix has zero total volume")
    S = _column_normalize(M, M_out)
    S_star = _column_normalize(M.T, M_in)
    net = TradeNetwork(
        S=S,
        S_star=S_star,
        P=M_in / total,
        P_star=M_out / total,
        M_total=total,
        M_in=M_in,
        M_out=M_out,
        table=m.table,
        year=m.year,
    )
    net.check()
    return net


def top_countries(net: TradeNetwork, key: str, k: int) -> list[str]:
    """The ``k`` leading importers (``key='import'``) or exporters (``'export'``).

    Ties are broken by ascending iso code.
    """
    if key == "import":
        p = net.P
    elif key == "export":
        p = net.P_star
    else:
        raise ValueError(f"key must be 'import' or 'export', got {key!r}")
    if not 1 <= k <= net.n:
        raise ValueError(f"k must be in [1, {net.n}]")
    order = sorted(range(net.n), key=lambda i: (-p[i], net.table.codes[i]))
    return [net.table.codes[i] for i in order[:k]]


def scale_matrix(m: MoneyMatrix, lam: float) -> MoneyMatrix:
    if not lam > 0:
        raise ValueError(f"scale factor must be positive, got {lam}")
    return MoneyMatrix(m.year, m.values * lam, m.table)


def restrict(m: MoneyMatrix, codes: Sequence[str]) -> MoneyMatrix:
    """Sub-matrix on the given countries, in the given order."""
    idx = m.table.indices(codes)
    return MoneyMatrix(m.year, m.values[np.ix_(idx, idx)], CountryTable(tuple(codes)))
