"""Zero-temperature Ising relaxation of currency preferences on a trade network.

Spin ``-1`` means a USD preference, ``+1`` a CNY preference. The local field
of country ``c`` is::

    E_c = 1/2 * sum_{c' != c} sigma[c'] * (S[c', c] + S_star[c', c]) * w[c']

where ``w`` is a node weight (``P + P_star`` by default). A visited spin aligns
with the sign of its field and is left alone when the field is exactly zero.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

import numba
import numpy as np

from .network import CountryTable, TradeNetwork

USD = -1
CNY = 1

SWEEP_ORDERS = ("permutation", "replacement")


@dataclass(frozen=True)
class AnchorSpec:
    """Countries whose preference never changes: USD anchors at -1, CNY at +1."""

    usd_fixed: frozenset[str]
    cny_fixed: frozenset[str]

    def __init__(self, usd_fixed: Iterable[str], cny_fixed: Iterable[str]):
        object.__setattr__(self, "usd_fixed", frozenset(usd_fixed))
        object.__setattr__(self, "cny_fixed", frozenset(cny_fixed))
        if not self.usd_fixed or not self.cny_fixed:
            raise ValueError("both anchor sets must be non-empty")
        overlap = self.usd_fixed & self.cny_fixed
        if overlap:
            raise ValueError(f"countries anchored to both currencies: {sorted(overlap)}")

    def validate(self, table: CountryTable):
        missing = sorted(c for c in self.usd_fixed | self.cny_fixed if c not in table)
        if missing:
            raise ValueError(f"anchor codes not in country table: {missing}")

    def swapped(self) -> "AnchorSpec":
        return AnchorSpec(self.cny_fixed, self.usd_fixed)

    def arrays(self, table: CountryTable):
        """Return ``(fixed_mask, anchor_sign)`` arrays over ``table``."""
        self.validate(table)
        mask = np.zeros(len(table), dtype=bool)
        sign = np.zeros(len(table), dtype=np.int8)
        for code in self.usd_fixed:
            mask[table.index(code)] = True
            sign[table.index(code)] = USD
        for code in self.cny_fixed:
            mask[table.index(code)] = True
            sign[table.index(code)] = CNY
        return mask, sign


BASELINE_ANCHORS = AnchorSpec({"US"}, {"CN"})
ANGLO_BRICS_ANCHORS = AnchorSpec({"US", "CA", "UK", "AU", "NZ"}, {"CN", "BR", "RU", "IN", "ZA"})


@dataclass(frozen=True, eq=False)
class SpinConfig:
    sigma: np.ndarray
    fixed_mask: np.ndarray

    def __post_init__(self):
        sigma = np.array(self.sigma, dtype=np.int8)
        mask = np.array(self.fixed_mask, dtype=bool)
        if sigma.ndim != 1 or sigma.shape != mask.shape:
            raise ValueError("sigma and fixed_mask must be 1-d arrays of equal length")
        if not np.all(np.abs(sigma) == 1):
            raise ValueError("spins must be exactly -1 or +1")
        sigma.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "fixed_mask", mask)

    @classmethod
    def from_anchors(cls, sigma, anchors: AnchorSpec, table: CountryTable) -> "SpinConfig":
        """Build a configuration, forcing anchored entries to their sign."""
        mask, sign = anchors.arrays(table)
        s = np.array(sigma, dtype=np.int8)
        s[mask] = sign[mask]
        return cls(s, mask)

    @property
    def n(self):
        return self.sigma.shape[0]

    @property
    def free(self) -> np.ndarray:
        return np.flatnonzero(~self.fixed_mask)

    @property
    def usd_fraction(self) -> float:
        return float(np.count_nonzero(self.sigma == USD)) / self.n

    def with_sigma(self, sigma) -> "SpinConfig":
        return SpinConfig(sigma, self.fixed_mask)

    def __eq__(self, other):
        if not isinstance(other, SpinConfig):
            return NotImplemented
        return np.array_equal(self.sigma, other.sigma) and np.array_equal(
            self.fixed_mask, other.fixed_mask
        )

    def __hash__(self):
        return hash((self.sigma.tobytes(), self.fixed_mask.tobytes()))

    def __repr__(self):
        s = "".join("-" if x < 0 else "+" for x in self.sigma)
        return f"SpinConfig({s})"


@dataclass(frozen=True)
class LocalField:
    country: int
    value: float

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"non-finite local field at country {self.country}")


@dataclass(frozen=True, eq=False)
class CouplingWeights:
    """Per-partner weight in the local field (``P + P_star`` by default)."""

    node_weight: np.ndarray
    mode: str = "trade_probability"

    def __post_init__(self):
        w = np.array(self.node_weight, dtype=float)
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("node weights must be finite and non-negative")
        w.setflags(write=False)
        object.__setattr__(self, "node_weight", w)


def trade_weights(net: TradeNetwork) -> CouplingWeights:
    return CouplingWeights(net.P + net.P_star, "trade_probability")


@dataclass(frozen=True)
class RelaxationResult:
    final: SpinConfig
    trajectory: list[tuple[int, float]]
    converged: bool
    tau_stop: int
    field_evaluations: int = 0

    @property
    def f_final(self) -> float:
        return self.final.usd_fraction


@functools.lru_cache(maxsize=16)
def coupling_matrix(net: TradeNetwork, w: CouplingWeights) -> np.ndarray:
    """Row ``c`` holds the coefficients of ``sigma`` in the field of ``c``.

    ``J[c, c'] = 1/2 * (S[c', c] + S_star[c', c]) * w[c']``, zero diagonal.
    """
    if w.node_weight.shape != (net.n,):
        raise ValueError("weights do not match network size")
    J = 0.5 * (net.S + net.S_star).T * w.node_weight[np.newaxis, :]
    np.fill_diagonal(J, 0.0)
    J = np.ascontiguousarray(J)
    J.setflags(write=False)
    return J


# -- compiled kernels ------------------------------------------------------
# Every field evaluation in the package goes through _field so that the
# summation order (and hence exact-zero ties) is identical everywhere.

@numba.njit(cache=True)
def _field(J, sigma, c):
    e = 0.0
    row = J[c]
    for j in range(row.shape[0]):
        if j != c:
            e += row[j] * sigma[j]
    return e


@numba.njit(cache=True)
def _target(e, current):
    if e < 0.0:
        return -1
    if e > 0.0:
        return 1
    return current


@numba.njit(cache=True)
def _is_stable(J, sigma, free):
    for k in range(free.shape[0]):
        c = free[k]
        if _target(_field(J, sigma, c), sigma[c]) != sigma[c]:
            return False
    return True


@numba.njit(cache=True)
def _count_usd(sigma):
    n = 0
    for i in range(sigma.shape[0]):
        if sigma[i] < 0:
            n += 1
    return n


@numba.njit(cache=True)
def _relax_one(J, sigma, free, orders, check_stable, counts):
    """Sweep ``sigma`` in place following ``orders`` (one row per sweep).

    Writes the USD count after each sweep to ``counts[1:]`` and returns
    ``(sweeps_done, converged, field_evaluations)``.
    """
    counts[0] = _count_usd(sigma)
    evals = 0
    for t in range(orders.shape[0]):
        changed = False
        for k in range(orders.shape[1]):
            c = orders[t, k]
            e = _field(J, sigma, c)
            evals += 1
            s = _target(e, sigma[c])
            if s != sigma[c]:
                sigma[c] = s
                changed = True
        counts[t + 1] = _count_usd(sigma)
        if not changed:
            if not check_stable or _is_stable(J, sigma, free):
                return t + 1, True, evals
    return orders.shape[0], False, evals


@numba.njit(cache=True)
def _relax_batch(J, sigmas, free, orders, check_stable, counts, sweeps, converged):
    for r in range(sigmas.shape[0]):
        t, ok, _ = _relax_one(J, sigmas[r], free, orders[r], check_stable, counts[r])
        sweeps[r] = t
        converged[r] = ok
        # a converged configuration no longer changes; carry its count forward
        for u in range(t + 1, counts.shape[1]):
            counts[r, u] = counts[r, t]


@numba.njit(cache=True)
def _enumerate(J, base, free, out_masks):
    k = free.shape[0]
    sigma = base.copy()
    n_found = 0
    for code in range(1 << k):
        for b in range(k):
            sigma[free[b]] = -1.0 if (code >> b) & 1 else 1.0
        if _is_stable(J, sigma, free):
            out_masks[n_found] = code
            n_found += 1
    return n_found


# -- public operations -----------------------------------------------------

def interaction_energy(net: TradeNetwork, w: CouplingWeights, spins: SpinConfig, c: int) -> LocalField:
    """Local field felt by country ``c``; does not depend on ``spins.sigma[c]``."""
    if not 0 <= c < net.n:
        raise IndexError(f"country index {c} out of range")
    J = coupling_matrix(net, w)
    return LocalField(int(c), float(_field(J, spins.sigma.astype(float), c)))


def local_fields(net: TradeNetwork, w: CouplingWeights, spins: SpinConfig) -> np.ndarray:
    J = coupling_matrix(net, w)
    sigma = spins.sigma.astype(float)
    return np.array([_field(J, sigma, c) for c in range(net.n)])


def apply_flip_rule(field: LocalField | float, current: int) -> int:
    value = field.value if isinstance(field, LocalField) else float(field)
    if not np.isfinite(value):
        raise ValueError("non-finite local field")
    if value < 0:
        return USD
    if value > 0:
        return CNY
    return current


def draw_orders(rng: np.random.Generator, free: np.ndarray, n_sweeps: int, order: str = "permutation"):
    """Visiting order for ``n_sweeps`` sweeps over the free countries.

    ``permutation`` visits every free spin once per sweep; ``replacement``
    draws ``len(free)`` visits uniformly with replacement.
    """
    k = len(free)
    if order == "permutation":
        rows = [rng.permutation(free) for _ in range(n_sweeps)]
    elif order == "replacement":
        rows = [free[rng.integers(0, k, size=k)] if k else free for _ in range(n_sweeps)]
    else:
        raise ValueError(f"unknown sweep order {order!r}; expected one of {SWEEP_ORDERS}")
    return np.array(rows, dtype=np.int64).reshape(n_sweeps, k)


def sweep(net: TradeNetwork, w: CouplingWeights, spins: SpinConfig, rng: np.random.Generator,
          order: str = "permutation") -> SpinConfig:
    """One asynchronous pass over the free spins in random order."""
    J = coupling_matrix(net, w)
    free = spins.free.astype(np.int64)
    sigma = spins.sigma.astype(float)
    orders = draw_orders(rng, free, 1, order)
    counts = np.zeros(2, dtype=np.int64)
    _relax_one(J, sigma, free, orders, False, counts)
    return spins.with_sigma(sigma)


def relax(net: TradeNetwork, w: CouplingWeights, initial: SpinConfig, tau_max: int = 10,
          rng: np.random.Generator | None = None, order: str = "permutation") -> RelaxationResult:
    """Apply sweeps until one produces no change or ``tau_max`` is reached.

    The visiting orders for all ``tau_max`` sweeps are drawn from ``rng`` up
    front, so the generator state after the call does not depend on when the
    run converged.
    """
    if tau_max < 1:
        raise ValueError("tau_max must be at least 1")
    if rng is None:
        rng = np.random.default_rng(0)
    J = coupling_matrix(net, w)
    free = initial.free.astype(np.int64)
    sigma = initial.sigma.astype(float)
    orders = draw_orders(rng, free, tau_max, order)
    counts = np.zeros(tau_max + 1, dtype=np.int64)
    t, converged, evals = _relax_one(J, sigma, free, orders, order != "permutation", counts)
    n = net.n
    trajectory = [(tau, float(counts[tau]) / n) for tau in range(t + 1)]
    return RelaxationResult(initial.with_sigma(sigma), trajectory, bool(converged), int(t), int(evals))


def is_fixed_point(net: TradeNetwork, w: CouplingWeights, spins: SpinConfig) -> bool:
    J = coupling_matrix(net, w)
    return bool(_is_stable(J, spins.sigma.astype(float), spins.free.astype(np.int64)))


def enumerate_fixed_points(net: TradeNetwork, w: CouplingWeights, anchors: AnchorSpec,
                           max_free: int = 20) -> set[SpinConfig]:
    """Brute-force every assignment of the free spins and keep the stable ones."""
    mask, sign = anchors.arrays(net.table)
    free = np.flatnonzero(~mask).astype(np.int64)
    k = len(free)
    if k > max_free:
        raise ValueError(f"{k} free spins exceeds the enumeration limit of {max_free}")
    J = coupling_matrix(net, w)
    base = np.where(mask, sign, 1).astype(float)
    out = np.zeros(1 << k, dtype=np.int64)
    n_found = _enumerate(J, base, free, out)
    result = set()
    for code in out[:n_found]:
        s = base.copy()
        for b in range(k):
            s[free[b]] = -1 if (int(code) >> b) & 1 else 1
        result.add(SpinConfig(s, mask))
    return result
