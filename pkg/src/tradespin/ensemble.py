"""Monte Carlo ensembles over random initial preferences.

Each run draws a random initial configuration with a prescribed USD fraction
among the free countries, relaxes it, and records the final state. Runs are
seeded from ``SeedSequence(master_seed, spawn_key=(grid_index, run_index))``
so the result is independent of how runs are scheduled across workers.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .dynamics import (
    BASELINE_ANCHORS,
    USD,
    AnchorSpec,
    CouplingWeights,
    SpinConfig,
    _relax_batch,
    coupling_matrix,
    draw_orders,
    trade_weights,
)
from .network import CountryTable, TradeNetwork

log = logging.getLogger(__name__)

GROUP_LABELS = ("USD", "CNY", "SWING")
WEIGHT_MODES = ("trade_probability", "centrality")

# runs handed to the compiled kernel at once
CHUNK = 2000


def default_grid(step: float = 0.01) -> np.ndarray:
    n = int(round(1 / step))
    return np.round(np.linspace(0.0, 1.0, n + 1), 10)


@dataclass
class ExperimentConfig:
    f_i_grid: Sequence[float] = field(default_factory=default_grid)
    n_runs: int = 10_000
    tau_max: int = 10
    master_seed: int = 0
    anchors: AnchorSpec = BASELINE_ANCHORS
    weight_mode: str = "trade_probability"
    cluster_tol: float | None = None  # None -> 0.5 / N
    sweep_order: str = "permutation"
    alpha: float = 0.5  # damping for centrality weights
    workers: int = 1

    def __post_init__(self):
        grid = np.asarray(self.f_i_grid, dtype=float)
        if grid.ndim != 1 or grid.size == 0:
            raise ValueError("f_i grid must be a non-empty 1-d sequence")
        if np.any((grid < 0) | (grid > 1)):
            raise ValueError("f_i grid values must lie in [0, 1]")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("f_i grid must be strictly increasing")
        self.f_i_grid = grid
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.tau_max < 1:
            raise ValueError("tau_max must be >= 1")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    def echo(self) -> dict:
        return {
            "f_i_grid": [float(x) for x in self.f_i_grid],
            "n_runs": self.n_runs,
            "tau_max": self.tau_max,
            "master_seed": self.master_seed,
            "anchors_usd": sorted(self.anchors.usd_fixed),
            "anchors_cny": sorted(self.anchors.cny_fixed),
            "weight_mode": self.weight_mode,
            "cluster_tol": self.cluster_tol,
            "sweep_order": self.sweep_order,
            "alpha": self.alpha,
        }


@dataclass(eq=False)
class BistabilityScan:
    """Aggregated outcome of a scan over initial USD fractions.

    ``usd_counts[g, c]`` counts converged runs at grid point ``g`` that left
    country ``c`` with a USD preference.
    """

    f_i_grid: np.ndarray
    attractors: list[list[tuple[float, float]]]
    n_runs: int
    nonconverged: np.ndarray
    usd_counts: np.ndarray
    converged_runs: np.ndarray
    mean_trajectory: np.ndarray
    table: CountryTable
    config: ExperimentConfig | None = None

    @property
    def p_dollar(self) -> np.ndarray:
        """Per-country probability of ending in USD, pooled over the whole grid."""
        total = self.converged_runs.sum()
        if total == 0:
            return np.full(len(self.table), np.nan)
        return self.usd_counts.sum(axis=0) / total

    @property
    def p_yuan(self) -> np.ndarray:
        return 1.0 - self.p_dollar

    @property
    def p_dollar_by_grid(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.usd_counts / self.converged_runs[:, None]

    def final_fractions(self) -> list[float]:
        """Distinct attractor fractions seen anywhere in the scan, ascending."""
        return sorted({round(f, 12) for pts in self.attractors for f, _ in pts})

    def rho(self, f_f: float, tol: float | None = None) -> np.ndarray:
        """Reach probability of the attractor at ``f_f`` for every grid point."""
        tol = 0.5 / len(self.table) if tol is None else tol
        out = np.zeros(len(self.f_i_grid))
        for g, pts in enumerate(self.attractors):
            out[g] = sum(r for f, r in pts if abs(f - f_f) <= tol)
        return out


@dataclass(eq=False)
class GroupPartition:
    labels: np.ndarray  # array of "USD" / "CNY" / "SWING"
    counts: dict
    volume_share: dict
    table: CountryTable
    year: int | None = None
    _order_key: np.ndarray | None = field(default=None, repr=False)

    def members(self, label: str) -> list[str]:
        idx = np.flatnonzero(self.labels == label)
        if self._order_key is not None:
            idx = sorted(idx, key=lambda i: tuple(self._order_key[i]))
        return [self.table.codes[i] for i in idx]

    def label_of(self, code: str) -> str:
        return str(self.labels[self.table.index(code)])


def _initial_count(f_i: float, k_free: int) -> int:
    # round half up, so f_i = 0.5 on an odd count leans USD
    return int(math.floor(f_i * k_free + 0.5))


def random_initial_config(f_i: float, anchors: AnchorSpec, table: CountryTable,
                          rng: np.random.Generator) -> SpinConfig:
    """Anchors at their sign; ``round(f_i * k_free)`` random free countries at USD."""
    if not 0 <= f_i <= 1:
        raise ValueError("f_i must lie in [0, 1]")
    mask, sign = anchors.arrays(table)
    sigma = _initial_sigma(f_i, mask, sign, np.flatnonzero(~mask), rng)
    return SpinConfig(sigma, mask)


def _initial_sigma(f_i, mask, sign, free, rng):
    sigma = np.where(mask, sign, 1).astype(np.int8)
    n_usd = _initial_count(f_i, len(free))
    if n_usd:
        sigma[rng.choice(free, size=n_usd, replace=False)] = USD
    return sigma


def run_seed(master_seed: int, grid_index: int, run_index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(grid_index, run_index))


def _simulate_chunk(args):
    """Run ``runs`` at one grid point; returns integer aggregates only."""
    J, mask, sign, f_i, g, runs, tau_max, master_seed, order = args
    n = mask.shape[0]
    free = np.flatnonzero(~mask)
    free64 = free.astype(np.int64)
    R = len(runs)
    sigmas = np.empty((R, n), dtype=float)
    orders = np.empty((R, tau_max, len(free)), dtype=np.int64)
    for i, r in enumerate(runs):
        rng = np.random.Generator(np.random.PCG64(run_seed(master_seed, g, r)))
        sigmas[i] = _initial_sigma(f_i, mask, sign, free, rng)
        orders[i] = draw_orders(rng, free64, tau_max, order)
    counts = np.zeros((R, tau_max + 1), dtype=np.int64)
    sweeps = np.zeros(R, dtype=np.int64)
    converged = np.zeros(R, dtype=np.bool_)
    _relax_batch(J, sigmas, free64, orders, order != "permutation", counts, sweeps, converged)
    ok = converged
    final_usd = counts[:, -1]
    return {
        "g": g,
        "usd_by_country": (sigmas[ok] < 0).sum(axis=0).astype(np.int64),
        "final_usd_hist": np.bincount(final_usd[ok], minlength=n + 1),
        "n_converged": int(ok.sum()),
        "n_nonconverged": int((~ok).sum()),
        "traj_sum": counts.sum(axis=0),
    }


def cluster_fractions(values: np.ndarray, weights: np.ndarray, tol: float):
    """Group sorted ``values`` lying within ``tol`` of their group's first member.

    Returns ``[(representative, total weight), ...]`` where the representative
    is the most heavily weighted member (the smaller one on ties).
    """
    out = []
    for v, wt in zip(values, weights):
        if out and v - out[-1][0] <= tol:
            out[-1][1] += wt
            if wt > out[-1][3]:
                out[-1][2], out[-1][3] = v, wt
        else:
            out.append([v, wt, v, wt])
    return [(rep, total) for _, total, rep, _ in out]


def resolve_weights(cfg: ExperimentConfig, net: TradeNetwork) -> CouplingWeights:
    if cfg.weight_mode == "centrality":
        from .centrality import centrality_weights
        return centrality_weights(net, cfg.alpha)
    return trade_weights(net)


def run_scan(cfg: ExperimentConfig, net: TradeNetwork, w: CouplingWeights | None = None) -> BistabilityScan:
    """Relax ``cfg.n_runs`` random initial configurations at every grid point.

    Converged runs are clustered by final USD fraction; runs that hit
    ``tau_max`` without converging are only counted in ``nonconverged``.
    """
    if w is None:
        w = resolve_weights(cfg, net)
    J = coupling_matrix(net, w)
    mask, sign = cfg.anchors.arrays(net.table)
    n = net.n
    tasks = []
    for g, f_i in enumerate(cfg.f_i_grid):
        for lo in range(0, cfg.n_runs, CHUNK):
            runs = range(lo, min(lo + CHUNK, cfg.n_runs))
            tasks.append((J, mask, sign, float(f_i), g, runs, cfg.tau_max, cfg.master_seed, cfg.sweep_order))

    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_simulate_chunk, tasks))
    else:
        results = [_simulate_chunk(t) for t in tasks]

    G = len(cfg.f_i_grid)
    usd_counts = np.zeros((G, n), dtype=np.int64)
    hist = np.zeros((G, n + 1), dtype=np.int64)
    conv = np.zeros(G, dtype=np.int64)
    nonconv = np.zeros(G, dtype=np.int64)
    traj = np.zeros((G, cfg.tau_max + 1), dtype=np.int64)
    for res in results:
        g = res["g"]
        usd_counts[g] += res["usd_by_country"]
        hist[g] += res["final_usd_hist"]
        conv[g] += res["n_converged"]
        nonconv[g] += res["n_nonconverged"]
        traj[g] += res["traj_sum"]

    tol = 0.5 / n if cfg.cluster_tol is None else cfg.cluster_tol
    attractors = []
    for g in range(G):
        seen = np.flatnonzero(hist[g])
        pts = cluster_fractions(seen / n, hist[g, seen].astype(float), tol)
        attractors.append([(float(f), float(c) / cfg.n_runs) for f, c in pts])
    if nonconv.any():
        log.warning("%d runs did not converge within tau_max=%d", int(nonconv.sum()), cfg.tau_max)

    return BistabilityScan(
        f_i_grid=np.asarray(cfg.f_i_grid, dtype=float),
        attractors=attractors,
        n_runs=cfg.n_runs,
        nonconverged=nonconv,
        usd_counts=usd_counts,
        converged_runs=conv,
        mean_trajectory=traj / (cfg.n_runs * n),
        table=net.table,
        config=cfg,
    )


def classify_groups(scan: BistabilityScan, net: TradeNetwork) -> GroupPartition:
    """USD if a country ended in USD in every converged run, CNY if in none, else SWING."""
    if scan.converged_runs.sum() == 0:
        raise ValueError("scan has no converged runs to classify")
    usd = scan.usd_counts.sum(axis=0)
    total = scan.converged_runs.sum()
    labels = np.where(usd == total, "USD", np.where(usd == 0, "CNY", "SWING"))
    volume = net.volume
    counts = {lab: int(np.count_nonzero(labels == lab)) for lab in GROUP_LABELS}
    share = {lab: float(volume[labels == lab].sum() / volume.sum()) for lab in GROUP_LABELS}
    order_key = np.column_stack([-np.maximum(net.P, net.P_star), -net.P_star])
    return GroupPartition(labels, counts, share, net.table, net.year, order_key)


def group_time_series(partitions: Mapping[int, GroupPartition]):
    """Rows ``(year, label, country_fraction, volume_fraction)`` sorted by year, label."""
    if not partitions:
        raise ValueError("need at least one year")
    rows = []
    for year in sorted(partitions):
        part = partitions[year]
        n = len(part.labels)
        for lab in sorted(GROUP_LABELS):
            rows.append((year, lab, part.counts[lab] / n, part.volume_share[lab]))
    return rows
