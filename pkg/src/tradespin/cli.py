"""Command-line interface.

Subcommands::

    network stats   N, total volume and top-k importers/exporters
    relax           one relaxation trajectory -> trajectory.csv
    scan            bistability scan -> scan.csv, countries.csv, summary.json
    groups          scan + USD/CNY/SWING classification -> groups.csv (+ scan files)
    timeseries      groups for several years -> timeseries.csv
    centrality      PageRank/CheiRank per country -> centrality.csv
    cluster         directed Louvain -> clusters.csv, cluster_summary.json

Options may also come from ``--config FILE`` (JSON or YAML, keys named like
the long options with dashes or underscores). Command-line values win over
the config file. ``TRADESPIN_OUT_DIR`` sets the default output directory.
Randomized commands default to ``--seed 0``.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from .centrality import cheirank, pagerank
from .clustering import label_leaders, louvain, summarize
from .dynamics import AnchorSpec, SpinConfig, relax, trade_weights
from .ensemble import ExperimentConfig, classify_groups, group_time_series, random_initial_config, run_scan
from .network import build_trade_network, top_countries

log = logging.getLogger("tradespin")

DEFAULTS = {
    "seed": 0,
    "runs": 10_000,
    "grid": "0:1:0.01",
    "tau_max": 10,
    "anchors_usd": "US",
    "anchors_cny": "CN",
    "weights": "trade",
    "alpha": 0.5,
    "workers": 1,
    "order": "permutation",
    "top": 5,
    "f_i": 0.5,
    "min_size": 4,
}


class CLIError(Exception):
    pass


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = str(text).strip()
    if ":" in text:
        try:
            start, stop, step = (float(x) for x in text.split(":"))
        except ValueError:
            raise CLIError(f"bad grid {text!r}; expected start:stop:step") from None
        if step <= 0:
            raise CLIError("grid step must be positive")
        n = int(round((stop - start) / step))
        return np.round(start + step * np.arange(n + 1), 10)
    try:
        return np.array([float(x) for x in text.split(",") if x.strip()])
    except ValueError:
        raise CLIError(f"bad grid {text!r}") from None


def _codes(text) -> list[str]:
    if isinstance(text, (list, tuple)):
        return [str(c).strip().upper() for c in text]
    return [c.strip().upper() for c in str(text).split(",") if c.strip()]


def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON/YAML file with option values")
    p.add_argument("--input", default=S, help="flow CSV: year,exporter,importer,value_usd")
    p.add_argument("--registry", default=S, help="optional country registry CSV (iso[,name])")
    p.add_argument("--year", type=int, default=S)
    p.add_argument("--years", default=S, help="years for timeseries, e.g. 2010-2020 or 2010,2019")
    p.add_argument("--seed", type=int, default=S, help="master seed (default 0)")
    p.add_argument("--runs", type=int, default=S, help="runs per grid point (default 10000)")
    p.add_argument("--grid", default=S, help="f_i grid, start:stop:step or list (default 0:1:0.01)")
    p.add_argument("--tau-max", type=int, default=S, help="sweep budget (default 10)")
    p.add_argument("--anchors-usd", default=S, help="comma-separated USD anchors (default US)")
    p.add_argument("--anchors-cny", default=S, help="comma-separated CNY anchors (default CN)")
    p.add_argument("--weights", choices=("trade", "centrality"), default=S)
    p.add_argument("--alpha", type=float, default=S, help="Google matrix damping (default 0.5)")
    p.add_argument("--order", choices=("permutation", "replacement"), default=S)
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--out-dir", default=S)
    p.add_argument("-v", "--verbose", action="store_true", default=S)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tradespin", description="Currency-preference Ising model on trade networks")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    net = sub.add_parser("network", help="network summaries")
    net.add_argument("action", choices=("stats",))
    net.add_argument("--top", type=int, default=argparse.SUPPRESS)
    _common(net)

    rel = sub.add_parser("relax", help="single relaxation trajectory")
    rel.add_argument("--f-i", type=float, default=argparse.SUPPRESS, help="initial USD fraction (default 0.5)")
    rel.add_argument("--initial-usd", default=argparse.SUPPRESS,
                     help="explicit initial USD countries (overrides --f-i)")
    _common(rel)

    for name, text in (("scan", "bistability scan"), ("groups", "group classification"),
                       ("timeseries", "group sizes across years"), ("centrality", "PageRank/CheiRank")):
        _common(sub.add_parser(name, help=text))

    cl = sub.add_parser("cluster", help="directed Louvain clustering")
    cl.add_argument("--min-size", type=int, default=argparse.SUPPRESS)
    _common(cl)
    return parser


def _load_config(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith((".yml", ".yaml")):
        import yaml
        data = yaml.safe_load(text) or {}
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise CLIError(f"config {path} must hold a mapping")
    return {k.replace("-", "_"): v for k, v in data.items()}


class Options:
    """Resolved option lookup: command line, then config file, then defaults."""

    def __init__(self, ns: argparse.Namespace):
        self.ns = vars(ns)
        self.cfg = _load_config(self.ns["config"]) if "config" in self.ns else {}

    def get(self, name, default=None):
        if name in self.ns:
            return self.ns[name]
        if name in self.cfg:
            return self.cfg[name]
        return DEFAULTS.get(name, default)

    def require(self, name):
        v = self.get(name)
        if v is None:
            raise CLIError(f"--{name.replace('_', '-')} is required")
        return v

    def out_dir(self) -> Path:
        d = self.get("out_dir") or os.environ.get("TRADESPIN_OUT_DIR") or "out"
        path = Path(d)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def anchors(self) -> AnchorSpec:
        return AnchorSpec(_codes(self.get("anchors_usd")), _codes(self.get("anchors_cny")))

    def experiment(self) -> ExperimentConfig:
        grid = self.get("grid")
        grid = parse_grid(grid) if isinstance(grid, str) else np.asarray(grid, dtype=float)
        return ExperimentConfig(
            f_i_grid=grid,
            n_runs=int(self.get("runs")),
            tau_max=int(self.get("tau_max")),
            master_seed=int(self.get("seed")),
            anchors=self.anchors(),
            weight_mode="centrality" if self.get("weights") == "centrality" else "trade_probability",
            sweep_order=self.get("order"),
            alpha=float(self.get("alpha")),
            workers=int(self.get("workers")),
        )


def _network(opts: Options, year=None):
    year = int(year if year is not None else opts.require("year"))
    m, report = tio.read_flows(opts.require("input"), year, opts.get("registry"))
    log.info("year %d: %d rows read, %d used, %d self-trade dropped, %d other years",
             year, report.rows, report.used, report.self_loops, report.other_year)
    return m, build_trade_network(m)


def cmd_network(opts: Options):
    _, net = _network(opts)
    k = min(int(opts.get("top")), net.n)
    print(f"year\t{net.year}")
    print(f"N\t{net.n}")
    print(f"M_total\t{net.M_total:.6g}")
    for key, p in (("import", net.P), ("export", net.P_star)):
        print(f"top {k} by {key} probability:")
        for rank, code in enumerate(top_countries(net, key, k), 1):
            print(f"  {rank}. {code}\t{p[net.table.index(code)]:.6f}")


def cmd_relax(opts: Options):
    _, net = _network(opts)
    cfg = opts.experiment()
    from .ensemble import resolve_weights
    w = resolve_weights(cfg, net)
    rng = np.random.default_rng(cfg.master_seed)
    initial_usd = opts.get("initial_usd")
    if initial_usd is not None:
        sigma = np.ones(net.n, dtype=np.int8)
        sigma[net.table.indices(_codes(initial_usd))] = -1
        init = SpinConfig.from_anchors(sigma, cfg.anchors, net.table)
    else:
        init = random_initial_config(float(opts.get("f_i")), cfg.anchors, net.table, rng)
    res = relax(net, w, init, cfg.tau_max, rng, cfg.sweep_order)
    out = opts.out_dir() / "trajectory.csv"
    tio.emit_trajectory(res, out)
    print(f"converged={res.converged} tau_stop={res.tau_stop} f_f={res.f_final:.6f} -> {out}")


def _scan(opts: Options, net):
    cfg = opts.experiment()
    return cfg, run_scan(cfg, net)


def cmd_scan(opts: Options):
    _, net = _network(opts)
    _, scan = _scan(opts, net)
    paths = tio.emit_scan(scan, opts.out_dir(), classify_groups(scan, net) if scan.converged_runs.sum() else None)
    print("attractors:", " ".join(f"{f:.6f}" for f in scan.final_fractions()))
    for p in paths:
        print(p)


def cmd_groups(opts: Options):
    _, net = _network(opts)
    _, scan = _scan(opts, net)
    part = classify_groups(scan, net)
    out = opts.out_dir()
    tio.emit_scan(scan, out, part)
    tio.emit_groups(part, scan.p_dollar, out / "groups.csv")
    for lab in ("USD", "CNY", "SWING"):
        print(f"{lab}\t{part.counts[lab]}\t{part.volume_share[lab]:.6f}")


def parse_years(text: str) -> list[int]:
    """Comma-separated years and inclusive ranges, e.g. ``2010-2012,2019``."""
    out = []
    try:
        for part in (p.strip() for p in text.split(",")):
            if not part:
                continue
            lo, dash, hi = part.partition("-")
            out.extend(range(int(lo), int(hi if dash else lo) + 1))
    except ValueError:
        raise CLIError(f"bad --years value {text!r}") from None
    if not out:
        raise CLIError("--years is empty")
    return sorted(set(out))


def cmd_timeseries(opts: Options):
    years = opts.get("years")
    if years is None:
        years = tio.years_in(opts.require("input"))
    elif isinstance(years, str):
        years = parse_years(years)
    parts = {}
    for y in years:
        _, net = _network(opts, y)
        _, scan = _scan(opts, net)
        parts[int(y)] = classify_groups(scan, net)
    rows = group_time_series(parts)
    out = opts.out_dir() / "timeseries.csv"
    tio.emit_timeseries(rows, out)
    for row in rows:
        print(f"{row[0]}\t{row[1]}\t{row[2]:.6f}\t{row[3]:.6f}")


def cmd_centrality(opts: Options):
    _, net = _network(opts)
    alpha = float(opts.get("alpha"))
    pr = pagerank(net, alpha)
    cr = cheirank(net, alpha)
    out = opts.out_dir() / "centrality.csv"
    tio.emit_centrality(net.table.codes, pr.values, cr.values, out)
    print(out)


def cmd_cluster(opts: Options):
    m, net = _network(opts)
    part = louvain(m, seed=int(opts.get("seed")))
    label_leaders(part, net)
    groups = summarize(part, net, int(opts.get("min_size")))
    paths = tio.emit_clusters(part, net.table, opts.out_dir(), groups)
    print(f"modularity\t{part.modularity:.6f}")
    for lab, members in groups:
        print(f"{lab}\t{len(members)}")
    for p in paths:
        print(p)


COMMANDS = {
    "network": cmd_network,
    "relax": cmd_relax,
    "scan": cmd_scan,
    "groups": cmd_groups,
    "timeseries": cmd_timeseries,
    "centrality": cmd_centrality,
    "cluster": cmd_cluster,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[ns.command](Options(ns))
    except (CLIError, ValueError, KeyError, OSError) as exc:
        print(f"tradespin {ns.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(cli())
