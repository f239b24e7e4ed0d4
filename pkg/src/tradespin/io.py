"""Flow-file ingestion and deterministic result files.

Input is a pre-aggregated edge list with header
``year,exporter,importer,value_usd``. Output floats are written with six
digits after the decimal point so reruns produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .ensemble import BistabilityScan, GroupPartition
from .network import CountryTable, MoneyMatrix

log = logging.getLogger(__name__)

FLOW_HEADER = ("year", "exporter", "importer", "value_usd")


class FlowFileError(ValueError):
    """Malformed flow or registry file; message carries the line number."""


@dataclass
class IngestReport:
    rows: int = 0
    used: int = 0
    self_loops: int = 0
    other_year: int = 0
    duplicates: int = 0


def fmt(x: float) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return f"{x:.6f}"


def _round_json(x):
    return float(f"{x:.6g}")


def read_registry(path) -> tuple[list[str], dict]:
    """Registry CSV with an ``iso`` column and optional ``name`` column."""
    codes, names = [], {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or "iso" not in reader.fieldnames:
            raise FlowFileError(f"{path}: line 1: registry needs an 'iso' column")
        for row in reader:
            code = (row.get("iso") or "").strip().upper()
            if not code:
                raise FlowFileError(f"{path}: line {reader.line_num}: empty iso code")
            codes.append(code)
            if row.get("name"):
                names[code] = row["name"].strip()
    return codes, names


def read_flows(path, year: int, registry=None) -> tuple[MoneyMatrix, IngestReport]:
    """Parse a flow file, keep ``year``, sum duplicates, drop self-trade rows."""
    report = IngestReport()
    sums: dict[tuple[str, str], float] = {}
    seen: set[str] = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FlowFileError(f"{path}: empty file") from None
        if tuple(h.strip() for h in header) != FLOW_HEADER:
            raise FlowFileError(f"{path}: line 1: expected header {','.join(FLOW_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            report.rows += 1
            if len(row) != 4:
                raise FlowFileError(f"{path}: line {line}: expected 4 fields, got {len(row)}")
            y, exp, imp, val = (c.strip() for c in row)
            try:
                y = int(y)
                val = float(val)
            except ValueError:
                raise FlowFileError(f"{path}: line {line}: bad year or value") from None
            if not math.isfinite(val) or val < 0:
                raise FlowFileError(f"{path}: line {line}: value must be finite and >= 0")
            exp, imp = exp.upper(), imp.upper()
            if not exp or not imp:
                raise FlowFileError(f"{path}: line {line}: empty country code")
            if y != year:
                report.other_year += 1
                continue
            if exp == imp:
                report.self_loops += 1
                continue
            report.used += 1
            key = (exp, imp)
            if key in sums:
                report.duplicates += 1
            sums[key] = sums.get(key, 0.0) + val
            seen.update(key)
    if report.self_loops:
        log.warning("dropped %d self-trade rows", report.self_loops)
    if not sums:
        raise FlowFileError(f"{path}: no flows for year {year}")

    names = {}
    if registry is not None:
        reg_codes, names = read_registry(registry)
        seen.update(reg_codes)
    codes = tuple(sorted(seen))
    table = CountryTable(codes, tuple(names.get(c) for c in codes) if names else None)
    flows = ((e, i, v) for (e, i), v in sorted(sums.items()))
    return MoneyMatrix.from_flows(year, flows, table), report


def ingest_flows(path, year: int, registry=None) -> MoneyMatrix:
    return read_flows(path, year, registry)[0]


def years_in(path) -> list[int]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return sorted({int(r["year"]) for r in reader if r.get("year")})


def write_flows(path, m: MoneyMatrix):
    """Write a money matrix as a flow file (non-zero entries only)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FLOW_HEADER)
        codes = m.table.codes
        imp, exp = np.nonzero(m.values)
        for i, j in sorted(zip(exp.tolist(), imp.tolist())):
            w.writerow([m.year, codes[i], codes[j], repr(float(m.values[j, i]))])


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def scan_labels(scan: BistabilityScan) -> np.ndarray:
    usd = scan.usd_counts.sum(axis=0)
    total = scan.converged_runs.sum()
    return np.where(usd == total, "USD", np.where(usd == 0, "CNY", "SWING"))


def emit_scan(scan: BistabilityScan, out_dir, partition: GroupPartition | None = None) -> list[Path]:
    """Write ``scan.csv``, ``countries.csv`` and ``summary.json`` into ``out_dir``."""
    if len(scan.f_i_grid) == 0:
        raise ValueError("cannot emit an empty scan")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    rows = []
    for f_i, pts, nc in zip(scan.f_i_grid, scan.attractors, scan.nonconverged):
        if not pts:
            rows.append((f_i, math.nan, 0.0, nc))
        for f_f, rho in sorted(pts):
            rows.append((f_i, f_f, rho, nc))
    _write_csv(out / "scan.csv", ("f_i", "f_f", "rho", "nonconverged"),
               [(fmt(a), fmt(b), fmt(c), int(d)) for a, b, c, d in rows])

    labels = partition.labels if partition is not None else scan_labels(scan)
    p = scan.p_dollar
    _write_csv(out / "countries.csv", ("iso", "p_dollar", "group"),
               [(code, fmt(p[i]), labels[i]) for i, code in enumerate(scan.table.codes)])

    attractors = sorted({round(f, 12) for f in (x for pts in scan.attractors for x, _ in pts)})
    summary = {
        "config": scan.config.echo() if scan.config is not None else None,
        "n_countries": len(scan.table),
        "attractors": [_round_json(f) for f in attractors],
        "group_counts": {lab: int(np.count_nonzero(labels == lab)) for lab in ("USD", "CNY", "SWING")},
        "nonconverged_runs": int(scan.nonconverged.sum()),
    }
    if partition is not None:
        summary["volume_share"] = {k: _round_json(v) for k, v in partition.volume_share.items()}
    _write_json(out / "summary.json", summary)
    return [out / "scan.csv", out / "countries.csv", out / "summary.json"]


def emit_trajectory(result, path):
    _write_csv(Path(path), ("tau", "f"), [(tau, fmt(f)) for tau, f in result.trajectory])


def emit_timeseries(rows, path):
    _write_csv(Path(path), ("year", "label", "country_fraction", "volume_fraction"),
               [(y, lab, fmt(cf), fmt(vf)) for y, lab, cf, vf in rows])


def emit_centrality(codes, pr, cr, path):
    _write_csv(Path(path), ("iso", "pagerank", "cheirank"),
               [(c, fmt(a), fmt(b)) for c, a, b in zip(codes, pr, cr)])


def emit_groups(partition: GroupPartition, p_dollar, path):
    _write_csv(Path(path), ("iso", "group", "p_dollar"),
               [(c, partition.labels[i], fmt(p_dollar[i])) for i, c in enumerate(partition.table.codes)])


def emit_clusters(partition, table: CountryTable, out_dir, summary_groups=None) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "clusters.csv", ("iso", "community", "leader"),
               [(c, int(k), partition.leaders[int(k)]) for c, k in zip(table.codes, partition.community)])
    summary = {
        "modularity": _round_json(partition.modularity),
        "n_communities": partition.n_communities,
        "history": [_round_json(q) for q in partition.history],
        "leaders": {str(k): v for k, v in sorted(partition.leaders.items())},
    }
    if summary_groups is not None:
        summary["groups"] = [{"label": lab, "size": len(m), "members": m} for lab, m in summary_groups]
    _write_json(out / "cluster_summary.json", summary)
    return [out / "clusters.csv", out / "cluster_summary.json"]
