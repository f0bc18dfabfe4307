"""Per-NWB records, seed-level aggregation, and the CSV contract."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

CSV_COLUMNS = (
    "scenario_id",
    "seed",
    "protocol",
    "sr_mode",
    "sr_p",
    "sr_n",
    "node_count",
    "drop_p",
    "speed_mps",
    "nwb_index",
    "origin",
    "connected",
    "covered",
    "transmissions",
    "coverage",
    "norm_overhead",
    "hello_tx",
    "quiescent",
)

Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass
class RunRecord:
    """Outcome of one NWB: coverage and transmission counts.

    The origin counts as covered and its initial send counts as a
    transmission; that is the reading under which plain flooding's
    normalized overhead is identically 1. Hello traffic is kept out of
    norm_overhead and reported separately.
    """

    scenario_id: str
    seed: int
    protocol: str
    sr_mode: str
    sr_p: float | None
    sr_n: int | None
    node_count: int
    drop_p: float
    speed_mps: float
    nwb_index: int
    origin: int
    connected: bool
    covered: int
    transmissions: int
    coverage: float
    norm_overhead: float
    hello_tx: int
    quiescent: bool


def build_run_record(
    *,
    scenario_id: str,
    seed: int,
    protocol: str,
    sr_mode: str,
    sr_p: float | None,
    sr_n: int | None,
    node_count: int,
    drop_p: float,
    speed_mps: float,
    nwb_index: int,
    origin: int,
    connected: bool,
    covered: int,
    transmissions: int,
    hello_tx: int,
    quiescent: bool,
) -> RunRecord:
    if not 1 <= covered <= node_count:
        raise ValueError(f"covered={covered} out of range for node_count={node_count}")
    if transmissions < 1:
        raise ValueError("transmissions must be >= 1 (the origin always sends)")
    return RunRecord(
        scenario_id=scenario_id,
        seed=seed,
        protocol=protocol,
        sr_mode=sr_mode,
        sr_p=sr_p,
        sr_n=sr_n,
        node_count=node_count,
        drop_p=drop_p,
        speed_mps=speed_mps,
        nwb_index=nwb_index,
        origin=origin,
        connected=connected,
        covered=covered,
        transmissions=transmissions,
        coverage=covered / node_count,
        norm_overhead=transmissions / covered,
        hello_tx=hello_tx,
        quiescent=quiescent,
    )


@dataclass
class AggregateRecord:
    key: tuple
    count: int
    mean_coverage: float
    std_coverage: float
    ci95_coverage: float
    mean_overhead: float
    std_overhead: float
    ci95_overhead: float


def _mean_std(values) -> tuple[float, float]:
    # fsum keeps the results exactly permutation-invariant in record order.
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def aggregate(records, key_fn) -> dict[tuple, AggregateRecord]:
    """Group records and compute mean / sample stddev / normal-approx 95% CI."""
    if not records:
        raise ValueError("cannot aggregate an empty record set")
    groups: dict[tuple, list] = {}
    for r in records:
        groups.setdefault(key_fn(r), []).append(r)
    out = {}
    for key, rows in sorted(groups.items()):
        cov_mean, cov_std = _mean_std([r.coverage for r in rows])
        ovh_mean, ovh_std = _mean_std([r.norm_overhead for r in rows])
        n = len(rows)
        out[key] = AggregateRecord(
            key=key,
            count=n,
            mean_coverage=cov_mean,
            std_coverage=cov_std,
            ci95_coverage=Z95 * cov_std / math.sqrt(n),
            mean_overhead=ovh_mean,
            std_overhead=ovh_std,
            ci95_overhead=Z95 * ovh_std / math.sqrt(n),
        )
    return out


def _fmt_axis(x: float) -> str:
    return format(x, "g")


def record_to_row(r: RunRecord) -> list[str]:
    return [
        r.scenario_id,
        str(r.seed),
        r.protocol,
        r.sr_mode,
        "" if r.sr_p is None else _fmt_axis(r.sr_p),
        "" if r.sr_n is None else str(r.sr_n),
        str(r.node_count),
        _fmt_axis(r.drop_p),
        _fmt_axis(r.speed_mps),
        str(r.nwb_index),
        str(r.origin),
        "1" if r.connected else "0",
        str(r.covered),
        str(r.transmissions),
        f"{r.coverage:.6f}",
        f"{r.norm_overhead:.6f}",
        str(r.hello_tx),
        "1" if r.quiescent else "0",
    ]


def write_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in records:
            writer.writerow(record_to_row(r))


def read_csv(path) -> list[RunRecord]:
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in CSV_COLUMNS if reader.fieldnames is None or c not in reader.fieldnames]
        if missing:
            raise ValueError(f"CSV is missing expected columns: {', '.join(missing)}")
        for row in reader:
            records.append(
                RunRecord(
                    scenario_id=row["scenario_id"],
                    seed=int(row["seed"]),
                    protocol=row["protocol"],
                    sr_mode=row["sr_mode"],
                    sr_p=float(row["sr_p"]) if row["sr_p"] else None,
                    sr_n=int(row["sr_n"]) if row["sr_n"] else None,
                    node_count=int(row["node_count"]),
                    drop_p=float(row["drop_p"]),
                    speed_mps=float(row["speed_mps"]),
                    nwb_index=int(row["nwb_index"]),
                    origin=int(row["origin"]),
                    connected=row["connected"] == "1",
                    covered=int(row["covered"]),
                    transmissions=int(row["transmissions"]),
                    coverage=float(row["coverage"]),
                    norm_overhead=float(row["norm_overhead"]),
                    hello_tx=int(row["hello_tx"]),
                    quiescent=row["quiescent"] == "1",
                )
            )
    return records
