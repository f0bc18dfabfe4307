"""Sweep configs, the run matrix, CSV output and summary tables.

Config files are flat `key = value` text with dotted keys; lists are
comma-separated. Axis keys (protocols, drop_probabilities, ...) expand into a
cross product of cells; every cell runs once per seed with one NWB per node
unless nwbs_per_seed overrides it. Enumeration order is sorted on every axis
and rows are canonically sorted, so a sweep re-run (serial or parallel)
produces byte-identical CSV.
"""

from __future__ import annotations

import dataclasses
import itertools
import multiprocessing
import os
import sys
from dataclasses import dataclass

from nwbsim import metrics
from nwbsim.config import (
    LOSS_KINDS,
    LossModelConfig,
    MOBILITY_KINDS,
    MobilityConfig,
    PROTOCOLS,
    SR_MODES,
    Scenario,
    SrConfig,
    validate_scenario,
)
from nwbsim.simulation import run_scenario

DEFAULT_RUN_CAP = 100_000
JOBS_ENV_VAR = "NWBSIM_JOBS"


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    base: Scenario
    protocols: list[str]
    sr_modes: list[str]
    drop_probabilities: list[float]
    node_counts: list[int]
    speeds: list[float]
    seeds: int = 20
    seed_base: int = 0
    nwbs_per_seed: int | None = None  # None = one NWB per node
    run_cap: int = DEFAULT_RUN_CAP


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV_VAR, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


# -- config file parsing -----------------------------------------------------


def _parse_bool(raw: str, key: str) -> bool:
    if raw.lower() in ("true", "yes", "1"):
        return True
    if raw.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"key '{key}': expected a boolean, got {raw!r}")


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': expected a number, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"key '{key}': expected an integer, got {raw!r}") from None


def _parse_list(raw: str) -> list[str]:
    return [item.strip() for item in raw.split(",") if item.strip()]


_SR_ALIASES = {"prob": "probabilistic", "probabilistic": "probabilistic", "none": "none", "counter": "counter"}

_SCALAR_KEYS = {
    "area_width",
    "area_height",
    "radio_range",
    "node_count",
    "seed",
    "require_connected",
    "nwb_spacing",
    "jitter_max",
    "protocol",
    "protocol.rad_max",
    "protocol.jitter_max",
    "protocol.lba.threshold_fraction",
    "protocol.lba.mc_samples",
    "loss.kind",
    "loss.drop_probability",
    "loss.drop_applies_to_hellos",
    "mobility.kind",
    "mobility.mean_speed",
    "mobility.pause_time",
    "mobility.hello_period",
    "mobility.expiry_factor",
    "sr.mode",
    "sr.p",
    "sr.n",
    "sr.timeout",
}
_AXIS_KEYS = {
    "protocols",
    "sr_modes",
    "drop_probabilities",
    "node_counts",
    "speeds",
    "seeds",
    "nwbs_per_seed",
    "run_cap",
}


def parse_config_text(text: str) -> SweepConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in _SCALAR_KEYS and key not in _AXIS_KEYS:
            raise ConfigError(f"unknown config key '{key}'")
        if key in raw:
            raise ConfigError(f"duplicate config key '{key}'")
        raw[key] = value

    def take(key, default=None):
        return raw.pop(key, default)

    loss = LossModelConfig(
        kind=take("loss.kind", "bernoulli"),
        drop_probability=_parse_float(take("loss.drop_probability", "0"), "loss.drop_probability"),
        drop_applies_to_hellos=_parse_bool(take("loss.drop_applies_to_hellos", "true"), "loss.drop_applies_to_hellos"),
    )
    if loss.kind not in LOSS_KINDS:
        raise ConfigError(f"key 'loss.kind': must be one of {LOSS_KINDS}")
    mobility = MobilityConfig(
        kind=take("mobility.kind", "static"),
        mean_speed=_parse_float(take("mobility.mean_speed", "0"), "mobility.mean_speed"),
        pause_time=_parse_float(take("mobility.pause_time", "0"), "mobility.pause_time"),
        hello_period=_parse_float(take("mobility.hello_period", "1.0"), "mobility.hello_period"),
        expiry_factor=_parse_float(take("mobility.expiry_factor", "2.5"), "mobility.expiry_factor"),
    )
    if mobility.kind not in MOBILITY_KINDS:
        raise ConfigError(f"key 'mobility.kind': must be one of {MOBILITY_KINDS}")
    sr_mode_raw = take("sr.mode", "none")
    sr_mode = _SR_ALIASES.get(sr_mode_raw.lower())
    if sr_mode is None:
        raise ConfigError(f"key 'sr.mode': must be one of {SR_MODES}")
    sr = SrConfig(
        mode=sr_mode,
        p=_parse_float(take("sr.p", "0.5"), "sr.p"),
        n=_parse_int(take("sr.n", "2"), "sr.n"),
        timeout=_parse_float(take("sr.timeout", "0.1"), "sr.timeout"),
    )
    jitter = take("jitter_max")
    jitter_alias = take("protocol.jitter_max")
    if jitter is None:
        jitter = jitter_alias if jitter_alias is not None else "0.010"

    base = Scenario(
        node_count=_parse_int(take("node_count", "30"), "node_count"),
        seed=_parse_int(take("seed", "0"), "seed"),
        protocol=take("protocol", "flooding"),
        area_width=_parse_float(take("area_width", "1000"), "area_width"),
        area_height=_parse_float(take("area_height", "1000"), "area_height"),
        radio_range=_parse_float(take("radio_range", "250"), "radio_range"),
        loss=loss,
        mobility=mobility,
        sr=sr,
        jitter_max=_parse_float(jitter, "jitter_max"),
        rad_max=_parse_float(take("protocol.rad_max", "0.050"), "protocol.rad_max"),
        lba_threshold_fraction=_parse_float(
            take("protocol.lba.threshold_fraction", "0.10"), "protocol.lba.threshold_fraction"
        ),
        lba_mc_samples=_parse_int(take("protocol.lba.mc_samples", "2000"), "protocol.lba.mc_samples"),
        nwb_spacing=_parse_float(take("nwb_spacing", "2.0"), "nwb_spacing"),
        require_connected=_parse_bool(take("require_connected", "false"), "require_connected"),
    )
    if base.protocol not in PROTOCOLS:
        raise ConfigError(f"key 'protocol': must be one of {PROTOCOLS}")

    protocols = _parse_list(take("protocols", base.protocol))
    for p in protocols:
        if p not in PROTOCOLS:
            raise ConfigError(f"key 'protocols': unknown protocol {p!r}")
    sr_modes = []
    for m in _parse_list(take("sr_modes", base.sr.mode)):
        canon = _SR_ALIASES.get(m.lower())
        if canon is None:
            raise ConfigError(f"key 'sr_modes': unknown mode {m!r}")
        sr_modes.append(canon)
    drops = [_parse_float(v, "drop_probabilities") for v in _parse_list(take("drop_probabilities", str(loss.drop_probability)))]
    for d in drops:
        if not 0.0 <= d <= 1.0:
            raise ConfigError("key 'drop_probabilities': values must be in [0, 1]")
    node_counts = [_parse_int(v, "node_counts") for v in _parse_list(take("node_counts", str(base.node_count)))]
    default_speed = mobility.mean_speed if mobility.kind == "random_waypoint" else 0.0
    speeds = [_parse_float(v, "speeds") for v in _parse_list(take("speeds", format(default_speed, "g")))]
    seeds = _parse_int(take("seeds", "20"), "seeds")
    if seeds < 1:
        raise ConfigError("key 'seeds': must be >= 1")
    nwbs_raw = take("nwbs_per_seed", "per_node")
    if nwbs_raw == "per_node":
        nwbs = None
    else:
        nwbs = _parse_int(nwbs_raw, "nwbs_per_seed")
        if nwbs < 1:
            raise ConfigError("key 'nwbs_per_seed': must be >= 1 or 'per_node'")
    run_cap = _parse_int(take("run_cap", str(DEFAULT_RUN_CAP)), "run_cap")
    assert not raw, f"unconsumed keys: {raw}"

    cfg = SweepConfig(
        base=base,
        protocols=sorted(set(protocols)),
        sr_modes=sorted(set(sr_modes)),
        drop_probabilities=sorted(set(drops)),
        node_counts=sorted(set(node_counts)),
        speeds=sorted(set(speeds)),
        seeds=seeds,
        seed_base=base.seed,
        nwbs_per_seed=nwbs,
        run_cap=run_cap,
    )
    # Fail early on anything the per-cell scenario validation would reject.
    for cell in enumerate_cells(cfg):
        validate_scenario(cell_scenario(cfg, cell))
    return cfg


def load_config(path: str) -> SweepConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())


# -- run matrix ---------------------------------------------------------------


@dataclass(frozen=True)
class Cell:
    protocol: str
    sr_mode: str
    drop_p: float
    node_count: int
    speed: float


def enumerate_cells(cfg: SweepConfig) -> list[Cell]:
    return [
        Cell(*combo)
        for combo in itertools.product(
            cfg.protocols, cfg.sr_modes, cfg.drop_probabilities, cfg.node_counts, cfg.speeds
        )
    ]


def cell_scenario(cfg: SweepConfig, cell: Cell, seed: int = 0) -> Scenario:
    base = cfg.base
    mobility = dataclasses.replace(
        base.mobility,
        kind="random_waypoint" if cell.speed > 0 else "static",
        mean_speed=cell.speed,
    )
    return dataclasses.replace(
        base,
        seed=seed,
        protocol=cell.protocol,
        node_count=cell.node_count,
        loss=dataclasses.replace(base.loss, kind="bernoulli", drop_probability=cell.drop_p),
        mobility=mobility,
        sr=dataclasses.replace(base.sr, mode=cell.sr_mode),
    )


def cell_id(cfg: SweepConfig, cell: Cell) -> str:
    if cell.sr_mode == "probabilistic":
        sr_tag = f"p{cfg.base.sr.p:g}"
    elif cell.sr_mode == "counter":
        sr_tag = f"c{cfg.base.sr.n}"
    else:
        sr_tag = "none"
    return f"{cell.protocol}_{sr_tag}_n{cell.node_count}_d{cell.drop_p:g}_v{cell.speed:g}"


def count_rows(cfg: SweepConfig) -> int:
    total = 0
    for cell in enumerate_cells(cfg):
        per_seed = cfg.nwbs_per_seed if cfg.nwbs_per_seed is not None else cell.node_count
        total += per_seed * cfg.seeds
    return total


def _run_task(task) -> list[metrics.RunRecord]:
    scenario, n_nwbs, scenario_id = task
    return run_scenario(scenario, n_nwbs=n_nwbs, scenario_id=scenario_id)


def run_sweep(cfg: SweepConfig, jobs: int = 1) -> list[metrics.RunRecord]:
    total = count_rows(cfg)
    if total > cfg.run_cap:
        raise ConfigError(f"run matrix has {total} rows, exceeding run_cap={cfg.run_cap}")
    tasks = []
    for cell in enumerate_cells(cfg):
        sid = cell_id(cfg, cell)
        for i in range(cfg.seeds):
            tasks.append((cell_scenario(cfg, cell, seed=cfg.seed_base + i), cfg.nwbs_per_seed, sid))
    if jobs > 1 and len(tasks) > 1:
        with multiprocessing.Pool(processes=jobs) as pool:
            chunks = pool.map(_run_task, tasks)
    else:
        chunks = [_run_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    records.sort(key=lambda r: (r.scenario_id, r.seed, r.nwb_index))
    return records


# -- summaries ----------------------------------------------------------------


def summarize_records(records, group_by: list[str]):
    """Aggregate coverage/overhead per group of CSV column values.

    Non-quiescent rows are excluded (with a count returned for warning)."""
    for col in group_by:
        if col not in metrics.CSV_COLUMNS:
            raise ValueError(f"unknown group-by column '{col}'")
    col_index = {c: i for i, c in enumerate(metrics.CSV_COLUMNS)}

    def key_fn(record):
        row = metrics.record_to_row(record)
        return tuple(row[col_index[c]] for c in group_by)

    kept = [r for r in records if r.quiescent]
    skipped = len(records) - len(kept)
    if not kept:
        raise ValueError("no quiescent records to aggregate")
    return metrics.aggregate(kept, key_fn), skipped


def render_summary_table(aggregates, group_by: list[str], machine: bool = False) -> str:
    header = list(group_by) + [
        "n",
        "coverage_mean",
        "coverage_std",
        "coverage_ci95",
        "overhead_mean",
        "overhead_std",
        "overhead_ci95",
    ]
    rows = []
    for key, agg in aggregates.items():
        if machine:
            stats = [
                str(agg.count),
                repr(agg.mean_coverage),
                repr(agg.std_coverage),
                repr(agg.ci95_coverage),
                repr(agg.mean_overhead),
                repr(agg.std_overhead),
                repr(agg.ci95_overhead),
            ]
        else:
            stats = [
                str(agg.count),
                f"{agg.mean_coverage:.4f}",
                f"{agg.std_coverage:.4f}",
                f"{agg.ci95_coverage:.4f}",
                f"{agg.mean_overhead:.4f}",
                f"{agg.std_overhead:.4f}",
                f"{agg.ci95_overhead:.4f}",
            ]
        rows.append(list(key) + stats)
    if machine:
        lines = [",".join(header)]
        lines += [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header))]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines) + "\n"


def summarize_csv(path: str, group_by: list[str], machine: bool = False) -> str:
    records = metrics.read_csv(path)
    aggregates, skipped = summarize_records(records, group_by)
    if skipped:
        print(f"warning: excluded {skipped} non-quiescent rows", file=sys.stderr)
    return render_summary_table(aggregates, group_by, machine=machine)


# -- presets -------------------------------------------------------------------

_PRESET_COMMON = """\
area_width = 1000
area_height = 1000
radio_range = 250
seeds = 20
nwb_spacing = 2.0
jitter_max = 0.010
protocol.rad_max = 0.050
loss.drop_applies_to_hellos = true
"""

PRESETS = {
    "fig5_controlled_drop_30": (
        "# Five protocols under controlled receiver-side drop, 30 static nodes.\n"
        + _PRESET_COMMON
        + "node_count = 30\n"
        "protocols = ahbp, dcb, flooding, lba, sba\n"
        "drop_probabilities = 0.0, 0.1, 0.2, 0.3, 0.4, 0.5\n"
        "sr_modes = none\n"
    ),
    "fig7_50node": (
        "# Five protocols under controlled drop at higher density, 50 static nodes.\n"
        + _PRESET_COMMON
        + "node_count = 50\n"
        "protocols = ahbp, dcb, flooding, lba, sba\n"
        "drop_probabilities = 0.0, 0.1, 0.2, 0.3, 0.4, 0.5\n"
        "sr_modes = none\n"
    ),
    "mobility_15mps": (
        "# Random-waypoint mobility at 15 m/s, hello every second, no drops,\n"
        "# with and without counter-based selective rebroadcast.\n"
        + _PRESET_COMMON
        + "node_count = 30\n"
        "protocols = ahbp, dcb, flooding, lba, sba\n"
        "drop_probabilities = 0.0\n"
        "speeds = 15\n"
        "mobility.hello_period = 1.0\n"
        "sr_modes = none, counter\n"
        "sr.n = 2\n"
    ),
    "counter_sr_30": (
        "# Counter-based selective rebroadcast (n=2) on all five protocols\n"
        "# across the controlled-drop grid, 30 static nodes.\n"
        + _PRESET_COMMON
        + "node_count = 30\n"
        "protocols = ahbp, dcb, flooding, lba, sba\n"
        "drop_probabilities = 0.0, 0.1, 0.2, 0.3, 0.4, 0.5\n"
        "sr_modes = none, counter\n"
        "sr.n = 2\n"
    ),
    "prob_sr_30": (
        "# Probabilistic selective rebroadcast (p=0.5) on flooding across the\n"
        "# controlled-drop grid, 30 static nodes.\n"
        + _PRESET_COMMON
        + "node_count = 30\n"
        "protocols = flooding\n"
        "drop_probabilities = 0.0, 0.1, 0.2, 0.3, 0.4, 0.5\n"
        "sr_modes = none, probabilistic\n"
        "sr.p = 0.5\n"
    ),
}


def preset_text(name: str) -> str:
    if name not in PRESETS:
        known = ", ".join(sorted(PRESETS))
        raise ConfigError(f"unknown preset '{name}' (available: {known})")
    return PRESETS[name]
