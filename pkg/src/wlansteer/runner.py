"""Campaign execution: sweep grids in, per-deployment rows and aggregates out.

A run walks the sweep points of one campaign test, regenerates every
deployment from its (seed, index) substream, applies the configured steering
mechanism and scores the result.  Outputs are byte-stable: the same grid and
seed produce identical CSV/JSON no matter how many worker processes are used,
because randomness is keyed to the deployment index alone and results are
merged in grid order.
"""

from __future__ import annotations

import csv
import json
import math
import multiprocessing
import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence

from .model import Band, Topology
from .perf import (
    CONGESTED_HOP_DELAY_MS,
    DEFAULT_OVERHEADS,
    MacOverheads,
    SimEnv,
    evaluate,
    with_link_cache,
)
from .radio import DEFAULT_MCS_TABLES, DEFAULT_PROPAGATION, McsTable, PropagationParams
from .selection import Mechanism, initial_association, reassociation_pass
from .protocol import export_events, run_mechanism
from .scenarios import (
    STA_ID_BASE,
    SweepPoint,
    add_stations,
    build_test,
    build_topology,
    capable_set_for,
    deployment_draw,
)

STA_COLUMN_IDS = tuple(range(STA_ID_BASE, STA_ID_BASE + 10))

ROW_COLUMNS = (
    "test_id",
    "rssi_ap_e_dbm",
    "n_ext",
    "channel_plan",
    "b_ext_bps",
    "deployment_index",
    "mechanism",
    "alpha",
    "beta_pct",
    "b_t_bps",
    "throughput_pct",
    "avg_delay_ms",
    "congested",
) + tuple(f"sta_{i}" for i in STA_COLUMN_IDS)

AGGREGATE_COLUMNS = (
    "test_id",
    "rssi_ap_e_dbm",
    "n_ext",
    "channel_plan",
    "b_ext_bps",
    "mechanism",
    "alpha",
    "beta_pct",
    "b_t_bps",
    "k",
    "mean_throughput_pct",
    "mean_delay_ms",
    "congested_pct",
    "association_rate_pct",
)


@dataclass(frozen=True)
class EngineParams:
    """Physics bundle shared by every sweep point of a run."""

    propagation: PropagationParams = DEFAULT_PROPAGATION
    mcs_tables: Mapping[Band, McsTable] = field(
        default_factory=lambda: dict(DEFAULT_MCS_TABLES)
    )
    overheads: Mapping[Band, MacOverheads] = field(
        default_factory=lambda: dict(DEFAULT_OVERHEADS)
    )
    band_mhz: Mapping[Band, float] = field(
        default_factory=lambda: {Band.GHZ_2_4: 2400.0, Band.GHZ_5: 5000.0}
    )
    congested_hop_delay_ms: float = CONGESTED_HOP_DELAY_MS


@dataclass(frozen=True)
class ResultRow:
    """Outcome of one deployment under one sweep point."""

    test_id: str
    rssi_ap_e_dbm: Optional[float]
    n_ext: int
    channel_plan: str
    b_ext_bps: float
    deployment_index: int
    mechanism: str
    alpha: float
    beta_pct: float
    b_t_bps: float
    throughput_pct: float
    avg_delay_ms: float
    congested: bool
    associations: dict[int, Optional[int]]


@dataclass(frozen=True)
class Aggregate:
    """Deployment-averaged outcome of one sweep point."""

    test_id: str
    rssi_ap_e_dbm: Optional[float]
    n_ext: int
    channel_plan: str
    b_ext_bps: float
    mechanism: str
    alpha: float
    beta_pct: float
    b_t_bps: float
    k: int
    mean_throughput_pct: float
    mean_delay_ms: float
    congested_pct: float
    association_rate_pct: float


@dataclass
class RunConfig:
    """What to run and how; None leaves the grid's own value untouched.

    ``mechanism``, ``channel_plan``, ``n_ext`` and ``b_t_bps`` filter the
    grid; ``alpha``, ``beta_pct``, ``k`` and ``seed`` rewrite it.
    """

    test_id: str
    alpha: Optional[float] = None
    beta_pct: Optional[float] = None
    k: Optional[int] = None
    seed: Optional[int] = None
    mechanism: Optional[Mechanism] = None
    channel_plan: Optional[str] = None
    n_ext: Optional[int] = None
    b_t_bps: Optional[tuple[float, ...]] = None
    workers: int = 1
    out_dir: Optional[str] = None
    emit_events: bool = False
    params: EngineParams = field(default_factory=EngineParams)

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if isinstance(self.mechanism, str):
            self.mechanism = Mechanism(self.mechanism)
        if self.b_t_bps is not None:
            self.b_t_bps = tuple(float(b) for b in self.b_t_bps)


@dataclass(frozen=True)
class RunResult:
    points: tuple[SweepPoint, ...]
    rows: tuple[ResultRow, ...]
    aggregates: tuple[Aggregate, ...]


def _b_t_matches(value: float, wanted: Sequence[float]) -> bool:
    return any(math.isclose(value, w, rel_tol=1e-9, abs_tol=0.5) for w in wanted)


def apply_overrides(points: Sequence[SweepPoint], cfg: RunConfig) -> list[SweepPoint]:
    out = []
    for point in points:
        if cfg.mechanism is not None and point.selection.mechanism is not cfg.mechanism:
            continue
        if cfg.channel_plan is not None and point.scenario.channel_plan != cfg.channel_plan:
            continue
        if cfg.n_ext is not None and point.scenario.n_extenders != cfg.n_ext:
            continue
        if cfg.b_t_bps is not None and not _b_t_matches(point.b_t_bps, cfg.b_t_bps):
            continue
        sel = point.selection
        if sel.mechanism is Mechanism.LOAD_AWARE:
            if cfg.alpha is not None:
                sel = replace(sel, alpha=cfg.alpha)
            if cfg.beta_pct is not None:
                sel = replace(sel, beta_pct=cfg.beta_pct)
        spec = point.scenario
        if cfg.k is not None:
            spec = replace(spec, k=cfg.k)
        if cfg.seed is not None:
            spec = replace(spec, seed=cfg.seed)
        out.append(replace(point, selection=sel, scenario=spec))
    return out


def _steer(
    topo: Topology, env: SimEnv, point: SweepPoint, events_path: Optional[str]
) -> Topology:
    if events_path is not None:
        steered, log = run_mechanism(topo, env, point.selection)
        export_events(log, events_path)
        return steered
    steered = initial_association(topo, env)
    if point.selection.mechanism is Mechanism.LOAD_AWARE:
        steered, _ = reassociation_pass(steered, env, point.selection)
    return steered


def evaluate_point(
    point_index: int,
    point: SweepPoint,
    params: EngineParams,
    events_dir: Optional[str] = None,
) -> tuple[list[ResultRow], Aggregate]:
    """All deployments of one sweep point, plus their aggregate."""
    spec = point.scenario
    base = build_topology(spec, point.rssi_ap_e_dbm, params.propagation)
    env = SimEnv(
        traffic=point.traffic,
        external=tuple(point.external),
        mcs_tables=params.mcs_tables,
        overheads=params.overheads,
        propagation=params.propagation,
        band_mhz=params.band_mhz,
        congested_hop_delay_ms=params.congested_hop_delay_ms,
    )
    sta_ids = [STA_ID_BASE + i for i in range(spec.n_sta)]
    rows: list[ResultRow] = []
    thr_sum = delay_sum = assoc_sum = 0.0
    congested_n = 0
    for dep in range(spec.k):
        positions, perm = deployment_draw(spec, dep, params.propagation)
        capable = capable_set_for(spec, perm, point.selection.beta_pct)
        topo = add_stations(base, positions, capable)
        dep_env = with_link_cache(topo, env)
        events_path = None
        if events_dir is not None:
            events_path = os.path.join(
                events_dir, f"t{point.test_id}_p{point_index:04d}_d{dep:05d}.ndjson"
            )
        steered = _steer(topo, dep_env, point, events_path)
        report = evaluate(steered, dep_env)
        assoc = {sid: steered.associations.get(sid) for sid in sta_ids}
        rows.append(
            ResultRow(
                test_id=point.test_id,
                rssi_ap_e_dbm=point.rssi_ap_e_dbm,
                n_ext=spec.n_extenders,
                channel_plan=spec.channel_plan,
                b_ext_bps=point.b_ext_bps,
                deployment_index=dep,
                mechanism=point.selection.mechanism.value,
                alpha=point.selection.alpha,
                beta_pct=point.selection.beta_pct,
                b_t_bps=point.b_t_bps,
                throughput_pct=report.network_throughput_pct,
                avg_delay_ms=report.avg_delay_ms,
                congested=report.congested,
                associations=assoc,
            )
        )
        thr_sum += report.network_throughput_pct
        delay_sum += report.avg_delay_ms
        assoc_sum += sum(1 for v in assoc.values() if v is not None) / spec.n_sta
        congested_n += 1 if report.congested else 0
    k = spec.k
    agg = Aggregate(
        test_id=point.test_id,
        rssi_ap_e_dbm=point.rssi_ap_e_dbm,
        n_ext=spec.n_extenders,
        channel_plan=spec.channel_plan,
        b_ext_bps=point.b_ext_bps,
        mechanism=point.selection.mechanism.value,
        alpha=point.selection.alpha,
        beta_pct=point.selection.beta_pct,
        b_t_bps=point.b_t_bps,
        k=k,
        mean_throughput_pct=thr_sum / k,
        mean_delay_ms=delay_sum / k,
        congested_pct=100.0 * congested_n / k,
        association_rate_pct=100.0 * assoc_sum / k,
    )
    return rows, agg


def _eval_task(args: tuple[int, SweepPoint, EngineParams, Optional[str]]):
    return evaluate_point(*args)


def run(cfg: RunConfig) -> RunResult:
    points = apply_overrides(build_test(cfg.test_id), cfg)
    events_dir = None
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        if cfg.emit_events:
            events_dir = os.path.join(cfg.out_dir, "events")
            os.makedirs(events_dir, exist_ok=True)
    tasks = [(i, p, cfg.params, events_dir) for i, p in enumerate(points)]
    if cfg.workers > 1 and len(tasks) > 1:
        with multiprocessing.Pool(cfg.workers) as pool:
            results = pool.map(_eval_task, tasks)
    else:
        results = [_eval_task(t) for t in tasks]
    rows: list[ResultRow] = []
    aggregates: list[Aggregate] = []
    for point_rows, agg in results:
        rows.extend(point_rows)
        aggregates.append(agg)
    if cfg.out_dir is not None:
        export_rows_csv(rows, os.path.join(cfg.out_dir, "rows.csv"))
        export_aggregates_csv(aggregates, os.path.join(cfg.out_dir, "aggregates.csv"))
        export_json(rows, aggregates, os.path.join(cfg.out_dir, "results.json"))
    return RunResult(points=tuple(points), rows=tuple(rows), aggregates=tuple(aggregates))


# --- exports ----------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _row_record(row: ResultRow) -> list[str]:
    rec = [
        _cell(row.test_id),
        _cell(row.rssi_ap_e_dbm),
        _cell(row.n_ext),
        _cell(row.channel_plan),
        _cell(row.b_ext_bps),
        _cell(row.deployment_index),
        _cell(row.mechanism),
        _cell(row.alpha),
        _cell(row.beta_pct),
        _cell(row.b_t_bps),
        _cell(row.throughput_pct),
        _cell(row.avg_delay_ms),
        _cell(row.congested),
    ]
    for sid in STA_COLUMN_IDS:
        if sid not in row.associations:
            rec.append("")
        else:
            parent = row.associations[sid]
            rec.append("none" if parent is None else str(parent))
    return rec


def export_rows_csv(rows: Sequence[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROW_COLUMNS)
        for row in rows:
            writer.writerow(_row_record(row))


def export_aggregates_csv(aggs: Sequence[Aggregate], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for a in aggs:
            writer.writerow(
                [
                    _cell(a.test_id),
                    _cell(a.rssi_ap_e_dbm),
                    _cell(a.n_ext),
                    _cell(a.channel_plan),
                    _cell(a.b_ext_bps),
                    _cell(a.mechanism),
                    _cell(a.alpha),
                    _cell(a.beta_pct),
                    _cell(a.b_t_bps),
                    _cell(a.k),
                    _cell(a.mean_throughput_pct),
                    _cell(a.mean_delay_ms),
                    _cell(a.congested_pct),
                    _cell(a.association_rate_pct),
                ]
            )


def _row_json(row: ResultRow) -> dict:
    rec = {c: getattr(row, c) for c in ROW_COLUMNS if not c.startswith("sta_")}
    rec["associations"] = {str(k): v for k, v in sorted(row.associations.items())}
    return rec


def export_json(rows: Sequence[ResultRow], aggs: Sequence[Aggregate], path: str) -> None:
    payload = {
        "rows": [_row_json(r) for r in rows],
        "aggregates": [
            {c: getattr(a, c) for c in AGGREGATE_COLUMNS} for a in aggs
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


# --- derived summaries ------------------------------------------------------

RANGE_CRITERIA = ("thr99", "delay10", "no_congestion")


def _satisfies(a: Aggregate, criterion: str) -> bool:
    if criterion == "thr99":
        return a.mean_throughput_pct >= 99.0
    if criterion == "delay10":
        return a.mean_delay_ms <= 10.0
    if criterion == "no_congestion":
        return a.congested_pct == 0.0
    raise ValueError(f"unknown criterion {criterion!r}; known: {RANGE_CRITERIA}")


def operational_range(aggs: Sequence[Aggregate], criterion: str) -> float:
    """Largest swept total demand (bps) still meeting the criterion, else 0.

    The caller passes the aggregates of a single demand curve; the value is
    literal, no interpolation between grid steps.
    """
    passing = [a.b_t_bps for a in aggs if _satisfies(a, criterion)]
    return max(passing) if passing else 0.0
