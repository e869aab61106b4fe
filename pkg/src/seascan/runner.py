"""Mission runner and experiment harness.

run_mission executes one full scenario and reduces its event log to the
comparison metrics (coverage time, detection time, communication coverage,
localization error). monte_carlo sweeps seeds with vessel layouts paired
across strategies so detection times compare like for like.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from seascan import radio
from seascan.scenario import Scenario
from seascan.world import MissionSim

CSV_COLUMNS = ("run_id", "seed", "strategy", "uav_count", "coverage_time_s",
               "time_to_detect_s", "in_range_pct", "gt5_relay_pct",
               "loc_rmse_med_m", "loc_rmse_p95_m")


@dataclass
class RunMetrics:
    coverage_time: float        # None if the pattern was not exhausted in time
    time_to_detect: float       # None if the target was never reported to base
    in_range_pct: float
    gt5_relay_pct: float
    loc_rmse_med: float
    loc_rmse_p95: float


def metrics_from_log(log) -> RunMetrics:
    """Pure reduction of an event log to RunMetrics."""
    cov = log.first_of_kind("coverage")
    started = log.first_of_kind("pattern_start")
    found = log.first_of_kind("found")
    comm = radio.comm_metrics(log.of_kind("comm"))
    errs = sorted(r["err"] for r in log.of_kind("fix"))
    if errs:
        med = errs[len(errs) // 2]
        p95 = errs[min(int(0.95 * len(errs)), len(errs) - 1)]
    else:
        med = p95 = float("nan")
    t0 = started["t"] if started else 0.0
    return RunMetrics(
        coverage_time=(cov["t"] - t0) if cov else None,
        time_to_detect=found["t"] if found else None,
        in_range_pct=comm["in_range_pct"],
        gt5_relay_pct=comm["gt5_relay_pct"],
        loc_rmse_med=med,
        loc_rmse_p95=p95,
    )


def run_mission(scn: Scenario, return_sim=False):
    """Run one mission to completion and compute its metrics."""
    sim = MissionSim(scn)
    sim.run()
    metrics = metrics_from_log(sim.log)
    if return_sim:
        return metrics, sim
    return metrics


@dataclass
class ResultRow:
    run_id: str
    seed: int
    strategy: str
    uav_count: int
    metrics: RunMetrics


@dataclass
class ResultTable:
    rows: list

    def aggregate_rows(self):
        """Per-strategy mean and median rows over the numeric metrics."""
        out = []
        strategies = []
        for r in self.rows:
            if r.strategy not in strategies:
                strategies.append(r.strategy)
        for strat in strategies:
            rows = [r for r in self.rows if r.strategy == strat]
            for name, fn in (("mean", _mean), ("median", _median)):
                agg = RunMetrics(
                    coverage_time=fn([r.metrics.coverage_time for r in rows]),
                    time_to_detect=fn([r.metrics.time_to_detect for r in rows]),
                    in_range_pct=fn([r.metrics.in_range_pct for r in rows]),
                    gt5_relay_pct=fn([r.metrics.gt5_relay_pct for r in rows]),
                    loc_rmse_med=fn([r.metrics.loc_rmse_med for r in rows]),
                    loc_rmse_p95=fn([r.metrics.loc_rmse_p95 for r in rows]),
                )
                out.append(ResultRow(f"{strat}/{name}", -1, strat,
                                     rows[0].uav_count, agg))
        return out


def _mean(values):
    vals = [v for v in values if v is not None and not _isnan(v)]
    return sum(vals) / len(vals) if vals else None


def _median(values):
    vals = sorted(v for v in values if v is not None and not _isnan(v))
    if not vals:
        return None
    n = len(vals)
    return (vals[n // 2] if n % 2 else 0.5 * (vals[n // 2 - 1] + vals[n // 2]))


def _isnan(v):
    return isinstance(v, float) and math.isnan(v)


# UAV budget per strategy: adding the radar payload costs one fixed-wing
STRATEGY_UAVS = {"parallel": 3, "creeping": 3, "spiral": 3, "informed": 2}


def _run_indexed(args):
    index, scn = args
    return index, run_mission(scn)


def monte_carlo(base: Scenario, strategies, n_runs, seed0=0, workers=1,
                stop_on_detect=True) -> ResultTable:
    """Paired sweep: run each strategy over the same n_runs vessel layouts.

    Vessel spawning draws only from the per-seed spawn stream, so every
    strategy sees identical layouts for a given run index. Rows come back in
    deterministic (strategy, seed) order regardless of worker count.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be >= 1")
    jobs = []
    for strat in strategies:
        for i in range(n_runs):
            scn = replace(base, strategy=strat, seed=seed0 + i,
                          uav_count=STRATEGY_UAVS[strat],
                          stop_on_detect=stop_on_detect)
            jobs.append((len(jobs), scn))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = dict(pool.map(_run_indexed, jobs))
    else:
        results = dict(_run_indexed(j) for j in jobs)
    rows = []
    for idx, scn in jobs:
        rows.append(ResultRow(f"{scn.strategy}-{scn.seed}", scn.seed,
                              scn.strategy, scn.uav_count, results[idx]))
    return ResultTable(rows)


def export_csv(table: ResultTable, path, include_aggregates=True):
    """Write the table with the documented column order; None -> empty cell."""
    rows = list(table.rows)
    if include_aggregates:
        rows += table.aggregate_rows()
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            m = r.metrics
            writer.writerow([
                r.run_id, r.seed, r.strategy, r.uav_count,
                _cell(m.coverage_time), _cell(m.time_to_detect),
                _cell(m.in_range_pct), _cell(m.gt5_relay_pct),
                _cell(m.loc_rmse_med), _cell(m.loc_rmse_p95),
            ])
    return path


def _cell(value):
    if value is None or _isnan(value):
        return ""
    return repr(float(value))


def load_csv(path) -> ResultTable:
    """Inverse of export_csv (aggregate rows included as ordinary rows)."""
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if tuple(reader.fieldnames) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV columns in {path}")
        for rec in reader:
            rows.append(ResultRow(
                rec["run_id"], int(rec["seed"]), rec["strategy"],
                int(rec["uav_count"]),
                RunMetrics(
                    coverage_time=_parse(rec["coverage_time_s"]),
                    time_to_detect=_parse(rec["time_to_detect_s"]),
                    in_range_pct=_parse(rec["in_range_pct"]),
                    gt5_relay_pct=_parse(rec["gt5_relay_pct"]),
                    loc_rmse_med=_parse(rec["loc_rmse_med_m"]),
                    loc_rmse_p95=_parse(rec["loc_rmse_p95_m"]),
                )))
    return ResultTable(rows)


def _parse(cell):
    return None if cell == "" else float(cell)
