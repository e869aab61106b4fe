"""Command-line interface.

Subcommands: run (one mission), sweep (Monte Carlo over strategies),
patterns (emit waypoint plans), localize-bench (localization Monte Carlo),
comms-bench (link-model curves). All randomness is controlled by --seed;
repeated invocations with the same seed produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace

import numpy as np

from seascan import radio, rangeloc, runner, search
from seascan.scenario import Scenario, ScenarioError, load_scenario


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


def build_parser():
    parser = argparse.ArgumentParser(prog="seascan",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(required=True)

    p_run = sub.add_parser("run", help="run one mission and print its metrics")
    _common(p_run)
    p_run.add_argument("--log-out", help="write the event log (NDJSON)")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="paired Monte Carlo over strategies")
    _common(p_sweep)
    p_sweep.add_argument("--runs", type=int, default=10)
    p_sweep.add_argument("--strategies", default="informed,parallel",
                         help="comma-separated strategy list")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.set_defaults(func=cmd_sweep)

    p_pat = sub.add_parser("patterns", help="emit waypoint plans as CSV")
    _common(p_pat)
    p_pat.set_defaults(func=cmd_patterns)

    p_loc = sub.add_parser("localize-bench",
                           help="range-only localization Monte Carlo")
    p_loc.add_argument("--seed", type=int, default=0)
    p_loc.add_argument("--agents", type=int, default=6)
    p_loc.add_argument("--trials", type=int, default=100)
    p_loc.add_argument("--extent", type=float, default=500.0)
    p_loc.add_argument("--out", help="write per-trial RMSE as CSV")
    p_loc.set_defaults(func=cmd_localize_bench)

    p_comms = sub.add_parser("comms-bench", help="link-model curves as CSV")
    p_comms.add_argument("--out", help="output CSV path")
    p_comms.add_argument("--sizes", default="100,1000,10000",
                         help="message sizes in bytes")
    p_comms.set_defaults(func=cmd_comms_bench)
    return parser


def _common(p):
    p.add_argument("--scenario", help="scenario YAML file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strategy", default=None,
                   choices=["parallel", "creeping", "spiral", "informed"])
    p.add_argument("--out", help="output CSV path")


def _scenario(args) -> Scenario:
    scn = load_scenario(args.scenario) if args.scenario else Scenario()
    if args.seed is not None:
        scn = replace(scn, seed=args.seed)
    if args.strategy is not None:
        scn = replace(scn, strategy=args.strategy,
                      uav_count=runner.STRATEGY_UAVS[args.strategy])
    return scn


def cmd_run(args):
    scn = _scenario(args)
    metrics, sim = runner.run_mission(scn, return_sim=True)
    if args.log_out:
        sim.log.write(args.log_out)
    table = runner.ResultTable([runner.ResultRow(
        f"{scn.strategy}-{scn.seed}", scn.seed, scn.strategy,
        scn.uav_count, metrics)])
    if args.out:
        runner.export_csv(table, args.out, include_aggregates=False)
    for name in runner.CSV_COLUMNS[4:]:
        attr = {"coverage_time_s": "coverage_time",
                "time_to_detect_s": "time_to_detect",
                "in_range_pct": "in_range_pct",
                "gt5_relay_pct": "gt5_relay_pct",
                "loc_rmse_med_m": "loc_rmse_med",
                "loc_rmse_p95_m": "loc_rmse_p95"}[name]
        print(f"{name}: {getattr(metrics, attr)}")
    return 0


def cmd_sweep(args):
    scn = _scenario(args)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    table = runner.monte_carlo(scn, strategies, args.runs,
                               seed0=scn.seed, workers=args.workers)
    out = args.out or "sweep.csv"
    runner.export_csv(table, out)
    for row in table.aggregate_rows():
        m = row.metrics
        print(f"{row.run_id}: detect={m.time_to_detect} "
              f"coverage={m.coverage_time} gt5={m.gt5_relay_pct}")
    print(f"wrote {out}")
    return 0


def cmd_patterns(args):
    scn = _scenario(args)
    if scn.strategy == "informed":
        raise ValueError("patterns emits the non-informed sweeps; "
                         "run the informed plan via `run`")
    plan = search.pattern_plan(scn.strategy, scn.zone, scn.uav_count,
                               scn.track_spacing)
    out = args.out or f"{scn.strategy}_waypoints.csv"
    with open(out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["uav", "seq", "x", "y", "action", "half"])
        for row in plan.records():
            writer.writerow(row)
    print(f"wrote {out}")
    return 0


def cmd_localize_bench(args):
    rng = np.random.default_rng(args.seed)
    rmses = []
    for trial in range(args.trials):
        truth = rng.random((args.agents, 2)) * args.extent
        meas = rangeloc.measure_ranges(truth, rng)
        d, lam = rangeloc.build_distance_matrix(meas, args.agents)
        init = truth + rng.standard_normal((args.agents, 2)) * 50.0
        placement = rangeloc.smacof_solve(d, lam, init)
        aligned, *_ = rangeloc.align_global(
            placement.positions, range(3), truth[:3], last_known=truth)
        rmse = float(np.sqrt(((aligned - truth) ** 2).sum(axis=1).mean()))
        rmses.append(rmse)
    med = sorted(rmses)[len(rmses) // 2]
    print(f"median RMSE over {args.trials} trials: {med:.3f} m")
    if args.out:
        with open(args.out, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["trial", "rmse_m"])
            for i, r in enumerate(rmses):
                writer.writerow([i, repr(r)])
        print(f"wrote {args.out}")
    return 0


def cmd_comms_bench(args):
    params = radio.LinkParams()
    sizes = [int(s) for s in args.sizes.split(",")]
    rows = []
    for d in range(25, int(params.d_max) + 1, 25):
        mu = radio.mean_rx_power(d, params)
        ber = radio.bit_error_ratio(mu, params.nf)
        row = [d, mu, ber] + [radio.drop_probability(ber, n) for n in sizes]
        rows.append(row)
    header = ["distance_m", "mean_rx_dbm", "ber_at_mean"] + \
        [f"p_drop_{n}B" for n in sizes]
    out = args.out or "comms_bench.csv"
    with open(out, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row[0]] + [repr(float(v)) for v in row[1:]])
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
