#!/usr/bin/env python3
"""Run one campaign test end to end and print a digest of the results.

Writes rows.csv, aggregates.csv and results.json into --out. For tests
that sweep the offered demand, also prints the operational range each
curve sustains under the three stop criteria.
"""
import argparse
import sys
import time
from collections import defaultdict

from wlansteer.runner import RANGE_CRITERIA, RunConfig, operational_range, run


def digest(res) -> None:
    groups = defaultdict(list)
    for a in res.aggregates:
        key = (a.mechanism, a.n_ext, a.channel_plan, a.alpha, a.beta_pct,
               a.rssi_ap_e_dbm, a.b_ext_bps)
        groups[key].append(a)
    sweeps_demand = len({a.b_t_bps for a in res.aggregates}) > 1
    for key in sorted(groups, key=str):
        mech, n_ext, plan, alpha, beta, rssi, b_ext = key
        aggs = sorted(groups[key], key=lambda a: a.b_t_bps)
        label = f"{mech:<9} ext={n_ext} plan={plan} a={alpha} b={beta:g}"
        if rssi is not None:
            label += f" rssi={rssi:g}"
        if b_ext:
            label += f" bext={b_ext / 1e6:g}M"
        if sweeps_demand and len(aggs) > 1:
            ranges = "  ".join(
                f"{c}={operational_range(aggs, c) / 1e6:.2f}M" for c in RANGE_CRITERIA)
            print(f"{label}  {ranges}")
        else:
            for a in aggs:
                print(f"{label}  B_T={a.b_t_bps / 1e6:g}M thr={a.mean_throughput_pct:.2f}%"
                      f" delay={a.mean_delay_ms:.3f}ms congested={a.congested_pct:.1f}%"
                      f" assoc={a.association_rate_pct:.2f}%")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--test", default="1.3", help="campaign test id")
    parser.add_argument("--k", type=int, help="deployments per sweep point")
    parser.add_argument("--seed", type=int, help="base deployment seed")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--mechanism", choices=["rssi", "loadaware"])
    parser.add_argument("--channel-plan", choices=["multi", "single"], dest="channel_plan")
    parser.add_argument("--n-ext", type=int, dest="n_ext")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--beta", type=float, dest="beta_pct")
    parser.add_argument("--out", default="campaign_out")
    parser.add_argument("--emit-events", action="store_true", dest="emit_events")
    args = parser.parse_args(argv)

    cfg = RunConfig(test_id=args.test, k=args.k, seed=args.seed, workers=args.workers,
                    mechanism=args.mechanism, channel_plan=args.channel_plan,
                    n_ext=args.n_ext, alpha=args.alpha, beta_pct=args.beta_pct,
                    out_dir=args.out, emit_events=args.emit_events)
    started = time.time()
    res = run(cfg)
    digest(res)
    print(f"{len(res.rows)} rows from {len(res.points)} sweep points"
          f" in {time.time() - started:.1f} s -> {args.out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
