"""Command-line entry points: score dumps, calibration, simulation, analysis, serving."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import FORMAT_ALIASES, LeagueConfig, load_league_config
from .future_picks import calibrate
from .ingest import build_pool, load_weekly_stats, select_q, write_weekly_stats, z_score_totals
from .optimizer import OptimizerConfig
from .scoring import conversion_components, league_aggregates, x_score_matrix
from .simulate import (
    SeasonConfig,
    gradient_analysis,
    load_calibration_csv,
    load_correlation_csv,
    run_experiment,
    write_calibration_csv,
    write_category_hist_csv,
    write_gradient_analysis_csv,
    write_transcript_jsonl,
    write_winrates_csv,
)
from .synth import synthetic_pool


def _add_stats_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--stats", required=True, help="weekly stats CSV")
    parser.add_argument("--config", help="league config JSON (defaults to 12-team 9-cat)")
    parser.add_argument("--min-weeks", type=int, default=10)


def _load(args: argparse.Namespace) -> tuple[LeagueConfig, list]:
    config = load_league_config(args.config) if args.config else LeagueConfig()
    records = load_weekly_stats(args.stats, config)
    return config, records


def cmd_scores(args: argparse.Namespace) -> int:
    config, records = _load(args)
    pool = build_pool(records, args.min_weeks)
    q = select_q(pool, config)
    agg = league_aggregates(q, config)
    x = x_score_matrix(q, agg)
    g = x * conversion_components(agg)
    z = z_score_totals(q, config)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    writer = csv.writer(out)
    names = config.category_names
    writer.writerow(
        ["player_id", "name", "positions", "z_total", "g_total"]
        + [f"x_{n}" for n in names]
        + [f"g_{n}" for n in names]
    )
    order = np.argsort(-g.sum(axis=1))
    for i in order:
        rec = q[i]
        writer.writerow(
            [rec.player_id, rec.display_name, "|".join(rec.eligible_positions),
             f"{z[i]:.4f}", f"{g[i].sum():.4f}"]
            + [f"{v:.4f}" for v in x[i]]
            + [f"{v:.4f}" for v in g[i]]
        )
    if args.out:
        out.close()
        print(f"wrote {args.out}")
    return 0


def cmd_calibrate(args: argparse.Namespace) -> int:
    observations = load_calibration_csv(args.obs)
    result = calibrate(observations)
    print(f"omega = {result.params.omega:.4f} (R^2 {result.r_squared_omega:.3f}, "
          f"se {result.stderr_omega:.4f})")
    print(f"gamma = {result.params.gamma:.4f} (R^2 {result.r_squared_gamma:.3f}, "
          f"se {result.stderr_gamma:.4f})")
    print(f"n = {result.n_observations}")
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    config, records = _load(args)
    from .simulate import build_model

    model = build_model(records, config, args.min_weeks)
    fmt = FORMAT_ALIASES[args.format]
    season = SeasonConfig(weeks=args.weeks or config.weeks_per_season,
                          seasons=args.seasons, seed=args.seed, format=fmt, h_seat=args.seat)
    result = run_experiment(
        model, args.seat, season,
        shortlist_size=args.shortlist,
        opt_config=OptimizerConfig(max_iters=args.max_iters),
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_winrates_csv(out / "winrates.csv", [result])
    write_category_hist_csv(out / "category_hist.csv", config, [result])
    write_calibration_csv(out / "calibration_obs.csv", [result])
    write_transcript_jsonl(out / "transcript.jsonl", [result])
    print(f"seat {args.seat}: championship rate {result.championship_rate:.3f} "
          f"+- {result.standard_error:.3f} over {result.seasons} seasons")
    print(f"outputs in {out}/")
    return 0


def cmd_gradient_analysis(args: argparse.Namespace) -> int:
    config = load_league_config(args.config) if args.config else LeagueConfig()
    corr = load_correlation_csv(args.corr) if args.corr else np.eye(config.num_categories)
    levels = [float(x) for x in args.levels.split(",")]
    fmt = FORMAT_ALIASES[args.format]
    rows = gradient_analysis(corr, levels, config, fmt, samples=args.samples, seed=args.seed)
    if args.out:
        write_gradient_analysis_csv(args.out, config, rows)
        print(f"wrote {args.out}")
    else:
        names = config.category_names
        print("advantage  victory  " + "  ".join(f"{n:>8}" for n in names))
        for row in rows:
            sens = "  ".join(f"{s:8.4f}" for s in row["sensitivities"])
            print(f"{row['advantage']:9.3f}  {row['victory_probability']:7.3f}  {sens}")
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    records = synthetic_pool(n_players=args.players, n_weeks=args.weeks, seed=args.seed)
    write_weekly_stats(records, args.out)
    print(f"wrote {args.out} ({args.players} players x {args.weeks} weeks, seed {args.seed})")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import main_serve

    main_serve(args.stats, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hscore", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scores", help="dump per-player X/G score tables as CSV")
    _add_stats_args(p)
    p.add_argument("--out", help="output CSV (default stdout)")
    p.set_defaults(func=cmd_scores)

    p = sub.add_parser("calibrate", help="fit omega/gamma from (sigma, m, k) observations")
    p.add_argument("--obs", required=True, help="CSV with header sigma,m,k")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("simulate", help="seat experiment: draft once, simulate many seasons")
    _add_stats_args(p)
    p.add_argument("--format", choices=["ec", "mc"], default="mc")
    p.add_argument("--seat", type=int, default=0)
    p.add_argument("--seasons", type=int, default=1000)
    p.add_argument("--weeks", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--shortlist", type=int, default=50)
    p.add_argument("--max-iters", type=int, default=60)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gradient-analysis", help="correlated per-category sensitivity table")
    p.add_argument("--corr", help="CSV correlation matrix (default identity)")
    p.add_argument("--levels", default="0,0.1,0.2,0.3,0.4", help="comma-separated advantage levels")
    p.add_argument("--format", choices=["ec", "mc"], default="mc")
    p.add_argument("--config", help="league config JSON")
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output CSV (default: print table)")
    p.set_defaults(func=cmd_gradient_analysis)

    p = sub.add_parser("synth", help="generate a synthetic weekly stats CSV")
    p.add_argument("--players", type=int, default=200)
    p.add_argument("--weeks", type=int, default=26)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("serve", help="run the draft assistant HTTP service")
    p.add_argument("--stats", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
