"""Command-line workbench: synthetic pointing blocks, driving sessions,
log analysis, and the session service.
"""
from __future__ import annotations

import argparse
import json
import sys
from collections import defaultdict
from typing import Optional, Sequence

from .config import default_session_config, session_config_from_json, session_config_to_dict
from .core import DEFAULT_SCREEN
from .stats import anova_oneway, outer_fence_filter, summarize, welch_t
from .synthetic import (
    PointingPipeline,
    UserParams,
    simulate_drive,
    simulate_incar_session,
    simulate_pointing_session,
)
from .tasks import (
    DegenerateDesign,
    TrialRecord,
    fit_fitts,
    fitts_id,
    paper_grid,
    read_trials_jsonl,
    write_trials_jsonl,
    wrong_selection_rate,
)


def _user_params(args: argparse.Namespace) -> UserParams:
    return UserParams(
        fitts_a_ms=args.fitts_a,
        fitts_b_ms_per_bit=args.fitts_b,
        reaction_ms=args.reaction,
        context_switch_ms=args.context_switch,
        endpoint_noise_px=args.noise,
        mt_jitter_ms=args.mt_jitter,
        seed=args.seed,
    )


def _add_user_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fitts-a", type=float, default=300.0, help="Fitts intercept, ms")
    p.add_argument("--fitts-b", type=float, default=150.0, help="Fitts slope, ms/bit")
    p.add_argument("--reaction", type=float, default=300.0, help="cue reaction, ms")
    p.add_argument("--context-switch", type=float, default=500.0,
                   help="driving-to-display attention switch, ms")
    p.add_argument("--noise", type=float, default=None,
                   help="endpoint noise sigma, px (default W/12)")
    p.add_argument("--mt-jitter", type=float, default=0.0,
                   help="Gaussian sigma added to movement times, ms")
    p.add_argument("--seed", type=int, default=1)


def cmd_point(args: argparse.Namespace) -> int:
    pipeline = PointingPipeline.for_modality(args.modality, DEFAULT_SCREEN)
    params = _user_params(args)
    if args.incar:
        records = simulate_incar_session(params, pipeline, args.trials,
                                         adaptive=args.adaptive)
    else:
        records = simulate_pointing_session(params, pipeline, paper_grid(),
                                            args.trials, adaptive=args.adaptive)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(write_trials_jsonl(records))
    _print_condition_table(records)
    _print_fit(records, label=args.modality + ("-A" if args.adaptive else ""))
    return 0


def _print_condition_table(records: Sequence[TrialRecord]) -> None:
    by_cond: dict[tuple[float, float], list[float]] = defaultdict(list)
    for r in records:
        if r.correct and r.select_t_ms is not None:
            by_cond[(r.condition.W_px, r.condition.D_px)].append(r.selection_time_ms)
    print(f"{'W':>6} {'D':>6} {'ID':>7} {'n':>4} {'mean ms':>9}")
    for (w, d), times in sorted(by_cond.items()):
        tid = fitts_id(type(records[0].condition)(d, w))
        print(f"{w:6.0f} {d:6.0f} {tid:7.3f} {len(times):4d} "
              f"{sum(times) / len(times):9.1f}")


def _print_fit(records: Sequence[TrialRecord], label: str = "") -> None:
    wrong = wrong_selection_rate(records)
    try:
        fit = fit_fitts(records)
    except DegenerateDesign:
        print(f"{label}: wrong selections {wrong:.1f}% (no Fitts fit: single ID)")
        return
    ip = f"{fit.ip_bits_per_s:.3f}" if fit.ip_bits_per_s is not None else "n/a"
    print(f"{label}: T = {fit.a_ms:.1f} + {fit.b_ms_per_bit:.1f}*ID ms, "
          f"IP {ip} bits/s, r2 {fit.r2:.4f}, wrong {wrong:.1f}%")


def cmd_drive(args: argparse.Namespace) -> int:
    pipeline = PointingPipeline.for_modality(args.modality, DEFAULT_SCREEN)
    params = _user_params(args)
    result = simulate_drive(params, pipeline, args.duration * 1000.0,
                            secondary=not args.single, gain=args.gain)
    if args.out:
        from .driving import drive_log_to_jsonl
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(drive_log_to_jsonl(result.states))
    print(f"mean lane deviation : {result.mean_deviation_m:.3f} m")
    print(f"steering angle SD   : {result.steering_sd_rad:.4f} rad")
    print(f"mean speed          : {result.mean_speed_mps * 3.6:.1f} km/h")
    if result.response_times_ms:
        mean_rt = sum(result.response_times_ms) / len(result.response_times_ms)
        print(f"cues answered       : {len(result.response_times_ms)}")
        print(f"mean response time  : {mean_rt:.0f} ms")
    return 0


def analyze_records(records: Sequence[TrialRecord]) -> dict:
    """Per-modality summaries, Fitts fits, the outer-fence report over all
    selection times, and cross-modality tests."""
    by_mod: dict[str, list[TrialRecord]] = defaultdict(list)
    for r in records:
        key = r.source.value + ("-A" if r.adaptive else "")
        by_mod[key].append(r)

    out: dict = {"modalities": {}, "fence": None, "tests": {}}
    times_by_mod: dict[str, list[float]] = {}
    for mod, recs in sorted(by_mod.items()):
        times = [r.selection_time_ms for r in recs
                 if r.correct and r.select_t_ms is not None]
        times_by_mod[mod] = times
        entry: dict = {"wrong_selection_rate": wrong_selection_rate(recs)}
        if times:
            s = summarize(times)
            entry.update(mean_ms=s.mean, median_ms=s.median, sd_ms=s.sd, n=s.count)
        try:
            fit = fit_fitts(recs)
            entry["fitts"] = {
                "a_ms": fit.a_ms, "b_ms_per_bit": fit.b_ms_per_bit,
                "r2": fit.r2, "ip_bits_per_s": fit.ip_bits_per_s,
                "throughput_mean_bits_per_s": fit.throughput_mean_bits_per_s,
            }
        except DegenerateDesign:
            entry["fitts"] = None
        out["modalities"][mod] = entry

    all_times = [t for times in times_by_mod.values() for t in times]
    if len(all_times) >= 4:
        report = outer_fence_filter(all_times)
        out["fence"] = {
            "q1": report.q1, "q3": report.q3, "iqr": report.iqr,
            "lower_fence": report.lower_fence, "upper_fence": report.upper_fence,
            "n_removed": len(report.removed), "n_kept": len(report.kept),
        }

    mods = [m for m, ts in times_by_mod.items() if len(ts) >= 2]
    if len(mods) >= 2:
        groups = [times_by_mod[m] for m in mods]
        a = anova_oneway(groups)
        out["tests"]["anova"] = {"F": a.F, "df_between": a.df_between,
                                 "df_within": a.df_within, "p": a.p}
        pairs = {}
        for i in range(len(mods)):
            for j in range(i + 1, len(mods)):
                t = welch_t(times_by_mod[mods[i]], times_by_mod[mods[j]])
                pairs[f"{mods[i]} vs {mods[j]}"] = {
                    "t": t.t, "df": t.df, "p_two_sided": t.p_two_sided,
                }
        out["tests"]["welch_pairs"] = pairs
    return out


def cmd_analyze(args: argparse.Namespace) -> int:
    with open(args.log, encoding="utf-8") as fh:
        records = read_trials_jsonl(fh)
    if not records:
        print("no trial records in log", file=sys.stderr)
        return 1
    result = analyze_records(records)

    if args.format == "json":
        print(json.dumps(result, indent=2, sort_keys=True))
        return 0
    if args.format == "csv":
        print("modality,n,mean_ms,median_ms,sd_ms,wrong_pct,fitts_a,fitts_b,ip,r2")
        for mod, e in result["modalities"].items():
            fit = e.get("fitts") or {}
            print(",".join(str(v) for v in [
                mod, e.get("n", 0), e.get("mean_ms", ""), e.get("median_ms", ""),
                e.get("sd_ms", ""), e["wrong_selection_rate"],
                fit.get("a_ms", ""), fit.get("b_ms_per_bit", ""),
                fit.get("ip_bits_per_s", ""), fit.get("r2", ""),
            ]))
        return 0

    for mod, e in result["modalities"].items():
        if "mean_ms" in e:
            print(f"{mod:16s} n={e['n']:4d} mean {e['mean_ms']:7.1f} ms  "
                  f"median {e['median_ms']:7.1f} ms  sd {e['sd_ms']:6.1f} ms  "
                  f"wrong {e['wrong_selection_rate']:.1f}%")
        fit = e.get("fitts")
        if fit:
            ip = (f"{fit['ip_bits_per_s']:.3f}" if fit["ip_bits_per_s"] is not None
                  else "n/a")
            print(f"{'':16s} T = {fit['a_ms']:.1f} + {fit['b_ms_per_bit']:.1f}*ID, "
                  f"IP {ip} bits/s, r2 {fit['r2']:.4f}")
    fence = result["fence"]
    if fence:
        print(f"outer fence: q1 {fence['q1']:.1f}, q3 {fence['q3']:.1f}, "
              f"iqr {fence['iqr']:.1f}, bounds [{fence['lower_fence']:.1f}, "
              f"{fence['upper_fence']:.1f}], removed {fence['n_removed']} "
              f"of {fence['n_removed'] + fence['n_kept']}")
    tests = result["tests"]
    if "anova" in tests:
        a = tests["anova"]
        print(f"ANOVA: F({a['df_between']},{a['df_within']}) = {a['F']:.4f}, "
              f"p = {a['p']:.4g}")
        for pair, t in tests["welch_pairs"].items():
            print(f"Welch {pair}: t = {t['t']:.3f}, df = {t['df']:.1f}, "
                  f"p = {t['p_two_sided']:.4g}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            config_doc = json.loads(fh.read())
    else:
        config_doc = session_config_to_dict(default_session_config())

    if args.stdio:
        from .service import run_stdio
        run_stdio(config_doc, args.mode, args.adaptive,
                  sys.stdin, sys.stdout, export_path=args.export)
        return 0

    import uvicorn
    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vtouch",
                                     description="virtual-touch evaluation workbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("point", help="run a synthetic pointing block")
    p.add_argument("--modality", choices=["laser", "gaze", "ir", "imu"],
                   default="laser")
    p.add_argument("--adaptive", action="store_true")
    p.add_argument("--incar", action="store_true",
                   help="in-car 70 px button grid instead of the W x D ring block")
    p.add_argument("--trials", type=int, default=120)
    p.add_argument("--out", help="write trial records as JSONL")
    _add_user_args(p)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("drive", help="run a lane-change driving session")
    p.add_argument("--modality", choices=["laser", "gaze", "ir", "imu"],
                   default="gaze")
    p.add_argument("--single", action="store_true",
                   help="primary task only (no secondary-task cues)")
    p.add_argument("--duration", type=float, default=60.0, help="seconds")
    p.add_argument("--gain", type=float, default=0.1, help="lane-keeping gain")
    p.add_argument("--out", help="write the drive log as JSONL")
    _add_user_args(p)
    p.set_defaults(func=cmd_drive)

    p = sub.add_parser("analyze", help="summarize a trial log")
    p.add_argument("log")
    p.add_argument("--format", choices=["text", "csv", "json"], default="text")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="run the session service")
    p.add_argument("--port", type=int, default=8977)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--stdio", action="store_true",
                   help="line-delimited messages on stdin/stdout instead of HTTP")
    p.add_argument("--config", help="session config JSON file")
    p.add_argument("--mode", choices=["pointing", "incar_grid"], default="pointing")
    p.add_argument("--adaptive", action="store_true")
    p.add_argument("--export", help="(stdio) write the session log here on EOF")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
