"""Command-line entry point: ``rfpa <subcommand> [options]``."""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import errors
from .codec import Scheme, dump_tables
from .harness import (TRACE_HEADER, AFJobSpec, ExperimentSpec, SCHEME_ORDER, estimate_secrecy,
                      run_af_job, run_ber_sweep, run_rate_sweep, trace_sweep, write_ber_csv, write_csv,
                      write_meta, write_rate_csv, write_secrecy_csv)
from .keyschedule import SecretKey, generate_schedule
from .params import SystemConfig, load_config, small_af_config, validate
from .receiver import EveStrategy

_CONFIG_FIELDS = dataclasses.fields(SystemConfig)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file with SystemConfig fields")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--threads", type=int, default=1)
    g = p.add_argument_group("config overrides")
    for f in _CONFIG_FIELDS:
        kind = float if "float" in str(f.type) else int
        g.add_argument(f"--{f.name.replace('_', '-')}", dest=f"cfg_{f.name}", type=kind, default=None)


def _resolve_config(args, base: SystemConfig | None = None) -> SystemConfig:
    if args.config is not None:
        cfg = load_config(args.config)
    else:
        cfg = base if base is not None else SystemConfig()
    overrides = {f.name: getattr(args, f"cfg_{f.name}") for f in _CONFIG_FIELDS
                 if getattr(args, f"cfg_{f.name}") is not None}
    return cfg.replace(**overrides)


def _schemes(value: str) -> list[Scheme]:
    if value.lower() == "all":
        return list(SCHEME_ORDER)
    return [Scheme(v.strip().upper()) for v in value.split(",")]


def _floats(value: str) -> list[float]:
    return [float(v) for v in value.split(",") if v.strip()]


def cmd_validate(args) -> int:
    cfg = validate(_resolve_config(args))
    if args.describe:
        print(json.dumps(cfg.describe(), indent=2, sort_keys=True))
    else:
        print("ok")
    return 0


def cmd_ber(args) -> int:
    cfg = _resolve_config(args)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    points, secrecy, specs, traces = [], [], [], []
    for scheme in _schemes(args.scheme):
        spec = ExperimentSpec(cfg, scheme, tuple(_floats(args.ebn0)), args.trials, args.bits_min,
                              args.seed, args.eve_strategy, args.threads)
        res = run_ber_sweep(spec)
        points += res
        secrecy += [(scheme.value, e, c) for e, c in estimate_secrecy(res)]
        specs.append({**spec.to_dict(), "trials_per_point": spec.trials_per_point()})
        if args.trace:
            traces += trace_sweep(spec)
    write_ber_csv(args.out_dir / "ber.csv", points)
    write_secrecy_csv(args.out_dir / "secrecy.csv", secrecy)
    if args.trace:
        write_csv(args.out_dir / "trace.csv", TRACE_HEADER, traces)
    write_meta(args.out_dir / "meta.json", "ber", {"experiments": specs})
    for p in points:
        state = " ABORTED " + p.note if p.aborted else ""
        print(f"{p.scheme:4s} {p.ebn0_db:6.1f} dB  bob {p.ber_bob:.4e}  eve {p.ber_eve:.4e}"
              f"  bits {p.bits_counted}{state}")
    return 0


def cmd_rate(args) -> int:
    cfg = _resolve_config(args)
    m_max = args.m_max if args.m_max is not None else args.num_hops
    rows = run_rate_sweep(cfg, args.num_hops, range(args.m_min, m_max + 1), _schemes(args.scheme))
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_rate_csv(args.out_dir / "rate.csv", rows)
    write_meta(args.out_dir / "meta.json", "rate", {
        "config": cfg.to_dict(), "num_hops": args.num_hops, "m_range": [args.m_min, m_max]})
    for r in rows:
        print(f"M={r.num_tx:3d} {r.scheme:4s} {r.bits_per_chip:4d} b/chip {r.rate_bps:.6g} b/s")
    return 0


def cmd_af(args) -> int:
    small = small_af_config().replace(time_offset_alphabet=None, freq_offset_alphabet=None)
    cfg = validate(_resolve_config(args, base=small))
    job = AFJobSpec(cfg, tuple(s.value for s in _schemes(args.scheme)),
                    tuple(_floats(args.delays)) if args.delays else None,
                    tuple(_floats(args.dopplers)) if args.dopplers else None,
                    (args.f, args.f_prime), args.gamma_spacing, args.draws, args.seed, args.full_grid)
    grids = run_af_job(job, args.out_dir)
    write_meta(args.out_dir / "meta.json", "af", {
        "config": SystemConfig.to_dict(cfg), "schemes": list(job.schemes),
        "spatial_freqs": list(job.spatial_freqs), "gamma_spacing": job.gamma_spacing,
        "draws": job.draws, "seed": job.seed, "full_grid": job.full_grid,
        "outputs": sorted(f"{k}.csv" for k in grids)})
    for name, g in sorted(grids.items()):
        print(f"{name}.csv  peak {g.magnitudes.max():.6g}")
    return 0


def cmd_schedule_dump(args) -> int:
    cfg = validate(_resolve_config(args))
    key = SecretKey.from_hex(args.key)
    sched = generate_schedule(key, cfg, stream_id=args.stream_id)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / "schedule.csv"
    sched.to_csv(path)
    print(path)
    return 0


def cmd_codec(args) -> int:
    cfg = validate(_resolve_config(args))
    tables = dump_tables(cfg, args.max_entries)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    path = args.out_dir / "codec_tables.json"
    path.write_text(json.dumps(tables, indent=2, sort_keys=True, default=str) + "\n")
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rfpa", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a configuration")
    _add_common(p)
    p.add_argument("--describe", action="store_true", help="print derived quantities")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ber", help="Monte-Carlo BER sweep for Bob and Eve")
    _add_common(p)
    p.add_argument("--scheme", default="all", help="PH, AMP, SIM, HYB, a comma list, or all")
    p.add_argument("--ebn0", default="0,5,10,15,20,25,30", help="comma-separated Eb/N0 grid in dB")
    p.add_argument("--trials", type=int, default=1, help="minimum trials per point")
    p.add_argument("--bits-min", type=int, default=10_000)
    p.add_argument("--eve-strategy", default=EveStrategy.BLIND_UNIFORM.value,
                   choices=[s.value for s in EveStrategy])
    p.add_argument("--trace", action="store_true",
                   help="dump Bob's per-chip detections for the first trial of each point")
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("rate", help="achievable rate versus number of transmit antennas")
    _add_common(p)
    p.add_argument("--num-hops-sweep", dest="num_hops", type=int, default=16)
    p.add_argument("--m-min", type=int, default=1)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--scheme", default="all")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("af", help="ambiguity-function cuts and expectation")
    _add_common(p)
    p.add_argument("--scheme", default="HYB")
    p.add_argument("--delays", default=None, help="comma-separated delays in seconds")
    p.add_argument("--dopplers", default=None, help="comma-separated Dopplers in Hz")
    p.add_argument("--f", type=float, default=0.0, help="transmit spatial frequency")
    p.add_argument("--f-prime", type=float, default=0.0, help="receive spatial frequency")
    p.add_argument("--gamma-spacing", type=float, default=1.0)
    p.add_argument("--draws", type=int, default=16, help="schedules in the expectation")
    p.add_argument("--full-grid", action="store_true", help="also write the full delay-Doppler grid")
    p.set_defaults(func=cmd_af)

    p = sub.add_parser("schedule-dump", help="write the keyed agility schedule as CSV")
    _add_common(p)
    p.add_argument("--key", required=True, help="secret key seed as hex")
    p.add_argument("--stream-id", type=int, default=0)
    p.set_defaults(func=cmd_schedule_dump)

    p = sub.add_parser("codec", help="codec utilities")
    codec_sub = p.add_subparsers(dest="codec_command", required=True)
    q = codec_sub.add_parser("dump-tables", help="write the bit-to-symbol tables as JSON")
    _add_common(q)
    q.add_argument("--max-entries", type=int, default=1 << 16)
    q.set_defaults(func=cmd_codec)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except errors.ConfigError as exc:
        print(f"invalid configuration: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except errors.RfpaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
