"""Command-line front-end: simulate sweeps, validate the channel, inspect rates."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import channel, simulator
from .config import SimConfig, load_config


def _load(args) -> SimConfig:
    if args.config:
        return load_config(args.config)
    return SimConfig()


def _cmd_simulate(args) -> int:
    config = _load(args)
    ebn0 = None
    if args.ebn0:
        ebn0 = tuple(float(v) for v in args.ebn0.split(","))
    rows = simulator.sweep(
        config,
        ebn0_list=ebn0,
        master_seed=args.seed,
        workers=args.workers,
        on_point=lambda row: print(simulator.summarize([row])),
    )
    csv_text = simulator.rows_to_csv(rows)
    if args.out:
        out = Path(args.out)
        out.write_text(csv_text)
        print(f"wrote {out}")
        if not args.no_plot:
            figure = out.with_suffix(".png")
            from . import plotting

            plotting.plot_results(rows, figure)
            print(f"wrote {figure}")
    else:
        print(csv_text, end="")
    return 0


def _cmd_validate_channel(args) -> int:
    if args.profile:
        profile = channel.load_profile(args.profile)
    else:
        profile = channel.load_profile(simulator.packaged_profile_path("bran_e"))
    corr = channel.estimate_spatial_correlation(
        profile,
        spacing_lambda=args.spacing,
        side=args.side,
        num_realizations=args.realizations,
        seed=args.seed,
    )
    print(
        f"spatial correlation at {args.spacing} wavelengths ({args.side.upper()}): "
        f"{corr:.4f} ({args.realizations} realizations)"
    )
    print(f"profile rms delay spread: {profile.rms_delay_spread_s() * 1e6:.4f} us")
    return 0


def _cmd_info(args) -> int:
    config = _load(args)
    info = simulator.link_info(config)
    for key, value in info.items():
        if isinstance(value, float):
            print(f"{key} = {value:.4f}")
        else:
            print(f"{key} = {value}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mccdma",
        description="Link-level Monte Carlo simulator for STBC MC-CDMA downlinks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a BER/FER sweep")
    sim.add_argument("--config", help="config file (key = value lines)")
    sim.add_argument("--ebn0", help="comma-separated Eb/N0 list in dB, overrides config")
    sim.add_argument("--seed", type=int, default=None, help="master seed override")
    sim.add_argument("--out", help="CSV output path (also renders <out>.png)")
    sim.add_argument("--workers", type=int, default=1, help="parallel frame workers")
    sim.add_argument("--no-plot", action="store_true", help="skip the figure")
    sim.set_defaults(func=_cmd_simulate)

    val = sub.add_parser("validate-channel", help="estimate spatial correlation")
    val.add_argument("--profile", help="tap profile file (default: packaged outdoor profile)")
    val.add_argument("--spacing", type=float, default=0.5, help="element spacing in wavelengths")
    val.add_argument("--side", choices=("bs", "ms"), default="bs")
    val.add_argument("--realizations", type=int, default=32)
    val.add_argument("--seed", type=int, default=0)
    val.set_defaults(func=_cmd_validate_channel)

    info = sub.add_parser("info", help="print derived rates for a configuration")
    info.add_argument("--config", help="config file (key = value lines)")
    info.set_defaults(func=_cmd_info)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
