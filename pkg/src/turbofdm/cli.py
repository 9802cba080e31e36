"""Command-line campaign runner.

Examples:
    turbofdm --experiment ber --snr 4:1:9 --frames 2000 --rate 1 \
        --diversity 2 --channel-mode independent --ip 32 --out results/ber
    turbofdm --experiment erasure_sweep --snr 0 --lp 64,128,256,512 \
        --frames 10000 --out results/erasure
"""

from __future__ import annotations

import argparse
import json
import sys

from .framing import FrameConfig
from .harness import CampaignConfig, run_campaign


def parse_snr_list(text: str) -> tuple:
    """Accept '0,2,4' or 'start:step:stop' (stop inclusive)."""
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3:
            raise ValueError("SNR range must be start:step:stop")
        start, step, stop = parts
        if step <= 0:
            raise ValueError("SNR step must be positive")
        out = []
        v = start
        while v <= stop + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    return tuple(float(v) for v in text.split(","))


def parse_int_list(text: str) -> tuple:
    return tuple(int(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="turbofdm", description="Turbo-coded OFDM link simulator"
    )
    p.add_argument("--experiment", default=None,
                   choices=["ber", "erasure_sweep", "cfo_rmse", "outage", "crb_curve"])
    p.add_argument("--snr", default=None, help="comma list or start:step:stop, dB per bit")
    p.add_argument("--frames", type=int, default=None, help="frames per point")
    p.add_argument("--rate", default=None, choices=["1/2", "1"])
    p.add_argument("--diversity", type=int, default=None, help="receive arms")
    p.add_argument("--channel-mode", default=None, choices=["identical", "independent"])
    p.add_argument("--ip", type=int, default=None, help="spectral interpolation factor")
    p.add_argument("--lp", default=None,
                   help="preamble length; comma list sweeps it in erasure_sweep")
    p.add_argument("--ld", type=int, default=None, help="OFDM block length")
    p.add_argument("--lh", type=int, default=None, help="channel span")
    p.add_argument("--lo", type=int, default=None, help="postamble length")
    p.add_argument("--buffer", type=int, default=None, help="buffer symbols per edge")
    p.add_argument("--structure", default=None, choices=["basic", "enhanced"])
    p.add_argument("--mode", default=None, choices=["ideal", "practical"])
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None, help="turbo iterations")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--config", default=None, help="JSON config; flags override it")
    p.add_argument("--resume", action="store_true", help="skip completed points")
    p.add_argument("--quiet", action="store_true")
    p.add_argument("--out", default=None, help="output base path (.csv/.json)")
    return p


def build_config(args) -> CampaignConfig:
    frame_kw: dict = {}
    camp_kw: dict = {}
    if args.config:
        with open(args.config) as fh:
            stored = json.load(fh)
        frame_kw.update(stored.pop("frame", {}))
        camp_kw.update(stored)

    if args.rate is not None:
        frame_kw["rate"] = args.rate
    if args.diversity is not None:
        frame_kw["diversity"] = args.diversity
    if args.ip is not None:
        frame_kw["ip"] = args.ip
    if args.ld is not None:
        frame_kw["ld"] = args.ld
    if args.lh is not None:
        frame_kw["lh"] = args.lh
    if args.lo is not None:
        frame_kw["lo"] = args.lo
    if args.buffer is not None:
        frame_kw["buffer_len"] = args.buffer
    if args.structure == "basic":
        frame_kw["buffer_len"] = 0
        frame_kw["lo"] = 0
    elif args.structure == "enhanced":
        frame_kw.setdefault("buffer_len", 4)
        frame_kw.setdefault("lo", 256)
    if args.lp is not None:
        lps = parse_int_list(args.lp)
        frame_kw["lp"] = lps[0]
        if len(lps) > 1:
            camp_kw["lp_sweep"] = lps

    if args.experiment is not None:
        camp_kw["experiment"] = args.experiment
    if args.snr is not None:
        camp_kw["snr_db"] = parse_snr_list(args.snr)
    if args.frames is not None:
        camp_kw["frames_per_point"] = args.frames
    if args.mode is not None:
        camp_kw["receiver_mode"] = args.mode
    if args.channel_mode is not None:
        camp_kw["channel_mode"] = args.channel_mode
    if args.seed is not None:
        camp_kw["seed"] = args.seed
    if args.iterations is not None:
        camp_kw["iterations"] = args.iterations
    if args.workers is not None:
        camp_kw["workers"] = args.workers
    if args.batch_size is not None:
        camp_kw["batch_size"] = args.batch_size
    if args.out is not None:
        camp_kw["output"] = args.out

    return CampaignConfig(frame=FrameConfig(**frame_kw), **camp_kw)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 1
    try:
        result = run_campaign(config, resume=args.resume, verbose=not args.quiet)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    if result.csv_path and not args.quiet:
        print(f"wrote {result.csv_path} and {result.json_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
