#!/usr/bin/env python3
"""BER vs SNR sweep for the flagship configuration (rate-1 code, buffered
frame, two independent receive arms, 32x interpolation), practical and ideal
receivers side by side.

    python scripts/ber_curves.py --frames 2000 --out results/ber
"""

import argparse
import sys

from turbofdm.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--snr", default="3:1:9")
    ap.add_argument("--diversity", type=int, default=2)
    ap.add_argument("--rate", default="1")
    ap.add_argument("--channel-mode", default="independent")
    ap.add_argument("--ip", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/ber")
    args = ap.parse_args()

    for mode in ("practical", "ideal"):
        code = cli_main([
            "--experiment", "ber",
            "--snr", args.snr,
            "--frames", str(args.frames),
            "--rate", args.rate,
            "--diversity", str(args.diversity),
            "--channel-mode", args.channel_mode,
            "--ip", str(args.ip),
            "--mode", mode,
            "--seed", str(args.seed),
            "--out", f"{args.out}_{mode}",
        ])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
