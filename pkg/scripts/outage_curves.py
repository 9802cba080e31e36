#!/usr/bin/env python3
"""Outage probability vs SNR for first- and second-order receive diversity
with independent arms.

    python scripts/outage_curves.py --frames 100000 --out results/outage
"""

import argparse
import sys

from turbofdm.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=100000)
    ap.add_argument("--snr", default="0:1:8")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/outage")
    args = ap.parse_args()
    for n in (1, 2):
        code = cli_main([
            "--experiment", "outage",
            "--snr", args.snr,
            "--frames", str(args.frames),
            "--diversity", str(n),
            "--channel-mode", "independent",
            "--batch-size", "1000",
            "--seed", str(args.seed),
            "--out", f"{args.out}_n{n}",
        ])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
