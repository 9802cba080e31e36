#!/usr/bin/env python3
"""Frame-erasure rate as a function of preamble length at low SNR.

    python scripts/erasure_vs_preamble.py --frames 10000 --out results/erasure
"""

import argparse
import sys

from turbofdm.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=10000)
    ap.add_argument("--snr", default="0")
    ap.add_argument("--lp", default="64,128,256,512")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/erasure")
    args = ap.parse_args()
    return cli_main([
        "--experiment", "erasure_sweep",
        "--snr", args.snr,
        "--frames", str(args.frames),
        "--lp", args.lp,
        "--diversity", "1",
        "--seed", str(args.seed),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
