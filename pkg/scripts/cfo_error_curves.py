#!/usr/bin/env python3
"""RMS frequency-offset estimation error vs SNR for the coarse, fine and
known-channel estimators, with the variance bound alongside.

    python scripts/cfo_error_curves.py --frames 1000 --out results/cfo
"""

import argparse
import sys

from turbofdm.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--frames", type=int, default=1000)
    ap.add_argument("--snr", default="0:2:12")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="results/cfo")
    args = ap.parse_args()
    return cli_main([
        "--experiment", "cfo_rmse",
        "--snr", args.snr,
        "--frames", str(args.frames),
        "--seed", str(args.seed),
        "--out", args.out,
    ])


if __name__ == "__main__":
    sys.exit(main())
