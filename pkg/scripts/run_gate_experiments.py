#!/usr/bin/env python3
"""Run the three headline gate experiments end to end and collect artifacts.

Produces, under --outdir:
  ideal/        exact truth table and noise-free scans (readout bypassed)
  measured/     the same experiments with contrast decay, 4% prep error and
                200-shot fluorescence readout, plus the curve fits
"""

import argparse
import sys

from iongate.cli import main as iongate_main


def run(argv):
    print("+ iongate " + " ".join(argv))
    code = iongate_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out/gate")
    parser.add_argument("--seed", type=int, default=20260808)
    args = parser.parse_args()

    ideal = ["--ideal", "--outdir", f"{args.outdir}/ideal"]
    run(["truth-table", *ideal])
    run(["rabi-scan", "--tmax", "150us", "--step", "1us", *ideal])
    run(["fringe-scan", "--points", "24", *ideal])
    run(["fringe-scan", "--points", "24", "--incoherent", *ideal])

    noisy = [
        "--seed", str(args.seed), "--prep-error", "0.04", "--tau-us", "170",
        "--outdir", f"{args.outdir}/measured",
    ]
    run(["truth-table", *noisy])
    run(["rabi-scan", "--tmax", "150us", "--step", "1us", *noisy])
    run(["fringe-scan", "--points", "24", *noisy])
    run(["fringe-scan", "--points", "24", "--incoherent", *noisy])


if __name__ == "__main__":
    main()
