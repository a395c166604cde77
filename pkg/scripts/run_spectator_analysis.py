#!/usr/bin/env python3
"""Tabulate off-resonant coupling effects: level-shift cancellation checks
and gate leakage versus drive speed."""

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
    parser.add_argument("--outdir", default="out/spectator")
    parser.add_argument(
        "--speeds", default="0.005,0.01,0.02,0.04,0.08",
        help="comma-separated drive speeds Omega_00/omega_z",
    )
    args = parser.parse_args()

    run(["stark", "--levels", "8", "--outdir", args.outdir])
    run(["leakage", "--speeds", args.speeds, "--outdir", args.outdir])


if __name__ == "__main__":
    main()
