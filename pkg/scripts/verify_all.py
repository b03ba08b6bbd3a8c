"""Run every verifier through the CLI and exit non-zero if any fails."""

import sys

from bidinflation.cli import main

RUNS = [
    ["verify", "thm31"],
    ["verify", "thm42"],
    ["verify", "lemmas"],
    ["verify", "bk"],
    ["scan", "--mech", "mixed:0.15,1", "--n", "2", "--step", "0.001", "--q-max", "0.5",
     "--format", "csv", "--out", "results/scan_mixed_n2.csv"],
    ["optimize", "--n", "2", "--format", "json", "--out", "results/optimize_n2.json"],
]

if __name__ == "__main__":
    codes = []
    for argv in RUNS:
        print(f"$ bidinflation {' '.join(argv)}", file=sys.stderr)
        codes.append(main(argv + ["--format", "markdown"] if "--format" not in argv else argv))
    sys.exit(max(codes))
