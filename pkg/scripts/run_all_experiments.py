"""Run every CLI experiment with its default configuration into one output tree.

    python scripts/run_all_experiments.py [--out results]
"""
import argparse
import os
import sys
import time

from kickspin.cli import main

RUNS = [
    ("spectrum", ["--lambda-end", "4*pi", "--steps", "256"]),
    ("cycle", []),
    ("cycle_double", ["--cycles", "2", "--cycle-steps", "8192"]),
    ("connection", ["--random-models", "4"]),
    ("protocol", []),
    ("protocol_half_period", ["--period", "0.5", "--num-kicks", "4"]),
    ("mobile", ["--misaligned-demo"]),
]


def run(out):
    failures = 0
    for name, extra in RUNS:
        command = name.split("_")[0]
        t0 = time.perf_counter()
        code = main([command, "--out", os.path.join(out, name), "--plotdata"] + extra)
        print(f"{name:24s} exit {code}  {time.perf_counter() - t0:6.1f}s", file=sys.stderr)
        failures += code != 0
    return failures


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results")
    sys.exit(1 if run(p.parse_args().out) else 0)
