#!/usr/bin/env python3
"""Run the clip-length / crop-region sweep on a corpus and print the table.

Usage: python scripts/k_sweep.py [workdir] [--sequences N] [--epochs E]
       [--grid "k=1,3,5;crop=full_face,mouth"]

Set V2S_THREADS to run grid cells in parallel worker processes.
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from v2s.cli import main as v2s


def run(args):
    work = args.workdir
    os.makedirs(work, exist_ok=True)
    corpus = os.path.join(work, "corpus")
    cfg = os.path.join(work, "train.cfg")
    out = os.path.join(work, "sweep.csv")
    with open(cfg, "w") as f:
        f.write(
            "learning_rate = 0.0003\nbatch_size = 16\n"
            "conv_dropout = 0.0\ndense_dropout = 0.0\n"
            f"max_epochs = {args.epochs}\npatience = 5\nseed = 1\n"
            "val_fraction = 0.1\n"
        )
    if not os.path.exists(os.path.join(corpus, "manifest.csv")):
        code = v2s(["gen", "--out", corpus, "--sequences", str(args.sequences),
                    "--seed", "11"])
        if code != 0:
            return code
    code = v2s(["sweep", "--manifest", f"{corpus}/manifest.csv", "--grid", args.grid,
                "--seed", "2", "--config", cfg, "--out", out])
    if code != 0:
        return code
    print()
    print(open(out).read())
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("workdir", nargs="?", default="sweep_run")
    parser.add_argument("--sequences", type=int, default=30)
    parser.add_argument("--epochs", type=int, default=2)
    parser.add_argument("--grid", default="k=1,3,5,7,9;crop=full_face,mouth")
    sys.exit(run(parser.parse_args()))
