#!/usr/bin/env python3
"""Generate a small corpus, train a model, and reconstruct speech for one
held-out sequence.  Everything lands under the given working directory.

Usage: python scripts/end_to_end_demo.py [workdir] [--sequences N] [--epochs E]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from v2s.cli import main as v2s
from v2s.splits import load_plan


def run(args):
    work = args.workdir
    os.makedirs(work, exist_ok=True)
    corpus = os.path.join(work, "corpus")
    plan = os.path.join(work, "plan.txt")
    cfg = os.path.join(work, "train.cfg")
    model = os.path.join(work, "model.v2sm")
    features = os.path.join(work, "predicted.csv")
    wav = os.path.join(work, "reconstructed.wav")

    with open(cfg, "w") as f:
        f.write(
            "learning_rate = 0.0003\n"
            f"batch_size = 16\n"
            "conv_dropout = 0.0\n"
            "dense_dropout = 0.0\n"
            f"max_epochs = {args.epochs}\n"
            "patience = 5\n"
            "seed = 1\n"
            "val_fraction = 0.1\n"
        )

    steps = [
        ["gen", "--out", corpus, "--sequences", str(args.sequences), "--seed", "7"],
        ["split", "--manifest", f"{corpus}/manifest.csv", "--mode", "random_80_20",
         "--seed", "1", "--out", plan],
        ["train", "--manifest", f"{corpus}/manifest.csv", "--split", plan,
         "--k", str(args.k), "--crop", "full_face", "--config", cfg, "--out", model],
    ]
    for step in steps:
        print("v2s " + " ".join(step))
        code = v2s(step)
        if code != 0:
            return code

    test_seq = load_plan(plan).test_ids[0]
    frames_dir = os.path.join(corpus, test_seq)
    for step in [
        ["predict", "--model", model, "--frames", frames_dir, "--k", str(args.k),
         "--crop", "full_face", "--out", features],
        ["synth", "--features", features, "--seed", "3", "--out", wav],
        ["eval", "--model", model, "--manifest", f"{corpus}/manifest.csv",
         "--split", plan, "--out", os.path.join(work, "metrics.csv")],
    ]:
        print("v2s " + " ".join(step))
        code = v2s(step)
        if code != 0:
            return code
    print(f"\nreconstructed audio for held-out {test_seq}: {wav}")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("workdir", nargs="?", default="demo_run")
    parser.add_argument("--sequences", type=int, default=30)
    parser.add_argument("--epochs", type=int, default=3)
    parser.add_argument("--k", type=int, default=3)
    sys.exit(run(parser.parse_args()))
