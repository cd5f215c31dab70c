#!/usr/bin/env python3
"""Exhaustive finite-difference audit of the backward pass.

Checks every trainable parameter of the full network (float64, central
differences, dropout off) on freshly drawn tie-free batches. Conv
weights are scaled up by a constant before checking; ReLU and max-pool
are positively homogeneous and train-mode batch norm is scale-invariant,
so the function is unchanged while every kink margin grows, keeping the
fixed-size probes on one linear piece.
"""

import argparse
import time

from voicehand.gradcheck import draw_checkable_batch, gradient_check
from voicehand.network import build_network
from voicehand.rng import substream
from voicehand.train import one_hot

CONV_SCALE = 1000.0
THRESHOLDS = {"conv1": 1e-3, "pool1": 1e-3, "conv2": 0.1, "pool2": 0.1, "dense1": 5e-3}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--batches", type=int, default=5)
    parser.add_argument("--batch-size", type=int, default=2)
    parser.add_argument("--net-seed", type=int, default=3)
    parser.add_argument("--draw-seed", type=int, default=12)
    parser.add_argument("--h", type=float, default=1e-5)
    parser.add_argument("--tolerance", type=float, default=1e-4)
    args = parser.parse_args()

    net = build_network(seed=args.net_seed, dtype="float64")
    for name in ("conv1", "conv2"):
        net[name].weights *= CONV_SCALE
        net[name].biases *= CONV_SCALE
    net.mark_mutated()

    rng = substream(args.draw_seed, "gradcheck")
    failures = 0
    for batch in range(args.batches):
        x, labels, margins = draw_checkable_batch(net, rng, THRESHOLDS,
                                                  batch_size=args.batch_size)
        started = time.monotonic()
        report = gradient_check(net, x, one_hot(labels), h=args.h)
        elapsed = time.monotonic() - started
        worst_name = max(report, key=report.get)
        status = "ok" if report[worst_name] < args.tolerance else "FAIL"
        if status == "FAIL":
            failures += 1
        print(f"batch {batch}: {status}  worst {report[worst_name]:.3e} "
              f"({worst_name})  margins conv1 {margins['conv1']:.2e} "
              f"dense1 {margins['dense1']:.2e}  {elapsed:.1f}s")
        for name in sorted(report):
            print(f"    {name:16s} {report[name]:.3e}")
    return 1 if failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
