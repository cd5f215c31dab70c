#!/usr/bin/env python3
"""Memorization sanity check: a healthy implementation drives training
loss to ~0 on a handful of clips within a few epochs.

Trains on a small slice of a synthetic tone dataset with dropout and
augmentation disabled, printing per-epoch loss/accuracy until the slice
is fully memorized (or --epochs runs out).
"""

import argparse
import tempfile
import time
from pathlib import Path

from voicehand.adam import Adam
from voicehand.audio import NoisePool
from voicehand.dataset import index_dataset
from voicehand.network import build_network
from voicehand.synth import write_tone_dataset
from voicehand.train import ClipStore, TrainConfig, train_epoch


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--clips", type=int, default=32, help="training clips to memorize")
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--batch-size", type=int, default=8)
    parser.add_argument("--seed", type=int, default=17)
    parser.add_argument("--loss-target", type=float, default=0.01)
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        per_class = max(4, (args.clips + 8) // 3)
        root = write_tone_dataset(Path(tmp) / "tones", clips_per_class=per_class,
                                  seed=args.seed)
        entries = index_dataset(root).split_entries("train")[: args.clips]
        print(f"memorizing {len(entries)} clips, batch {args.batch_size}, "
              f"seed {args.seed}")

        net = build_network(seed=args.seed, dropout_rate=0.0)
        config = TrainConfig(epochs=args.epochs, batch_size=args.batch_size,
                             seed=args.seed, augment=False)
        store = ClipStore()
        optimizer = Adam(learning_rate=config.learning_rate)
        started = time.monotonic()
        for epoch in range(args.epochs):
            loss, acc = train_epoch(net, entries, store, NoisePool(clips=()),
                                    optimizer, config, epoch)
            print(f"epoch {epoch:3d}  loss {loss:.6f}  acc {acc:.4f}")
            if acc == 1.0 and loss < args.loss_target:
                print(f"memorized in {epoch + 1} epochs "
                      f"({time.monotonic() - started:.1f}s)")
                return 0
        print("FAILED to memorize; the training stack is suspect")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
