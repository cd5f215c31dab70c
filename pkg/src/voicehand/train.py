"""Minibatch training with Adam, plus split evaluation.

One run is fully determined by (seed, dataset, config): shuffles,
dropout masks, and noise augmentation all come from named substreams of
the root seed, and augmentation is keyed by (epoch, example index) so it
does not depend on shuffle order or batch size.
"""

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .adam import Adam
from .audio import NoisePool, mix_noise, to_window
from .checkpoint import save_checkpoint
from .dataset import DatasetIndex
from .errors import EmptyNoisePool, EmptySplit, EmptyTrainingSplit
from .features import FEATURE_SHAPE, log_compress, stft_power
from .gestures import CLASS_NAMES
from .network import Network
from .rng import substream
from .wav import read_wav

N_CLASSES = len(CLASS_NAMES)
PROB_FLOOR = 1e-12  # keeps the loss finite when the net is certain and wrong

LOG_COLUMNS = ("epoch", "train_loss", "train_acc", "val_acc", "seconds")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 90
    batch_size: int = 64
    learning_rate: float = 1e-3
    seed: int = 17
    augment: bool = True
    noise_prob: float = 0.8
    noise_gain_max: float = 0.1


@dataclass(frozen=True)
class EpochReport:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float
    seconds: float


def one_hot(labels, n_classes=N_CLASSES, dtype=np.float64) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((len(labels), n_classes), dtype=dtype)
    out[np.arange(len(labels)), labels] = 1
    return out


def cross_entropy(probs: np.ndarray, labels) -> float:
    """Mean negative log probability assigned to the true class."""
    labels = np.asarray(labels, dtype=np.int64)
    p = np.maximum(probs[np.arange(len(labels)), labels], PROB_FLOOR)
    return float(-np.mean(np.log(p)))


class ClipStore:
    """Decoded one-second windows cached by path, so repeated epochs skip
    the file reads."""

    def __init__(self):
        self._cache = {}

    def window(self, path) -> np.ndarray:
        key = str(path)
        if key not in self._cache:
            self._cache[key] = to_window(read_wav(path))
        return self._cache[key]


def _augmented_window(window, pool, config: TrainConfig, epoch: int, index: int):
    rng = substream(config.seed, "augment", epoch, index)
    if rng.random() >= config.noise_prob:
        return window
    gain = rng.uniform(0.0, config.noise_gain_max)
    return mix_noise(window, pool, gain, int(rng.integers(2**63)))


def _features_batch(windows, dtype) -> np.ndarray:
    batch = np.empty((len(windows),) + FEATURE_SHAPE + (1,), dtype=dtype)
    for row, window in enumerate(windows):
        batch[row, :, :, 0] = log_compress(stft_power(window))
    return batch


def train_epoch(network: Network, entries, store: ClipStore, pool, optimizer: Adam,
                config: TrainConfig, epoch: int):
    """One pass over the training entries; returns (mean loss, accuracy)
    measured on the training-mode forward passes."""
    order = substream(config.seed, "shuffle", epoch).permutation(len(entries))
    total_loss = 0.0
    total_correct = 0
    for start in range(0, len(order), config.batch_size):
        chosen = order[start : start + config.batch_size]
        windows = []
        labels = np.empty(len(chosen), dtype=np.int64)
        for row, idx in enumerate(chosen):
            entry = entries[idx]
            window = store.window(entry.path)
            if config.augment:
                window = _augmented_window(window, pool, config, epoch, int(idx))
            windows.append(window)
            labels[row] = int(entry.label)
        batch = _features_batch(windows, network.dtype)
        dropout_rng = substream(config.seed, "dropout", epoch, start)
        probs, trace = network.forward(batch, mode="train", dropout_rng=dropout_rng)
        grads = network.backward(trace, one_hot(labels, dtype=network.dtype))
        optimizer.step(network.parameters(), grads)
        network.mark_mutated()
        total_loss += cross_entropy(probs, labels) * len(chosen)
        total_correct += int(np.sum(np.argmax(probs, axis=1) == labels))
    return total_loss / len(entries), total_correct / len(entries)


def evaluate(network: Network, entries, store: ClipStore = None, batch_size: int = 64):
    """Inference-mode accuracy and 9x9 confusion matrix (rows true class,
    columns predicted) over `entries`, no augmentation."""
    if not entries:
        raise EmptySplit("no entries to evaluate")
    store = store or ClipStore()
    confusion = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for start in range(0, len(entries), batch_size):
        chunk = entries[start : start + batch_size]
        batch = _features_batch([store.window(e.path) for e in chunk], network.dtype)
        probs, _ = network.forward(batch, mode="infer")
        predicted = np.argmax(probs, axis=1)
        for entry, p in zip(chunk, predicted):
            confusion[int(entry.label), int(p)] += 1
    accuracy = float(np.trace(confusion) / len(entries))
    return accuracy, confusion


def fit(network: Network, index: DatasetIndex, config: TrainConfig, out_dir,
        log=print) -> list:
    """Full training run.

    Writes out_dir/training_log.csv (one row per epoch), best.ckpt (highest
    validation accuracy, earliest epoch on ties) and final.ckpt. Returns the
    per-epoch reports. Validation accuracy is NaN when the val split is
    empty, in which case best.ckpt duplicates final.ckpt.
    """
    train_entries = index.split_entries("train")
    if not train_entries:
        raise EmptyTrainingSplit("training split is empty")
    val_entries = index.split_entries("val")

    pool = NoisePool(clips=())
    if config.augment:
        pool = NoisePool.from_files(index.noise_files)
        if len(pool) == 0:
            raise EmptyNoisePool("augmentation enabled but no usable background noise clips")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = ClipStore()
    optimizer = Adam(learning_rate=config.learning_rate)
    reports = []
    best_acc = -np.inf
    log_path = out_dir / "training_log.csv"
    with open(log_path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(LOG_COLUMNS)
        for epoch in range(config.epochs):
            started = time.monotonic()
            train_loss, train_acc = train_epoch(
                network, train_entries, store, pool, optimizer, config, epoch
            )
            val_acc = float("nan")
            if val_entries:
                val_acc, _ = evaluate(network, val_entries, store, config.batch_size)
            seconds = time.monotonic() - started
            report = EpochReport(epoch, train_loss, train_acc, val_acc, seconds)
            reports.append(report)
            writer.writerow([
                epoch,
                f"{train_loss:.6f}",
                f"{train_acc:.6f}",
                f"{val_acc:.6f}",
                f"{seconds:.3f}",
            ])
            f.flush()
            if val_acc > best_acc:
                best_acc = val_acc
                save_checkpoint(out_dir / "best.ckpt", network,
                                metadata={"epoch": epoch, "val_acc": val_acc})
            if log is not None:
                log(f"epoch {epoch}: loss {train_loss:.4f} acc {train_acc:.4f} "
                    f"val {val_acc:.4f} ({seconds:.1f}s)")
    final_meta = {"epoch": config.epochs - 1, "val_acc": reports[-1].val_acc if reports else None}
    save_checkpoint(out_dir / "final.ckpt", network, metadata=final_meta)
    if not np.isfinite(best_acc):
        save_checkpoint(out_dir / "best.ckpt", network, metadata=final_meta)
    return reports
