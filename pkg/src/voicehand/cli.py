"""Command-line entry points: train, eval, recognize, stream, inspect,
features.

Exit codes: 0 success, 1 usage error (bad flags/config), 2 data error
(unreadable audio or dataset), 3 checkpoint error (missing, corrupt, or
mismatched weight file).
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .audio import to_window
from .checkpoint import load_checkpoint
from .commands import StreamConfig, decide, classify_window, stream_decode
from .dataset import index_dataset, subsample_unknown
from .errors import (
    BadMagic,
    SpecMismatch,
    TruncatedPayload,
    UnsupportedVersion,
    VoicehandError,
)
from .features import compute_features, export_csv
from .gestures import CLASS_NAMES, GestureClass, GestureTable
from .network import (
    REFERENCE_LAYER_PARAMS,
    REFERENCE_NON_TRAINABLE,
    REFERENCE_TRAINABLE,
    build_network,
    count_params,
    layer_table,
)
from .train import TrainConfig, evaluate, fit
from .wav import read_wav

DATA_DIR_ENV = "VOICEHAND_DATA_DIR"

CHECKPOINT_ERRORS = (BadMagic, UnsupportedVersion, SpecMismatch, TruncatedPayload)


class UsageError(Exception):
    pass


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; route that through the
    documented usage code instead."""

    def error(self, message):
        raise UsageError(message)


def _load_config(path):
    if path is None:
        return {}
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"config file {path}: {e}")
    if not isinstance(raw, dict):
        raise UsageError(f"config file {path}: expected a JSON object")
    return raw


def _pick(flag_value, config, key, default):
    """Precedence: flag > config file > default."""
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _resolve_data_dir(flag_value, config):
    value = _pick(flag_value, config, "data-dir", os.environ.get(DATA_DIR_ENV))
    if value is None:
        raise UsageError(f"no data directory: pass --data-dir or set {DATA_DIR_ENV}")
    return Path(value)


def _network_from_checkpoint(path):
    network = build_network()
    try:
        metadata = load_checkpoint(path, network)
    except OSError as e:
        raise CliError(3, f"cannot read checkpoint {path}: {e}")
    return network, metadata


def _read_clip(path):
    try:
        return read_wav(path)
    except OSError as e:
        raise CliError(2, f"cannot read {path}: {e}")


def _load_table(path):
    if path is None:
        return GestureTable.default()
    try:
        return GestureTable.load(path)
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as e:
        raise CliError(2, f"gesture table {path}: {e}")


def cmd_train(args) -> int:
    config_file = _load_config(args.config)
    data_dir = _resolve_data_dir(args.data_dir, config_file)
    out_dir = _pick(args.out, config_file, "out", None)
    if out_dir is None:
        raise UsageError("train needs --out")
    seed = int(_pick(args.seed, config_file, "seed", 17))
    config = TrainConfig(
        epochs=int(_pick(args.epochs, config_file, "epochs", TrainConfig.epochs)),
        batch_size=int(_pick(args.batch_size, config_file, "batch-size", TrainConfig.batch_size)),
        learning_rate=float(_pick(args.lr, config_file, "lr", TrainConfig.learning_rate)),
        seed=seed,
        augment=not bool(_pick(args.no_augment, config_file, "no-augment", False)),
    )
    index = subsample_unknown(index_dataset(data_dir), seed)
    network = build_network(seed=seed)
    reports = fit(network, index, config, out_dir)
    best = max((r.val_acc for r in reports if not np.isnan(r.val_acc)), default=float("nan"))
    print(f"done: {len(reports)} epochs, best val acc {best:.4f}, "
          f"checkpoints in {out_dir}")
    return 0


def _print_confusion(confusion):
    header = " ".join(f"{name:>8}" for name in CLASS_NAMES)
    print(f"{'':>8} {header}  (rows true, cols predicted)")
    for name, row in zip(CLASS_NAMES, confusion):
        cells = " ".join(f"{int(v):>8}" for v in row)
        print(f"{name:>8} {cells}")


def cmd_eval(args) -> int:
    config_file = _load_config(args.config)
    data_dir = _resolve_data_dir(args.data_dir, config_file)
    network, _ = _network_from_checkpoint(args.checkpoint)
    index = subsample_unknown(index_dataset(data_dir), int(args.seed))
    entries = index.split_entries(args.split)
    accuracy, confusion = evaluate(network, entries)
    if args.json:
        print(json.dumps({
            "split": args.split,
            "clips": len(entries),
            "accuracy": accuracy,
            "class_names": list(CLASS_NAMES),
            "confusion": confusion.tolist(),
        }))
    else:
        print(f"accuracy {accuracy:.4f} on {args.split} ({len(entries)} clips)")
        _print_confusion(confusion)
    return 0


def cmd_recognize(args) -> int:
    network, _ = _network_from_checkpoint(args.checkpoint)
    clip = _read_clip(args.wav)
    table = _load_table(args.gesture_table)
    probs = classify_window(network, to_window(clip))
    decision = decide(probs, table)
    accepted = decision.prob >= args.threshold and decision.gesture != GestureClass.UNKNOWN
    doc = {
        "class": decision.gesture.word,
        "prob": round(decision.prob, 6),
        "accepted": accepted,
        "trajectory": list(decision.trajectory.as_tuple()) if accepted and decision.trajectory else None,
        "frames": [list(f.as_bytes()) for f in decision.frames] if accepted else [],
    }
    print(json.dumps(doc))
    return 0


def cmd_stream(args) -> int:
    network, _ = _network_from_checkpoint(args.checkpoint)
    table = _load_table(args.gesture_table)
    if args.input == "pcm-stdin":
        raw = sys.stdin.buffer.read()
        if len(raw) % 2:
            raise CliError(2, "pcm-stdin: odd byte count for 16-bit samples")
        samples = np.frombuffer(raw, dtype="<i2")
    elif args.input.startswith("wav:"):
        samples = _read_clip(args.input[4:]).samples
    else:
        raise UsageError("stream --input takes wav:PATH or pcm-stdin")
    config = StreamConfig(
        hop_ms=args.hop_ms,
        decision_threshold=args.threshold,
        refractory_ms=args.refractory_ms,
    )
    for decision in stream_decode(network, samples, table, config):
        print(decision.to_json(), flush=True)
    return 0


def cmd_inspect(args) -> int:
    if args.checkpoint:
        network, _ = _network_from_checkpoint(args.checkpoint)
    else:
        network = build_network()
    rows = layer_table(network)
    widths = [max(len(str(r[i])) for r in rows) for i in range(6)]
    titles = ("#", "layer", "detail", "activation", "output", "params")
    widths = [max(w, len(t)) for w, t in zip(widths, titles)]
    fmt = "  ".join(f"{{:<{w}}}" for w in widths)
    print(fmt.format(*titles))
    for row in rows:
        print(fmt.format(*map(str, row)))
    trainable, non_trainable, per_layer = count_params(network)
    print(f"trainable: {trainable}")
    print(f"non-trainable: {non_trainable}")
    print(f"total: {trainable + non_trainable}")
    expected = (REFERENCE_TRAINABLE, REFERENCE_NON_TRAINABLE, list(REFERENCE_LAYER_PARAMS))
    if (trainable, non_trainable, per_layer) != expected:
        print("parameter counts deviate from the reference architecture", file=sys.stderr)
        return 3
    return 0


def cmd_features(args) -> int:
    clip = _read_clip(args.wav)
    features = compute_features(clip)
    export_csv(features, args.out)
    print(f"wrote {features.shape[0]}x{features.shape[1]} grid to {args.out}")
    return 0


def build_parser() -> Parser:
    parser = Parser(prog="voicehand", description=__doc__,
                    formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=Parser)

    p = sub.add_parser("train", help="train a network and write checkpoints")
    p.add_argument("--data-dir", help=f"dataset root (default: ${DATA_DIR_ENV})")
    p.add_argument("--out", help="output directory for checkpoints and the epoch CSV")
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--no-augment", action="store_const", const=True,
                   help="disable background-noise augmentation")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="accuracy and confusion matrix on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--data-dir", help=f"dataset root (default: ${DATA_DIR_ENV})")
    p.add_argument("--split", choices=("val", "test"), required=True)
    p.add_argument("--seed", type=int, default=17,
                   help="seed for the unknown-class subsample")
    p.add_argument("--json", action="store_true")
    p.add_argument("--config", help="JSON config file; flags override it")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("recognize", help="classify one WAV file")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--wav", required=True)
    p.add_argument("--gesture-table", help="JSON gesture table (default built in)")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="minimum probability to accept the decision")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("stream", help="decode a long recording into command JSON lines")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True, help="wav:PATH or pcm-stdin (raw s16le)")
    p.add_argument("--gesture-table", help="JSON gesture table (default built in)")
    p.add_argument("--hop-ms", type=int, default=StreamConfig.hop_ms)
    p.add_argument("--threshold", type=float, default=StreamConfig.decision_threshold)
    p.add_argument("--refractory-ms", type=int, default=StreamConfig.refractory_ms)
    p.set_defaults(func=cmd_stream)

    p = sub.add_parser("inspect", help="print the layer table and parameter counts")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--checkpoint")
    group.add_argument("--fresh", action="store_true", help="inspect a freshly built network")
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("features", help="export one clip's 129x71 feature grid as CSV")
    p.add_argument("--wav", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except CHECKPOINT_ERRORS as e:
        print(f"checkpoint error: {e}", file=sys.stderr)
        return 3
    except VoicehandError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"data error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
