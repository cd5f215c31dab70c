"""The fixed 9-class recognition network.

Architecture, in order: 129x71x1 log-spectrogram input -> conv 8@10x7
(ReLU) -> maxpool 7x5 -> batchnorm -> conv 32@7x5 (ReLU) -> maxpool 3x5
-> batchnorm -> flatten -> dense 64 (ReLU) -> dropout -> dense 9
(softmax). Pooling is non-overlapping: the published stride-1 figure for
the pooling rows contradicts the layer output shapes, and the shapes and
parameter counts only reconcile with stride = pool size, so shapes
govern.

22577 trainable parameters plus 80 batch-norm moving statistics.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch, StaleTrace
from .gestures import CLASS_NAMES
from .layers import BatchNorm, Conv2D, Dense, Dropout, Flatten, MaxPool2D
from .rng import substream

INPUT_SHAPE = (129, 71, 1)

# architecture hyperparameters, also the checkpoint header's spec descriptor
ARCH = (
    {"type": "conv", "name": "conv1", "filters": 8, "filter_size": [10, 7], "stride": 1, "activation": "relu"},
    {"type": "maxpool", "name": "pool1", "pool_size": [7, 5]},
    {"type": "batchnorm", "name": "bn1", "channels": 8, "epsilon": 1e-3, "momentum": 0.99},
    {"type": "conv", "name": "conv2", "filters": 32, "filter_size": [7, 5], "stride": 1, "activation": "relu"},
    {"type": "maxpool", "name": "pool2", "pool_size": [5, 3]},
    {"type": "batchnorm", "name": "bn2", "channels": 32, "epsilon": 1e-3, "momentum": 0.99},
    {"type": "flatten", "name": "flatten"},
    {"type": "dense", "name": "dense1", "units": 64, "activation": "relu"},
    {"type": "dropout", "name": "dropout", "rate": 0.5},
    {"type": "dense", "name": "dense2", "units": 9, "activation": "softmax"},
)

# reference per-layer parameter counts (batch-norm rows include moving stats)
REFERENCE_LAYER_PARAMS = (568, 0, 32, 8992, 0, 128, 0, 12352, 0, 585)
REFERENCE_TRAINABLE = 22577
REFERENCE_NON_TRAINABLE = 80


@dataclass
class ForwardTrace:
    """Per-layer caches from a train-mode forward, consumed by backward."""

    caches: list
    probs: np.ndarray
    version: int


class Network:
    """An ordered layer stack with a shared dtype.

    Mutation discipline: anything that changes parameters bumps
    `version`; a ForwardTrace remembers the version it saw so backward
    can refuse to run against mutated weights.
    """

    def __init__(self, layers, dtype=np.float32, class_names=CLASS_NAMES):
        self.layers = list(layers)
        self.dtype = np.dtype(dtype)
        self.class_names = tuple(class_names)
        self.version = 0

    def __getitem__(self, name):
        for layer in self.layers:
            if layer.name == name:
                return layer
        raise KeyError(name)

    def mark_mutated(self):
        self.version += 1

    def forward(self, x, mode="infer", dropout_rng=None):
        """Run the stack; returns (probabilities, trace) in train mode and
        (probabilities, None) in infer mode."""
        h = np.asarray(x, dtype=self.dtype)
        caches = []
        for layer in self.layers:
            if isinstance(layer, BatchNorm):
                h, cache = layer.forward(h, mode)
            elif isinstance(layer, Dropout):
                h, cache = layer.forward(h, mode, dropout_rng)
            else:
                h, cache = layer.forward(h)
            caches.append(cache)
        if mode == "train":
            return h, ForwardTrace(caches=caches, probs=h, version=self.version)
        return h, None

    def backward(self, trace: ForwardTrace, targets: np.ndarray) -> dict:
        """Gradients of the mean cross-entropy loss for every trainable
        parameter. The softmax and the loss are differentiated together:
        the seed gradient at the final logits is (p - onehot) / batch."""
        if trace.version != self.version:
            raise StaleTrace("network parameters changed since this trace was recorded")
        targets = np.asarray(targets, dtype=self.dtype)
        if targets.shape != trace.probs.shape:
            raise ShapeMismatch(f"targets {targets.shape} vs probs {trace.probs.shape}")
        d = (trace.probs - targets) / trace.probs.shape[0]
        grads = {}
        at_logits = True  # only for the final softmax layer
        for layer, cache in zip(reversed(self.layers), reversed(trace.caches)):
            if isinstance(layer, Dense):
                d, layer_grads = layer.backward(d, cache, at_logits=at_logits)
            else:
                d, layer_grads = layer.backward(d, cache)
            at_logits = False
            grads.update(layer_grads)
        return grads

    def parameters(self) -> dict:
        """Trainable parameters in canonical layer order."""
        out = {}
        for layer in self.layers:
            out.update(layer.trainable())
        return out

    def state_tensors(self) -> list:
        """All stored tensors (trainable + moving statistics), canonical order."""
        out = []
        for layer in self.layers:
            out.extend(layer.state())
        return out


def build_network(seed=17, dtype=np.float32, dropout_rate=0.5) -> Network:
    """Fresh network with Glorot-uniform weights, zero biases, identity
    batch-norm (gamma 1, beta 0, moving mean 0, moving var 1)."""
    rng = substream(seed, "init")
    dtype = np.dtype(dtype)

    def glorot(shape, fan_in, fan_out):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        return rng.uniform(-limit, limit, size=shape).astype(dtype)

    def conv(name, fh, fw, cin, cout):
        w = glorot((fh, fw, cin, cout), fh * fw * cin, fh * fw * cout)
        return Conv2D(name, w, np.zeros(cout, dtype=dtype))

    def dense(name, n_in, n_out, activation):
        w = glorot((n_in, n_out), n_in, n_out)
        return Dense(name, w, np.zeros(n_out, dtype=dtype), activation=activation)

    layers = [
        conv("conv1", 10, 7, 1, 8),
        MaxPool2D("pool1", 7, 5),
        BatchNorm("bn1", 8, dtype=dtype),
        conv("conv2", 7, 5, 8, 32),
        MaxPool2D("pool2", 5, 3),
        BatchNorm("bn2", 32, dtype=dtype),
        Flatten("flatten"),
        dense("dense1", 192, 64, "relu"),
        Dropout("dropout", rate=dropout_rate),
        dense("dense2", 64, 9, "softmax"),
    ]
    return Network(layers, dtype=dtype)


def count_params(network: Network):
    """(trainable, non_trainable, per-layer totals). Per-layer totals count
    every stored tensor, so batch-norm rows include the moving statistics."""
    trainable = sum(a.size for _, a in network.parameters().items())
    total = sum(a.size for _, a in network.state_tensors())
    per_layer = [sum(a.size for _, a in layer.state()) for layer in network.layers]
    return trainable, total - trainable, per_layer


def output_shapes(input_shape=INPUT_SHAPE, arch=ARCH):
    """Static per-layer output shapes, derived from the architecture alone."""
    h, w, c = input_shape
    shapes = []
    for spec in arch:
        kind = spec["type"]
        if kind == "conv":
            fh, fw = spec["filter_size"]
            h, w, c = h - fh + 1, w - fw + 1, spec["filters"]
            shapes.append((h, w, c))
        elif kind == "maxpool":
            ph, pw = spec["pool_size"]
            h, w = h // ph, w // pw
            shapes.append((h, w, c))
        elif kind == "batchnorm":
            shapes.append((h, w, c))
        elif kind == "flatten":
            c = h * w * c
            shapes.append((c,))
        elif kind == "dense":
            c = spec["units"]
            shapes.append((c,))
        elif kind == "dropout":
            shapes.append((c,))
    return shapes


def layer_table(network: Network):
    """Rows for the architecture summary: (index, type, detail, activation,
    output shape, stored parameter count)."""
    _, _, per_layer = count_params(network)
    shapes = output_shapes()
    rows = [(0, "input (log spectrogram)", "-", "-", "x".join(map(str, INPUT_SHAPE)), 0)]
    for i, (spec, shape, n_params) in enumerate(zip(ARCH, shapes, per_layer), start=1):
        kind = spec["type"]
        if kind == "conv":
            detail = f"{spec['filters']} @ {spec['filter_size'][0]}x{spec['filter_size'][1]}"
        elif kind == "maxpool":
            detail = f"{spec['pool_size'][0]}x{spec['pool_size'][1]}"
        elif kind == "dropout":
            detail = f"rate {spec['rate']}"
        elif kind == "dense":
            detail = f"{spec['units']} units"
        else:
            detail = "-"
        activation = spec.get("activation", "-") or "-"
        rows.append((i, kind, detail, activation, "x".join(map(str, shape)), n_params))
    return rows
