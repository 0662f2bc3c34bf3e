"""Desk-scale multilayer perceptron: numpy training, eval, container IO.

Each dense layer computes activation(norm(x @ W.T + b)) where norm is
optional batch normalization placed between the affine transform and the
activation. Training is plain SGD on softmax cross-entropy, in float32 to
match deployed parameters; a float64 conversion exists for gradient
checks. Per-neuron freeze masks keep selected weight rows and bias entries
bit-identical across any number of steps (batch-norm parameters and
running statistics stay live, payloads occupy only affine parameters).

Evaluation runs in float64 so the reported accuracy does not depend on
how the test set is batched.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .container import TensorModel
from .errors import MissingTensor, NonFiniteLoss, ShapeMismatch

if TYPE_CHECKING:
    from .datasets import Dataset

ACTIVATIONS = ("relu", "identity")
BN_FIELDS = ("gamma", "beta", "running_mean", "running_var")
DEFAULT_LAYER_SIZES = (64, 128, 64, 10)
DEFAULT_BN_EPS = 1e-5
DEFAULT_BN_MOMENTUM = 0.1


@dataclass
class BatchNorm:
    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    eps: float = DEFAULT_BN_EPS
    momentum: float = DEFAULT_BN_MOMENTUM

    @classmethod
    def identity(cls, width: int, dtype=np.float32) -> "BatchNorm":
        return cls(
            gamma=np.ones(width, dtype=dtype),
            beta=np.zeros(width, dtype=dtype),
            running_mean=np.zeros(width, dtype=dtype),
            running_var=np.ones(width, dtype=dtype),
        )

    def copy(self) -> "BatchNorm":
        return BatchNorm(
            self.gamma.copy(), self.beta.copy(),
            self.running_mean.copy(), self.running_var.copy(),
            self.eps, self.momentum,
        )


@dataclass
class DenseLayer:
    weights: np.ndarray  # [m, n]
    bias: np.ndarray  # [m]
    activation: str = "relu"
    batch_norm: BatchNorm | None = None
    freeze_mask: np.ndarray = field(default=None)  # bool [m]

    def __post_init__(self):
        if self.weights.ndim != 2:
            raise ShapeMismatch(f"weights must be rank 2, got shape {self.weights.shape}")
        m = self.weights.shape[0]
        if self.bias.shape != (m,):
            raise ShapeMismatch(f"bias shape {self.bias.shape} does not match {m} neurons")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}, got {self.activation!r}")
        if self.batch_norm is not None and self.batch_norm.gamma.shape != (m,):
            raise ShapeMismatch(f"batch-norm width {self.batch_norm.gamma.shape} does not match {m} neurons")
        if self.freeze_mask is None:
            self.freeze_mask = np.zeros(m, dtype=bool)
        elif self.freeze_mask.shape != (m,) or self.freeze_mask.dtype != bool:
            raise ShapeMismatch(f"freeze_mask must be bool [{m}]")

    @property
    def m(self) -> int:
        return self.weights.shape[0]

    @property
    def n(self) -> int:
        return self.weights.shape[1]

    def copy(self) -> "DenseLayer":
        return DenseLayer(
            self.weights.copy(), self.bias.copy(), self.activation,
            self.batch_norm.copy() if self.batch_norm else None,
            self.freeze_mask.copy(),
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 30
    batch_size: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError(f"learning rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch size must be at least 1, got {self.batch_size}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be non-negative, got {self.epochs}")


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    mean_loss: float


class MlpModel:
    def __init__(self, layers: list[DenseLayer]):
        if not layers:
            raise ValueError("model needs at least one layer")
        self.layers = list(layers)

    @property
    def input_dim(self) -> int:
        return self.layers[0].n

    @property
    def n_classes(self) -> int:
        return self.layers[-1].m

    def copy(self) -> "MlpModel":
        return MlpModel([layer.copy() for layer in self.layers])

    def astype(self, dtype) -> "MlpModel":
        out = self.copy()
        for layer in out.layers:
            layer.weights = layer.weights.astype(dtype)
            layer.bias = layer.bias.astype(dtype)
            if layer.batch_norm:
                bn = layer.batch_norm
                bn.gamma = bn.gamma.astype(dtype)
                bn.beta = bn.beta.astype(dtype)
                bn.running_mean = bn.running_mean.astype(dtype)
                bn.running_var = bn.running_var.astype(dtype)
        return out

    def layer_name(self, index: int) -> str:
        return f"fc{index + 1}"

    def layer_index(self, name: str) -> int:
        for i in range(len(self.layers)):
            if self.layer_name(i) == name:
                return i
        raise MissingTensor(f"model has no layer named {name!r}")

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        """Logits for a batch; batch statistics in training mode, running
        statistics otherwise."""
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeMismatch(f"batch shape {x.shape} does not match input dim {self.input_dim}")
        for layer in self.layers:
            z = x @ layer.weights.T + layer.bias
            bn = layer.batch_norm
            if bn is not None:
                if training:
                    mean, var = z.mean(axis=0), z.var(axis=0)
                else:
                    mean, var = bn.running_mean, bn.running_var
                z = bn.gamma * (z - mean) / np.sqrt(var + bn.eps) + bn.beta
            x = np.maximum(z, 0) if layer.activation == "relu" else z
        return x


def build_mlp(
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES,
    batch_norm: bool = False,
    seed: int = 0,
    dtype=np.float32,
) -> MlpModel:
    """He-initialized MLP: ReLU hidden layers, identity output layer,
    optional batch norm on every hidden layer."""
    if len(layer_sizes) < 2:
        raise ValueError("need at least input and output sizes")
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_sizes, layer_sizes[1:])):
        hidden = i < len(layer_sizes) - 2
        std = np.sqrt((2.0 if hidden else 1.0) / fan_in)
        layers.append(
            DenseLayer(
                weights=rng.normal(0.0, std, size=(fan_out, fan_in)).astype(dtype),
                bias=np.zeros(fan_out, dtype=dtype),
                activation="relu" if hidden else "identity",
                batch_norm=BatchNorm.identity(fan_out, dtype) if batch_norm and hidden else None,
            )
        )
    return MlpModel(layers)


def param_size(m: int, n: int) -> int:
    """Byte footprint of one dense layer: m neurons of n float32 weights
    plus one float32 bias each."""
    if m < 1 or n < 1:
        raise ValueError(f"layer dimensions must be at least 1, got m={m}, n={n}")
    return 4 * m * (n + 1)


@dataclass
class _LayerGrads:
    dw: np.ndarray
    db: np.ndarray
    dgamma: np.ndarray | None = None
    dbeta: np.ndarray | None = None


def loss_and_grads(model: MlpModel, x: np.ndarray, y: np.ndarray):
    """Mean softmax cross-entropy and analytic gradients for one batch.

    Pure: neither parameters nor running statistics are touched. Returns
    (loss, per-layer grads, per-layer batch (mean, var) or None) so the
    training loop can apply updates and running-stat decay itself.
    """
    batch = x.shape[0]
    caches = []
    out = x
    for layer in model.layers:
        x_in = out
        z = x_in @ layer.weights.T + layer.bias
        bn = layer.batch_norm
        if bn is not None:
            mean, var = z.mean(axis=0), z.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + bn.eps)
            zhat = (z - mean) * inv_std
            pre = bn.gamma * zhat + bn.beta
            bn_cache = (zhat, inv_std, mean, var)
        else:
            pre = z
            bn_cache = None
        out = np.maximum(pre, 0) if layer.activation == "relu" else pre
        caches.append((x_in, pre, bn_cache))

    logits = out
    shift = logits - logits.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(shift).sum(axis=1, keepdims=True))
    log_probs = shift - log_z
    loss = float(-log_probs[np.arange(batch), y].mean())

    d_out = np.exp(log_probs)
    d_out[np.arange(batch), y] -= 1.0
    d_out /= np.asarray(batch, dtype=d_out.dtype)

    grads: list[_LayerGrads] = [None] * len(model.layers)
    bn_stats = []
    for i in reversed(range(len(model.layers))):
        layer = model.layers[i]
        x_in, pre, bn_cache = caches[i]
        if layer.activation == "relu":
            d_out = d_out * (pre > 0)
        if bn_cache is not None:
            zhat, inv_std, mean, var = bn_cache
            bn = layer.batch_norm
            dbeta = d_out.sum(axis=0)
            dgamma = (d_out * zhat).sum(axis=0)
            dzhat = d_out * bn.gamma
            b = np.asarray(batch, dtype=d_out.dtype)
            d_out = (inv_std / b) * (b * dzhat - dzhat.sum(axis=0) - zhat * (dzhat * zhat).sum(axis=0))
            bn_stats.append((mean, var))
        else:
            dgamma = dbeta = None
            bn_stats.append(None)
        grads[i] = _LayerGrads(d_out.T @ x_in, d_out.sum(axis=0), dgamma, dbeta)
        d_out = d_out @ layer.weights
    bn_stats.reverse()
    return loss, grads, bn_stats


def _apply_update(model: MlpModel, grads: list[_LayerGrads], lr: float) -> None:
    for layer, g in zip(model.layers, grads):
        frozen = layer.freeze_mask
        if frozen.any():
            free = ~frozen
            layer.weights[free] -= lr * g.dw[free]
            layer.bias[free] -= lr * g.db[free]
        else:
            layer.weights -= lr * g.dw
            layer.bias -= lr * g.db
        if layer.batch_norm is not None:
            layer.batch_norm.gamma -= lr * g.dgamma
            layer.batch_norm.beta -= lr * g.dbeta


def _update_running_stats(model: MlpModel, bn_stats) -> None:
    for layer, stat in zip(model.layers, bn_stats):
        if stat is None:
            continue
        bn = layer.batch_norm
        mean, var = stat
        bn.running_mean = (1.0 - bn.momentum) * bn.running_mean + bn.momentum * mean
        bn.running_var = (1.0 - bn.momentum) * bn.running_var + bn.momentum * var


def train(model: MlpModel, dataset: "Dataset", config: TrainConfig) -> tuple[MlpModel, list[EpochMetrics]]:
    """SGD-train a copy of the model; deterministic for a given seed."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    model = model.copy()
    rng = np.random.default_rng(config.seed)
    metrics = []
    for epoch in range(config.epochs):
        order = rng.permutation(len(dataset))
        losses = []
        for start in range(0, len(order), config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads, bn_stats = loss_and_grads(model, dataset.x[idx], dataset.y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(f"loss became {loss} in epoch {epoch} at sample {start}")
            _apply_update(model, grads, config.learning_rate)
            _update_running_stats(model, bn_stats)
            losses.append(loss)
        metrics.append(EpochMetrics(epoch, float(np.mean(losses))))
    return model, metrics


def evaluate(model: MlpModel, dataset: "Dataset", batch_size: int | None = None) -> float:
    """Test accuracy in eval mode (running statistics, float64 math).

    Float64 keeps argmax decisions independent of how the set is batched.
    """
    model64 = model.astype(np.float64)
    x = dataset.x.astype(np.float64)
    if batch_size is None:
        batch_size = len(dataset)
    correct = 0
    for start in range(0, len(dataset), batch_size):
        logits = model64.forward(x[start : start + batch_size], training=False)
        correct += int((logits.argmax(axis=1) == dataset.y[start : start + batch_size]).sum())
    return correct / len(dataset)


def export_model(model: MlpModel, metadata: dict[str, str] | None = None) -> TensorModel:
    """Container form of a float32 model; layers are named fc1, fc2, ..."""
    tensors: dict[str, np.ndarray] = {}
    activations = []
    bn_layers = []
    for i, layer in enumerate(model.layers):
        if layer.weights.dtype != np.float32:
            raise ValueError(f"only float32 models export, layer {i} is {layer.weights.dtype}")
        name = model.layer_name(i)
        tensors[f"{name}.weight"] = layer.weights
        tensors[f"{name}.bias"] = layer.bias
        activations.append(layer.activation)
        if layer.batch_norm is not None:
            bn_layers.append(name)
            for fld in BN_FIELDS:
                tensors[f"{name}.bn.{fld}"] = getattr(layer.batch_norm, fld)
    meta = {
        "arch": "mlp",
        "dims": ",".join(str(d) for d in (model.input_dim, *(l.m for l in model.layers))),
        "activations": ",".join(activations),
        "batch_norm": ",".join(bn_layers),
        "bn_eps": repr(DEFAULT_BN_EPS),
        "bn_momentum": repr(DEFAULT_BN_MOMENTUM),
    }
    if metadata:
        meta.update(metadata)
    return TensorModel.from_arrays(tensors, meta)


def import_model(tm: TensorModel) -> MlpModel:
    """Rebuild an MlpModel from its container form, bit-exactly."""
    meta = tm.metadata
    if meta.get("arch") != "mlp":
        raise ValueError(f"container is not an exported MLP (arch={meta.get('arch')!r})")
    activations = meta["activations"].split(",")
    bn_layers = set(meta["batch_norm"].split(",")) - {""}
    eps = float(meta.get("bn_eps", repr(DEFAULT_BN_EPS)))
    momentum = float(meta.get("bn_momentum", repr(DEFAULT_BN_MOMENTUM)))
    layers = []
    for i, activation in enumerate(activations):
        name = f"fc{i + 1}"
        bn = None
        if name in bn_layers:
            bn = BatchNorm(
                *(tm.tensor(f"{name}.bn.{fld}").copy() for fld in BN_FIELDS),
                eps=eps, momentum=momentum,
            )
        layers.append(
            DenseLayer(
                weights=tm.tensor(f"{name}.weight").copy(),
                bias=tm.tensor(f"{name}.bias").copy(),
                activation=activation,
                batch_norm=bn,
            )
        )
    return MlpModel(layers)
