"""Shared fixtures: synthetic container models and trained desk MLPs.

The trained-model fixtures are session-scoped because 30-epoch training,
while fast, is the dominant cost of the suite; every test that needs a
trained model shares these five seeds.
"""

from __future__ import annotations

import numpy as np
import pytest

from nnstego.container import TensorModel
from nnstego.datasets import make_blobs
from nnstego.mlp import TrainConfig, build_mlp, evaluate, train

DESK_SEEDS = (0, 1, 2, 3, 4)


def make_layer_model(
    m: int,
    n: int,
    seed: int = 0,
    layer: str = "fc1",
    weight_std: float = 0.15,
    bias_std: float = 0.05,
    metadata: dict[str, str] | None = None,
) -> TensorModel:
    """Synthetic one-layer container: weight [m, n] + bias [m]."""
    rng = np.random.default_rng(seed)
    return TensorModel.from_arrays(
        {
            f"{layer}.weight": rng.normal(0.0, weight_std, size=(m, n)).astype(np.float32),
            f"{layer}.bias": rng.normal(0.0, bias_std, size=m).astype(np.float32),
        },
        metadata,
    )


@pytest.fixture(scope="session")
def layer_model() -> TensorModel:
    return make_layer_model(32, 24, seed=7)


@pytest.fixture(scope="session")
def blobs():
    """Default desk dataset: (train, test) Gaussian blobs, seed 0."""
    return make_blobs(seed=0)


@pytest.fixture(scope="session")
def desk_models(blobs):
    """Five trained desk MLPs (no BN) with their baseline accuracies."""
    train_ds, test_ds = blobs
    out = []
    for seed in DESK_SEEDS:
        model, _ = train(build_mlp(seed=seed), train_ds, TrainConfig(seed=seed))
        out.append((model, evaluate(model, test_ds)))
    return out


@pytest.fixture(scope="session")
def desk_models_bn(blobs):
    """Same five seeds with batch norm on the hidden layers."""
    train_ds, test_ds = blobs
    out = []
    for seed in DESK_SEEDS:
        model, _ = train(build_mlp(batch_norm=True, seed=seed), train_ds, TrainConfig(seed=seed))
        out.append((model, evaluate(model, test_ds)))
    return out
