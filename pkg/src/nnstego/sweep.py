"""Replacement and freeze-retrain sweeps over one layer of the desk MLP.

For each fraction: embed a random payload filling that many neurons
(contiguous prefix, rounded, clamped to the layer with a warning), record
test accuracy; optionally freeze the embedded neurons, retrain exactly one
epoch, record accuracy again; finally extract and verify the digest.
Points come back as an accuracy curve and serialize to CSV records
``fraction,acc_before,acc_after,digest_ok``.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .datasets import Dataset
from .engine import (
    HEADER_NEURONS,
    EncodingParams,
    embed_fast_substitution,
    extract_fast_substitution,
)
from .errors import IntegrityError
from .mlp import MlpModel, TrainConfig, evaluate, export_model, import_model, train

PayloadSource = Callable[[int], bytes]


@dataclass(frozen=True)
class SweepPoint:
    fraction: float
    neurons_replaced: int
    accuracy_before: float
    accuracy_after: float | None  # None when not retrained
    digest_ok: bool | None  # None when nothing was embedded

    def __post_init__(self):
        if not 0.0 <= self.accuracy_before <= 1.0:
            raise ValueError(f"accuracy out of range: {self.accuracy_before}")


AccuracyCurve = list[SweepPoint]


def random_payload_source(seed: int) -> PayloadSource:
    rng = np.random.default_rng(seed)
    return lambda size: rng.bytes(size)


def sweep(
    model: MlpModel,
    layer_name: str,
    payload_source: PayloadSource,
    fractions: list[float],
    retrain: bool,
    config: TrainConfig,
    train_data: Dataset,
    test_data: Dataset,
    params: EncodingParams = EncodingParams(),
) -> AccuracyCurve:
    """Accuracy curve over neuron-replacement fractions of one layer.

    Retraining freezes every neuron that carries payload or header bytes
    (indices below max(count, 15)) and runs exactly one epoch, whatever
    ``config.epochs`` says. The digest check runs on the final model of
    each point, so with retraining it also proves freeze bit-exactness.
    """
    index = model.layer_index(layer_name)
    m = model.layers[index].m
    n = model.layers[index].n
    baseline = evaluate(model, test_data)
    curve: AccuracyCurve = []
    for fraction in fractions:
        if fraction < 0:
            raise ValueError(f"fractions must be non-negative, got {fraction}")
        count = round(fraction * m)
        if count > m:
            warnings.warn(f"{count} neurons requested, layer {layer_name!r} has {m}; clamping")
            count = m
        if count == 0:
            curve.append(SweepPoint(fraction, 0, baseline, baseline if retrain else None, None))
            continue

        payload = payload_source(3 * n * count)
        if len(payload) != 3 * n * count:
            raise ValueError(f"payload source yielded {len(payload)} bytes, need {3 * n * count}")
        embedded = import_model(embed_fast_substitution(export_model(model), layer_name, payload, params))
        accuracy_before = evaluate(embedded, test_data)

        accuracy_after = None
        if retrain:
            embedded.layers[index].freeze_mask[: max(count, HEADER_NEURONS)] = True
            embedded, _ = train(embedded, train_data, replace(config, epochs=1))
            accuracy_after = evaluate(embedded, test_data)
        try:
            digest_ok = extract_fast_substitution(export_model(embedded), layer_name) == payload
        except IntegrityError:
            digest_ok = False
        curve.append(SweepPoint(fraction, count, accuracy_before, accuracy_after, digest_ok))
    return curve


def write_curve_csv(curve: AccuracyCurve, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        append_curve_csv(curve, f, header=True)


def append_curve_csv(curve: AccuracyCurve, stream, header: bool = True) -> None:
    writer = csv.writer(stream)
    if header:
        writer.writerow(["fraction", "acc_before", "acc_after", "digest_ok"])
    for p in curve:
        writer.writerow([
            f"{p.fraction:g}",
            f"{p.accuracy_before:.6f}",
            "" if p.accuracy_after is None else f"{p.accuracy_after:.6f}",
            "" if p.digest_ok is None else str(p.digest_ok).lower(),
        ])
