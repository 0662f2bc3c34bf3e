"""Command-line entry point for the codec, analysis and training tools.

Exit codes: 0 success, 2 usage error, 3 container format error, 4 capacity
error, 5 integrity error, 1 anything else. No command mutates its input
file; every output is written atomically (temp file + rename). Reports
print as text by default or as one JSON record per line with
``--format records``.
"""

from __future__ import annotations

import argparse
import dataclasses
import io
import json
import sys

from . import analysis, container, engine
from .datasets import Dataset, load_idx_dataset, make_blobs
from .engine import Band, EncodingParams, SignRule
from .errors import CapacityError, ContainerError, IntegrityError, NnstegoError
from .mlp import TrainConfig, build_mlp, evaluate, export_model, import_model, train
from .sweep import append_curve_csv, random_payload_source, sweep

_EXIT_USAGE = 2
_EXIT_FORMAT = 3
_EXIT_CAPACITY = 4
_EXIT_INTEGRITY = 5


def _params(args) -> EncodingParams:
    return EncodingParams(band=Band(args.band), sign_rule=SignRule(args.sign))


def _emit(records, args, text_fn) -> None:
    if args.format == "records":
        for rec in records:
            print(json.dumps(rec, sort_keys=True))
    else:
        for rec in records:
            print(text_fn(rec))


def _add_model_arg(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, help="tensor container file")


def _add_codec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--band", choices=[b.value for b in Band], default=Band.LARGE.value,
                   help="magnitude band for embedded values")
    p.add_argument("--sign", choices=[s.value for s in SignRule], default=SignRule.PRESERVE.value,
                   help="sign handling for embedded values")


def _add_dataset_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("dataset (seeded Gaussian blobs, or IDX files)")
    g.add_argument("--train-size", type=int, default=10_000)
    g.add_argument("--test-size", type=int, default=2_000)
    g.add_argument("--dim", type=int, default=64)
    g.add_argument("--classes", type=int, default=10)
    g.add_argument("--radius", type=float, default=5.0, help="blob center radius")
    g.add_argument("--noise", type=float, default=1.0, help="blob noise scale")
    g.add_argument("--data-seed", type=int, default=0)
    g.add_argument("--idx-images", help="IDX image file (overrides blobs)")
    g.add_argument("--idx-labels", help="IDX label file (with --idx-images)")
    g.add_argument("--idx-test-images", help="IDX eval image file")
    g.add_argument("--idx-test-labels", help="IDX eval label file")


def _add_train_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("training")
    g.add_argument("--lr", type=float, default=0.05)
    g.add_argument("--epochs", type=int, default=30)
    g.add_argument("--batch-size", type=int, default=64)
    g.add_argument("--seed", type=int, default=0)


def _datasets(args) -> tuple[Dataset, Dataset]:
    if args.idx_images:
        if not (args.idx_labels and args.idx_test_images and args.idx_test_labels):
            raise ValueError("--idx-images needs --idx-labels, --idx-test-images and --idx-test-labels")
        return (load_idx_dataset(args.idx_images, args.idx_labels),
                load_idx_dataset(args.idx_test_images, args.idx_test_labels))
    return make_blobs(args.train_size, args.test_size, args.dim, args.classes,
                      args.radius, args.noise, args.data_seed)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nnstego",
        description="Embed, extract, detect and scrub byte payloads in neural-network weight files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="list tensors and metadata")
    _add_model_arg(p)
    p.add_argument("--format", choices=["text", "records"], default="text")

    p = sub.add_parser("stats", help="parameter-distribution statistics")
    _add_model_arg(p)
    p.add_argument("--tensor", action="append", help="tensor name (repeatable; default all)")
    p.add_argument("--format", choices=["text", "records"], default="text")

    p = sub.add_parser("capacity", help="fast-substitution capacity of a layer")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--payload-size", type=int, help="also report neurons required for this many bytes")
    p.add_argument("--format", choices=["text", "records"], default="text")

    p = sub.add_parser("embed", help="embed a payload by fast substitution")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--payload", required=True, help="payload file")
    p.add_argument("--out", required=True, help="output model file")
    _add_codec_args(p)

    p = sub.add_parser("extract", help="extract a fast-substitution payload")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--out", required=True, help="output payload file")

    p = sub.add_parser("lsb-embed", help="embed a payload in low mantissa bits")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--payload", required=True)
    p.add_argument("--bits", type=int, required=True, help="bits per parameter, 1..23")
    p.add_argument("--out", required=True)

    p = sub.add_parser("lsb-extract", help="extract a low-bit payload")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--bits", type=int, required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("detect", help="scan for the fast-substitution signature")
    _add_model_arg(p)
    p.add_argument("--threshold", type=float, default=analysis.DEFAULT_THRESHOLD)
    p.add_argument("--window", type=int, default=analysis.DEFAULT_WINDOW)
    p.add_argument("--format", choices=["text", "records"], default="text")

    p = sub.add_parser("sanitize", help="randomize low mantissa bits everywhere")
    _add_model_arg(p)
    p.add_argument("--bits", type=int, default=8, help="low mantissa bits to randomize")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("train", help="train the desk MLP and save it")
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--arch", default="64,128,64,10", help="comma-separated layer sizes")
    p.add_argument("--bn", action="store_true", help="batch norm on hidden layers")
    _add_train_args(p)
    _add_dataset_args(p)

    p = sub.add_parser("eval", help="test accuracy of a saved model")
    _add_model_arg(p)
    _add_dataset_args(p)

    p = sub.add_parser("sweep", help="neuron-replacement accuracy curve")
    _add_model_arg(p)
    p.add_argument("--layer", required=True)
    p.add_argument("--fractions", default="0,0.25,0.5,0.75,1.0", help="comma-separated fractions")
    p.add_argument("--retrain", action="store_true", help="freeze embedded neurons and retrain 1 epoch")
    p.add_argument("--out", help="CSV output path (default: print records)")
    _add_codec_args(p)
    _add_train_args(p)
    _add_dataset_args(p)

    return parser


def _cmd_info(args) -> int:
    model = container.load(args.model)
    records = [dataclasses.asdict(model.spec(name)) for name in model.names]
    _emit(records, args, lambda r: "%-24s %s %s  bytes [%d, %d)" % (
        r["name"], r["dtype"], list(r["shape"]), *r["data_offsets"]))
    if args.format == "text":
        for key, value in sorted(model.metadata.items()):
            print(f"meta {key} = {value}")
    elif model.metadata:
        print(json.dumps({"metadata": model.metadata}, sort_keys=True))
    return 0


def _cmd_stats(args) -> int:
    model = container.load(args.model)
    names = args.tensor or model.names
    records = []
    for name in names:
        s = analysis.stats(model, name)
        rec = dataclasses.asdict(s)
        rec["leading_byte_histogram"] = s.leading_byte_histogram.tolist()
        records.append(rec)
    _emit(records, args, lambda r: (
        "%-24s count=%d neg=%d pos=%d zero=%d min=%.6g max=%.6g |v|<1e-4: %.4f |v|<1e-3: %.4f"
        % (r["tensor"], r["count"], r["negatives"], r["positives"], r["zeros"],
           r["minimum"], r["maximum"], r["frac_abs_below_1e4"], r["frac_abs_below_1e3"])))
    return 0


def _cmd_capacity(args) -> int:
    report = engine.capacity(container.load(args.model), args.layer)
    rec = {
        "layer": report.layer,
        "neurons": report.neurons,
        "fan_in": report.fan_in,
        "per_neuron_bytes": report.per_neuron_bytes,
        "payload_capacity_bytes": report.payload_capacity_bytes,
        "header_neurons": engine.HEADER_NEURONS,
    }
    if args.payload_size is not None:
        rec["neurons_required"] = report.neurons_required(args.payload_size)
    _emit([rec], args, lambda r: "\n".join(f"{k} = {v}" for k, v in r.items()))
    return 0


def _cmd_embed(args) -> int:
    model = container.load(args.model)
    with open(args.payload, "rb") as f:
        payload = f.read()
    container.save(engine.embed_fast_substitution(model, args.layer, payload, _params(args)), args.out)
    print(f"embedded {len(payload)} bytes into {args.layer} -> {args.out}")
    return 0


def _cmd_extract(args) -> int:
    payload = engine.extract_fast_substitution(container.load(args.model), args.layer)
    container.write_bytes_atomic(args.out, payload)
    print(f"extracted {len(payload)} bytes from {args.layer} -> {args.out}")
    return 0


def _cmd_lsb_embed(args) -> int:
    model = container.load(args.model)
    with open(args.payload, "rb") as f:
        payload = f.read()
    container.save(engine.embed_lsb(model, args.layer, payload, args.bits), args.out)
    print(f"embedded {len(payload)} bytes into low {args.bits} bits of {args.layer} -> {args.out}")
    return 0


def _cmd_lsb_extract(args) -> int:
    payload = engine.extract_lsb(container.load(args.model), args.layer, args.bits)
    container.write_bytes_atomic(args.out, payload)
    print(f"extracted {len(payload)} bytes from {args.layer} -> {args.out}")
    return 0


def _cmd_detect(args) -> int:
    report = analysis.detect(container.load(args.model), args.threshold, args.window)
    records = [dataclasses.asdict(t) for t in report.tensors]
    _emit(records, args, lambda r: "%-24s count=%-8d pinned=%.4f trailing_entropy=%.3f%s" % (
        r["tensor"], r["count"], r["pinned_fraction"], r["trailing_entropy_bits"],
        "  FLAGGED" if r["flagged"] else ""))
    verdict = {"flagged": report.flagged, "flagged_tensors": list(report.flagged_tensors),
               "threshold": report.threshold, "window": report.window}
    if args.format == "records":
        print(json.dumps(verdict, sort_keys=True))
    else:
        print("verdict: " + ("EMBEDDED PAYLOAD LIKELY in " + ", ".join(report.flagged_tensors)
                             if report.flagged else "no fast-substitution signature"))
    return 0


def _cmd_sanitize(args) -> int:
    model = container.load(args.model)
    container.save(analysis.sanitize(model, args.bits, args.seed), args.out)
    print(f"randomized low {args.bits} mantissa bits of every parameter -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    sizes = tuple(int(s) for s in args.arch.split(","))
    train_ds, test_ds = _datasets(args)
    config = TrainConfig(args.lr, args.epochs, args.batch_size, args.seed)
    model, metrics = train(build_mlp(sizes, batch_norm=args.bn, seed=args.seed), train_ds, config)
    container.save(export_model(model), args.out)
    final = metrics[-1].mean_loss if metrics else float("nan")
    print(f"trained {args.epochs} epochs, final mean loss {final:.4f}, "
          f"test accuracy {evaluate(model, test_ds):.4f} -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    model = import_model(container.load(args.model))
    _, test_ds = _datasets(args)
    print(f"accuracy = {evaluate(model, test_ds):.4f}")
    return 0


def _cmd_sweep(args) -> int:
    model = import_model(container.load(args.model))
    train_ds, test_ds = _datasets(args)
    fractions = [float(s) for s in args.fractions.split(",")]
    config = TrainConfig(args.lr, args.epochs, args.batch_size, args.seed)
    curve = sweep(model, args.layer, random_payload_source(args.seed), fractions,
                  args.retrain, config, train_ds, test_ds, _params(args))
    buf = io.StringIO()
    append_curve_csv(curve, buf)
    if args.out:
        container.write_bytes_atomic(args.out, buf.getvalue().encode())
        print(f"wrote {len(curve)} sweep points -> {args.out}")
    else:
        sys.stdout.write(buf.getvalue())
    return 0


_HANDLERS = {
    "info": _cmd_info,
    "stats": _cmd_stats,
    "capacity": _cmd_capacity,
    "embed": _cmd_embed,
    "extract": _cmd_extract,
    "lsb-embed": _cmd_lsb_embed,
    "lsb-extract": _cmd_lsb_extract,
    "detect": _cmd_detect,
    "sanitize": _cmd_sanitize,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def dispatch(argv: list[str]) -> int:
    """Run one command; returns the process exit code instead of raising."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ContainerError as e:
        print(f"error: {e}", file=sys.stderr)
        return _EXIT_FORMAT
    except CapacityError as e:
        print(f"error: {e}", file=sys.stderr)
        return _EXIT_CAPACITY
    except IntegrityError as e:
        print(f"error: {e}", file=sys.stderr)
        return _EXIT_INTEGRITY
    except (ValueError, OSError, NnstegoError) as e:
        print(f"error: {e}", file=sys.stderr)
        return _EXIT_USAGE if isinstance(e, ValueError) else 1


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
