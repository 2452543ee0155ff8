"""Command-line entry points.

Subcommands:

* ``sig compute``      signature of a path file, printed as text
* ``features extract`` manifest of clips -> feature matrix files
* ``train``            feature matrix -> model file (+ history)
* ``eval``             model + labeled features -> accuracy report
* ``predict``          model + one clip -> class name and probability
* ``bench``            timing harness for large signature computations

Exit status: 0 on success, 1 on input/usage errors, 2 on file format
errors.  Every command is deterministic given its seed flags; rerunning
``features extract`` with the same inputs rewrites byte-identical files.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from .errors import FormatError, InputError
from . import io as pio
from .classifier import (
    HIDDEN_UNITS,
    LinearNetModel,
    TrainConfig,
    TwoStageModel,
    StagePartition,
    extract_body_features,
    forward,
    init_model,
    load_model,
    rank_actors,
    save_model,
    stage_partition,
    train,
    two_stage_predict,
)
from .signature import path_signature, signature_dimension
from .skeleton import (
    DatasetDescriptor,
    FeatureConfig,
    apply_scaler,
    assemble_features,
    augment_clips,
    feature_layout,
    fill_clip,
    fit_scaler,
    merge_actors,
    normalize_clip,
)
from .transforms import add_time, lead_lag

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    """argparse parser whose usage errors exit with status 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="pathsig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sig = sub.add_parser("sig", help="signature computations")
    sig_sub = sig.add_subparsers(dest="sig_command", required=True, parser_class=_Parser)
    compute = sig_sub.add_parser("compute", help="print the signature of a path file")
    compute.add_argument("path_file", help="text file, one sample per line, comma-separated")
    compute.add_argument("--level", type=int, required=True, help="truncation level (>= 1)")
    compute.add_argument("--lead-lag", type=int, metavar="K", default=0,
                         help="lift a 1-D path to K delayed copies before signing")
    compute.add_argument("--add-time", action="store_true",
                         help="append a [0,1] time coordinate (after any lead-lag)")
    compute.set_defaults(func=cmd_sig_compute)

    features = sub.add_parser("features", help="feature extraction")
    feat_sub = features.add_subparsers(dest="features_command", required=True,
                                       parser_class=_Parser)
    extract = feat_sub.add_parser("extract", help="clips manifest -> feature matrices")
    extract.add_argument("--manifest", required=True, help="dataset manifest file")
    extract.add_argument("--descriptor", required=True, help="skeleton descriptor file")
    extract.add_argument("--config", default=None,
                         help="feature config key-value file (defaults when omitted)")
    extract.add_argument("--output", required=True, metavar="PREFIX",
                         help="output prefix for .feat/.labels/.scaler files")
    extract.add_argument("--two-stage", action="store_true",
                         help="also write gate/one/multi splits for two-stage training")
    extract.set_defaults(func=cmd_extract)

    train_p = sub.add_parser("train", help="train a classifier on extracted features")
    train_p.add_argument("--features", required=True,
                         help="feature matrix file, or the extract PREFIX with --two-stage")
    train_p.add_argument("--labels", default=None,
                         help="labels file (ignored with --two-stage)")
    train_p.add_argument("--model", required=True,
                         help="output model file, or an output prefix with --two-stage")
    train_p.add_argument("--history", default=None, help="per-epoch history output file")
    train_p.add_argument("--classes", type=int, default=0,
                         help="class count (default: 1 + max training label)")
    train_p.add_argument("--hidden", type=int, default=HIDDEN_UNITS, help="hidden units")
    train_p.add_argument("--batch-size", type=int, default=30)
    train_p.add_argument("--momentum", type=float, default=0.7)
    train_p.add_argument("--lr", type=float, default=0.01, help="initial learning rate")
    train_p.add_argument("--decay", type=float, default=0.005, help="lr decay per epoch")
    train_p.add_argument("--epochs", type=int, default=200, help="training epochs")
    train_p.add_argument("--drop-rate", type=float, default=0.95,
                         help="dropconnect drop probability on the first layer")
    train_p.add_argument("--seed", type=int, default=0)
    train_p.add_argument("--two-stage", action="store_true",
                         help="train gate/one/multi models from a two-stage extract")
    train_p.set_defaults(func=cmd_train)

    eval_p = sub.add_parser("eval", help="evaluate a model on labeled features")
    eval_p.add_argument("--features", required=True,
                        help="feature matrix file, or the extract PREFIX with --two-stage")
    eval_p.add_argument("--labels", required=True, help="true labels file")
    eval_p.add_argument("--model", required=True,
                        help="model file, or the train PREFIX with --two-stage")
    eval_p.add_argument("--split", default="test", choices=("train", "test"),
                        help="which two-stage split to evaluate (default test)")
    eval_p.add_argument("--two-stage", action="store_true")
    eval_p.set_defaults(func=cmd_eval)

    predict = sub.add_parser("predict", help="classify a single clip file")
    predict.add_argument("--clip", required=True, help="clip file")
    predict.add_argument("--descriptor", required=True, help="skeleton descriptor file")
    predict.add_argument("--config", default=None, help="feature config file")
    predict.add_argument("--model", required=True,
                         help="model file, or the train PREFIX with --two-stage")
    predict.add_argument("--scaler", required=True,
                         help="scaler file, or the extract PREFIX with --two-stage")
    predict.add_argument("--two-stage", action="store_true")
    predict.set_defaults(func=cmd_predict)

    bench = sub.add_parser("bench", help="time path_signature on a random path")
    bench.add_argument("--dim", type=int, required=True, help="path dimension")
    bench.add_argument("--level", type=int, required=True, help="truncation level")
    bench.add_argument("--points", type=int, required=True, help="points in the path")
    bench.add_argument("--repeats", type=int, default=1, help="timed repetitions (>= 1)")
    bench.add_argument("--seed", type=int, default=0)
    bench.set_defaults(func=cmd_bench)

    return parser


def cmd_sig_compute(args) -> int:
    """Print one `level value` line per coefficient, 17 significant digits."""
    pts = pio.read_path_file(args.path_file)
    if args.lead_lag:
        if pts.shape[1] != 1:
            raise InputError(
                f"--lead-lag needs a 1-dimensional path, got {pts.shape[1]} coordinates"
            )
        pts = lead_lag(pts[:, 0], args.lead_lag)
    if args.add_time:
        pts = add_time(pts)
    sig = path_signature(pts, args.level)
    for k in range(1, sig.n + 1):
        for value in sig.level(k):
            print(f"{k} {value:.17g}")
    return 0


def _class_id(name: str, descriptor: DatasetDescriptor, manifest_path) -> int:
    try:
        return descriptor.class_names.index(name)
    except ValueError:
        raise InputError(
            f"{manifest_path}: label {name!r} is not among the descriptor classes "
            f"{list(descriptor.class_names)}"
        ) from None


def _prepare_body(clip, bodies: int):
    """Rank actors, merge the top ones into a rigid body, normalize, fill."""
    ranked = rank_actors(clip)
    merged = merge_actors(clip, ranked[:bodies], bodies)
    return fill_clip(normalize_clip(merged))


def _extract_split(records, descriptor, config, options, bodies, augment):
    """Feature rows and labels for one manifest split, in manifest order."""
    body_desc = descriptor.merged(bodies)
    rows, labels = [], []
    for index, rec in enumerate(records):
        label = _class_id(rec.label_name, descriptor, rec.clip_path)
        clip = pio.read_clip_file(rec.clip_path, descriptor, label=label,
                                  min_actors=rec.actor_count)
        prepared = _prepare_body(clip, bodies)
        if augment:
            variants = augment_clips(prepared, body_desc, flip=options.flip,
                                     noise_copies=options.noise_copies,
                                     noise_sigma=options.noise_sigma,
                                     seed=[options.seed, index])
        else:
            variants = [prepared]
        for variant in variants:
            rows.append(assemble_features(variant.joints[:, 0], config, body_desc).values)
            labels.append(label)
    return np.array(rows), np.array(labels, dtype=np.int64)


def _print_layout(config: FeatureConfig, descriptor: DatasetDescriptor) -> None:
    layout = feature_layout(config, descriptor)
    per_frame = {}
    totals = {}
    for block in layout:
        totals[block.name] = totals.get(block.name, 0) + block.width
        per_frame.setdefault(block.name, block.width)
    spatial = per_frame["pair_sig"] + per_frame["triple_sig"]
    D = sum(totals.values())
    print(f"feature layout: {descriptor.joint_count} joints, dim {descriptor.dim}, "
          f"{config.sampled_frames} sampled frames")
    print(f"  joints                per frame {per_frame['joints']:>8}  "
          f"total {totals['joints']:>9}")
    print(f"  pair_sig              per frame {per_frame['pair_sig']:>8}  "
          f"total {totals['pair_sig']:>9}")
    print(f"  triple_sig            per frame {per_frame['triple_sig']:>8}  "
          f"total {totals['triple_sig']:>9}")
    print(f"  spatial sig per frame (pair+triple): {spatial}")
    print(f"  joint_motion_sig      {totals['joint_motion_sig']:>9}")
    print(f"  spatial_evolution_sig {totals['spatial_evolution_sig']:>9}")
    print(f"  total dimension: {D}")


def cmd_extract(args) -> int:
    records = pio.read_manifest(args.manifest)
    descriptor = pio.read_descriptor(args.descriptor)
    if args.config:
        config, options = pio.read_feature_config(args.config)
    else:
        config, options = FeatureConfig(), pio.ExtractionOptions()
    train_recs = [r for r in records if r.split == "train"]
    test_recs = [r for r in records if r.split == "test"]
    if not train_recs:
        raise InputError(f"{args.manifest}: no train records")

    if not args.two_stage:
        bodies = options.bodies
        layout = feature_layout(config, descriptor.merged(bodies))
        x_train, y_train = _extract_split(train_recs, descriptor, config, options,
                                          bodies, augment=True)
        scaler = fit_scaler(x_train)
        pio.write_feature_matrix(f"{args.output}.train.feat",
                                 apply_scaler(scaler, x_train), layout)
        pio.write_labels(y_train, f"{args.output}.train.labels")
        if test_recs:
            x_test, y_test = _extract_split(test_recs, descriptor, config, options,
                                            bodies, augment=False)
            pio.write_feature_matrix(f"{args.output}.test.feat",
                                     apply_scaler(scaler, x_test), layout)
            pio.write_labels(y_test, f"{args.output}.test.labels")
        pio.write_scaler(scaler, f"{args.output}.scaler.feat")
        _print_layout(config, descriptor.merged(bodies))
        print(f"train rows: {x_train.shape[0]}"
              + (f", test rows: {len(test_recs)}" if test_recs else ""))
        return 0

    # Two-stage: gate/multi share rigid two-body features; the one-body
    # stream sees only the most active actor.  Scalers are fit on each
    # model's own training distribution.
    train_labels = np.array([_class_id(r.label_name, descriptor, r.clip_path)
                             for r in train_recs], dtype=np.int64)
    counts = np.array([r.actor_count for r in train_recs], dtype=np.float64)
    partition = stage_partition(train_labels, counts, len(descriptor.class_names))
    pio.write_partition(partition.mean_actor_counts, partition.multi_body,
                        f"{args.output}.partition.txt")
    one_layout = feature_layout(config, descriptor)
    two_layout = feature_layout(config, descriptor.merged(2))
    multi_classes = partition.multi_body_classes
    for split, recs, augment in (("train", train_recs, True), ("test", test_recs, False)):
        if not recs:
            continue
        x_two, y = _extract_split(recs, descriptor, config, options, 2, augment)
        x_one, _ = _extract_split(recs, descriptor, config, options, 1, augment)
        is_multi = np.isin(y, multi_classes)
        y_gate = is_multi.astype(np.int64)
        if split == "train":
            # each stage's scaler sees only its own training distribution
            gate_scaler = fit_scaler(x_two)
            one_scaler = fit_scaler(x_one[~is_multi]) if (~is_multi).any() else fit_scaler(x_one)
            multi_scaler = fit_scaler(x_two[is_multi]) if is_multi.any() else gate_scaler
            pio.write_scaler(gate_scaler, f"{args.output}.gate.scaler.feat")
            pio.write_scaler(one_scaler, f"{args.output}.one.scaler.feat")
            pio.write_scaler(multi_scaler, f"{args.output}.multi.scaler.feat")
        pio.write_feature_matrix(f"{args.output}.gate.{split}.feat",
                                 apply_scaler(gate_scaler, x_two), two_layout)
        pio.write_labels(y_gate, f"{args.output}.gate.{split}.labels")
        pio.write_feature_matrix(f"{args.output}.one.{split}.feat",
                                 apply_scaler(one_scaler, x_one), one_layout)
        pio.write_labels(y, f"{args.output}.one.{split}.labels")
        pio.write_feature_matrix(f"{args.output}.multi.{split}.feat",
                                 apply_scaler(multi_scaler, x_two), two_layout)
        pio.write_labels(y, f"{args.output}.multi.{split}.labels")
    _print_layout(config, descriptor)
    print(f"one-body classes: {partition.one_body_classes.tolist()}, "
          f"multi-body classes: {partition.multi_body_classes.tolist()}")
    return 0


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        batch_size=args.batch_size,
        momentum=args.momentum,
        learning_rate=args.lr,
        decay=args.decay,
        max_epochs=args.epochs,
        drop_rate=args.drop_rate,
        seed=args.seed,
    )


def _write_history(history, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("# epoch,lr,loss,train_accuracy\n")
        for s in history:
            f.write(f"{s.epoch},{s.lr:.17g},{s.loss:.17g},{s.accuracy:.17g}\n")


def _fit(x, y, class_count, config, hidden, model_path, history_path):
    model = init_model(x.shape[1], class_count, config, hidden_dim=hidden)
    history = train(model, x, y, config)
    save_model(model, model_path)
    if history_path:
        _write_history(history, history_path)
    last = history[-1]
    print(f"{model_path}: {len(history)} epochs, final loss {last.loss:.6f}, "
          f"train accuracy {last.accuracy:.4f}")
    return model


def cmd_train(args) -> int:
    config = _train_config(args)
    if not args.two_stage:
        if not args.labels:
            raise InputError("--labels is required without --two-stage")
        x, _ = pio.read_feature_matrix(args.features)
        y = pio.read_labels(args.labels)
        if y.size != x.shape[0]:
            raise InputError(f"{args.labels}: {y.size} labels for {x.shape[0]} feature rows")
        class_count = args.classes or int(y.max()) + 1
        _fit(x, y, class_count, config, args.hidden, args.model,
             args.history or f"{args.model}.history.txt")
        return 0

    prefix = args.features
    means, multi = pio.read_partition(f"{prefix}.partition.txt")
    partition = StagePartition(means, multi)
    x_gate, _ = pio.read_feature_matrix(f"{prefix}.gate.train.feat")
    y_gate = pio.read_labels(f"{prefix}.gate.train.labels")
    _fit(x_gate, y_gate, 2, config, args.hidden, f"{args.model}.gate.model",
         f"{args.model}.gate.history.txt")
    for stage, classes in (("one", partition.one_body_classes),
                           ("multi", partition.multi_body_classes)):
        if classes.size == 0:
            continue
        x, _ = pio.read_feature_matrix(f"{prefix}.{stage}.train.feat")
        y = pio.read_labels(f"{prefix}.{stage}.train.labels")
        keep = np.isin(y, classes)
        remap = {int(c): i for i, c in enumerate(classes)}
        y_local = np.array([remap[int(v)] for v in y[keep]], dtype=np.int64)
        _fit(x[keep], y_local, classes.size, config, args.hidden,
             f"{args.model}.{stage}.model", f"{args.model}.{stage}.history.txt")
    return 0


def _report_eval(y_true, y_pred, class_count) -> float:
    confusion = np.zeros((class_count, class_count), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        confusion[t, p] += 1
    for c in range(class_count):
        total = int(confusion[c].sum())
        correct = int(confusion[c, c])
        rate = correct / total if total else 0.0
        print(f"class {c}: {correct}/{total} = {rate:.6f}")
    print("confusion matrix (rows = true, cols = predicted):")
    for row in confusion:
        print(" ".join(str(int(v)) for v in row))
    correct = int(np.trace(confusion))
    total = int(confusion.sum())
    accuracy = correct / total
    print(f"overall accuracy: {correct}/{total} = {accuracy:.6f}")
    return accuracy


def cmd_eval(args) -> int:
    y = pio.read_labels(args.labels)
    if not args.two_stage:
        x, _ = pio.read_feature_matrix(args.features)
        if y.size != x.shape[0]:
            raise InputError(f"{args.labels}: {y.size} labels for {x.shape[0]} feature rows")
        model = load_model(args.model)
        if x.shape[1] != model.input_dim:
            raise InputError(
                f"{args.features}: {x.shape[1]} feature dims, model expects {model.input_dim}"
            )
        pred = forward(model, x).argmax(axis=1)
        _report_eval(y, pred, model.class_count)
        return 0

    means, multi = pio.read_partition(f"{args.features}.partition.txt")
    partition = StagePartition(means, multi)
    split = args.split
    x_gate, _ = pio.read_feature_matrix(f"{args.features}.gate.{split}.feat")
    x_one, _ = pio.read_feature_matrix(f"{args.features}.one.{split}.feat")
    x_multi, _ = pio.read_feature_matrix(f"{args.features}.multi.{split}.feat")
    if not (x_gate.shape[0] == x_one.shape[0] == x_multi.shape[0] == y.size):
        raise InputError("two-stage feature files and labels disagree on row count")
    gate = load_model(f"{args.model}.gate.model")
    one = load_model(f"{args.model}.one.model")
    multi_model = load_model(f"{args.model}.multi.model")
    gate_pred = forward(gate, x_gate).argmax(axis=1)
    pred = np.empty(y.size, dtype=np.int64)
    for i in range(y.size):
        if gate_pred[i] == 0:
            local = int(forward(one, x_one[i]).argmax())
            pred[i] = int(partition.one_body_classes[local])
        else:
            local = int(forward(multi_model, x_multi[i]).argmax())
            pred[i] = int(partition.multi_body_classes[local])
    _report_eval(y, pred, means.size)
    return 0


def cmd_predict(args) -> int:
    descriptor = pio.read_descriptor(args.descriptor)
    if args.config:
        config, options = pio.read_feature_config(args.config)
    else:
        config, options = FeatureConfig(), pio.ExtractionOptions()
    clip = pio.read_clip_file(args.clip, descriptor)

    if not args.two_stage:
        model = load_model(args.model)
        scaler = pio.read_scaler(args.scaler)
        x = extract_body_features(clip, options.bodies, config, descriptor)
        probs = forward(model, apply_scaler(scaler, x))
        label = int(probs.argmax())
        prob = float(probs[label])
    else:
        means, multi = pio.read_partition(f"{args.scaler}.partition.txt")
        model = TwoStageModel(
            gate=load_model(f"{args.model}.gate.model"),
            one_body=load_model(f"{args.model}.one.model"),
            multi_body=load_model(f"{args.model}.multi.model"),
            partition=StagePartition(means, multi),
            gate_scaler=pio.read_scaler(f"{args.scaler}.gate.scaler.feat"),
            one_scaler=pio.read_scaler(f"{args.scaler}.one.scaler.feat"),
            multi_scaler=pio.read_scaler(f"{args.scaler}.multi.scaler.feat"),
        )
        label, prob = two_stage_predict(model, clip, config, descriptor)

    if label < len(descriptor.class_names):
        name = descriptor.class_names[label]
    else:
        name = str(label)
    print(f"{name} {prob:.6f}")
    return 0


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise InputError(f"--repeats must be >= 1, got {args.repeats}")
    if args.points < 1:
        raise InputError(f"--points must be >= 1, got {args.points}")
    rng = np.random.default_rng(args.seed)
    path = rng.standard_normal((args.points, args.dim))
    times = []
    for _ in range(args.repeats):
        start = time.perf_counter()
        path_signature(path, args.level)
        times.append(time.perf_counter() - start)
    count = signature_dimension(args.dim, args.level)
    print(f"dimension {args.dim}, level {args.level}, {args.points} points")
    print(f"coefficients: {count:,}")
    print(f"time over {args.repeats} run(s): min {min(times):.3f}s "
          f"mean {sum(times) / len(times):.3f}s max {max(times):.3f}s")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
