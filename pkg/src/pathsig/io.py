"""Readers and writers for the package's on-disk formats.

Text formats (paths, clips, manifests, descriptors, labels, key-value
config) are line-oriented, diffable, and tool-free to produce.  The
feature matrix format is binary for bulk float data:

    SIGFEAT1 <rows u64 LE> <cols u64 LE> <rows*cols f64 LE row-major>
    <text footer: one "name offset width" line per layout block>

Malformed input raises FormatError naming the file and the line number or
byte offset.  Every writer/reader pair round-trips bit-exactly.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, InputError
from .skeleton import Block, DatasetDescriptor, FeatureConfig, FeatureScaler, SkeletonClip

__all__ = [
    "ManifestRecord",
    "read_path_file",
    "read_clip_file",
    "write_clip_file",
    "read_manifest",
    "write_manifest",
    "read_descriptor",
    "write_descriptor",
    "read_feature_config",
    "write_feature_config",
    "ExtractionOptions",
    "read_feature_matrix",
    "write_feature_matrix",
    "read_labels",
    "write_labels",
    "read_scaler",
    "write_scaler",
    "read_partition",
    "write_partition",
]

_FEAT_MAGIC = b"SIGFEAT1"


def _data_lines(path):
    """Yield (line_number, stripped_text) skipping blanks and # comments."""
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            yield lineno, text


def read_path_file(path) -> np.ndarray:
    """Read a path: one sample per line, comma-separated coordinates.

    The dimension is inferred from the first data line; blank lines and
    ``#`` comments are ignored.
    """
    rows = []
    dim = None
    for lineno, text in _data_lines(path):
        fields = text.split(",")
        if dim is None:
            dim = len(fields)
        elif len(fields) != dim:
            raise FormatError(
                f"{path}:{lineno}: expected {dim} coordinates, got {len(fields)}"
            )
        try:
            rows.append([float(v) for v in fields])
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-numeric coordinate in {text!r}") from None
    if not rows:
        raise FormatError(f"{path}: no samples found")
    return np.array(rows)


def read_clip_file(path, descriptor: DatasetDescriptor, label: int | None = None,
                   min_actors: int = 1, clip_id: str = "") -> SkeletonClip:
    """Read a clip: rows of frame, actor, joint, then d coordinates.

    Indices are 0-based; entries absent from the file are marked invalid.
    Frame and actor counts come from the largest indices seen
    (``min_actors`` keeps room for actors that never appear).
    """
    d = descriptor.dim
    N = descriptor.joint_count
    entries = {}
    max_frame = -1
    max_actor = -1
    for lineno, text in _data_lines(path):
        fields = text.split(",")
        if len(fields) != 3 + d:
            raise FormatError(
                f"{path}:{lineno}: expected frame, actor, joint + {d} coordinates, "
                f"got {len(fields)} fields"
            )
        try:
            frame, actor, joint = (int(v) for v in fields[:3])
            coords = [float(v) for v in fields[3:]]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed row {text!r}") from None
        if frame < 0 or actor < 0 or joint < 0:
            raise FormatError(f"{path}:{lineno}: negative index in {text!r}")
        if joint >= N:
            raise FormatError(
                f"{path}:{lineno}: joint index {joint} out of range for {N} joints"
            )
        key = (frame, actor, joint)
        if key in entries:
            raise FormatError(f"{path}:{lineno}: duplicate entry for frame {frame}, "
                              f"actor {actor}, joint {joint}")
        entries[key] = coords
        max_frame = max(max_frame, frame)
        max_actor = max(max_actor, actor)
    if not entries:
        raise FormatError(f"{path}: no joint rows found")
    F = max_frame + 1
    A = max(max_actor + 1, int(min_actors))
    joints = np.zeros((F, A, N, d))
    valid = np.zeros((F, A, N), dtype=bool)
    for (frame, actor, joint), coords in entries.items():
        joints[frame, actor, joint] = coords
        valid[frame, actor, joint] = True
    return SkeletonClip(joints, valid, label=label, clip_id=clip_id or str(path))


def write_clip_file(clip: SkeletonClip, path) -> None:
    """Write a clip's valid entries, rows sorted by (frame, actor, joint)."""
    with open(path, "w", encoding="utf-8") as f:
        for frame in range(clip.frame_count):
            for actor in range(clip.actor_count):
                for joint in range(clip.joint_count):
                    if not clip.valid[frame, actor, joint]:
                        continue
                    coords = ",".join(f"{v:.17g}" for v in clip.joints[frame, actor, joint])
                    f.write(f"{frame},{actor},{joint},{coords}\n")


@dataclass(frozen=True)
class ManifestRecord:
    """One dataset entry: clip file, class name, split tag, actor count."""

    clip_path: str
    label_name: str
    split: str
    actor_count: int


def read_manifest(path) -> list[ManifestRecord]:
    """Read manifest rows: clip path, label name, split, actor count.

    Clip paths are resolved relative to the manifest's directory.
    """
    base = os.path.dirname(os.path.abspath(path))
    records = []
    for lineno, text in _data_lines(path):
        fields = [v.strip() for v in text.split(",")]
        if len(fields) != 4:
            raise FormatError(
                f"{path}:{lineno}: expected clip path, label, split, actor count; "
                f"got {len(fields)} fields"
            )
        clip_path, label_name, split, count_text = fields
        if split not in ("train", "test"):
            raise FormatError(f"{path}:{lineno}: split must be 'train' or 'test', got {split!r}")
        try:
            actor_count = int(count_text)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: malformed actor count {count_text!r}") from None
        if actor_count < 1:
            raise FormatError(f"{path}:{lineno}: actor count must be >= 1, got {actor_count}")
        if not os.path.isabs(clip_path):
            clip_path = os.path.join(base, clip_path)
        records.append(ManifestRecord(clip_path, label_name, split, actor_count))
    if not records:
        raise FormatError(f"{path}: empty manifest")
    return records


def write_manifest(records, path) -> None:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            rel = os.path.relpath(rec.clip_path, base)
            f.write(f"{rel},{rec.label_name},{rec.split},{rec.actor_count}\n")


def _read_key_values(path) -> dict[str, str]:
    fields = {}
    for lineno, text in _data_lines(path):
        if "=" not in text:
            raise FormatError(f"{path}:{lineno}: expected 'key = value', got {text!r}")
        key, _, value = text.partition("=")
        key = key.strip()
        if key in fields:
            raise FormatError(f"{path}:{lineno}: duplicate key {key!r}")
        fields[key] = value.strip()
    return fields


def _parse_int_list(value: str):
    value = value.strip()
    return [int(v) for v in value.split(",")] if value else []


def read_descriptor(path) -> DatasetDescriptor:
    """Read a skeleton descriptor key-value file.

    Required keys: joints, dims, classes.  Optional: priority, mirror
    (identity when omitted), horizontal_axis (0 when omitted).
    """
    fields = _read_key_values(path)
    try:
        joints = int(fields["joints"])
        dims = int(fields["dims"])
        classes = tuple(v.strip() for v in fields["classes"].split(",") if v.strip())
    except KeyError as exc:
        raise FormatError(f"{path}: missing required descriptor key {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"{path}: malformed descriptor value: {exc}") from exc
    try:
        priority = tuple(_parse_int_list(fields.get("priority", "")))
        mirror = tuple(_parse_int_list(fields.get("mirror", "")))
        axis = int(fields.get("horizontal_axis", "0"))
        return DatasetDescriptor(
            joint_count=joints, dim=dims, priority=priority, mirror=mirror,
            horizontal_axis=axis, class_names=classes,
        )
    except (ValueError, InputError) as exc:
        raise FormatError(f"{path}: invalid descriptor: {exc}") from exc


def write_descriptor(descriptor: DatasetDescriptor, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"joints = {descriptor.joint_count}\n")
        f.write(f"dims = {descriptor.dim}\n")
        f.write(f"priority = {','.join(map(str, descriptor.priority))}\n")
        f.write(f"mirror = {','.join(map(str, descriptor.mirror))}\n")
        f.write(f"horizontal_axis = {descriptor.horizontal_axis}\n")
        f.write(f"classes = {','.join(descriptor.class_names)}\n")


@dataclass(frozen=True)
class ExtractionOptions:
    """Dataset-pipeline knobs that ride alongside FeatureConfig.

    bodies: actors merged into the feature skeleton (ranked by movement).
    flip / noise_copies / noise_sigma: train-split augmentation.
    seed: augmentation noise seed.
    """

    bodies: int = 1
    flip: bool = True
    noise_copies: int = 2
    noise_sigma: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.bodies < 1:
            raise InputError(f"bodies must be >= 1, got {self.bodies}")
        if self.noise_copies < 0:
            raise InputError(f"noise_copies must be >= 0, got {self.noise_copies}")
        if self.noise_sigma < 0:
            raise InputError(f"noise_sigma must be >= 0, got {self.noise_sigma}")


_CONFIG_BOOL = {"true": True, "false": False, "1": True, "0": False}


def read_feature_config(path) -> tuple[FeatureConfig, ExtractionOptions]:
    """Read feature and extraction settings from a key-value file.

    Every key is optional; omitted keys keep their defaults.  Feature
    keys: sampled_frames, pair_level, triple_level, joint_level,
    evolution_level, lead_lag_dim, dyadic, dyadic_depth.  Extraction
    keys: bodies, flip, noise_copies, noise_sigma, seed.
    """
    fields = _read_key_values(path)
    known_int = {
        "sampled_frames", "pair_level", "triple_level", "joint_level",
        "evolution_level", "lead_lag_dim", "dyadic_depth",
        "bodies", "noise_copies", "seed",
    }
    feature_kwargs = {}
    option_kwargs = {}
    for key, value in fields.items():
        try:
            if key in ("dyadic", "flip"):
                parsed = _CONFIG_BOOL.get(value.lower())
                if parsed is None:
                    raise ValueError(f"expected true/false, got {value!r}")
            elif key in known_int:
                parsed = int(value)
            elif key == "noise_sigma":
                parsed = float(value)
            else:
                raise FormatError(f"{path}: unknown feature config key {key!r}")
        except ValueError as exc:
            raise FormatError(f"{path}: malformed value for {key!r}: {exc}") from None
        if key in ("bodies", "flip", "noise_copies", "noise_sigma", "seed"):
            option_kwargs[key] = parsed
        else:
            feature_kwargs[key] = parsed
    try:
        return FeatureConfig(**feature_kwargs), ExtractionOptions(**option_kwargs)
    except InputError as exc:
        raise FormatError(f"{path}: invalid feature config: {exc}") from exc


def write_feature_config(config: FeatureConfig, options: ExtractionOptions, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for key in ("sampled_frames", "pair_level", "triple_level", "joint_level",
                    "evolution_level", "lead_lag_dim", "dyadic", "dyadic_depth"):
            f.write(f"{key} = {str(getattr(config, key)).lower()}\n")
        for key in ("bodies", "flip", "noise_copies", "noise_sigma", "seed"):
            f.write(f"{key} = {str(getattr(options, key)).lower()}\n")


def write_feature_matrix(path, matrix: np.ndarray, layout=()) -> None:
    """Write a (rows, cols) float matrix in the SIGFEAT1 layout."""
    arr = np.ascontiguousarray(matrix, dtype="<f8")
    if arr.ndim != 2:
        raise InputError(f"feature matrix must be 2-D, got shape {arr.shape}")
    with open(path, "wb") as f:
        f.write(_FEAT_MAGIC)
        f.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        f.write(arr.tobytes())
        for block in layout:
            f.write(f"{block.name} {block.offset} {block.width}\n".encode("ascii"))


def read_feature_matrix(path) -> tuple[np.ndarray, tuple[Block, ...]]:
    """Read a SIGFEAT1 file; returns (matrix, layout blocks)."""
    with open(path, "rb") as f:
        magic = f.read(len(_FEAT_MAGIC))
        if magic != _FEAT_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {_FEAT_MAGIC!r}")
        header = f.read(16)
        if len(header) != 16:
            raise FormatError(f"{path}: truncated header at offset {8 + len(header)}")
        rows, cols = struct.unpack("<QQ", header)
        count = rows * cols
        raw = f.read(count * 8)
        if len(raw) != count * 8:
            raise FormatError(
                f"{path}: truncated data: wanted {count * 8} bytes at offset 24, "
                f"got {len(raw)}"
            )
        footer = f.read().decode("ascii")
    matrix = np.frombuffer(raw, dtype="<f8").reshape(rows, cols).copy()
    blocks = []
    for lineno, line in enumerate(footer.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise FormatError(f"{path}: malformed footer line {lineno}: {line!r}")
        try:
            blocks.append(Block(parts[0], int(parts[1]), int(parts[2])))
        except ValueError:
            raise FormatError(f"{path}: malformed footer line {lineno}: {line!r}") from None
    return matrix, tuple(blocks)


def read_labels(path) -> np.ndarray:
    """Read labels: one integer per line."""
    values = []
    for lineno, text in _data_lines(path):
        try:
            values.append(int(text))
        except ValueError:
            raise FormatError(f"{path}:{lineno}: expected an integer label, got {text!r}") from None
    if not values:
        raise FormatError(f"{path}: no labels found")
    return np.array(values, dtype=np.int64)


def write_labels(labels, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for v in labels:
            f.write(f"{int(v)}\n")


def write_scaler(scaler: FeatureScaler, path) -> None:
    """Persist a scaler as a single-row SIGFEAT1 matrix."""
    write_feature_matrix(path, scaler.scale[None, :], (Block("scale", 0, scaler.scale.size),))


def read_scaler(path) -> FeatureScaler:
    matrix, _ = read_feature_matrix(path)
    if matrix.shape[0] != 1:
        raise FormatError(f"{path}: scaler file must have exactly one row, got {matrix.shape[0]}")
    try:
        return FeatureScaler(matrix[0])
    except InputError as exc:
        raise FormatError(f"{path}: invalid scaler: {exc}") from exc


def write_partition(means, multi, path) -> None:
    """Persist the two-stage class split as a key-value file."""
    means = np.asarray(means, dtype=np.float64)
    multi = np.asarray(multi, dtype=bool)
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"classes = {means.size}\n")
        f.write(f"means = {','.join(f'{v:.17g}' for v in means)}\n")
        f.write(f"multi = {','.join(str(int(v)) for v in multi)}\n")


def read_partition(path):
    """Read the two-stage class split; returns (means, multi) arrays."""
    fields = _read_key_values(path)
    try:
        count = int(fields["classes"])
        means = np.array([float(v) for v in fields["means"].split(",")])
        multi = np.array([bool(int(v)) for v in fields["multi"].split(",")])
    except KeyError as exc:
        raise FormatError(f"{path}: missing partition key {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"{path}: malformed partition value: {exc}") from exc
    if means.shape != (count,) or multi.shape != (count,):
        raise FormatError(
            f"{path}: partition arrays must have length {count}, "
            f"got {means.size} means and {multi.size} flags"
        )
    return means, multi
