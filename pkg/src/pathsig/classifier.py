"""Single-hidden-layer linear network with dropconnect, trained by SGD.

The model is softmax(W2.T @ h + b2) with h = W1.T @ x + b1 and an identity
hidden activation, so at inference the whole network collapses to one
affine map.  The hidden layer earns its keep during training: dropconnect
zeroes a random subset of W1's entries on every mini-batch (Bernoulli keep
probability 1 - drop_rate), which regularizes the very wide input layer.
At inference W1 is scaled by (1 - drop_rate), the expected value of the
training-time mask.

Training minimizes softmax cross-entropy by mini-batch gradient descent
with classical momentum (v <- mu*v - lr*grad; param += v) under an
exponentially decaying learning rate lr(t) = lr0 * exp(-decay * t), t
counting completed epochs.  Everything random (init, shuffling, masks)
flows from the seed in TrainConfig, so a given (data, config) pair always
produces the same model bit for bit.

The two-stage composition routes a clip through a binary body-count gate
and then one of two class models, for datasets that mix single-actor and
two-actor action classes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError, InputError
from .skeleton import (
    DatasetDescriptor,
    FeatureConfig,
    FeatureScaler,
    SkeletonClip,
    apply_scaler,
    assemble_features,
    fill_clip,
    merge_actors,
    normalize_clip,
)

__all__ = [
    "HIDDEN_UNITS",
    "TrainConfig",
    "LinearNetModel",
    "EpochStats",
    "StagePartition",
    "TwoStageModel",
    "init_model",
    "forward",
    "lr_schedule",
    "train",
    "gradient_check",
    "rank_actors",
    "stage_partition",
    "extract_body_features",
    "two_stage_predict",
    "save_model",
    "load_model",
]

HIDDEN_UNITS = 64

_MODEL_MAGIC = b"SIGNET1"
_MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer hyperparameters; defaults are the reference values."""

    batch_size: int = 30
    momentum: float = 0.7
    learning_rate: float = 0.01
    decay: float = 0.005
    max_epochs: int = 200
    drop_rate: float = 0.95
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise InputError(f"batch size must be >= 1, got {self.batch_size}")
        if not 0.0 <= self.momentum < 1.0:
            raise InputError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.learning_rate <= 0:
            raise InputError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.decay < 0:
            raise InputError(f"decay must be >= 0, got {self.decay}")
        if self.max_epochs < 1:
            raise InputError(f"max epochs must be >= 1, got {self.max_epochs}")
        if not 0.0 <= self.drop_rate < 1.0:
            raise InputError(f"drop rate must be in [0, 1), got {self.drop_rate}")


@dataclass
class LinearNetModel:
    """Weights of the network plus the config it was built with."""

    w1: np.ndarray  # (D, H)
    b1: np.ndarray  # (H,)
    w2: np.ndarray  # (H, C)
    b2: np.ndarray  # (C,)
    config: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=np.float64)
        self.b1 = np.asarray(self.b1, dtype=np.float64)
        self.w2 = np.asarray(self.w2, dtype=np.float64)
        self.b2 = np.asarray(self.b2, dtype=np.float64)
        D, H = self.w1.shape if self.w1.ndim == 2 else (0, 0)
        if self.w1.ndim != 2 or self.w2.ndim != 2 or self.w2.shape[0] != H:
            raise InputError(
                f"inconsistent weight shapes: w1 {self.w1.shape}, w2 {self.w2.shape}"
            )
        C = self.w2.shape[1]
        if self.b1.shape != (H,) or self.b2.shape != (C,):
            raise InputError(
                f"inconsistent bias shapes: b1 {self.b1.shape} (want ({H},)), "
                f"b2 {self.b2.shape} (want ({C},))"
            )
        for name, arr in (("w1", self.w1), ("b1", self.b1), ("w2", self.w2), ("b2", self.b2)):
            if not np.all(np.isfinite(arr)):
                raise InputError(f"{name} contains non-finite values")

    @property
    def input_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[1]

    @property
    def class_count(self) -> int:
        return self.w2.shape[1]


@dataclass(frozen=True)
class EpochStats:
    """One training epoch: learning rate, mean loss, training accuracy."""

    epoch: int
    lr: float
    loss: float
    accuracy: float


def init_model(
    input_dim: int,
    class_count: int,
    config: TrainConfig | None = None,
    hidden_dim: int = HIDDEN_UNITS,
) -> LinearNetModel:
    """Fresh model with seeded Gaussian weights (std 1/sqrt(fan-in)), zero biases."""
    config = config or TrainConfig()
    input_dim = int(input_dim)
    class_count = int(class_count)
    hidden_dim = int(hidden_dim)
    if input_dim < 1 or class_count < 2 or hidden_dim < 1:
        raise InputError(
            f"need input_dim >= 1, class_count >= 2, hidden_dim >= 1; "
            f"got {input_dim}, {class_count}, {hidden_dim}"
        )
    rng = np.random.default_rng([config.seed, 0])
    w1 = rng.standard_normal((input_dim, hidden_dim)) / np.sqrt(input_dim)
    w2 = rng.standard_normal((hidden_dim, class_count)) / np.sqrt(hidden_dim)
    return LinearNetModel(w1, np.zeros(hidden_dim), w2, np.zeros(class_count), config)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def forward(model: LinearNetModel, x, training_mask: np.ndarray | None = None) -> np.ndarray:
    """Class probabilities for one input vector or a batch of rows.

    With ``training_mask`` (0/1 array shaped like w1) the hidden layer
    uses the masked weights; without it, w1 is scaled by the expected mask
    value 1 - drop_rate.  Rows sum to 1.
    """
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != model.input_dim:
        raise InputError(
            f"input has shape {np.shape(x)}, model expects dimension {model.input_dim}"
        )
    if training_mask is not None:
        if training_mask.shape != model.w1.shape:
            raise InputError(
                f"mask shape {training_mask.shape} does not match w1 {model.w1.shape}"
            )
        w1 = model.w1 * training_mask
    else:
        w1 = (1.0 - model.config.drop_rate) * model.w1
    h = arr @ w1 + model.b1
    probs = _softmax(h @ model.w2 + model.b2)
    return probs[0] if single else probs


def lr_schedule(epoch: int, config: TrainConfig) -> float:
    """Learning rate after ``epoch`` completed epochs: lr0 * exp(-decay*epoch)."""
    if epoch < 0:
        raise InputError(f"epoch index must be >= 0, got {epoch}")
    return config.learning_rate * float(np.exp(-config.decay * epoch))


def _loss_and_grads(model: LinearNetModel, x: np.ndarray, labels: np.ndarray, w1_eff: np.ndarray):
    """Cross-entropy loss summed over the batch, plus gradients.

    ``w1_eff`` is the effective first-layer weight (masked or scaled);
    the returned g_w1 is the gradient w.r.t. w1_eff, which the caller
    projects back (mask multiply, or (1-p) scale) as appropriate.
    """
    B = x.shape[0]
    h = x @ w1_eff + model.b1
    logits = h @ model.w2 + model.b2
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    loss = -log_probs[np.arange(B), labels].sum()
    probs = np.exp(log_probs)
    g_logits = probs.copy()
    g_logits[np.arange(B), labels] -= 1.0
    g_w2 = h.T @ g_logits
    g_b2 = g_logits.sum(axis=0)
    g_h = g_logits @ model.w2.T
    g_w1 = x.T @ g_h
    g_b1 = g_h.sum(axis=0)
    return loss, probs, g_w1, g_b1, g_w2, g_b2


def train(model: LinearNetModel, features, labels, config: TrainConfig | None = None) -> list[EpochStats]:
    """Fit the model in place; returns per-epoch loss/accuracy history.

    Mini-batches are drawn from a fresh seeded shuffle each epoch; every
    batch gets its own dropconnect mask over w1.  Loss and accuracy are
    accumulated from the same masked forward passes the updates use.
    Deterministic: same model, data, and config give bit-identical
    results.
    """
    config = config or model.config
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] < 1:
        raise InputError(f"features must be a non-empty (rows, dims) matrix, got shape {x.shape}")
    if y.shape != (x.shape[0],):
        raise InputError(f"labels shape {y.shape} does not match {x.shape[0]} rows")
    if not np.issubdtype(y.dtype, np.integer):
        y = y.astype(np.int64)
    if y.min() < 0 or y.max() >= model.class_count:
        raise InputError(
            f"labels must lie in 0..{model.class_count - 1}, got range "
            f"[{y.min()}, {y.max()}]"
        )
    if x.shape[1] != model.input_dim:
        raise InputError(f"features have {x.shape[1]} dims, model expects {model.input_dim}")

    n = x.shape[0]
    keep = 1.0 - config.drop_rate
    rng = np.random.default_rng([config.seed, 1])
    v_w1 = np.zeros_like(model.w1)
    v_b1 = np.zeros_like(model.b1)
    v_w2 = np.zeros_like(model.w2)
    v_b2 = np.zeros_like(model.b2)
    # scratch reused across batches: the mask and the masked weights
    mask_u = np.empty_like(model.w1)
    mask = np.empty(model.w1.shape, dtype=bool)
    w1_eff = np.empty_like(model.w1)

    history = []
    for epoch in range(config.max_epochs):
        lr = lr_schedule(epoch, config)
        order = rng.permutation(n)
        loss_sum = 0.0
        correct = 0
        for start in range(0, n, config.batch_size):
            batch = order[start:start + config.batch_size]
            xb, yb = x[batch], y[batch]
            if config.drop_rate > 0.0:
                rng.random(out=mask_u)
                np.less(mask_u, keep, out=mask)
                np.multiply(model.w1, mask, out=w1_eff)
            else:
                w1_eff[:] = model.w1
            loss, probs, g_w1, g_b1, g_w2, g_b2 = _loss_and_grads(model, xb, yb, w1_eff)
            loss_sum += loss
            correct += int((probs.argmax(axis=1) == yb).sum())
            if config.drop_rate > 0.0:
                np.multiply(g_w1, mask, out=g_w1)
            v_w1 *= config.momentum
            v_w1 -= lr * g_w1
            model.w1 += v_w1
            v_b1 *= config.momentum
            v_b1 -= lr * g_b1
            model.b1 += v_b1
            v_w2 *= config.momentum
            v_w2 -= lr * g_w2
            model.w2 += v_w2
            v_b2 *= config.momentum
            v_b2 -= lr * g_b2
            model.b2 += v_b2
        history.append(EpochStats(epoch, lr, loss_sum / n, correct / n))
    return history


def gradient_check(model: LinearNetModel, x, label: int, step: float = 1e-5) -> float:
    """Max relative error of analytic vs central finite-difference gradients.

    Evaluates the inference-mode loss (w1 scaled by 1 - drop_rate) on a
    single sample.  Relative error per entry is
    |analytic - numeric| / max(|analytic|, |numeric|, 1e-3); the floor
    keeps finite-difference noise on near-zero entries from dominating.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.size != model.input_dim:
        raise InputError(f"x must be a vector of dimension {model.input_dim}, got shape {x.shape}")
    label = int(label)
    if not 0 <= label < model.class_count:
        raise InputError(f"label {label} out of range for {model.class_count} classes")
    scale = 1.0 - model.config.drop_rate
    xb = x[None, :]
    yb = np.array([label])
    loss, _, g_w1_eff, g_b1, g_w2, g_b2 = _loss_and_grads(model, xb, yb, scale * model.w1)
    analytic = {
        "w1": scale * g_w1_eff,  # chain rule through the (1-p) scaling
        "b1": g_b1,
        "w2": g_w2,
        "b2": g_b2,
    }

    def loss_at(params):
        trial = LinearNetModel(params["w1"], params["b1"], params["w2"], params["b2"], model.config)
        l, *_ = _loss_and_grads(trial, xb, yb, scale * trial.w1)
        return l

    params = {"w1": model.w1.copy(), "b1": model.b1.copy(), "w2": model.w2.copy(), "b2": model.b2.copy()}
    worst = 0.0
    for name, arr in params.items():
        grad = analytic[name]
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + step
            plus = loss_at(params)
            arr[idx] = orig - step
            minus = loss_at(params)
            arr[idx] = orig
            numeric = (plus - minus) / (2 * step)
            a = grad[idx]
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-3)
            worst = max(worst, err)
    return worst


def rank_actors(clip: SkeletonClip) -> np.ndarray:
    """Actor indices ordered by total movement, most active first.

    Movement is the summed Euclidean displacement of every joint across
    consecutive frames, counting only steps where the joint is valid in
    both frames.  Ties keep the original actor order.
    """
    diffs = np.diff(clip.joints, axis=0)  # (F-1, A, N, d)
    both = clip.valid[:-1] & clip.valid[1:]  # (F-1, A, N)
    dist = np.linalg.norm(diffs, axis=-1) * both
    movement = dist.sum(axis=(0, 2)) if dist.size else np.zeros(clip.actor_count)
    return np.argsort(-movement, kind="stable")


@dataclass
class StagePartition:
    """Per-class mean actor counts and the derived one/multi-body split."""

    mean_actor_counts: np.ndarray  # (C,)
    multi_body: np.ndarray  # (C,) bool

    def __post_init__(self):
        self.mean_actor_counts = np.asarray(self.mean_actor_counts, dtype=np.float64)
        self.multi_body = np.asarray(self.multi_body, dtype=bool)
        if self.mean_actor_counts.shape != self.multi_body.shape or self.multi_body.ndim != 1:
            raise InputError("partition arrays must be 1-D and of equal length")

    @property
    def one_body_classes(self) -> np.ndarray:
        return np.flatnonzero(~self.multi_body)

    @property
    def multi_body_classes(self) -> np.ndarray:
        return np.flatnonzero(self.multi_body)


def stage_partition(labels, actor_counts, class_count: int) -> StagePartition:
    """Split classes by mean training actor count; multi-body iff mean > 1.5."""
    y = np.asarray(labels, dtype=np.int64)
    counts = np.asarray(actor_counts, dtype=np.float64)
    class_count = int(class_count)
    if y.shape != counts.shape or y.ndim != 1 or y.size < 1:
        raise InputError("labels and actor counts must be equal-length non-empty vectors")
    if y.min() < 0 or y.max() >= class_count:
        raise InputError(f"labels must lie in 0..{class_count - 1}")
    means = np.zeros(class_count)
    for c in range(class_count):
        sel = y == c
        if not sel.any():
            raise InputError(f"class {c} has no training clips")
        means[c] = counts[sel].mean()
    return StagePartition(means, means > 1.5)


@dataclass
class TwoStageModel:
    """Gate plus the two second-stage models and their scalers.

    The gate sees every clip as a rigid two-body skeleton and predicts
    one-body vs multi-body; the matching second-stage model then predicts
    the class among its own subset.  ``partition`` maps the subset-local
    outputs back to original class ids.
    """

    gate: LinearNetModel
    one_body: LinearNetModel
    multi_body: LinearNetModel
    partition: StagePartition
    gate_scaler: FeatureScaler
    one_scaler: FeatureScaler
    multi_scaler: FeatureScaler


def extract_body_features(
    clip: SkeletonClip,
    bodies: int,
    config: FeatureConfig,
    descriptor: DatasetDescriptor,
) -> np.ndarray:
    """Feature vector of the clip's top ``bodies`` actors as one rigid body.

    Actors are ranked by movement; missing body slots stay zero.  The
    merged clip is normalized (shared center and scale, preserving the
    actors' relative placement) and gap-filled before assembly.
    """
    if not clip.valid.any():
        raise InputError("clip has no valid joints in any frame")
    ranked = rank_actors(clip)
    merged = merge_actors(clip, ranked[:bodies], bodies)
    prepared = fill_clip(normalize_clip(merged))
    return assemble_features(prepared.joints[:, 0], config, descriptor.merged(bodies)).values


def two_stage_predict(
    model: TwoStageModel,
    clip: SkeletonClip,
    config: FeatureConfig,
    descriptor: DatasetDescriptor,
) -> tuple[int, float]:
    """Route a clip through the gate, then the matching class model.

    Returns (class id, probability) in the original class numbering.
    """
    two_body = extract_body_features(clip, 2, config, descriptor)
    gate_probs = forward(model.gate, apply_scaler(model.gate_scaler, two_body))
    if int(gate_probs.argmax()) == 0:
        one_body = extract_body_features(clip, 1, config, descriptor)
        probs = forward(model.one_body, apply_scaler(model.one_scaler, one_body))
        classes = model.partition.one_body_classes
    else:
        probs = forward(model.multi_body, apply_scaler(model.multi_scaler, two_body))
        classes = model.partition.multi_body_classes
    local = int(probs.argmax())
    return int(classes[local]), float(probs[local])


def save_model(model: LinearNetModel, path) -> None:
    """Write the model in the binary SIGNET1 layout (see load_model)."""
    config_text = "\n".join(
        f"{k} = {getattr(model.config, k)}"
        for k in ("batch_size", "momentum", "learning_rate", "decay", "max_epochs", "drop_rate", "seed")
    ).encode("ascii")
    with open(path, "wb") as f:
        f.write(_MODEL_MAGIC)
        f.write(struct.pack("<B", _MODEL_VERSION))
        f.write(struct.pack("<QQQ", model.input_dim, model.hidden_dim, model.class_count))
        for arr in (model.w1, model.b1, model.w2, model.b2):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        f.write(struct.pack("<Q", len(config_text)))
        f.write(config_text)


def _read_exact(f, count: int, path, what: str) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise FormatError(
            f"{path}: truncated while reading {what}: wanted {count} bytes at offset "
            f"{f.tell() - len(data)}, got {len(data)}"
        )
    return data


def load_model(path) -> LinearNetModel:
    """Read a SIGNET1 model file; the round-trip with save_model is bit-exact.

    Layout: magic ``SIGNET1``, a version byte, input/hidden/class counts
    as little-endian u64, then w1, b1, w2, b2 as row-major little-endian
    f64, then a u64-length-prefixed text block of training-config keys.
    """
    with open(path, "rb") as f:
        magic = _read_exact(f, len(_MODEL_MAGIC), path, "magic")
        if magic != _MODEL_MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}, expected {_MODEL_MAGIC!r}")
        version = struct.unpack("<B", _read_exact(f, 1, path, "version"))[0]
        if version != _MODEL_VERSION:
            raise FormatError(f"{path}: unsupported model version {version}")
        D, H, C = struct.unpack("<QQQ", _read_exact(f, 24, path, "dimensions"))
        arrays = []
        for name, shape in (("w1", (D, H)), ("b1", (H,)), ("w2", (H, C)), ("b2", (C,))):
            count = int(np.prod(shape))
            raw = _read_exact(f, count * 8, path, name)
            arrays.append(np.frombuffer(raw, dtype="<f8").reshape(shape).copy())
        text_len = struct.unpack("<Q", _read_exact(f, 8, path, "config length"))[0]
        text = _read_exact(f, text_len, path, "config text").decode("ascii")
        extra = f.read(1)
        if extra:
            raise FormatError(f"{path}: trailing bytes after config at offset {f.tell() - 1}")
    fields = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{path}: malformed config line {line!r}")
        key, _, value = line.partition("=")
        fields[key.strip()] = value.strip()
    try:
        config = TrainConfig(
            batch_size=int(fields["batch_size"]),
            momentum=float(fields["momentum"]),
            learning_rate=float(fields["learning_rate"]),
            decay=float(fields["decay"]),
            max_epochs=int(fields["max_epochs"]),
            drop_rate=float(fields["drop_rate"]),
            seed=int(fields["seed"]),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: config text is missing key {exc}") from exc
    except ValueError as exc:
        raise FormatError(f"{path}: config text has a malformed value: {exc}") from exc
    return LinearNetModel(*arrays, config)
