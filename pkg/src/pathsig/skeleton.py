"""Skeleton clips to fixed-length signature feature vectors.

The feature stack turns a variable-length clip of joint coordinates into
one dense vector with five kinds of blocks:

* joints: raw coordinates of one frame, width N*d.
* pair_sig: per frame, the signature of every ordered joint pair treated
  as a 2-point path, truncated at ``pair_level``.
* triple_sig: per frame, the signature of every ordered joint triple as a
  3-point path, truncated at ``triple_level``.
* joint_motion_sig: per joint, the signature of its time-augmented
  trajectory over all frames, truncated at ``joint_level``.
* spatial_evolution_sig: per scalar dimension of the per-frame pair and
  triple signature blocks, the signature of its lead-lag lifted evolution
  over all frames, truncated at ``evolution_level``.

The three spatial blocks enter the final vector once per sampled frame
(``sampled_frames`` frames chosen by ``uniform_sample``); the two temporal
blocks always see every frame, so the output width does not depend on clip
length.  With ``dyadic`` enabled, each temporal signature is replaced by
the concatenation of signatures over ``dyadic_windows``, multiplying the
temporal widths by 2**depth - 1.

Everything here is a pure function of its inputs; augmentation noise is
drawn from an explicitly seeded generator.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError
from .signature import path_signature_batch, signature_dimension
from .transforms import dyadic_windows, fill_missing, uniform_sample

__all__ = [
    "SkeletonClip",
    "DatasetDescriptor",
    "FeatureConfig",
    "Block",
    "FeatureVector",
    "FeatureScaler",
    "normalize_clip",
    "horizontal_flip",
    "add_gaussian_noise",
    "augment_clips",
    "enumerate_pathlets",
    "spatial_features",
    "temporal_joint_features",
    "temporal_spatial_features",
    "assemble_features",
    "feature_layout",
    "fit_scaler",
    "apply_scaler",
    "merge_actors",
    "fill_clip",
]


@dataclass
class SkeletonClip:
    """One recorded clip: joint coordinates plus a validity mask.

    joints has shape (frames, actors, joints, dim); valid has shape
    (frames, actors, joints) and is False wherever a joint was not
    observed.  Coordinates at invalid entries are placeholders and must be
    ignored (or filled) before feature extraction.
    """

    joints: np.ndarray
    valid: np.ndarray
    label: int | None = None
    clip_id: str = ""

    def __post_init__(self):
        self.joints = np.asarray(self.joints, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.joints.ndim != 4:
            raise InputError(
                f"joints must have shape (frames, actors, joints, dim), got {self.joints.shape}"
            )
        F, A, N, d = self.joints.shape
        if F < 1 or A < 1:
            raise InputError(f"clip needs at least one frame and one actor, got {self.joints.shape}")
        if N < 2:
            raise InputError(f"clip needs at least two joints, got {N}")
        if d not in (2, 3):
            raise InputError(f"coordinate dimension must be 2 or 3, got {d}")
        if self.valid.shape != (F, A, N):
            raise InputError(
                f"validity mask shape {self.valid.shape} does not match joints {(F, A, N)}"
            )
        if not np.all(np.isfinite(self.joints)):
            raise InputError("joint coordinates contain non-finite values")

    @property
    def frame_count(self) -> int:
        return self.joints.shape[0]

    @property
    def actor_count(self) -> int:
        return self.joints.shape[1]

    @property
    def joint_count(self) -> int:
        return self.joints.shape[2]

    @property
    def dim(self) -> int:
        return self.joints.shape[3]


@dataclass(frozen=True)
class DatasetDescriptor:
    """Static facts about a skeleton layout.

    priority fixes the joint order used when enumerating pathlets (first
    entry = most important joint).  mirror maps each joint to its
    left/right counterpart (an involution); horizontal_axis is the
    coordinate negated by a horizontal flip.
    """

    joint_count: int
    dim: int
    priority: tuple[int, ...] = ()
    mirror: tuple[int, ...] = ()
    horizontal_axis: int = 0
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        N = int(self.joint_count)
        if N < 2:
            raise InputError(f"descriptor needs at least two joints, got {N}")
        if self.dim not in (2, 3):
            raise InputError(f"descriptor dimension must be 2 or 3, got {self.dim}")
        priority = tuple(int(i) for i in self.priority) or tuple(range(N))
        mirror = tuple(int(i) for i in self.mirror) or tuple(range(N))
        object.__setattr__(self, "priority", priority)
        object.__setattr__(self, "mirror", mirror)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if sorted(priority) != list(range(N)):
            raise InputError(f"priority must be a permutation of 0..{N - 1}")
        if sorted(mirror) != list(range(N)):
            raise InputError(f"mirror must be a permutation of 0..{N - 1}")
        if any(mirror[mirror[i]] != i for i in range(N)):
            raise InputError("mirror map must be an involution")
        if not 0 <= self.horizontal_axis < self.dim:
            raise InputError(
                f"horizontal axis {self.horizontal_axis} out of range for dim {self.dim}"
            )

    def merged(self, bodies: int) -> "DatasetDescriptor":
        """Descriptor for ``bodies`` skeletons treated as one rigid body.

        Joint blocks are stacked; priority runs through body 0's joints
        first, and the mirror map acts within each body.
        """
        bodies = int(bodies)
        if bodies < 1:
            raise InputError(f"body count must be >= 1, got {bodies}")
        if bodies == 1:
            return self
        N = self.joint_count
        priority = tuple(b * N + p for b in range(bodies) for p in self.priority)
        mirror = tuple(b * N + self.mirror[i] for b in range(bodies) for i in range(N))
        return DatasetDescriptor(
            joint_count=N * bodies,
            dim=self.dim,
            priority=priority,
            mirror=mirror,
            horizontal_axis=self.horizontal_axis,
            class_names=self.class_names,
        )


@dataclass(frozen=True)
class FeatureConfig:
    """Knobs of the feature stack; defaults match the reference setup."""

    sampled_frames: int = 10
    pair_level: int = 2
    triple_level: int = 4
    joint_level: int = 5
    evolution_level: int = 2
    lead_lag_dim: int = 3
    dyadic: bool = False
    dyadic_depth: int = 3

    def __post_init__(self):
        for name in (
            "sampled_frames",
            "pair_level",
            "triple_level",
            "joint_level",
            "evolution_level",
            "lead_lag_dim",
            "dyadic_depth",
        ):
            if int(getattr(self, name)) < 1:
                raise InputError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass(frozen=True)
class Block:
    """One named span of a feature vector."""

    name: str
    offset: int
    width: int


@dataclass
class FeatureVector:
    """A dense feature vector plus the layout of its blocks."""

    values: np.ndarray
    layout: tuple[Block, ...]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.layout = tuple(self.layout)
        expected = 0
        for block in self.layout:
            if block.offset != expected:
                raise InputError(f"block {block.name} at offset {block.offset}, expected {expected}")
            expected += block.width
        if self.values.shape != (expected,):
            raise InputError(
                f"values shape {self.values.shape} does not match layout total {expected}"
            )

    @property
    def dimension(self) -> int:
        return self.values.size

    def blocks(self, name: str) -> list[Block]:
        return [b for b in self.layout if b.name == name]

    def block_width(self, name: str) -> int:
        return sum(b.width for b in self.layout if b.name == name)


@dataclass
class FeatureScaler:
    """Per-dimension max-abs scale learned on the training set."""

    scale: np.ndarray

    def __post_init__(self):
        self.scale = np.asarray(self.scale, dtype=np.float64)
        if self.scale.ndim != 1 or self.scale.size < 1:
            raise InputError(f"scale must be a non-empty 1-D array, got shape {self.scale.shape}")
        if not np.all(self.scale > 0):
            raise InputError("scale entries must be positive")


def normalize_clip(clip: SkeletonClip) -> SkeletonClip:
    """Center each actor and scale the whole clip uniformly into [-1, 1].

    Per actor, the mean position of all valid joints over all frames is
    subtracted; then every coordinate is divided by the single clip-level
    maximum absolute value among valid entries.  The uniform scale
    preserves the skeleton's aspect ratio and relative actor placement.
    An all-zero clip comes back unchanged (scale guard of 1).
    """
    joints = clip.joints.copy()
    valid = clip.valid
    for a in range(clip.actor_count):
        mask = valid[:, a, :]
        if not mask.any():
            continue
        center = joints[:, a][mask].mean(axis=0)
        joints[:, a] -= center
    if valid.any():
        scale = float(np.max(np.abs(joints[valid])))
    else:
        scale = 0.0
    if scale == 0.0:
        scale = 1.0
    joints /= scale
    return replace(clip, joints=joints)


def horizontal_flip(clip: SkeletonClip, descriptor: DatasetDescriptor) -> SkeletonClip:
    """Mirror the clip: negate the horizontal coordinate, swap mirrored joints."""
    if clip.joint_count != descriptor.joint_count or clip.dim != descriptor.dim:
        raise InputError(
            f"clip layout ({clip.joint_count} joints, dim {clip.dim}) does not match "
            f"descriptor ({descriptor.joint_count} joints, dim {descriptor.dim})"
        )
    mirror = np.asarray(descriptor.mirror, dtype=np.intp)
    joints = clip.joints.copy()
    joints[..., descriptor.horizontal_axis] *= -1.0
    joints = joints[:, :, mirror, :]
    valid = clip.valid[:, :, mirror]
    return replace(clip, joints=joints, valid=valid)


def add_gaussian_noise(clip: SkeletonClip, sigma: float = 0.01, seed=0) -> SkeletonClip:
    """Add zero-mean Gaussian noise to every valid coordinate, seeded."""
    sigma = float(sigma)
    if sigma < 0:
        raise InputError(f"noise sigma must be >= 0, got {sigma}")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, clip.joints.shape)
    joints = clip.joints + noise * clip.valid[..., None]
    return replace(clip, joints=joints)


def augment_clips(
    clip: SkeletonClip,
    descriptor: DatasetDescriptor,
    flip: bool = True,
    noise_copies: int = 2,
    noise_sigma: float = 0.01,
    seed=0,
) -> list[SkeletonClip]:
    """Training-set expansion: the clip, its flip, and seeded noisy copies.

    Noisy copies are drawn from the unflipped clip; each copy gets its own
    derived seed so the whole list is reproducible from ``seed``.
    """
    if noise_copies < 0:
        raise InputError(f"noise copy count must be >= 0, got {noise_copies}")
    out = [clip]
    if flip:
        out.append(horizontal_flip(clip, descriptor))
    for i in range(noise_copies):
        out.append(add_gaussian_noise(clip, noise_sigma, seed=[seed, i]))
    return out


def enumerate_pathlets(joint_count: int, size: int, priority=None) -> list[tuple[int, ...]]:
    """All joint pairs or triples, ordered by a fixed joint priority.

    Tuples are internally ordered by priority rank and enumerated
    lexicographically in that rank, so each unordered set of joints yields
    exactly one ordered pathlet.
    """
    joint_count = int(joint_count)
    if joint_count < 2:
        raise InputError(f"need at least two joints, got {joint_count}")
    if size not in (2, 3):
        raise InputError(f"pathlet size must be 2 or 3, got {size}")
    if priority is None:
        order = tuple(range(joint_count))
    else:
        order = tuple(int(i) for i in priority)
        if sorted(order) != list(range(joint_count)):
            raise InputError(f"priority must be a permutation of 0..{joint_count - 1}")
    return list(itertools.combinations(order, size))


def _frame_spatial_blocks(frames: np.ndarray, config: FeatureConfig, descriptor: DatasetDescriptor):
    """Spatial blocks for every frame of one actor.

    frames: (F, N, d).  Returns (joints (F, N*d), pair (F, Wp),
    triple (F, Wt)); the pathlet signatures for all frames are computed in
    one batched call per pathlet size.
    """
    F, N, d = frames.shape
    pairs = np.array(enumerate_pathlets(N, 2, descriptor.priority), dtype=np.intp)
    triples = np.array(enumerate_pathlets(N, 3, descriptor.priority), dtype=np.intp)
    sj = frames.reshape(F, N * d)
    pair_paths = frames[:, pairs, :].reshape(F * len(pairs), 2, d)
    pair = path_signature_batch(pair_paths, config.pair_level).reshape(F, -1)
    triple_paths = frames[:, triples, :].reshape(F * len(triples), 3, d)
    triple = path_signature_batch(triple_paths, config.triple_level).reshape(F, -1)
    return sj, pair, triple


def spatial_features(frame_joints, config: FeatureConfig, descriptor: DatasetDescriptor) -> np.ndarray:
    """Spatial blocks of a single frame: raw joints, pair and triple signatures."""
    arr = np.asarray(frame_joints, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None, ...]
    frames = _check_actor_array(arr, descriptor)
    if frames.shape[0] != 1:
        raise InputError(f"spatial_features expects one frame, got {frames.shape[0]}")
    sj, pair, triple = _frame_spatial_blocks(frames, config, descriptor)
    return np.concatenate([sj[0], pair[0], triple[0]])


def _windowed_batch_signature(paths: np.ndarray, level: int, config: FeatureConfig) -> np.ndarray:
    """Batch signatures, whole-interval or concatenated over dyadic windows.

    paths: (B, F, dim).  Returns (B, w) with w multiplied by 2**depth - 1
    when dyadic windowing is on.  Window blocks are ordered as
    dyadic_windows yields them (coarse to fine).
    """
    if not config.dyadic:
        return path_signature_batch(paths, level)
    windows = dyadic_windows(paths.shape[1], config.dyadic_depth)
    parts = [path_signature_batch(paths[:, w.start:w.end + 1, :], level) for w in windows]
    return np.concatenate(parts, axis=1)


def temporal_joint_features(actor_joints, config: FeatureConfig) -> np.ndarray:
    """Per-joint motion signatures over all frames (time-augmented).

    actor_joints: (F, N, d).  Each joint's trajectory gets a [0, 1] time
    coordinate appended and is signed at ``joint_level``; blocks are
    concatenated joint by joint.  A single-frame clip yields zeros.
    """
    arr = np.asarray(actor_joints, dtype=np.float64)
    if arr.ndim != 3:
        raise InputError(f"actor joints must have shape (frames, joints, dim), got {arr.shape}")
    F, N, d = arr.shape
    paths = arr.transpose(1, 0, 2)  # (N, F, d)
    t = np.linspace(0.0, 1.0, F) if F > 1 else np.zeros(1)
    aug = np.concatenate([paths, np.broadcast_to(t, (N, F))[..., None]], axis=2)
    return _windowed_batch_signature(aug, config.joint_level, config).reshape(-1)


def temporal_spatial_features(
    actor_joints,
    config: FeatureConfig,
    descriptor: DatasetDescriptor,
    spatial_psf: np.ndarray | None = None,
) -> np.ndarray:
    """Evolution signatures of every pair/triple signature dimension.

    The per-frame pair and triple blocks (raw joints excluded) are
    computed for all frames, each scalar dimension's evolution is lifted
    by lead-lag to ``lead_lag_dim`` and signed at ``evolution_level``.
    ``spatial_psf`` may pass in the precomputed (F, D_S) block to avoid
    recomputation; blocks are concatenated dimension by dimension.
    """
    frames = _check_actor_array(actor_joints, descriptor)
    if spatial_psf is None:
        _, pair, triple = _frame_spatial_blocks(frames, config, descriptor)
        spatial_psf = np.concatenate([pair, triple], axis=1)
    F = frames.shape[0]
    if spatial_psf.shape[0] != F:
        raise InputError(
            f"spatial block has {spatial_psf.shape[0]} frames, expected {F}"
        )
    series = np.ascontiguousarray(spatial_psf.T)  # (D_S, F)
    k = config.lead_lag_dim
    lifted = np.zeros((series.shape[0], F, k))
    for j in range(k):
        lifted[:, j:, j] = series[:, : F - j]
    return _windowed_batch_signature(lifted, config.evolution_level, config).reshape(-1)


def feature_layout(config: FeatureConfig, descriptor: DatasetDescriptor) -> tuple[Block, ...]:
    """The block layout assemble_features will produce, from dimensions alone."""
    N, d = descriptor.joint_count, descriptor.dim
    pair_w = _comb2(N) * signature_dimension(d, config.pair_level)
    triple_w = _comb3(N) * signature_dimension(d, config.triple_level)
    joint_w = N * signature_dimension(d + 1, config.joint_level)
    evo_w = (pair_w + triple_w) * signature_dimension(config.lead_lag_dim, config.evolution_level)
    if config.dyadic:
        factor = 2 ** config.dyadic_depth - 1
        joint_w *= factor
        evo_w *= factor
    blocks = []
    offset = 0
    for _ in range(config.sampled_frames):
        for name, width in (("joints", N * d), ("pair_sig", pair_w), ("triple_sig", triple_w)):
            blocks.append(Block(name, offset, width))
            offset += width
    blocks.append(Block("joint_motion_sig", offset, joint_w))
    offset += joint_w
    blocks.append(Block("spatial_evolution_sig", offset, evo_w))
    return tuple(blocks)


def assemble_features(actor_joints, config: FeatureConfig, descriptor: DatasetDescriptor) -> FeatureVector:
    """Full feature vector of one actor's (frames, joints, dim) trajectory.

    Concatenates, in order: the three spatial blocks for each of the
    ``sampled_frames`` uniformly sampled frames, then the joint-motion
    block, then the spatial-evolution block.  The output width depends
    only on the configuration and descriptor, never on the frame count
    (dyadic windowing fixes its window count up front).
    """
    frames = _check_actor_array(actor_joints, descriptor)
    F = frames.shape[0]
    sj, pair, triple = _frame_spatial_blocks(frames, config, descriptor)
    spatial_psf = np.concatenate([pair, triple], axis=1)
    sample = uniform_sample(F, config.sampled_frames)
    parts = []
    for i in sample:
        parts.extend([sj[i], pair[i], triple[i]])
    parts.append(temporal_joint_features(frames, config))
    parts.append(temporal_spatial_features(frames, config, descriptor, spatial_psf))
    values = np.concatenate(parts)
    return FeatureVector(values, feature_layout(config, descriptor))


def fit_scaler(features: np.ndarray) -> FeatureScaler:
    """Per-dimension max-abs over training rows; all-zero dimensions get 1."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise InputError(f"scaler needs a non-empty (rows, dims) matrix, got shape {arr.shape}")
    scale = np.max(np.abs(arr), axis=0)
    scale[scale == 0.0] = 1.0
    return FeatureScaler(scale)


def apply_scaler(scaler: FeatureScaler, features: np.ndarray) -> np.ndarray:
    """Divide features (vector or matrix rows) element-wise by the scale."""
    arr = np.asarray(features, dtype=np.float64)
    if arr.shape[-1] != scaler.scale.size:
        raise InputError(
            f"features have {arr.shape[-1]} dimensions, scaler expects {scaler.scale.size}"
        )
    return arr / scaler.scale


def merge_actors(clip: SkeletonClip, actor_indices, bodies: int) -> SkeletonClip:
    """Stack up to ``bodies`` selected actors into one rigid multi-body actor.

    The result has one actor with bodies*N joints.  Slots without a
    selected actor stay zero-filled and invalid, so downstream gap filling
    zeroes them out.
    """
    bodies = int(bodies)
    if bodies < 1:
        raise InputError(f"body count must be >= 1, got {bodies}")
    indices = [int(a) for a in actor_indices][:bodies]
    if any(not 0 <= a < clip.actor_count for a in indices):
        raise InputError(f"actor index out of range for {clip.actor_count} actors: {indices}")
    F, _, N, d = clip.joints.shape
    joints = np.zeros((F, 1, bodies * N, d))
    valid = np.zeros((F, 1, bodies * N), dtype=bool)
    for slot, a in enumerate(indices):
        joints[:, 0, slot * N:(slot + 1) * N] = clip.joints[:, a]
        valid[:, 0, slot * N:(slot + 1) * N] = clip.valid[:, a]
    return SkeletonClip(joints, valid, label=clip.label, clip_id=clip.clip_id)


def fill_clip(clip: SkeletonClip) -> SkeletonClip:
    """Interpolate every joint's gaps over time; the result is fully valid."""
    joints = clip.joints.copy()
    for a in range(clip.actor_count):
        for j in range(clip.joint_count):
            mask = clip.valid[:, a, j]
            if mask.all():
                continue
            joints[:, a, j, :] = fill_missing(clip.joints[:, a, j, :], mask)
    valid = np.ones_like(clip.valid)
    return replace(clip, joints=joints, valid=valid)


def _check_actor_array(actor_joints, descriptor: DatasetDescriptor) -> np.ndarray:
    arr = np.asarray(actor_joints, dtype=np.float64)
    if arr.ndim != 3:
        raise InputError(f"actor joints must have shape (frames, joints, dim), got {arr.shape}")
    F, N, d = arr.shape
    if F < 1:
        raise InputError("actor joints need at least one frame")
    if N != descriptor.joint_count or d != descriptor.dim:
        raise InputError(
            f"actor joints ({N} joints, dim {d}) do not match descriptor "
            f"({descriptor.joint_count} joints, dim {descriptor.dim})"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError("actor joints contain non-finite values")
    return arr


def _comb2(n: int) -> int:
    return n * (n - 1) // 2


def _comb3(n: int) -> int:
    return n * (n - 1) * (n - 2) // 6
