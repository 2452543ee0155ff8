"""Linear network, training loop, persistence, and two-stage routing."""

import math

import numpy as np
import pytest

from pathsig import (
    DatasetDescriptor,
    FeatureConfig,
    FeatureScaler,
    FormatError,
    InputError,
    LinearNetModel,
    SkeletonClip,
    StagePartition,
    TrainConfig,
    TwoStageModel,
    feature_layout,
    forward,
    gradient_check,
    init_model,
    load_model,
    lr_schedule,
    rank_actors,
    save_model,
    stage_partition,
    train,
    two_stage_predict,
)


def blobs(rng, per_class=40, dim=10, gap=4.0):
    """Two linearly separable Gaussian clouds, unit-ish scale."""
    a = rng.standard_normal((per_class, dim)) + gap
    b = rng.standard_normal((per_class, dim)) - gap
    x = np.vstack([a, b]) / (gap + 3.0)
    y = np.array([0] * per_class + [1] * per_class)
    return x, y


def hand_model(drop_rate=0.5):
    return LinearNetModel(
        w1=np.array([[1.0, 2.0], [3.0, 4.0]]),
        b1=np.array([0.5, -0.5]),
        w2=np.eye(2),
        b2=np.zeros(2),
        config=TrainConfig(drop_rate=drop_rate),
    )


# ------------------------------------------------------------------- forward


def test_forward_uniform_on_zero_weights():
    model = LinearNetModel(np.zeros((4, 3)), np.zeros(3), np.zeros((3, 5)),
                           np.zeros(5), TrainConfig())
    probs = forward(model, np.array([1.0, -2.0, 3.0, 0.5]))
    assert np.allclose(probs, 0.2, atol=1e-15)


def test_forward_probability_simplex():
    rng = np.random.default_rng(0)
    model = init_model(6, 4, TrainConfig(seed=5), hidden_dim=8)
    probs = forward(model, rng.standard_normal((25, 6)))
    assert probs.shape == (25, 4)
    assert np.all(probs >= 0)
    assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_forward_hand_evaluated_case():
    # h = 0.5*W1^T x + b1 = [-0.5, -1.5]; softmax gap of 1
    probs = forward(hand_model(), np.array([1.0, -1.0]))
    e = math.exp(-1.0)
    assert probs == pytest.approx([1.0 / (1.0 + e), e / (1.0 + e)], abs=1e-15)


def test_forward_mask_overrides_scaling():
    model = hand_model()
    probs = forward(model, np.array([1.0, -1.0]),
                    training_mask=np.ones((2, 2)))
    # with the all-ones mask: h = [-2+0.5, -2-0.5] = [-1.5, -2.5], same gap
    e = math.exp(-1.0)
    assert probs == pytest.approx([1.0 / (1.0 + e), e / (1.0 + e)], abs=1e-15)


def test_forward_collapsed_affine():
    # identity hidden activation: the whole net is one affine map
    rng = np.random.default_rng(1)
    model = init_model(7, 3, TrainConfig(drop_rate=0.95, seed=2), hidden_dim=16)
    x = rng.standard_normal((10, 7))
    a = 0.05 * model.w1 @ model.w2
    c = model.b1 @ model.w2 + model.b2
    logits = x @ a + c
    expect = np.exp(logits - logits.max(axis=1, keepdims=True))
    expect /= expect.sum(axis=1, keepdims=True)
    assert np.allclose(forward(model, x), expect, atol=1e-12)


def test_forward_validates():
    model = hand_model()
    with pytest.raises(InputError):
        forward(model, np.zeros(3))
    with pytest.raises(InputError):
        forward(model, np.zeros(2), training_mask=np.ones((3, 2)))


# ------------------------------------------------------------------ schedule


def test_lr_schedule_values():
    cfg = TrainConfig()
    assert lr_schedule(0, cfg) == 0.01
    assert lr_schedule(200, cfg) == pytest.approx(0.01 * math.exp(-1.0), abs=1e-18)
    flat = TrainConfig(decay=0.0)
    assert lr_schedule(123, flat) == 0.01
    with pytest.raises(InputError):
        lr_schedule(-1, cfg)


# ----------------------------------------------------------------- gradients


def test_gradient_check_20_random_models():
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(20):
        dim = int(rng.integers(3, 9))
        classes = int(rng.integers(2, 5))
        drop = float(rng.choice([0.0, 0.5, 0.95]))
        model = init_model(dim, classes, TrainConfig(drop_rate=drop, seed=i),
                           hidden_dim=int(rng.integers(2, 7)))
        x = rng.standard_normal(dim)
        label = int(rng.integers(classes))
        worst = max(worst, gradient_check(model, x, label))
    assert worst < 1e-4


def test_zero_input_leaves_w1_unchanged():
    # dL/dW1 = x (outer) delta, so x = 0 freezes the first layer
    model = init_model(5, 2, TrainConfig(drop_rate=0.0, max_epochs=3, seed=0),
                       hidden_dim=4)
    w1_before = model.w1.copy()
    b2_before = model.b2.copy()
    # unbalanced labels so the bias gradient does not cancel
    train(model, np.zeros((6, 5)), np.array([0, 0, 0, 0, 1, 1]),
          TrainConfig(drop_rate=0.0, max_epochs=3, seed=0))
    assert np.array_equal(model.w1, w1_before)
    assert not np.array_equal(model.b2, b2_before)


def test_gradient_check_validates():
    model = hand_model()
    with pytest.raises(InputError):
        gradient_check(model, np.zeros(3), 0)
    with pytest.raises(InputError):
        gradient_check(model, np.zeros(2), 5)


# ------------------------------------------------------------------ training


def test_separable_blobs_reach_full_accuracy():
    rng = np.random.default_rng(4)
    x, y = blobs(rng)
    cfg = TrainConfig(drop_rate=0.0, max_epochs=50, seed=1)
    model = init_model(10, 2, cfg)
    history = train(model, x, y, cfg)
    assert len(history) == 50
    assert history[-1].accuracy == 1.0
    assert any(s.accuracy == 1.0 for s in history[:50])


def test_full_batch_no_momentum_equals_plain_gd():
    rng = np.random.default_rng(5)
    x, y = blobs(rng, per_class=12, dim=4)
    n = x.shape[0]
    cfg = TrainConfig(batch_size=n, momentum=0.0, drop_rate=0.0,
                      max_epochs=3, seed=9)
    model = init_model(4, 2, cfg, hidden_dim=3)
    manual = {"w1": model.w1.copy(), "b1": model.b1.copy(),
              "w2": model.w2.copy(), "b2": model.b2.copy()}
    train(model, x, y, cfg)

    # replay: plain descent on the summed-CE gradient, same shuffles
    replay_rng = np.random.default_rng([cfg.seed, 1])
    for epoch in range(3):
        lr = 0.01 * math.exp(-0.005 * epoch)
        order = replay_rng.permutation(n)
        xb, yb = x[order], y[order]
        h = xb @ manual["w1"] + manual["b1"]
        logits = h @ manual["w2"] + manual["b2"]
        shifted = logits - logits.max(axis=1, keepdims=True)
        probs = np.exp(shifted) / np.exp(shifted).sum(axis=1, keepdims=True)
        g = probs.copy()
        g[np.arange(n), yb] -= 1.0
        g_h = g @ manual["w2"].T
        manual["w2"] = manual["w2"] - lr * (h.T @ g)
        manual["b2"] = manual["b2"] - lr * g.sum(axis=0)
        manual["w1"] = manual["w1"] - lr * (xb.T @ g_h)
        manual["b1"] = manual["b1"] - lr * g_h.sum(axis=0)

    assert np.allclose(model.w1, manual["w1"], rtol=1e-10, atol=1e-12)
    assert np.allclose(model.b1, manual["b1"], rtol=1e-10, atol=1e-12)
    assert np.allclose(model.w2, manual["w2"], rtol=1e-10, atol=1e-12)
    assert np.allclose(model.b2, manual["b2"], rtol=1e-10, atol=1e-12)


def test_full_batch_loss_non_increasing():
    rng = np.random.default_rng(6)
    x, y = blobs(rng, per_class=25, dim=6)
    cfg = TrainConfig(batch_size=50, momentum=0.0, drop_rate=0.0,
                      max_epochs=40, seed=2)
    model = init_model(6, 2, cfg)
    history = train(model, x, y, cfg)
    losses = [s.loss for s in history]
    assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))


def test_training_is_bit_deterministic():
    rng = np.random.default_rng(7)
    x, y = blobs(rng, per_class=15, dim=5)
    cfg = TrainConfig(max_epochs=5, seed=3)
    runs = []
    for _ in range(2):
        model = init_model(5, 2, cfg)
        history = train(model, x, y, cfg)
        runs.append((model, history))
    a, b = runs
    assert np.array_equal(a[0].w1, b[0].w1)
    assert np.array_equal(a[0].w2, b[0].w2)
    assert [(s.loss, s.accuracy) for s in a[1]] == [(s.loss, s.accuracy) for s in b[1]]


def test_history_fields():
    rng = np.random.default_rng(8)
    x, y = blobs(rng, per_class=10, dim=4)
    cfg = TrainConfig(max_epochs=4, seed=0)
    model = init_model(4, 2, cfg)
    history = train(model, x, y, cfg)
    assert [s.epoch for s in history] == [0, 1, 2, 3]
    assert history[0].lr == 0.01
    assert history[2].lr == pytest.approx(0.01 * math.exp(-0.01), rel=1e-12)
    assert all(0.0 <= s.accuracy <= 1.0 for s in history)


def test_train_validates():
    cfg = TrainConfig()
    model = init_model(3, 2, cfg)
    with pytest.raises(InputError):
        train(model, np.zeros((0, 3)), np.zeros(0, dtype=int), cfg)
    with pytest.raises(InputError):
        train(model, np.zeros((4, 3)), np.array([0, 1, 2, 0]), cfg)
    with pytest.raises(InputError):
        train(model, np.zeros((4, 2)), np.array([0, 1, 0, 1]), cfg)
    with pytest.raises(InputError):
        TrainConfig(drop_rate=1.0)
    with pytest.raises(InputError):
        TrainConfig(batch_size=0)


# --------------------------------------------------------------- persistence


def test_save_load_roundtrip_bit_exact(tmp_path):
    cfg = TrainConfig(drop_rate=0.8, seed=17, max_epochs=12)
    model = init_model(9, 3, cfg, hidden_dim=6)
    path = tmp_path / "m.model"
    save_model(model, path)
    loaded = load_model(path)
    assert np.array_equal(loaded.w1, model.w1)
    assert np.array_equal(loaded.b1, model.b1)
    assert np.array_equal(loaded.w2, model.w2)
    assert np.array_equal(loaded.b2, model.b2)
    assert loaded.config == cfg
    x = np.random.default_rng(0).standard_normal(9)
    assert np.array_equal(forward(loaded, x), forward(model, x))


def test_load_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bad.model"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 64)
    with pytest.raises(FormatError):
        load_model(path)


def test_load_truncated_reports_position(tmp_path):
    cfg = TrainConfig()
    model = init_model(4, 2, cfg, hidden_dim=3)
    path = tmp_path / "m.model"
    save_model(model, path)
    data = path.read_bytes()
    cut = tmp_path / "cut.model"
    cut.write_bytes(data[: len(data) // 2])
    with pytest.raises(FormatError) as err:
        load_model(cut)
    assert "byte" in str(err.value) or "offset" in str(err.value)


def test_load_rejects_trailing_bytes(tmp_path):
    cfg = TrainConfig()
    model = init_model(4, 2, cfg, hidden_dim=3)
    path = tmp_path / "m.model"
    save_model(model, path)
    path.write_bytes(path.read_bytes() + b"extra")
    with pytest.raises(FormatError):
        load_model(path)


# ----------------------------------------------------------------- two-stage


def little_clip(joints_fn, frames=4, actors=1, joints=3):
    coords = np.zeros((frames, actors, joints, 2))
    for f in range(frames):
        for a in range(actors):
            for j in range(joints):
                coords[f, a, j] = joints_fn(f, a, j)
    return SkeletonClip(coords, np.ones((frames, actors, joints), dtype=bool))


def test_rank_actors_orders_by_movement():
    # actor 0 frozen, actor 1 moving
    clip = little_clip(lambda f, a, j: (f * a * 1.0, j * 0.1), actors=2)
    assert rank_actors(clip).tolist() == [1, 0]


def test_rank_actors_stable_on_ties():
    clip = little_clip(lambda f, a, j: (f * 1.0, j * 1.0), actors=3)
    assert rank_actors(clip).tolist() == [0, 1, 2]


def test_rank_actors_zero_actor_last():
    coords = np.zeros((3, 2, 3, 2))
    coords[:, 1] = np.arange(3).reshape(3, 1, 1)  # only actor 1 moves
    clip = SkeletonClip(coords, np.ones((3, 2, 3), dtype=bool))
    assert rank_actors(clip).tolist() == [1, 0]


def test_stage_partition_threshold():
    labels = np.array([0] * 50 + [1] * 50 + [2] * 2)
    counts = np.concatenate([np.full(50, 1.04), np.full(50, 1.95), [1.5, 1.5]])
    part = stage_partition(labels, counts, 3)
    assert part.one_body_classes.tolist() == [0, 2]  # 1.5 exactly -> one-body
    assert part.multi_body_classes.tolist() == [1]
    with pytest.raises(InputError):
        stage_partition(np.array([0, 0]), np.array([1.0, 1.0]), 2)


def biased_gate(input_dim, pick):
    """A gate that always answers ``pick`` (0 = one-body, 1 = multi)."""
    b2 = np.zeros(2)
    b2[pick] = 10.0
    return LinearNetModel(np.zeros((input_dim, 2)), np.zeros(2),
                          np.zeros((2, 2)), b2, TrainConfig())


def test_two_stage_routing_both_paths():
    desc = DatasetDescriptor(joint_count=3, dim=2)
    config = FeatureConfig(sampled_frames=2, pair_level=1, triple_level=1,
                           joint_level=2, evolution_level=1)
    d_one = sum(b.width for b in feature_layout(config, desc))
    d_two = sum(b.width for b in feature_layout(config, desc.merged(2)))
    partition = StagePartition(np.array([1.0, 1.1, 1.9, 2.0]),
                               np.array([False, False, True, True]))

    def second_stage(input_dim, favored):
        b2 = np.zeros(2)
        b2[favored] = 5.0
        return LinearNetModel(np.zeros((input_dim, 2)), np.zeros(2),
                              np.zeros((2, 2)), b2, TrainConfig())

    rng = np.random.default_rng(9)
    clip = SkeletonClip(rng.standard_normal((5, 2, 3, 2)),
                        np.ones((5, 2, 3), dtype=bool))
    for gate_pick, favored, expect in ((0, 1, 1), (1, 0, 2), (1, 1, 3)):
        model = TwoStageModel(
            gate=biased_gate(d_two, gate_pick),
            one_body=second_stage(d_one, favored),
            multi_body=second_stage(d_two, favored),
            partition=partition,
            gate_scaler=FeatureScaler(np.ones(d_two)),
            one_scaler=FeatureScaler(np.ones(d_one)),
            multi_scaler=FeatureScaler(np.ones(d_two)),
        )
        label, prob = two_stage_predict(model, clip, config, desc)
        assert label == expect
        assert 0.5 < prob <= 1.0


def test_two_stage_rejects_empty_clip():
    desc = DatasetDescriptor(joint_count=3, dim=2)
    config = FeatureConfig(sampled_frames=2, pair_level=1, triple_level=1,
                           joint_level=2, evolution_level=1)
    d_two = sum(b.width for b in feature_layout(config, desc.merged(2)))
    d_one = sum(b.width for b in feature_layout(config, desc))
    model = TwoStageModel(
        gate=biased_gate(d_two, 0),
        one_body=biased_gate(d_one, 0),
        multi_body=biased_gate(d_two, 0),
        partition=StagePartition(np.array([1.0, 2.0]), np.array([False, True])),
        gate_scaler=FeatureScaler(np.ones(d_two)),
        one_scaler=FeatureScaler(np.ones(d_one)),
        multi_scaler=FeatureScaler(np.ones(d_two)),
    )
    empty = SkeletonClip(np.zeros((3, 1, 3, 2)), np.zeros((3, 1, 3), dtype=bool))
    with pytest.raises(InputError):
        two_stage_predict(model, empty, config, desc)
