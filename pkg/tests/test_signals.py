import numpy as np
import pytest
from sklearn.feature_selection import f_classif

from spdfusion.exceptions import ConfigError, EmptyChannel, InconsistentLandmarkCount, SingleClass, TooShort
from spdfusion.signals import (
    AnovaSelector, Channel, LandmarkFrame, Recording, align, anova_select, assemble_segments, f_values,
    landmark_frames, pairwise_distances, resample,
)


def test_channel_validation():
    with pytest.raises(EmptyChannel):
        Channel("x", 4.0, [])
    with pytest.raises(ValueError):
        Channel("x", 0.0, [1.0])


def test_resample_constant_exact():
    out = resample(Channel("c", 32.0, np.full(320, 3.7)), 4.0)
    assert out.samples.size == 40
    assert np.all(out.samples == 3.7)


def test_resample_ramp():
    out = resample(Channel("r", 8.0, np.arange(8.0)), 4.0)
    assert out.samples.size == 4
    assert np.all(np.diff(out.samples) > 0)
    # window-2 average of the ramp, sampled at even indices
    np.testing.assert_allclose(out.samples, [0.0, 1.5, 3.5, 5.5])


def test_resample_upsample_is_interpolation():
    out = resample(Channel("u", 2.0, [0.0, 2.0, 4.0, 6.0]), 4.0)
    np.testing.assert_allclose(out.samples, [0, 1, 2, 3, 4, 5, 6, 6])


def test_resample_envelope(rng):
    x = rng.uniform(-1, 1, 800)
    out = resample(Channel("n", 40.0, x), 4.0)
    assert x.min() <= out.samples.min() and out.samples.max() <= x.max()
    with pytest.raises(ConfigError):
        resample(Channel("n", 40.0, x), 0.0)


def test_pairwise_distances():
    frames = LandmarkFrame(np.array([[[0.0, 0.0], [3.0, 4.0], [0.0, 0.0]]]), 10.0)
    ch = pairwise_distances(frames)
    assert [c.name for c in ch] == ["dist:0-1", "dist:0-2", "dist:1-2"]
    np.testing.assert_allclose([c.samples[0] for c in ch], [5.0, 0.0, 5.0])
    assert len(pairwise_distances(LandmarkFrame(np.zeros((2, 4, 3)), 1.0))) == 6
    with pytest.raises(InconsistentLandmarkCount):
        pairwise_distances(LandmarkFrame(np.zeros((2, 1, 2)), 1.0))


def test_landmark_count_must_be_fixed():
    with pytest.raises(InconsistentLandmarkCount):
        landmark_frames([np.zeros((3, 2)), np.zeros((4, 2))], 10.0)


def test_f_value_hand_example():
    F = f_values(np.array([[0.0], [2.0], [1.0], [3.0]]), np.array([0, 0, 1, 1]))
    assert F[0] == pytest.approx(0.5)


def test_f_values_match_sklearn(rng):
    X = rng.standard_normal((60, 7)) + np.arange(7) * 0.1
    y = rng.integers(0, 2, 60)
    X[y == 1, 2] += 1.0
    np.testing.assert_allclose(f_values(X, y), f_classif(X, y)[0], rtol=1e-10)


def test_anova_select_ranking_and_ties(rng):
    y = np.array([0] * 10 + [1] * 10)
    X = rng.standard_normal((20, 5))
    X[:, 3] += 3 * y
    X[:, 1] = X[:, 4] = np.where(y == 1, 1.0, -1.0) + 0.01 * np.tile([1.0, -1.0], 10)
    m = anova_select(X, y, 2)
    assert m.selected_indices == [1, 4]
    assert len(anova_select(X, y, 5).selected_indices) == 5
    F = m.f_scores
    assert np.all(np.diff(F[anova_select(X, y, 5).selected_indices]) <= 0)


def test_anova_zero_within_variance():
    X = np.array([[1.0, 5.0], [1.0, 5.0], [2.0, 5.0], [2.0, 5.0]])
    F = f_values(X, [0, 0, 1, 1])
    assert F[0] == np.inf and F[1] == 0
    assert anova_select(X, [0, 0, 1, 1], 1).selected_indices == [0]


def test_anova_errors():
    with pytest.raises(SingleClass):
        anova_select(np.zeros((4, 2)), [1, 1, 1, 1], 1)
    with pytest.raises(ConfigError):
        anova_select(np.eye(4), [0, 0, 1, 1], 5)


def test_anova_permutation_equivariant(rng):
    X = rng.standard_normal((30, 6))
    y = np.repeat([0, 1], 15)
    X[:, 2] += y
    perm = rng.permutation(30)
    np.testing.assert_allclose(f_values(X, y), f_values(X[perm], y[perm]), rtol=1e-12)


def test_anova_selector_transformer(rng):
    X = rng.standard_normal((40, 5))
    y = np.repeat([0, 1], 20)
    X[:, 2] += 2 * y
    sel = AnovaSelector(k=1).fit(X, y)
    assert sel.get_support(indices=True).tolist() == [2]
    assert sel.transform(X).shape == (40, 1)


def _rec(seconds, rate=4.0, D=2, seed=0, label=1):
    x = np.random.default_rng(seed).standard_normal((D, int(seconds * rate))) + 5.0
    return Recording("s1", "t1", label, [Channel(f"c{i}", rate, x[i]) for i in range(D)])


def test_assemble_drops_remainder():
    segs = assemble_segments(_rec(35), segment_seconds=10, common_rate=4.0)
    assert len(segs) == 3
    assert all(s.data.shape == (2, 40) for s in segs)
    assert segs[1].start_index == 40 and segs[0].label == 1 and segs[0].subject_id == "s1"


def test_assemble_short_segments():
    segs = assemble_segments(_rec(3), segment_seconds=1, common_rate=4.0)
    assert len(segs) == 3 and segs[0].data.shape == (2, 4)


def test_assemble_per_trial_centering_and_lossless():
    rec = _rec(35)
    segs = assemble_segments(rec, segment_seconds=10, common_rate=4.0, centering="per-trial")
    joined = np.concatenate([s.data for s in segs], axis=1)
    np.testing.assert_allclose(joined.mean(axis=1), 0, atol=1e-12)
    raw = align(rec.channels, 4.0)[:, :120]
    np.testing.assert_allclose(joined, raw - raw.mean(axis=1, keepdims=True), atol=0)
    plain = assemble_segments(rec, segment_seconds=10, common_rate=4.0, centering="none")
    np.testing.assert_array_equal(np.concatenate([s.data for s in plain], axis=1), raw)


def test_assemble_channel_pick_and_extra():
    rec = _rec(20, D=3)
    extra = [Channel("dist:0-1", 8.0, np.ones(160))]
    segs = assemble_segments(rec, extra, 10, 4.0, "none", channels=["c2", "c0"])
    assert segs[0].data.shape == (3, 40)
    np.testing.assert_array_equal(segs[0].data[0], rec.channel("c2").samples[:40])
    np.testing.assert_array_equal(segs[0].data[2], np.ones(40))


def test_assemble_too_short():
    with pytest.raises(TooShort):
        assemble_segments(_rec(5), segment_seconds=10, common_rate=4.0)
