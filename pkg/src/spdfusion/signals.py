"""From raw recordings to fixed-size multichannel segments.

Covers resampling onto a common grid, landmark-pair distances, ANOVA
F-value channel selection and non-overlapping segmentation.
"""

from dataclasses import dataclass, field
from itertools import combinations
from typing import List, Optional, Sequence

import numpy as np
from scipy.ndimage import uniform_filter1d
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import (
    ConfigError,
    DataError,
    EmptyChannel,
    InconsistentLandmarkCount,
    NonFinite,
    SingleClass,
    TooShort,
)
from .spdrep import CENTERING_MODES, Segment


@dataclass(frozen=True)
class Channel:
    name: str
    rate: float
    samples: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64).ravel()
        if x.size == 0:
            raise EmptyChannel(f"channel {self.name!r} has no samples")
        if not self.rate > 0:
            raise DataError(f"channel {self.name!r} has non-positive rate {self.rate}")
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"channel {self.name!r} contains NaN or inf samples")
        object.__setattr__(self, "samples", x)

    @property
    def duration(self):
        return self.samples.size / self.rate


@dataclass(frozen=True)
class LandmarkFrame:
    """Landmark coordinates over video frames: ``points`` is ``(frames, L, 2|3)``."""

    points: np.ndarray
    frame_rate: float

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 3 or pts.shape[-1] not in (2, 3):
            raise InconsistentLandmarkCount(f"expected (frames, landmarks, 2|3) coordinates, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise NonFinite("landmark coordinates contain NaN or inf")
        if not self.frame_rate > 0:
            raise DataError("landmark frame rate must be positive")
        object.__setattr__(self, "points", pts)


@dataclass
class Recording:
    subject_id: str
    trial_id: str
    label: int
    channels: List[Channel]
    landmarks: Optional[LandmarkFrame] = None

    def __post_init__(self):
        names = [c.name for c in self.channels]
        if len(set(names)) != len(names):
            raise DataError(f"duplicate channel names in {self.subject_id}/{self.trial_id}: {names}")

    def channel(self, name):
        for c in self.channels:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def channel_names(self):
        return [c.name for c in self.channels]


@dataclass
class SelectionModel:
    selected_indices: List[int]
    f_scores: np.ndarray
    fitted_on: str = ""
    feature_names: Optional[List[str]] = field(default=None)

    @property
    def selected_names(self):
        if self.feature_names is None:
            return None
        return [self.feature_names[i] for i in self.selected_indices]


def resample(channel: Channel, target_rate: float) -> Channel:
    """Moving-average anti-alias, then linear interpolation onto ``target_rate``.

    The averaging window is the integer decimation factor
    ``round(rate / target_rate)``; when upsampling no filter is applied.
    The output has ``floor(duration * target_rate)`` samples.
    """
    if not target_rate > 0:
        raise ConfigError(f"target rate must be positive, got {target_rate}")
    x = channel.samples
    factor = int(round(channel.rate / target_rate))
    if factor > 1:
        # filtering deviations from x[0] keeps constant channels bit-exact
        x = x[0] + uniform_filter1d(x - x[0], size=factor, mode="nearest")
    n_out = int(np.floor(channel.duration * target_rate + 1e-9))
    if n_out < 1:
        raise EmptyChannel(f"channel {channel.name!r} is shorter than one sample at {target_rate} Hz")
    t_src = np.arange(x.size) / channel.rate
    t_out = np.arange(n_out) / target_rate
    return Channel(channel.name, float(target_rate), np.interp(t_out, t_src, x))


def pairwise_distances(frames: LandmarkFrame, prefix="dist") -> List[Channel]:
    """Euclidean distance of every landmark pair, one channel per pair.

    Channels are named ``"{prefix}:{a}-{b}"`` and ordered by ``(a, b)``.
    """
    pts = frames.points
    L = pts.shape[1]
    if L < 2:
        raise InconsistentLandmarkCount(f"need at least 2 landmarks, got {L}")
    out = []
    for a, b in combinations(range(L), 2):
        d = np.sqrt(np.sum((pts[:, a] - pts[:, b]) ** 2, axis=-1))
        out.append(Channel(f"{prefix}:{a}-{b}", frames.frame_rate, d))
    return out


def landmark_frames(seq: Sequence[np.ndarray], frame_rate: float) -> LandmarkFrame:
    """Stack per-frame point lists, checking the landmark count is constant."""
    counts = {np.shape(f)[0] for f in seq}
    if len(counts) != 1:
        raise InconsistentLandmarkCount(f"landmark count varies across frames: {sorted(counts)}")
    return LandmarkFrame(np.stack([np.asarray(f, dtype=np.float64) for f in seq]), frame_rate)


def f_values(features, labels) -> np.ndarray:
    """One-way ANOVA F statistic per column.

    Columns whose within-group sum of squares is zero get ``+inf`` when the
    group means differ and ``0`` when the column is constant.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    classes = np.unique(y)
    if classes.size < 2:
        raise SingleClass("ANOVA selection needs at least two classes")
    n, k = X.shape[0], classes.size
    grand = X.mean(axis=0)
    ssb = np.zeros(X.shape[1])
    ssw = np.zeros(X.shape[1])
    for c in classes:
        g = X[y == c]
        mu = g.mean(axis=0)
        ssb += g.shape[0] * (mu - grand) ** 2
        ssw += np.sum((g - mu) ** 2, axis=0)
    df_b, df_w = k - 1, n - k
    if df_w < 1:
        raise DataError("ANOVA needs more samples than classes")
    msb = ssb / df_b
    msw = ssw / df_w
    with np.errstate(divide="ignore", invalid="ignore"):
        F = msb / msw
    F = np.where(msw > 0, F, np.where(msb > 0, np.inf, 0.0))
    return F


def anova_select(features, labels, k: int, fitted_on="", feature_names=None) -> SelectionModel:
    """Top-``k`` columns by F value; ties go to the lower index."""
    F = f_values(features, labels)
    if not 1 <= k <= F.size:
        raise ConfigError(f"k must lie in [1, {F.size}], got {k}")
    order = np.lexsort((np.arange(F.size), -F))
    return SelectionModel([int(i) for i in order[:k]], F, fitted_on, feature_names)


class AnovaSelector(BaseEstimator, TransformerMixin):
    """Keep the ``k`` columns of ``X`` with the highest ANOVA F value."""

    def __init__(self, k=10):
        self.k = k

    def fit(self, X, y):
        X = np.asarray(X, dtype=np.float64)
        self.model_ = anova_select(X, y, min(self.k, X.shape[1]))
        self.scores_ = self.model_.f_scores
        return self

    def get_support(self, indices=False):
        check_is_fitted(self, "model_")
        if indices:
            return np.array(self.model_.selected_indices)
        mask = np.zeros(self.scores_.size, dtype=bool)
        mask[self.model_.selected_indices] = True
        return mask

    def transform(self, X):
        check_is_fitted(self, "model_")
        return np.asarray(X, dtype=np.float64)[:, self.model_.selected_indices]


def align(channels: Sequence[Channel], rate: float) -> np.ndarray:
    """Resample channels to ``rate`` and stack them, trimmed to the shortest."""
    res = [c if c.rate == rate else resample(c, rate) for c in channels]
    n = min(c.samples.size for c in res)
    return np.stack([c.samples[:n] for c in res])


def assemble_segments(
    rec: Recording,
    extra: Sequence[Channel] = (),
    segment_seconds: float = 10.0,
    common_rate: float = 4.0,
    centering: str = "per-trial",
    channels: Optional[Sequence[str]] = None,
) -> List[Segment]:
    """Slice a recording into non-overlapping ``D x N`` segments.

    ``channels`` picks and orders the recording's channels (all by default);
    ``extra`` (e.g. landmark distances) is appended after them. With
    ``centering="per-trial"`` each channel's mean over the whole (trimmed)
    recording is removed before slicing. The trailing partial segment is
    dropped.
    """
    if centering not in CENTERING_MODES:
        raise ConfigError(f"unknown centering mode {centering!r}")
    n_seg = int(round(segment_seconds * common_rate))
    if abs(n_seg - segment_seconds * common_rate) > 1e-9 or n_seg < 2:
        raise ConfigError(
            f"segment_seconds * common_rate must be an integer >= 2, got {segment_seconds * common_rate}"
        )
    picked = rec.channels if channels is None else [rec.channel(n) for n in channels]
    X = align(list(picked) + list(extra), common_rate)
    count = X.shape[1] // n_seg
    if count == 0:
        raise TooShort(
            f"{rec.subject_id}/{rec.trial_id}: {X.shape[1]} samples at {common_rate} Hz "
            f"is shorter than one {segment_seconds} s segment"
        )
    X = X[:, : count * n_seg]
    if centering == "per-trial":
        X = X - X.mean(axis=1, keepdims=True)
    return [
        Segment(X[:, i * n_seg:(i + 1) * n_seg], rec.subject_id, rec.trial_id, i * n_seg, rec.label)
        for i in range(count)
    ]
