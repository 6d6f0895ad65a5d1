"""On-disk dataset layout and the synthetic generator.

Layout::

    root/<subject>/<trial>/<channel>.csv   header "t,value", one row per sample
    root/<subject>/<trial>/meta.json       {"label": 0|1, "rates": {"<channel>": Hz}}
    root/<subject>/<trial>/landmarks.csv   optional, header "t,p0_x,p0_y[,p0_z],p1_x,..."

``meta.json`` may also carry ``"landmark_rate"`` (frames per second) when
``landmarks.csv`` is present.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .exceptions import BadHeader, ConfigError, DataError, LabelMissing, MissingChannel
from .signals import Channel, LandmarkFrame, Recording

log = logging.getLogger(__name__)

CHANNEL_HEADER = ["t", "value"]
LANDMARK_FILE = "landmarks.csv"
META_FILE = "meta.json"


def _read_header(path):
    with open(path) as fh:
        return fh.readline().strip().split(",")


def _read_table(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def read_channel(path, rate) -> Channel:
    path = Path(path)
    header = _read_header(path)
    if header != CHANNEL_HEADER:
        raise BadHeader(f"{path}: expected header 't,value', found {','.join(header)!r}")
    data = _read_table(path)
    if data.shape[0] == 0:
        raise DataError(f"{path}: no samples")
    return Channel(path.stem, float(rate), data[:, 1])


def read_landmarks(path, frame_rate) -> LandmarkFrame:
    path = Path(path)
    header = _read_header(path)
    if not header or header[0] != "t" or len(header) < 5:
        raise BadHeader(f"{path}: expected header 't,p0_x,p0_y,...', found {','.join(header)!r}")
    coords = header[1:]
    dim = 3 if any(c.endswith("_z") for c in coords) else 2
    expected = [f"p{i}_{a}" for i in range(len(coords) // dim) for a in "xyz"[:dim]]
    if coords != expected:
        raise BadHeader(f"{path}: landmark columns must read {','.join(expected)}")
    data = _read_table(path)[:, 1:]
    return LandmarkFrame(data.reshape(data.shape[0], -1, dim), float(frame_rate))


def read_trial(trial_dir, subject, roster: Optional[Sequence[str]] = None, report: Optional[list] = None) -> Recording:
    trial_dir = Path(trial_dir)
    meta_path = trial_dir / META_FILE
    if not meta_path.is_file():
        raise LabelMissing(f"{meta_path}: missing (label and rates required)")
    meta = json.loads(meta_path.read_text())
    if "label" not in meta:
        raise LabelMissing(f"{meta_path}: no 'label' entry")
    label = int(meta["label"])
    if label not in (0, 1):
        raise LabelMissing(f"{meta_path}: label must be 0 or 1, got {meta['label']!r}")
    rates = meta.get("rates", {})
    present = sorted(p.stem for p in trial_dir.glob("*.csv") if p.name != LANDMARK_FILE)
    names = list(roster) if roster is not None else present
    if roster is not None:
        unknown = sorted(set(present) - set(roster))
        if unknown:
            raise DataError(f"{trial_dir}: channels not in roster: {', '.join(unknown)}")
    channels = []
    for name in names:
        path = trial_dir / f"{name}.csv"
        if not path.is_file():
            raise MissingChannel(f"{path}: channel {name!r} missing")
        if name not in rates:
            raise DataError(f"{meta_path}: no rate for channel {name!r}")
        channels.append(read_channel(path, rates[name]))
    if report is not None and channels:
        durs = {c.name: c.duration for c in channels}
        ref = max(durs.values())
        for c in channels:
            if ref - durs[c.name] > 1.0 / c.rate:
                report.append(f"{trial_dir / (c.name + '.csv')}: {durs[c.name]:.3f} s, shortest-vs-longest "
                              f"mismatch of {ref - durs[c.name]:.3f} s")
    landmarks = None
    lm_path = trial_dir / LANDMARK_FILE
    if lm_path.is_file():
        if "landmark_rate" not in meta:
            raise DataError(f"{meta_path}: landmarks.csv present but no 'landmark_rate'")
        landmarks = read_landmarks(lm_path, meta["landmark_rate"])
    return Recording(str(subject), trial_dir.name, label, channels, landmarks)


def ingest(root, roster: Optional[Sequence[str]] = None, report: Optional[list] = None) -> List[Recording]:
    """Read every ``root/<subject>/<trial>`` directory, in sorted order.

    Errors name the offending file. Channel length mismatches are appended
    to ``report`` (when given) rather than raised.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"{root}: dataset root does not exist")
    recs = []
    for subj in sorted(p for p in root.iterdir() if p.is_dir()):
        for trial in sorted(p for p in subj.iterdir() if p.is_dir()):
            recs.append(read_trial(trial, subj.name, roster, report))
    if not recs:
        raise DataError(f"{root}: no <subject>/<trial> directories found")
    return recs


@dataclass
class SyntheticSpec:
    """Generator settings for a desk-scale two-class dataset.

    Channels are ``physio_0..physio_{pairs-1}`` then ``motion_0..``. A slow
    square-wave mean envelope of amplitude ``envelope`` (sign flips every
    ``segment_seconds``) runs along a class-dependent unit direction ``u``,
    and the within-segment noise gets extra variance ``envelope**2`` along an
    orthogonal direction ``w``; the two classes swap the roles of ``u`` and
    ``w``. The expected per-segment second moment is therefore the same for
    both classes: the label shows only in how that moment splits between
    segment means (what the cross-covariance sees) and within-segment
    scatter. ``u`` and ``w`` agree on the physio channels and differ in sign on
    the motion channels, so neither modality alone carries the label.
    ``contrast=0`` makes the classes identical.
    """

    subjects: int = 8
    trials_per_class: int = 3
    duration: float = 120.0
    rate: float = 4.0
    segment_seconds: float = 10.0
    pairs: int = 2
    noise: float = 1.0
    envelope: float = 1.0
    contrast: float = 1.0
    gain_spread: float = 0.2
    landmarks: int = 0
    landmark_rate: float = 8.0
    seed: int = 0

    def __post_init__(self):
        if self.subjects < 2 or self.trials_per_class < 1 or self.pairs < 1:
            raise ConfigError("synthetic spec needs >= 2 subjects, >= 1 trial per class and >= 1 channel pair")
        if not self.duration > 0 or not self.rate > 0 or not self.segment_seconds > 0:
            raise ConfigError("durations and rates must be positive")
        if not 0 <= self.contrast <= 1:
            raise ConfigError("contrast must lie in [0, 1]")
        if self.landmarks == 1:
            raise ConfigError("landmarks must be 0 or >= 2")

    @property
    def channel_names(self):
        return [f"physio_{k}" for k in range(self.pairs)] + [f"motion_{k}" for k in range(self.pairs)]

    @property
    def modalities(self):
        return {"physio": [f"physio_{k}" for k in range(self.pairs)],
                "motion": [f"motion_{k}" for k in range(self.pairs)]}

    def directions(self, label):
        """Unit mean-envelope direction ``u`` and extra-noise direction ``w``."""
        D = 2 * self.pairs
        plus = np.ones(D) / np.sqrt(D)
        minus = np.concatenate([np.ones(self.pairs), -np.ones(self.pairs)]) / np.sqrt(D)
        theta = np.pi / 4 * (1 + (self.contrast if label else -self.contrast))
        u = np.cos(theta) * plus + np.sin(theta) * minus
        w = -np.sin(theta) * plus + np.cos(theta) * minus
        return u, w


def _trial_signals(rng, spec, label, n):
    u, w = spec.directions(label)
    seg = int(round(spec.segment_seconds * spec.rate))
    block = np.arange(n) // seg
    sign = np.where(block % 2 == 0, 1.0, -1.0) * rng.choice([-1.0, 1.0])
    mean = spec.envelope * sign[None, :] * u[:, None]
    z = rng.standard_normal((u.size + 1, n))
    noise = spec.noise * z[:-1] + spec.envelope * z[-1][None, :] * w[:, None]
    return mean + noise


def generate(spec: SyntheticSpec) -> List[Recording]:
    """Build the synthetic recordings in memory (deterministic per seed)."""
    rng = np.random.default_rng(spec.seed)
    n = int(round(spec.duration * spec.rate))
    names = spec.channel_names
    recs = []
    for s in range(spec.subjects):
        gains = np.exp(rng.uniform(-spec.gain_spread, spec.gain_spread, size=len(names)))
        base = rng.uniform(0, 10, size=(spec.landmarks, 2)) if spec.landmarks else None
        trials = [label for label in (0, 1) for _ in range(spec.trials_per_class)]
        for j, label in enumerate(trials):
            X = _trial_signals(rng, spec, label, n) * gains[:, None]
            chans = [Channel(name, spec.rate, X[i]) for i, name in enumerate(names)]
            lm = None
            if spec.landmarks:
                frames = int(round(spec.duration * spec.landmark_rate))
                pts = base[None] + 0.05 * rng.standard_normal((frames, spec.landmarks, 2))
                if label == 1:
                    gap = base[1] - base[0]
                    pts[:, 1] += 0.5 * gap / max(np.linalg.norm(gap), 1e-9)
                lm = LandmarkFrame(pts, spec.landmark_rate)
            recs.append(Recording(f"s{s:02d}", f"t{j:02d}", label, chans, lm))
    return recs


def write_recording(rec: Recording, root):
    d = Path(root) / rec.subject_id / rec.trial_id
    d.mkdir(parents=True, exist_ok=True)
    meta = {"label": int(rec.label), "rates": {c.name: c.rate for c in rec.channels}}
    for c in rec.channels:
        t = np.arange(c.samples.size) / c.rate
        lines = ["t,value"] + [f"{repr(float(a))},{repr(float(b))}" for a, b in zip(t, c.samples)]
        (d / f"{c.name}.csv").write_text("\n".join(lines) + "\n")
    if rec.landmarks is not None:
        pts = rec.landmarks.points
        F, L, dim = pts.shape
        head = ["t"] + [f"p{i}_{a}" for i in range(L) for a in "xyz"[:dim]]
        rows = [",".join(head)]
        for f in range(F):
            vals = [f / rec.landmarks.frame_rate] + pts[f].ravel().tolist()
            rows.append(",".join(repr(float(v)) for v in vals))
        (d / LANDMARK_FILE).write_text("\n".join(rows) + "\n")
        meta["landmark_rate"] = rec.landmarks.frame_rate
    (d / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def synth(spec: SyntheticSpec, root) -> List[Recording]:
    """Generate and write a dataset in the ingest layout; returns the recordings."""
    recs = generate(spec)
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    for r in recs:
        write_recording(r, root)
    (root / "synth.json").write_text(json.dumps(asdict(spec), indent=2, sort_keys=True) + "\n")
    return recs
