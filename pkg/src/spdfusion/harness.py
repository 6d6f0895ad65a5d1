"""Subject-independent evaluation: fold plans, per-fold pipeline, ablations."""

import logging
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np
from sklearn.base import clone

from .exceptions import ConfigError, TooFewSubjects
from .manifold import MeanConfig, TangentSpace, geometric_mean
from .seqnet import LSTMClassifier, TrainConfig
from .signals import Recording, anova_select, assemble_segments, pairwise_distances, resample
from .spdrep import SpdConfig, representation

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldPlan:
    protocol: str
    assignments: Dict[str, int]
    seed: int = 0

    @property
    def n_folds(self):
        return max(self.assignments.values()) + 1

    def test_subjects(self, fold):
        return sorted(s for s, f in self.assignments.items() if f == fold)

    def train_subjects(self, fold):
        return sorted(s for s, f in self.assignments.items() if f != fold)


def plan_folds(subjects: Sequence[str], protocol="loso", seed=0, k=10) -> FoldPlan:
    """Assign every subject to exactly one test fold.

    ``"loso"`` gives one fold per subject (sorted order). ``"kfold"`` shuffles
    the sorted subjects with ``seed`` and deals them round-robin into ``k``
    folds, so samples of one subject never straddle folds.
    """
    subjects = sorted(set(subjects))
    if len(subjects) < 2:
        raise TooFewSubjects(f"need at least 2 subjects, got {len(subjects)}")
    if protocol == "loso":
        return FoldPlan("loso", {s: i for i, s in enumerate(subjects)}, seed)
    if protocol == "kfold":
        if not 2 <= k <= len(subjects):
            raise TooFewSubjects(f"{k}-fold needs between 2 and {len(subjects)} folds")
        order = np.random.default_rng(seed).permutation(len(subjects))
        return FoldPlan(f"kfold({k})", {subjects[j]: i % k for i, j in enumerate(order)}, seed)
    raise ConfigError(f"unknown protocol {protocol!r}")


@dataclass
class FoldReport:
    fold: int
    test_subjects: List[str]
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    accuracy: float = float("nan")
    f1: float = float("nan")
    predictions: List[dict] = field(default_factory=list)
    skipped: bool = False
    warning: str = ""

    @property
    def total(self):
        return self.tp + self.fp + self.tn + self.fn


def confusion(y_true, y_pred):
    y_true = np.asarray(y_true).astype(int)
    y_pred = np.asarray(y_pred).astype(int)
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    tn = int(np.sum((y_true == 0) & (y_pred == 0)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    return tp, fp, tn, fn


def accuracy_f1(tp, fp, tn, fn):
    """``(tp + tn) / total`` and ``2 tp / (2 tp + fp + fn)``; F1 is 0 when undefined."""
    total = tp + fp + tn + fn
    acc = (tp + tn) / total if total else float("nan")
    denom = 2 * tp + fp + fn
    f1 = 2 * tp / denom if denom else 0.0
    return acc, f1


def fold_report(fold, test_subjects, y_true, y_pred, prob=None, meta=None) -> FoldReport:
    tp, fp, tn, fn = confusion(y_true, y_pred)
    acc, f1 = accuracy_f1(tp, fp, tn, fn)
    preds = []
    for i in range(len(y_true)):
        row = dict(meta[i]) if meta is not None else {}
        row.update(y_true=int(y_true[i]), y_pred=int(y_pred[i]))
        if prob is not None:
            row["prob"] = float(prob[i])
        preds.append(row)
    return FoldReport(fold, list(test_subjects), tp, fp, tn, fn, acc, f1, preds)


@dataclass
class PipelineConfig:
    """Everything between raw recordings and predictions for one fold."""

    channels: Optional[List[str]] = None
    common_rate: float = 4.0
    segment_seconds: float = 10.0
    centering: str = "per-trial"
    representation: str = "P"
    m: int = 2
    shrinkage: float = 1e-6
    metric: str = "riemann"
    reference: str = "subject"
    seq_len: int = 5
    stride: int = 1
    standardize: bool = True
    landmark_k: int = 10
    selection_global: bool = False
    hidden: int = 128
    layers: int = 2
    pooling: str = "last"
    train: TrainConfig = field(default_factory=TrainConfig)

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig(**self.train)
        if self.representation not in ("S", "C", "P"):
            raise ConfigError(f"representation must be S, C or P, got {self.representation!r}")
        SpdConfig(self.m if self.representation == "P" else 1, self.shrinkage, self.centering)
        if self.seq_len < 1 or self.stride < 1:
            raise ConfigError("seq_len and stride must be >= 1")

    def classifier(self):
        t = self.train
        return LSTMClassifier(self.hidden, self.layers, t.lr, t.beta1, t.beta2, t.eps, t.epochs, t.dropout_rate,
                              t.batch_size, t.seed, t.clip_norm, t.pos_weight, self.pooling)

    def to_dict(self):
        return asdict(self)


def subject_reference(spds, cfg: MeanConfig = MeanConfig(), metric="riemann"):
    """Mean of one subject's SPD matrices; label-free, so valid at test time."""
    return geometric_mean(spds, cfg, metric=metric)


class Standardizer:
    """Per-channel z-scoring with statistics from training segments only."""

    def fit(self, segments):
        X = np.concatenate([s.data for s in segments], axis=1)
        self.mean_ = X.mean(axis=1)
        std = X.std(axis=1)
        self.scale_ = np.where(std > 0, std, 1.0)
        return self

    def transform(self, data):
        return (data - self.mean_[:, None]) / self.scale_[:, None]


def select_landmark_channels(recordings, train_subjects, cfg: PipelineConfig):
    """Distance channels per recording, restricted to the top-``k`` by ANOVA F.

    Selection is fit on training-subject recordings unless
    ``cfg.selection_global`` is set. Returns ``(extras, model)`` with
    ``extras[i]`` the selected channels for ``recordings[i]``.
    """
    if cfg.landmark_k <= 0 or not any(r.landmarks is not None for r in recordings):
        return [[] for _ in recordings], None
    if any(r.landmarks is None for r in recordings):
        raise ConfigError("landmarks present for some recordings but not others")
    dists = [[resample(c, cfg.common_rate) for c in pairwise_distances(r.landmarks)] for r in recordings]
    names = [c.name for c in dists[0]]
    train = set(train_subjects)
    feats, labels = [], []
    for r, d in zip(recordings, dists):
        if cfg.selection_global or r.subject_id in train:
            M = np.stack([c.samples for c in d], axis=1)
            feats.append(M)
            labels.append(np.full(M.shape[0], r.label))
    k = min(cfg.landmark_k, len(names))
    fitted_on = "global" if cfg.selection_global else ",".join(sorted(train))
    model = anova_select(np.concatenate(feats), np.concatenate(labels), k, fitted_on, names)
    return [[d[i] for i in model.selected_indices] for d in dists], model


def make_sequences(features, keys, seq_len, stride=1):
    """Windows of ``seq_len`` consecutive items sharing a key.

    ``keys`` groups items (one trial each) in their given order. Returns
    ``(X, item_index)`` with ``item_index[j]`` the positions in ``features``
    of window ``j``.
    """
    features = np.asarray(features)
    keys = list(keys)
    windows = []
    start = 0
    while start < len(keys):
        end = start
        while end < len(keys) and keys[end] == keys[start]:
            end += 1
        for i in range(start, end - seq_len + 1, stride):
            windows.append(np.arange(i, i + seq_len))
        start = end
    if not windows:
        return np.empty((0, seq_len) + features.shape[1:]), np.empty((0, seq_len), dtype=int)
    idx = np.stack(windows)
    return features[idx], idx


@dataclass
class FoldData:
    X_train: np.ndarray
    y_train: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    meta_test: List[dict]
    selection: object = None


def fold_features(recordings: Sequence[Recording], plan: FoldPlan, fold: int, cfg: PipelineConfig) -> FoldData:
    """Run the feature pipeline for one fold.

    Every fitted statistic (landmark selection, channel scaling, a global
    tangent reference) sees training subjects only.
    """
    train_subj = set(plan.train_subjects(fold))
    test_subj = set(plan.test_subjects(fold))
    recs = [r for r in recordings if r.subject_id in train_subj | test_subj]
    extras, selection = select_landmark_channels(recs, train_subj, cfg)
    segs = []
    for r, ex in zip(recs, extras):
        segs.extend(assemble_segments(r, ex, cfg.segment_seconds, cfg.common_rate, cfg.centering, cfg.channels))
    is_train = np.array([s.subject_id in train_subj for s in segs])
    data = np.stack([s.data for s in segs])
    if cfg.standardize:
        scaler = Standardizer().fit([s for s, t in zip(segs, is_train) if t])
        data = scaler.transform(data)
    spd = representation(data, cfg.representation, cfg.m, cfg.shrinkage, cfg.centering)
    subjects = np.array([s.subject_id for s in segs])
    ts = TangentSpace(cfg.reference, cfg.metric)
    ts.fit(spd[is_train], groups=subjects[is_train])
    vecs = ts.transform(spd, groups=subjects)
    keys = [(s.subject_id, s.trial_id) for s in segs]
    X, idx = make_sequences(vecs, keys, cfg.seq_len, cfg.stride)
    first = idx[:, 0]
    y = np.array([segs[i].label for i in first], dtype=int)
    tr = is_train[first]
    meta = [dict(subject=segs[i].subject_id, trial=segs[i].trial_id, start=segs[i].start_index)
            for i in first[~tr]]
    return FoldData(X[tr], y[tr], X[~tr], y[~tr], meta, selection)


def run_fold(recordings, plan: FoldPlan, fold: int, cfg: PipelineConfig, classifier=None) -> FoldReport:
    """Train on every subject outside ``fold`` and report on the held-out ones.

    ``classifier`` is any scikit-learn style binary classifier (cloned
    before fitting); defaults to the LSTM described by ``cfg``.
    """
    test_subj = plan.test_subjects(fold)
    fd = fold_features(recordings, plan, fold, cfg)
    if np.unique(fd.y_train).size < 2:
        msg = f"fold {fold}: training data has a single class; skipped"
        log.warning(msg)
        return FoldReport(fold, test_subj, skipped=True, warning=msg)
    est = clone(classifier if classifier is not None else cfg.classifier())
    est.fit(fd.X_train, fd.y_train)
    if hasattr(est, "predict_proba"):
        prob = est.predict_proba(fd.X_test)[:, 1]
        pred = (prob >= 0.5).astype(int)
    else:
        pred = np.asarray(est.predict(fd.X_test)).astype(int)
        prob = None
    report = fold_report(fold, test_subj, fd.y_test, pred, prob, fd.meta_test)
    if fd.selection is not None:
        report.warning = "selected: " + ",".join(fd.selection.selected_names)
    return report


@dataclass
class Evaluation:
    plan: FoldPlan
    folds: List[FoldReport]

    def pooled(self):
        tp = sum(f.tp for f in self.folds)
        fp = sum(f.fp for f in self.folds)
        tn = sum(f.tn for f in self.folds)
        fn = sum(f.fn for f in self.folds)
        acc, f1 = accuracy_f1(tp, fp, tn, fn)
        return dict(tp=tp, fp=fp, tn=tn, fn=fn, accuracy=acc, f1=f1, n=tp + fp + tn + fn)

    def fold_mean(self):
        done = [f for f in self.folds if not f.skipped]
        if not done:
            return dict(accuracy=float("nan"), f1=float("nan"))
        return dict(accuracy=float(np.mean([f.accuracy for f in done])), f1=float(np.mean([f.f1 for f in done])))


def evaluate(recordings, cfg: PipelineConfig, protocol="loso", seed=0, k=10, classifier=None, n_jobs=1) -> Evaluation:
    """Run every fold of the chosen protocol; folds are merged by index."""
    plan = plan_folds([r.subject_id for r in recordings], protocol, seed, k)
    folds = range(plan.n_folds)
    if n_jobs == 1:
        reports = [run_fold(recordings, plan, f, cfg, classifier) for f in folds]
    else:
        from joblib import Parallel, delayed

        reports = Parallel(n_jobs=n_jobs)(delayed(run_fold)(recordings, plan, f, cfg, classifier) for f in folds)
    return Evaluation(plan, sorted(reports, key=lambda r: r.fold))


@dataclass(frozen=True)
class AblationSpec:
    representation: str
    m: Optional[int] = None
    modality: str = "all"
    metric: str = "riemann"

    def __post_init__(self):
        if self.representation not in ("S", "C", "P"):
            raise ConfigError(f"unknown representation {self.representation!r}")
        if (self.m is not None) != (self.representation == "P"):
            raise ConfigError("m must be given exactly when representation is P")

    @property
    def row(self):
        return f"P(m={self.m})" if self.representation == "P" else self.representation

    @property
    def column(self):
        return f"{self.modality}/{self.metric}"


def default_grid(modalities=("all",), metrics=("riemann",)):
    """Rows S, C, P(m=2), P(m=3), P(m=4) for every modality/metric column."""
    rows = [("S", None), ("C", None), ("P", 2), ("P", 3), ("P", 4)]
    return [AblationSpec(r, m, mod, met) for mod in modalities for met in metrics for r, m in rows]


@dataclass
class AblationTable:
    rows: List[str]
    columns: List[str]
    cells: Dict[tuple, dict]

    def to_csv(self):
        head = ["representation"]
        for c in self.columns:
            head += [f"{c}/pooled_accuracy", f"{c}/pooled_f1", f"{c}/mean_accuracy", f"{c}/mean_f1"]
        lines = [",".join(head)]
        for r in self.rows:
            vals = [r]
            for c in self.columns:
                cell = self.cells.get((r, c))
                if cell is None:
                    vals += [""] * 4
                else:
                    vals += [f"{cell[k]:.6f}" for k in ("pooled_accuracy", "pooled_f1", "mean_accuracy", "mean_f1")]
            lines.append(",".join(vals))
        return "\n".join(lines) + "\n"


def run_ablation(grid: Sequence[AblationSpec], recordings, base: PipelineConfig, protocol="loso", seed=0, k=10,
                 modalities: Optional[Dict[str, Optional[List[str]]]] = None, classifier=None, n_jobs=1):
    """Evaluate every grid cell; returns ``(table, {spec: Evaluation})``.

    ``modalities`` maps a modality name to its channel list (``None`` means
    every channel); the name ``"all"`` is always available.
    """
    modalities = dict(modalities or {})
    modalities.setdefault("all", base.channels)
    rows, cols, cells, runs = [], [], {}, {}
    for spec in grid:
        if spec.modality not in modalities:
            raise ConfigError(f"unknown modality {spec.modality!r}")
        cfg = replace(base, representation=spec.representation, m=spec.m or 1, metric=spec.metric,
                      channels=modalities[spec.modality])
        ev = evaluate(recordings, cfg, protocol, seed, k, classifier, n_jobs)
        runs[spec] = ev
        pooled, mean = ev.pooled(), ev.fold_mean()
        cells[(spec.row, spec.column)] = dict(pooled_accuracy=pooled["accuracy"], pooled_f1=pooled["f1"],
                                              mean_accuracy=mean["accuracy"], mean_f1=mean["f1"])
        if spec.row not in rows:
            rows.append(spec.row)
        if spec.column not in cols:
            cols.append(spec.column)
    return AblationTable(rows, cols, cells), runs

