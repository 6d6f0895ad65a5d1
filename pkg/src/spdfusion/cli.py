"""Command line entry point: ``spdfusion <subcommand> [options]``.

Subcommands form a staged pipeline; each writes one output directory with a
``manifest.json`` and is skipped when its inputs and configuration are
unchanged::

    synth         write a synthetic dataset in the ingest layout
    ingest-check  validate a dataset tree and report channel length mismatches
    build-spd     segment every recording and write its SPD matrices
    map-tangent   map SPD matrices to tangent vectors at per-subject references
    train         fit the LSTM on all tangent sequences and save a checkpoint
    evaluate      cross-validated evaluation (LOSO or subject k-fold)
    ablate        S / C / P(m) ablation table
    heatmap       correlation-scaled heatmap (CSV + PGM + labels) of an SPD matrix

Options may also come from ``--config FILE``, an INI file whose ``[run]``
section uses the option names with dashes or underscores (``m = 3``,
``segment_seconds = 10``). Command line flags win over the file. Relative
output directories are placed under ``$SPDFUSION_OUTPUT_ROOT`` when it is
set.

Exit codes: 0 success, 1 usage error, 2 data or configuration error,
3 numerical failure.
"""

import argparse
import configparser
import csv
import io
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import artifacts
from .datasets import SyntheticSpec, ingest, synth
from .exceptions import ConfigError, DataError, NumericalError
from .harness import AblationSpec, PipelineConfig, evaluate, make_sequences, run_ablation
from .manifold import METRICS, TangentSpace, geometric_mean
from .seqnet import TrainConfig, save_checkpoint, train
from .signals import assemble_segments
from .spdrep import CENTERING_MODES, SpdConfig, representation

log = logging.getLogger("spdfusion")

OUTPUT_ROOT_ENV = "SPDFUSION_OUTPUT_ROOT"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """Every knob of a pipeline run; CLI flags mirror these fields."""

    data: Optional[str] = None
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
    hidden: int = 128
    layers: int = 2
    pooling: str = "last"
    train: TrainConfig = field(default_factory=TrainConfig)
    protocol: str = "loso"
    k: int = 10
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.train, dict):
            self.train = TrainConfig(**self.train)
        if not self.common_rate > 0 or not self.segment_seconds > 0:
            raise ConfigError("common_rate and segment_seconds must be positive")
        if self.centering not in CENTERING_MODES:
            raise ConfigError(f"centering must be one of {CENTERING_MODES}")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")
        if self.reference not in ("subject", "global"):
            raise ConfigError("reference must be 'subject' or 'global'")
        if self.protocol not in ("loso", "kfold"):
            raise ConfigError("protocol must be 'loso' or 'kfold'")
        if self.hidden < 1 or self.layers < 1:
            raise ConfigError("hidden and layers must be >= 1")
        self.pipeline()  # remaining checks live in PipelineConfig

    def pipeline(self) -> PipelineConfig:
        return PipelineConfig(
            channels=self.channels, common_rate=self.common_rate, segment_seconds=self.segment_seconds,
            centering=self.centering, representation=self.representation,
            m=self.m if self.representation == "P" else 1, shrinkage=self.shrinkage, metric=self.metric,
            reference=self.reference, seq_len=self.seq_len, stride=self.stride, standardize=self.standardize,
            landmark_k=self.landmark_k, hidden=self.hidden, layers=self.layers, pooling=self.pooling,
            train=self.train,
        )

    def check_roster(self, recordings):
        if self.channels is None:
            return
        for r in recordings:
            missing = sorted(set(self.channels) - set(r.channel_names))
            if missing:
                raise ConfigError(f"{r.subject_id}/{r.trial_id}: channels not in roster: {', '.join(missing)}")

    def to_dict(self):
        return asdict(self)


def output_dir(path) -> Path:
    p = Path(path)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def _csv_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


# argument groups


def _add_common(p):
    p.add_argument("--config", help="INI file with a [run] section of option defaults")
    p.add_argument("-v", "--verbose", action="store_true")


def _add_data(p):
    p.add_argument("--data", required=True, help="dataset root in the ingest layout")
    p.add_argument("--channels", type=_csv_list, help="comma-separated channel roster (default: all)")


def _add_segmenting(p):
    p.add_argument("--common-rate", type=float, default=4.0, help="Hz")
    p.add_argument("--segment-seconds", type=float, default=10.0)
    p.add_argument("--centering", choices=CENTERING_MODES, default="per-trial")


def _add_spd(p):
    p.add_argument("--representation", choices=("S", "C", "P"), default="P")
    p.add_argument("--m", type=int, default=2, help="block multiplicity for P")
    p.add_argument("--shrinkage", type=float, default=1e-6)


def _add_tangent(p):
    p.add_argument("--metric", choices=METRICS, default="riemann")
    p.add_argument("--reference", choices=("subject", "global"), default="subject")


def _add_net(p):
    p.add_argument("--seq-len", type=int, default=5)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--layers", type=int, default=2)
    p.add_argument("--pooling", choices=("last", "mean"), default="last")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--dropout", type=float, default=0.5)
    p.add_argument("--clip-norm", type=float, default=5.0)
    p.add_argument("--pos-weight", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _add_protocol(p):
    p.add_argument("--protocol", choices=("loso", "kfold"), default="loso")
    p.add_argument("--k", type=int, default=10, help="folds for --protocol kfold")
    p.add_argument("--standardize", type=_bool, default=True)
    p.add_argument("--landmark-k", type=int, default=10)
    p.add_argument("--n-jobs", type=int, default=1)


def build_parser():
    parser = _Parser(prog="spdfusion", description="Block SPD fusion pipeline.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    _add_common(p)
    p.add_argument("--out", required=True)
    for f in fields(SyntheticSpec):
        p.add_argument("--" + f.name.replace("_", "-"), type=type(f.default), default=f.default)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest-check", help="validate a dataset tree")
    _add_common(p)
    _add_data(p)
    p.set_defaults(func=cmd_ingest_check)

    p = sub.add_parser("build-spd", help="segment recordings and build SPD matrices")
    _add_common(p)
    _add_data(p)
    _add_segmenting(p)
    _add_spd(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_spd)

    p = sub.add_parser("map-tangent", help="tangent vectors of a build-spd output")
    _add_common(p)
    p.add_argument("--spd", required=True, help="build-spd output directory")
    _add_tangent(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_map_tangent)

    p = sub.add_parser("train", help="fit the LSTM on a map-tangent output")
    _add_common(p)
    p.add_argument("--tangent", required=True, help="map-tangent output directory")
    _add_net(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    for name, func, helptext in (("evaluate", cmd_evaluate, "cross-validated evaluation"),
                                 ("ablate", cmd_ablate, "S / C / P(m) ablation table")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        _add_data(p)
        _add_segmenting(p)
        _add_spd(p)
        _add_tangent(p)
        _add_net(p)
        _add_protocol(p)
        p.add_argument("--out", required=True)
        if name == "ablate":
            p.add_argument("--rows", type=_csv_list, default=["S", "C", "P2", "P3", "P4"],
                           help="comma-separated rows: S, C, P<m>")
            p.add_argument("--metrics", type=_csv_list, default=["riemann"])
            p.add_argument("--modality", action="append", default=[], metavar="NAME=CH1,CH2",
                           help="named channel subset; repeatable ('all' is implicit)")
        p.set_defaults(func=func)

    p = sub.add_parser("heatmap", help="correlation heatmap of an SPD matrix")
    _add_common(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--spd", help="build-spd output directory")
    src.add_argument("--matrix", help="square matrix as CSV (no header) or array file")
    p.add_argument("--row", type=int, help="matrix index in the build-spd output")
    p.add_argument("--subject", help="geometric mean over this subject's matrices")
    p.add_argument("--label", type=int, choices=(0, 1), help="restrict --subject to one class")
    p.add_argument("--labels", type=_csv_list, help="axis labels for --matrix")
    p.add_argument("--scale", type=int, default=8, help="pixels per matrix cell")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_heatmap)
    return parser


def _apply_config_file(parser, argv):
    """Re-parse with defaults taken from the ``--config`` INI file."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    path = Path(args.config)
    if not path.is_file():
        raise ConfigError(f"{path}: config file not found")
    ini = configparser.ConfigParser()
    ini.read(path)
    if "run" not in ini:
        raise ConfigError(f"{path}: missing [run] section")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in ini["run"].items():
        dest = key.replace("-", "_")
        if dest not in actions or dest in ("config", "help"):
            raise ConfigError(f"{path}: unknown option {key!r} for {args.command}")
        a = actions[dest]
        try:
            if isinstance(a, argparse._StoreTrueAction):
                val = _bool(raw)
            elif isinstance(a, argparse._AppendAction):
                val = [raw]
            else:
                val = a.type(raw) if a.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}: bad value for {key!r}: {exc}") from None
        if a.choices is not None and val not in a.choices:
            raise ConfigError(f"{path}: {key} must be one of {list(a.choices)}")
        defaults[dest] = val
    subparser.set_defaults(**defaults)
    for a in subparser._actions:
        if a.dest in defaults:
            a.required = False
    return parser.parse_args(argv)


def run_config(args) -> RunConfig:
    g = lambda name, default=None: getattr(args, name, default)  # noqa: E731
    tc = TrainConfig(lr=g("lr", 0.001), epochs=g("epochs", 50), dropout_rate=g("dropout", 0.5),
                     batch_size=g("batch_size", 32), seed=g("seed", 0), clip_norm=g("clip_norm", 5.0),
                     pos_weight=g("pos_weight", 1.0))
    return RunConfig(
        data=str(Path(args.data)) if g("data") else None, channels=g("channels"),
        common_rate=g("common_rate", 4.0), segment_seconds=g("segment_seconds", 10.0),
        centering=g("centering", "per-trial"), representation=g("representation", "P"), m=g("m", 2),
        shrinkage=g("shrinkage", 1e-6), metric=g("metric", "riemann"), reference=g("reference", "subject"),
        seq_len=g("seq_len", 5), stride=g("stride", 1), standardize=g("standardize", True),
        landmark_k=g("landmark_k", 10), hidden=g("hidden", 128), layers=g("layers", 2),
        pooling=g("pooling", "last"), train=tc, protocol=g("protocol", "loso"), k=g("k", 10), seed=g("seed", 0),
    )


def _skip(out, stage, config, inputs):
    if artifacts.is_current(out, stage, config, inputs):
        print(f"{stage}: {out} is up to date")
        return True
    out.mkdir(parents=True, exist_ok=True)
    return False


def _load(cfg: RunConfig):
    recs = ingest(cfg.data)
    cfg.check_roster(recs)
    return recs


# subcommands


def cmd_synth(args):
    spec = SyntheticSpec(**{f.name: getattr(args, f.name) for f in fields(SyntheticSpec)})
    out = output_dir(args.out)
    config = asdict(spec)
    if _skip(out, "synth", config, []):
        return 0
    recs = synth(spec, out)
    artifacts.write_manifest(out, "synth", config)
    print(f"synth: wrote {len(recs)} recordings to {out}")
    return 0


def cmd_ingest_check(args):
    report = []
    recs = ingest(args.data, args.channels, report)
    subjects = sorted({r.subject_id for r in recs})
    labels = [r.label for r in recs]
    print(f"{len(recs)} recordings, {len(subjects)} subjects, {labels.count(0)} class-0 / {labels.count(1)} class-1")
    for r in recs:
        durs = ", ".join(f"{c.name}={c.duration:.2f}s" for c in r.channels)
        lm = "" if r.landmarks is None else f", landmarks {r.landmarks.points.shape[1]}"
        print(f"  {r.subject_id}/{r.trial_id} label={r.label}: {durs}{lm}")
    for line in report:
        print(f"mismatch: {line}")
    return 0


def cmd_build_spd(args):
    cfg = run_config(args)
    out = output_dir(args.out)
    config = {k: v for k, v in cfg.to_dict().items()
              if k in ("data", "channels", "common_rate", "segment_seconds", "centering", "representation", "m",
                       "shrinkage")}
    if cfg.representation != "P":
        config["m"] = 1
    m = config["m"]
    recs = _load(cfg)
    names = cfg.channels or recs[0].channel_names
    SpdConfig(m, cfg.shrinkage, cfg.centering, n_channels=len(names))
    if _skip(out, "build-spd", config, [cfg.data]):
        return 0
    segs = []
    for r in recs:
        segs.extend(assemble_segments(r, (), cfg.segment_seconds, cfg.common_rate, cfg.centering, cfg.channels))
    spd = representation(np.stack([s.data for s in segs]), cfg.representation, m, cfg.shrinkage, cfg.centering)
    artifacts.write_array(out / "spd.bin", spd)
    index = {
        "channels": list(names),
        "labels": artifacts.block_labels(names, m if cfg.representation == "P" else 1),
        "representation": cfg.representation,
        "m": m,
        "rows": [dict(subject=s.subject_id, trial=s.trial_id, start=s.start_index, label=s.label) for s in segs],
    }
    (out / artifacts.INDEX).write_text(artifacts.canonical_json(index))
    artifacts.write_manifest(out, "build-spd", config, [cfg.data])
    print(f"build-spd: {spd.shape[0]} matrices of size {spd.shape[1]} -> {out}")
    return 0


def cmd_map_tangent(args):
    src = Path(args.spd)
    out = output_dir(args.out)
    config = {"spd": str(src), "metric": args.metric, "reference": args.reference}
    if _skip(out, "map-tangent", config, [src]):
        return 0
    index = artifacts.read_index(src)
    spd = artifacts.read_array(src / "spd.bin")
    groups = np.array([r["subject"] for r in index["rows"]])
    ts = TangentSpace(args.reference, args.metric).fit(spd, groups=groups)
    vecs = ts.transform(spd, groups=groups)
    refs = {"global": ts.reference_} if args.reference == "global" else ts.references(spd, groups)
    order = sorted(refs)
    artifacts.write_array(out / "tangent.bin", vecs)
    artifacts.write_array(out / "references.bin", np.stack([refs[g] for g in order]))
    index = dict(index, reference=args.reference, metric=args.metric, reference_keys=[str(g) for g in order])
    (out / artifacts.INDEX).write_text(artifacts.canonical_json(index))
    artifacts.write_manifest(out, "map-tangent", config, [src])
    print(f"map-tangent: {vecs.shape[0]} vectors of length {vecs.shape[1]} -> {out}")
    return 0


def cmd_train(args):
    cfg = run_config(args)
    src = Path(args.tangent)
    out = output_dir(args.out)
    config = {"tangent": str(src), "seq_len": cfg.seq_len, "stride": cfg.stride, "hidden": cfg.hidden,
              "layers": cfg.layers, "pooling": cfg.pooling, "train": asdict(cfg.train)}
    if _skip(out, "train", config, [src]):
        return 0
    index = artifacts.read_index(src)
    vecs = artifacts.read_array(src / "tangent.bin")
    keys = [(r["subject"], r["trial"]) for r in index["rows"]]
    X, idx = make_sequences(vecs, keys, cfg.seq_len, cfg.stride)
    if X.shape[0] == 0:
        raise DataError(f"no trial has {cfg.seq_len} consecutive segments")
    y = np.array([index["rows"][i]["label"] for i in idx[:, 0]])
    result = train(X, y, cfg.train, cfg.hidden, cfg.layers, cfg.pooling)
    save_checkpoint(result.params, out / "model.bin")
    lines = ["epoch,loss"] + [f"{i + 1},{v!r}" for i, v in enumerate(result.loss_curve)]
    (out / "loss.csv").write_text("\n".join(lines) + "\n")
    artifacts.write_manifest(out, "train", config, [src])
    print(f"train: {X.shape[0]} sequences, final loss {result.loss_curve[-1]:.4f} -> {out}")
    return 0


def _fold_dict(f):
    d = asdict(f)
    d.pop("predictions")
    return d


def write_evaluation(out, ev):
    """``folds.json``, ``predictions.csv`` and ``summary.csv`` for one evaluation."""
    folds = {"protocol": ev.plan.protocol, "seed": ev.plan.seed, "assignments": ev.plan.assignments,
             "pooled": ev.pooled(), "fold_mean": ev.fold_mean(), "folds": [_fold_dict(f) for f in ev.folds]}
    (out / "folds.json").write_text(artifacts.canonical_json(folds))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["fold", "subject", "trial", "start", "y_true", "y_pred", "prob"])
    for f in ev.folds:
        for p in f.predictions:
            w.writerow([f.fold, p.get("subject", ""), p.get("trial", ""), p.get("start", ""), p["y_true"],
                        p["y_pred"], repr(p["prob"]) if "prob" in p else ""])
    (out / "predictions.csv").write_text(buf.getvalue())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scope", "accuracy", "f1", "tp", "fp", "tn", "fn", "skipped"])
    pooled = ev.pooled()
    w.writerow(["pooled", repr(pooled["accuracy"]), repr(pooled["f1"]), pooled["tp"], pooled["fp"], pooled["tn"],
                pooled["fn"], ""])
    mean = ev.fold_mean()
    w.writerow(["fold_mean", repr(mean["accuracy"]), repr(mean["f1"]), "", "", "", "", ""])
    for f in ev.folds:
        w.writerow([f"fold{f.fold}", repr(f.accuracy), repr(f.f1), f.tp, f.fp, f.tn, f.fn, int(f.skipped)])
    (out / "summary.csv").write_text(buf.getvalue())


def cmd_evaluate(args):
    cfg = run_config(args)
    out = output_dir(args.out)
    config = cfg.to_dict()
    if _skip(out, "evaluate", config, [cfg.data]):
        return 0
    recs = _load(cfg)
    ev = evaluate(recs, cfg.pipeline(), cfg.protocol, cfg.seed, cfg.k, n_jobs=args.n_jobs)
    write_evaluation(out, ev)
    artifacts.write_manifest(out, "evaluate", config, [cfg.data])
    pooled, mean = ev.pooled(), ev.fold_mean()
    print(f"evaluate: pooled accuracy {pooled['accuracy']:.4f} f1 {pooled['f1']:.4f} "
          f"(fold mean {mean['accuracy']:.4f} / {mean['f1']:.4f}) -> {out}")
    return 0


def parse_rows(rows):
    out = []
    for r in rows:
        if r in ("S", "C"):
            out.append((r, None))
        elif r.startswith("P") and r[1:].isdigit():
            out.append(("P", int(r[1:])))
        else:
            raise ConfigError(f"bad ablation row {r!r}; use S, C or P<m>")
    return out


def parse_modalities(items):
    mods = {}
    for item in items:
        name, sep, chans = item.partition("=")
        if not sep or not name or not _csv_list(chans):
            raise ConfigError(f"bad modality {item!r}; use NAME=CH1,CH2")
        mods[name] = _csv_list(chans)
    return mods


def cmd_ablate(args):
    cfg = run_config(args)
    out = output_dir(args.out)
    rows = parse_rows(args.rows)
    mods = parse_modalities(args.modality)
    for met in args.metrics:
        if met not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")
    config = dict(cfg.to_dict(), rows=list(args.rows), metrics=list(args.metrics), modalities=mods)
    if _skip(out, "ablate", config, [cfg.data]):
        return 0
    recs = _load(cfg)
    for chans in mods.values():
        RunConfig(data=cfg.data, channels=chans).check_roster(recs)
    grid = [AblationSpec(r, m, mod, met) for mod in ["all"] + list(mods) for met in args.metrics for r, m in rows]
    table, runs = run_ablation(grid, recs, cfg.pipeline(), cfg.protocol, cfg.seed, cfg.k, mods, n_jobs=args.n_jobs)
    (out / "ablation.csv").write_text(table.to_csv())
    details = {f"{s.row}|{s.column}": {"pooled": ev.pooled(), "fold_mean": ev.fold_mean(),
                                       "folds": [_fold_dict(f) for f in ev.folds]} for s, ev in runs.items()}
    (out / "ablation.json").write_text(artifacts.canonical_json(details))
    artifacts.write_manifest(out, "ablate", config, [cfg.data])
    print(table.to_csv(), end="")
    return 0


def _read_matrix(path):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:8] == artifacts.ARRAY_MAGIC:
        M = artifacts.read_array(path)
    else:
        M = np.loadtxt(path, delimiter=",", ndmin=2)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"{path}: expected a square matrix, got shape {M.shape}")
    return M


def cmd_heatmap(args):
    out = output_dir(args.out)
    if args.matrix:
        P = _read_matrix(args.matrix)
        labels = args.labels or [f"ch{i}" for i in range(P.shape[0])]
    else:
        src = Path(args.spd)
        index = artifacts.read_index(src)
        spd = artifacts.read_array(src / "spd.bin")
        labels = index["labels"]
        rows = index["rows"]
        if args.row is not None:
            if not 0 <= args.row < len(rows):
                raise DataError(f"--row {args.row} out of range (0..{len(rows) - 1})")
            P = spd[args.row]
        elif args.subject is not None:
            pick = [i for i, r in enumerate(rows)
                    if r["subject"] == args.subject and (args.label is None or r["label"] == args.label)]
            if not pick:
                raise DataError(f"no matrices for subject {args.subject!r}")
            P = geometric_mean(spd[pick])
        else:
            raise UsageError("heatmap --spd needs --row or --subject")
    artifacts.write_heatmap(out, P, labels, args.scale)
    print(f"heatmap: {P.shape[0]}x{P.shape[0]} -> {out}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
