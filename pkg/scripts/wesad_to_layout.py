"""Convert WESAD subject pickles into the spdfusion dataset layout.

Usage::

    python3 scripts/wesad_to_layout.py WESAD_ROOT OUT_ROOT [--sources wrist,chest] [--chest-decimate 35]

``WESAD_ROOT`` holds ``S2/S2.pkl``, ``S3/S3.pkl`` and so on; the dataset is
licensed and must be obtained separately. Each contiguous run of a study
condition becomes one trial. Stress runs are labelled 1, baseline and
amusement runs 0; all other conditions are dropped. Channels are named
``<source>_<signal>[_<axis>]`` and keep their native rates (chest 700 Hz,
wrist ACC 32 Hz, BVP 64 Hz, EDA and TEMP 4 Hz) unless ``--chest-decimate``
block-averages the chest signals by an integer factor.
"""

import argparse
import pickle
import sys
from pathlib import Path

import numpy as np

from spdfusion.datasets import write_recording
from spdfusion.signals import Channel, Recording

LABEL_RATE = 700.0
CHEST_RATE = 700.0
WRIST_RATES = {"ACC": 32.0, "BVP": 64.0, "EDA": 4.0, "TEMP": 4.0}
CONDITIONS = {1: ("baseline", 0), 2: ("stress", 1), 3: ("amusement", 0)}


def condition_runs(labels):
    """``(condition, start, stop)`` for each contiguous run of a kept condition, at label rate."""
    labels = np.asarray(labels).ravel()
    edges = np.flatnonzero(np.diff(labels)) + 1
    starts = np.concatenate([[0], edges])
    stops = np.concatenate([edges, [labels.size]])
    return [(int(labels[a]), int(a), int(b)) for a, b in zip(starts, stops) if int(labels[a]) in CONDITIONS]


def _columns(name, arr):
    arr = np.asarray(arr, dtype=np.float64)
    arr = arr.reshape(arr.shape[0], -1)
    if arr.shape[1] == 1:
        return [(name, arr[:, 0])]
    return [(f"{name}_{'xyz'[k]}", arr[:, k]) for k in range(arr.shape[1])]


def _decimate(x, factor):
    if factor <= 1:
        return x
    n = x.size // factor
    return x[: n * factor].reshape(n, factor).mean(axis=1)


def subject_recordings(data, subject, sources=("wrist", "chest"), chest_decimate=1):
    """Slice one loaded WESAD pickle into ``Recording`` objects."""
    signals = data["signal"]
    recs = []
    for j, (cond, a, b) in enumerate(condition_runs(data["label"])):
        chans = []
        for source in sources:
            for sig, arr in sorted(signals[source].items()):
                rate = CHEST_RATE if source == "chest" else WRIST_RATES[sig]
                lo, hi = int(a * rate / LABEL_RATE), int(b * rate / LABEL_RATE)
                for name, col in _columns(f"{source}_{sig}", arr):
                    x, r = col[lo:hi], rate
                    if source == "chest":
                        x, r = _decimate(x, chest_decimate), rate / max(chest_decimate, 1)
                    chans.append(Channel(name.lower(), r, x))
        name, label = CONDITIONS[cond]
        recs.append(Recording(subject, f"t{j:02d}_{name}", label, chans))
    return recs


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    p.add_argument("wesad_root")
    p.add_argument("out_root")
    p.add_argument("--sources", default="wrist,chest", help="comma-separated subset of wrist,chest")
    p.add_argument("--chest-decimate", type=int, default=1)
    args = p.parse_args(argv)
    sources = [s for s in args.sources.split(",") if s]
    if not set(sources) <= {"wrist", "chest"}:
        p.error("--sources takes wrist and/or chest")
    pickles = sorted(Path(args.wesad_root).glob("S*/S*.pkl"))
    if not pickles:
        print(f"no S*/S*.pkl under {args.wesad_root}", file=sys.stderr)
        return 2
    for pkl in pickles:
        with open(pkl, "rb") as fh:
            data = pickle.load(fh, encoding="latin1")
        for rec in subject_recordings(data, pkl.stem, sources, args.chest_decimate):
            write_recording(rec, args.out_root)
        print(f"{pkl.stem}: done")
    return 0


if __name__ == "__main__":
    sys.exit(main())
