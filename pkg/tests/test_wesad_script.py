"""The WESAD converter on a small fabricated pickle with the same structure."""

import importlib.util
import pickle
from pathlib import Path

import numpy as np
import pytest

from spdfusion.datasets import ingest

SCRIPT = Path(__file__).resolve().parents[1] / "scripts" / "wesad_to_layout.py"


@pytest.fixture(scope="module")
def wesad():
    spec = importlib.util.spec_from_file_location("wesad_to_layout", SCRIPT)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def _fake_subject(rng):
    # 0 transient, 1 baseline, 2 stress, 0, 3 amusement, 4 meditation; 2 s each at 700 Hz
    label = np.repeat([0, 1, 2, 0, 3, 4], 1400)
    n = label.size
    secs = n / 700
    return {
        "label": label,
        "subject": "S2",
        "signal": {
            "chest": {"ECG": rng.standard_normal((n, 1)), "ACC": rng.standard_normal((n, 3))},
            "wrist": {"EDA": rng.standard_normal((int(secs * 4), 1)),
                      "BVP": rng.standard_normal((int(secs * 64), 1))},
        },
    }


def test_condition_runs(wesad):
    runs = wesad.condition_runs([0, 1, 1, 2, 2, 2, 0, 3, 5])
    assert runs == [(1, 1, 3), (2, 3, 6), (3, 7, 8)]


def test_recordings_and_rates(wesad, rng):
    recs = wesad.subject_recordings(_fake_subject(rng), "S2", chest_decimate=7)
    assert [(r.trial_id, r.label) for r in recs] == [("t00_baseline", 0), ("t01_stress", 1), ("t02_amusement", 0)]
    r = recs[1]
    names = r.channel_names
    assert names == ["wrist_bvp", "wrist_eda", "chest_acc_x", "chest_acc_y", "chest_acc_z", "chest_ecg"]
    assert r.channel("wrist_eda").samples.size == 8
    assert r.channel("wrist_bvp").samples.size == 128
    ecg = r.channel("chest_ecg")
    assert ecg.rate == 100.0 and ecg.samples.size == 200


def test_end_to_end_layout(wesad, rng, tmp_path):
    src = tmp_path / "WESAD" / "S2"
    src.mkdir(parents=True)
    with open(src / "S2.pkl", "wb") as fh:
        pickle.dump(_fake_subject(rng), fh)
    out = tmp_path / "layout"
    assert wesad.main([str(tmp_path / "WESAD"), str(out), "--sources", "wrist"]) == 0
    recs = ingest(out)
    assert sorted(r.label for r in recs) == [0, 0, 1]
    assert all(r.channel_names == ["wrist_bvp", "wrist_eda"] for r in recs)


def test_missing_root(wesad, tmp_path):
    assert wesad.main([str(tmp_path), str(tmp_path / "out")]) == 2
