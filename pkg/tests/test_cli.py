import numpy as np
import pytest

from spdfusion import artifacts
from spdfusion.cli import main
from spdfusion.datasets import write_recording
from spdfusion.signals import Channel, Recording

TINY = ["--hidden", "4", "--epochs", "2"]


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("data") / "ds"
    assert main(["synth", "--out", str(root), "--subjects", "3", "--trials-per-class", "1", "--duration", "60"]) == 0
    return root


def test_synth_rerun_is_noop(dataset, capsys):
    before = {p: p.read_bytes() for p in dataset.rglob("*") if p.is_file()}
    assert main(["synth", "--out", str(dataset), "--subjects", "3", "--trials-per-class", "1",
                 "--duration", "60"]) == 0
    assert "up to date" in capsys.readouterr().out
    assert {p: p.read_bytes() for p in dataset.rglob("*") if p.is_file()} == before


def test_ingest_check(dataset, capsys):
    assert main(["ingest-check", "--data", str(dataset)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("6 recordings, 3 subjects")


def test_usage_errors(dataset):
    assert main(["nonsense"]) == 1
    assert main(["build-spd", "--data", str(dataset)]) == 1
    assert main(["build-spd", "--data", str(dataset), "--out", "x", "--m", "two"]) == 1


def test_data_errors(tmp_path, dataset, capsys):
    assert main(["ingest-check", "--data", str(tmp_path / "missing")]) == 2
    assert main(["build-spd", "--data", str(dataset), "--out", str(tmp_path / "o"), "--m", "40"]) == 2
    assert "SpdConfig" in capsys.readouterr().err
    assert main(["build-spd", "--data", str(dataset), "--out", str(tmp_path / "o"), "--channels", "nope"]) == 2


def test_numerical_error_exit(tmp_path):
    root = tmp_path / "flat"
    rng = np.random.default_rng(0)
    for s in range(2):
        write_recording(Recording(f"s{s}", "t0", s, [Channel("a", 4.0, rng.standard_normal(80)),
                                                      Channel("b", 4.0, np.full(80, 2.0))]), root)
    args = ["build-spd", "--data", str(root), "--out", str(tmp_path / "o"), "--representation", "S",
            "--shrinkage", "0"]
    assert main(args) == 3


def test_stage_chain(dataset, tmp_path):
    spd, tan, model, hm = (tmp_path / n for n in ("spd", "tan", "model", "hm"))
    assert main(["build-spd", "--data", str(dataset), "--out", str(spd)]) == 0
    index = artifacts.read_index(spd)
    mats = artifacts.read_array(spd / "spd.bin")
    assert mats.shape == (len(index["rows"]), 8, 8)
    assert index["labels"][4] == "motion_0@1"
    assert main(["map-tangent", "--spd", str(spd), "--out", str(tan)]) == 0
    assert artifacts.read_array(tan / "tangent.bin").shape == (mats.shape[0], 36)
    assert artifacts.read_array(tan / "references.bin").shape == (3, 8, 8)
    assert main(["train", "--tangent", str(tan), "--out", str(model)] + TINY) == 0
    assert (model / "model.bin").read_bytes()[:8] == b"SPDLSTM\x00"
    assert (model / "loss.csv").read_text().startswith("epoch,loss\n1,")
    assert main(["heatmap", "--spd", str(spd), "--subject", "s01", "--label", "1", "--out", str(hm)]) == 0
    assert artifacts.read_pgm(hm / "heatmap.pgm").shape == (64, 64)
    assert main(["heatmap", "--spd", str(spd), "--row", "999", "--out", str(hm)]) == 2


def test_heatmap_identity(tmp_path):
    (tmp_path / "eye.csv").write_text("1,0,0\n0,1,0\n0,0,1\n")
    assert main(["heatmap", "--matrix", str(tmp_path / "eye.csv"), "--scale", "1", "--out", str(tmp_path)]) == 0
    np.testing.assert_array_equal(artifacts.read_pgm(tmp_path / "heatmap.pgm"), 255 * np.eye(3, dtype=np.uint8))


def test_config_file_and_precedence(dataset, tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[run]\nm = 3\nsegment-seconds = 5\n")
    assert main(["build-spd", "--config", str(ini), "--data", str(dataset), "--out", str(tmp_path / "a")]) == 0
    assert artifacts.read_array(tmp_path / "a" / "spd.bin").shape[1:] == (12, 12)
    assert main(["build-spd", "--config", str(ini), "--data", str(dataset), "--out", str(tmp_path / "b"),
                 "--m", "1"]) == 0
    assert artifacts.read_array(tmp_path / "b" / "spd.bin").shape[1:] == (4, 4)
    ini.write_text("[run]\nbogus = 1\n")
    assert main(["build-spd", "--config", str(ini), "--data", str(dataset), "--out", str(tmp_path / "c")]) == 2


def test_output_root_env(dataset, tmp_path, monkeypatch):
    monkeypatch.setenv("SPDFUSION_OUTPUT_ROOT", str(tmp_path))
    assert main(["build-spd", "--data", str(dataset), "--out", "rel"]) == 0
    assert (tmp_path / "rel" / "spd.bin").is_file()


def test_evaluate_reports_and_determinism(dataset, tmp_path, capsys):
    outs = [tmp_path / "e1", tmp_path / "e2"]
    for o in outs:
        assert main(["evaluate", "--data", str(dataset), "--out", str(o)] + TINY) == 0
    for name in ("folds.json", "predictions.csv", "summary.csv", "manifest.json"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    summary = (outs[0] / "summary.csv").read_text().splitlines()
    assert summary[0] == "scope,accuracy,f1,tp,fp,tn,fn,skipped"
    assert summary[1].startswith("pooled,") and len(summary) == 3 + 3
    capsys.readouterr()
    assert main(["evaluate", "--data", str(dataset), "--out", str(outs[0])] + TINY) == 0
    assert "up to date" in capsys.readouterr().out


def test_ablate(dataset, tmp_path):
    out = tmp_path / "abl"
    args = ["ablate", "--data", str(dataset), "--out", str(out), "--rows", "S,P1", "--modality",
            "physio=physio_0,physio_1", "--protocol", "kfold", "--k", "3"] + TINY
    assert main(args) == 0
    lines = (out / "ablation.csv").read_text().splitlines()
    assert lines[0].startswith("representation,all/riemann/pooled_accuracy")
    assert [l.split(",")[0] for l in lines[1:]] == ["S", "P(m=1)"]
    assert lines[1].split(",")[1:] == lines[2].split(",")[1:]
    assert main(args[:-4] + ["--rows", "Q"]) == 2
