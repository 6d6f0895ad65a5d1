"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the summary lines
are also written when output is captured.
"""

import time

import numpy as np
import pytest
import scipy.linalg

from conftest import gradient_check, random_spd
from spdfusion.cli import main
from spdfusion.datasets import SyntheticSpec, generate
from spdfusion.harness import PipelineConfig, accuracy_f1, evaluate, fold_features, fold_report, plan_folds
from spdfusion.manifold import geodesic_distance, geometric_mean, tangent_map, tangent_unmap, vec
from spdfusion.spdrep import assemble_blocks, block_eigenvalues, center, covariance, cross_covariance, representation
from spdfusion.symmat import logm

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def _batches(rng, count, sizes):
    """Split ``count`` cases into per-dimension batches."""
    dims = rng.integers(sizes[0], sizes[1] + 1, size=count)
    for n in np.unique(dims):
        yield int(n), int(np.sum(dims == n))


def _spd_stack(rng, n, k, spread=1.0):
    return np.stack([random_spd(rng, n, spread) for _ in range(k)])


def test_1_geometry_suite(report):
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst = dict(sym=0.0, ident=0.0, tri=-np.inf, affine=0.0, vec=0.0, roundtrip=0.0)
    for n, k in _batches(rng, 1000, (2, 12)):
        P, Q, R = (_spd_stack(rng, n, k) for _ in range(3))
        dPQ, dQP = geodesic_distance(P, Q), geodesic_distance(Q, P)
        worst["sym"] = max(worst["sym"], np.abs(dPQ - dQP).max())
        worst["ident"] = max(worst["ident"], np.abs(geodesic_distance(P, P)).max())
        # indiscernibles: a distance below 1e-8 implies matrices within 1e-6
        E = 1e-11 * rng.standard_normal((k, n, n))
        near = P + E + np.swapaxes(E, 1, 2)
        small = geodesic_distance(P, near) < 1e-8
        if small.any():
            gap = np.linalg.norm(P - near, axis=(1, 2))[small].max()
            worst["ident"] = max(worst["ident"], 0.0 if gap < 1e-6 else 1.0)
        slack = geodesic_distance(P, R) - dPQ - geodesic_distance(Q, R)
        worst["tri"] = max(worst["tri"], slack.max())
        A = rng.standard_normal((k, n, n)) + n * np.eye(n)
        At = np.swapaxes(A, 1, 2)
        worst["affine"] = max(worst["affine"], np.abs(geodesic_distance(A @ P @ At, A @ Q @ At) - dPQ).max())
        S = rng.uniform(-10, 10, (k, n, n))
        S = S + np.swapaxes(S, 1, 2)
        worst["vec"] = max(worst["vec"], (np.abs(np.linalg.norm(vec(S), axis=1) - np.linalg.norm(S, axis=(1, 2)))
                                          / np.linalg.norm(S, axis=(1, 2))).max())
        back = tangent_unmap(tangent_map(P, Q), Q)
        worst["roundtrip"] = max(worst["roundtrip"],
                                 (np.linalg.norm(back - P, axis=(1, 2)) / np.linalg.norm(P, axis=(1, 2))).max())
    elapsed = time.perf_counter() - t0
    ok = (worst["sym"] <= 1e-10 and worst["ident"] <= 1e-8 and worst["tri"] <= 1e-8 and worst["affine"] <= 1e-8
          and worst["vec"] <= 1e-15 and worst["roundtrip"] <= 1e-8 and elapsed < 30)
    detail = ", ".join(f"{k}={v:.2e}" for k, v in worst.items())
    report(1, ok, f"1000 cases per property; {detail}; {elapsed:.1f}s (< 30s)")


def _midpoint(A, B):
    Ah = np.real(scipy.linalg.sqrtm(A))
    Aih = np.linalg.inv(Ah)
    return Ah @ np.real(scipy.linalg.sqrtm(Aih @ B @ Aih)) @ Ah


def _residual(M, mats):
    w, V = np.linalg.eigh(M)
    ih = (V / np.sqrt(w)) @ V.T
    return np.linalg.norm(np.mean(logm(ih @ mats @ ih), axis=0))


def test_2_karcher_mean(report):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    two_pt = resid = perm = 0.0
    for _ in range(200):
        n, count = int(rng.integers(2, 13)), int(rng.integers(2, 21))
        mats = _spd_stack(rng, n, count)
        two_pt = max(two_pt, np.abs(geometric_mean(mats[:2]) - _midpoint(mats[0], mats[1])).max())
        M = geometric_mean(mats)
        resid = max(resid, _residual(M, mats))
        perm = max(perm, np.linalg.norm(geometric_mean(mats[rng.permutation(count)]) - M))
    elapsed = time.perf_counter() - t0
    ok = two_pt <= 1e-8 and resid <= 1e-8 and perm <= 1e-8 and elapsed < 60
    report(2, ok, f"200 sets: two-point {two_pt:.2e}, optimality {resid:.2e}, permutation {perm:.2e}; "
                  f"{elapsed:.1f}s (< 60s)")


def test_3_cross_covariance_oracle(report):
    rng = np.random.default_rng(3)
    fast = ident = 0.0
    for _ in range(200):
        D, N = int(rng.integers(2, 5)), int(rng.integers(2, 13))
        X = rng.standard_normal((D, N)) + rng.standard_normal((D, 1))
        brute = sum(np.outer(X[:, i], X[:, j]) for i in range(N) for j in range(N) if i != j) / (N * N - N)
        fast = max(fast, np.abs(cross_covariance(X) - brute).max())
        Xc = center(X, "per-segment")
        ident = max(ident, np.abs(cross_covariance(Xc) + covariance(Xc) / N).max())
    report(3, fast <= 1e-12 and ident <= 1e-12,
           f"200 segments: fast vs double sum {fast:.2e}, C + S/N {ident:.2e} (<= 1e-12)")


def test_4_block_structure(report):
    rng = np.random.default_rng(4)
    worst = 0.0
    for m in (2, 3, 4):
        for _ in range(200):
            D = int(rng.integers(2, 6))
            A, B = rng.standard_normal((2, D, D))
            S, C = A @ A.T, (B + B.T) / 2
            worst = max(worst, np.abs(block_eigenvalues(S, C, m) - np.linalg.eigvalsh(assemble_blocks(S, C, m))).max())
    recs = generate(SyntheticSpec(subjects=2, trials_per_class=1, duration=60))
    plan = plan_folds([r.subject_id for r in recs])
    fs = fold_features(recs, plan, 0, PipelineConfig(representation="S", m=1))
    fp = fold_features(recs, plan, 0, PipelineConfig(representation="P", m=1))
    same = fs.X_train.tobytes() == fp.X_train.tobytes() and fs.X_test.tobytes() == fp.X_test.tobytes()
    X = rng.standard_normal((10, 3, 40))
    same = same and representation(X, "S").tobytes() == representation(X, "P", m=1).tobytes()
    report(4, worst <= 1e-9 and same,
           f"block eigenvalues vs full eig {worst:.2e} (<= 1e-9), m in 2..4; P(m=1) == S bytewise: {same}")


def test_5_lstm_gradients(report):
    t0 = time.perf_counter()
    worst = max(gradient_check(seed) for seed in range(20))
    elapsed = time.perf_counter() - t0
    report(5, worst <= 1e-4 and elapsed < 60,
           f"20 nets: max relative error {worst:.2e} (<= 1e-4); {elapsed:.1f}s (< 60s)")


def test_6_synthetic_end_to_end(report):
    t0 = time.perf_counter()
    recs = generate(SyntheticSpec())
    p = evaluate(recs, PipelineConfig(representation="P", m=2)).pooled()
    s = evaluate(recs, PipelineConfig(representation="S", m=1)).pooled()
    null = evaluate(generate(SyntheticSpec(contrast=0.0)), PipelineConfig(representation="P", m=2)).pooled()
    elapsed = time.perf_counter() - t0
    half = 1.96 * np.sqrt(0.25 / null["n"])
    ok = (p["accuracy"] >= 0.90 and p["accuracy"] - s["accuracy"] >= 0.15
          and abs(null["accuracy"] - 0.5) <= half and elapsed < 600)
    report(6, ok, f"LOSO over 8 subjects: P(m=2) {p['accuracy']:.4f} (>= 0.90), S {s['accuracy']:.4f} "
                  f"(gap {p['accuracy'] - s['accuracy']:.4f} >= 0.15), null {null['accuracy']:.4f} "
                  f"(band 0.5 +- {half:.4f}, n={null['n']}); {elapsed:.0f}s (< 600s)")


def test_7_determinism(report, tmp_path):
    data = tmp_path / "data"
    assert main(["synth", "--out", str(data), "--subjects", "3", "--trials-per-class", "1", "--duration", "60"]) == 0
    outs = [tmp_path / "run1", tmp_path / "run2"]
    for o in outs:
        assert main(["evaluate", "--data", str(data), "--out", str(o), "--seed", "7"]) == 0
    names = ["folds.json", "predictions.csv", "summary.csv", "manifest.json"]
    same = all((outs[0] / n).read_bytes() == (outs[1] / n).read_bytes() for n in names)
    report(7, same, f"two evaluate runs, seed 7: {', '.join(names)} byte-identical: {same}")


def test_8_metric_arithmetic(report):
    acc, f1 = accuracy_f1(3, 1, 4, 2)
    rep = fold_report(0, ["s"], [1, 1, 1, 1, 1, 0, 0, 0, 0, 0], [1, 1, 1, 0, 0, 1, 0, 0, 0, 0])
    ok = acc == 0.7 and f1 == 6 / 9 and (rep.tp, rep.fp, rep.tn, rep.fn) == (3, 1, 4, 2)
    ok = ok and rep.accuracy == 0.7 and rep.f1 == 6 / 9
    report(8, ok, f"tp=3 fp=1 tn=4 fn=2 -> accuracy {acc}, f1 {f1:.4f}")
