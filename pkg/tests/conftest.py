import numpy as np
import pytest


def random_spd(rng, n, spread=1.0):
    """Well-conditioned random SPD matrix."""
    A = rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(A)
    w = np.exp(rng.uniform(-spread, spread, size=n))
    return (Q * w) @ Q.T


def random_sym(rng, n, lo=-10.0, hi=10.0):
    A = rng.uniform(lo, hi, size=(n, n))
    return (A + A.T) / 2


def np_fn(A, f):
    """Spectral function via numpy's own eigh: the independent oracle."""
    w, V = np.linalg.eigh(A)
    return (V * f(w)) @ V.T


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gradient_check(seed, h=1e-5, floor=1e-6):
    """Max relative error of analytic vs central-difference gradients on a small net.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``; the floor keeps
    coordinates whose true gradient is ~0 from dividing roundoff by roundoff.
    """
    from spdfusion.seqnet import backward, dropout_masks, forward, init_params, loss

    rng = np.random.default_rng(seed)
    F, B, T = int(rng.integers(2, 5)), int(rng.integers(1, 4)), 3
    p = init_params(F, 4, 2, seed=seed, pooling="last" if seed % 2 == 0 else "mean")
    p = p.with_flat(p.flat() + rng.normal(0, 0.3, p.flat().size))
    X = rng.normal(size=(B, T, F))
    y = rng.integers(0, 2, B)
    masks = dropout_masks(p, (B, T), 0.3, rng) if seed % 3 == 0 else None
    mode = "train" if masks is not None else "eval"
    pw = 1.0 if seed % 4 else 2.5
    _, g = backward(p, X, y, mode, masks=masks, pos_weight=pw)
    analytic = np.concatenate([g[k].ravel() for k in p.names()])

    def f(theta):
        return float(np.mean(loss(forward(p.with_flat(theta), X, mode, masks=masks), y, pw)))

    theta = p.flat()
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h
        numeric[i] = (f(theta + e) - f(theta - e)) / (2 * h)
    rel = np.abs(analytic - numeric) / np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(rel.max())
