"""Stacked LSTM binary classifier in plain numpy.

Forward pass, backpropagation through time, binary cross-entropy and Adam
are written out by hand. Sequences in a batch share one length ``T``; inputs
are arrays of shape ``(batch, T, features)``.

Parameter layout (gate order input, forget, cell, output)::

    l{k}.Wx  (in_k, 4H)    l{k}.Wh  (H, 4H)    l{k}.b  (4H,)
    head.w   (H,)          head.b   (1,)
"""

import struct
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from .exceptions import ConfigError, DataError, DimensionMismatch, NonFinite, SingleClass

PROB_CLAMP = 1e-7
CHECKPOINT_MAGIC = b"SPDLSTM\x00"
CHECKPOINT_VERSION = 1


@dataclass
class TrainConfig:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 50
    dropout_rate: float = 0.5
    batch_size: int = 32
    seed: int = 0
    clip_norm: Optional[float] = 5.0
    pos_weight: float = 1.0

    def __post_init__(self):
        if not self.lr >= 0:
            raise ConfigError("lr must be >= 0")
        if not 0 <= self.dropout_rate < 1:
            raise ConfigError("dropout_rate must lie in [0, 1)")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")


@dataclass
class NetParams:
    input_dim: int
    hidden: int = 128
    layers: int = 2
    pooling: str = "last"
    arrays: Dict[str, np.ndarray] = field(default_factory=dict)

    def names(self):
        out = []
        for k in range(self.layers):
            out += [f"l{k}.Wx", f"l{k}.Wh", f"l{k}.b"]
        return out + ["head.w", "head.b"]

    def shapes(self):
        H = self.hidden
        out = {}
        for k in range(self.layers):
            fan = self.input_dim if k == 0 else H
            out[f"l{k}.Wx"] = (fan, 4 * H)
            out[f"l{k}.Wh"] = (H, 4 * H)
            out[f"l{k}.b"] = (4 * H,)
        out["head.w"] = (H,)
        out["head.b"] = (1,)
        return out

    def copy(self):
        return NetParams(self.input_dim, self.hidden, self.layers, self.pooling,
                         {k: v.copy() for k, v in self.arrays.items()})

    def flat(self):
        return np.concatenate([self.arrays[k].ravel() for k in self.names()])

    def with_flat(self, theta):
        out = self.copy()
        i = 0
        for k, shp in self.shapes().items():
            size = int(np.prod(shp))
            out.arrays[k] = np.asarray(theta[i:i + size], dtype=np.float64).reshape(shp)
            i += size
        return out


def init_params(input_dim, hidden=128, layers=2, seed=0, pooling="last") -> NetParams:
    """Uniform(+-1/sqrt(fan_in)) weights, forget-gate bias 1, zero other biases."""
    if pooling not in ("last", "mean"):
        raise ConfigError(f"pooling must be 'last' or 'mean', got {pooling!r}")
    rng = np.random.default_rng(seed)
    p = NetParams(input_dim, hidden, layers, pooling)
    for name, shp in p.shapes().items():
        if name.endswith(".b") and name.startswith("l"):
            b = np.zeros(shp)
            b[hidden:2 * hidden] = 1.0
            p.arrays[name] = b
        elif name == "head.b":
            p.arrays[name] = np.zeros(shp)
        else:
            bound = 1.0 / np.sqrt(shp[0])
            p.arrays[name] = rng.uniform(-bound, bound, size=shp)
    return p


def zero_params(input_dim, hidden=128, layers=2, pooling="last") -> NetParams:
    p = NetParams(input_dim, hidden, layers, pooling)
    p.arrays = {k: np.zeros(s) for k, s in p.shapes().items()}
    return p


def _sigmoid(z):
    # tanh form never overflows
    return 0.5 + 0.5 * np.tanh(0.5 * z)


def _check_input(params, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise DimensionMismatch(f"expected (batch, T, features), got shape {X.shape}")
    if X.shape[2] != params.input_dim:
        raise DimensionMismatch(f"network expects {params.input_dim} features, got {X.shape[2]}")
    if X.shape[1] < 1:
        raise DimensionMismatch("sequences need at least one step")
    return X


def dropout_masks(params, shape, rate, rng):
    """Inverted-dropout masks, one ``(B, T, H)`` array per LSTM layer."""
    if rate == 0:
        return None
    B, T = shape
    keep = 1.0 - rate
    return [(rng.random((B, T, params.hidden)) < keep) / keep for _ in range(params.layers)]


def forward(params: NetParams, X, mode="eval", rng=None, masks=None, dropout_rate=0.5, cache=False):
    """Probabilities of the positive class for a batch of sequences.

    In ``"train"`` mode dropout is applied to the output of every LSTM layer
    (masks drawn from ``rng`` unless given); ``"eval"`` is deterministic.
    """
    X = _check_input(params, X)
    B, T, _ = X.shape
    H = params.hidden
    if mode == "train" and masks is None and dropout_rate > 0:
        if rng is None:
            raise ValueError("train mode needs an rng or explicit masks")
        masks = dropout_masks(params, (B, T), dropout_rate, rng)
    if mode != "train":
        masks = None
    layer_caches = []
    U = X
    for k in range(params.layers):
        Wx, Wh, b = params.arrays[f"l{k}.Wx"], params.arrays[f"l{k}.Wh"], params.arrays[f"l{k}.b"]
        pre = U @ Wx + b
        h = np.zeros((B, H))
        c = np.zeros((B, H))
        hs = np.empty((B, T, H))
        gates = np.empty((B, T, 4 * H))
        cs = np.empty((B, T + 1, H))
        cs[:, 0] = c
        for t in range(T):
            z = pre[:, t] + h @ Wh
            g = gates[:, t]
            np.tanh(z, out=g)
            # sigmoid(x) = (1 + tanh(x / 2)) / 2 on the i, f, o blocks
            g[:, :2 * H] = 0.5 + 0.5 * np.tanh(0.5 * z[:, :2 * H])
            g[:, 3 * H:] = 0.5 + 0.5 * np.tanh(0.5 * z[:, 3 * H:])
            c = g[:, H:2 * H] * c + g[:, :H] * g[:, 2 * H:3 * H]
            cs[:, t + 1] = c
            h = g[:, 3 * H:] * np.tanh(c)
            hs[:, t] = h
        out = hs * masks[k] if masks is not None else hs
        layer_caches.append((U, hs, gates, cs))
        U = out
    feat = U[:, -1] if params.pooling == "last" else U.mean(axis=1)
    logit = feat @ params.arrays["head.w"] + params.arrays["head.b"][0]
    prob = _sigmoid(logit)
    if cache:
        return prob, dict(layers=layer_caches, masks=masks, feat=feat, top=U, logit=logit)
    return prob


def loss(prob, label, pos_weight=1.0):
    """Binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7]."""
    p = np.clip(np.asarray(prob, dtype=np.float64), PROB_CLAMP, 1 - PROB_CLAMP)
    y = np.asarray(label, dtype=np.float64)
    out = -(pos_weight * y * np.log(p) + (1 - y) * np.log(1 - p))
    return float(out) if out.ndim == 0 else out


def backward(params: NetParams, X, y, mode="eval", rng=None, masks=None, dropout_rate=0.5, pos_weight=1.0):
    """Mean batch loss and its gradient with respect to every parameter.

    Returns ``(loss, grads)`` with ``grads`` keyed like ``params.arrays``.
    """
    X = _check_input(params, X)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.size != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} sequences but {y.size} labels")
    prob, cache = forward(params, X, mode, rng, masks, dropout_rate, cache=True)
    B, T, _ = X.shape
    H = params.hidden
    L = float(np.mean(loss(prob, y, pos_weight)))

    inside = (prob > PROB_CLAMP) & (prob < 1 - PROB_CLAMP)
    dlogit = (pos_weight * y * (prob - 1) + (1 - y) * prob) * inside / B
    grads = {"head.w": cache["feat"].T @ dlogit, "head.b": np.array([dlogit.sum()])}
    dfeat = dlogit[:, None] * params.arrays["head.w"][None, :]
    dtop = np.zeros((B, T, H))
    if params.pooling == "last":
        dtop[:, -1] = dfeat
    else:
        dtop += dfeat[:, None, :] / T

    masks = cache["masks"]
    for k in reversed(range(params.layers)):
        U, hs, gates, cs = cache["layers"][k]
        dhs = dtop * masks[k] if masks is not None else dtop
        Wx, Wh = params.arrays[f"l{k}.Wx"], params.arrays[f"l{k}.Wh"]
        dpre = np.empty((B, T, 4 * H))
        # local gate derivatives for all steps at once
        tcs = np.tanh(cs[:, 1:])
        gi, gf, gg, go = gates[..., :H], gates[..., H:2 * H], gates[..., 2 * H:3 * H], gates[..., 3 * H:]
        d_i = gg * gi * (1 - gi)
        d_f = cs[:, :-1] * gf * (1 - gf)
        d_g = gi * (1 - gg * gg)
        d_o = tcs * go * (1 - go)
        d_c = go * (1 - tcs * tcs)
        dh_next = np.zeros((B, H))
        dc_next = np.zeros((B, H))
        for t in reversed(range(T)):
            dh = dhs[:, t] + dh_next
            dc = dc_next + dh * d_c[:, t]
            dz = dpre[:, t]
            dz[:, :H] = dc * d_i[:, t]
            dz[:, H:2 * H] = dc * d_f[:, t]
            dz[:, 2 * H:3 * H] = dc * d_g[:, t]
            dz[:, 3 * H:] = dh * d_o[:, t]
            dh_next = dz @ Wh.T
            dc_next = dc * gf[:, t]
        flat = dpre.reshape(B * T, 4 * H)
        grads[f"l{k}.Wx"] = U.reshape(B * T, -1).T @ flat
        h_prev = np.concatenate([np.zeros((B, 1, H)), hs[:, :-1]], axis=1)
        grads[f"l{k}.Wh"] = h_prev.reshape(B * T, H).T @ flat
        grads[f"l{k}.b"] = flat.sum(axis=0)
        dtop = dpre @ Wx.T
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFinite(f"non-finite gradient in {name} (loss {L:.6g}, max |g| {np.nanmax(np.abs(g)):.3g})")
    return L, grads


class Adam:
    """Adam with bias correction over a dict of arrays."""

    def __init__(self, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = {}
        self.v = {}

    def step(self, arrays, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1 ** self.t
        c2 = 1 - b2 ** self.t
        for name, g in grads.items():
            m = self.m.get(name)
            if m is None:
                m = self.m[name] = np.zeros_like(g)
                self.v[name] = np.zeros_like(g)
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            arrays[name] = arrays[name] - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def clip_gradients(grads, max_norm):
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if max_norm is not None and total > max_norm:
        scale = max_norm / total
        grads = {k: g * scale for k, g in grads.items()}
    return grads, total


@dataclass
class TrainResult:
    params: NetParams
    loss_curve: List[float]


def train(X, y, cfg: TrainConfig = TrainConfig(), hidden=128, layers=2, pooling="last", params=None) -> TrainResult:
    """Fit the network with mini-batch Adam.

    All randomness (initialization, shuffling, dropout) comes from one
    generator seeded with ``cfg.seed``, so a run is bit-reproducible.

    Raises
    ------
    SingleClass
        If ``y`` does not contain both labels.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).ravel()
    if X.ndim != 3 or X.shape[0] == 0:
        raise DataError(f"expected a non-empty (n, T, features) array, got shape {X.shape}")
    if y.size != X.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} sequences but {y.size} labels")
    if not set(np.unique(y).tolist()) <= {0, 1}:
        raise DataError("labels must be 0 or 1")
    if np.unique(y).size < 2:
        raise SingleClass("training data contains a single class")
    rng = np.random.default_rng(cfg.seed)
    if params is None:
        params = init_params(X.shape[2], hidden, layers, seed=int(rng.integers(2**63)), pooling=pooling)
    else:
        params = params.copy()
    opt = Adam(cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
    curve = []
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            L, grads = backward(params, X[idx], y[idx], "train", rng, None, cfg.dropout_rate, cfg.pos_weight)
            grads, _ = clip_gradients(grads, cfg.clip_norm)
            opt.step(params.arrays, grads)
            total += L * idx.size
        curve.append(total / n)
    return TrainResult(params, curve)


def predict(params: NetParams, X, threshold=0.5):
    """Eval-mode labels and probabilities; ``prob >= threshold`` is positive."""
    prob = forward(params, X, "eval")
    return (prob >= threshold).astype(int), prob


def save_checkpoint(params: NetParams, path):
    """Write the versioned binary checkpoint.

    Layout (little-endian): 8-byte magic ``SPDLSTM\\0``, then uint32
    version, input_dim, hidden, layers, pooling (0 = last, 1 = mean),
    followed by every array of :meth:`NetParams.names` in order as row-major
    float64.
    """
    header = CHECKPOINT_MAGIC + struct.pack(
        "<5I", CHECKPOINT_VERSION, params.input_dim, params.hidden, params.layers,
        0 if params.pooling == "last" else 1,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for name in params.names():
            fh.write(np.ascontiguousarray(params.arrays[name], dtype="<f8").tobytes())


def load_checkpoint(path) -> NetParams:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:8] != CHECKPOINT_MAGIC:
        raise DataError(f"{path}: not a network checkpoint (bad magic)")
    version, input_dim, hidden, layers, pool = struct.unpack("<5I", raw[8:28])
    if version != CHECKPOINT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    p = NetParams(input_dim, hidden, layers, "last" if pool == 0 else "mean")
    theta = np.frombuffer(raw[28:], dtype="<f8")
    expected = sum(int(np.prod(s)) for s in p.shapes().values())
    if theta.size != expected:
        raise DataError(f"{path}: expected {expected} parameters, found {theta.size}")
    return p.with_flat(theta.astype(np.float64))


class LSTMClassifier(BaseEstimator, ClassifierMixin):
    """Scikit-learn wrapper: ``fit(X, y)`` with ``X`` of shape ``(n, T, features)``."""

    def __init__(self, hidden=128, layers=2, lr=0.001, beta1=0.9, beta2=0.999, eps=1e-8, epochs=50,
                 dropout_rate=0.5, batch_size=32, seed=0, clip_norm=5.0, pos_weight=1.0, pooling="last"):
        self.hidden = hidden
        self.layers = layers
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.epochs = epochs
        self.dropout_rate = dropout_rate
        self.batch_size = batch_size
        self.seed = seed
        self.clip_norm = clip_norm
        self.pos_weight = pos_weight
        self.pooling = pooling

    def train_config(self):
        return TrainConfig(self.lr, self.beta1, self.beta2, self.eps, self.epochs, self.dropout_rate,
                           self.batch_size, self.seed, self.clip_norm, self.pos_weight)

    def fit(self, X, y):
        res = train(X, y, self.train_config(), self.hidden, self.layers, self.pooling)
        self.params_ = res.params
        self.loss_curve_ = res.loss_curve
        self.classes_ = np.array([0, 1])
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "params_")
        p = forward(self.params_, X, "eval")
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] >= 0.5).astype(int)
