"""Covariance, cross-covariance and block SPD representations of segments."""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import BlockMismatch, ConfigError, DegenerateSegment, NonFinite, NotPositiveDefinite
from .symmat import eig_sym, sym

MAX_BLOCK_DIM = 128
CENTERING_MODES = ("per-trial", "per-segment", "none")


@dataclass(frozen=True)
class Segment:
    """A ``D x N`` window of synchronized channels plus its provenance."""

    data: np.ndarray
    subject_id: str
    trial_id: str
    start_index: int = 0
    label: Optional[int] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DegenerateSegment(f"segment data must be 2-D, got shape {data.shape}")
        D, N = data.shape
        if D < 2:
            raise DegenerateSegment(f"segment needs at least 2 channels, got {D}")
        if N < 2:
            raise DegenerateSegment(f"segment needs at least 2 time instants, got {N}")
        if not np.all(np.isfinite(data)):
            raise NonFinite("segment contains NaN or inf samples")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def n_channels(self):
        return self.data.shape[0]

    @property
    def n_times(self):
        return self.data.shape[1]


@dataclass(frozen=True)
class SpdConfig:
    """Block multiplicity ``m``, relative ridge ``shrinkage`` and centering mode.

    ``n_channels`` is optional; when given the ``m * D <= 128`` cap is
    enforced at construction, otherwise at first use.
    """

    m: int = 2
    shrinkage: float = 1e-6
    centering: str = "per-trial"
    n_channels: Optional[int] = None

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ConfigError(f"SpdConfig: m must be an integer >= 1, got {self.m}")
        if not self.shrinkage >= 0:
            raise ConfigError(f"SpdConfig: shrinkage must be >= 0, got {self.shrinkage}")
        if self.centering not in CENTERING_MODES:
            raise ConfigError(f"SpdConfig: centering must be one of {CENTERING_MODES}, got {self.centering!r}")
        if self.n_channels is not None:
            self.check_channels(self.n_channels)

    def check_channels(self, D):
        if self.m * D > MAX_BLOCK_DIM:
            raise ConfigError(
                f"SpdConfig: m*D = {self.m}*{D} = {self.m * D} exceeds the cap of {MAX_BLOCK_DIM}"
            )


def _as_data(seg):
    X = seg.data if isinstance(seg, Segment) else np.asarray(seg, dtype=np.float64)
    if X.shape[-1] < 2:
        raise DegenerateSegment(f"need N >= 2 time instants, got {X.shape[-1]}")
    return X


def center(X, mode="per-segment"):
    """Subtract each channel's mean over the last axis (``per-segment``) or not."""
    X = np.asarray(X, dtype=np.float64)
    if mode == "per-segment":
        return X - X.mean(axis=-1, keepdims=True)
    if mode in ("none", "per-trial"):
        # per-trial centering happens before slicing (see signals.assemble_segments)
        return X
    raise ConfigError(f"unknown centering mode {mode!r}")


def covariance(seg) -> np.ndarray:
    """Second moment ``X X^T / (N - 1)`` of an already-centered segment.

    Accepts a :class:`Segment`, a ``(D, N)`` array or a stack ``(..., D, N)``.
    """
    X = _as_data(seg)
    N = X.shape[-1]
    S = X @ np.swapaxes(X, -1, -2) / (N - 1)
    return sym(S)


def cross_covariance(seg) -> np.ndarray:
    """Mean outer product of sample pairs at distinct time instants.

    Uses ``sum_{i != j} x_i x_j^T = s s^T - sum_i x_i x_i^T`` with ``s`` the
    column sum, which costs O(D^2 N) rather than O(D^2 N^2).
    """
    X = _as_data(seg)
    N = X.shape[-1]
    s = X.sum(axis=-1)
    outer = s[..., :, None] * s[..., None, :]
    second = X @ np.swapaxes(X, -1, -2)
    return sym((outer - second) / (N * N - N))


def shrink(S, shrinkage):
    """Ridge ``S + shrinkage * trace(S) / D * I``."""
    S = np.asarray(S, dtype=np.float64)
    if shrinkage == 0:
        return S
    D = S.shape[-1]
    tr = np.trace(S, axis1=-2, axis2=-1)
    return S + (shrinkage * tr / D)[..., None, None] * np.eye(D)


def assemble_blocks(S, C, m):
    """Place ``S`` on the ``m`` diagonal blocks and ``C`` everywhere else."""
    S = np.asarray(S, dtype=np.float64)
    C = np.asarray(C, dtype=np.float64)
    if S.shape != C.shape:
        raise BlockMismatch(f"S has shape {S.shape} but C has shape {C.shape}")
    D = S.shape[-1]
    lead = S.shape[:-2]
    P = np.empty(lead + (m * D, m * D))
    for a in range(m):
        for b in range(m):
            P[..., a * D:(a + 1) * D, b * D:(b + 1) * D] = S if a == b else C
    return P


def block_eigenvalues(S, C, m):
    """Spectrum of the block matrix from its two ``D x D`` generators.

    ``S + (m-1) C`` contributes once and ``S - C`` contributes ``m - 1``
    times; returned sorted ascending.
    """
    parts = [eig_sym(S + (m - 1) * C).values]
    if m > 1:
        parts += [eig_sym(S - C).values] * (m - 1)
    return np.sort(np.concatenate(parts, axis=-1), axis=-1)


def block_p(S, C, cfg: SpdConfig) -> np.ndarray:
    """Block SPD matrix with ``S`` (after ridge) on the diagonal, ``C`` elsewhere.

    Positive definiteness is validated on the two small generators
    ``S + (m-1) C`` and ``S - C`` instead of the assembled matrix.

    Raises
    ------
    BlockMismatch
        If ``S`` and ``C`` have different shapes.
    NotPositiveDefinite
        With the smallest offending eigenvalue in ``min_eig``.
    """
    S = sym(S)
    C = sym(C)
    if S.shape != C.shape:
        raise BlockMismatch(f"S has shape {S.shape} but C has shape {C.shape}")
    m = cfg.m
    cfg.check_channels(S.shape[-1])
    S = shrink(S, cfg.shrinkage)
    lo = float(np.min(eig_sym(S + (m - 1) * C).values))
    if m > 1:
        lo = min(lo, float(np.min(eig_sym(S - C).values)))
    if not lo > 0:
        raise NotPositiveDefinite(
            f"block matrix (m={m}) is not positive definite; smallest eigenvalue {lo:.6g}",
            min_eig=lo,
        )
    return assemble_blocks(S, C, m) if m > 1 else S


def segment_to_spd(seg, cfg: SpdConfig) -> np.ndarray:
    """Segment -> (m D) x (m D) SPD matrix; ``seg`` may also be a stack."""
    X = center(_as_data(seg), cfg.centering)
    return block_p(covariance(X), cross_covariance(X), cfg)


def representation(X, kind="P", m=2, shrinkage=1e-6, centering="per-trial"):
    """SPD matrices for the ablation variants.

    ``kind`` is ``"S"`` (ridged covariance), ``"P"`` (block matrix with ``m``
    blocks) or ``"C"``. The cross-covariance alone is generally indefinite;
    since ``C >= -S / N``, the ``"C"`` variant adds ``trace(S) / D`` to its
    diagonal, which makes it positive definite whenever ``N > D``.
    """
    X = center(_as_data(X), centering)
    if kind == "S":
        return block_p(covariance(X), np.zeros(X.shape[:-1] + (X.shape[-2],)), SpdConfig(1, shrinkage, centering))
    if kind == "P":
        return block_p(covariance(X), cross_covariance(X), SpdConfig(m, shrinkage, centering))
    if kind == "C":
        S = covariance(X)
        D = S.shape[-1]
        Cs = cross_covariance(X) + (np.trace(S, axis1=-2, axis2=-1) / D)[..., None, None] * np.eye(D)
        lo = float(np.min(eig_sym(Cs).values))
        if not lo > 0:
            raise NotPositiveDefinite(f"shifted cross-covariance is not positive definite; smallest eigenvalue {lo:.6g}",
                                      min_eig=lo)
        return Cs
    raise ConfigError(f"unknown representation {kind!r}")


class BlockSPD(BaseEstimator, TransformerMixin):
    """Map segments ``(n_segments, D, N)`` to SPD matrices.

    Parameters
    ----------
    kind : {"P", "S", "C"}
        Representation to build.
    m : int
        Block multiplicity for ``kind="P"``.
    shrinkage : float
        Relative ridge applied to the covariance.
    centering : {"per-trial", "per-segment", "none"}
        ``per-segment`` centers inside each window here; ``per-trial`` is
        expected to have been applied before segmentation.
    """

    def __init__(self, kind="P", m=2, shrinkage=1e-6, centering="per-trial"):
        self.kind = kind
        self.m = m
        self.shrinkage = shrinkage
        self.centering = centering

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise DegenerateSegment(f"expected (n_segments, D, N), got shape {X.shape}")
        SpdConfig(self.m, self.shrinkage, self.centering, n_channels=X.shape[1])
        self.n_channels_ = X.shape[1]
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 3:
            raise DegenerateSegment(f"expected (n_segments, D, N), got shape {X.shape}")
        return representation(X, self.kind, self.m, self.shrinkage, self.centering)
