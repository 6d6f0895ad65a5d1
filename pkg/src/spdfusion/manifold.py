"""Riemannian geometry on SPD matrices.

The distance, mean and tangent map use the affine-invariant family:
``d(A, B) = ||log(A^{-1/2} B A^{-1/2})||_F`` and the whitened logarithm
``log(R^{-1/2} P R^{-1/2})`` as tangent coordinates at ``R``. A log-Euclidean
variant (``metric="logeuclid"``) is available for comparisons.
"""

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import ConfigError, DimensionMismatch, EmptySet, NoConvergence, NotPositiveDefinite
from .symmat import eig_sym, frobenius, mat_fn, sym

METRICS = ("riemann", "logeuclid")


@dataclass(frozen=True)
class MeanConfig:
    max_iters: int = 50
    tol: float = 1e-8
    step: float = 1.0

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigError("MeanConfig: max_iters must be >= 1")
        if not self.tol > 0:
            raise ConfigError("MeanConfig: tol must be > 0")
        if not 0 < self.step <= 1:
            raise ConfigError("MeanConfig: step must lie in (0, 1]")


def _check_spd(P, name="matrix"):
    P = sym(P)
    w = eig_sym(P)
    lo = float(np.min(w.values))
    if not lo > 0:
        raise NotPositiveDefinite(f"{name} is not positive definite; smallest eigenvalue {lo:.6g}", min_eig=lo)
    return P, w


def _same_dim(A, B):
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatch(f"dimension mismatch: {A.shape[-1]} vs {B.shape[-1]}")


def _sqrt_pair(P, eig=None):
    """``(P^{1/2}, P^{-1/2})`` from a single eigendecomposition."""
    if eig is None:
        P, eig = _check_spd(P)
    return mat_fn(P, "sqrt", eig), mat_fn(P, "inv_sqrt", eig)


def whiten(P, ref_isqrt):
    out = ref_isqrt @ P @ ref_isqrt
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def geodesic_distance(Pi, Pj, metric="riemann"):
    """Distance between SPD matrices; stacks of equal leading shape are paired elementwise."""
    Pi, wi = _check_spd(Pi, "Pi")
    Pj, wj = _check_spd(Pj, "Pj")
    _same_dim(Pi, Pj)
    if metric == "logeuclid":
        return frobenius(mat_fn(Pi, "log", wi) - mat_fn(Pj, "log", wj))
    if metric != "riemann":
        raise ConfigError(f"unknown metric {metric!r}")
    ev = eig_sym(whiten(Pj, mat_fn(Pi, "inv_sqrt", wi))).values
    out = np.sqrt(np.sum(np.log(ev) ** 2, axis=-1))
    return float(out) if out.ndim == 0 else out


def _mean_log(P, stack):
    """Mean whitened log of ``stack`` at ``P`` and the sqrt factors of ``P``."""
    P, w = _check_spd(P, "mean iterate")
    half, ihalf = _sqrt_pair(P, w)
    G = mat_fn(whiten(stack, ihalf), "log").mean(axis=0)
    return 0.5 * (G + G.T), half


def geometric_mean(mats, cfg: MeanConfig = MeanConfig(), metric="riemann", return_residual=False):
    """Karcher mean of a set of SPD matrices.

    Starts from the arithmetic mean and iterates
    ``P <- P^{1/2} exp(step * G) P^{1/2}`` with ``G`` the mean whitened log,
    halving the step whenever the residual ``||G||_F`` would grow. Stops once
    ``||G||_F <= cfg.tol``.

    Raises
    ------
    EmptySet
        For an empty input.
    NoConvergence
        When ``cfg.max_iters`` is exhausted; ``err.last`` holds the iterate.
    """
    stack = sym(np.asarray(mats, dtype=np.float64))
    if stack.ndim == 2:
        stack = stack[None]
    if stack.shape[0] == 0:
        raise EmptySet("cannot average an empty set of matrices")
    if metric == "logeuclid":
        mean = mat_fn(mat_fn(stack, "log").mean(axis=0), "exp")
        return (mean, 0.0) if return_residual else mean
    if metric != "riemann":
        raise ConfigError(f"unknown metric {metric!r}")
    if stack.shape[0] == 1:
        _check_spd(stack[0])
        return (stack[0].copy(), 0.0) if return_residual else stack[0].copy()

    P = stack.mean(axis=0)
    G, half = _mean_log(P, stack)
    res = frobenius(G)
    step = cfg.step
    it = 0
    while res > cfg.tol:
        if it >= cfg.max_iters:
            raise NoConvergence(
                f"Karcher mean did not reach tol={cfg.tol:g} in {cfg.max_iters} iterations (residual {res:.3g})",
                last=P,
                residual=res,
            )
        it += 1
        cand = sym(half @ mat_fn(step * G, "exp") @ half)
        G_new, half_new = _mean_log(cand, stack)
        res_new = frobenius(G_new)
        if res_new > res:
            step *= 0.5
            continue
        P, G, half, res = cand, G_new, half_new, res_new
    return (P, res) if return_residual else P


def vec(A) -> np.ndarray:
    """Row-major upper triangle with off-diagonal entries scaled by sqrt(2)."""
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[-1]
    iu = np.triu_indices(n)
    w = np.where(iu[0] == iu[1], 1.0, np.sqrt(2.0))
    return A[..., iu[0], iu[1]] * w


def unvec(v, n=None) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    k = v.shape[-1]
    if n is None:
        n = int(round((np.sqrt(8 * k + 1) - 1) / 2))
    if n * (n + 1) // 2 != k:
        raise DimensionMismatch(f"vector of length {k} is not a packed n x n symmetric matrix")
    iu = np.triu_indices(n)
    w = np.where(iu[0] == iu[1], 1.0, 1.0 / np.sqrt(2.0))
    A = np.zeros(v.shape[:-1] + (n, n))
    A[..., iu[0], iu[1]] = v * w
    A[..., iu[1], iu[0]] = v * w
    return A


def tangent_map(Pi, Pref, metric="riemann"):
    """Tangent coordinates of ``Pi`` at ``Pref``; either may be a stack (paired elementwise)."""
    Pi, wi = _check_spd(Pi, "Pi")
    Pref, wr = _check_spd(Pref, "Pref")
    _same_dim(Pi, Pref)
    if metric == "logeuclid":
        return vec(mat_fn(Pi, "log", wi) - mat_fn(Pref, "log", wr))
    if metric != "riemann":
        raise ConfigError(f"unknown metric {metric!r}")
    return vec(mat_fn(whiten(Pi, mat_fn(Pref, "inv_sqrt", wr)), "log"))


def tangent_unmap(s, Pref, metric="riemann"):
    """Inverse of :func:`tangent_map`."""
    Pref, wr = _check_spd(Pref, "Pref")
    n = Pref.shape[-1]
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] != n * (n + 1) // 2:
        raise DimensionMismatch(f"tangent vector of length {s.shape[-1]} does not match reference dimension {n}")
    T = unvec(s, n)
    if metric == "logeuclid":
        return mat_fn(T + mat_fn(Pref, "log", wr), "exp")
    half = mat_fn(Pref, "sqrt", wr)
    return sym(half @ mat_fn(T, "exp") @ half)


class TangentSpace(BaseEstimator, TransformerMixin):
    """Project SPD matrices to tangent vectors.

    With ``reference="subject"`` every group (subject) is mapped at the mean
    of its own matrices, computed from the matrices alone, so the same rule
    applies to unseen subjects at transform time. ``reference="global"``
    uses the mean of the training set.

    Parameters
    ----------
    reference : {"subject", "global"}
    metric : {"riemann", "logeuclid"}
    max_iters, tol : Karcher iteration controls.
    """

    def __init__(self, reference="subject", metric="riemann", max_iters=50, tol=1e-8):
        self.reference = reference
        self.metric = metric
        self.max_iters = max_iters
        self.tol = tol

    def _mean(self, X):
        return geometric_mean(X, MeanConfig(self.max_iters, self.tol), metric=self.metric)

    def fit(self, X, y=None, groups=None):
        X = np.asarray(X, dtype=np.float64)
        if self.reference not in ("subject", "global"):
            raise ConfigError(f"unknown reference {self.reference!r}")
        if self.metric not in METRICS:
            raise ConfigError(f"unknown metric {self.metric!r}")
        self.n_features_in_ = X.shape[-1]
        if self.reference == "global":
            self.reference_ = self._mean(X)
        return self

    def references(self, X, groups):
        """Per-group reference matrices ``{group: mean}``, in first-seen order."""
        groups = np.asarray(groups)
        out = {}
        for g in dict.fromkeys(groups.tolist()):
            out[g] = self._mean(X[groups == g])
        return out

    def transform(self, X, groups=None):
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.n_features_in_:
            raise DimensionMismatch(f"fitted on {self.n_features_in_}x{self.n_features_in_} matrices, got {X.shape[-1]}")
        if self.reference == "global":
            return tangent_map(X, self.reference_, self.metric)
        if groups is None:
            raise ValueError("reference='subject' needs groups")
        groups = np.asarray(groups)
        n = X.shape[-1]
        out = np.empty((X.shape[0], n * (n + 1) // 2))
        for g, ref in self.references(X, groups).items():
            idx = groups == g
            out[idx] = tangent_map(X[idx], ref, self.metric)
        return out

    def fit_transform(self, X, y=None, groups=None):
        return self.fit(X, y, groups).transform(X, groups)
