"""Dense symmetric matrix kernel.

Eigendecomposition by cyclic Jacobi rotations and the spectral matrix
functions (log, exp, sqrt, inverse sqrt, powers) built on it. Every function
accepts a single ``(n, n)`` matrix or a stack ``(..., n, n)``; stacks are
rotated in lock-step, which keeps the per-matrix arithmetic identical to the
unbatched call.
"""

from functools import lru_cache
from typing import Callable, NamedTuple, Union

import numpy as np

from .exceptions import DimensionMismatch, NoConvergence, NonFinite, NotPositiveDefinite

MAX_SWEEPS = 100
# convergence: off-diagonal Frobenius norm below this fraction of the total
_OFF_RTOL = 1e-15
# rotations are skipped for entries this small relative to the matrix norm
_SKIP_RTOL = 1e-18


class EigenPair(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def _check_square(A):
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionMismatch(f"expected square matrices, got shape {A.shape}")


def sym(A) -> np.ndarray:
    """Return ``(A + A^T) / 2`` as float64 after checking finiteness."""
    A = np.asarray(A, dtype=np.float64)
    _check_square(A)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains NaN or inf entries")
    return 0.5 * (A + np.swapaxes(A, -1, -2))


@lru_cache(maxsize=None)
def _round_robin(n):
    """Fixed tournament schedule: n-1 rounds of disjoint (p, q) pairs, p < q.

    Odd ``n`` gets a phantom index ``n`` whose pairs are dropped.
    """
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for k in range(m // 2):
            a, b = players[k], players[m - 1 - k]
            if a < n and b < n:
                pairs.append((min(a, b), max(a, b)))
        pairs.sort()
        rounds.append((np.array([p for p, _ in pairs]), np.array([q for _, q in pairs])))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def _jacobi(A):
    """Parallel-ordered cyclic Jacobi on a stack ``(B, n, n)``.

    Each round annihilates ``n // 2`` disjoint off-diagonal pairs at once by
    the congruence ``A <- J^T A J``. Returns (diagonal, V, sweeps).
    """
    B, n, _ = A.shape
    A = A.copy()
    V = np.broadcast_to(np.eye(n), (B, n, n)).copy()
    if n == 1:
        return A[:, 0, 0].copy(), V, 0
    iu = np.triu_indices(n, 1)
    scale = np.sqrt(np.sum(A * A, axis=(1, 2)))
    skip = (_SKIP_RTOL * scale)[:, None]
    rounds = _round_robin(n)
    rows = np.arange(B)[:, None]
    eye = np.broadcast_to(np.eye(n), (B, n, n))
    for sweep in range(MAX_SWEEPS + 1):
        off = np.sqrt(2.0 * np.sum(A[:, iu[0], iu[1]] ** 2, axis=1))
        if np.all(off <= _OFF_RTOL * scale):
            return np.diagonal(A, axis1=1, axis2=2).copy(), V, sweep
        if sweep == MAX_SWEEPS:
            break
        for p, q in rounds:
            apq = A[:, p, q]
            active = np.abs(apq) > skip
            theta = (A[:, q, q] - A[:, p, p]) / (2.0 * np.where(active, apq, 1.0))
            # hypot keeps t finite (and tiny) for huge theta
            t = np.copysign(1.0, theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t *= active
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            J = eye.copy()
            J[rows, p, p] = c
            J[rows, q, q] = c
            J[rows, p, q] = s
            J[rows, q, p] = -s
            A = np.swapaxes(J, 1, 2) @ A @ J
            A = 0.5 * (A + np.swapaxes(A, 1, 2))
            A[rows, p, q] = A[rows, p, q] * ~active
            A[rows, q, p] = A[rows, p, q]
            V = V @ J
    raise NoConvergence(
        f"Jacobi eigensolver did not converge within {MAX_SWEEPS} sweeps",
        last=A,
        residual=float(np.max(off / np.where(scale > 0, scale, 1.0))),
    )


def eig_sym(A) -> EigenPair:
    """Eigendecomposition of a real symmetric matrix (or stack of them).

    Eigenvalues come back ascending, with eigenvectors as the columns of
    ``vectors``. The rotation schedule is a fixed round-robin ordering of
    the index pairs, so identical inputs give bit-identical outputs.

    Raises
    ------
    NonFinite
        If any entry is NaN or infinite.
    NoConvergence
        If the off-diagonal mass is not annihilated within 100 sweeps.
    """
    A = sym(A)
    shape = A.shape
    n = shape[-1]
    flat = A.reshape(-1, n, n)
    if flat.shape[0] == 0:
        return EigenPair(np.zeros(shape[:-1]), np.zeros(shape))
    w, V, _ = _jacobi(flat)
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    V = np.take_along_axis(V, order[:, None, :], axis=2)
    return EigenPair(w.reshape(shape[:-1]), V.reshape(shape))


def _power_fn(p):
    return lambda x: np.power(x, p)


_FUNCS = {
    "log": (np.log, True),
    "exp": (np.exp, False),
    "sqrt": (np.sqrt, True),
    "inv_sqrt": (lambda x: 1.0 / np.sqrt(x), True),
}


def mat_fn(A, f: Union[str, Callable, tuple], eig: EigenPair = None) -> np.ndarray:
    """Apply a scalar function to the spectrum of a symmetric matrix.

    ``f`` is one of ``"log"``, ``"exp"``, ``"sqrt"``, ``"inv_sqrt"``,
    ``("power", p)`` or an arbitrary vectorized callable. A precomputed
    ``eig`` can be passed to share one decomposition between several calls.
    """
    if eig is None:
        eig = eig_sym(A)
    needs_pos = False
    if isinstance(f, str):
        if f not in _FUNCS:
            raise ValueError(f"unknown matrix function {f!r}")
        fn, needs_pos = _FUNCS[f]
    elif isinstance(f, tuple):
        name, p = f
        if name != "power":
            raise ValueError(f"unknown matrix function {f!r}")
        fn = _power_fn(float(p))
        needs_pos = float(p) != int(p) or p < 0
    else:
        fn = f
    w, V = eig
    if needs_pos:
        lo = float(np.min(w)) if w.size else 1.0
        if lo <= 0:
            raise NotPositiveDefinite(
                f"matrix function requires positive eigenvalues; smallest is {lo:.6g}",
                min_eig=lo,
            )
    out = (V * fn(w)[..., None, :]) @ np.swapaxes(V, -1, -2)
    return 0.5 * (out + np.swapaxes(out, -1, -2))


def logm(A):
    return mat_fn(A, "log")


def expm(A):
    return mat_fn(A, "exp")


def sqrtm(A):
    return mat_fn(A, "sqrt")


def invsqrtm(A):
    return mat_fn(A, "inv_sqrt")


def powm(A, p):
    return mat_fn(A, ("power", p))


def frobenius(A) -> Union[float, np.ndarray]:
    """Frobenius norm; vectorized over leading axes."""
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise NonFinite("matrix contains NaN or inf entries")
    out = np.sqrt(np.sum(A * A, axis=(-2, -1)))
    return float(out) if out.ndim == 0 else out
