"""Smallest eigenpair of ``A v = lambda W v`` with diagonal ``W > 0``.

The generalized problem is reduced to the standard one for
``B = W^-1/2 A W^-1/2`` (a diagonal similarity).  The iterative path is a
block LOBPCG, preconditioned by fast diagonalization on product grids
and by Jacobi otherwise; if it stalls, a restarted Lanczos
with full reorthogonalization takes over, and below ``dense_cap`` a dense
LAPACK solve is the last resort.  :func:`dense_reference` is the
independent oracle.

Tolerances are relative: a run converges when

    ||A v - lambda W v|| / ||W v||  <=  tol * max(1, |lambda|, ||B||_inf).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from .errors import ConvergenceError, IndefiniteWeightError, ParameterError, ResourceError

DEFAULT_TOL = 1e-10
DEFAULT_SEED = 20240611
DENSE_CAP = 3000
FACTOR_CAP = 3000


@dataclass
class SpectralResult:
    lambda0: float
    eigenvector: np.ndarray
    residual: float
    iterations: int
    method: str
    history: list = field(default_factory=list)
    tol: float = DEFAULT_TOL
    threshold: float = 0.0
    seed: int = DEFAULT_SEED

    @property
    def converged(self) -> bool:
        return self.residual <= self.threshold

    def summary(self) -> dict:
        return {
            "lambda0": self.lambda0, "residual": self.residual, "iterations": self.iterations,
            "method": self.method, "tol": self.tol, "threshold": self.threshold, "seed": self.seed,
        }


def _as_problem(op):
    """Accept a DiscreteOperator, an ``(A, w)`` pair or a bare matrix."""
    if hasattr(op, "matrix") and hasattr(op, "weights"):
        A, w = op.matrix, op.weights
    elif isinstance(op, tuple):
        A, w = op
    else:
        A, w = op, None
    A = sparse.csr_matrix(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ParameterError("operator matrix must be square")
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    if w.shape != (n,):
        raise ParameterError("weights do not match the matrix")
    if not np.all(w > 0):
        raise IndefiniteWeightError(f"{int(np.sum(~(w > 0)))} mass weight(s) are not strictly positive")
    return A, w


def _scaled(A, w):
    s = 1.0 / np.sqrt(w)
    coo = A.tocoo()
    B = sparse.coo_matrix((coo.data * (s[coo.row] * s[coo.col]), (coo.row, coo.col)), shape=A.shape).tocsr()
    return B, s


def _measure(R0, y0, w):
    """Residual ||W^1/2 r|| / ||W^1/2 y|| for the standard-form pair."""
    sw = np.sqrt(w)
    return float(np.linalg.norm(sw * R0) / np.linalg.norm(sw * y0))


def _finish(B, s, w, y, lam, method, iterations, history, tol, threshold, seed):
    v = s * y
    v = v / np.sqrt(v @ (w * v))
    if v.sum() < 0 or (v.sum() == 0 and v[np.argmax(np.abs(v))] < 0):
        v = -v
    y = v / s
    r = B @ y - lam * y
    return SpectralResult(
        lambda0=float(lam), eigenvector=v, residual=_measure(r, y, w), iterations=iterations,
        method=method, history=history, tol=tol, threshold=threshold, seed=seed,
    )


def _svqb(S, drop):
    G = S.T @ S
    d, U = np.linalg.eigh(0.5 * (G + G.T))
    keep = d > drop * max(d.max(), 1e-300)
    return S @ (U[:, keep] / np.sqrt(d[keep]))


def _orthonormal_columns(S, drop=1e-10):
    """Orthonormal basis of span(S) from the small Gram matrix, applied
    twice; much cheaper than a Householder QR for tall, thin blocks."""
    Q = _svqb(S, drop * drop)
    return _svqb(Q, 1e-12)


def jacobi_preconditioner(B):
    diag = B.diagonal()
    inv = 1.0 / (diag + max(0.0, 1.0 - diag.min()))
    return lambda R: inv[:, None] * R


def tensor_preconditioner(op, B, factor_cap: int = FACTOR_CAP):
    """Fast-diagonalization preconditioner for operators on product grids.

    In standard form a product operator is the Kronecker sum of the factor
    operators plus a diagonal ``q``.  Replacing ``q`` by its separable part
    through the node where it is smallest gives an operator whose inverse
    (shifted just below its lowest eigenvalue) is applied factor by factor
    in the factor eigenbases.  Returns None when ``op`` is not on a product
    grid or a factor is larger than ``factor_cap``.
    """
    disc = getattr(op, "disc", None)
    factors = getattr(disc, "factors", ())
    if len(factors) < 2:
        return None
    frees = [f.free for f in factors]
    shape = tuple(len(fr) for fr in frees)
    if max(shape) > factor_cap or int(np.prod(shape)) != B.shape[0]:
        return None
    blocks = []
    diag_sum = np.zeros(shape)
    for axis, (f, fr) in enumerate(zip(factors, frees)):
        sf = 1.0 / np.sqrt(f.weights[fr])
        Bt = (f.stiffness[fr][:, fr]).toarray() * np.outer(sf, sf)
        blocks.append(Bt)
        view = [1] * len(shape)
        view[axis] = -1
        diag_sum = diag_sum + np.diag(Bt).reshape(view)
    q = B.diagonal().reshape(shape) - diag_sum
    ref = np.unravel_index(np.argmin(q), shape)
    d = len(shape)
    q_ref = q[ref]
    bases, sums = [], np.zeros(shape)
    for axis, Bt in enumerate(blocks):
        line = list(ref)
        line[axis] = slice(None)
        qt = q[tuple(line)] - q_ref * (d - 1) / d
        mu, U = np.linalg.eigh(Bt + np.diag(qt))
        bases.append(U)
        view = [1] * d
        view[axis] = -1
        sums = sums + mu.reshape(view)
    flat = np.sort(sums.ravel())
    gap = flat[1] - flat[0] if flat.size > 1 else 1.0
    inv = 1.0 / (sums - flat[0] + max(0.5 * gap, 1e-12 * max(1.0, abs(flat[0]))))

    def apply(R):
        k = R.shape[1]
        T = R.reshape(shape + (k,))
        for axis, U in enumerate(bases):
            T = np.moveaxis(np.tensordot(U.T, T, axes=([1], [axis])), 0, axis)
        T = T * inv[..., None]
        for axis, U in enumerate(bases):
            T = np.moveaxis(np.tensordot(U, T, axes=([1], [axis])), 0, axis)
        return T.reshape(R.shape)

    return apply


def _lobpcg(B, s, w, tol_scale, tol, max_iter, block, rng, x0, precond):
    n = B.shape[0]
    k = min(block, max(1, n // 4))
    X = rng.standard_normal((n, k))
    X[:, 0] = 1.0 / s  # W^1/2 * ones: ground states are positive
    if x0 is not None:
        X[:, 0] = np.asarray(x0, dtype=float) / s
    X, _ = np.linalg.qr(X)
    BX = B @ X
    theta, C = np.linalg.eigh(0.5 * ((X.T @ BX) + (X.T @ BX).T))
    X, BX = X @ C, BX @ C
    P = None
    history = []
    best = (X[:, 0].copy(), theta[0], np.inf)
    for it in range(1, max_iter + 1):
        R = BX - X * theta
        res = _measure(R[:, 0], X[:, 0], w)
        history.append(float(theta[0]))
        threshold = tol * max(tol_scale, abs(theta[0]))
        if res < best[2]:
            best = (X[:, 0].copy(), theta[0], res)
        if res <= threshold:
            return X[:, 0], theta[0], it, history, threshold, True
        Z = precond(R)
        if P is not None:
            Z = np.hstack([Z, P])
        for _ in range(2):
            Z -= X @ (X.T @ Z)
        Z = _orthonormal_columns(Z)
        Q = np.hstack([X, Z])
        BQ = B @ Q
        G = Q.T @ BQ
        vals, C = np.linalg.eigh(0.5 * (G + G.T))
        Ck = C[:, :k]
        Xn = Q @ Ck
        BXn = BQ @ Ck
        P = Q[:, k:] @ Ck[k:, :]
        X, BX, theta = Xn, BXn, vals[:k]
    return best[0], best[1], max_iter, history, tol * max(tol_scale, abs(best[1])), False


def _lanczos(B, s, w, tol_scale, tol, max_iter, y0, steps=80):
    n = B.shape[0]
    m = min(steps, n)
    y = y0 / np.linalg.norm(y0)
    history = []
    theta = float(y @ (B @ y))
    it = 0
    while it < max_iter:
        V = np.zeros((n, m + 1))
        alpha = np.zeros(m)
        beta = np.zeros(m)
        V[:, 0] = y
        j_end = m
        for j in range(m):
            u = B @ V[:, j]
            alpha[j] = V[:, j] @ u
            for _ in range(2):
                u -= V[:, : j + 1] @ (V[:, : j + 1].T @ u)
            beta[j] = np.linalg.norm(u)
            it += 1
            if beta[j] <= 1e-14 * max(abs(alpha[j]), 1.0):
                j_end = j + 1
                break
            V[:, j + 1] = u / beta[j]
        vals, vecs = sla.eigh_tridiagonal(alpha[:j_end], beta[: j_end - 1])
        y = V[:, :j_end] @ vecs[:, 0]
        y /= np.linalg.norm(y)
        theta = float(vals[0])
        history.append(theta)
        r = B @ y - theta * y
        threshold = tol * max(tol_scale, abs(theta))
        if _measure(r, y, w) <= threshold:
            return y, theta, it, history, threshold, True
    return y, theta, it, history, tol * max(tol_scale, abs(theta)), False


def _dense_smallest(B):
    vals, vecs = sla.eigh(B.toarray(), subset_by_index=[0, 0])
    return vecs[:, 0], float(vals[0])


def smallest_eigenpair(op, tol: float = DEFAULT_TOL, max_iter: int = 20000, seed: int = DEFAULT_SEED,
                       block: int = 4, x0=None, dense_cap: int = DENSE_CAP,
                       methods=("lobpcg", "lanczos", "dense"), precond: str = "auto") -> SpectralResult:
    """Certified smallest eigenpair of a symmetric operator.

    The eigenvector is normalized to ``v @ W v = 1`` and signed to have a
    positive sum.  ``precond`` is ``"jacobi"``, ``"tensor"`` (product grids,
    see :func:`tensor_preconditioner`) or ``"auto"`` (tensor when available).
    Raises :class:`ConvergenceError` (carrying the best iterate) if every
    enabled method fails.
    """
    if not tol > 0:
        raise ParameterError("tol must be positive")
    A, w = _as_problem(op)
    B, s = _scaled(A, w)
    n = B.shape[0]
    tol_scale = max(1.0, float(abs(B).sum(axis=1).max()))
    rng = np.random.default_rng(seed)

    if n <= max(32, 4 * block) and "dense" in methods:
        y, lam = _dense_smallest(B)
        res = _finish(B, s, w, y, lam, "dense", 1, [lam], tol, tol * max(tol_scale, abs(lam)), seed)
        return res

    best = None
    if "lobpcg" in methods:
        pre, label = None, "lobpcg"
        if precond in ("auto", "tensor"):
            pre = tensor_preconditioner(op, B)
            if pre is None and precond == "tensor":
                raise ParameterError("tensor preconditioner needs an operator on a product grid")
            label = "lobpcg+tensor" if pre is not None else label
        elif precond != "jacobi":
            raise ParameterError(f"unknown preconditioner {precond!r}")
        if pre is None:
            pre = jacobi_preconditioner(B)
        y, lam, it, hist, thr, ok = _lobpcg(B, s, w, tol_scale, tol, max_iter, block, rng, x0, pre)
        res = _finish(B, s, w, y, lam, label, it, hist, tol, thr, seed)
        if ok:
            return res
        best = res
    if "lanczos" in methods:
        start = best.eigenvector / s if best is not None else rng.standard_normal(n) + 1.0 / s
        y, lam, it, hist, thr, ok = _lanczos(B, s, w, tol_scale, tol, max_iter, start)
        res = _finish(B, s, w, y, lam, "lanczos", it, hist, tol, thr, seed)
        if ok:
            return res
        if best is None or res.residual < best.residual:
            best = res
    if "dense" in methods and n <= dense_cap:
        y, lam = _dense_smallest(B)
        return _finish(B, s, w, y, lam, "dense", 1, [lam], tol, tol * max(tol_scale, abs(lam)), seed)
    raise ConvergenceError(
        f"no method reached residual {tol:g} (relative) on an operator of size {n}", best=best)


def dense_reference(op, cap: int = DENSE_CAP) -> np.ndarray:
    """All eigenvalues of ``A v = lambda W v`` by a dense symmetric solver."""
    A, w = _as_problem(op)
    n = A.shape[0]
    if n > cap:
        raise ResourceError(f"dense reference capped at {cap}, operator has size {n}")
    B, _ = _scaled(A, w)
    if n > 1 and sparse.triu(B, k=2).nnz == 0:
        return sla.eigvalsh_tridiagonal(B.diagonal(), B.diagonal(1))
    return sla.eigvalsh(B.toarray())


def rayleigh(op, v) -> float:
    """(v^T A v) / (v^T W v); an upper bound for the smallest eigenvalue."""
    A, w = _as_problem(op)
    if hasattr(op, "restrict"):
        v = op.restrict(v)
    v = np.asarray(v, dtype=float)
    denom = float(v @ (w * v))
    if denom == 0.0:
        raise ParameterError("Rayleigh quotient of the zero vector")
    return float(v @ (A @ v)) / denom
