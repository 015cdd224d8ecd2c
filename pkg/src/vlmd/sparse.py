"""Sparse coding of the channels against the latent components.

Solves ``min_A ||X - Z A||_F^2 + lam * ||A||_1`` by cyclic coordinate
descent. The objective is column separable, so every channel is its own
LASSO; the sweep below updates one latent row for all channels at once,
which is the same sequence of per-channel coordinate steps.

The quadratic is not divided by ``2 T`` the way many library solvers do;
``lam`` values quoted elsewhere must be rescaled accordingly.
"""

import warnings

import numpy as np

from .exceptions import DimensionError, InvalidInput, UnderdeterminedWarning


# active-set solves are skipped above this Gram-block condition number
MAX_CONDITION = 1e10


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_objective(X, Z, A, lam):
    R = X - Z @ A
    return float(np.sum(R * R) + lam * np.sum(np.abs(A)))


def lambda_max(X, Z):
    """Smallest ``lam`` for which ``A = 0`` is optimal."""
    return 2.0 * float(np.max(np.abs(Z.T @ X))) if X.size and Z.size else 0.0


def kkt_residual(X, Z, A, lam):
    """Largest violation of the subgradient optimality conditions.

    With ``r_c = x_c - Z a_c`` the conditions are ``|2 z_l.r_c| <= lam`` where
    ``a_lc = 0`` and ``2 z_l.r_c = lam * sign(a_lc)`` elsewhere.
    """
    grad = 2.0 * (Z.T @ (X - Z @ A))
    return _kkt_from_grad(grad, A, lam)


def _kkt_from_grad(grad, A, lam):
    active = A != 0
    viol = np.where(
        active,
        np.abs(grad - lam * np.sign(A)),
        np.maximum(np.abs(grad) - lam, 0.0),
    )
    return float(viol.max()) if viol.size else 0.0


def lasso_solve(X, Z, lam, warm_start=None, tol=1e-8, max_iter=10_000, return_n_iter=False):
    """Coefficient matrix ``A`` (L x C) for data ``X`` (T x C) and dictionary ``Z`` (T x L).

    Parameters
    ----------
    X : ndarray of shape (T, C)
    Z : ndarray of shape (T, L)
    lam : float
        Weight of the l1 penalty, under the unscaled objective.
    warm_start : ndarray of shape (L, C), optional
        Starting point for the sweeps.
    tol : float
        Absolute bound on :func:`kkt_residual` at exit.
    max_iter : int
        Maximum number of full coordinate sweeps.

    Returns
    -------
    A : ndarray of shape (L, C)
        No box constraint is applied here; see :func:`rescale_columns`.
    """
    X = np.asarray(X, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if Z.ndim == 1:
        Z = Z[:, None]
    if X.shape[0] != Z.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows but Z has {Z.shape[0]}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Z))):
        raise InvalidInput("lasso inputs contain non-finite values")
    if not np.isfinite(lam) or lam < 0:
        raise InvalidInput(f"lam must be finite and >= 0, got {lam}")
    L, C = Z.shape[1], X.shape[1]

    if warm_start is None:
        A = np.zeros((L, C))
    else:
        A = np.array(warm_start, dtype=float, copy=True)
        if A.shape != (L, C):
            raise DimensionError(f"warm start has shape {A.shape}, expected {(L, C)}")

    G = Z.T @ Z
    ZtX = Z.T @ X
    diag = np.diag(G).copy()
    dead = diag <= 0.0
    if np.any(dead):
        if lam == 0:
            warnings.warn(
                f"latent columns {np.flatnonzero(dead).tolist()} are zero; "
                "their coefficients are set to the minimum-norm value 0",
                UnderdeterminedWarning,
                stacklevel=2,
            )
        A[dead] = 0.0
    live = np.flatnonzero(~dead)
    half_lam = 0.5 * lam

    n_iter = 0
    support = A != 0
    for n_iter in range(1, max_iter + 1):
        for l in live:
            rho = ZtX[l] - G[l] @ A + diag[l] * A[l]
            A[l] = soft_threshold(rho, half_lam) / diag[l]
        viol = _column_kkt(ZtX, G, A, lam, dead)
        if viol.max(initial=0.0) <= tol:
            break
        # ill-conditioned Z makes the sweeps crawl once the support is found;
        # finish the unconverged channels with an exact active-set search
        previous, support = support, A != 0
        if np.array_equal(previous, support):
            for c in np.flatnonzero(viol > tol):
                _feature_sign(A[:, c], G, ZtX[:, c], lam, live, tol)
            if _column_kkt(ZtX, G, A, lam, dead).max(initial=0.0) <= tol:
                break
            support = A != 0
    if return_n_iter:
        return A, n_iter
    return A


def _column_kkt(ZtX, G, A, lam, dead):
    grad = 2.0 * (ZtX - G @ A)
    grad[dead] = 0.0
    active = A != 0
    viol = np.where(active, np.abs(grad - lam * np.sign(A)), np.maximum(np.abs(grad) - lam, 0.0))
    return viol.max(axis=0) if viol.size else np.zeros(A.shape[1])


def _feature_sign(a, G, b, lam, live, tol, max_steps=None):
    """Exact LASSO for one channel by feature-sign search, in place.

    Minimizes ``a.G.a - 2 b.a + lam |a|_1`` starting from ``a``. Each step
    solves the quadratic on the active set with fixed signs, then moves
    towards that solution, stopping at the sign change that gives the
    lowest objective. The objective decreases at every step. Returns
    whether the KKT residual reached ``tol``.
    """
    half_lam = 0.5 * lam
    in_live = np.zeros(a.size, dtype=bool)
    in_live[live] = True
    max_steps = max_steps or 10 * max(1, live.size)
    for _ in range(max_steps):
        grad = 2.0 * (b - G @ a)
        S = np.flatnonzero(a)
        theta = np.sign(a)
        if np.all(np.abs(grad[S] - lam * theta[S]) <= tol):
            zero = np.flatnonzero(in_live & (a == 0))
            if zero.size == 0:
                return True
            j = zero[np.argmax(np.abs(grad[zero]))]
            if abs(grad[j]) - lam <= tol:
                return True
            theta[j] = np.sign(grad[j])
            S = np.sort(np.append(S, j))
        G_S = G[np.ix_(S, S)]
        # a near-singular block leaves the minimizer undetermined; the
        # coordinate sweeps handle that case
        if np.linalg.cond(G_S) > MAX_CONDITION:
            return False
        target = np.linalg.solve(G_S, b[S] - half_lam * theta[S])
        current = a[S]
        crossing = np.full(S.size, np.inf)
        flips = (current != 0) & (np.sign(target) != np.sign(current))
        crossing[flips] = current[flips] / (current[flips] - target[flips])

        def objective(x):
            return x @ G_S @ x - 2.0 * b[S] @ x + lam * np.abs(x).sum()

        best, best_f = 0.0, objective(current)
        for t in np.append(crossing[flips], 1.0):
            f = objective(current + t * (target - current))
            if f < best_f:
                best, best_f = t, f
        if best == 0.0:
            return False
        moved = current + best * (target - current)
        moved[crossing == best] = 0.0
        a[S] = moved
    return False


def rescale_columns(A):
    """Divide each column by ``max(1, max_i |a_ic|)`` so that ``|a_ij| <= 1``.

    >>> rescale_columns(np.array([[0.5, -3.0], [2.0, 1.5]])).tolist()
    [[0.25, -1.0], [1.0, 0.5]]
    """
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return A.copy()
    scale = np.maximum(1.0, np.abs(A).max(axis=0))
    return A / scale
