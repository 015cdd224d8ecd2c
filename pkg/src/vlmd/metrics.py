"""Scoring estimated modes against ground truth."""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .exceptions import DimensionError, InvalidInput


@dataclass
class Assignment:
    """Optimal pairing of estimated modes to ground-truth modes.

    ``pairs`` holds ``(estimate, truth)`` index tuples sorted by truth
    index. Estimates left over when there are more estimates than truths
    are listed in ``unmatched_estimates``; they are treated as residual noise.
    """

    pairs: list
    unmatched_estimates: list
    total_cost: float
    unmatched_truths: list = field(default_factory=list)

    @property
    def estimate_indices(self):
        return [i for i, _ in self.pairs]

    @property
    def truth_indices(self):
        return [j for _, j in self.pairs]


def hungarian_match(cost):
    """Minimum-cost assignment of ``min(M, N)`` rows to columns of ``cost``."""
    cost = np.asarray(cost, dtype=float)
    if cost.ndim != 2 or cost.shape[0] < 1 or cost.shape[1] < 1:
        raise InvalidInput(f"cost must be a non-empty 2-D matrix, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise InvalidInput("cost matrix contains non-finite values")
    rows, cols = linear_sum_assignment(cost)
    order = np.argsort(cols)
    pairs = [(int(rows[i]), int(cols[i])) for i in order]
    return Assignment(
        pairs=pairs,
        unmatched_estimates=sorted(set(range(cost.shape[0])) - set(rows.tolist())),
        total_cost=float(cost[rows, cols].sum()),
        unmatched_truths=sorted(set(range(cost.shape[1])) - set(cols.tolist())),
    )


def _standardize(U):
    U = U - U.mean(axis=-1, keepdims=True)
    norm = np.sqrt(np.sum(U * U, axis=-1, keepdims=True))
    # zero-variance series correlate as 0 with everything
    return np.divide(U, norm, out=np.zeros_like(U), where=norm > 0)


def correlation_matrix(U_est, U_true):
    """Channel-averaged Pearson correlation, shape (K_est, K_true).

    Both inputs are (K, C, T).
    """
    U_est = np.asarray(U_est, dtype=float)
    U_true = np.asarray(U_true, dtype=float)
    if U_est.ndim != 3 or U_true.ndim != 3:
        raise DimensionError("mode arrays must be (K, C, T)")
    if U_est.shape[1:] != U_true.shape[1:]:
        raise DimensionError(f"channel/time shapes differ: {U_est.shape[1:]} vs {U_true.shape[1:]}")
    if U_est.shape[2] < 3:
        raise InvalidInput("need at least 3 time samples to correlate modes")
    E = _standardize(U_est)
    G = _standardize(U_true)
    return np.einsum("ict,jct->ij", E, G) / U_est.shape[1]


def im_correlation_error(U_est, U_true):
    """Mean of ``1 - |channel-averaged correlation|`` over optimally matched modes.

    Returns ``(error, assignment)``.
    """
    cost = 1.0 - np.abs(correlation_matrix(U_est, U_true))
    assignment = hungarian_match(cost)
    error = assignment.total_cost / len(assignment.pairs)
    return float(error), assignment


def freq_mape(freqs_est, freqs_true, assignment):
    """Mean absolute percentage error of matched central frequencies."""
    freqs_est = np.asarray(freqs_est, dtype=float)
    freqs_true = np.asarray(freqs_true, dtype=float)
    if not assignment.pairs:
        raise InvalidInput("assignment has no pairs")
    est = freqs_est[assignment.estimate_indices]
    true = freqs_true[assignment.truth_indices]
    if np.any(true == 0):
        raise InvalidInput("true frequencies must be non-zero for MAPE")
    return float(100.0 * np.mean(np.abs(est - true) / np.abs(true)))
