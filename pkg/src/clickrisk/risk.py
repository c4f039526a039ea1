"""Exact binomial upper confidence bounds on FDR and threshold calibration.

The upper bound for X errors among n accepted predictions at significance
delta is the (1-delta)-quantile of Beta(X+1, n-X), equivalently
sup{R : P(Bin(n, R) <= X) >= delta}. Calibration scans the observed
uncertainty values in ascending order and keeps the largest candidate
threshold whose bound stays at or below the target risk level; when no
candidate qualifies the requested level is reported as infeasible rather
than raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from .special import beta_quantile


class RiskError(ValueError):
    """Invalid counts or mismatched inputs for risk computations."""


@dataclass(frozen=True)
class RiskSpec:
    """Target risk level (alpha) and significance level (delta)."""

    alpha: float
    delta: float = 0.05

    def validate(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise RiskError(f"alpha must lie strictly inside (0, 1), got {self.alpha}")
        if not 0.0 < self.delta < 1.0:
            raise RiskError(f"delta must lie strictly inside (0, 1), got {self.delta}")


class TracePoint(NamedTuple):
    tau: float
    n_accepted: int
    n_errors: int
    upper_bound: float


@dataclass(frozen=True)
class CalibrationOutcome:
    """Result of the threshold search, including the per-candidate trace.

    `threshold` is None exactly when `feasible` is False. The trace lists
    every candidate threshold in ascending order with its acceptance
    count, error count, and upper confidence bound.
    """

    feasible: bool
    threshold: float | None
    trace: tuple[TracePoint, ...]


@lru_cache(maxsize=65536)
def _cp_upper_cached(n_errors: int, n_accepted: int, delta: float) -> float:
    if n_errors == n_accepted:
        return 1.0
    return beta_quantile(1.0 - delta, n_errors + 1, n_accepted - n_errors)


def cp_upper_bound(n_errors: int, n_accepted: int, delta: float) -> float:
    """One-sided (1-delta) Clopper-Pearson upper bound on an error rate.

    Returns the (1-delta)-quantile of Beta(X+1, n-X) for X = n_errors and
    n = n_accepted, and 1.0 at the degenerate upper edge X = n.
    """
    if n_accepted < 1:
        raise RiskError(f"n_accepted must be >= 1, got {n_accepted}")
    if not 0 <= n_errors <= n_accepted:
        raise RiskError(f"n_errors must lie in [0, {n_accepted}], got {n_errors}")
    if not 0.0 < delta < 1.0:
        raise RiskError(f"delta must lie strictly inside (0, 1), got {delta}")
    return _cp_upper_cached(int(n_errors), int(n_accepted), float(delta))


def _check_flags(flags: Sequence[int]) -> np.ndarray:
    arr = np.asarray(flags, dtype=int)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise RiskError("error flags must be 0 or 1")
    return arr


def empirical_fdr(
    uncertainties: Sequence[float], error_flags: Sequence[int], tau: float
) -> float:
    """Fraction of errors among predictions accepted at threshold tau.

    Acceptance is inclusive (u <= tau). Returns 0 when nothing is
    accepted.
    """
    u = np.asarray(uncertainties, dtype=float)
    err = _check_flags(error_flags)
    if u.shape != err.shape:
        raise RiskError(f"length mismatch: {u.shape[0]} uncertainties vs {err.shape[0]} flags")
    accepted = u <= tau
    n = int(accepted.sum())
    if n == 0:
        return 0.0
    return float((err[accepted] == 1).sum() / n)


def calibrate_threshold(
    uncertainties: Sequence[float], error_flags: Sequence[int], spec: RiskSpec
) -> CalibrationOutcome:
    """Largest threshold whose upper FDR bound stays at or below alpha.

    Candidates are the sorted unique uncertainty values; records tied at
    a candidate are accepted jointly. Returns an infeasible outcome (not
    an error) when every candidate's bound exceeds alpha.
    """
    spec.validate()
    u = np.asarray(uncertainties, dtype=float)
    err = _check_flags(error_flags)
    if u.shape != err.shape:
        raise RiskError(f"length mismatch: {u.shape[0]} uncertainties vs {err.shape[0]} flags")
    if u.size == 0:
        raise RiskError("need at least one calibration point")

    order = np.argsort(u, kind="stable")
    u_sorted = u[order]
    err_cum = np.cumsum(err[order])
    # index of the last occurrence of each unique candidate value
    candidates, last_idx = np.unique(u_sorted[::-1], return_index=True)
    last_idx = u.size - 1 - last_idx

    trace: list[TracePoint] = []
    threshold: float | None = None
    for tau, idx in zip(candidates, last_idx):
        n_accepted = int(idx) + 1
        n_errors = int(err_cum[idx])
        bound = cp_upper_bound(n_errors, n_accepted, spec.delta)
        trace.append(TracePoint(float(tau), n_accepted, n_errors, bound))
        if bound <= spec.alpha:
            threshold = float(tau)
    return CalibrationOutcome(feasible=threshold is not None, threshold=threshold, trace=tuple(trace))
