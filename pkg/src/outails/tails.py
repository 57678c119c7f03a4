"""Empirical tail-index estimation: Hill estimator and log-log least squares.

Both estimators act on one tail at a time.  The left tail of a sample is
handled by negating the data, so left-tail estimation is exactly right-tail
estimation of ``-data``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError, DomainError, InsufficientDataError


class Side(str, Enum):
    LEFT = "left"
    RIGHT = "right"


def as_side(side) -> Side:
    return side if isinstance(side, Side) else Side(str(side).lower())


@dataclass(frozen=True)
class TailEstimate:
    """A one-sided tail-index estimate.

    ``fraction_pct`` is the share of the sample actually used (``100 k / n``)
    and ``k_used`` the number of order statistics entering the fit.
    ``r_squared`` is filled by the least-squares method only.
    """

    side: Side
    method: str
    index: float
    fraction_pct: float
    k_used: int
    r_squared: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.index) and self.index > 0):
            raise DataError("tail index must be finite and positive")
        if self.k_used < 2:
            raise DataError("tail estimate needs at least two order statistics")

    def to_dict(self) -> dict:
        d = {
            "side": self.side.value,
            "method": self.method,
            "index": self.index,
            "fraction_pct": self.fraction_pct,
            "k_used": self.k_used,
        }
        if self.r_squared is not None:
            d["r_squared"] = self.r_squared
        return d


def _oriented(data, side: Side) -> np.ndarray:
    arr = np.asarray(data, dtype=float).ravel()
    return -arr if as_side(side) is Side.LEFT else arr


def hill_estimator(data, side, p_pct: float) -> TailEstimate:
    """Hill estimate of the tail index from the top ``p_pct`` percent.

    With descending order statistics ``V_1 >= ... >= V_n`` of the (side
    oriented) sample and ``k = max(2, floor(p_pct n / 100))``,

        1 / index = mean over i < k of log(V_i / V_k).

    Ties contribute zero terms; the estimate is scale invariant.
    """
    if not (0.0 < p_pct <= 100.0):
        raise DomainError("p_pct must lie in (0, 100]")
    v = _oriented(data, side)
    n = v.size
    if n < 2:
        raise InsufficientDataError("need at least two observations")
    k = max(2, int(math.floor(p_pct * n / 100.0)))
    if k > n:
        raise InsufficientDataError(f"need at least k={k} observations, got {n}")
    v = np.sort(v)[::-1]
    threshold = v[k - 1]
    if threshold <= 0:
        raise DataError("nonpositive threshold order statistic; tail fraction too large")
    inv_index = float(np.mean(np.log(v[: k - 1] / threshold)))
    if inv_index <= 0:
        raise DataError("degenerate tail: no spacing between top order statistics")
    return TailEstimate(
        side=as_side(side),
        method="hill",
        index=1.0 / inv_index,
        fraction_pct=100.0 * k / n,
        k_used=k,
    )


def loglog_tail_fit(data, side, fraction: float) -> TailEstimate:
    """Least-squares slope of the empirical tail on log-log scale.

    Fits ``log(rank / n)`` against ``log value`` over the top ``fraction`` of
    the (side oriented) sample, ranks counted from the largest value.  The
    index is minus the fitted slope.  Exact for exact power-law tails; for
    noisy data the fit carries more bias than the Hill estimate.
    """
    if not (0.0 < fraction < 1.0):
        raise DomainError("fraction must lie in (0, 1)")
    v = _oriented(data, side)
    n = v.size
    if n < 2:
        raise InsufficientDataError("need at least two observations")
    m = max(2, int(math.floor(fraction * n)))
    v = np.sort(v)[::-1][:m]
    positive = v > 0
    v = v[positive]
    if v.size < 2:
        raise InsufficientDataError("fewer than two positive tail values")
    ranks = np.arange(1, v.size + 1, dtype=float)
    x = np.log(v)
    y = np.log(ranks / n)
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise DataError("singular fit: all tail values equal")
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    syy = float(np.sum((y - y.mean()) ** 2))
    slope = sxy / sxx
    r_squared = (sxy * sxy) / (sxx * syy) if syy > 0 else 1.0
    if slope >= 0:
        raise DataError("non-decaying tail: least-squares slope is non-negative")
    return TailEstimate(
        side=as_side(side),
        method="loglog_ls",
        index=-slope,
        fraction_pct=100.0 * v.size / n,
        k_used=int(v.size),
        r_squared=r_squared,
    )


def empirical_tail(data, x: float, side) -> float:
    """Fraction of observations above ``x`` (right) or below ``-x`` (left)."""
    v = _oriented(data, side)
    if v.size == 0:
        raise InsufficientDataError("empty sample")
    return float(np.mean(v > x))


def tail_curve(data, side) -> tuple[np.ndarray, np.ndarray]:
    """Log-log coordinates of the empirical tail for plotting.

    Returns ``(log values, log tail probabilities)`` over the positive part
    of the (side oriented) sample, sorted from the largest value down.
    """
    v = _oriented(data, side)
    n = v.size
    if n == 0:
        raise InsufficientDataError("empty sample")
    v = np.sort(v)[::-1]
    v = v[v > 0]
    ranks = np.arange(1, v.size + 1, dtype=float)
    return np.log(v), np.log(ranks / n)
