"""Estimators of the OU drift from the observable transformed process.

Three routes, all invariant under strictly increasing transformations of the
observations:

* rank correlation: invert ``rho_S(Y_0, Y_k) = (6/pi) arcsin(e^{-alpha k}/2)``;
* sign statistics: invert the orthant probability ``p_k = 1/4 +
  arcsin(e^{-alpha k}) / (2 pi)`` through the link ``g``;
* band crossings: renewal rate of completed transits between two levels known
  through their stationary CDF values, scaled by the standardized mean
  excursion time.

Lags are converted to time with the path's ``dt``, so estimates are per unit
time.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import erf, erfcx, ndtri
from scipy.stats import qmc

from .dependence import rho_from_spearman, spearman_rho
from .errors import DataError, DomainError, InsufficientDataError
from .ou import SamplePath, increment_correlation, OUParams
from .rng import RngSeed


class AlphaMethod(str, Enum):
    RANK_CORR = "rank_corr"
    RANK_CORR_INCREMENTS = "rank_corr_increments"
    SIGN_KNOWN_MEDIAN = "sign_known_median"
    SIGN_EMPIRICAL_MEDIAN = "sign_empirical_median"
    BAND_CROSSING = "band_crossing"


@dataclass(frozen=True)
class BandSpec:
    """Two levels with known stationary CDF values.

    The standardized levels ``a* = ndtri(F(A)) / sqrt(2)`` and ``b*`` place
    the band on the unit OU process (drift 1, diffusion 1), whose stationary
    law is N(0, 1/2).
    """

    A: float
    B: float
    f_at_A: float
    f_at_B: float

    def __post_init__(self):
        if not (0.0 < self.f_at_A < self.f_at_B < 1.0):
            raise DomainError("need 0 < F(A) < F(B) < 1")
        if not self.A < self.B:
            raise DomainError("need A < B")

    @property
    def a_star(self) -> float:
        return ndtri(self.f_at_A) / math.sqrt(2.0)

    @property
    def b_star(self) -> float:
        return ndtri(self.f_at_B) / math.sqrt(2.0)

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "f_at_A": self.f_at_A, "f_at_B": self.f_at_B}


@dataclass(frozen=True)
class AlphaEstimate:
    """A drift estimate with its method tag and diagnostics.

    When the underlying statistic falls outside the model range (for the
    sign methods, ``p_hat`` outside (1/4, 1/2); for the rank method a
    non-positive fitted correlation) the estimate is flagged with
    ``in_domain=False`` instead of silently returning NaN.
    """

    method: AlphaMethod
    value: float
    n_used: int
    k: int | None = None
    band: BandSpec | None = None
    diagnostics: dict = field(default_factory=dict)
    in_domain: bool = True
    note: str | None = None

    def to_dict(self) -> dict:
        d = {
            "method": self.method.value,
            "value": self.value,
            "n_used": self.n_used,
            "in_domain": self.in_domain,
            "diagnostics": dict(self.diagnostics),
        }
        if self.k is not None:
            d["k"] = self.k
        if self.band is not None:
            d["band"] = self.band.to_dict()
        if self.note is not None:
            d["note"] = self.note
        return d


def sign_prob(alpha: float, k: float) -> float:
    """Orthant probability ``P(X_0 > 0, X_k > 0) = 1/4 + arcsin(e^{-alpha k}) / (2 pi)``."""
    if not (alpha > 0 and k > 0):
        raise DomainError("alpha and k must be positive")
    return 0.25 + math.asin(math.exp(-alpha * k)) / (2.0 * math.pi)


def g_link(x: float) -> float:
    """Link ``g(x) = -log(sin(2 pi (x - 1/4)))`` with ``g(sign_prob(a, k)) = a k``."""
    if not (0.25 < x < 0.5):
        raise DomainError("argument must lie strictly inside (1/4, 1/2)")
    return -math.log(math.sin(2.0 * math.pi * (x - 0.25)))


def alpha_from_spearman(rho_s: float, time_lag: float) -> float:
    """Drift solving ``rho_S = (6/pi) arcsin(e^{-alpha lag}/2)``; exact inverse."""
    if not time_lag > 0:
        raise DomainError("time_lag must be positive")
    r = rho_from_spearman(rho_s)
    if r <= 0:
        raise DomainError("fitted correlation must be positive")
    return -math.log(r) / time_lag


def _lag_pairs(series: SamplePath, k: int) -> tuple[np.ndarray, np.ndarray]:
    k = int(k)
    if k < 1:
        raise DomainError("lag k must be a positive integer")
    if len(series) < k + 2:
        raise InsufficientDataError(f"need at least {k + 2} observations for lag {k}")
    v = series.values
    return v[:-k], v[k:]


def alpha_rank(series: SamplePath, k: int) -> AlphaEstimate:
    """Rank-correlation estimate ``-log(2 sin(pi rho_S / 6)) / (k dt)``.

    ``rho_S`` is the sample Spearman correlation of the lag-``k`` pairs.
    Requires approximate stationarity of the levels; block trended series
    upstream.
    """
    first, second = _lag_pairs(series, k)
    rho_s = spearman_rho(first, second)
    r = rho_from_spearman(rho_s)
    diag = {"rho_s": rho_s, "rho": r}
    if r <= 0.0:
        return AlphaEstimate(
            method=AlphaMethod.RANK_CORR,
            value=math.nan,
            n_used=first.size,
            k=int(k),
            diagnostics=diag,
            in_domain=False,
            note="dependence too weak at this lag: fitted correlation is non-positive",
        )
    return AlphaEstimate(
        method=AlphaMethod.RANK_CORR,
        value=-math.log(r) / (k * series.dt),
        n_used=first.size,
        k=int(k),
        diagnostics=diag,
    )


def _sign_estimate(series, k, median, method) -> AlphaEstimate:
    first, second = _lag_pairs(series, k)
    p_hat = float(np.mean((first > median) & (second > median)))
    diag = {"p_hat": p_hat, "median": float(median)}
    if not (0.25 < p_hat < 0.5):
        return AlphaEstimate(
            method=method,
            value=math.nan,
            n_used=first.size,
            k=int(k),
            diagnostics=diag,
            in_domain=False,
            note="p_hat outside (1/4, 1/2): estimate undefined at this sample size",
        )
    return AlphaEstimate(
        method=method,
        value=g_link(p_hat) / (k * series.dt),
        n_used=first.size,
        k=int(k),
        diagnostics=diag,
    )


def alpha_sign_known_median(series: SamplePath, k: int, median: float) -> AlphaEstimate:
    """Sign estimate ``g(p_hat) / (k dt)`` with the stationary median known.

    ``p_hat`` is the fraction of lag-``k`` pairs with both coordinates above
    the median (strict inequalities).
    """
    return _sign_estimate(series, k, median, AlphaMethod.SIGN_KNOWN_MEDIAN)


def alpha_sign_empirical_median(series: SamplePath, k: int) -> AlphaEstimate:
    """Sign estimate with the empirical median of the whole series plugged in.

    For even lengths the median is the midpoint of the central order
    statistics.  Empirically this variant has smaller mean squared error
    than the known-median one.
    """
    return _sign_estimate(
        series, k, float(np.median(series.values)), AlphaMethod.SIGN_EMPIRICAL_MEDIAN
    )


class VarianceEstimate(NamedTuple):
    """A variance value together with its Monte Carlo standard error."""

    value: float
    std_error: float


def _orthant_probability_qmc(cov: np.ndarray, mc_size: int, g_seeds) -> tuple[float, float]:
    """P(all coordinates > 0) for a centred Gaussian, by scrambled-Sobol QMC.

    The budget is split over 8 independently scrambled replicates whose
    spread yields the standard-error estimate; the replicate size is rounded
    down to a power of two to keep the Sobol balance properties.
    """
    dim = cov.shape[0]
    chol = np.linalg.cholesky(cov)
    reps = 8
    m = 2 ** max(1, int(math.floor(math.log2(max(2, mc_size // reps)))))
    means = np.empty(reps)
    for r in range(reps):
        sob = qmc.Sobol(d=dim, scramble=True, seed=g_seeds(r)).random(m)
        z = ndtri(np.clip(sob, 1e-15, 1.0 - 1e-15))
        means[r] = np.mean(np.all(z @ chol.T > 0.0, axis=1))
    return float(means.mean()), float(means.std(ddof=1) / math.sqrt(reps))


def asymptotic_variance(
    alpha: float, k: int, n_terms: int, mc_size: int, rng: RngSeed
) -> VarianceEstimate:
    """Asymptotic variance ``v_k^2`` of the sign statistic ``p_hat_k``.

    ``v_k^2 = p_k (1 - p_k) + 2 sum_{l>=1} (P(X_{k+l} > 0, X_l > 0, X_k > 0,
    X_0 > 0) - p_k^2)`` truncated at ``l <= n_terms``.  Each four-dimensional
    orthant probability (three-dimensional when ``l = k`` collapses two
    coordinates) has no closed form and is estimated by quasi-Monte Carlo
    with ``mc_size`` points under the covariance ``exp(-alpha |t_i - t_j|)``.
    The reported standard error aggregates the per-term QMC errors.
    """
    k = int(k)
    if k < 1:
        raise DomainError("k must be a positive integer")
    n_terms = int(n_terms)
    if n_terms < 1:
        raise DomainError("n_terms must be a positive integer")
    p = sign_prob(alpha, k)
    total = p * (1.0 - p)
    se_sq = 0.0
    for l in range(1, n_terms + 1):
        times = sorted({0, k, l, l + k})
        t = np.asarray(times, dtype=float)
        cov = np.exp(-alpha * np.abs(t[:, None] - t[None, :]))
        prob, se = _orthant_probability_qmc(
            cov, mc_size, lambda r, l=l: rng.child_generator(l, r)
        )
        total += 2.0 * (prob - p * p)
        se_sq += 4.0 * se * se
    return VarianceEstimate(value=total, std_error=math.sqrt(se_sq))


class Theorem4Moments(NamedTuple):
    """Exact and leading-order moments of the sign statistics for i.i.d. data.

    ``var_p`` is the leading-order ``1/(16 n)`` term only.
    """

    mean_p0: float
    var_p0: float
    mean_p: float
    var_p: float


def theorem4_moments(n: int, k: int) -> Theorem4Moments:
    """Small-sample moments of ``p_hat^0_k`` and ``p_hat_k`` under independence.

    For ``n`` i.i.d. continuous observations and ``n_k = n - k`` pairs:
    ``E p_hat^0 = 1/4`` exactly, ``Var p_hat^0 = 5/(16 n_k) - k/(8 n_k^2)``
    exactly, ``E p_hat = 1/4 - 3/(4n)`` for odd ``n`` (``(n-2)/(4(n-1))``
    for even), and ``Var p_hat = 1/(16 n)`` to leading order.
    """
    n, k = int(n), int(k)
    if k < 1 or n < 2:
        raise DomainError("need n >= 2 and k >= 1")
    if k >= n:
        raise DomainError("need k < n")
    n_k = n - k
    var_p0 = 5.0 / (16.0 * n_k) - k / (8.0 * n_k**2)
    mean_p = (n - 3.0) / (4.0 * n) if n % 2 else (n - 2.0) / (4.0 * (n - 1.0))
    return Theorem4Moments(mean_p0=0.25, var_p0=var_p0, mean_p=mean_p, var_p=1.0 / (16.0 * n))


def mean_transit_down(b: float, a: float) -> float:
    """Mean time for the unit OU to reach ``a`` from ``b > a``.

    Equals ``int_a^b sqrt(pi) e^{x^2} erfc(x) dx`` from the scale/speed
    representation of the generator ``(1/2) d^2/dx^2 - x d/dx``.
    """
    if not a < b:
        raise DomainError("need a < b")
    val, _ = quad(lambda x: math.sqrt(math.pi) * erfcx(x), a, b, epsabs=0.0, epsrel=1e-10, limit=200)
    return val


def mean_transit_up(a: float, b: float) -> float:
    """Mean time for the unit OU to reach ``b`` from ``a < b``.

    Equals ``int_a^b sqrt(pi) e^{x^2} (1 + erf(x)) dx``.
    """
    if not a < b:
        raise DomainError("need a < b")
    val, _ = quad(
        lambda x: math.sqrt(math.pi) * math.exp(x * x) * (1.0 + erf(x)),
        a,
        b,
        epsabs=0.0,
        epsrel=1e-10,
        limit=200,
    )
    return val


def mean_excursion_time(band: BandSpec) -> float:
    """Mean round-trip time ``b* -> a* -> b*`` for the unit OU.

    Computed by quadrature of the two mean-first-passage integrals; relative
    accuracy better than 1e-6.
    """
    a, b = band.a_star, band.b_star
    if a == b:
        raise DataError("degenerate band: a* equals b*")
    return mean_transit_down(b, a) + mean_transit_up(a, b)


def count_band_transits(values: np.ndarray, lower: float, upper: float) -> int:
    """Completed directed transits from above ``upper`` to below ``lower``.

    A transit arms when a sample exceeds ``upper``, completes at the first
    later sample below ``lower``, and cannot restart until the series rises
    above ``upper`` again.
    """
    events = np.where(values > upper, 1, np.where(values < lower, -1, 0))
    events = events[events != 0]
    if events.size == 0:
        return 0
    changes = events[np.r_[True, events[1:] != events[:-1]]]
    return int(np.sum((changes[:-1] == 1) & (changes[1:] == -1)))


def alpha_band_crossing(series: SamplePath, band: BandSpec, horizon: float) -> AlphaEstimate:
    """Renewal estimate ``m(a*, b*) N_{A,B}(T) / T`` from band crossings.

    ``N`` counts completed transits from level ``B`` down to level ``A``
    within the first ``horizon`` time units.  Discrete sampling misses
    transits faster than ``dt``; keep the band at least ~0.5 stationary
    standard deviations wide.
    """
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    if horizon > series.duration * (1.0 + 1e-12):
        raise DomainError("horizon exceeds the series duration")
    n_use = int(math.floor(horizon / series.dt)) + 1
    values = series.values[:n_use]
    n_crossings = count_band_transits(values, band.A, band.B)
    m_star = mean_excursion_time(band)
    diag = {
        "n_crossings": float(n_crossings),
        "mean_excursion": m_star,
        "a_star": band.a_star,
        "b_star": band.b_star,
    }
    if n_crossings == 0:
        warnings.warn("no completed band transits; estimate reported as 0", stacklevel=2)
        return AlphaEstimate(
            method=AlphaMethod.BAND_CROSSING,
            value=0.0,
            n_used=values.size,
            band=band,
            diagnostics=diag,
            in_domain=False,
            note="insufficient crossings",
        )
    return AlphaEstimate(
        method=AlphaMethod.BAND_CROSSING,
        value=m_star * n_crossings / horizon,
        n_used=values.size,
        band=band,
        diagnostics=diag,
    )


def alpha_rank_increments(increments: SamplePath, delta: int, k: int) -> AlphaEstimate:
    """Drift estimate from Spearman's rho of lag-``k`` increment pairs.

    Matches the fitted correlation ``2 sin(pi rho_S / 6)`` to the stationary
    increment-correlation curve in ``alpha`` and solves for the root.  Well
    posed for ``k < delta`` where the curve starts at ``(delta - k)/delta``
    and decreases; infeasible fits are flagged.  ``delta`` is the lag (in
    samples) that produced the increment series.
    """
    delta = int(delta)
    if delta < 1:
        raise DomainError("delta must be a positive integer")
    first, second = _lag_pairs(increments, k)
    rho_s = spearman_rho(first, second)
    r = rho_from_spearman(rho_s)
    diag = {"rho_s": rho_s, "rho": r, "delta": float(delta)}
    dt = increments.dt
    k_t, d_t = k * dt, delta * dt

    def curve(alpha):
        return increment_correlation(OUParams(alpha, 1.0), d_t, k_t) - r

    grid = np.geomspace(1e-8 / dt, 1e3 / dt, 600)
    fvals = [curve(a) for a in grid]
    root = None
    for i in range(len(grid) - 1):
        if fvals[i] == 0.0:
            root = grid[i]
            break
        if fvals[i] * fvals[i + 1] < 0.0:
            root = brentq(curve, grid[i], grid[i + 1], xtol=1e-14, rtol=8.9e-16)
            break
    if root is None:
        return AlphaEstimate(
            method=AlphaMethod.RANK_CORR_INCREMENTS,
            value=math.nan,
            n_used=first.size,
            k=int(k),
            diagnostics=diag,
            in_domain=False,
            note="fitted correlation outside the attainable increment-correlation range",
        )
    return AlphaEstimate(
        method=AlphaMethod.RANK_CORR_INCREMENTS,
        value=float(root),
        n_used=first.size,
        k=int(k),
        diagnostics=diag,
    )
