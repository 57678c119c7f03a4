"""Data ingestion and the exploratory analysis pipeline.

Price CSVs are loaded as (date, price) rows and analysed through their log
prices: increments over configurable lags, per-lag Spearman profiles (blocked
for levels, pooled for increments), a tail-index report across lags and
sides, and synthetic dataset generation for tutorials and oracles.
"""

from __future__ import annotations

import csv
import datetime as dt
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .dependence import spearman_rho
from .errors import DataError, DomainError, InsufficientDataError, ParseError
from .ou import OUParams, SamplePath, simulate_stationary
from .rng import RngSeed
from .tails import Side, TailEstimate, hill_estimator, loglog_tail_fit, tail_curve
from .transform import PaperTransform, Transform, apply_flagged

# separates power tails from lognormal curvature for samples of ~1e5+ at
# the default 5% fraction; smaller samples are too noisy for the flag
_R2_FLAG_THRESHOLD = 0.995


@dataclass(frozen=True)
class PriceSeries:
    """Dated positive prices; log prices are taken on load."""

    dates: tuple[dt.date, ...]
    prices: np.ndarray

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        if prices.ndim != 1 or prices.size == 0:
            raise DataError("prices must be a non-empty 1-d sequence")
        if len(self.dates) != prices.size:
            raise DataError("dates and prices must have equal length")
        if np.any(~np.isfinite(prices)) or np.any(prices <= 0):
            raise DataError("prices must be finite and positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise DataError("dates must be strictly increasing")
        prices = prices.copy()
        prices.setflags(write=False)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "dates", tuple(self.dates))

    def __len__(self) -> int:
        return self.prices.size

    @property
    def log_prices(self) -> np.ndarray:
        return np.log(self.prices)

    def as_path(self) -> SamplePath:
        """Log prices on a unit (trading-day) grid."""
        return SamplePath(t0=0.0, dt=1.0, values=self.log_prices)


@dataclass(frozen=True)
class AnalysisConfig:
    """Knobs of the exploratory pipeline; mirrors the CLI/config file."""

    delta_list: tuple[int, ...] = (1, 5, 10, 20)
    k_max: int = 35
    block_len: int = 100
    tail_fractions: tuple[float, ...] = (0.02, 0.05)
    loglog_fraction: float = 0.05
    gof_stride: int = 10
    gof_lag: int = 5
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        if any(int(d) < 1 for d in self.delta_list):
            raise DomainError("all increment lags must be positive integers")
        if self.k_max < 1:
            raise DomainError("k_max must be positive")
        if self.block_len < 20:
            raise DomainError("block_len must be at least 20")
        if any(not 0.0 < f < 1.0 for f in self.tail_fractions):
            raise DomainError("tail fractions must lie in (0, 1)")
        if not 0.0 < self.loglog_fraction < 1.0:
            raise DomainError("loglog_fraction must lie in (0, 1)")
        if self.gof_stride < 1 or self.gof_lag < 1:
            raise DomainError("gof_stride and gof_lag must be positive")
        object.__setattr__(self, "delta_list", tuple(int(d) for d in self.delta_list))
        object.__setattr__(self, "tail_fractions", tuple(float(f) for f in self.tail_fractions))

    @classmethod
    def from_dict(cls, d: dict) -> "AnalysisConfig":
        d = dict(d)
        seed = d.pop("seed", 0)
        stream = d.pop("stream_id", 0)
        known = {f for f in cls.__dataclass_fields__ if f != "seed"}
        unknown = set(d) - known
        if unknown:
            raise DataError(f"unknown config keys: {sorted(unknown)}")
        if "delta_list" in d:
            d["delta_list"] = tuple(d["delta_list"])
        if "tail_fractions" in d:
            d["tail_fractions"] = tuple(d["tail_fractions"])
        return cls(seed=RngSeed(int(seed), int(stream)), **d)

    def to_dict(self) -> dict:
        return {
            "delta_list": list(self.delta_list),
            "k_max": self.k_max,
            "block_len": self.block_len,
            "tail_fractions": list(self.tail_fractions),
            "loglog_fraction": self.loglog_fraction,
            "gof_stride": self.gof_stride,
            "gof_lag": self.gof_lag,
            "seed": self.seed.seed,
            "stream_id": self.seed.stream_id,
        }


def load_csv(path) -> PriceSeries:
    """Read a two-column (ISO date, decimal price) CSV; header auto-detected.

    Malformed rows and non-positive prices raise a parse error carrying the
    1-based line number.
    """
    dates: list[dt.date] = []
    prices: list[float] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 2:
                raise ParseError("expected two columns (date, price)", line=lineno)
            date_s, price_s = row[0].strip(), row[1].strip()
            try:
                date = dt.date.fromisoformat(date_s)
                price = float(price_s)
            except ValueError:
                if lineno == 1:  # header row
                    continue
                raise ParseError(f"could not parse row {row!r}", line=lineno) from None
            if not math.isfinite(price) or price <= 0:
                raise ParseError(f"non-positive price {price_s!r}", line=lineno)
            dates.append(date)
            prices.append(price)
    if not dates:
        raise DataError(f"empty input: no data rows in {path}")
    try:
        return PriceSeries(dates=tuple(dates), prices=np.asarray(prices))
    except DataError as exc:
        raise ParseError(str(exc)) from exc


def _values_of(series) -> np.ndarray:
    if isinstance(series, PriceSeries):
        return series.log_prices
    if isinstance(series, SamplePath):
        return series.values
    return np.asarray(series, dtype=float)


def log_returns(series, delta: int) -> SamplePath:
    """Increments ``Z_t - Z_{t-delta}`` of the log prices (or raw values).

    For a :class:`PriceSeries` the values are log prices on a unit grid; a
    :class:`SamplePath` keeps its own spacing.
    """
    delta = int(delta)
    if delta < 1:
        raise DomainError("delta must be a positive integer")
    values = _values_of(series)
    if delta >= values.size:
        raise DomainError(f"delta={delta} needs more than {delta} observations")
    t0, step = (series.t0, series.dt) if isinstance(series, SamplePath) else (0.0, 1.0)
    return SamplePath(t0=t0 + delta * step, dt=step, values=values[delta:] - values[:-delta])


def spearman_profile(series, k_max: int, mode: str = "levels", delta: int | None = None,
                     block_len: int | None = None) -> list[tuple[int, float]]:
    """Spearman's rho per lag ``k = 1..k_max``.

    ``mode="levels"`` averages per-block estimates over consecutive blocks of
    ``block_len`` (the whole series as one block when ``block_len`` is None)
    to damp slow trends; ``mode="increments"`` pools lag-``delta`` increments
    over the full sample.  Lags without enough pairs are omitted with a
    warning.
    """
    if mode not in ("levels", "increments"):
        raise DomainError("mode must be 'levels' or 'increments'")
    values = _values_of(series)
    if mode == "increments":
        if delta is None:
            raise DomainError("increments mode requires delta")
        values = log_returns(values, delta).values
        blocks = [values]
    else:
        if block_len is None:
            blocks = [values]
        else:
            block_len = int(block_len)
            if block_len < 2:
                raise DomainError("block_len must be at least 2")
            blocks = [
                values[i : i + block_len]
                for i in range(0, values.size - block_len + 1, block_len)
            ]
            if not blocks:
                blocks = [values]
    out: list[tuple[int, float]] = []
    for k in range(1, int(k_max) + 1):
        rhos = []
        for block in blocks:
            if block.size - k < 2:
                continue
            try:
                rhos.append(spearman_rho(block[:-k], block[k:]))
            except DataError:
                continue
        if not rhos:
            warnings.warn(f"lag {k} omitted: insufficient pairs", stacklevel=2)
            continue
        out.append((k, float(np.mean(rhos))))
    return out


@dataclass(frozen=True)
class TailReportCell:
    """One (delta, side, method) entry; either an estimate or an error note."""

    delta: int
    side: Side
    label: str
    estimate: TailEstimate | None = None
    error: str | None = None
    poor_fit: bool = False

    def to_dict(self) -> dict:
        d = {"delta": self.delta, "side": self.side.value, "label": self.label}
        if self.estimate is not None:
            d["estimate"] = self.estimate.to_dict()
        if self.error is not None:
            d["error"] = self.error
        if self.poor_fit:
            d["poor_fit"] = True
        return d


@dataclass(frozen=True)
class TailReport:
    """Tail-index estimates across increment lags, plus plot curves."""

    cells: tuple[TailReportCell, ...]
    curves: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"cells": [c.to_dict() for c in self.cells]}

    def cell(self, delta: int, side, label: str) -> TailReportCell:
        side = Side(side)
        for c in self.cells:
            if c.delta == delta and c.side is side and c.label == label:
                return c
        raise KeyError((delta, side, label))


def run_tail_report(series, config: AnalysisConfig,
                    r2_threshold: float = _R2_FLAG_THRESHOLD) -> TailReport:
    """Least-squares and Hill tail estimates for every lag and side.

    Produces one least-squares cell (flagged ``poor_fit`` when the log-log
    fit has ``R^2 < r2_threshold``, as for data without a power tail) and one
    Hill cell per configured fraction.  Per-cell failures are recorded
    instead of aborting the report.
    """
    cells: list[TailReportCell] = []
    curves: dict = {}
    for delta in config.delta_list:
        try:
            increments = log_returns(series, delta).values
        except (DataError, DomainError) as exc:
            for side in (Side.LEFT, Side.RIGHT):
                cells.append(
                    TailReportCell(delta=delta, side=side, label="loglog", error=str(exc))
                )
            continue
        for side in (Side.LEFT, Side.RIGHT):
            try:
                curves[(delta, side.value)] = tail_curve(increments, side)
            except DataError:
                pass
            try:
                est = loglog_tail_fit(increments, side, config.loglog_fraction)
                cells.append(
                    TailReportCell(
                        delta=delta,
                        side=side,
                        label="loglog",
                        estimate=est,
                        poor_fit=bool(est.r_squared is not None and est.r_squared < r2_threshold),
                    )
                )
            except (DataError, DomainError) as exc:
                cells.append(TailReportCell(delta=delta, side=side, label="loglog", error=str(exc)))
            for frac in config.tail_fractions:
                label = f"hill_{100 * frac:g}pct"
                try:
                    est = hill_estimator(increments, side, 100.0 * frac)
                    cells.append(TailReportCell(delta=delta, side=side, label=label, estimate=est))
                except (DataError, DomainError) as exc:
                    cells.append(TailReportCell(delta=delta, side=side, label=label, error=str(exc)))
    return TailReport(cells=tuple(cells), curves=curves)


@dataclass(frozen=True)
class SimulatedDataset:
    """A transformed-OU draw with its generation metadata."""

    path: SamplePath
    overflow_flags: np.ndarray
    metadata: dict

    def to_metadata_dict(self) -> dict:
        return dict(self.metadata)


def simulate_dataset(params: OUParams, h: Transform, n: int, dt: float,
                     seed: RngSeed) -> SimulatedDataset:
    """Simulate ``Y = h(X)`` on a uniform grid; overflow flags are recorded."""
    x = simulate_stationary(params, n, dt, seed)
    y, flags = apply_flagged(h, x.values)
    metadata = {
        "alpha": params.alpha,
        "tau": params.tau,
        "transform": h.to_dict(),
        "n": int(n),
        "dt": float(dt),
        "seed": seed.seed,
        "stream_id": seed.stream_id,
        "n_overflow": int(np.sum(flags)),
    }
    return SimulatedDataset(
        path=SamplePath(t0=x.t0, dt=x.dt, values=y), overflow_flags=flags, metadata=metadata
    )


def gen_synthetic(alpha: float = 0.05, n: int = 2061, seed: RngSeed = RngSeed(0)) -> PriceSeries:
    """Synthetic paper-like price series from a standardized transformed OU.

    The driver is scaled to unit stationary variance (``tau = sqrt(2
    alpha)``), pushed through the fixed example transform and exponentiated
    into prices on consecutive calendar dates from 2003-01-01.
    """
    params = OUParams(alpha=alpha, tau=math.sqrt(2.0 * alpha))
    data = simulate_dataset(params, PaperTransform(), n=n, dt=1.0, seed=seed)
    start = dt.date(2003, 1, 1)
    dates = tuple(start + dt.timedelta(days=i) for i in range(len(data.path)))
    return PriceSeries(dates=dates, prices=np.exp(data.path.values))


def rarefy_pairs(increments: np.ndarray, lag: int, stride: int) -> tuple[np.ndarray, np.ndarray]:
    """Weakly dependent pairs ``(D_t, D_{t+lag})`` taken every ``stride`` steps."""
    lag, stride = int(lag), int(stride)
    if lag < 1 or stride < 1:
        raise DomainError("lag and stride must be positive")
    if increments.size <= lag:
        raise InsufficientDataError("too few increments for the requested lag")
    first = increments[:-lag][::stride]
    second = increments[lag:][::stride]
    return first, second
