"""Realized variance from intraday prices and the Hansen-Lunde scale factor.

Prices are sampled on a regular grid inside each trading session with
previous-tick interpolation, the grid always ending at the session close; returns never span the lunch break or the
overnight gap. The HL factor rescales RV so that its mean over the
sample matches the variance of close-to-close daily returns.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ._io import atomic_open
from .chain import VolPath
from .timeseries import ValidationError, as_dates

DEFAULT_DELTAS = (1, 2, 3, 5, 10, 15, 20)


@dataclass(frozen=True)
class RvSeries:
    """Per-day realized variance at sampling interval ``interval`` minutes."""

    dates: np.ndarray
    rv: np.ndarray
    interval: float
    hl_factor: float | None = None

    def __post_init__(self):
        dates = as_dates(self.dates)
        rv = np.asarray(self.rv, dtype=np.float64)
        if dates.shape != rv.shape:
            raise ValidationError("dates and rv differ in length")
        if np.any(rv < 0):
            raise ValidationError("realized variance must be non-negative")
        if self.hl_factor is not None and not self.hl_factor > 0:
            raise ValidationError("HL factor must be positive")
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "rv", rv)

    def __len__(self):
        return len(self.rv)

    @property
    def adjusted(self):
        """``c * RV_t``; requires the HL factor to be attached."""
        if self.hl_factor is None:
            raise ValueError("HL factor not attached; call adjust_rv first")
        return self.hl_factor * self.rv


def _grid(open_s, close_s, step):
    # A session whose length is not a multiple of ``step`` gets a final,
    # shorter interval ending at the close, so no session time is lost.
    k = int(np.floor((close_s - open_s) / step + 1e-9))
    grid = open_s + step * np.arange(k + 1)
    if close_s - grid[-1] > 1e-6:
        grid = np.append(grid, close_s)
    return grid


def _day_returns(times, logp, sessions, step):
    out = []
    for o, c in sessions:
        lo = np.searchsorted(times, o, side="left")
        hi = np.searchsorted(times, c, side="right")
        if hi - lo < 1:
            continue
        ts, ps = times[lo:hi], logp[lo:hi]
        j = np.searchsorted(ts, _grid(o, c, step), side="right") - 1
        j = j[j >= 0]
        if len(j) >= 2:
            out.append(np.diff(ps[j]))
    return out


def intraday_returns(panel, delta, _logs=None):
    """Intraday log-returns per day at a ``delta``-minute grid.

    Returns ``(days, returns, warnings)`` where ``returns[d]`` is the
    concatenation of within-session returns for ``days[d]``. Days where no
    session has two grid points are excluded with a warning.
    """
    if not delta > 0:
        raise ValueError("sampling interval must be positive")
    step = float(delta) * 60.0
    logs = _logs if _logs is not None else [np.log(p) for p in panel.prices]
    days, rets, warnings = [], [], []
    for d, t, lp in zip(panel.days, panel.times, logs):
        parts = _day_returns(t, lp, panel.calendar.sessions, step)
        if not parts:
            warnings.append(f"{d}: fewer than 2 grid points in every session at {delta} min, day excluded")
            continue
        days.append(d)
        rets.append(np.concatenate(parts))
    return as_dates(days), rets, warnings


def realized_volatility(panel, delta, _logs=None):
    """Unadjusted realized variance ``RV_t = sum_i r_{t,i}^2``."""
    days, rets, _ = intraday_returns(panel, delta, _logs)
    rv = np.array([float(np.dot(r, r)) for r in rets])
    return RvSeries(days, rv, float(delta))


def _aligned(daily, rv):
    common, i_d, i_r = np.intersect1d(daily.dates, rv.dates, assume_unique=True, return_indices=True)
    if len(common) == 0:
        raise ValidationError("daily returns and realized variance share no dates")
    return daily.values[i_d], rv.rv[i_r]


def hl_factor(daily, rv):
    """Hansen-Lunde factor ``c = sum (R_t - mean R)^2 / sum RV_t`` over shared days."""
    r, v = _aligned(daily, rv)
    total = float(np.sum(v))
    if not total > 0:
        raise ValidationError("total realized variance is zero; HL factor undefined")
    dev = r - r.mean()
    return float(np.dot(dev, dev)) / total


def adjust_rv(daily, rv):
    """Return ``rv`` with its HL factor attached."""
    return replace(rv, hl_factor=hl_factor(daily, rv))


@dataclass(frozen=True)
class SignatureRow:
    delta_min: float
    mean_rv: float
    hl_factor: float
    n_days: int


def signature_sweep(panel, daily, deltas=DEFAULT_DELTAS):
    """Mean RV and HL factor for each sampling interval.

    Returns ``(rows, series)`` where ``series`` maps each interval to its
    HL-adjusted :class:`RvSeries`.
    """
    deltas = list(deltas)
    if not deltas:
        raise ValueError("need at least one sampling interval")
    logs = [np.log(p) for p in panel.prices]
    rows, series = [], {}
    for delta in deltas:
        rv = adjust_rv(daily, realized_volatility(panel, delta, logs))
        series[delta] = rv
        rows.append(SignatureRow(float(delta), float(np.mean(rv.rv)), rv.hl_factor, len(rv)))
    return rows, series


def write_rv_csv(rv, path):
    """``date,rv,c_rv`` for one sampling interval."""
    adj = rv.adjusted
    with atomic_open(path) as fh:
        fh.write("date,rv,c_rv\n")
        fh.writelines(f"{d},{a!r},{b!r}\n" for d, a, b in zip(rv.dates, rv.rv.tolist(), adj.tolist()))


def read_rv_csv(path, interval):
    """Load the ``c_rv`` column of a file written by :func:`write_rv_csv`."""
    data = np.atleast_1d(np.genfromtxt(path, delimiter=",", names=True, dtype=None, encoding="ascii"))
    if data.dtype.names is None or not {"date", "rv", "c_rv"} <= set(data.dtype.names):
        raise ValidationError(f"{path}: expected a date,rv,c_rv header")
    return VolPath(as_dates(data["date"]), np.asarray(data["c_rv"], dtype=np.float64), f"crv_{interval}")


def write_signature_csv(rows, path):
    with atomic_open(path) as fh:
        fh.write("delta_min,mean_rv,hl_factor\n")
        fh.writelines(f"{r.delta_min!r},{r.mean_rv!r},{r.hl_factor!r}\n" for r in rows)
