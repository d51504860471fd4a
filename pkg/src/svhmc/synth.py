"""Synthetic data with known truth.

Generators are pure functions of the spec (including its seed). Each
random component draws from its own named stream, so e.g. changing the
noise level does not change the simulated efficient prices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from ._io import atomic_open, stream
from .timeseries import TOKYO, IntradayPanel, ReturnSeries, SessionCalendar, as_dates

KINDS = ("sv", "garch", "diffusion")


@dataclass(frozen=True)
class SynthSpec:
    """What to simulate.

    ``kind`` picks the daily variance process: ``"sv"`` (``mu``, ``phi``,
    ``sigma_eta_sq``), ``"garch"`` (``omega``, ``alpha``, ``beta``) or
    ``"diffusion"`` (constant ``daily_var``). The intraday fields control
    :func:`gen_intraday`: observations every ``tick_seconds`` inside each
    session, i.i.d. Gaussian noise of SD ``noise_std`` on observed log
    prices, and a share ``overnight_share`` of each day's variance falling
    in the overnight gap.
    """

    kind: str = "sv"
    n_days: int = 1000
    seed: int = 0
    mu: float = -7.87
    phi: float = 0.975
    sigma_eta_sq: float = 0.045
    omega: float = 1e-6
    alpha: float = 0.1
    beta: float = 0.85
    daily_var: float = 4e-4
    tick_seconds: int = 1
    noise_std: float = 0.0
    overnight_share: float = 0.0
    start_price: float = 1000.0
    start_date: str = "2000-01-03"
    calendar: SessionCalendar = field(default=TOKYO)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n_days < 2:
            raise ValueError("n_days must be >= 2")
        if self.kind == "sv":
            if not abs(self.phi) < 1:
                raise ValueError("|phi| must be < 1")
            if not self.sigma_eta_sq >= 0:
                raise ValueError("sigma_eta_sq must be >= 0")
        if self.kind == "garch":
            if not (self.omega > 0 and self.alpha >= 0 and self.beta >= 0 and self.alpha + self.beta < 1):
                raise ValueError("GARCH parameters must satisfy omega > 0, alpha, beta >= 0, alpha + beta < 1")
        if self.kind == "diffusion" and not self.daily_var > 0:
            raise ValueError("daily_var must be positive")
        if not 0.0 <= self.overnight_share < 1.0:
            raise ValueError("overnight_share must lie in [0, 1)")
        if not self.noise_std >= 0:
            raise ValueError("noise_std must be >= 0")
        if int(self.tick_seconds) < 1:
            raise ValueError("tick_seconds must be >= 1")
        if not self.start_price > 0:
            raise ValueError("start_price must be positive")


def trading_days(start, n):
    """``n`` consecutive weekdays from ``start``."""
    return np.busday_offset(np.datetime64(start, "D"), np.arange(n), roll="forward")


def gen_sv(spec):
    """Simulate the SV model. Returns ``(ReturnSeries, h)``."""
    rng = stream(spec.seed, "synth-sv")
    n = spec.n_days
    eta = rng.standard_normal(n)
    eps = rng.standard_normal(n)
    sd = math.sqrt(spec.sigma_eta_sq)
    drive = sd * eta
    drive[0] = math.sqrt(spec.sigma_eta_sq / (1.0 - spec.phi**2)) * eta[0]
    h = spec.mu + lfilter([1.0], [1.0, -spec.phi], drive)
    y = np.exp(0.5 * h) * eps
    return ReturnSeries(trading_days(spec.start_date, n), y, "synthetic-sv"), h


def gen_garch(spec):
    """Simulate GARCH(1,1)-normal returns. Returns ``(ReturnSeries, sigma2)``."""
    rng = stream(spec.seed, "synth-garch")
    n = spec.n_days
    eps = rng.standard_normal(n)
    s2 = np.empty(n)
    y = np.empty(n)
    s2[0] = spec.omega / (1.0 - spec.alpha - spec.beta)
    y[0] = math.sqrt(s2[0]) * eps[0]
    for t in range(1, n):
        s2[t] = spec.omega + spec.alpha * y[t - 1] ** 2 + spec.beta * s2[t - 1]
        y[t] = math.sqrt(s2[t]) * eps[t]
    return ReturnSeries(trading_days(spec.start_date, n), y, "synthetic-garch"), s2


def gen_intraday(spec, daily_var, chunk=64):
    """Simulate intraday prices whose daily variance is ``daily_var``.

    Within sessions the log price follows a driftless diffusion with
    constant spot variance per day, integrated with 1-second Euler steps.
    A fraction ``overnight_share`` of the day's variance is released as a
    gap before the first session; prices do not move over the lunch break.

    Returns ``(panel, daily)`` where ``daily`` holds the close-to-close log
    returns of the efficient (noise-free) price.
    """
    daily_var = np.asarray(daily_var, dtype=np.float64)
    n = len(daily_var)
    if n != spec.n_days:
        raise ValueError("daily_var length must equal n_days")
    cal = spec.calendar
    lengths = [c - o for o, c in cal.sessions]
    total = sum(lengths)
    tick = int(spec.tick_seconds)
    share = spec.overnight_share
    spot = (1.0 - share) * daily_var / total
    gaps = np.sqrt(share * daily_var) * stream(spec.seed, "intraday-gap").standard_normal(n)
    rng_w = stream(spec.seed, "intraday-diffusion")
    rng_u = stream(spec.seed, "intraday-noise")

    obs_idx = []
    obs_t = []
    offset = 0
    for (o, c), length in zip(cal.sessions, lengths):
        k = np.arange(0, length + 1, tick)
        obs_idx.append(offset + k)
        obs_t.append(o + k)
        offset += length
    # Column 0 of each session block is its opening level, so session s
    # spans columns [offset_s, offset_s + length_s].
    obs_idx = np.concatenate([ix + s for s, ix in enumerate(obs_idx)])
    obs_t = np.concatenate(obs_t).astype(np.int32)
    n_cols = total + len(lengths)
    open_cols = np.cumsum([0] + [length + 1 for length in lengths[:-1]])

    level = math.log(spec.start_price)
    closes = np.empty(n)
    times, prices = [], []
    for a in range(0, n, chunk):
        b = min(n, a + chunk)
        m = b - a
        w = rng_w.standard_normal((m, total)) * np.sqrt(spot[a:b])[:, None]
        inc = np.zeros((m, n_cols))
        pos = 0
        for oc, length in zip(open_cols, lengths):
            inc[:, oc + 1 : oc + 1 + length] = w[:, pos : pos + length]
            pos += length
        for j in range(m):
            d = a + j
            start = level + gaps[d]
            path = start + np.cumsum(inc[j])
            level = path[-1]
            closes[d] = level
            logp = path[obs_idx]
            if spec.noise_std > 0:
                logp = logp + spec.noise_std * rng_u.standard_normal(len(logp))
            times.append(obs_t)
            prices.append(np.exp(logp))
    days = trading_days(spec.start_date, n)
    prev = np.r_[math.log(spec.start_price), closes[:-1]]
    panel = IntradayPanel(days, tuple(times), tuple(prices), cal)
    return panel, ReturnSeries(days, closes - prev, "synthetic-intraday")


def write_truth(path, dates, sigma2, h=None):
    with atomic_open(path) as fh:
        if h is None:
            fh.write("date,sigma2\n")
            fh.writelines(f"{d},{s!r}\n" for d, s in zip(as_dates(dates), sigma2.tolist()))
        else:
            fh.write("date,h,sigma2\n")
            fh.writelines(f"{d},{x!r},{s!r}\n" for d, x, s in zip(as_dates(dates), h.tolist(), sigma2.tolist()))
