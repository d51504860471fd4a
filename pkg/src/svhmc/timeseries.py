"""Daily return series, intraday price panels and trading-session calendars.

Daily files are ``date,return`` or ``date,close`` CSV (detected from the
header). Intraday files are ``date,time,price`` CSV with local exchange
wall-clock times and no timezone handling.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ._io import atomic_open, write_text_atomic


class ParseError(ValueError):
    """A record in an input file could not be parsed."""

    def __init__(self, msg, line=None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


class ValidationError(ValueError):
    """Input data violates an invariant of the target type."""


def _freeze(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


def as_dates(values):
    """Coerce ISO strings, ``datetime.date`` objects or datetime64 to ``datetime64[D]``."""
    return np.asarray(values, dtype="datetime64[D]")


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log-returns in raw log units (not percent)."""

    dates: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        dates = _freeze(as_dates(self.dates), "datetime64[D]")
        values = _freeze(self.values, np.float64)
        if dates.ndim != 1 or dates.shape != values.shape:
            raise ValidationError("dates and values must be 1-D and of equal length")
        if len(values) < 2:
            raise ValidationError("a return series needs at least 2 observations")
        if not np.all(np.isfinite(values)):
            bad = int(np.flatnonzero(~np.isfinite(values))[0])
            raise ValidationError(f"non-finite return on {dates[bad]}")
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            i = int(np.flatnonzero(np.diff(dates) <= np.timedelta64(0, "D"))[0])
            raise ValidationError(
                f"dates must be strictly increasing: {dates[i]} followed by {dates[i + 1]}"
            )
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_prices(cls, dates, prices, label=""):
        """Close-to-close log-returns; the first date is consumed."""
        prices = np.asarray(prices, dtype=np.float64)
        if np.any(prices <= 0) or not np.all(np.isfinite(prices)):
            raise ValidationError("close prices must be finite and positive")
        return cls(as_dates(dates)[1:], np.diff(np.log(prices)), label)


@dataclass(frozen=True)
class SessionCalendar:
    """Trading sessions as (open, close) seconds after midnight."""

    sessions: tuple

    def __post_init__(self):
        sessions = tuple((int(o), int(c)) for o, c in self.sessions)
        if not sessions:
            raise ValidationError("calendar needs at least one session")
        for o, c in sessions:
            if not 0 <= o < c <= 86400:
                raise ValidationError(f"bad session interval {_fmt_hm(o)}-{_fmt_hm(c)}")
        for (o1, c1), (o2, c2) in zip(sessions, sessions[1:]):
            if o2 < c1:
                raise ValidationError("sessions must be ordered and non-overlapping")
        object.__setattr__(self, "sessions", sessions)

    @classmethod
    def parse(cls, intervals):
        """Build from strings such as ``["09:00-11:00", "12:30-15:00"]``."""
        out = []
        for spec in intervals:
            try:
                a, b = spec.split("-")
                out.append((parse_clock(a), parse_clock(b)))
            except ValueError as exc:
                raise ValidationError(f"bad session interval {spec!r}: {exc}") from None
        return cls(tuple(out))

    @property
    def day_length(self):
        """Seconds of trading covered by the sessions."""
        return sum(c - o for o, c in self.sessions)

    def session_of(self, seconds):
        """Session index for each time, or -1 when outside every session."""
        seconds = np.asarray(seconds)
        idx = np.full(seconds.shape, -1, dtype=np.int64)
        for k, (o, c) in enumerate(self.sessions):
            idx[(seconds >= o) & (seconds <= c)] = k
        return idx

    def to_strings(self):
        return [f"{_fmt_hm(o)}-{_fmt_hm(c)}" for o, c in self.sessions]


TOKYO = SessionCalendar(((9 * 3600, 11 * 3600), (12 * 3600 + 1800, 15 * 3600)))


def parse_clock(text):
    """``HH:MM`` or ``HH:MM:SS`` to seconds after midnight."""
    parts = text.strip().split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad clock time {text!r}")
    h, m = int(parts[0]), int(parts[1])
    s = int(parts[2]) if len(parts) == 3 else 0
    if not (0 <= h <= 24 and 0 <= m < 60 and 0 <= s < 60):
        raise ValueError(f"bad clock time {text!r}")
    return h * 3600 + m * 60 + s


def _fmt_hm(seconds):
    return f"{seconds // 3600:02d}:{seconds % 3600 // 60:02d}"


def fmt_clock(seconds):
    seconds = int(seconds)
    return f"{seconds // 3600:02d}:{seconds % 3600 // 60:02d}:{seconds % 60:02d}"


@dataclass(frozen=True)
class IntradayPanel:
    """Per-day tick observations restricted to the calendar's sessions.

    ``times[d]`` holds seconds after midnight and ``prices[d]`` the matching
    positive prices for day ``days[d]``.
    """

    days: np.ndarray
    times: tuple
    prices: tuple
    calendar: SessionCalendar = TOKYO
    n_dropped: int = 0
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        days = _freeze(as_dates(self.days), "datetime64[D]")
        if len(days) != len(self.times) or len(days) != len(self.prices):
            raise ValidationError("days, times and prices must have equal length")
        if np.any(np.diff(days) <= np.timedelta64(0, "D")):
            raise ValidationError("days must be strictly increasing")
        times, prices = [], []
        for d, (t, p) in enumerate(zip(self.times, self.prices)):
            t = _freeze(t, np.int32)
            p = _freeze(p, np.float64)
            if t.shape != p.shape:
                raise ValidationError(f"{days[d]}: times and prices differ in length")
            if np.any(np.diff(t) <= 0):
                raise ValidationError(f"{days[d]}: timestamps must be strictly increasing")
            if np.any(p <= 0) or not np.all(np.isfinite(p)):
                raise ValidationError(f"{days[d]}: prices must be finite and positive")
            if np.any(self.calendar.session_of(t) < 0):
                raise ValidationError(f"{days[d]}: observation outside the declared sessions")
            times.append(t)
            prices.append(p)
        object.__setattr__(self, "days", days)
        object.__setattr__(self, "times", tuple(times))
        object.__setattr__(self, "prices", tuple(prices))
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return len(self.days)

    @property
    def n_obs(self):
        return sum(len(t) for t in self.times)


def load_daily_returns(path, column=None, label=None):
    """Read a daily CSV into a :class:`ReturnSeries`.

    ``column`` selects ``"return"`` or ``"close"``; by default it is taken
    from the header. Close prices are converted to close-to-close log
    returns.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [c.strip().lower() for c in next(reader)]
        except StopIteration:
            raise ParseError("empty file", 1) from None
        if column is None:
            column = next((c for c in ("return", "close") if c in header), None)
            if column is None:
                raise ParseError("header must name a 'return' or 'close' column", 1)
        if "date" not in header or column not in header:
            raise ParseError(f"header must contain 'date' and {column!r}", 1)
        i_date, i_val = header.index("date"), header.index(column)
        dates, values = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                d = np.datetime64(row[i_date].strip(), "D")
                v = float(row[i_val])
            except (ValueError, IndexError) as exc:
                raise ParseError(f"malformed record {row!r} ({exc})", lineno) from None
            if not math.isfinite(v):
                raise ParseError(f"non-finite value {row[i_val]!r}", lineno)
            dates.append(d)
            values.append(v)
    if label is None:
        label = os.path.splitext(os.path.basename(path))[0]
    if column == "close":
        dates = as_dates(dates)
        if np.any(np.diff(dates) <= np.timedelta64(0, "D")):
            raise ValidationError("dates must be strictly increasing")
        return ReturnSeries.from_prices(dates, values, label)
    return ReturnSeries(dates, values, label)


def write_daily_returns(series, path):
    """Write ``date,return`` CSV; values use ``repr`` so reloading is exact."""
    lines = ["date,return"]
    lines += [f"{d},{v!r}" for d, v in zip(series.dates, series.values.tolist())]
    write_text_atomic(path, "\n".join(lines) + "\n")


def load_intraday(path, calendar=TOKYO):
    """Read a ``date,time,price`` CSV into an :class:`IntradayPanel`.

    Ticks outside every session are dropped and counted. Sessions with
    fewer than two ticks are ignored; a day left with no usable session is
    excluded and a warning recorded.
    """
    try:
        frame = pd.read_csv(path, dtype={"date": str, "time": str, "price": np.float64}, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError) as exc:
        raise ParseError(str(exc)) from None
    missing = {"date", "time", "price"} - set(frame.columns)
    if missing:
        raise ParseError(f"missing columns {sorted(missing)}", 1)
    try:
        clock = frame["time"].str.strip()
        clock = clock.where(clock.str.count(":") != 1, clock + ":00")
        seconds = pd.to_timedelta(clock).dt.total_seconds().to_numpy()
        dates = frame["date"].str.strip().to_numpy().astype("datetime64[D]")
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    prices = frame["price"].to_numpy()
    return panel_from_ticks(dates, seconds.astype(np.int64), prices, calendar)


def panel_from_ticks(dates, seconds, prices, calendar=TOKYO):
    """Group flat tick arrays into a validated :class:`IntradayPanel`."""
    dates = as_dates(dates)
    seconds = np.asarray(seconds, dtype=np.int64)
    prices = np.asarray(prices, dtype=np.float64)
    if np.any(prices <= 0) or not np.all(np.isfinite(prices)):
        raise ValidationError("prices must be finite and positive")
    if np.any(np.diff(dates) < np.timedelta64(0, "D")):
        raise ValidationError("days must appear in increasing order")
    starts = np.flatnonzero(np.r_[True, dates[1:] != dates[:-1]])
    ends = np.r_[starts[1:], len(dates)]
    days, times, px, warnings = [], [], [], []
    dropped = 0
    for a, b in zip(starts, ends):
        t, p = seconds[a:b], prices[a:b]
        if np.any(np.diff(t) <= 0):
            raise ValidationError(f"{dates[a]}: timestamps must be strictly increasing")
        sess = calendar.session_of(t)
        inside = sess >= 0
        dropped += int(np.count_nonzero(~inside))
        keep = inside.copy()
        for k in range(len(calendar.sessions)):
            m = sess == k
            if 0 < np.count_nonzero(m) < 2:
                warnings.append(f"{dates[a]}: session {k} has a single tick, ignored")
                keep &= ~m
        if not keep.any():
            warnings.append(f"{dates[a]}: no usable session, day excluded")
            continue
        days.append(dates[a])
        times.append(t[keep])
        px.append(p[keep])
    return IntradayPanel(as_dates(days), tuple(times), tuple(px), calendar, dropped, tuple(warnings))


def write_intraday(panel, path):
    """Write a panel as ``date,time,price`` CSV."""
    with atomic_open(path) as fh:
        fh.write("date,time,price\n")
        for d, t, p in zip(panel.days, panel.times, panel.prices):
            ds = str(d)
            fh.writelines(f"{ds},{fmt_clock(s)},{v!r}\n" for s, v in zip(t.tolist(), p.tolist()))
