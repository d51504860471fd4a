import numpy as np
import pytest
from scipy.stats import spearmanr

from svhmc.realized import (
    RvSeries,
    adjust_rv,
    hl_factor,
    intraday_returns,
    read_rv_csv,
    realized_volatility,
    signature_sweep,
    write_rv_csv,
    write_signature_csv,
)
from svhmc.synth import SynthSpec, gen_intraday
from svhmc.timeseries import TOKYO, IntradayPanel, ReturnSeries, SessionCalendar, ValidationError

MS_ONLY = SessionCalendar.parse(["09:00-11:00"])
DAY = np.datetime64("2020-01-06")


def minute_panel(prices_per_day, calendar=TOKYO, start=DAY):
    """One tick per minute at every session minute, including open and close."""
    times = np.concatenate([np.arange(o, c + 1, 60) for o, c in calendar.sessions]).astype(np.int32)
    days = start + np.arange(len(prices_per_day))
    return IntradayPanel(days, tuple(times for _ in days), tuple(np.asarray(p) for p in prices_per_day), calendar)


def test_hourly_grid_in_morning_session():
    panel = minute_panel([np.full(121, 100.0)], MS_ONLY)
    days, rets, warnings = intraday_returns(panel, 60)
    assert len(rets[0]) == 2 and not warnings
    assert np.all(rets[0] == 0.0)


def test_five_minute_count_over_two_sessions():
    rng = np.random.default_rng(0)
    panel = minute_panel([100 * np.exp(np.cumsum(rng.normal(0, 1e-3, 121 + 151)))])
    _, rets, _ = intraday_returns(panel, 5)
    assert len(rets[0]) == 54


def test_grid_ends_at_session_close():
    rng = np.random.default_rng(4)
    panel = minute_panel([100 * np.exp(np.cumsum(rng.normal(0, 1e-3, 121 + 151)))])
    _, rets, _ = intraday_returns(panel, 20)
    # 120 / 20 = 6 morning returns; 150 / 20 leaves a final 10-minute return
    assert len(rets[0]) == 6 + 8


def test_previous_tick_sampling():
    times = (np.array([9 * 3600, 9 * 3600 + 1800 + 7, 10 * 3600 + 1, 11 * 3600 - 1], dtype=np.int32),)
    prices = (np.array([100.0, 101.0, 102.0, 103.0]),)
    panel = IntradayPanel([DAY], times, prices, MS_ONLY)
    _, rets, _ = intraday_returns(panel, 60)
    # grid 9:00, 10:00, 11:00 picks 100, 101, 103
    assert np.allclose(rets[0], [np.log(1.01), np.log(103 / 101)])


def test_no_cross_session_return():
    # flat within each session, a jump over lunch
    prices = np.r_[np.full(121, 100.0), np.full(151, 120.0)]
    rv = realized_volatility(minute_panel([prices]), 1)
    assert rv.rv[0] == 0.0


def test_day_without_grid_points_excluded():
    times = (np.array([9 * 3600, 9 * 3600 + 30], dtype=np.int32), np.arange(9 * 3600, 11 * 3600 + 1, 60, dtype=np.int32))
    prices = (np.array([100.0, 101.0]), np.full(121, 50.0))
    panel = IntradayPanel([DAY, DAY + 1], times, prices, MS_ONLY)
    days, rets, warnings = intraday_returns(panel, 5)
    # the first day has ticks only up to 9:00:30, so every later grid point repeats 101
    assert len(days) == 2
    days, rets, warnings = intraday_returns(IntradayPanel([DAY], (np.array([9 * 3600 + 10, 9 * 3600 + 20], dtype=np.int32),), (np.array([1.0, 2.0]),), MS_ONLY), 5)
    assert len(days) == 1
    with pytest.raises(ValueError):
        intraday_returns(panel, 0)


def test_rv_of_equal_returns():
    r = 0.001
    prices = 100 * np.exp(r * np.arange(121))
    rv = realized_volatility(minute_panel([prices], MS_ONLY), 1)
    assert rv.rv[0] == pytest.approx(120 * r * r, rel=1e-9)


def test_rv_arithmetic():
    times = (np.array([9 * 3600, 10 * 3600, 11 * 3600], dtype=np.int32),)
    prices = (np.array([100.0, 100 * np.exp(0.01), 100 * np.exp(-0.01)]),)
    rv = realized_volatility(IntradayPanel([DAY], times, prices, MS_ONLY), 60)
    assert rv.rv[0] == pytest.approx(0.0005, rel=1e-12)


def test_rv_scale_invariance():
    rng = np.random.default_rng(1)
    p = 100 * np.exp(np.cumsum(rng.normal(0, 1e-3, 272)))
    a = realized_volatility(minute_panel([p]), 3).rv
    b = realized_volatility(minute_panel([p * 7.5]), 3).rv
    assert a[0] == pytest.approx(b[0], rel=1e-10)


def test_full_session_delta_sums_session_returns():
    rng = np.random.default_rng(2)
    p = 100 * np.exp(np.cumsum(rng.normal(0, 1e-3, 121)))
    rv = realized_volatility(minute_panel([p], MS_ONLY), 120)
    assert rv.rv[0] == pytest.approx(np.log(p[-1] / p[0]) ** 2, rel=1e-12)


def make_daily_and_rv(n=30, seed=3):
    rng = np.random.default_rng(seed)
    dates = DAY + np.arange(n)
    r = rng.normal(0, 0.01, n)
    return ReturnSeries(dates, r), rng


def test_hl_factor_unity_when_rv_matches_squared_deviations():
    daily, _ = make_daily_and_rv()
    rv = RvSeries(daily.dates, (daily.values - daily.values.mean()) ** 2, 5)
    assert hl_factor(daily, rv) == pytest.approx(1.0, rel=1e-14)


def test_hl_factor_homogeneity_and_mean_identity():
    daily, rng = make_daily_and_rv()
    rv = RvSeries(daily.dates, rng.uniform(1e-5, 3e-4, len(daily)), 5)
    c = hl_factor(daily, rv)
    assert hl_factor(daily, RvSeries(rv.dates, 2 * rv.rv, 5)) == pytest.approx(c / 2, rel=1e-14)
    adj = adjust_rv(daily, rv)
    assert np.array_equal(adj.adjusted, c * rv.rv)
    dev = daily.values - daily.values.mean()
    assert adj.adjusted.mean() == pytest.approx(np.dot(dev, dev) / len(dev), rel=1e-12)


def test_hl_factor_zero_rv_is_an_error():
    daily, _ = make_daily_and_rv()
    with pytest.raises(ValidationError):
        hl_factor(daily, RvSeries(daily.dates, np.zeros(len(daily)), 5))


def test_hl_factor_uses_shared_dates():
    daily, rng = make_daily_and_rv()
    rv = RvSeries(daily.dates[5:], rng.uniform(1e-5, 3e-4, len(daily) - 5), 5)
    r = daily.values[5:]
    assert hl_factor(daily, rv) == pytest.approx(np.sum((r - r.mean()) ** 2) / rv.rv.sum(), rel=1e-14)
    with pytest.raises(ValidationError):
        hl_factor(daily, RvSeries(daily.dates + 1000, rv.rv[:0].tolist() + [1.0] * len(daily), 5))


def test_adjusted_requires_factor():
    with pytest.raises(ValueError):
        RvSeries([DAY], [1.0], 5).adjusted


def diffusion(noise_std=0.0, n_days=150, share=0.0, seed=0, tick=5):
    spec = SynthSpec(kind="diffusion", n_days=n_days, seed=seed, noise_std=noise_std,
                     overnight_share=share, tick_seconds=tick)
    return gen_intraday(spec, np.full(n_days, spec.daily_var))


def test_single_delta_sweep_matches_hl_factor():
    panel, daily = diffusion(n_days=20)
    rows, series = signature_sweep(panel, daily, [5])
    assert len(rows) == 1
    rv = realized_volatility(panel, 5)
    assert rows[0].hl_factor == hl_factor(daily, rv)
    assert rows[0].mean_rv == pytest.approx(rv.rv.mean())
    assert rows[0].n_days == 20
    with pytest.raises(ValueError):
        signature_sweep(panel, daily, [])


def test_noise_free_factor_flat_in_delta():
    panel, daily = diffusion()
    rows, _ = signature_sweep(panel, daily, [1, 2, 5, 10, 20])
    c = [r.hl_factor for r in rows]
    assert max(c) / min(c) < 1.1


def test_noise_makes_factor_increase_with_delta():
    panel, daily = diffusion(noise_std=5e-4)
    rows, _ = signature_sweep(panel, daily, [1, 2, 5, 10, 20])
    c = [r.hl_factor for r in rows]
    assert spearmanr([1, 2, 5, 10, 20], c)[0] > 0.8


def test_csv_outputs(tmp_path):
    panel, daily = diffusion(n_days=10)
    rows, series = signature_sweep(panel, daily, [5, 10])
    write_rv_csv(series[5], tmp_path / "rv.csv")
    back = read_rv_csv(tmp_path / "rv.csv", 5)
    assert np.array_equal(back.values, series[5].adjusted)
    assert np.array_equal(back.dates, series[5].dates)
    write_signature_csv(rows, tmp_path / "sig.csv")
    lines = (tmp_path / "sig.csv").read_text().splitlines()
    assert lines[0] == "delta_min,mean_rv,hl_factor" and len(lines) == 3
