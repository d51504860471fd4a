import math

import numpy as np
import pytest

from oracles import ar1
from svhmc.chain import Chain
from svhmc.diagnostics import acf, jackknife_se, summarize, summarize_chain, tau_int, write_summary_csv


@pytest.fixture(scope="module")
def iid():
    return np.random.default_rng(0).standard_normal(100_000)


@pytest.fixture(scope="module")
def ar09():
    return ar1(200_000, 0.9, np.random.default_rng(1))


def test_acf_iid(iid):
    r = acf(iid, 10)
    assert r[0] == pytest.approx(1.0, abs=1e-12)
    assert abs(r[1]) < 3 / math.sqrt(len(iid))


def test_acf_alternating():
    x = np.tile([1.0, -1.0], 500)
    assert acf(x, 1)[1] == pytest.approx(-(len(x) - 1) / len(x), rel=1e-12)


def test_acf_matches_direct_sum():
    x = np.random.default_rng(2).normal(size=300)
    d = x - x.mean()
    direct = [np.dot(d[: len(d) - t], d[t:]) / np.dot(d, d) for t in range(6)]
    assert np.allclose(acf(x, 5), direct, atol=1e-12)


def test_acf_ar1(ar09):
    r = acf(ar09, 10)
    assert np.allclose(r, 0.9 ** np.arange(11), atol=0.02)


def test_acf_errors():
    with pytest.raises(ValueError):
        acf(np.ones(10), 3)
    with pytest.raises(ValueError):
        acf(np.arange(5.0), 5)


def test_tau_iid(iid):
    est = tau_int(iid)
    assert est.converged
    assert abs(est.tau - 1) <= 3 * est.error


def test_tau_ar1(ar09):
    est = tau_int(ar09)
    assert est.converged
    assert abs(est.tau - 19) <= 3 * est.error


def test_tau_flags_unclosed_window():
    rng = np.random.default_rng(3)
    x = np.linspace(0, 1, 5000) + 1e-6 * rng.standard_normal(5000)
    assert not tau_int(x).converged


def test_tau_affine_invariant(ar09):
    x = ar09[:20_000]
    a, b = tau_int(x), tau_int(3.5 * x - 2)
    assert a.tau == pytest.approx(b.tau, rel=1e-10) and a.window == b.window


def test_jackknife_block_one_is_classical(iid):
    x = iid[:5000]
    assert jackknife_se(x, 1) == pytest.approx(x.std(ddof=1) / math.sqrt(len(x)), rel=1e-10)


def test_jackknife_iid_default(iid):
    classical = iid.std(ddof=1) / math.sqrt(len(iid))
    assert jackknife_se(iid) == pytest.approx(classical, rel=0.1)


def test_jackknife_ar1_inflation(ar09):
    classical = ar09.std(ddof=1) / math.sqrt(len(ar09))
    assert jackknife_se(ar09, 50) == pytest.approx(math.sqrt(19) * classical, rel=0.2)


def test_jackknife_constant_and_errors():
    assert jackknife_se(np.full(100, 2.5), 10) == 0.0
    with pytest.raises(ValueError):
        jackknife_se(np.arange(10.0), 6)


def test_summarize(ar09):
    s = summarize(ar09, "x")
    assert s.n == len(ar09) and s.sd > 0 and s.se > 0
    assert abs(s.tau_int - 19) <= 3 * s.tau_int_err
    assert s.sd == pytest.approx(math.sqrt(1 / (1 - 0.81)), rel=0.05)


def test_summarize_constant():
    s = summarize(np.full(200, 0.7))
    assert (s.mean, s.sd, s.se) == (0.7, 0.0, 0.0)
    assert math.isnan(s.tau_int) and not s.converged


def test_summarize_needs_100_draws():
    with pytest.raises(ValueError):
        summarize(np.arange(50.0))


def test_summarize_chain_table(tmp_path):
    rng = np.random.default_rng(4)
    chain = Chain(
        kind="sv",
        param_names=("mu", "phi", "sigma_eta_sq"),
        draws=rng.normal(size=(500, 3)),
        dates=np.datetime64("2020-01-06") + np.arange(3),
        vol_mean=np.ones(3),
        vol_sd=np.zeros(3),
        burn_in=0,
        seed=0,
        traces={"h_10": rng.normal(size=500)},
    )
    rows = summarize_chain(chain)
    assert [r.name for r in rows] == ["phi", "mu", "sigma_eta_sq", "h_10"]
    write_summary_csv(rows, tmp_path / "d.csv")
    lines = (tmp_path / "d.csv").read_text().splitlines()
    assert lines[0] == "parameter,mean,SD,SE,tau_int,tau_int_err"
    assert lines[1].startswith("phi,")
