import math

import numpy as np
import pytest

from oracles import grid_cdf, grid_moments, ks_distance, log_prob_terms
from svhmc.hmc import HmcConfig
from svhmc.param_sampler import (
    PriorSpec,
    ar_sum_of_squares,
    mu_conditional,
    phi_log_density,
    run_sv_fit,
    sample_mu,
    sample_phi,
    sample_sigma_eta_sq,
    sigma_conditional,
)
from svhmc.synth import SynthSpec, gen_sv

H6 = np.array([-1.2, -0.4, -0.9, 0.3, -0.1, -0.7])


def test_prior_validation():
    with pytest.raises(ValueError):
        PriorSpec(sigma_shape=0)
    with pytest.raises(ValueError):
        PriorSpec(phi_a=-1)


def test_mu_conditional_phi_zero():
    mean, var = mu_conditional(H6, 0.0, 0.3)
    assert mean == pytest.approx(H6.mean(), rel=1e-14)
    assert var == pytest.approx(0.3 / 6, rel=1e-14)


def test_mu_conditional_single_day():
    mean, var = mu_conditional([0.7], 0.6, 0.32)
    assert mean == pytest.approx(0.7)
    assert var == pytest.approx(0.32 / (1 - 0.36))


def test_mu_conditional_matches_grid():
    phi, s2 = 0.8, 0.2
    y = np.zeros(6)
    mean, var = mu_conditional(H6, phi, s2)
    grid = np.linspace(mean - 12 * math.sqrt(var), mean + 12 * math.sqrt(var), 20001)
    logp = np.array([log_prob_terms(H6, y, m, phi, s2) for m in grid])
    gm, gv = grid_moments(logp, grid)
    assert gm == pytest.approx(mean, rel=1e-6)
    assert gv == pytest.approx(var, rel=1e-6)


def test_mu_draws_match_grid_cdf():
    phi, s2 = 0.8, 0.2
    rng = np.random.default_rng(1)
    draws = [sample_mu(H6, phi, s2, rng) for _ in range(50_000)]
    mean, var = mu_conditional(H6, phi, s2)
    grid = np.linspace(mean - 10 * math.sqrt(var), mean + 10 * math.sqrt(var), 4001)
    logp = np.array([log_prob_terms(H6, np.zeros(6), m, phi, s2) for m in grid])
    assert ks_distance(draws, grid, grid_cdf(logp, grid)) < 0.02


def test_sigma_conditional_zero_residuals():
    prior = PriorSpec()
    shape, scale = sigma_conditional(np.full(5, -2.0), -2.0, 0.9, prior)
    assert shape == prior.sigma_shape + 2.5
    assert scale == prior.sigma_scale


def test_sigma_conditional_by_hand():
    mu, phi = 0.5, 0.5
    h = np.array([1.0, 0.0])
    # (1 - 0.25) * 0.5**2 + (-0.5 - 0.5 * 0.5)**2
    ss = 0.75 * 0.25 + 0.75**2
    assert ar_sum_of_squares(h, mu, phi) == pytest.approx(ss, rel=1e-15)
    shape, scale = sigma_conditional(h, mu, phi)
    assert shape == 2.5 + 1
    assert scale == pytest.approx(0.025 + ss / 2, rel=1e-15)


def test_sigma_draws_mean():
    rng = np.random.default_rng(2)
    mu, phi = -0.5, 0.8
    shape, scale = sigma_conditional(H6, mu, phi)
    draws = np.array([sample_sigma_eta_sq(H6, mu, phi, rng) for _ in range(50_000)])
    mean = scale / (shape - 1)
    sd = math.sqrt(scale**2 / ((shape - 1) ** 2 * (shape - 2)))
    assert abs(draws.mean() - mean) < 3 * sd / math.sqrt(len(draws))


def test_phi_proposal_equal_to_current_always_accepted():
    rng = np.random.default_rng(3)
    for _ in range(20):
        phi, ok = sample_phi(H6, -0.5, 0.2, 0.42, rng, proposal=0.42)
        assert ok and phi == 0.42


@pytest.mark.parametrize("bad", [1.0, -1.0, 1.5])
def test_phi_outside_support_rejected(bad):
    phi, ok = sample_phi(H6, -0.5, 0.2, 0.3, np.random.default_rng(4), proposal=bad)
    assert not ok and phi == 0.3


def test_phi_log_density_support():
    assert phi_log_density(1.0, H6, 0.0, 0.2) == -math.inf
    assert math.isfinite(phi_log_density(0.99, H6, 0.0, 0.2))


def test_phi_draws_match_grid_cdf():
    rng = np.random.default_rng(5)
    h = np.array([-0.2, 0.4, 0.9, 0.5, 0.8, 0.1])
    mu, s2 = 0.0, 0.3
    phi = 0.0
    draws = np.empty(50_000)
    for i in range(len(draws)):
        phi, _ = sample_phi(h, mu, s2, phi, rng)
        draws[i] = phi
    grid = np.linspace(-1 + 1e-9, 1 - 1e-9, 20001)
    logp = np.array([phi_log_density(g, h, mu, s2) for g in grid])
    assert ks_distance(draws, grid, grid_cdf(logp, grid)) < 0.02


def test_gibbs_mu_sigma_matches_2d_quadrature():
    h = np.array([-0.3, 0.2, -0.5, 0.1])
    phi = 0.6
    prior = PriorSpec()
    rng = np.random.default_rng(6)
    mu, s2 = 0.0, 0.1
    n = 60_000
    out = np.empty((n, 2))
    for i in range(n):
        mu = sample_mu(h, phi, s2, rng, prior)
        s2 = sample_sigma_eta_sq(h, mu, phi, rng, prior)
        out[i] = mu, s2
    mus = np.linspace(-4, 4, 300)
    s2s = np.linspace(1e-3, 3.0, 300)
    M, S = np.meshgrid(mus, s2s, indexing="ij")
    ss = np.vectorize(lambda m, s: ar_sum_of_squares(h, m, phi))(M, S)
    logp = -(prior.sigma_shape + 1 + len(h) / 2) * np.log(S) - (prior.sigma_scale + ss / 2) / S
    w = np.exp(logp - logp.max())
    w /= w.sum()
    batches = out.reshape(60, 1000, 2).mean(axis=1)
    se = batches.std(axis=0, ddof=1) / math.sqrt(60)
    assert abs(out[:, 0].mean() - (w * M).sum()) < 3 * se[0] + 1e-3
    assert abs(out[:, 1].mean() - (w * S).sum()) < 3 * se[1] + 2e-3


def small_series(n=200, seed=1):
    return gen_sv(SynthSpec(kind="sv", n_days=n, seed=seed, mu=-1.0, phi=0.9, sigma_eta_sq=0.1))[0]


def test_n_keep_zero_is_an_error():
    with pytest.raises(ValueError):
        run_sv_fit(small_series(), n_burn=10, n_keep=0)


def test_fit_is_deterministic():
    y = small_series()
    a = run_sv_fit(y, n_burn=100, n_keep=100, seed=3)
    b = run_sv_fit(y, n_burn=100, n_keep=100, seed=3)
    assert a.draws.tobytes() == b.draws.tobytes()
    assert a.vol_mean.tobytes() == b.vol_mean.tobytes()
    assert a.traces["h_10"].tobytes() == b.traces["h_10"].tobytes()
    c = run_sv_fit(y, n_burn=100, n_keep=100, seed=4)
    assert c.draws.tobytes() != a.draws.tobytes()


def test_fit_draws_respect_invariants():
    chain = run_sv_fit(small_series(), n_burn=200, n_keep=300, seed=5)
    assert chain.n_kept == 300 and chain.burn_in == 200
    assert np.all(np.abs(chain.param("phi")) < 1)
    assert np.all(chain.param("sigma_eta_sq") > 0)
    assert chain.vol_mean.shape == (200,)


def test_untunable_sampler_warns():
    y = small_series()
    chain = run_sv_fit(y, hmc=HmcConfig(step_size=3.0, tune=False), n_burn=40, n_keep=10, seed=1)
    assert any("burn-in" in w for w in chain.warnings)


@pytest.mark.slow
def test_recovers_generating_parameters():
    y, h = gen_sv(SynthSpec(kind="sv", n_days=2000, seed=21, mu=-7.5, phi=0.97, sigma_eta_sq=0.03))
    chain = run_sv_fit(y, n_burn=3000, n_keep=12000, seed=2)
    for name, truth in (("mu", -7.5), ("phi", 0.97), ("sigma_eta_sq", 0.03)):
        draws = chain.param(name)
        assert abs(draws.mean() - truth) < 3 * draws.std(), name
