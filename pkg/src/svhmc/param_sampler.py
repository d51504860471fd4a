"""Parameter updates given the latent path, and the full SV fit.

Each iteration updates ``h`` by HMC, then ``mu``, ``phi`` and
``sigma_eta_sq`` from their full conditionals. ``mu`` and ``sigma_eta_sq``
are conjugate (Gaussian and inverse-gamma); ``phi`` uses an independence
Metropolis-Hastings step because the stationary prior on ``h_1`` adds a
``sqrt(1 - phi^2)`` factor.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from ._io import stream
from .chain import Chain, Welford
from .hmc import HmcConfig, HmcSampler
from .sv_core import SvParams, SvTarget


@dataclass(frozen=True)
class PriorSpec:
    """Priors on the SV parameters.

    ``mu`` is flat unless ``mu_var`` is finite, in which case it is
    ``N(mu_mean, mu_var)``. ``(1 + phi) / 2`` is ``Beta(phi_a, phi_b)``;
    the default ``(1, 1)`` is uniform on ``(-1, 1)``. ``sigma_eta_sq`` is
    inverse-gamma with the given shape and scale.
    """

    sigma_shape: float = 2.5
    sigma_scale: float = 0.025
    mu_mean: float = 0.0
    mu_var: float = math.inf
    phi_a: float = 1.0
    phi_b: float = 1.0

    def __post_init__(self):
        if not (self.sigma_shape > 0 and self.sigma_scale > 0):
            raise ValueError("inverse-gamma shape and scale must be positive")
        if not self.mu_var > 0:
            raise ValueError("mu_var must be positive (inf for a flat prior)")
        if not (self.phi_a > 0 and self.phi_b > 0):
            raise ValueError("phi Beta parameters must be positive")

    @property
    def mu_flat(self):
        return math.isinf(self.mu_var)


DEFAULT_PRIOR = PriorSpec()


def _h(h):
    return np.asarray(getattr(h, "h", h), dtype=np.float64)


def mu_conditional(h, phi, sigma_eta_sq, prior=DEFAULT_PRIOR):
    """Mean and variance of the Gaussian full conditional of ``mu``."""
    h = _h(h)
    n = len(h)
    a = 1.0 - phi * phi
    b = 1.0 - phi
    prec = (a + (n - 1) * b * b) / sigma_eta_sq
    lin = (a * h[0] + b * np.sum(h[1:] - phi * h[:-1])) / sigma_eta_sq
    if not prior.mu_flat:
        prec += 1.0 / prior.mu_var
        lin += prior.mu_mean / prior.mu_var
    return lin / prec, 1.0 / prec


def sample_mu(h, phi, sigma_eta_sq, rng, prior=DEFAULT_PRIOR):
    mean, var = mu_conditional(h, phi, sigma_eta_sq, prior)
    return mean + math.sqrt(var) * rng.standard_normal()


def ar_sum_of_squares(h, mu, phi):
    """Stationary-weighted sum of squared AR(1) residuals of ``h``."""
    x = _h(h) - mu
    r = x[1:] - phi * x[:-1]
    return (1.0 - phi * phi) * x[0] * x[0] + float(np.dot(r, r))


def sigma_conditional(h, mu, phi, prior=DEFAULT_PRIOR):
    """Shape and scale of the inverse-gamma full conditional of ``sigma_eta_sq``."""
    n = len(_h(h))
    return prior.sigma_shape + 0.5 * n, prior.sigma_scale + 0.5 * ar_sum_of_squares(h, mu, phi)


def sample_sigma_eta_sq(h, mu, phi, rng, prior=DEFAULT_PRIOR):
    shape, scale = sigma_conditional(h, mu, phi, prior)
    return scale / rng.gamma(shape)


def phi_log_density(phi, h, mu, sigma_eta_sq, prior=DEFAULT_PRIOR):
    """Log full conditional of ``phi`` up to a constant (``-inf`` outside (-1, 1))."""
    if not -1.0 < phi < 1.0:
        return -math.inf
    x = _h(h) - mu
    r = x[1:] - phi * x[:-1]
    one_m = 1.0 - phi * phi
    out = 0.5 * math.log(one_m) - (one_m * x[0] * x[0] + float(np.dot(r, r))) / (2.0 * sigma_eta_sq)
    return out + _phi_prior(phi, prior)


def _phi_prior(phi, prior):
    return (prior.phi_a - 1.0) * math.log1p(phi) + (prior.phi_b - 1.0) * math.log1p(-phi)


def _phi_weight(phi, x0sq, sigma_eta_sq, prior):
    # Target over proposal: the part of the conditional the Gaussian proposal omits.
    one_m = 1.0 - phi * phi
    return 0.5 * math.log(one_m) - one_m * x0sq / (2.0 * sigma_eta_sq) + _phi_prior(phi, prior)


def phi_proposal(h, mu, sigma_eta_sq):
    """Least-squares AR(1) coefficient of ``h - mu`` and its conditional SD.

    Returns ``None`` when there is no lagged information (``n == 1`` or a
    path that sits exactly at ``mu``).
    """
    x = _h(h) - mu
    sxx = float(np.dot(x[:-1], x[:-1]))
    if sxx <= 0.0:
        return None
    return float(np.dot(x[1:], x[:-1])) / sxx, math.sqrt(sigma_eta_sq / sxx)


def sample_phi(h, mu, sigma_eta_sq, phi, rng, prior=DEFAULT_PRIOR, proposal=None):
    """Independence Metropolis-Hastings update of ``phi``.

    The Gaussian proposal is the conjugate part of the conditional (the
    regression of ``h_t - mu`` on ``h_{t-1} - mu``). Proposals outside
    ``(-1, 1)`` are rejected. ``proposal`` overrides the draw, for testing.
    Returns ``(phi, accepted)``.
    """
    x = _h(h) - mu
    moments = phi_proposal(h, mu, sigma_eta_sq)
    z = rng.standard_normal()
    u = rng.random()
    if proposal is None:
        if moments is None:
            proposal = 2.0 * rng.random() - 1.0
        else:
            proposal = moments[0] + moments[1] * z
    if not -1.0 < proposal < 1.0:
        return phi, False
    x0sq = x[0] * x[0]
    log_ratio = _phi_weight(proposal, x0sq, sigma_eta_sq, prior) - _phi_weight(phi, x0sq, sigma_eta_sq, prior)
    if log_ratio >= 0.0 or math.log(u) < log_ratio:
        return proposal, True
    return phi, False


def initial_state(y):
    """Crude starting point: constant log-variance at the sample level."""
    yv = np.asarray(getattr(y, "values", y), dtype=np.float64)
    level = math.log(max(float(np.mean(yv * yv)), 1e-300))
    return np.full(len(yv), level), SvParams(level, 0.9, 0.05)


def run_sv_fit(y, prior=DEFAULT_PRIOR, hmc=None, n_burn=10000, n_keep=40000, seed=0,
               trace_indices=(10,), init=None):
    """Fit the SV model by alternating HMC on ``h`` with parameter updates.

    Parameters
    ----------
    y : ReturnSeries
        Daily log-returns.
    prior : PriorSpec
    hmc : HmcConfig, optional
        Step size is tuned during burn-in and frozen afterwards.
    n_burn, n_keep : int
        Discarded and retained iterations.
    seed : int
        Seeds the ``"sv"`` random stream (overridden by ``hmc.seed``).
    trace_indices : sequence of int
        1-based days whose ``h`` draws are stored in full.
    init : (array, SvParams), optional
        Starting latent path and parameters.

    Returns
    -------
    Chain
        ``vol_mean`` is the posterior mean of ``exp(h_t)``.
    """
    if n_keep < 1 or n_burn < 0:
        raise ValueError("n_keep must be >= 1 and n_burn >= 0")
    hmc = hmc or HmcConfig()
    seed = int(hmc.seed if hmc.seed is not None else seed)
    rng = stream(seed, "sv")
    yv = np.asarray(y.values)
    n = len(yv)
    idx = [int(i) for i in trace_indices if 1 <= int(i) <= n]

    h, theta = init if init is not None else initial_state(y)
    h = np.array(h, dtype=np.float64)
    mu, phi, s2 = theta.as_tuple()
    target = SvTarget(yv, theta)
    sampler = HmcSampler(hmc)

    draws = np.empty((n_keep, 3))
    traces = {f"h_{i}": np.empty(n_keep) for i in idx}
    vol = Welford(n)
    hstat = Welford(n)
    phi_acc = 0
    burn_tail = max(1, n_burn // 4)
    tail_accepts = 0
    tail_probs = 0.0

    for it in range(n_burn + n_keep):
        if it == n_burn:
            burn_rate = tail_accepts / burn_tail if n_burn else float("nan")
            burn_prob = tail_probs / burn_tail if n_burn else float("nan")
            sampler.freeze()
            phi_acc = 0
        target.theta = SvParams(mu, phi, s2)
        h, report = sampler.step(h, target, rng)
        if n_burn - burn_tail <= it < n_burn:
            tail_accepts += report.accepted
            tail_probs += report.accept_prob
        mu = sample_mu(h, phi, s2, rng, prior)
        phi, ok = sample_phi(h, mu, s2, phi, rng, prior)
        phi_acc += ok
        s2 = sample_sigma_eta_sq(h, mu, phi, rng, prior)
        k = it - n_burn
        if k >= 0:
            draws[k] = (mu, phi, s2)
            for i in idx:
                traces[f"h_{i}"][k] = h[i - 1]
            vol.add(np.exp(h))
            hstat.add(h)

    warnings = []
    if n_burn and not 0.1 <= burn_rate <= 0.95:
        warnings.append(
            f"HMC acceptance {burn_rate:.3f} at end of burn-in is outside [0.1, 0.95]; "
            "step-size tuning did not converge"
        )
    acceptance = {
        "hmc": sampler.acceptance,
        "hmc_mean_accept_prob": sampler.mean_accept_prob,
        "hmc_divergent": sampler.n_divergent,
        "hmc_burn_in_tail": burn_rate if n_burn else None,
        "hmc_burn_in_tail_prob": burn_prob if n_burn else None,
        "phi": phi_acc / n_keep,
    }
    config = {
        "prior": {k: (None if isinstance(v, float) and math.isinf(v) else v) for k, v in asdict(prior).items()},
        "hmc": {k: v for k, v in asdict(hmc).items()},
        "step_size_final": sampler.step_size,
        "n_steps_final": sampler.n_steps,
        "n_burn": n_burn,
        "n_keep": n_keep,
        "trace_indices": idx,
        "backend": _backend(),
    }
    return Chain(
        kind="sv",
        param_names=("mu", "phi", "sigma_eta_sq"),
        draws=draws,
        dates=y.dates,
        vol_mean=vol.mean,
        vol_sd=vol.sd,
        burn_in=n_burn,
        seed=seed,
        traces=traces,
        acceptance=acceptance,
        config=config,
        warnings=warnings,
        h_mean=hstat.mean,
        h_sd=hstat.sd,
    )


def _backend():
    from .kernels import BACKEND
    return BACKEND
