"""GARCH(1,1) with normal errors and zero conditional mean.

    sigma2_1 = omega / (1 - alpha - beta)
    sigma2_t = omega + alpha * y_{t-1}^2 + beta * sigma2_{t-1}

Estimated by adaptive random-walk Metropolis on unconstrained coordinates
``(log omega, log(alpha/gamma), log(beta/gamma))`` with
``gamma = 1 - alpha - beta``, so every draw is covariance-stationary.
Priors are flat on ``omega > 0`` and on the triangle ``alpha, beta >= 0,
alpha + beta < 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import kernels
from ._io import stream
from .chain import Chain, Welford

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class GarchParams:
    omega: float
    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("omega", "alpha", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if not (self.alpha >= 0 and self.beta >= 0):
            raise ValueError("alpha and beta must be non-negative")
        if not self.alpha + self.beta < 1:
            raise ValueError("alpha + beta must be < 1")

    def as_tuple(self):
        return (self.omega, self.alpha, self.beta)

    @property
    def unconditional_var(self):
        return self.omega / (1.0 - self.alpha - self.beta)


def _y2(y):
    yv = np.ascontiguousarray(getattr(y, "values", y), dtype=np.float64)
    return yv * yv


def garch_filter(y, theta):
    """Conditional variance path for returns ``y``."""
    return np.asarray(kernels.garch_filter(_y2(y), *theta.as_tuple()))


def _loglik_y2(y2, omega, alpha, beta):
    s = kernels.garch_filter(y2, omega, alpha, beta)
    return -0.5 * float(np.sum(LOG_2PI + np.log(s) + y2 / s))


def garch_loglik(y, theta):
    """Gaussian log-likelihood of ``y`` under ``theta``."""
    return _loglik_y2(_y2(y), *theta.as_tuple())


def to_unconstrained(theta):
    omega, alpha, beta = theta.as_tuple()
    gamma = 1.0 - alpha - beta
    return np.array([math.log(omega), math.log(alpha / gamma), math.log(beta / gamma)])


def from_unconstrained(z):
    """Inverse of :func:`to_unconstrained`; returns ``(omega, alpha, beta)``."""
    m = max(0.0, z[1], z[2])
    e1, e2, e0 = math.exp(z[1] - m), math.exp(z[2] - m), math.exp(-m)
    tot = e0 + e1 + e2
    return math.exp(z[0]), e1 / tot, e2 / tot


def _log_target(z, y2):
    omega, alpha, beta = from_unconstrained(z)
    gamma = 1.0 - alpha - beta
    if not (omega > 0 and alpha > 0 and beta > 0 and gamma > 0 and math.isfinite(omega)):
        return -math.inf
    ll = _loglik_y2(y2, omega, alpha, beta)
    if not math.isfinite(ll):
        return -math.inf
    # Jacobian of the log/additive-logistic transform
    return ll + math.log(omega) + math.log(alpha) + math.log(beta) + math.log(gamma)


def garch_mle(y, start=None):
    """Maximum-likelihood estimate by quasi-Newton search in unconstrained space.

    Returns ``(GarchParams, inverse Hessian in z-space)``.
    """
    y2 = _y2(y)
    if start is None:
        v = float(np.mean(y2))
        start = GarchParams(0.05 * v, 0.05, 0.9)
    z0 = to_unconstrained(start)

    def nll(z):
        omega, alpha, beta = from_unconstrained(z)
        if not (alpha > 0 and beta > 0 and alpha + beta < 1):
            return 1e300
        ll = _loglik_y2(y2, omega, alpha, beta)
        return -ll if math.isfinite(ll) else 1e300

    res = minimize(nll, z0, method="BFGS")
    res = minimize(nll, res.x, method="Nelder-Mead", options={"xatol": 1e-8, "fatol": 1e-10, "maxiter": 4000})
    res2 = minimize(nll, res.x, method="BFGS")
    z = res2.x if res2.fun <= res.fun else res.x
    hinv = getattr(res2, "hess_inv", None)
    if hinv is None or not np.all(np.isfinite(hinv)) or np.any(np.linalg.eigvalsh(hinv) <= 0):
        hinv = np.eye(3) * 0.01
    return GarchParams(*from_unconstrained(z)), np.asarray(hinv)


def run_garch_fit(y, n_burn=10000, n_keep=40000, seed=0, target_accept=0.3, adapt_every=200):
    """Random-walk Metropolis fit of GARCH(1,1).

    The proposal covariance starts from the MLE curvature and, during
    burn-in, is re-estimated from the burn-in draws and rescaled toward
    ``target_accept``. It is frozen after burn-in.
    """
    if n_keep < 1 or n_burn < 0:
        raise ValueError("n_keep must be >= 1 and n_burn >= 0")
    rng = stream(int(seed), "garch")
    y2 = _y2(y)
    n = len(y2)
    start, hinv = garch_mle(y)
    z = to_unconstrained(start)
    logp = _log_target(z, y2)
    cov = hinv
    log_scale = math.log(2.38 / math.sqrt(3.0))
    chol = np.linalg.cholesky(cov) * math.exp(log_scale)

    draws = np.empty((n_keep, 3))
    vol = Welford(n)
    path = kernels.garch_filter(y2, *from_unconstrained(z))
    burn_z = np.empty((n_burn, 3))
    window = 0
    accepted = 0
    tail = max(1, n_burn // 4)
    tail_acc = 0

    for it in range(n_burn + n_keep):
        if it == n_burn:
            accepted = 0
        prop = z + chol @ rng.standard_normal(3)
        lp = _log_target(prop, y2)
        u = rng.random()
        ok = lp - logp >= 0 or math.log(u) < lp - logp
        if ok:
            z, logp = prop, lp
            path = None
        accepted += ok
        if it < n_burn:
            burn_z[it] = z
            window += ok
            if it >= n_burn - tail:
                tail_acc += ok
            if (it + 1) % adapt_every == 0:
                log_scale += window / adapt_every - target_accept
                window = 0
                if it + 1 >= 1000:
                    emp = np.cov(burn_z[(it + 1) // 2 : it + 1].T)
                    if np.all(np.isfinite(emp)) and np.linalg.eigvalsh(emp).min() > 0:
                        cov = emp + 1e-10 * np.eye(3)
                chol = np.linalg.cholesky(cov) * math.exp(log_scale)
            continue
        k = it - n_burn
        theta = from_unconstrained(z)
        draws[k] = theta
        if path is None:
            path = kernels.garch_filter(y2, *theta)
        vol.add(path)

    warnings = []
    tail_rate = tail_acc / tail if n_burn else float("nan")
    if n_burn and not 0.1 <= tail_rate <= 0.6:
        warnings.append(f"GARCH acceptance {tail_rate:.3f} at end of burn-in is outside [0.1, 0.6]")
    return Chain(
        kind="garch",
        param_names=("omega", "alpha", "beta"),
        draws=draws,
        dates=y.dates,
        vol_mean=vol.mean,
        vol_sd=vol.sd,
        burn_in=n_burn,
        seed=int(seed),
        acceptance={"rwm": accepted / n_keep, "rwm_burn_in_tail": tail_rate if n_burn else None},
        config={
            "n_burn": n_burn,
            "n_keep": n_keep,
            "target_accept": target_accept,
            "proposal_scale": math.exp(log_scale),
            "mle": list(start.as_tuple()),
        },
        warnings=warnings,
    )
