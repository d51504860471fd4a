"""Independent reference implementations used as test oracles.

These are deliberately written as plain loops over the model definitions
and share no code with the package.
"""
import math

import numpy as np


def log_prob_terms(h, y, mu, phi, s2):
    """Term-by-term unnormalized log density of the latent path."""
    total = 0.0
    for hi, yi in zip(h, y):
        total -= hi / 2.0 + (yi * yi / 2.0) * math.exp(-hi)
    total -= (h[0] - mu) ** 2 / (2.0 * s2 / (1.0 - phi * phi))
    for i in range(1, len(h)):
        total -= (h[i] - mu - phi * (h[i - 1] - mu)) ** 2 / (2.0 * s2)
    return total


def garch_recursion(y, omega, alpha, beta):
    out = [omega / (1.0 - alpha - beta)]
    for t in range(1, len(y)):
        out.append(omega + alpha * y[t - 1] ** 2 + beta * out[-1])
    return out


def garch_loglik_loop(y, omega, alpha, beta):
    s = garch_recursion(y, omega, alpha, beta)
    return sum(-0.5 * math.log(2 * math.pi * v) - yi * yi / (2 * v) for yi, v in zip(y, s))


def central_diff(f, x, step=1e-5):
    g = np.empty(len(x))
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = step
        g[i] = (f(x + e) - f(x - e)) / (2 * step)
    return g


def grid_moments(logp, grid):
    """Mean and variance of a 1-D density given on a uniform grid."""
    w = np.exp(logp - logp.max())
    w /= w.sum()
    m = float(np.dot(w, grid))
    return m, float(np.dot(w, (grid - m) ** 2))


def grid_cdf(logp, grid):
    """Trapezoid CDF of a 1-D density on a uniform grid, normalized to 1."""
    w = np.exp(logp - logp.max())
    c = np.concatenate([[0.0], np.cumsum(0.5 * (w[1:] + w[:-1]))])
    return c / c[-1]


def ks_distance(draws, grid, cdf):
    """Sup distance between the empirical CDF of ``draws`` and a tabulated CDF."""
    x = np.sort(np.asarray(draws))
    n = len(x)
    f = np.interp(x, grid, cdf)
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(max(np.max(np.abs(ecdf_hi - f)), np.max(np.abs(f - ecdf_lo))))


def ar1(n, rho, rng, burn=1000):
    e = rng.standard_normal(n + burn)
    x = np.empty(n + burn)
    x[0] = e[0] / math.sqrt(1 - rho * rho)
    for t in range(1, n + burn):
        x[t] = rho * x[t - 1] + e[t]
    return x[burn:]
