"""Pure numpy implementations of the hot kernels.

Same call signatures as the compiled ``_kernels`` module. Used when the
extension is not built or when ``SVHMC_BACKEND=python`` is set.
"""
import numpy as np
from scipy.signal import lfilter


def sv_potential(h, y2, mu, phi, s2):
    """Negative unnormalized log density of the latent log-variances."""
    x = h - mu
    meas = np.sum(0.5 * h + 0.5 * y2 * np.exp(-h))
    resid = x[1:] - phi * x[:-1]
    prior = (1.0 - phi * phi) * x[0] * x[0] + np.dot(resid, resid)
    return float(meas + prior / (2.0 * s2))


def sv_grad(h, y2, mu, phi, s2, out=None):
    n = h.shape[0]
    x = h - mu
    g = 0.5 - 0.5 * y2 * np.exp(-h)
    prior = np.empty(n)
    if n == 1:
        prior[0] = (1.0 - phi * phi) * x[0]
    else:
        prior[0] = x[0] - phi * x[1]
        prior[-1] = x[-1] - phi * x[-2]
        prior[1:-1] = (1.0 + phi * phi) * x[1:-1] - phi * (x[:-2] + x[2:])
    g += prior / s2
    if out is None:
        return g
    out[:] = g
    return out


def sv_leapfrog(h, p, y2, mu, phi, s2, dt, n_steps):
    """Integrate in place. Returns False if the state became non-finite."""
    half = 0.5 * dt
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(n_steps):
            h += half * p
            g = sv_grad(h, y2, mu, phi, s2)
            p -= dt * g
            h += half * p
            if not np.isfinite(g.sum()):
                return False
    return bool(np.isfinite(h).all() and np.isfinite(p).all())


def garch_filter(y2, omega, alpha, beta, out=None):
    n = y2.shape[0]
    if out is None:
        out = np.empty(n)
    s0 = omega / (1.0 - alpha - beta)
    # sigma2[t] - beta*sigma2[t-1] = omega + alpha*y2[t-1]
    drive = np.empty(n)
    drive[0] = s0
    drive[1:] = omega + alpha * y2[:-1]
    out[:] = lfilter([1.0], [1.0, -beta], drive)
    return out
