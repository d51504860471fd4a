"""Output analysis for MCMC traces.

Integrated autocorrelation time uses the self-consistent window rule:
the sum ``1 + 2 * sum_{t=1..W} ACF(t)`` is truncated at the smallest ``W``
with ``W >= c * tau(W)`` (``c = 6``), and its error is
``tau * sqrt(2 * (2W + 1) / n)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._io import atomic_open


def acf(trace, max_lag=None):
    """Sample autocorrelation with the biased ``1/n`` normalization.

    Returns values for lags ``0..max_lag`` (``ACF(0) = 1``).
    """
    x = np.asarray(trace, dtype=np.float64)
    n = len(x)
    if max_lag is None:
        max_lag = n - 1
    if not 1 <= max_lag < n:
        raise ValueError(f"need 1 <= max_lag < n, got max_lag={max_lag}, n={n}")
    d = x - x.mean()
    c0 = float(np.dot(d, d)) / n
    if not c0 > 0:
        raise ValueError("trace has zero variance; autocorrelation undefined")
    size = 1 << int(math.ceil(math.log2(2 * n)))
    f = np.fft.rfft(d, size)
    cov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1] / n
    return cov / c0


class TauEstimate(NamedTuple):
    tau: float
    error: float
    window: int
    converged: bool


def tau_int(trace, c=6.0, max_lag=None):
    """Integrated autocorrelation time with a self-consistent window.

    ``converged`` is False when no window up to ``max_lag`` satisfies the
    rule; the estimate at ``max_lag`` is then returned and should be
    treated as a lower bound.
    """
    x = np.asarray(trace, dtype=np.float64)
    n = len(x)
    if max_lag is None:
        max_lag = min(n - 1, max(100, n // 4))
    rho = acf(x, max_lag)
    taus = 1.0 + 2.0 * np.cumsum(rho[1:])
    windows = np.arange(1, max_lag + 1)
    hit = np.flatnonzero(windows >= c * taus)
    converged = len(hit) > 0
    k = int(hit[0]) if converged else max_lag - 1
    tau, w = float(taus[k]), int(windows[k])
    return TauEstimate(tau, tau * math.sqrt(2.0 * (2 * w + 1) / n), w, converged)


def jackknife_se(trace, block_size=None):
    """Delete-one-block jackknife standard error of the trace mean.

    ``block_size`` defaults to ``max(1, ceil(2 * tau_int))``. Draws beyond
    the last complete block are ignored.
    """
    x = np.asarray(trace, dtype=np.float64)
    if block_size is None:
        try:
            block_size = max(1, math.ceil(2.0 * tau_int(x).tau))
        except ValueError:
            block_size = 1
    block_size = int(block_size)
    n_blocks = len(x) // block_size
    if n_blocks < 2:
        raise ValueError(f"need at least 2 blocks, got {n_blocks} of size {block_size}")
    m = n_blocks * block_size
    sums = x[:m].reshape(n_blocks, block_size).sum(axis=1)
    loo = (sums.sum() - sums) / (m - block_size)
    dev = loo - loo.mean()
    return math.sqrt((n_blocks - 1) / n_blocks * float(np.dot(dev, dev)))


@dataclass(frozen=True)
class TraceSummary:
    name: str
    mean: float
    sd: float
    se: float
    tau_int: float
    tau_int_err: float
    n: int
    converged: bool


def summarize(trace, name=""):
    """Posterior mean, SD, jackknife SE and tau_int of one trace.

    A constant trace yields zero SD and SE and a NaN, non-converged tau_int.
    """
    x = np.asarray(trace, dtype=np.float64)
    n = len(x)
    if n < 100:
        raise ValueError(f"summarize needs at least 100 draws, got {n}")
    mean = float(x.mean())
    sd = float(x.std(ddof=1))
    if sd == 0.0:
        return TraceSummary(name, mean, 0.0, 0.0, math.nan, math.nan, n, False)
    est = tau_int(x)
    block = max(1, math.ceil(2.0 * est.tau))
    if len(x) // block < 2:
        block = len(x) // 2
    se = jackknife_se(x, block)
    return TraceSummary(name, mean, sd, se, est.tau, est.error, n, est.converged)


def summarize_chain(chain):
    """Summaries in table order: parameters then stored latent traces."""
    order = {"sv": ("phi", "mu", "sigma_eta_sq"), "garch": ("omega", "alpha", "beta")}
    names = order.get(chain.kind, chain.param_names)
    rows = [summarize(chain.param(p), p) for p in names]
    rows += [summarize(t, k) for k, t in chain.traces.items()]
    return rows


def write_summary_csv(rows, path):
    with atomic_open(path) as fh:
        fh.write("parameter,mean,SD,SE,tau_int,tau_int_err\n")
        fh.writelines(
            f"{r.name},{r.mean!r},{r.sd!r},{r.se!r},{r.tau_int!r},{r.tau_int_err!r}\n" for r in rows
        )
