"""Log posterior of the SV latent log-variances and its Hamiltonian.

The model is::

    y_t = exp(h_t / 2) * eps_t,          eps_t ~ N(0, 1)
    h_t = mu + phi * (h_{t-1} - mu) + eta_t,  eta_t ~ N(0, sigma_eta_sq)

with ``h_1`` drawn from the stationary distribution. The potential energy
used by HMC is the negative log density of ``h`` given ``y`` and the
parameters, up to an additive constant.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


@dataclass(frozen=True)
class SvParams:
    mu: float
    phi: float
    sigma_eta_sq: float

    def __post_init__(self):
        for name in ("mu", "phi", "sigma_eta_sq"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not abs(self.phi) < 1.0:
            raise ValueError(f"|phi| must be < 1, got {self.phi}")
        if not (self.sigma_eta_sq > 0.0 and np.isfinite(self.sigma_eta_sq)):
            raise ValueError(f"sigma_eta_sq must be positive, got {self.sigma_eta_sq}")

    def as_tuple(self):
        return (self.mu, self.phi, self.sigma_eta_sq)

    @property
    def stationary_var(self):
        """Unconditional variance of h."""
        return self.sigma_eta_sq / (1.0 - self.phi**2)


@dataclass(frozen=True)
class LatentPath:
    """Log-variances ``h`` and, during HMC, their conjugate momenta ``p``."""

    h: np.ndarray
    p: np.ndarray | None = None

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64)
        if h.ndim != 1 or len(h) == 0 or not np.all(np.isfinite(h)):
            raise ValueError("h must be a non-empty finite 1-D array")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)
        if self.p is not None:
            p = np.array(self.p, dtype=np.float64)
            if p.shape != h.shape or not np.all(np.isfinite(p)):
                raise ValueError("p must be finite and match h in length")
            p.setflags(write=False)
            object.__setattr__(self, "p", p)

    def __len__(self):
        return len(self.h)


def _values(y):
    return np.ascontiguousarray(getattr(y, "values", y), dtype=np.float64)


def _hvec(h):
    return np.ascontiguousarray(getattr(h, "h", h), dtype=np.float64)


def _check(hv, yv):
    if hv.shape != yv.shape:
        raise ValueError(f"latent path has length {len(hv)} but the return series has {len(yv)}")


def _finite(value, what):
    if not np.isfinite(value).all():
        raise FloatingPointError(f"{what} overflowed; exp(-h) is out of range for this state")
    return value


def log_prob_h(h, y, theta):
    """Unnormalized log density of ``h`` given returns ``y`` and ``theta``.

    ``h`` may be a :class:`LatentPath` or an array; ``y`` a
    :class:`~svhmc.timeseries.ReturnSeries` or an array of returns.
    """
    hv, yv = _hvec(h), _values(y)
    _check(hv, yv)
    with np.errstate(over="ignore"):
        u = kernels.sv_potential(hv, yv * yv, theta.mu, theta.phi, theta.sigma_eta_sq)
    return -_finite(u, "log_prob_h")


def kinetic(p):
    p = np.asarray(getattr(p, "p", p), dtype=np.float64)
    return 0.5 * float(np.dot(p, p))


def hamiltonian(h, p, y, theta):
    """Kinetic plus potential energy. ``p`` defaults to ``h.p``."""
    if p is None:
        p = h.p
    if p is None:
        raise ValueError("hamiltonian needs momenta")
    return kinetic(p) - log_prob_h(h, y, theta)


def grad_h(h, y, theta):
    """Gradient of the potential ``-log_prob_h`` with respect to each ``h_i``."""
    hv, yv = _hvec(h), _values(y)
    _check(hv, yv)
    with np.errstate(over="ignore"):
        g = kernels.sv_grad(hv, yv * yv, theta.mu, theta.phi, theta.sigma_eta_sq)
    return _finite(np.asarray(g), "grad_h")


class SvTarget:
    """Potential energy of ``h`` for fixed returns and parameters.

    This is the object HMC integrates against. ``leapfrog`` runs the fused
    compiled trajectory when the extension is available.
    """

    def __init__(self, y, theta):
        yv = _values(y)
        self.y2 = yv * yv
        self.theta = theta
        self.n = len(yv)

    def potential(self, h):
        with np.errstate(over="ignore"):
            return kernels.sv_potential(h, self.y2, *self.theta.as_tuple())

    def grad(self, h):
        with np.errstate(over="ignore"):
            return kernels.sv_grad(h, self.y2, *self.theta.as_tuple())

    def leapfrog(self, h, p, step_size, n_steps):
        """Integrate copies of ``(h, p)``; returns ``(h', p', finite)``."""
        h = np.array(h, dtype=np.float64)
        p = np.array(p, dtype=np.float64)
        with np.errstate(over="ignore", invalid="ignore"):
            ok = kernels.sv_leapfrog(h, p, self.y2, *self.theta.as_tuple(), float(step_size), int(n_steps))
        return h, p, bool(ok)
