# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: SV potential, its gradient, the leapfrog
trajectory, and the GARCH(1,1) variance recursion."""
import numpy as np

from libc.math cimport exp, isfinite


cdef double _potential(const double[::1] h, const double[::1] y2,
                       double mu, double phi, double s2) noexcept nogil:
    cdef Py_ssize_t i, n = h.shape[0]
    cdef double meas = 0.0, prior, x, xprev, r
    for i in range(n):
        meas += 0.5 * h[i] + 0.5 * y2[i] * exp(-h[i])
    xprev = h[0] - mu
    prior = (1.0 - phi * phi) * xprev * xprev
    for i in range(1, n):
        x = h[i] - mu
        r = x - phi * xprev
        prior += r * r
        xprev = x
    return meas + prior / (2.0 * s2)


cdef void _grad(const double[::1] h, const double[::1] y2, double mu,
                double phi, double s2, double[::1] g) noexcept nogil:
    cdef Py_ssize_t i, n = h.shape[0]
    cdef double inv = 1.0 / s2
    cdef double c2 = 1.0 + phi * phi
    cdef double xm, x0, xp
    if n == 1:
        g[0] = 0.5 - 0.5 * y2[0] * exp(-h[0]) + (1.0 - phi * phi) * (h[0] - mu) * inv
        return
    x0 = h[0] - mu
    xp = h[1] - mu
    g[0] = 0.5 - 0.5 * y2[0] * exp(-h[0]) + (x0 - phi * xp) * inv
    for i in range(1, n - 1):
        xm = x0
        x0 = xp
        xp = h[i + 1] - mu
        g[i] = 0.5 - 0.5 * y2[i] * exp(-h[i]) + (c2 * x0 - phi * (xm + xp)) * inv
    g[n - 1] = 0.5 - 0.5 * y2[n - 1] * exp(-h[n - 1]) + (xp - phi * x0) * inv


def sv_potential(const double[::1] h, const double[::1] y2, double mu,
                 double phi, double s2):
    """Negative unnormalized log density of the latent log-variances."""
    return _potential(h, y2, mu, phi, s2)


def sv_grad(const double[::1] h, const double[::1] y2, double mu, double phi,
            double s2, double[::1] out=None):
    if out is None:
        out = np.empty(h.shape[0])
    _grad(h, y2, mu, phi, s2, out)
    return np.asarray(out)


def sv_leapfrog(double[::1] h, double[::1] p, const double[::1] y2, double mu,
                double phi, double s2, double dt, int n_steps):
    """Integrate in place. Returns False if the state became non-finite."""
    cdef Py_ssize_t i, n = h.shape[0]
    cdef int k
    cdef double half = 0.5 * dt
    cdef double gsum
    cdef double[::1] g = np.empty(n)
    cdef bint ok = True
    with nogil:
        for k in range(n_steps):
            for i in range(n):
                h[i] += half * p[i]
            _grad(h, y2, mu, phi, s2, g)
            gsum = 0.0
            for i in range(n):
                p[i] -= dt * g[i]
                h[i] += half * p[i]
                gsum += g[i]
            if not isfinite(gsum):
                ok = False
                break
        if ok:
            for i in range(n):
                if not (isfinite(h[i]) and isfinite(p[i])):
                    ok = False
                    break
    return ok


def garch_filter(const double[::1] y2, double omega, double alpha, double beta,
                 double[::1] out=None):
    cdef Py_ssize_t t, n = y2.shape[0]
    if out is None:
        out = np.empty(n)
    out[0] = omega / (1.0 - alpha - beta)
    for t in range(1, n):
        out[t] = omega + alpha * y2[t - 1] + beta * out[t - 1]
    return np.asarray(out)
