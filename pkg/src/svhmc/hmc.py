"""Hybrid Monte Carlo update of the whole latent path.

Each update draws fresh standard-normal momenta, integrates Hamilton's
equations with the position-first leapfrog scheme (half step in ``h``,
full step in ``p``, half step in ``h``) and accepts the end point with
probability ``min(1, exp(-dH))``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .sv_core import LatentPath


class TrajectoryDivergence(FloatingPointError):
    """The integrated state became non-finite."""


@dataclass(frozen=True)
class HmcConfig:
    """Sampler settings.

    When ``trajectory_length`` is set, ``n_steps`` is re-derived as
    ``round(trajectory_length / step_size)`` whenever the step size changes,
    so the fictitious-time length of each trajectory stays fixed.
    """

    step_size: float = 0.1
    n_steps: int = 10
    target_accept: float = 0.65
    tune: bool = True
    seed: int | None = None
    trajectory_length: float | None = 1.0
    tune_window: int = 50
    deadband: float = 0.02

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if int(self.n_steps) < 1:
            raise ValueError("n_steps must be >= 1")
        if not 0.0 < self.target_accept < 1.0:
            raise ValueError("target_accept must lie in (0, 1)")
        if self.trajectory_length is not None and not self.trajectory_length > 0:
            raise ValueError("trajectory_length must be positive")
        if self.tune_window < 1:
            raise ValueError("tune_window must be >= 1")

    def steps_for(self, step_size):
        if self.trajectory_length is None:
            return int(self.n_steps)
        return max(1, int(round(self.trajectory_length / step_size)))


class HmcStepReport(NamedTuple):
    delta_H: float
    accepted: bool
    accept_prob: float


def leapfrog(h, p, target, step_size, n_steps):
    """Run ``n_steps`` leapfrog steps from ``(h, p)`` and return ``(h', p')``.

    ``target`` supplies ``grad(h)``; if it also has a fused ``leapfrog``
    method that is used instead. Inputs are not modified.

    Raises
    ------
    TrajectoryDivergence
        If any state along the trajectory is non-finite.
    """
    fused = getattr(target, "leapfrog", None)
    if fused is not None:
        h1, p1, ok = fused(h, p, step_size, n_steps)
        if not ok:
            raise TrajectoryDivergence("non-finite state in leapfrog trajectory")
        return h1, p1
    h1 = np.array(h, dtype=np.float64)
    p1 = np.array(p, dtype=np.float64)
    half = 0.5 * step_size
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(int(n_steps)):
            h1 += half * p1
            p1 -= step_size * np.asarray(target.grad(h1))
            h1 += half * p1
            if not (np.isfinite(h1).all() and np.isfinite(p1).all()):
                raise TrajectoryDivergence("non-finite state in leapfrog trajectory")
    return h1, p1


def accept_probability(delta_H):
    if delta_H <= 0.0:
        return 1.0
    if math.isinf(delta_H) or math.isnan(delta_H):
        return 0.0
    return math.exp(-delta_H)


def hmc_step(h, target, rng, step_size, n_steps, integrator=leapfrog):
    """One HMC update of ``h`` against ``target``.

    Returns the new state (same container type as ``h``) and a
    :class:`HmcStepReport`. A divergent trajectory is a rejection with
    ``delta_H = inf``.
    """
    as_path = isinstance(h, LatentPath)
    h0 = h.h if as_path else np.asarray(h, dtype=np.float64)
    p0 = rng.standard_normal(len(h0))
    u = rng.random()
    H0 = 0.5 * float(np.dot(p0, p0)) + target.potential(h0)
    try:
        h1, p1 = integrator(h0, p0, target, step_size, n_steps)
        with np.errstate(over="ignore", invalid="ignore"):
            H1 = 0.5 * float(np.dot(p1, p1)) + target.potential(h1)
        delta_H = H1 - H0 if math.isfinite(H1) else math.inf
    except TrajectoryDivergence:
        delta_H = math.inf
    prob = accept_probability(delta_H)
    accepted = u < prob
    report = HmcStepReport(delta_H, bool(accepted), prob)
    if not accepted:
        return h, report
    return (LatentPath(h1) if as_path else h1), report


def tune_step_size(history, cfg, step_size, gain=1.0):
    """Multiplicative step-size update from a window of step reports.

    The step grows when the mean acceptance probability is above
    ``cfg.target_accept`` and shrinks when below; inside ``cfg.deadband``
    it is left unchanged.
    """
    if not history:
        return step_size
    rate = float(np.mean([r.accept_prob for r in history]))
    diff = rate - cfg.target_accept
    if abs(diff) <= cfg.deadband:
        return step_size
    return step_size * math.exp(gain * diff)


class HmcSampler:
    """Stateful HMC driver for one chain.

    Tunes the step size over windows of ``cfg.tune_window`` updates until
    :meth:`freeze` is called, after which the step size is fixed.
    """

    def __init__(self, cfg, integrator=leapfrog):
        self.cfg = cfg
        self.integrator = integrator
        self.step_size = float(cfg.step_size)
        self.n_steps = cfg.steps_for(self.step_size)
        self.tuning = bool(cfg.tune)
        self._window = []
        self.n_updates = 0
        self.n_accepted = 0
        self.sum_accept_prob = 0.0
        self.n_divergent = 0

    def step(self, h, target, rng):
        h, report = hmc_step(h, target, rng, self.step_size, self.n_steps, self.integrator)
        self.n_updates += 1
        self.n_accepted += report.accepted
        self.sum_accept_prob += report.accept_prob
        self.n_divergent += math.isinf(report.delta_H)
        if self.tuning:
            self._window.append(report)
            if len(self._window) >= self.cfg.tune_window:
                self.step_size = tune_step_size(self._window, self.cfg, self.step_size)
                self.n_steps = self.cfg.steps_for(self.step_size)
                self._window.clear()
        return h, report

    def freeze(self):
        """Stop tuning and reset the acceptance counters."""
        self.tuning = False
        self._window.clear()
        self.reset_stats()

    def reset_stats(self):
        self.n_updates = self.n_accepted = self.n_divergent = 0
        self.sum_accept_prob = 0.0

    @property
    def acceptance(self):
        return self.n_accepted / self.n_updates if self.n_updates else float("nan")

    @property
    def mean_accept_prob(self):
        return self.sum_accept_prob / self.n_updates if self.n_updates else float("nan")
