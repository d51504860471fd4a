"""MCMC chain record and its on-disk formats.

Chain file layout::

    # svhmc-chain 1
    # {"kind": "sv", "seed": 7, ...}        (one line of sorted JSON)
    iter,mu,phi,sigma_eta_sq,h_10
    0,-7.81...,0.97...,0.04...,-7.6...

Volatility summaries are ``date,<kind>_vol_mean,<kind>_vol_sd`` CSV.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_open
from .timeseries import ValidationError, as_dates

MAGIC = "# svhmc-chain 1"


class Welford:
    """Running elementwise mean and variance."""

    def __init__(self, n):
        self.count = 0
        self.mean = np.zeros(n)
        self._m2 = np.zeros(n)

    def add(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    @property
    def var(self):
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self._m2 / (self.count - 1)

    @property
    def sd(self):
        return np.sqrt(self.var)


@dataclass
class Chain:
    """Post-burn-in draws of one fit.

    ``draws`` has one row per retained iteration and one column per entry
    of ``param_names``. ``vol_mean``/``vol_sd`` are the per-day posterior
    mean and standard deviation of the conditional variance.
    ``traces`` holds full traces of selected latent states, keyed
    ``"h_<index>"`` with 1-based day index.
    """

    kind: str
    param_names: tuple
    draws: np.ndarray
    dates: np.ndarray
    vol_mean: np.ndarray
    vol_sd: np.ndarray
    burn_in: int
    seed: int
    traces: dict = field(default_factory=dict)
    acceptance: dict = field(default_factory=dict)
    config: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    h_mean: np.ndarray | None = None
    h_sd: np.ndarray | None = None

    @property
    def n_kept(self):
        return len(self.draws)

    def param(self, name):
        return self.draws[:, self.param_names.index(name)]

    def posterior_mean(self):
        return dict(zip(self.param_names, self.draws.mean(axis=0).tolist()))

    def posterior_sd(self):
        return dict(zip(self.param_names, self.draws.std(axis=0, ddof=1).tolist()))

    def metadata(self):
        return {
            "kind": self.kind,
            "seed": int(self.seed),
            "burn_in": int(self.burn_in),
            "n_kept": int(self.n_kept),
            "acceptance": self.acceptance,
            "config": self.config,
            "warnings": list(self.warnings),
            "first_date": str(self.dates[0]),
            "last_date": str(self.dates[-1]),
            "n_days": int(len(self.dates)),
        }


def write_chain(chain, path):
    """Write the chain file atomically."""
    names = list(chain.param_names) + list(chain.traces)
    cols = [chain.draws[:, j] for j in range(chain.draws.shape[1])]
    cols += [np.asarray(chain.traces[k]) for k in chain.traces]
    with atomic_open(path) as fh:
        fh.write(MAGIC + "\n")
        fh.write("# " + json.dumps(chain.metadata(), sort_keys=True) + "\n")
        fh.write(",".join(["iter"] + names) + "\n")
        rows = zip(*[c.tolist() for c in cols])
        fh.writelines(f"{i}," + ",".join(repr(v) for v in row) + "\n" for i, row in enumerate(rows))


def read_chain(path):
    """Return ``(metadata, names, draws)`` from a chain file."""
    with open(path) as fh:
        if fh.readline().rstrip("\n") != MAGIC:
            raise ValidationError(f"{path}: not an svhmc chain file")
        meta = json.loads(fh.readline()[2:])
        names = fh.readline().strip().split(",")[1:]
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return meta, names, data[:, 1:]


def write_vol_csv(chain, path, prefix=None):
    """Per-day posterior mean and SD of the conditional variance."""
    prefix = prefix or chain.kind
    with atomic_open(path) as fh:
        fh.write(f"date,{prefix}_vol_mean,{prefix}_vol_sd\n")
        fh.writelines(
            f"{d},{m!r},{s!r}\n"
            for d, m, s in zip(chain.dates, chain.vol_mean.tolist(), chain.vol_sd.tolist())
        )


@dataclass(frozen=True)
class VolPath:
    """A model's per-day variance estimate."""

    dates: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "dates", as_dates(self.dates))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.dates.shape != self.values.shape:
            raise ValidationError("dates and values differ in length")

    @classmethod
    def from_chain(cls, chain):
        return cls(chain.dates, chain.vol_mean, chain.kind)


def read_vol_csv(path, label=None):
    """Load a ``date,<kind>_vol_mean,...`` file as a :class:`VolPath`."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        col = next((i for i, c in enumerate(header) if c.endswith("_vol_mean")), None)
        if header[0] != "date" or col is None:
            raise ValidationError(f"{path}: expected a date,<model>_vol_mean header")
        dates, values = [], []
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) <= col:
                continue
            try:
                dates.append(np.datetime64(parts[0], "D"))
                values.append(float(parts[col]))
            except ValueError as exc:
                raise ValidationError(f"{path}: line {lineno}: {exc}") from None
    if label is None:
        label = header[col][: -len("_vol_mean")]
    return VolPath(as_dates(dates), np.array(values), label)
