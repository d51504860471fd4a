"""Scoring model variance paths against HL-adjusted realized variance."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._io import atomic_open
from .chain import Chain, VolPath
from .realized import RvSeries
from .timeseries import ValidationError


def _series(x):
    if isinstance(x, Chain):
        return x.dates, x.vol_mean
    if isinstance(x, RvSeries):
        return x.dates, x.adjusted
    if isinstance(x, VolPath):
        return x.dates, x.values
    raise TypeError(f"cannot score {type(x).__name__}")


def _range(dates):
    return f"{dates[0]}..{dates[-1]} ({len(dates)} days)" if len(dates) else "empty"


def rmspe_n(model_vol, rv):
    """RMSPE and the number of aligned days it was computed over."""
    md, mv = _series(model_vol)
    rd, rvv = _series(rv)
    common, i_m, i_r = np.intersect1d(md, rd, assume_unique=True, return_indices=True)
    if len(common) == 0:
        raise ValidationError(f"no common dates: model covers {_range(md)}, RV covers {_range(rd)}")
    sigma2, crv = mv[i_m], rvv[i_r]
    zero = np.flatnonzero(crv <= 0)
    if len(zero):
        raise ValidationError(f"adjusted RV is zero on {common[zero[0]]}; percentage error undefined")
    pe = (sigma2 - crv) / crv
    return math.sqrt(float(np.mean(pe * pe))), len(common)


def rmspe(model_vol, rv):
    """Root mean squared percentage error of ``model_vol`` against ``c * RV``.

    Days are aligned by date intersection.
    """
    return rmspe_n(model_vol, rv)[0]


@dataclass(frozen=True)
class ScoreRow:
    model: str
    delta_min: float
    rmspe: float
    n_days: int


@dataclass
class ScoreTable:
    rows: list = field(default_factory=list)

    def get(self, model, delta):
        for r in self.rows:
            if r.model == model and r.delta_min == float(delta):
                return r
        raise KeyError((model, delta))

    def deltas(self):
        return sorted({r.delta_min for r in self.rows})

    def models(self):
        return list(dict.fromkeys(r.model for r in self.rows))

    def winners(self):
        """Model with the smallest RMSPE at each interval."""
        out = {}
        for d in self.deltas():
            rows = [r for r in self.rows if r.delta_min == d]
            out[d] = min(rows, key=lambda r: r.rmspe).model
        return out

    def best_delta(self, model):
        rows = [r for r in self.rows if r.model == model]
        return min(rows, key=lambda r: r.rmspe).delta_min

    def summary(self):
        models = self.models()
        lines = ["delta_min  " + "  ".join(f"{m:>12}" for m in models) + "  winner"]
        win = self.winners()
        for d in self.deltas():
            vals = "  ".join(f"{self.get(m, d).rmspe:12.5f}" for m in models)
            lines.append(f"{d:9g}  {vals}  {win[d]}")
        for m in models:
            lines.append(f"minimum RMSPE for {m} at {self.best_delta(m):g} min")
        return "\n".join(lines)


def compare(models, rvs):
    """RMSPE of every model at every sampling interval.

    ``models`` maps a label to a variance path (``VolPath`` or ``Chain``);
    ``rvs`` maps sampling interval in minutes to adjusted realized
    variance.
    """
    table = ScoreTable()
    for delta in sorted(rvs):
        for name, vol in models.items():
            value, n = rmspe_n(vol, rvs[delta])
            table.rows.append(ScoreRow(name, float(delta), value, n))
    return table


def write_score_csv(table, path):
    with atomic_open(path) as fh:
        fh.write("model,delta_min,rmspe,n_days\n")
        fh.writelines(f"{r.model},{r.delta_min!r},{r.rmspe!r},{r.n_days}\n" for r in table.rows)
