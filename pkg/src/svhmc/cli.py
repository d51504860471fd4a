"""Command-line pipeline: simulate, fit, rv, evaluate, report.

All commands share an output directory (``--out``) from which later
stages read earlier stages' files. Exit codes: 0 success, 1 usage or
configuration error, 2 data error, 3 completed with warnings.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import diagnostics, evaluate, realized
from ._io import write_text_atomic
from .chain import read_vol_csv, write_chain, write_vol_csv
from .garch import run_garch_fit
from .hmc import HmcConfig
from .param_sampler import PriorSpec, run_sv_fit
from .synth import SynthSpec, gen_garch, gen_intraday, gen_sv, trading_days, write_truth
from .timeseries import (
    ParseError,
    SessionCalendar,
    ValidationError,
    load_daily_returns,
    load_intraday,
    write_daily_returns,
    write_intraday,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_WARN = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


class DataError(ValueError):
    pass


_SECTIONS = {
    "data": {"daily", "intraday", "sessions", "label"},
    "synth": {f.name for f in fields(SynthSpec)} - {"seed", "calendar"} | {"intraday"},
    "sv": {"n_burn", "n_keep", "trace_indices"} | {f.name for f in fields(PriorSpec)},
    "garch": {"n_burn", "n_keep", "target_accept"},
    "hmc": {f.name for f in fields(HmcConfig)},
    "rv": {"deltas"},
    "eval": {"models", "deltas"},
}


@dataclass
class RunConfig:
    """Validated configuration for every stage."""

    seed: int = 0
    out: str = "."
    data: dict = field(default_factory=dict)
    synth: dict = field(default_factory=dict)
    sv: dict = field(default_factory=dict)
    garch: dict = field(default_factory=dict)
    hmc: dict = field(default_factory=dict)
    rv: dict = field(default_factory=dict)
    eval: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw, seed=None, out=None):
        raw = dict(raw)
        unknown = set(raw) - set(_SECTIONS) - {"seed"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for name, allowed in _SECTIONS.items():
            block = raw.get(name, {})
            if not isinstance(block, dict):
                raise ConfigError(f"[{name}] must be a table")
            bad = set(block) - allowed
            if bad:
                raise ConfigError(f"unknown keys in [{name}]: {sorted(bad)}")
        cfg_seed = raw.get("seed", 0)
        seed = cfg_seed if seed is None else seed
        if not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        cfg = cls(seed=seed, out=out or ".", **{k: dict(raw.get(k, {})) for k in _SECTIONS})
        cfg.validate()
        return cfg

    def validate(self):
        try:
            self.calendar()
            self.synth_spec()
            self.prior()
            self.hmc_config()
            for key in ("n_burn", "n_keep"):
                for block in (self.sv, self.garch):
                    if key in block and (not isinstance(block[key], int) or block[key] < (1 if key == "n_keep" else 0)):
                        raise ConfigError(f"{key} must be an integer >= {1 if key == 'n_keep' else 0}")
            ta = self.garch.get("target_accept", 0.3)
            if not 0 < ta < 1:
                raise ConfigError("garch target_accept must lie in (0, 1)")
            deltas = self.deltas()
            if not deltas or any(not (isinstance(d, (int, float)) and d > 0) for d in deltas):
                raise ConfigError("[rv] deltas must be a non-empty list of positive minutes")
            for m in self.models():
                if m not in ("sv", "garch"):
                    raise ConfigError(f"unknown model {m!r} in [eval] models")
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def path(self, key, default):
        p = self.data.get(key, default)
        return p if os.path.isabs(p) else os.path.join(self.out, p)

    def calendar(self):
        sessions = self.data.get("sessions")
        if sessions is None:
            return SessionCalendar.parse(["09:00-11:00", "12:30-15:00"])
        return SessionCalendar.parse(sessions)

    def synth_spec(self):
        kw = {k: v for k, v in self.synth.items() if k != "intraday"}
        return SynthSpec(seed=self.seed, calendar=self.calendar(), **kw)

    def prior(self):
        kw = {k: v for k, v in self.sv.items() if k in {f.name for f in fields(PriorSpec)}}
        return PriorSpec(**kw)

    def hmc_config(self):
        return HmcConfig(**self.hmc)

    def deltas(self):
        return list(self.rv.get("deltas", realized.DEFAULT_DELTAS))

    def eval_deltas(self):
        return list(self.eval.get("deltas", self.deltas()))

    def models(self):
        return list(self.eval.get("models", ["sv", "garch"]))


def load_config(path, seed=None, out=None):
    if path is None:
        return RunConfig.from_dict({}, seed, out)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return RunConfig.from_dict(raw, seed, out)


def _delta_name(d):
    return f"{float(d):g}"


def _ensure_out(cfg):
    os.makedirs(cfg.out, exist_ok=True)


def _require(path, what):
    if not os.path.exists(path):
        raise DataError(f"{what} not found: {path}")
    return path


def cmd_simulate(cfg):
    """Write synthetic daily returns, the true variance path and, optionally, ticks."""
    _ensure_out(cfg)
    spec = cfg.synth_spec()
    intraday = cfg.synth.get("intraday", spec.kind == "diffusion")
    if spec.kind == "diffusion" and not intraday:
        raise ConfigError("a diffusion simulation needs [synth] intraday = true")
    days = trading_days(spec.start_date, spec.n_days)
    truth = cfg.path("truth", "truth.csv")
    if spec.kind == "sv":
        series, h = gen_sv(spec)
        var = np.exp(h)
        write_truth(truth, days, var, h=h)
    elif spec.kind == "garch":
        series, var = gen_garch(spec)
        write_truth(truth, days, var)
    else:
        var = np.full(spec.n_days, float(spec.daily_var))
        write_truth(truth, days, var)
    written = [truth]
    if intraday:
        panel, series = gen_intraday(spec, var)
        path = cfg.path("intraday", "intraday.csv")
        write_intraday(panel, path)
        written.append(path)
    daily = cfg.path("daily", "daily.csv")
    write_daily_returns(series, daily)
    for p in [daily] + written:
        print(f"wrote {p}")
    return []


def _load_daily(cfg):
    path = _require(cfg.path("daily", "daily.csv"), "daily returns file")
    return load_daily_returns(path, label=cfg.data.get("label"))


def cmd_fit(cfg, model):
    """Fit one model and write its chain, volatility and diagnostics files."""
    _ensure_out(cfg)
    y = _load_daily(cfg)
    if model == "sv":
        chain = run_sv_fit(
            y,
            prior=cfg.prior(),
            hmc=cfg.hmc_config(),
            n_burn=cfg.sv.get("n_burn", 10000),
            n_keep=cfg.sv.get("n_keep", 40000),
            seed=cfg.seed,
            trace_indices=tuple(cfg.sv.get("trace_indices", (10,))),
        )
    else:
        chain = run_garch_fit(
            y,
            n_burn=cfg.garch.get("n_burn", 10000),
            n_keep=cfg.garch.get("n_keep", 40000),
            seed=cfg.seed,
            target_accept=cfg.garch.get("target_accept", 0.3),
        )
    rows = diagnostics.summarize_chain(chain)
    base = os.path.join(cfg.out, model)
    write_chain(chain, base + "_chain.txt")
    write_vol_csv(chain, base + "_vol.csv")
    diagnostics.write_summary_csv(rows, base + "_diagnostics.csv")
    print(f"{model}: {chain.n_kept} draws kept after {chain.burn_in} burn-in")
    for r in rows:
        print(f"  {r.name:>14}  mean={r.mean:.6g}  SD={r.sd:.3g}  SE={r.se:.3g}  "
              f"tau_int={r.tau_int:.3g}({r.tau_int_err:.2g})")
    return list(chain.warnings)


def cmd_rv(cfg):
    """Adjusted RV per sampling interval plus the signature table."""
    _ensure_out(cfg)
    y = _load_daily(cfg)
    panel = load_intraday(_require(cfg.path("intraday", "intraday.csv"), "intraday file"), cfg.calendar())
    rows, series = realized.signature_sweep(panel, y, cfg.deltas())
    for d, rv in series.items():
        realized.write_rv_csv(rv, os.path.join(cfg.out, f"rv_{_delta_name(d)}min.csv"))
    realized.write_signature_csv(rows, os.path.join(cfg.out, "rv_signature.csv"))
    for r in rows:
        print(f"  delta={r.delta_min:g} min  mean RV={r.mean_rv:.6g}  HL factor={r.hl_factor:.4f}  days={r.n_days}")
    warnings = list(panel.warnings)
    if panel.n_dropped:
        warnings.append(f"{panel.n_dropped} ticks outside the trading sessions were dropped")
    return warnings


def cmd_evaluate(cfg):
    """RMSPE of each fitted model against adjusted RV at every interval."""
    models = {}
    for m in cfg.models():
        models[m] = read_vol_csv(_require(os.path.join(cfg.out, f"{m}_vol.csv"), f"{m} volatility file"), m)
    rvs = {}
    for d in cfg.eval_deltas():
        p = _require(os.path.join(cfg.out, f"rv_{_delta_name(d)}min.csv"), "RV file")
        rvs[float(d)] = realized.read_rv_csv(p, d)
    table = evaluate.compare(models, rvs)
    evaluate.write_score_csv(table, os.path.join(cfg.out, "scores.csv"))
    print(table.summary())
    return []


_REPORT_FILES = (
    "daily.csv", "truth.csv", "intraday.csv",
    "sv_chain.txt", "sv_vol.csv", "sv_diagnostics.csv",
    "garch_chain.txt", "garch_vol.csv", "garch_diagnostics.csv",
    "rv_signature.csv", "scores.csv",
)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _csv_records(path):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        out = []
        for line in fh:
            vals = line.strip().split(",")
            rec = {}
            for k, v in zip(header, vals):
                try:
                    rec[k] = float(v)
                except ValueError:
                    rec[k] = v
            out.append(rec)
    return out


def cmd_report(cfg):
    """Collect every stage's outputs into ``manifest.json``."""
    names = list(_REPORT_FILES)
    names += sorted(f for f in os.listdir(cfg.out) if f.startswith("rv_") and f.endswith("min.csv")) if os.path.isdir(cfg.out) else []
    files = {}
    for name in names:
        p = os.path.join(cfg.out, name)
        if os.path.exists(p):
            files[name] = {"sha256": _sha256(p), "bytes": os.path.getsize(p)}
    if not files:
        raise DataError(f"no pipeline outputs found in {cfg.out}")
    manifest = {"seed": cfg.seed, "files": files}
    for key, name in (("sv_diagnostics", "sv_diagnostics.csv"), ("garch_diagnostics", "garch_diagnostics.csv"),
                      ("signature", "rv_signature.csv"), ("scores", "scores.csv")):
        p = os.path.join(cfg.out, name)
        if os.path.exists(p):
            manifest[key] = _csv_records(p)
    text = json.dumps(manifest, indent=2, sort_keys=True, default=_json_default) + "\n"
    write_text_atomic(os.path.join(cfg.out, "manifest.json"), text)
    print(f"wrote {os.path.join(cfg.out, 'manifest.json')} ({len(files)} files)")
    return []


def _json_default(x):
    if isinstance(x, float) and math.isnan(x):
        return None
    raise TypeError(type(x).__name__)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser():
    parser = _Parser(prog="svhmc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("simulate", "generate synthetic daily and intraday data"),
        ("fit", "fit the SV or GARCH model"),
        ("rv", "realized variance and HL factors per sampling interval"),
        ("evaluate", "RMSPE comparison of fitted models against adjusted RV"),
        ("report", "write a manifest of all outputs"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        if name == "fit":
            p.add_argument("--model", choices=("sv", "garch"), default="sv")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.seed, args.out)
        if args.command == "simulate":
            warnings = cmd_simulate(cfg)
        elif args.command == "fit":
            warnings = cmd_fit(cfg, args.model)
        elif args.command == "rv":
            warnings = cmd_rv(cfg)
        elif args.command == "evaluate":
            warnings = cmd_evaluate(cfg)
        else:
            warnings = cmd_report(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, ParseError, ValidationError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    sys.stdout.flush()
    if warnings:
        for w in warnings:
            print(f"warning: {w}", file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
