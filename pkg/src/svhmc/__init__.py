"""Stochastic volatility estimation by hybrid Monte Carlo.

Fits the standard SV model (latent log-variance AR(1)) with HMC updates of
the whole latent path, fits a GARCH(1,1) baseline by random-walk
Metropolis, builds Hansen-Lunde adjusted realized variance from intraday
prices and scores both models by RMSPE.
"""
from .chain import Chain, VolPath
from .diagnostics import acf, jackknife_se, summarize, summarize_chain, tau_int
from .evaluate import compare, rmspe
from .garch import GarchParams, garch_filter, garch_loglik, run_garch_fit
from .hmc import HmcConfig, hmc_step, leapfrog, tune_step_size
from .kernels import BACKEND
from .param_sampler import PriorSpec, run_sv_fit, sample_mu, sample_phi, sample_sigma_eta_sq
from .realized import RvSeries, adjust_rv, hl_factor, realized_volatility, signature_sweep
from .sv_core import LatentPath, SvParams, grad_h, hamiltonian, log_prob_h
from .synth import SynthSpec, gen_garch, gen_intraday, gen_sv
from .timeseries import IntradayPanel, ReturnSeries, SessionCalendar, load_daily_returns, load_intraday

__version__ = "0.1.0"

__all__ = [
    "Chain",
    "VolPath",
    "acf",
    "jackknife_se",
    "summarize",
    "summarize_chain",
    "tau_int",
    "compare",
    "rmspe",
    "GarchParams",
    "garch_filter",
    "garch_loglik",
    "run_garch_fit",
    "HmcConfig",
    "hmc_step",
    "leapfrog",
    "tune_step_size",
    "BACKEND",
    "PriorSpec",
    "run_sv_fit",
    "sample_mu",
    "sample_phi",
    "sample_sigma_eta_sq",
    "RvSeries",
    "adjust_rv",
    "hl_factor",
    "realized_volatility",
    "signature_sweep",
    "LatentPath",
    "SvParams",
    "grad_h",
    "hamiltonian",
    "log_prob_h",
    "SynthSpec",
    "gen_garch",
    "gen_intraday",
    "gen_sv",
    "IntradayPanel",
    "ReturnSeries",
    "SessionCalendar",
    "load_daily_returns",
    "load_intraday",
]
