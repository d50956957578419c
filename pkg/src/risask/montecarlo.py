"""Exact-channel Monte-Carlo SEP estimation.

The simulator draws the product-form channel (per-element complex
Gaussians reduced to moduli), never its Gaussian approximation; the
detector inside each trial uses the approximate statistics exactly as the
receiver would.  Per-trial counter-based streams make every estimate
reproducible for any thread count or batch size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .channel import ChannelParams, Scenario, clt_moments, effective_channel_variance
from .constellation import Constellation

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class McConfig:
    """Trial budget and reproducibility knobs for one estimate."""

    trials: int
    seed: int
    batch: int = 262144
    threads: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.batch < 1:
            raise ValueError("batch must be at least 1")


@dataclass(frozen=True)
class McEstimate:
    """Error-rate estimate with a 95% Wilson confidence interval."""

    trials: int
    errors: int
    sep: float
    ci95_low: float
    ci95_high: float

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci95_high - self.ci95_low)


def wilson_interval(errors: int, trials: int, z: float = _Z95) -> tuple[float, float]:
    """Score confidence interval; keeps sensible coverage at low counts."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    p = errors / trials
    z2n = z * z / trials
    denom = 1.0 + z2n
    center = (p + 0.5 * z2n) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + 0.25 * z2n / trials) / denom
    lo = 0.0 if errors == 0 else max(0.0, center - half)
    hi = 1.0 if errors == trials else min(1.0, center + half)
    return lo, hi


def _estimate(errors: int, trials: int) -> McEstimate:
    lo, hi = wilson_interval(errors, trials)
    return McEstimate(trials=trials, errors=errors, sep=errors / trials,
                      ci95_low=lo, ci95_high=hi)


def _kernel_inputs(c: Constellation, params: ChannelParams, scenario: Scenario):
    moments = clt_moments(params)
    eff_var = effective_channel_variance(moments, params, scenario)
    amps = np.ascontiguousarray(c.amplitudes)
    b = eff_var * amps * amps + params.sigma_n2
    return {
        "amps": amps,
        "inv_b": np.ascontiguousarray(1.0 / b),
        "half_log_b": np.ascontiguousarray(0.5 * np.log(b)),
        "mu_f": moments.mu_f,
        "num_el": params.num_elements,
        # the modulus law of each hop depends on its mean only through |mu|
        "mu1_abs": abs(complex(params.mu1)),
        "mu2_abs": abs(complex(params.mu2)),
        "sigma_h2": params.sigma_h2,
        "unblocked": scenario is Scenario.UNBLOCKED,
        "direct_sd": math.sqrt(params.sigma_hd2 / 2.0),
        "noise_sd": math.sqrt(params.sigma_n2 / 2.0),
    }


def _run_trials(c, params, scenario, cfg: McConfig, force_symbol=-1, rival_symbol=-1) -> int:
    kw = _kernel_inputs(c, params, scenario)
    threads = backend.resolve_threads(cfg.threads)
    errors = 0
    start = 0
    while start < cfg.trials:
        n = min(cfg.batch, cfg.trials - start)
        errors += backend.sep_trials(
            n, start, np.uint64(cfg.seed),
            kw["amps"], kw["inv_b"], kw["half_log_b"], kw["mu_f"], kw["num_el"],
            kw["mu1_abs"], kw["mu2_abs"], kw["sigma_h2"], kw["unblocked"],
            kw["direct_sd"], kw["noise_sd"], force_symbol, rival_symbol, threads,
        )
        start += n
    return errors


def simulate_sep(c: Constellation, params: ChannelParams, scenario: Scenario,
                 cfg: McConfig) -> McEstimate:
    """Symbol-error-rate estimate over cfg.trials uniform random symbols."""
    errors = _run_trials(c, params, scenario, cfg)
    return _estimate(errors, cfg.trials)


def pairwise_error_rate(c: Constellation, params: ChannelParams, scenario: Scenario,
                        transmit: int, rival: int, cfg: McConfig) -> McEstimate:
    """Conditional estimate: always send ``transmit``, count rival wins."""
    size = c.size
    if not (0 <= transmit < size and 0 <= rival < size) or transmit == rival:
        raise ValueError("need two distinct valid symbol indices")
    errors = _run_trials(c, params, scenario, cfg, force_symbol=transmit, rival_symbol=rival)
    return _estimate(errors, cfg.trials)


def cascade_gain_draws(params: ChannelParams, ndraws: int, seed: int, *,
                       start: int = 0, threads=None) -> np.ndarray:
    """Counter-based exact cascade-gain draws (deterministic in seed/index)."""
    out = backend.cascade_gains(
        int(ndraws), int(start), np.uint64(seed), params.num_elements,
        params.sigma_h2,
        np.array([abs(complex(params.mu1))]), np.array([abs(complex(params.mu2))]),
        backend.resolve_threads(threads),
    )
    return out[0]


def cascade_gain_draws_multi(params_list, ndraws: int, seed: int, *,
                             start: int = 0, threads=None) -> np.ndarray:
    """Cascade draws for several mean configurations sharing (L, sigma_h2).

    All cells ride the same underlying standard draws, so the cost is
    dominated by a single cell; returns shape (ncells, ndraws).
    """
    first = params_list[0]
    for p in params_list[1:]:
        if p.num_elements != first.num_elements or p.sigma_h2 != first.sigma_h2:
            raise ValueError("cells must share num_elements and sigma_h2")
    mu1 = np.array([abs(complex(p.mu1)) for p in params_list])
    mu2 = np.array([abs(complex(p.mu2)) for p in params_list])
    return backend.cascade_gains(
        int(ndraws), int(start), np.uint64(seed), first.num_elements,
        first.sigma_h2, mu1, mu2, backend.resolve_threads(threads),
    )
