"""Noncoherent symbol-by-symbol ML detection on Re{r}.

The detector knows only the channel statistics (mu_f and an effective
variance), never the instantaneous channel.  Scores are kept in the log
domain exactly as derived, so they stay finite at any SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, CltMoments, Scenario, effective_channel_variance
from .constellation import Constellation


@dataclass(frozen=True)
class DetectorContext:
    """Everything the noncoherent receiver needs about one link.

    ``eff_var`` is 2*sigma_f^2 for a blocked direct path and
    2*sigma_f^2 + sigma_hd2 otherwise.
    """

    constellation: Constellation
    mu_f: float
    eff_var: float
    sigma_n2: float

    def __post_init__(self):
        if not (math.isfinite(self.eff_var) and self.eff_var > 0.0):
            raise ValueError("eff_var must be finite and positive")
        if not (math.isfinite(self.sigma_n2) and self.sigma_n2 > 0.0):
            raise ValueError("sigma_n2 must be finite and positive")
        if not math.isfinite(self.mu_f):
            raise ValueError("mu_f must be finite")


def detector_context(c: Constellation, moments: CltMoments, params: ChannelParams,
                     scenario: Scenario) -> DetectorContext:
    """Context with the effective variance implied by the scenario."""
    return DetectorContext(
        constellation=c,
        mu_f=moments.mu_f,
        eff_var=effective_channel_variance(moments, params, scenario),
        sigma_n2=params.sigma_n2,
    )


def metric(ctx: DetectorContext, s: float, r_real):
    """Decision score of candidate amplitude ``s``; lower is more likely.

    (r - mu_f s)^2 / (v s^2 + sigma_n^2) + ln(v s^2 + sigma_n^2) / 2
    with v the effective channel variance.  Broadcasts over ``r_real``.
    """
    b = ctx.eff_var * (s * s) + ctx.sigma_n2
    d = np.asarray(r_real, dtype=float) - ctx.mu_f * s
    out = d * d / b + 0.5 * math.log(b)
    return float(out) if np.ndim(r_real) == 0 else out


def detect(ctx: DetectorContext, r_real):
    """Index of the score-minimizing symbol; ties go to the smaller index.

    Accepts a scalar or an array of received real parts.
    """
    amps = ctx.constellation.amplitudes
    b = ctx.eff_var * (amps * amps) + ctx.sigma_n2
    r = np.asarray(r_real, dtype=float)
    d = r[..., np.newaxis] - ctx.mu_f * amps
    scores = d * d / b + 0.5 * np.log(b)
    idx = np.argmin(scores, axis=-1)
    return int(idx) if np.ndim(r_real) == 0 else idx
