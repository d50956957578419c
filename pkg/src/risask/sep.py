"""Pairwise error probabilities and the union-bound SEP.

Two equivalent evaluations exist and are kept deliberately separate as a
cross-check on the algebra:

* the *physical* form works in link units (mu_f, effective variance,
  noise variance, symbol energies);
* the *SNR* form works in the dimensionless per-level SNRs plus the two
  cascade moments (alpha, beta).

For a pair of distinct energy levels the error probability is a
half-order Marcum expression Q(T - A) + Q(T + A) (competing level above
the transmitted one) or its complement (competing level below); mirrored
two-sided pairs of equal energy reduce to a single Gaussian tail.  Level
differences only ever enter through ratios that stay finite as two levels
approach each other, and the log-of-ratio terms are computed with log1p
plus a short series so near-degenerate allocations evaluate cleanly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, CltMoments, Scenario, effective_channel_variance
from .constellation import Constellation, Side, SnrAllocation
from .special import gaussian_q


class SepSource(enum.Enum):
    PHYSICAL_FORM = "physical"
    SNR_FORM = "snr"


@dataclass(frozen=True)
class PepContext:
    """Link quantities entering the pairwise error formulas."""

    constellation: Constellation
    mu_f: float
    eff_var: float
    sigma_n2: float
    scenario: Scenario

    def __post_init__(self):
        if not (math.isfinite(self.eff_var) and self.eff_var > 0.0):
            raise ValueError("eff_var must be finite and positive")
        if not (math.isfinite(self.sigma_n2) and self.sigma_n2 > 0.0):
            raise ValueError("sigma_n2 must be finite and positive")
        if not (math.isfinite(self.mu_f) and self.mu_f > 0.0):
            raise ValueError("mu_f must be finite and positive")

    @property
    def b_values(self) -> np.ndarray:
        """Per-symbol metric denominators eff_var * E_m + sigma_n2."""
        return self.eff_var * self.constellation.symbol_energies + self.sigma_n2


def pep_context(c: Constellation, moments: CltMoments, params: ChannelParams,
                scenario: Scenario) -> PepContext:
    return PepContext(
        constellation=c,
        mu_f=moments.mu_f,
        eff_var=effective_channel_variance(moments, params, scenario),
        sigma_n2=params.sigma_n2,
        scenario=scenario,
    )


@dataclass(frozen=True)
class SepReport:
    """Union-bound result for one (constellation, link, SNR) point.

    ``sep_upper`` is the raw bound (it may exceed 1 at low SNR and is only
    clamped to its mathematical range [0, M-1]); ``sep_display`` clamps to
    [0, 1] for plotting.
    """

    pep: np.ndarray
    sep_upper: float
    sep_display: float
    scenario: Scenario
    source: SepSource


# ---------------------------------------------------------------------------
# physical form
# ---------------------------------------------------------------------------

def _pair_pep_physical(mu_f, eff_var, sigma_n2, e_tx, e_rival):
    """Error probability for distinct energy levels, in link units."""
    r_tx = math.sqrt(e_tx)
    r_rival = math.sqrt(e_rival)
    b_tx = eff_var * e_tx + sigma_n2
    b_rival = eff_var * e_rival + sigma_n2
    db = eff_var * (e_tx - e_rival)
    root_sum = r_tx + r_rival
    a = mu_f * math.sqrt(2.0 * b_tx) / (eff_var * root_sum)
    # log(b_tx / b_rival) / db, finite in the equal-level limit
    log_ratio = math.log1p(db / b_rival) / db
    gain = mu_f / (eff_var * root_sum)
    t = math.sqrt(b_rival * (log_ratio + 2.0 * gain * gain))
    if e_rival < e_tx:
        # complement written as a difference of small tails; the naive
        # 1 - Q(t-a) - Q(t+a) loses all relative precision at high SNR
        return gaussian_q(a - t) - gaussian_q(a + t)
    return gaussian_q(t - a) + gaussian_q(t + a)


def _mirror_pep_physical(mu_f, eff_var, sigma_n2, energy):
    """Error probability of a two-sided mirror pair (equal energy, +-s)."""
    b = eff_var * energy + sigma_n2
    return gaussian_q(mu_f * math.sqrt(2.0 * energy / b))


def pep(ctx: PepContext, m: int, k: int) -> float:
    """Probability of deciding symbol k when symbol m was sent (0-based)."""
    c = ctx.constellation
    size = c.size
    if not (0 <= m < size and 0 <= k < size):
        raise ValueError("symbol index out of range")
    if m == k:
        raise ValueError("pairwise error needs two distinct symbols")
    energies = c.symbol_energies
    if energies[m] == energies[k]:
        if c.mirror_index(m) != k:
            raise ValueError("equal-energy symbols must be a mirror pair")
        return _mirror_pep_physical(ctx.mu_f, ctx.eff_var, ctx.sigma_n2, energies[m])
    return _pair_pep_physical(ctx.mu_f, ctx.eff_var, ctx.sigma_n2, energies[m], energies[k])


def sep_union_bound(ctx: PepContext) -> SepReport:
    """Union bound: mean over transmitted symbols of all pairwise errors."""
    size = ctx.constellation.size
    mat = np.zeros((size, size))
    for m in range(size):
        for k in range(size):
            if k != m:
                mat[m, k] = pep(ctx, m, k)
    raw = min(max(float(mat.sum()) / size, 0.0), size - 1.0)
    return SepReport(
        pep=mat,
        sep_upper=raw,
        sep_display=min(raw, 1.0),
        scenario=ctx.scenario,
        source=SepSource.PHYSICAL_FORM,
    )


# ---------------------------------------------------------------------------
# SNR form
# ---------------------------------------------------------------------------

def snr_form_constants(moments: CltMoments, scenario: Scenario, rho=None):
    """Dimensionless constants (P, C) of the SNR-domain bound.

    P scales each level's SNR inside the metric denominators and C is the
    energy-to-SNR normalization; blocked links have (2*beta, 2*beta +
    alpha^2), unblocked ones add the direct-path variance in units of
    sigma_h2^2 (rho, 1 under the default coupling) to both.
    """
    if rho is None:
        rho = 0.0 if scenario is Scenario.BLOCKED else 1.0
    p = 2.0 * moments.beta + rho
    return p, p + moments.alpha * moments.alpha


def _gauss_q_arr(x):
    from scipy.special import erfc

    return 0.5 * erfc(x / math.sqrt(2.0))


def _log_ratio(d, w_rival):
    """log((w_tx)/(w_rival)) / d with w_tx = w_rival + d, elementwise stable."""
    d = np.asarray(d, dtype=float)
    w_rival = np.asarray(w_rival, dtype=float)
    tau = d / w_rival
    small = np.abs(tau) < 1e-6
    safe_d = np.where(small, 1.0, d)
    direct = np.log1p(tau) / safe_d
    series = (1.0 - tau * (0.5 - tau * (1.0 / 3.0 - 0.25 * tau))) / w_rival
    return np.where(small, series, direct)


def _pair_terms_snr(x, y, alpha, p, c_norm):
    """Marcum arguments (A, T) of one ordered pair in SNR units.

    ``x`` is the transmitted level's SNR, ``y`` the competing one; both
    may be arrays.  A is the noncentrality, T the threshold.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c = c_norm / p
    g = 2.0 * alpha * alpha / p
    w_tx = x + c
    w_rival = y + c
    root_sum = np.sqrt(x) + np.sqrt(y)
    a = np.sqrt(g * w_tx) / root_sum
    t2 = w_rival * (_log_ratio(x - y, w_rival) + g / (root_sum * root_sum))
    return a, np.sqrt(t2)


def pair_pep_snr(x, y, alpha, p, c_norm):
    """Error probability for distinct levels x (sent) and y (rival).

    The rival-below branch is the complement of the Marcum tail, written
    as a difference of small Gaussian tails so it keeps full relative
    precision at high SNR.
    """
    a, t = _pair_terms_snr(x, y, alpha, p, c_norm)
    below = _gauss_q_arr(a - t) - _gauss_q_arr(a + t)
    above = _gauss_q_arr(t - a) + _gauss_q_arr(t + a)
    return np.where(np.asarray(y) < np.asarray(x), below, above)


def mirror_pep_snr(x, alpha, p, c_norm):
    """Error probability of a mirror pair at level SNR x."""
    x = np.asarray(x, dtype=float)
    c = c_norm / p
    g = 2.0 * alpha * alpha / p
    return _gauss_q_arr(np.sqrt(g * x / (x + c)))


def union_bound_snr_levels(levels, side: Side, alpha, p, c_norm):
    """Union bound from per-level SNRs; vectorized over leading axes.

    ``levels`` has shape (..., n) with n the distinct level count; the
    result has shape (...).  Two-sided constellations weigh each ordered
    level pair four times (two sign choices each side) and add the two
    mirror terms per level.
    """
    lv = np.asarray(levels, dtype=float)
    n = lv.shape[-1]
    total = np.zeros(lv.shape[:-1])
    for i in range(n):
        for j in range(n):
            if i != j:
                total = total + pair_pep_snr(lv[..., i], lv[..., j], alpha, p, c_norm)
    if side is Side.ONE_SIDED:
        return total / n
    mirrors = mirror_pep_snr(lv, alpha, p, c_norm).sum(axis=-1)
    return (2.0 * total + mirrors) / n


def sep_union_bound_snr(alloc: SnrAllocation, moments: CltMoments) -> SepReport:
    """Union bound evaluated from an SNR allocation and (alpha, beta) only.

    Unblocked allocations assume the default sigma_hd2 = sigma_h2**2
    coupling baked into their SNR normalization.
    """
    p, c_norm = snr_form_constants(moments, alloc.scenario)
    lv = np.asarray(alloc.gammas)
    n = lv.size
    size = alloc.size
    if alloc.side is Side.TWO_SIDED:
        level_of = np.concatenate([np.arange(n)[::-1], np.arange(n)])
    else:
        level_of = np.arange(n)
    mat = np.zeros((size, size))
    for m in range(size):
        for k in range(size):
            if m == k:
                continue
            i, j = level_of[m], level_of[k]
            if i == j:
                mat[m, k] = float(mirror_pep_snr(lv[i], moments.alpha, p, c_norm))
            else:
                mat[m, k] = float(pair_pep_snr(lv[i], lv[j], moments.alpha, p, c_norm))
    raw = min(max(float(mat.sum()) / size, 0.0), size - 1.0)
    return SepReport(
        pep=mat,
        sep_upper=raw,
        sep_display=min(raw, 1.0),
        scenario=alloc.scenario,
        source=SepSource.SNR_FORM,
    )
