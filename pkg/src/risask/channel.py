"""Physical link description, Gaussian moments of the aligned cascade, and
reference samplers for the exact (product-form) channel law.

The receiver-side statistics (mu_f, sigma_f^2) come from a central-limit
approximation of the phase-aligned cascade sum_l |h1,l| |h2,l|; the
samplers below never use that approximation, they draw the per-element
complex Gaussians and take moduli.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .special import laguerre_half


class Scenario(enum.Enum):
    """Whether the direct transmitter-receiver path reaches the receiver."""

    BLOCKED = "blocked"
    UNBLOCKED = "unblocked"


@dataclass(frozen=True)
class ChannelParams:
    """Static description of one RIS-assisted link.

    Attributes
    ----------
    num_elements:
        Number of reflecting elements (>= 2).
    mu1, mu2:
        Complex means of the transmitter-RIS and RIS-receiver per-element
        gains; zero gives Rayleigh fading on that hop.
    sigma_h2:
        Per-element scatter variance of both hops (> 0).
    sigma_hd2:
        Variance of the direct Rayleigh path (>= 0); only reaches the
        receiver in the unblocked scenario.
    sigma_n2:
        Complex noise variance at the receiver (> 0).
    """

    num_elements: int
    mu1: complex
    mu2: complex
    sigma_h2: float
    sigma_hd2: float
    sigma_n2: float

    def __post_init__(self):
        if int(self.num_elements) != self.num_elements or self.num_elements < 2:
            raise ValueError("num_elements must be an integer >= 2")
        for name in ("sigma_h2", "sigma_hd2", "sigma_n2"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")
        if self.sigma_h2 <= 0.0:
            raise ValueError("sigma_h2 must be positive")
        if self.sigma_n2 <= 0.0:
            raise ValueError("sigma_n2 must be positive")
        if self.sigma_hd2 < 0.0:
            raise ValueError("sigma_hd2 must be nonnegative")
        if not (math.isfinite(abs(complex(self.mu1))) and math.isfinite(abs(complex(self.mu2)))):
            raise ValueError("mu1 and mu2 must be finite")

    @classmethod
    def from_rician(cls, num_elements, k1, k2, sigma_h2, sigma_n2, sigma_hd2=None):
        """Build params from Rician factors instead of complex means.

        ``sigma_hd2=None`` applies the default coupling sigma_hd2 =
        sigma_h2**2 under which the unblocked SNR normalization used by
        the closed-form bounds is algebraically consistent.
        """
        if k1 < 0.0 or k2 < 0.0:
            raise ValueError("Rician factors must be nonnegative")
        if sigma_hd2 is None:
            sigma_hd2 = sigma_h2 * sigma_h2
        return cls(
            num_elements=num_elements,
            mu1=complex(math.sqrt(k1 * sigma_h2)),
            mu2=complex(math.sqrt(k2 * sigma_h2)),
            sigma_h2=float(sigma_h2),
            sigma_hd2=float(sigma_hd2),
            sigma_n2=float(sigma_n2),
        )

    @property
    def rice_k1(self) -> float:
        """Line-of-sight to scatter power ratio of the first hop."""
        m = complex(self.mu1)
        return (m.real * m.real + m.imag * m.imag) / self.sigma_h2

    @property
    def rice_k2(self) -> float:
        """Line-of-sight to scatter power ratio of the second hop."""
        m = complex(self.mu2)
        return (m.real * m.real + m.imag * m.imag) / self.sigma_h2


@dataclass(frozen=True)
class CltMoments:
    """Gaussian summary of the aligned cascade gain.

    alpha and beta are the dimensionless factors such that the cascade
    gain is approximately normal with mean mu_f = alpha * sigma_h2 and
    variance sigma_f2 = beta * sigma_h2**2.
    """

    alpha: float
    beta: float
    mu_f: float
    sigma_f2: float

    def __post_init__(self):
        for name in ("alpha", "beta", "mu_f", "sigma_f2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive")


def clt_moments(params: ChannelParams) -> CltMoments:
    """Central-limit mean and variance of sum_l |h1,l| |h2,l|.

    The per-element factors are Rician moduli, whose first moment brings
    in the order-1/2 Laguerre function of the (negated) Rician factors.
    For Rayleigh hops (k1 = k2 = 0) this reduces bit-for-bit to
    alpha = L*pi/4 and beta = L*(16 - pi^2)/16.
    """
    k1 = params.rice_k1
    k2 = params.rice_k2
    l1 = laguerre_half(-k1)
    l2 = laguerre_half(-k2)
    n = params.num_elements
    alpha = n * math.pi / 4 * l1 * l2
    pi2_16 = math.pi * math.pi / 16
    beta = n * ((1.0 + k1) * (1.0 + k2) - pi2_16 * (l1 * l1) * (l2 * l2))
    mu_f = alpha * params.sigma_h2
    sigma_f2 = beta * params.sigma_h2 * params.sigma_h2
    return CltMoments(alpha=alpha, beta=beta, mu_f=mu_f, sigma_f2=sigma_f2)


def effective_channel_variance(moments: CltMoments, params: ChannelParams,
                               scenario: Scenario) -> float:
    """Channel-variance factor in each per-symbol metric denominator.

    Blocked links see 2*sigma_f^2; an unblocked direct path adds its own
    variance on top.
    """
    if scenario is Scenario.BLOCKED:
        return 2.0 * moments.sigma_f2
    return 2.0 * moments.sigma_f2 + params.sigma_hd2


def sample_cascade_gains(params: ChannelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """n exact draws of the aligned cascade gain sum_l |h1,l| |h2,l|.

    Each hop coefficient is drawn as a complex Gaussian and reduced to its
    modulus; no Gaussian approximation of the sum is involved.
    """
    sd = math.sqrt(params.sigma_h2 / 2.0)
    z = rng.standard_normal((4, int(n), params.num_elements))
    m1 = complex(params.mu1)
    m2 = complex(params.mu2)
    h1 = np.hypot(m1.real + sd * z[0], m1.imag + sd * z[1])
    h2 = np.hypot(m2.real + sd * z[2], m2.imag + sd * z[3])
    return np.einsum("ij,ij->i", h1, h2)


def sample_cascade_gain(params: ChannelParams, rng: np.random.Generator) -> float:
    """One exact draw of the aligned cascade gain."""
    return float(sample_cascade_gains(params, 1, rng)[0])


def sample_direct_reals(params: ChannelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """n draws of the real part of the direct path, N(0, sigma_hd2 / 2)."""
    if params.sigma_hd2 == 0.0:
        return np.zeros(int(n))
    return rng.standard_normal(int(n)) * math.sqrt(params.sigma_hd2 / 2.0)


def sample_direct_real(params: ChannelParams, rng: np.random.Generator) -> float:
    """One draw of Re{h_d}; exactly 0.0 for a zero-variance direct path."""
    if params.sigma_hd2 == 0.0:
        return 0.0
    return float(rng.standard_normal() * math.sqrt(params.sigma_hd2 / 2.0))
