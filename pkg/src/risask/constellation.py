"""One- and two-sided multi-level ASK constellations and their SNR mapping.

Energies are the canonical stored quantity (every closed form downstream
is written in symbol energies or symbol SNRs); amplitudes are derived.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, CltMoments, Scenario

#: Minimum relative gap between adjacent energy (and SNR) levels; the
#: pairwise error formulas divide by level differences.
ORDERING_EPS = 1e-9


class Side(enum.Enum):
    ONE_SIDED = "one"
    TWO_SIDED = "two"


def _check_levels(values, *, what, require_positive_first):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{what}: need a one-dimensional, nonempty level list")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{what}: levels must be finite")
    if arr[0] < 0.0 or (require_positive_first and arr[0] <= 0.0):
        raise ValueError(f"{what}: first level out of range")
    gaps = np.diff(arr)
    if arr.size > 1 and np.any(gaps < ORDERING_EPS * arr[1:]):
        raise ValueError(f"{what}: levels must increase with a relative gap >= {ORDERING_EPS}")


@dataclass(frozen=True)
class Constellation:
    """ASK constellation stored by its distinct per-symbol energies.

    ``energies`` lists the distinct levels in increasing order.  One-sided
    constellations place one symbol at +sqrt(E) per level; two-sided ones
    mirror every level to +-sqrt(E), so the symbol count is twice the
    level count (and the smallest level must be strictly positive, or the
    two mirrored symbols would coincide at zero).
    """

    side: Side
    energies: tuple

    def __post_init__(self):
        object.__setattr__(self, "energies", tuple(float(e) for e in self.energies))
        _check_levels(
            self.energies,
            what="constellation energies",
            require_positive_first=self.side is Side.TWO_SIDED,
        )

    @property
    def num_levels(self) -> int:
        return len(self.energies)

    @property
    def size(self) -> int:
        """Number of symbols M."""
        if self.side is Side.TWO_SIDED:
            return 2 * len(self.energies)
        return len(self.energies)

    @property
    def amplitudes(self) -> np.ndarray:
        """Symbol amplitudes in increasing order."""
        roots = np.sqrt(np.asarray(self.energies))
        if self.side is Side.ONE_SIDED:
            return roots
        return np.concatenate([-roots[::-1], roots])

    @property
    def symbol_energies(self) -> np.ndarray:
        """Per-symbol energies aligned with ``amplitudes`` (mirrors share bits)."""
        levels = np.asarray(self.energies)
        if self.side is Side.ONE_SIDED:
            return levels.copy()
        return np.concatenate([levels[::-1], levels])

    def mirror_index(self, m: int) -> int | None:
        """Index of the opposite-amplitude partner of symbol m, if any."""
        if self.side is Side.TWO_SIDED:
            return self.size - 1 - m
        return None


def build(side: Side, energies) -> Constellation:
    """Validated constellation from distinct energy levels (ascending)."""
    return Constellation(side=side, energies=tuple(energies))


def traditional_equispaced(side: Side, size: int, e_av: float) -> Constellation:
    """Equispaced ASK with the given symbol count, scaled to average energy.

    One-sided amplitudes sit at (m-1)*delta for m = 1..M, zero included;
    two-sided ones at +-(2j-1)*delta/2.  delta is chosen so the average of
    the M symbol energies equals ``e_av``.
    """
    if size < 2:
        raise ValueError("need at least two symbols")
    if not (math.isfinite(e_av) and e_av > 0.0):
        raise ValueError("average energy must be positive")
    if side is Side.ONE_SIDED:
        base = np.arange(size, dtype=float) ** 2
    else:
        if size % 2:
            raise ValueError("two-sided constellations need an even symbol count")
        j = np.arange(1, size // 2 + 1, dtype=float)
        base = (2.0 * j - 1.0) ** 2 / 4.0
    energies = base * (e_av / base.mean())
    return Constellation(side=side, energies=tuple(energies))


def avg_energy(c: Constellation) -> float:
    """Average symbol energy, (1/M) * sum of s_m**2."""
    return float(np.mean(c.symbol_energies))


@dataclass(frozen=True)
class SnrAllocation:
    """Per-level SNR allocation for one side and scenario.

    ``gammas`` holds the distinct levels' SNRs in increasing order
    (two-sided constellations list each mirrored level once); their mean
    is the average SNR per symbol ``gamma_av``.
    """

    side: Side
    scenario: Scenario
    gammas: tuple
    gamma_av: float

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        _check_levels(self.gammas, what="snr allocation", require_positive_first=False)
        mean = math.fsum(self.gammas) / len(self.gammas)
        if abs(mean - self.gamma_av) > 1e-9 * max(abs(self.gamma_av), 1e-300):
            raise ValueError("mean of gammas must equal gamma_av")

    @property
    def size(self) -> int:
        """Number of symbols M."""
        if self.side is Side.TWO_SIDED:
            return 2 * len(self.gammas)
        return len(self.gammas)


def snr_scale(moments: CltMoments, params: ChannelParams, scenario: Scenario) -> float:
    """Linear factor mapping symbol energy to symbol SNR.

    Blocked: (2*beta + alpha^2) * sigma_h2^2 / sigma_n2.  Unblocked links
    add the direct-path variance in units of sigma_h2^2, which is +1 under
    the default sigma_hd2 = sigma_h2**2 coupling.
    """
    if scenario is Scenario.BLOCKED:
        rho = 0.0
    else:
        rho = params.sigma_hd2 / (params.sigma_h2 * params.sigma_h2)
    factor = 2.0 * moments.beta + moments.alpha * moments.alpha + rho
    return factor * params.sigma_h2 * params.sigma_h2 / params.sigma_n2


def snr_map(c: Constellation, moments: CltMoments, params: ChannelParams,
            scenario: Scenario) -> SnrAllocation:
    """Per-level SNRs of a constellation under the given link parameters."""
    scale = snr_scale(moments, params, scenario)
    gammas = tuple(scale * e for e in c.energies)
    gamma_av = math.fsum(gammas) / len(gammas)
    return SnrAllocation(side=c.side, scenario=scenario, gammas=gammas, gamma_av=gamma_av)


def snr_inverse(alloc: SnrAllocation, moments: CltMoments,
                params: ChannelParams) -> Constellation:
    """Constellation realizing an SNR allocation (inverse of ``snr_map``)."""
    scale = snr_scale(moments, params, alloc.scenario)
    return Constellation(side=alloc.side, energies=tuple(g / scale for g in alloc.gammas))


def constellation_csv_rows(c: Constellation, alloc: SnrAllocation | None = None) -> list[str]:
    """Serialize symbols as ``side,M,index,amplitude,energy,gamma`` rows.

    The gamma column is left empty when no allocation is supplied.  Indices
    are one-based to match the amplitude ordering used in reports.
    """
    amps = c.amplitudes
    energies = c.symbol_energies
    if alloc is None:
        gammas = [""] * c.size
    else:
        if alloc.side is not c.side or len(alloc.gammas) != c.num_levels:
            raise ValueError("allocation does not match the constellation")
        per_level = np.asarray(alloc.gammas)
        if c.side is Side.TWO_SIDED:
            per_symbol = np.concatenate([per_level[::-1], per_level])
        else:
            per_symbol = per_level
        gammas = [repr(float(g)) for g in per_symbol]
    rows = []
    for i in range(c.size):
        rows.append(
            f"{c.side.value},{c.size},{i + 1},{float(amps[i])!r},"
            f"{float(energies[i])!r},{gammas[i]}"
        )
    return rows
