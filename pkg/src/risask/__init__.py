"""Link-level analysis and SEP-optimal ASK design for RIS-assisted
noncoherent SISO communication."""

from .backend import BACKEND
from .channel import (
    ChannelParams,
    CltMoments,
    Scenario,
    clt_moments,
    effective_channel_variance,
    sample_cascade_gain,
    sample_cascade_gains,
    sample_direct_real,
)
from .constellation import (
    Constellation,
    Side,
    SnrAllocation,
    avg_energy,
    build,
    constellation_csv_rows,
    snr_inverse,
    snr_map,
    snr_scale,
    traditional_equispaced,
)
from .detector import DetectorContext, detect, detector_context, metric
from .montecarlo import (
    McConfig,
    McEstimate,
    pairwise_error_rate,
    simulate_sep,
    wilson_interval,
)
from .optimize import (
    GradientMode,
    OptimizerConfig,
    OptimizerResult,
    objective_gradient,
    optimize,
)
from .sep import (
    PepContext,
    SepReport,
    SepSource,
    pep,
    pep_context,
    sep_union_bound,
    sep_union_bound_snr,
)
from .special import gaussian_q, laguerre_half, marcum_q_half

__all__ = [
    "BACKEND",
    "ChannelParams",
    "CltMoments",
    "Constellation",
    "DetectorContext",
    "GradientMode",
    "McConfig",
    "McEstimate",
    "OptimizerConfig",
    "OptimizerResult",
    "PepContext",
    "Scenario",
    "SepReport",
    "SepSource",
    "Side",
    "SnrAllocation",
    "avg_energy",
    "build",
    "clt_moments",
    "constellation_csv_rows",
    "detect",
    "detector_context",
    "effective_channel_variance",
    "gaussian_q",
    "laguerre_half",
    "marcum_q_half",
    "metric",
    "objective_gradient",
    "optimize",
    "pairwise_error_rate",
    "pep",
    "pep_context",
    "sample_cascade_gain",
    "sample_cascade_gains",
    "sample_direct_real",
    "sep_union_bound",
    "sep_union_bound_snr",
    "simulate_sep",
    "snr_inverse",
    "snr_map",
    "snr_scale",
    "traditional_equispaced",
    "wilson_interval",
]

__version__ = "0.1.0"
