"""Simulator and analytic library for rate-splitting semi-grant-free uplink.

A grant-based user and K contending grant-free users share one resource
block; the strongest grant-free user is admitted under a cognitive-radio
interference threshold and splits its signal across two SIC stages. The
package provides the per-block protocol, closed-form and high-SNR outage
expressions with an independent quadrature oracle, a deterministic parallel
Monte Carlo estimator, a non-splitting baseline, and capacity-region zone
classification, all driven by a CSV-emitting experiment CLI.
"""

from .analytic import (
    AnalyticTerms,
    ConditioningWarning,
    NumericalRangeError,
    OutageBreakdown,
    QuadratureError,
    nu_kernel,
    outage_diversity_asymptote,
    outage_exact,
    outage_exact_quadrature_oracle,
    outage_highsnr,
    outage_probability,
    outage_probability_highsnr,
    outage_single_user,
)
from .baselines import cr_noma_outage_sample, cr_noma_rate
from .model import (
    ChannelRealization,
    SystemConfig,
    achievable_rates,
    db_to_linear,
    linear_to_db,
    sample_channel_realization,
    sinr_triplet,
)
from .montecarlo import (
    CaseTallies,
    OutageEstimate,
    Scheme,
    SweepRow,
    estimate_outage,
    sweep,
)
from .protocol import (
    CaseLabel,
    TransmissionOutcome,
    allocate,
    classify_case,
    evaluate_transmission,
    gbu_oma_outage,
    interference_threshold,
)
from .zones import RegionCorners, ZoneLabel, classify_rate_pair, region_corners

__version__ = "0.1.0"

__all__ = [
    "AnalyticTerms",
    "CaseLabel",
    "CaseTallies",
    "ChannelRealization",
    "ConditioningWarning",
    "NumericalRangeError",
    "OutageBreakdown",
    "OutageEstimate",
    "QuadratureError",
    "RegionCorners",
    "Scheme",
    "SweepRow",
    "SystemConfig",
    "TransmissionOutcome",
    "ZoneLabel",
    "achievable_rates",
    "allocate",
    "classify_case",
    "classify_rate_pair",
    "cr_noma_outage_sample",
    "cr_noma_rate",
    "db_to_linear",
    "estimate_outage",
    "evaluate_transmission",
    "gbu_oma_outage",
    "interference_threshold",
    "linear_to_db",
    "nu_kernel",
    "outage_diversity_asymptote",
    "outage_exact",
    "outage_exact_quadrature_oracle",
    "outage_highsnr",
    "outage_probability",
    "outage_probability_highsnr",
    "outage_single_user",
    "region_corners",
    "sample_channel_realization",
    "sinr_triplet",
    "sweep",
]
