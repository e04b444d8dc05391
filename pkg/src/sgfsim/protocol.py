"""Admission and allocation protocol for the rate-splitting semi-grant-free uplink.

The base station broadcasts an interference threshold derived from the GBU's
received power; the strongest GFU is admitted and splits its signal into two
streams decoded around the GBU in the SIC chain. Depending on where the
threshold falls relative to the GFU gains, the block operates in one of three
regimes:

* Case I   - every GFU fits under the threshold at full power; the admitted
  user sends a single stream decoded last, interference-free.
* Case II  - the threshold is positive but below the strongest received GFU
  power; the power split is chosen so the second stream's interference hits
  the threshold exactly, and the user stays silent when even the optimal
  split cannot reach its target rate.
* Case III - the threshold is zero (the GBU is already failing on its own);
  the admitted user sends a single stream decoded first at full power.

In Cases I and II the threshold guarantees the GBU still reaches its target
rate, so across all cases its outage is exactly the orthogonal-access event.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .model import ChannelRealization, SystemConfig, achievable_rates, sinr_triplet

__all__ = [
    "CaseLabel",
    "TransmissionOutcome",
    "interference_threshold",
    "classify_case",
    "allocate",
    "evaluate_transmission",
    "gbu_oma_outage",
]


class CaseLabel(Enum):
    """Operating regime of one transmission block."""

    CASE_I = "I"
    CASE_II = "II"
    CASE_III = "III"


@dataclass(frozen=True)
class TransmissionOutcome:
    """Everything the protocol decides for one fading block."""

    case_label: CaseLabel
    tau_hat: float
    tau: float
    alpha: float
    beta: float
    rate_gbu: float
    rate_gfu_s1: float
    rate_gfu_s2: float
    rate_gfu_total: float
    gfu_silent: bool
    gbu_outage: bool
    gfu_outage: bool


def interference_threshold(config: SystemConfig, gain_gbu: float) -> tuple[float, float]:
    """Unclipped and broadcast interference thresholds for a GBU gain.

    The unclipped value is the largest residual interference power under
    which the GBU still decodes at its target rate; the broadcast value
    clips it at zero.
    """
    if gain_gbu < 0.0:
        raise ValueError(f"gain_gbu must be >= 0, got {gain_gbu!r}")
    tau_hat = config.power_gbu * gain_gbu / config.eps0 - 1.0
    return tau_hat, max(0.0, tau_hat)


def classify_case(config: SystemConfig, realization: ChannelRealization) -> CaseLabel:
    """Partition the gain space into the three operating regimes.

    tau == 0 (including the measure-zero boundary tau_hat == 0) is Case III;
    received GFU power exactly equal to a positive tau counts as Case I.
    """
    _, tau = interference_threshold(config, realization.gain_gbu)
    if tau == 0.0:
        return CaseLabel.CASE_III
    if config.power_gfu * realization.gain_best <= tau:
        return CaseLabel.CASE_I
    return CaseLabel.CASE_II


def _allocate(
    config: SystemConfig, realization: ChannelRealization, case: CaseLabel
) -> tuple[float, float]:
    if case is CaseLabel.CASE_I:
        return 0.0, 0.0
    if case is CaseLabel.CASE_III:
        return 1.0, 1.0
    tau_hat, _ = interference_threshold(config, realization.gain_gbu)
    alpha = 1.0 - tau_hat / (config.power_gfu * realization.gain_best)
    beta = 1.0 - math.log2(1.0 + tau_hat) / config.target_rate_gfu
    return min(1.0, max(0.0, alpha)), min(1.0, max(0.0, beta))


def allocate(
    config: SystemConfig, realization: ChannelRealization, case: CaseLabel
) -> tuple[float, float]:
    """Optimal power split and target-rate split for the admitted GFU.

    Case I sends everything on the second stream (0, 0); Case III sends
    everything on the first (1, 1). Case II pins the second stream's
    interference at the unclipped threshold; the resulting rate split can
    fall below zero when the threshold already carries more rate than the
    target, so it is clamped to [0, 1] (outage decisions never consult it).
    """
    if case is not classify_case(config, realization):
        raise ValueError(f"case {case} is inconsistent with the supplied realization")
    return _allocate(config, realization, case)


def gbu_oma_outage(config: SystemConfig, gain_gbu: float) -> bool:
    """Would the GBU be in outage transmitting alone? Boundary counts as success."""
    if gain_gbu < 0.0:
        raise ValueError(f"gain_gbu must be >= 0, got {gain_gbu!r}")
    return gain_gbu < config.eta0


def evaluate_transmission(
    config: SystemConfig, realization: ChannelRealization
) -> TransmissionOutcome:
    """Run the full protocol on one fading block and report rates and outages.

    A rate meets its target when rate >= target; the strict converse is an
    outage. In Case II the silence comparison uses the total-rate form
    (total < target), which is the exact rearrangement of the first-stream
    test and is unaffected by the rate-split clamp.
    """
    case = classify_case(config, realization)
    alpha, beta = _allocate(config, realization, case)
    tau_hat, tau = interference_threshold(config, realization.gain_gbu)
    sinrs = sinr_triplet(config, realization.gain_gbu, realization.gain_best, alpha)
    rate_s1, rate_gbu_chain, rate_s2 = achievable_rates(*sinrs)
    rate_total = rate_s1 + rate_s2

    gfu_outage = rate_total < config.target_rate_gfu
    gfu_silent = False
    rate_gbu = rate_gbu_chain
    if case is CaseLabel.CASE_II:
        gfu_silent = gfu_outage
        if gfu_silent:
            # admitted user backs off, the GBU transmits alone
            rate_gbu = math.log2(1.0 + config.power_gbu * realization.gain_gbu)
        gbu_outage = False
    elif case is CaseLabel.CASE_I:
        gbu_outage = False
    else:
        gbu_outage = gbu_oma_outage(config, realization.gain_gbu)

    return TransmissionOutcome(
        case_label=case,
        tau_hat=tau_hat,
        tau=tau,
        alpha=alpha,
        beta=beta,
        rate_gbu=rate_gbu,
        rate_gfu_s1=rate_s1,
        rate_gfu_s2=rate_s2,
        rate_gfu_total=rate_total,
        gfu_silent=gfu_silent,
        gbu_outage=gbu_outage,
        gfu_outage=gfu_outage,
    )
