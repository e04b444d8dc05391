"""Comparison schemes for the same admission threshold.

The non-splitting baseline admits one GFU per block and decodes it in a
single SIC stage: either last (interference-free, allowed when its received
power fits under the threshold) or first (treating the GBU as noise). It
coincides with the rate-splitting scheme whenever the threshold is zero or
nobody exceeds it, and is strictly worse in between. The reference GBU
behaviour is plain orthogonal access, provided by
:func:`sgfsim.protocol.gbu_oma_outage`.
"""

from __future__ import annotations

import math

from .model import ChannelRealization, SystemConfig
from .protocol import interference_threshold

__all__ = ["cr_noma_rate", "cr_noma_outage_sample"]


def cr_noma_rate(
    config: SystemConfig, realization: ChannelRealization
) -> tuple[float, int]:
    """Achievable GFU rate of the non-splitting baseline for one block.

    Returns the rate and the 1-based ordered index of the admitted user.
    When k users sit below a positive threshold and at least one sits above,
    the scheme picks the better of admitting the k-th user (decoded last,
    its interference is within budget) or the strongest user (decoded
    first); ties go to the strongest user.
    """
    p0g0 = config.power_gbu * realization.gain_gbu
    tau_hat, tau = interference_threshold(config, realization.gain_gbu)
    best = config.power_gfu * realization.gain_best
    big_k = realization.num_gfus

    rate_decode_first = math.log2(1.0 + best / (p0g0 + 1.0))
    if tau == 0.0:
        return rate_decode_first, big_k
    if best <= tau:
        return math.log2(1.0 + best), big_k

    below = sum(1 for g in realization.gains_gfu if config.power_gfu * g < tau)
    if below == 0:
        return rate_decode_first, big_k
    rate_decode_last = math.log2(1.0 + config.power_gfu * realization.gains_gfu[below - 1])
    if rate_decode_last > rate_decode_first:
        return rate_decode_last, below
    return rate_decode_first, big_k


def cr_noma_outage_sample(config: SystemConfig, realization: ChannelRealization) -> bool:
    """True when the baseline's admitted GFU misses its target rate."""
    rate, _ = cr_noma_rate(config, realization)
    return rate < config.target_rate_gfu
