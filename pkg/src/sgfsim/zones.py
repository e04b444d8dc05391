"""Instantaneous two-user capacity-region geometry.

For fixed received powers, a target-rate pair is supportable by the
single-stage SIC baseline only inside one of two rectangles (one per decode
order), while rate-splitting reaches the whole pentagon bounded by the two
single-user rates and the sum rate. The difference is a triangle on the
sum-rate face that only rate-splitting covers. This module classifies
target pairs against those regions; it is deterministic geometry,
independent of fading statistics and of the silence rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

__all__ = ["ZoneLabel", "RegionCorners", "region_corners", "classify_rate_pair", "classify_grid"]


class ZoneLabel(Enum):
    """Feasibility class of a target-rate pair (GBU target, GFU target)."""

    NOMA_GBU_FIRST = "noma-gbu-decoded-first"
    NOMA_GFU_FIRST = "noma-gfu-decoded-first"
    NOMA_EITHER = "noma-either-order"
    RSMA_ONLY = "rsma-only"
    OUTAGE = "outage"


@dataclass(frozen=True)
class RegionCorners:
    """Characteristic rates of the two-user region at fixed received powers."""

    gbu_alone: float
    gfu_alone: float
    gbu_decoded_first: float
    gfu_decoded_first: float
    sum_rate: float


def region_corners(p_gbu: float, p_gfu: float) -> RegionCorners:
    """Corner rates for received powers ``p_gbu`` and ``p_gfu`` (linear).

    The sum rate equals gbu_decoded_first + gfu_alone and equally
    gbu_alone + gfu_decoded_first: decoding order trades the same total.
    """
    if p_gbu < 0.0 or p_gfu < 0.0:
        raise ValueError("received powers must be >= 0")
    return RegionCorners(
        gbu_alone=math.log2(1.0 + p_gbu),
        gfu_alone=math.log2(1.0 + p_gfu),
        gbu_decoded_first=math.log2(1.0 + p_gbu / (p_gfu + 1.0)),
        gfu_decoded_first=math.log2(1.0 + p_gfu / (p_gbu + 1.0)),
        sum_rate=math.log2(1.0 + p_gbu + p_gfu),
    )


def classify_rate_pair(
    p_gbu: float, p_gfu: float, target_gbu: float, target_gfu: float
) -> ZoneLabel:
    """Classify a target-rate pair against the baseline and rate-split regions.

    Boundaries are inclusive: a target exactly on a region edge is feasible.
    """
    if target_gbu <= 0.0 or target_gfu <= 0.0:
        raise ValueError("target rates must be > 0")
    c = region_corners(p_gbu, p_gfu)
    gbu_first_ok = target_gbu <= c.gbu_decoded_first and target_gfu <= c.gfu_alone
    gfu_first_ok = target_gbu <= c.gbu_alone and target_gfu <= c.gfu_decoded_first
    rsma_ok = (
        target_gbu <= c.gbu_alone
        and target_gfu <= c.gfu_alone
        and target_gbu + target_gfu <= c.sum_rate
    )
    if gbu_first_ok and gfu_first_ok:
        return ZoneLabel.NOMA_EITHER
    if gbu_first_ok:
        return ZoneLabel.NOMA_GBU_FIRST
    if gfu_first_ok:
        return ZoneLabel.NOMA_GFU_FIRST
    if rsma_ok:
        return ZoneLabel.RSMA_ONLY
    return ZoneLabel.OUTAGE


def classify_grid(
    p_gbu: float, p_gfu: float, grid_n: int, max_rate: float | None = None
) -> list[tuple[float, float, ZoneLabel]]:
    """Classify a uniform grid_n x grid_n grid of target pairs.

    Grid points are i * max_rate / grid_n for i = 1..grid_n on both axes;
    ``max_rate`` defaults to the sum rate, which covers every region corner.
    """
    if grid_n < 1:
        raise ValueError(f"grid_n must be >= 1, got {grid_n}")
    if max_rate is None:
        max_rate = region_corners(p_gbu, p_gfu).sum_rate
    if max_rate <= 0.0:
        raise ValueError("max_rate must be > 0")
    step = max_rate / grid_n
    points = [step * (i + 1) for i in range(grid_n)]
    return [
        (t_gbu, t_gfu, classify_rate_pair(p_gbu, p_gfu, t_gbu, t_gfu))
        for t_gbu in points
        for t_gfu in points
    ]
