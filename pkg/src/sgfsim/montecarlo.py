"""Deterministic, parallelizable Monte Carlo outage estimation.

Trials are partitioned into fixed blocks of 65536; block ``b`` draws from a
counter-based generator keyed by ``(seed, b)``, so trial ``i`` sees the same
gains no matter how many workers run or how the work is scheduled. Tallies
are integers and their aggregation is associative, which makes the estimate
a pure function of (config, scheme, trials, seed).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from . import analytic
from .model import SystemConfig, db_to_linear

__all__ = [
    "Scheme",
    "CaseTallies",
    "OutageEstimate",
    "SweepRow",
    "SWEEP_AXES",
    "WORKERS_ENV_VAR",
    "evaluate_rsma_trials",
    "evaluate_noma_trials",
    "estimate_outage",
    "sweep",
]

BLOCK_SIZE = 1 << 16
# below this many observed outages an estimate is flagged unresolved
MIN_RESOLVED_OUTAGES = 10
WORKERS_ENV_VAR = "SGFSIM_WORKERS"


class Scheme(Enum):
    CR_RSMA_SGF = "cr-rsma-sgf"
    CR_NOMA_SGF = "cr-noma-sgf"


@dataclass(frozen=True)
class CaseTallies:
    """Occurrence and GFU-outage counts per operating case (I, II, III)."""

    occurrences: tuple[int, int, int]
    gfu_outages: tuple[int, int, int]

    def __post_init__(self) -> None:
        for occ, out in zip(self.occurrences, self.gfu_outages):
            if out > occ:
                raise ValueError("outage tally cannot exceed occurrence tally")

    @property
    def total_gfu_outages(self) -> int:
        return sum(self.gfu_outages)


@dataclass(frozen=True)
class OutageEstimate:
    """Monte Carlo outage estimate with per-case tallies and standard errors."""

    scheme: Scheme
    seed: int
    trials: int
    gfu_outage_prob: float
    gbu_outage_prob: float
    std_err_gfu: float
    std_err_gbu: float
    case_tallies: CaseTallies

    @property
    def gfu_outage_count(self) -> int:
        return self.case_tallies.total_gfu_outages

    @property
    def statistically_resolved(self) -> bool:
        return self.gfu_outage_count >= MIN_RESOLVED_OUTAGES


def evaluate_rsma_trials(
    config: SystemConfig, gain_gbu: np.ndarray, gains_gfu: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised rate-splitting protocol over many fading blocks.

    ``gains_gfu`` rows must be ascending. Returns (case index in {0,1,2} for
    Cases I/II/III, GFU outage flag, GBU outage flag). The outage tests are
    exact algebraic rearrangements of the per-case rate-versus-target
    comparisons, not approximations.
    """
    p0, ps = config.power_gbu, config.power_gfu
    e0, es = config.eps0, config.eps_s
    p0g0 = p0 * gain_gbu
    tau_hat = p0g0 / e0 - 1.0
    best = ps * gains_gfu[:, -1]
    case3 = tau_hat <= 0.0
    case1 = ~case3 & (best <= tau_hat)
    case_idx = np.where(case3, 2, np.where(case1, 0, 1)).astype(np.int8)

    out_interference_free = best < es
    out_split = p0g0 + 1.0 + best < (1.0 + e0) * (1.0 + es)
    out_decode_first = best < es * (1.0 + p0g0)
    gfu_out = np.where(case3, out_decode_first, np.where(case1, out_interference_free, out_split))
    gbu_out = gain_gbu < config.eta0
    return case_idx, gfu_out, gbu_out


def evaluate_noma_trials(
    config: SystemConfig, gain_gbu: np.ndarray, gains_gfu: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised non-splitting baseline over many fading blocks.

    Same admission window and case partition as the rate-splitting scheme;
    only the achievable rate in the middle case differs (best of one user
    decoded last or the strongest decoded first).
    """
    p0, ps = config.power_gbu, config.power_gfu
    e0, es = config.eps0, config.eps_s
    p0g0 = p0 * gain_gbu
    tau_hat = p0g0 / e0 - 1.0
    best = ps * gains_gfu[:, -1]
    case3 = tau_hat <= 0.0
    case1 = ~case3 & (best <= tau_hat)
    case_idx = np.where(case3, 2, np.where(case1, 0, 1)).astype(np.int8)

    out_interference_free = best < es
    out_decode_first = best < es * (1.0 + p0g0)
    below = np.sum(ps * gains_gfu < tau_hat[:, None], axis=1)
    kth_gain = np.take_along_axis(
        gains_gfu, np.maximum(below - 1, 0)[:, None], axis=1
    )[:, 0]
    out_middle = np.where(
        below >= 1, (ps * kth_gain < es) & out_decode_first, out_decode_first
    )
    gfu_out = np.where(case3, out_decode_first, np.where(case1, out_interference_free, out_middle))
    gbu_out = gain_gbu < config.eta0
    return case_idx, gfu_out, gbu_out


_EVALUATORS = {
    Scheme.CR_RSMA_SGF: evaluate_rsma_trials,
    Scheme.CR_NOMA_SGF: evaluate_noma_trials,
}


def _block_generator(seed: int, block: int) -> np.random.Generator:
    key = (np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(block))
    return np.random.Generator(np.random.Philox(key=key))


def _block_tallies(
    config: SystemConfig, scheme: Scheme, seed: int, block: int, rows: int
) -> tuple[np.ndarray, np.ndarray, int]:
    rng = _block_generator(seed, block)
    u = rng.random((rows, config.num_gfus + 1))
    gains = -np.log1p(-u)
    gfu = np.sort(gains[:, :-1], axis=1)
    g0 = gains[:, -1]
    case_idx, gfu_out, gbu_out = _EVALUATORS[scheme](config, g0, gfu)
    occurrences = np.bincount(case_idx, minlength=3)
    outages = np.bincount(case_idx[gfu_out], minlength=3)
    return occurrences, outages, int(np.count_nonzero(gbu_out))


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV_VAR, "1") or "1")
    return max(1, workers)


def _std_err(p: float, trials: int) -> float:
    return math.sqrt(p * (1.0 - p) / trials)


def estimate_outage(
    config: SystemConfig,
    scheme: Scheme = Scheme.CR_RSMA_SGF,
    trials: int = 10**6,
    seed: int = 0,
    workers: int | None = None,
) -> OutageEstimate:
    """Estimate GFU and GBU outage probabilities over seeded fading blocks.

    Bit-identical output for identical (config, scheme, trials, seed),
    independent of ``workers`` (also settable via the SGFSIM_WORKERS
    environment variable).
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    scheme = Scheme(scheme)
    workers = _resolve_workers(workers)

    n_blocks = (trials + BLOCK_SIZE - 1) // BLOCK_SIZE
    sizes = [min(BLOCK_SIZE, trials - b * BLOCK_SIZE) for b in range(n_blocks)]

    def run(block: int) -> tuple[np.ndarray, np.ndarray, int]:
        return _block_tallies(config, scheme, seed, block, sizes[block])

    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_blocks)))
    else:
        parts = [run(b) for b in range(n_blocks)]

    occurrences = np.sum([p[0] for p in parts], axis=0)
    outages = np.sum([p[1] for p in parts], axis=0)
    gbu_count = sum(p[2] for p in parts)

    gfu_prob = int(outages.sum()) / trials
    gbu_prob = gbu_count / trials
    return OutageEstimate(
        scheme=scheme,
        seed=seed,
        trials=trials,
        gfu_outage_prob=gfu_prob,
        gbu_outage_prob=gbu_prob,
        std_err_gfu=_std_err(gfu_prob, trials),
        std_err_gbu=_std_err(gbu_prob, trials),
        case_tallies=CaseTallies(
            occurrences=tuple(int(x) for x in occurrences),
            gfu_outages=tuple(int(x) for x in outages),
        ),
    )


SWEEP_AXES = ("gbu_power_db", "gfu_power_db", "target_rate", "num_gfus")


@dataclass(frozen=True)
class SweepRow:
    """One grid point of a sweep: estimate plus matching analytic values."""

    axis: str
    axis_value: float
    scheme: Scheme | None
    config: SystemConfig | None
    estimate: OutageEstimate | None
    analytic_exact: float | None
    analytic_highsnr: float | None
    analytic_asymptote: float | None
    unresolved: bool
    error: str | None


def _config_on_axis(
    base: SystemConfig,
    axis: str,
    value: float,
    gbu_to_gfu_power_ratio: float | None,
) -> SystemConfig:
    if axis == "gbu_power_db":
        power_gbu = db_to_linear(value)
        power_gfu = (
            power_gbu / gbu_to_gfu_power_ratio
            if gbu_to_gfu_power_ratio is not None
            else base.power_gfu
        )
        return replace(base, power_gbu=power_gbu, power_gfu=power_gfu)
    if axis == "gfu_power_db":
        return replace(base, power_gfu=db_to_linear(value))
    if axis == "target_rate":
        return replace(base, target_rate_gbu=value, target_rate_gfu=value)
    if axis == "num_gfus":
        return replace(base, num_gfus=int(value))
    raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")


def _analytic_columns(config: SystemConfig) -> tuple[float, float, float, str | None]:
    notes = []
    exact = highsnr = None
    try:
        exact = analytic.outage_probability(config)
    except (ValueError, ArithmeticError) as err:
        notes.append(f"exact: {err}")
    try:
        highsnr = analytic.outage_probability_highsnr(config)
    except (ValueError, ArithmeticError) as err:
        notes.append(f"highsnr: {err}")
    asymptote = analytic.outage_diversity_asymptote(config)
    return exact, highsnr, asymptote, "; ".join(notes) or None


def sweep(
    base_config: SystemConfig,
    axis: str,
    grid,
    trials: int,
    seed: int,
    schemes: tuple[Scheme, ...] = (Scheme.CR_RSMA_SGF, Scheme.CR_NOMA_SGF),
    gbu_to_gfu_power_ratio: float | None = None,
    workers: int | None = None,
) -> list[SweepRow]:
    """Run a one-axis parameter sweep, one row per (grid value, scheme).

    ``gbu_to_gfu_power_ratio`` ties the GFU power to the swept GBU power
    (linear ratio) so locked-ratio sweeps stay on a single axis. Rows share
    the seed, so schemes are compared on identical channel draws. Grid
    values that produce an invalid configuration yield an error row and the
    sweep continues.
    """
    grid = list(grid)
    if not grid:
        raise ValueError("sweep grid must be nonempty")
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; expected one of {SWEEP_AXES}")

    rows: list[SweepRow] = []
    for value in grid:
        try:
            config = _config_on_axis(base_config, axis, value, gbu_to_gfu_power_ratio)
        except (ValueError, TypeError) as err:
            rows.append(
                SweepRow(
                    axis=axis,
                    axis_value=float(value),
                    scheme=None,
                    config=None,
                    estimate=None,
                    analytic_exact=None,
                    analytic_highsnr=None,
                    analytic_asymptote=None,
                    unresolved=False,
                    error=str(err),
                )
            )
            continue
        exact, highsnr, asymptote, note = _analytic_columns(config)
        for scheme in schemes:
            estimate = estimate_outage(config, scheme, trials, seed, workers=workers)
            rows.append(
                SweepRow(
                    axis=axis,
                    axis_value=float(value),
                    scheme=scheme,
                    config=config,
                    estimate=estimate,
                    analytic_exact=exact,
                    analytic_highsnr=highsnr,
                    analytic_asymptote=asymptote,
                    unresolved=not estimate.statistically_resolved,
                    error=note,
                )
            )
    return rows
