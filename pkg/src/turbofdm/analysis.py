"""Capacity thresholds, per-frame SNR, outage bookkeeping and error tallies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class CapacityPoint:
    """Capacity per dimension and the matching minimum average SNR per bit."""

    code_rate: str
    diversity: int
    capacity: float            # bits/transmission/dimension
    min_snr_per_bit_db: float


@dataclass
class FrameRecord:
    """Outcome of one simulated frame."""

    frame_index: int
    bit_errors: float = 0.0
    bits: int = 0
    erased: bool = False
    outage: bool = False
    snr_bit_per_arm: np.ndarray = field(default_factory=lambda: np.array([]))
    cfo_error: float = float("nan")
    channel_mse: float = float("nan")


def capacity_per_dimension(code_rate: str, diversity: int) -> float:
    """One data bit occupies 2N dimensions at rate 1, 4N at rate 1/2."""
    if diversity < 1:
        raise ValueError("diversity order must be >= 1")
    if code_rate == "1":
        return 1.0 / (2.0 * diversity)
    if code_rate == "1/2":
        return 1.0 / (4.0 * diversity)
    raise ValueError(f"code_rate must be '1/2' or '1', got {code_rate!r}")


def min_snr_per_bit(code_rate: str, diversity: int) -> CapacityPoint:
    """Threshold average SNR per bit for error-free transmission."""
    c = capacity_per_dimension(code_rate, diversity)
    snr = 2.0 ** (2.0 * c) - 1.0
    per_bit = snr / (2.0 * c)
    return CapacityPoint(
        code_rate=code_rate,
        diversity=diversity,
        capacity=c,
        min_snr_per_bit_db=float(10.0 * np.log10(per_bit)),
    )


def frame_snr_per_bit(
    H: np.ndarray, S: np.ndarray, W: np.ndarray, capacity: float
) -> np.ndarray:
    """Instantaneous SNR per bit of one frame, per diversity arm.

    H, S, W are (arms, n) arrays of channel transfer values, transmitted
    symbols and noise transform values at the data positions; the averages
    are over those positions.
    """
    H, S, W = (np.atleast_2d(np.asarray(a)) for a in (H, S, W))
    sig = np.mean(np.abs(H * S) ** 2, axis=-1)
    noise = np.mean(np.abs(W) ** 2, axis=-1)
    with np.errstate(divide="ignore"):  # noiseless oracle runs give inf SNR
        return sig / noise / (2.0 * capacity)


def is_outage(snr_bit_per_arm: np.ndarray, threshold_db: float) -> bool:
    """In outage only when every arm is below the threshold."""
    arm_db = 10.0 * np.log10(np.asarray(snr_bit_per_arm, dtype=float))
    return bool(np.all(arm_db < threshold_db))


def outage_probability(records) -> float:
    records = list(records)
    if not records:
        raise ValueError("no frame records")
    return sum(1 for rec in records if rec.outage) / len(records)
