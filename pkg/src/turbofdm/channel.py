"""Quasi-static frequency-selective Rayleigh channel with carrier offset,
receive diversity and AWGN, plus the SNR-per-bit calibration used by the
campaign driver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .framing import FrameConfig

OMEGA_MAX = 0.04  # frequency offset bound, radians/sample


@dataclass
class ChannelRealization:
    """One frame's channel: taps per arm, shared frequency offset, per-arm
    phase, and the noise variance to apply."""

    taps: np.ndarray          # (arms, lh) complex
    omega: float              # radians/sample, common to all arms
    theta: np.ndarray         # (arms,) radians
    noise_var: float          # per-dimension
    mode: str                 # "identical" or "independent"


def draw_channel(
    cfg: FrameConfig,
    fade_var: float,
    rng: np.random.Generator,
    mode: str = "independent",
    omega_max: float = OMEGA_MAX,
    noise_var: float = 0.0,
    fixed_theta: float | None = None,
) -> ChannelRealization:
    """Fresh taps, offset and phases for one frame.

    Taps are complex Gaussian with per-dimension variance ``fade_var``,
    independent across delay.  "identical" mode copies arm 1's taps to every
    arm; the frequency offset is always common while the phase is drawn per
    arm (or pinned with ``fixed_theta`` for oracle experiments).
    """
    if fade_var <= 0:
        raise ValueError("fade variance must be positive")
    if mode not in ("identical", "independent"):
        raise ValueError(f"unknown channel mode {mode!r}")
    n = cfg.diversity
    if mode == "identical":
        one = numerics.draw_complex_gaussian(rng, cfg.lh, fade_var)
        taps = np.tile(one, (n, 1))
    else:
        taps = numerics.draw_complex_gaussian(rng, (n, cfg.lh), fade_var)
    omega = float(rng.uniform(-omega_max, omega_max))
    if fixed_theta is None:
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
    else:
        theta = np.full(n, float(fixed_theta))
    return ChannelRealization(
        taps=taps, omega=omega, theta=theta, noise_var=float(noise_var), mode=mode
    )


def apply_channel(
    frame_samples: np.ndarray,
    ch: ChannelRealization,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Propagate one frame through every arm.

    Returns (received, noise), each (arms, L + lh - 1): the offset rotation
    multiplies the channel output, then independent AWGN with the same
    variance is added per arm.  The clean component is received - noise.
    """
    s = np.asarray(frame_samples)
    arms, lh = ch.taps.shape
    out_len = s.size + lh - 1
    n = np.arange(out_len)
    clean = np.empty((arms, out_len), dtype=complex)
    for l in range(arms):
        y = numerics.linear_convolve(s, ch.taps[l])
        clean[l] = y * np.exp(1j * (ch.omega * n + ch.theta[l]))
    if ch.noise_var > 0:
        noise = numerics.draw_complex_gaussian(rng, (arms, out_len), ch.noise_var)
    else:
        noise = np.zeros((arms, out_len), dtype=complex)
    return clean + noise, noise


def snr_per_bit_to_noise_var(
    snr_db: float, capacity: float, cfg: FrameConfig, fade_var: float
) -> float:
    """Per-dimension noise variance that realizes a target average SNR per bit.

    The average SNR per bit is (1/2C) E|H S|^2 / E|W|^2 with E|H|^2 =
    2 lh fade_var, |S|^2 = 2 and E|W|^2 = 2 ld sigma_w^2; solving for
    sigma_w^2 gives (1/2C) * 2 lh fade_var / (ld * snr).
    """
    snr = 10.0 ** (snr_db / 10.0)
    return (2.0 * cfg.lh * fade_var) / (2.0 * capacity * cfg.ld * snr)
