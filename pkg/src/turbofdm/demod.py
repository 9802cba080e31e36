"""OFDM demodulation after synchronization: offset compensation, transform,
residual-shift estimation against the postamble, deinterleaving, and the
channel transfer values paired with each received symbol.

The receiver never divides by the channel; it hands (R, H) pairs to the
decoder, which works with the distance |R - H s|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .framing import FrameConfig, Interleaver
from .sync import SyncResult

TAU_POST = 3.5  # postamble peak acceptance threshold (x candidate median)


class PostambleMiss(Exception):
    """No credible postamble peak; the frame is counted as erased."""


@dataclass
class DemodOutput:
    R: np.ndarray                 # frequency-domain symbols at data positions
    H_hat: np.ndarray             # channel transfer estimate at the same positions
    residual_shift_hat: float     # subcarrier units
    postamble_peak: float


def data_window(r: np.ndarray, m0: int, cfg: FrameConfig) -> np.ndarray:
    """The ld samples feeding the transform: starts at m2 = m0 + lh - 1 + lp."""
    m2 = m0 + cfg.lh - 1 + cfg.lp
    window = np.asarray(r)[m2 : m2 + cfg.ld]
    if len(window) != cfg.ld:
        raise ValueError("received buffer too short for the data window")
    return window


def compensate_cfo(r: np.ndarray, omega: float) -> np.ndarray:
    r = np.asarray(r)
    if omega == 0.0:
        return r
    n = np.arange(r.shape[-1])
    return r * np.exp(-1j * omega * n)


def demodulate_basic(
    r_arm: np.ndarray,
    h_hat: np.ndarray,
    sync: SyncResult,
    cfg: FrameConfig,
    data_deinterleaver: Interleaver,
) -> DemodOutput:
    """Offset-compensate, transform, and deinterleave one arm of a basic frame.

    The channel transfer estimate is the ld-point transform of the estimated
    taps, deinterleaved index-for-index with the received symbols.
    """
    r_comp = compensate_cfo(r_arm, sync.omega_fine)
    m0 = sync.m_hat
    R = numerics.fft(data_window(r_comp, m0, cfg), cfg.ld)
    H = numerics.fft(np.asarray(h_hat), cfg.ld)
    return DemodOutput(
        R=data_deinterleaver.invert(R),
        H_hat=data_deinterleaver.invert(H),
        residual_shift_hat=0.0,
        postamble_peak=float("inf"),
    )


def build_postamble_mf(
    postamble_syms: np.ndarray,
    postamble_positions: np.ndarray,
    H_hat: np.ndarray,
    ip: int,
) -> np.ndarray:
    """Matched filter taps on the ip-times-interpolated spectral grid.

    The reference places H[p] * S_post[p] at interpolated bin ip*p for each
    postamble position p and zero elsewhere; postamble_syms[j] must be the
    symbol that the interleaver placed at bin postamble_positions[j].  ip=1
    degenerates to the plain grid (integer shifts only).
    """
    if ip < 1 or ip & (ip - 1):
        raise ValueError("interpolation factor must be a power of two")
    ld = len(H_hat)
    mf = np.zeros(ip * ld, dtype=complex)
    pos = np.asarray(postamble_positions)
    mf[ip * pos] = H_hat[pos] * np.asarray(postamble_syms)
    return mf


def estimate_residual_shift(
    r_data_segment: np.ndarray,
    mf: np.ndarray,
    cfg: FrameConfig,
    ip: int,
    tau_post: float = TAU_POST,
) -> tuple[float, float]:
    """Correlate the interpolated spectrum against the postamble reference.

    Candidate circular shifts run over [-B, +B] subcarriers in steps of
    1/ip.  Returns (shift estimate in subcarriers, peak value); raises
    PostambleMiss when the peak does not stand above the candidate median.
    (The median, not the mean, sets the floor: the candidate list is short
    and the correlation main lobe is several steps wide, so the mean tracks
    the peak itself.)
    """
    n_int = ip * cfg.ld
    # single precision: the argmax over candidates is insensitive to it and
    # the interpolated transform dominates the receiver's per-frame cost
    X = numerics.fft(np.asarray(r_data_segment).astype(np.complex64), n_int)
    pos = np.flatnonzero(mf)
    ref = np.conj(mf[pos])
    offsets = np.arange(-cfg.buffer_len * ip, cfg.buffer_len * ip + 1)
    idx = (pos[None, :] + offsets[:, None]) % n_int
    metric = np.abs(X[idx] @ ref)
    k = int(np.argmax(metric))
    peak = float(metric[k])
    floor = float(np.median(metric))
    if floor > 0 and peak < tau_post * floor:
        raise PostambleMiss(
            f"postamble peak {peak:.3g} below {tau_post} x median {floor:.3g}"
        )
    return float(offsets[k]) / ip, peak


def demodulate_enhanced(
    r_arm: np.ndarray,
    h_hat: np.ndarray,
    sync: SyncResult,
    cfg: FrameConfig,
    interleaver: Interleaver,
    postamble_syms: np.ndarray,
    postamble_positions: np.ndarray,
    residual_shift: float | None = None,
    tau_post: float = TAU_POST,
) -> DemodOutput:
    """Demodulate one arm of a buffered frame.

    If ``residual_shift`` is None it is estimated from this arm (the driver
    estimates it once on arm 1 and shares it, since the offset is common).
    The estimated shift is undone by re-rotating the time-domain segment, and
    the buffer and postamble bins are dropped after deinterleaving.
    """
    r_comp = compensate_cfo(r_arm, sync.omega_fine)
    segment = data_window(r_comp, sync.m_hat, cfg)
    H = numerics.fft(np.asarray(h_hat), cfg.ld)
    if residual_shift is None:
        mf = build_postamble_mf(postamble_syms, postamble_positions, H, cfg.ip)
        residual_shift, peak = estimate_residual_shift(
            segment, mf, cfg, cfg.ip, tau_post
        )
    else:
        peak = float("inf")
    n = np.arange(cfg.ld)
    segment = segment * np.exp(-2j * np.pi * residual_shift * n / cfg.ld)
    R = numerics.fft(segment, cfg.ld)
    b = cfg.buffer_len
    inner = slice(b, cfg.ld - b)
    R_inner = interleaver.invert(R[inner])
    H_inner = interleaver.invert(H[inner])
    return DemodOutput(
        R=R_inner[: cfg.ld2],
        H_hat=H_inner[: cfg.ld2],
        residual_shift_hat=float(residual_shift),
        postamble_peak=peak,
    )
