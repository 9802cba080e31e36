"""Start-of-frame detection, two-stage frequency offset estimation, maximum
likelihood channel estimation, noise variance estimation, and the bound the
offset estimators are judged against.

The detector correlates the received buffer against the known time-domain
preamble over a grid of (start position, frequency bin) pairs and keeps the
magnitude peak.  Frames whose peak lies outside the valid start window, or
whose peak-to-average ratio is too small, are declared erased.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .channel import OMEGA_MAX
from .framing import FrameConfig, Preamble

TAU_PAR = 4.0          # peak-to-average acceptance threshold
FINE_HALF_WIDTH = 0.005  # fine search half-interval around the coarse bin


@dataclass
class SyncResult:
    """Outcome of the detection stage for one frame."""

    m_hat: int
    omega_coarse: float
    omega_fine: float          # total (coarse + fine) estimate once refined
    peak_metric: float
    peak_to_average: float
    erased: bool = False


@dataclass
class ChannelEstimate:
    taps_hat: np.ndarray       # length lhr
    noise_var_hat: float = float("nan")


def bin_centers(lo: float, hi: float, nbins: int) -> np.ndarray:
    """Centers of ``nbins`` equal divisions of [lo, hi]."""
    edges = np.linspace(lo, hi, nbins + 1)
    return 0.5 * (edges[:-1] + edges[1:])


class CoarseSearch:
    """Preamble matched filter bank over a frequency-bin grid.

    The correlations are evaluated with transforms (one per bin, against
    precomputed modulated-preamble spectra) in single precision, which is
    plenty for locating a peak.
    """

    def __init__(
        self,
        preamble_time: np.ndarray,
        b1: int,
        omega_max: float = OMEGA_MAX,
        window: int | None = None,
    ):
        p = np.asarray(preamble_time)
        self.lp = p.size
        self.b1 = b1
        self.bins = bin_centers(-omega_max, omega_max, b1)
        self.window = int(window) if window is not None else self.lp
        self.nfft = 1 << int(np.ceil(np.log2(self.window + self.lp)))
        i = np.arange(self.lp)
        templates = p[None, :] * np.exp(1j * np.outer(self.bins, i))
        self._tmpl_fft = np.conj(
            np.fft.fft(templates.astype(np.complex64), n=self.nfft, axis=-1)
        )

    def metric(self, r: np.ndarray) -> np.ndarray:
        """|correlation| for every (start, bin) pair: shape (window, b1)."""
        seg = np.zeros(self.nfft, dtype=np.complex64)
        n_in = min(len(r), self.window + self.lp - 1)
        seg[:n_in] = r[:n_in]
        corr = np.fft.ifft(np.fft.fft(seg) * self._tmpl_fft, axis=-1)
        return np.abs(corr[:, : self.window]).T

    def detect(self, r: np.ndarray) -> SyncResult:
        if len(r) < self.lp:
            raise ValueError("received buffer shorter than the preamble")
        m = self.metric(r)
        flat = int(np.argmax(m))
        m_hat, b = divmod(flat, self.b1)
        peak = float(m[m_hat, b])
        avg = float(m.mean())
        return SyncResult(
            m_hat=int(m_hat),
            omega_coarse=float(self.bins[b]),
            omega_fine=float(self.bins[b]),
            peak_metric=peak,
            peak_to_average=peak / avg if avg > 0 else float("inf"),
        )


def detect_sof_coarse(
    r: np.ndarray,
    preamble_time: np.ndarray,
    b1: int,
    omega_max: float = OMEGA_MAX,
    window: int | None = None,
) -> SyncResult:
    """Joint start-of-frame / coarse offset search on one arm's buffer."""
    return CoarseSearch(preamble_time, b1, omega_max, window).detect(r)


def decide_erasure(result: SyncResult, cfg: FrameConfig, tau_par: float = TAU_PAR) -> bool:
    """A frame is lost if its peak is outside the valid start window or weak."""
    return bool(
        result.m_hat < 0
        or result.m_hat > cfg.lh - 1
        or result.peak_to_average < tau_par
    )


@dataclass
class PreambleOperator:
    """Precomputed least-squares machinery for one preamble.

    S1 is the (l1 x lhr) convolution matrix of the time-domain preamble and
    P its pseudoinverse; both are fixed for a campaign, so the per-frame
    estimate is a single matrix-vector product.
    """

    S1: np.ndarray
    P: np.ndarray
    lh: int

    @property
    def lhr(self) -> int:
        return self.S1.shape[1]

    @property
    def l1(self) -> int:
        return self.S1.shape[0]


def preamble_operator(preamble: Preamble, cfg: FrameConfig) -> PreambleOperator:
    p = preamble.time
    rows = np.arange(cfg.l1)[:, None]
    cols = np.arange(cfg.lhr)[None, :]
    S1 = p[cfg.lhr - 1 + rows - cols]
    return PreambleOperator(S1=S1, P=numerics.least_squares_precompute(S1), lh=cfg.lh)


def estimate_channel_ml(
    r: np.ndarray, m0: int, op: PreambleOperator
) -> ChannelEstimate:
    """Least-squares channel estimate from the steady-state preamble window.

    The carrier offset must already be compensated on ``r``.  The window
    starts at m1 = m0 + lh - 1; whatever timing ambiguity remains within the
    valid start range shows up as a shift inside the lhr-long estimate, which
    downstream processing absorbs.
    """
    m1 = m0 + op.lh - 1
    window = np.asarray(r)[m1 : m1 + op.l1]
    if len(window) != op.l1:
        raise ValueError("received buffer too short for the estimation window")
    return ChannelEstimate(taps_hat=op.P @ window)


def estimate_noise_variance(
    r: np.ndarray, h_hat: np.ndarray, op: PreambleOperator, m1: int
) -> float:
    """Residual power of the preamble fit, per dimension."""
    window = np.asarray(r)[m1 : m1 + op.l1]
    resid = window - op.S1 @ h_hat
    return float(np.sum(resid.real**2 + resid.imag**2) / (2.0 * op.l1))


def fine_bin_table(l2: int, b2: int, half_width: float = FINE_HALF_WIDTH):
    """Per-campaign cache for the fine search: (bin centers, phase ramps)."""
    bins = bin_centers(-half_width, half_width, b2)
    ramps = np.exp(-1j * np.outer(np.arange(l2), bins))
    return bins, ramps


def estimate_fine_cfo(
    r: np.ndarray,
    h_hat: np.ndarray,
    preamble_time: np.ndarray,
    omega_coarse: float,
    b2: int,
    m_hat: int,
    half_width: float = FINE_HALF_WIDTH,
    table=None,
) -> tuple[float, int]:
    """Refine the offset (and timing) with the channel-matched preamble.

    The reference is the preamble convolved with the channel estimate, whose
    span is l2 = lp + lhr - 1.  Candidate starts cover lhr positions centered
    on the coarse detection (the buffer is zero-extended on the left so early
    hypotheses stay defined); the frequency grid spans the coarse bin +-
    ``half_width``.  Returns (total offset estimate, refined start-of-frame).
    """
    h_hat = np.asarray(h_hat)
    lhr = h_hat.size
    lh = (lhr + 1) // 2
    y_ref = numerics.linear_convolve(np.asarray(preamble_time), h_hat)
    l2 = y_ref.size
    rp = np.concatenate([np.zeros(lhr - 1, dtype=complex), np.asarray(r)])
    start = m_hat  # rp index of the earliest candidate window
    if start + lhr - 1 + l2 > rp.size:
        raise ValueError("received buffer too short for the fine search")
    windows = np.lib.stride_tricks.sliding_window_view(
        rp[start : start + lhr - 1 + l2], l2
    )
    if table is None:
        table = fine_bin_table(l2, b2, half_width)
    fine_bins, ramps = table
    i = np.arange(l2)
    templates = (np.conj(y_ref) * np.exp(-1j * omega_coarse * i))[:, None] * ramps
    metric = np.abs(windows @ templates)  # (lhr, b2)
    flat = int(np.argmax(metric))
    q, b = divmod(flat, b2)
    m0_refined = int(np.clip(m_hat + q - (lh - 1), 0, lh - 1))
    return float(omega_coarse + fine_bins[b]), m0_refined


def estimate_cfo_coherent(
    r: np.ndarray,
    y: np.ndarray,
    omega_max: float = OMEGA_MAX,
    levels: int = 3,
    points: int = 65,
) -> float:
    """Offset estimate with known timing and known channel output.

    Maximizes Re sum(r y* e^{-jwn}) over a grid that is repeatedly zoomed
    around the running maximum; the final resolution is far below 1e-5 rad.
    """
    z = np.asarray(r) * np.conj(np.asarray(y))
    n = np.arange(z.size)
    lo, hi = -omega_max, omega_max
    best = 0.0
    for _ in range(levels):
        grid = np.linspace(lo, hi, points)
        metric = (np.exp(-1j * np.outer(grid, n)) @ z).real
        best = float(grid[int(np.argmax(metric))])
        step = grid[1] - grid[0]
        lo, hi = best - step, best + step
    return best


def crb_frequency(
    m_samples: int, fade_var: float, sym_var: float, lh: int, noise_var: float
) -> float:
    """Ergodicity-approximated lower bound on the offset estimator variance."""
    ramp = m_samples**3 / 3.0 + m_samples**2 / 2.0 + m_samples / 6.0
    return noise_var / (2.0 * fade_var * sym_var * lh * ramp)
