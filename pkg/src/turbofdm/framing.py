"""Frame construction: preamble, cyclic prefix, data block, buffers, postamble.

Frame layout on air is [preamble | cyclic prefix | data block].  The data
block is the inverse transform of Ld frequency-domain QPSK symbols; in the
enhanced layout the band is [B buffer | interleaved(data ++ postamble) | B
buffer] so that a small circular spectral shift caused by residual carrier
offset never pushes data symbols off the ends.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics

BUFFER_SYMBOL = 1.0 + 1.0j  # fixed known QPSK value, discarded at the receiver


@dataclass(frozen=True)
class FrameConfig:
    """Lengths and shape parameters shared by transmitter and receiver.

    rate is the turbo-code rate as a string ("1/2" or "1"); diversity is the
    number of receive arms; ip the spectral interpolation factor used for
    residual-shift estimation.
    """

    lp: int = 512          # preamble length (symbols)
    lh: int = 10           # true channel span
    ld: int = 4096         # OFDM block length
    buffer_len: int = 4    # buffer symbols per band edge (B)
    lo: int = 256          # postamble length
    rate: str = "1"
    diversity: int = 2
    ip: int = 32

    def __post_init__(self):
        for name in ("lp", "ld"):
            v = getattr(self, name)
            if v < 2 or v & (v - 1):
                raise ValueError(f"{name} must be a power of two, got {v}")
        if self.ip not in (1, 2, 4, 8, 16, 32):
            raise ValueError(f"ip must be in {{1,2,4,8,16,32}}, got {self.ip}")
        if self.lh < 1:
            raise ValueError("channel span must be positive")
        if self.lp < 2 * self.lhr:
            raise ValueError("preamble too short for the assumed channel span")
        if self.rate not in ("1/2", "1"):
            raise ValueError(f"rate must be '1/2' or '1', got {self.rate!r}")
        if self.diversity < 1:
            raise ValueError("diversity order must be >= 1")
        if self.buffer_len < 0 or self.lo < 0:
            raise ValueError("buffer and postamble lengths must be >= 0")
        if self.ld2 <= 0:
            raise ValueError("no room for data: ld - 2B - lo <= 0")
        if self.rate == "1/2" and self.ld2 % 2:
            raise ValueError("rate-1/2 needs an even number of data symbols")
        if self.rate == "1" and self.ld1 % 2:
            raise ValueError("rate-1 puncturing needs an even data bit count")

    @property
    def lhr(self) -> int:
        """Channel span assumed by the receiver."""
        return 2 * self.lh - 1

    @property
    def lcp(self) -> int:
        return self.lhr - 1

    @property
    def frame_len(self) -> int:
        return self.lp + self.lcp + self.ld

    @property
    def ld2(self) -> int:
        """Data symbols per frame after buffers and postamble are set aside."""
        return self.ld - 2 * self.buffer_len - self.lo

    @property
    def ld1(self) -> int:
        """Data bits per frame."""
        return self.ld2 if self.rate == "1" else self.ld2 // 2

    @property
    def enhanced(self) -> bool:
        return self.lo > 0

    @property
    def l1(self) -> int:
        """Steady-state preamble samples available to the channel estimator."""
        return self.lp - self.lhr + 1

    @property
    def l2(self) -> int:
        """Span of the preamble convolved with the receiver-assumed channel."""
        return self.lp + self.lhr - 1

    @property
    def preamble_scale(self) -> float:
        return float(np.sqrt(self.lp / self.ld))

    @property
    def throughput(self) -> float:
        """Data bits per transmitted sample."""
        return self.ld1 / self.frame_len


@dataclass(frozen=True)
class Interleaver:
    """A permutation and its inverse; apply() then invert() is the identity."""

    permutation: np.ndarray
    inverse: np.ndarray = field(init=False)

    def __post_init__(self):
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(len(self.permutation))
        object.__setattr__(self, "inverse", inv)

    def __len__(self) -> int:
        return len(self.permutation)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x)[..., self.permutation]

    def invert(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(y)[..., self.inverse]


@dataclass(frozen=True)
class Preamble:
    """Known preamble, in both domains, shared by transmitter and receiver."""

    freq: np.ndarray
    time: np.ndarray


@dataclass
class TxFrame:
    """One assembled frame plus the bookkeeping the simulator needs."""

    time_samples: np.ndarray
    data_bits: np.ndarray
    freq_symbols: np.ndarray
    postamble_positions: np.ndarray


def qpsk_map(bits: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Map bit pairs to (+-scale) + j(+-scale); bit 0 -> +, bit 1 -> -."""
    bits = np.asarray(bits)
    if bits.size % 2:
        raise ValueError("qpsk_map needs an even number of bits")
    b = bits.reshape(-1, 2)
    return scale * ((1.0 - 2.0 * b[:, 0]) + 1j * (1.0 - 2.0 * b[:, 1]))


def random_qpsk(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    return qpsk_map(rng.integers(0, 2, size=2 * n), scale)


def make_preamble(cfg: FrameConfig, rng: np.random.Generator) -> Preamble:
    """Random QPSK preamble scaled so its time-domain power matches the data."""
    freq = random_qpsk(rng, cfg.lp, cfg.preamble_scale)
    time = numerics.ifft(freq)
    return Preamble(freq=freq, time=time)


def make_interleaver(n: int, rng: np.random.Generator) -> Interleaver:
    """Uniform random permutation with stored inverse."""
    if n < 1:
        raise ValueError("interleaver length must be positive")
    return Interleaver(permutation=rng.permutation(n))


def _block_with_prefix(freq_block: np.ndarray, lcp: int) -> np.ndarray:
    time_block = numerics.ifft(freq_block)
    return np.concatenate([time_block[len(time_block) - lcp:], time_block])


def assemble_basic_frame(
    cfg: FrameConfig,
    preamble: Preamble,
    data_syms: np.ndarray,
    data_interleaver: Interleaver,
) -> TxFrame:
    """[preamble | prefix | data]: symbols interleaved across the whole band."""
    if len(data_syms) != cfg.ld:
        raise ValueError(f"expected {cfg.ld} data symbols, got {len(data_syms)}")
    if len(data_interleaver) != cfg.ld:
        raise ValueError("interleaver length must equal the block length")
    freq = data_interleaver.apply(np.asarray(data_syms))
    samples = np.concatenate([preamble.time, _block_with_prefix(freq, cfg.lcp)])
    return TxFrame(
        time_samples=samples,
        data_bits=np.array([], dtype=np.int8),
        freq_symbols=freq,
        postamble_positions=np.array([], dtype=np.intp),
    )


def assemble_enhanced_frame(
    cfg: FrameConfig,
    preamble: Preamble,
    data_syms: np.ndarray,
    postamble_syms: np.ndarray,
    interleaver: Interleaver,
) -> TxFrame:
    """Buffered layout with the postamble dispersed among the data symbols.

    Only data and postamble are interleaved; the buffer symbols go straight
    to their band-edge bins.  The postamble bin positions after interleaving
    are recorded so the receiver's matched filter can be built against them.
    """
    if len(data_syms) != cfg.ld2:
        raise ValueError(f"expected {cfg.ld2} data symbols, got {len(data_syms)}")
    if len(postamble_syms) != cfg.lo:
        raise ValueError(f"expected {cfg.lo} postamble symbols, got {len(postamble_syms)}")
    inner = cfg.ld2 + cfg.lo
    if len(interleaver) != inner:
        raise ValueError("interleaver must cover data plus postamble")
    block = np.concatenate([np.asarray(data_syms), np.asarray(postamble_syms)])
    interleaved = interleaver.apply(block)
    b = cfg.buffer_len
    freq = np.concatenate([
        np.full(b, BUFFER_SYMBOL),
        interleaved,
        np.full(b, BUFFER_SYMBOL),
    ])
    postamble_positions = b + np.flatnonzero(interleaver.permutation >= cfg.ld2)
    samples = np.concatenate([preamble.time, _block_with_prefix(freq, cfg.lcp)])
    return TxFrame(
        time_samples=samples,
        data_bits=np.array([], dtype=np.int8),
        freq_symbols=freq,
        postamble_positions=postamble_positions,
    )
