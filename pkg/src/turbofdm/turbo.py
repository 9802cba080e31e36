"""Rate-1/2 parallel-concatenated turbo code over QPSK, with a fading-aware
probability-domain BCJR decoder.

Each constituent encoder is the 4-state recursive systematic code with
feedback taps 1+D+D^2 and feedforward taps 1+D^2.  One QPSK symbol carries a
(data, parity) pair: data bit on the real axis, parity bit on the imaginary
axis, bit 0 -> +1.  Puncturing to rate 1 drops the odd-time symbols of both
encoders; the decoder gives those instants unit branch likelihoods.

Branch likelihoods are kept in the probability domain.  Their exponents are
normalized per time instant (column maximum shifted to zero, floor at -30)
so the decoder stays inside floating-point range at any operating SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

try:  # optional JIT for the forward/backward recursions (pure-numpy fallback)
    import numba
except ImportError:  # pragma: no cover
    numba = None

EXPONENT_FLOOR = -30.0

# Constellation indexed by (data_bit << 1) | parity_bit.
CONSTELLATION = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


@dataclass(frozen=True)
class Trellis:
    """Transition structure of one constituent encoder.

    next_state/parity are indexed [state, input_bit].  in_state/in_bit list,
    for every destination state, its two incoming transitions.  sym_index
    maps a transition to its constellation point.
    """

    num_states: int
    next_state: np.ndarray
    parity: np.ndarray
    in_state: np.ndarray
    in_bit: np.ndarray
    sym_index: np.ndarray

    @property
    def rho_plus(self) -> np.ndarray:
        """State reached on input symbol +1 (bit 0)."""
        return self.next_state[:, 0]

    @property
    def rho_minus(self) -> np.ndarray:
        return self.next_state[:, 1]

    def diverge_set(self, n: int) -> set[int]:
        return set(int(s) for s in self.next_state[n])

    def converge_set(self, n: int) -> set[int]:
        return set(int(s) for s in self.in_state[n])


def _build_trellis() -> Trellis:
    # Controller-form register (s1, s2) holding the two most recent feedback
    # values.  States are labeled s1 + 2*(s1 ^ s2); this pins the diverge-set
    # convention D_0 = {0, 3} that the decoder tables are written against.
    def label(s1, s2):
        return s1 + 2 * (s1 ^ s2)

    next_state = np.zeros((4, 2), dtype=np.intp)
    parity = np.zeros((4, 2), dtype=np.int8)
    for s1 in (0, 1):
        for s2 in (0, 1):
            for b in (0, 1):
                w = b ^ s1 ^ s2       # feedback 1 + D + D^2
                p = w ^ s2            # feedforward 1 + D^2
                next_state[label(s1, s2), b] = label(w, s1)
                parity[label(s1, s2), b] = p
    in_state = np.zeros((4, 2), dtype=np.intp)
    in_bit = np.zeros((4, 2), dtype=np.intp)
    for n in range(4):
        k = 0
        for m in range(4):
            for b in (0, 1):
                if next_state[m, b] == n:
                    in_state[n, k] = m
                    in_bit[n, k] = b
                    k += 1
        assert k == 2
    sym_index = (np.arange(2)[None, :] << 1) | parity
    return Trellis(
        num_states=4,
        next_state=next_state,
        parity=parity,
        in_state=in_state,
        in_bit=in_bit,
        sym_index=sym_index.astype(np.intp),
    )


DEFAULT_TRELLIS = _build_trellis()


@dataclass
class SoftInput:
    """Per-frame decoder input.

    R and H hold the received and channel frequency-domain values at the
    transmitted symbol positions, shaped (..., arms, stream); the stream is
    encoder 1's symbols followed by encoder 2's.  noise_var_hat is the
    per-dimension time-domain noise variance estimate and fft_len the
    transform length that produced R, which together scale the exponents.
    """

    R: np.ndarray
    H: np.ndarray
    noise_var_hat: float
    puncture_mask: np.ndarray
    fft_len: int

    def __post_init__(self):
        self.R = np.asarray(self.R)
        self.H = np.asarray(self.H)
        self.puncture_mask = np.asarray(self.puncture_mask, dtype=bool)
        if self.R.shape != self.H.shape:
            raise ValueError("R and H must have identical shapes")
        n_tx = int(self.puncture_mask.sum())
        if self.R.shape[-1] != 2 * n_tx:
            raise ValueError(
                f"stream length {self.R.shape[-1]} != 2 x {n_tx} transmitted symbols"
            )


@dataclass
class ExponentMatrix:
    """Gamma exponents, one row per constellation point: shape (..., 4, T)."""

    b: np.ndarray


def rsc_encode(bits: np.ndarray, trellis: Trellis = DEFAULT_TRELLIS) -> np.ndarray:
    """Parity stream of the recursive systematic code, starting from state 0.

    Accepts (..., T) bit arrays and encodes each trailing row; the trellis is
    left unterminated.
    """
    bits = np.asarray(bits, dtype=np.intp)
    out = np.zeros(bits.shape, dtype=np.int8)
    state = np.zeros(bits.shape[:-1], dtype=np.intp)
    for t in range(bits.shape[-1]):
        b = bits[..., t]
        out[..., t] = trellis.parity[state, b]
        state = trellis.next_state[state, b]
    return out


def puncture_mask(rate: str, length: int) -> np.ndarray:
    """True where a symbol time is transmitted; rate 1 keeps even times."""
    if rate == "1/2":
        return np.ones(length, dtype=bool)
    if rate == "1":
        mask = np.zeros(length, dtype=bool)
        mask[::2] = True
        return mask
    raise ValueError(f"rate must be '1/2' or '1', got {rate!r}")


def turbo_encode(
    data_bits: np.ndarray,
    turbo_interleaver,
    mask: np.ndarray | None = None,
    trellis: Trellis = DEFAULT_TRELLIS,
) -> np.ndarray:
    """Encode to the QPSK stream [encoder-1 symbols, encoder-2 symbols].

    Each encoder emits one symbol per time instant (data on I, parity on Q);
    encoder 2 consumes the interleaved data.  A puncture mask keeps only the
    marked instants of both encoders.
    """
    data_bits = np.asarray(data_bits)
    perm = turbo_interleaver.permutation
    if data_bits.shape[-1] != len(perm):
        raise ValueError("interleaver length must match the data length")
    if mask is None:
        mask = np.ones(data_bits.shape[-1], dtype=bool)
    streams = []
    for bits in (data_bits, data_bits[..., perm]):
        par = rsc_encode(bits, trellis)
        syms = (1.0 - 2.0 * bits) + 1j * (1.0 - 2.0 * par)
        streams.append(syms[..., mask])
    return np.concatenate(streams, axis=-1)


def compute_gamma_exponents(soft: SoftInput, decoder_index: int) -> ExponentMatrix:
    """Exponents -sum_l |R - H s|^2 / (2 Ld sigma^2) per constellation point.

    Punctured instants get exponent 0 for every point, i.e. unit gammas.
    Decoder 2 reads the second half of the symbol stream.  noise_var_hat may
    be a scalar or one value per leading (batch) dimension.
    """
    noise_var = np.asarray(soft.noise_var_hat, dtype=float)
    if np.any(noise_var <= 0):
        raise ValueError("noise variance estimate must be positive")
    if decoder_index not in (1, 2):
        raise ValueError("decoder_index must be 1 or 2")
    mask = soft.puncture_mask
    n_tx = int(mask.sum())
    offset = 0 if decoder_index == 1 else n_tx
    R = soft.R[..., offset:offset + n_tx]
    H = soft.H[..., offset:offset + n_tx]
    # |R - Hs|^2 = |R|^2 + 2|H|^2 - 2 Re{R H* s*}, expanded per constellation
    # point in real arithmetic (|s|^2 = 2 for every point)
    z = R * np.conj(H)
    base = (R.real**2 + R.imag**2 + 2.0 * (H.real**2 + H.imag**2)).sum(axis=-2)
    zr = z.real.sum(axis=-2)
    zi = z.imag.sum(axis=-2)
    dist = np.stack([
        base - 2.0 * (zr + zi),    # +1+j
        base - 2.0 * (zr - zi),    # +1-j
        base - 2.0 * (-zr + zi),   # -1+j
        base + 2.0 * (zr + zi),    # -1-j
    ], axis=-2)
    exps = -dist / (
        2.0 * soft.fft_len * noise_var.reshape(noise_var.shape + (1, 1))
    )
    full_shape = exps.shape[:-1] + (mask.size,)
    b = np.zeros(full_shape, dtype=float)
    b[..., mask] = exps
    return ExponentMatrix(b=b)


def normalize_exponents(
    exponents: ExponentMatrix, floor: float = EXPONENT_FLOOR
) -> ExponentMatrix:
    """Shift each time column so its maximum is 0, then clamp below ``floor``."""
    b = exponents.b - exponents.b.max(axis=-2, keepdims=True)
    return ExponentMatrix(b=np.maximum(b, floor))


def transition_gammas(exponents: ExponentMatrix, trellis: Trellis = DEFAULT_TRELLIS) -> np.ndarray:
    """Probability-domain gammas per (time, state, input): shape (..., T, 4, 2)."""
    g_sym = np.exp(exponents.b)
    g = g_sym[..., trellis.sym_index.ravel(), :]
    g = np.moveaxis(g, -1, -2).reshape(g_sym.shape[:-2] + (g_sym.shape[-1], 4, 2))
    return np.ascontiguousarray(g)


def _forward_backward_numpy(gammas, priors, in_flat, next_state, alpha, beta):
    lead = gammas.shape[:-3]
    T, S = gammas.shape[-3], gammas.shape[-2]
    gp = gammas * priors[..., None, :]
    for i in range(T):
        contrib = (alpha[..., i, :, None] * gp[..., i, :, :]).reshape(lead + (2 * S,))
        a = contrib[..., in_flat[:, 0]] + contrib[..., in_flat[:, 1]]
        alpha[..., i + 1, :] = a / a.sum(axis=-1, keepdims=True)
    for i in range(T - 1, -1, -1):
        bnext = beta[..., i + 1, :][..., next_state]
        b = (bnext * gp[..., i, :, :]).sum(axis=-1)
        beta[..., i, :] = b / b.sum(axis=-1, keepdims=True)
    beta_next = beta[..., 1:, :][..., next_state]  # (..., T, S, 2)
    return (alpha[..., :T, :, None] * gammas * beta_next).sum(axis=-2)


if numba is not None:

    @numba.njit(cache=True)
    def _forward_backward_jit(gammas, priors, m_in, b_in, next_state, alpha, beta, G):  # pragma: no cover
        B, T, S = gammas.shape[0], gammas.shape[1], gammas.shape[2]
        for k in range(B):
            for i in range(T):
                tot = 0.0
                for n in range(S):
                    m0, c0 = m_in[n, 0], b_in[n, 0]
                    m1, c1 = m_in[n, 1], b_in[n, 1]
                    v = (
                        alpha[k, i, m0] * gammas[k, i, m0, c0] * priors[k, i, c0]
                        + alpha[k, i, m1] * gammas[k, i, m1, c1] * priors[k, i, c1]
                    )
                    alpha[k, i + 1, n] = v
                    tot += v
                inv = 1.0 / tot
                for n in range(S):
                    alpha[k, i + 1, n] *= inv
            for i in range(T - 1, -1, -1):
                tot = 0.0
                g0 = 0.0
                g1 = 0.0
                for n in range(S):
                    p0 = beta[k, i + 1, next_state[n, 0]] * gammas[k, i, n, 0]
                    p1 = beta[k, i + 1, next_state[n, 1]] * gammas[k, i, n, 1]
                    g0 += alpha[k, i, n] * p0
                    g1 += alpha[k, i, n] * p1
                    v = p0 * priors[k, i, 0] + p1 * priors[k, i, 1]
                    beta[k, i, n] = v
                    tot += v
                inv = 1.0 / tot
                for n in range(S):
                    beta[k, i, n] *= inv
                G[k, i, 0] = g0
                G[k, i, 1] = g1


def bcjr_pass(
    gammas: np.ndarray,
    priors: np.ndarray,
    trellis: Trellis = DEFAULT_TRELLIS,
) -> tuple[np.ndarray, np.ndarray]:
    """One forward-backward pass; returns (extrinsic, app) probability pairs.

    gammas has shape (..., T, S, 2) indexed by (time, from-state, input bit)
    and priors (..., T, 2) with column 0 for bit 0 (+1).  Both recursions are
    normalized each step by the sum over states; the boundary vectors are
    uniform (unterminated trellises).  The extrinsic excludes the prior; the
    a-posteriori output reweights by it.
    """
    gammas = np.asarray(gammas)
    priors = np.asarray(priors)
    lead = gammas.shape[:-3]
    T, S = gammas.shape[-3], gammas.shape[-2]
    in_flat = trellis.in_state * 2 + trellis.in_bit  # (S, 2) into (state*2+bit)

    alpha = np.empty(lead + (T + 1, S), dtype=float)
    alpha[..., 0, :] = 1.0
    beta = np.empty(lead + (T + 1, S), dtype=float)
    beta[..., T, :] = 1.0
    if numba is not None:
        G = np.empty(lead + (T, 2), dtype=float)
        _forward_backward_jit(
            np.ascontiguousarray(gammas).reshape((-1, T, S, 2)),
            np.ascontiguousarray(priors).reshape((-1, T, 2)),
            trellis.in_state,
            trellis.in_bit,
            trellis.next_state,
            alpha.reshape((-1, T + 1, S)),
            beta.reshape((-1, T + 1, S)),
            G.reshape((-1, T, 2)),
        )
    else:
        G = _forward_backward_numpy(
            gammas, priors, in_flat, trellis.next_state, alpha, beta
        )

    denom = G.sum(axis=-1, keepdims=True)
    if np.any(denom == 0.0):
        raise FloatingPointError("BCJR transition metrics underflowed to zero")
    extrinsic = G / denom
    H = G * priors
    app = H / H.sum(axis=-1, keepdims=True)
    return extrinsic, app


def turbo_decode(
    soft: SoftInput,
    turbo_interleaver,
    iterations: int = 8,
    trellis: Trellis = DEFAULT_TRELLIS,
) -> tuple[np.ndarray, np.ndarray]:
    """Iteratively decode; returns (hard bits, a-posteriori pairs).

    One iteration runs decoder 1 then decoder 2, exchanging extrinsic
    probabilities through the interleaver.  The decision comes from a final
    decoder-1 a-posteriori pass using the freshest extrinsic input.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    perm = turbo_interleaver.permutation
    inv = turbo_interleaver.inverse
    g1 = transition_gammas(
        normalize_exponents(compute_gamma_exponents(soft, 1)), trellis
    )
    g2 = transition_gammas(
        normalize_exponents(compute_gamma_exponents(soft, 2)), trellis
    )
    T = g1.shape[-3]
    lead = g1.shape[:-3]
    f2_deint = np.full(lead + (T, 2), 0.5)
    for _ in range(iterations):
        f1, _ = bcjr_pass(g1, f2_deint, trellis)
        f2, _ = bcjr_pass(g2, f1[..., perm, :], trellis)
        f2_deint = f2[..., inv, :]
    _, app = bcjr_pass(g1, f2_deint, trellis)
    bits = (app[..., 1] > app[..., 0]).astype(np.int8)
    return bits, app
