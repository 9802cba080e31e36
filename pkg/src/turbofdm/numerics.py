"""Transforms, convolution, least squares and random draws shared by all modules.

Transform convention: the forward transform is the plain sum (no scaling) and
the inverse carries the 1/N factor.  This is the convention the noise/channel
variance bookkeeping in the rest of the package relies on (an N-point forward
transform of white noise with per-dimension variance v has per-dimension
variance N*v per bin), so do not change it.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "fft",
    "ifft",
    "linear_convolve",
    "least_squares_precompute",
    "draw_gaussian_pair",
    "draw_complex_gaussian",
    "make_rng",
    "frame_rng",
    "stream_rng",
]


def _check_pow2(n: int) -> None:
    if n < 1 or (n & (n - 1)) != 0:
        raise ValueError(f"transform length must be a power of two, got {n}")


def fft(x: np.ndarray, n: int | None = None) -> np.ndarray:
    """Forward transform (unnormalized sum), zero-padding ``x`` to length ``n``."""
    x = np.asarray(x)
    if n is None:
        n = x.shape[-1]
    _check_pow2(n)
    if x.shape[-1] > n:
        raise ValueError(f"input length {x.shape[-1]} exceeds transform length {n}")
    return np.fft.fft(x, n=n, axis=-1)


def ifft(X: np.ndarray) -> np.ndarray:
    """Inverse transform with the 1/N factor."""
    X = np.asarray(X)
    _check_pow2(X.shape[-1])
    return np.fft.ifft(X, axis=-1)


def linear_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full linear convolution; output length len(a)+len(b)-1."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size == 0 or b.size == 0:
        raise ValueError("convolution inputs must be nonempty")
    return np.convolve(a, b)


def least_squares_precompute(S: np.ndarray) -> np.ndarray:
    """Return P = (S^H S)^-1 S^H for a full-column-rank tall matrix S.

    Solved through a QR factorization rather than the normal equations; the
    returned operator satisfies P @ S = I and can be cached and reapplied to
    many right-hand sides.
    """
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] < S.shape[1]:
        raise ValueError("S must be a tall 2-D matrix (rows >= cols)")
    q, r = np.linalg.qr(S)
    diag = np.abs(np.diag(r))
    if diag.min() <= 1e-12 * max(diag.max(), 1.0):
        raise np.linalg.LinAlgError("matrix is rank deficient")
    return np.linalg.solve(r, q.conj().T)


def make_rng(seed) -> np.random.Generator:
    """Deterministic generator: identical seed, identical stream."""
    return np.random.default_rng(seed)


def stream_rng(seed: int, tag: int) -> np.random.Generator:
    """Campaign-level stream (preamble, interleavers, ...), keyed by tag."""
    return np.random.default_rng((int(seed), 1, int(tag)))


def frame_rng(seed: int, frame_index: int) -> np.random.Generator:
    """Per-frame sub-stream; counter-mixed so frames are independently
    reproducible in any processing order."""
    return np.random.default_rng((int(seed), 0, int(frame_index)))


def draw_gaussian_pair(rng: np.random.Generator, variance_per_dim: float) -> complex:
    """One complex sample with independent N(0, variance_per_dim) parts."""
    if variance_per_dim <= 0:
        raise ValueError("variance must be positive")
    scale = np.sqrt(variance_per_dim)
    re, im = rng.standard_normal(2)
    return complex(scale * re, scale * im)


def draw_complex_gaussian(
    rng: np.random.Generator, shape, variance_per_dim: float
) -> np.ndarray:
    """Vectorized counterpart of :func:`draw_gaussian_pair`."""
    if variance_per_dim <= 0:
        raise ValueError("variance must be positive")
    scale = np.sqrt(variance_per_dim)
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    z = rng.standard_normal(shape + (2,))
    return scale * (z[..., 0] + 1j * z[..., 1])
