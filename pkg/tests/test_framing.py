import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turbofdm import numerics
from turbofdm.framing import (
    FrameConfig,
    Interleaver,
    assemble_basic_frame,
    assemble_enhanced_frame,
    make_interleaver,
    make_preamble,
    qpsk_map,
    random_qpsk,
)


def test_qpsk_map_convention():
    assert qpsk_map(np.array([0, 0]))[0] == 1 + 1j
    assert qpsk_map(np.array([1, 1]))[0] == -1 - 1j
    assert qpsk_map(np.array([0, 1]))[0] == 1 - 1j
    assert qpsk_map(np.array([1, 0]))[0] == -1 + 1j


def test_qpsk_preamble_scale():
    cfg = FrameConfig()
    assert cfg.preamble_scale == pytest.approx(np.sqrt(512 / 4096))
    s = qpsk_map(np.array([0, 0]), cfg.preamble_scale)[0]
    assert s.real == pytest.approx(0.3536, abs=2e-4)


def test_qpsk_map_rejects_odd():
    with pytest.raises(ValueError):
        qpsk_map(np.array([0, 1, 0]))


def test_config_invariants():
    cfg = FrameConfig()
    assert cfg.lhr == 19 and cfg.lcp == 18
    assert cfg.frame_len == 512 + 18 + 4096 == 4626
    assert cfg.ld2 == 4096 - 8 - 256 == 3832
    assert cfg.ld1 == 3832


def test_config_throughput():
    assert FrameConfig().throughput == pytest.approx(0.8284, abs=5e-5)
    basic = FrameConfig(ld=1024, buffer_len=0, lo=0, rate="1/2", ip=1)
    assert basic.throughput == pytest.approx(512 / 1554, abs=1e-6)


def test_config_validation():
    with pytest.raises(ValueError):
        FrameConfig(lp=500)
    with pytest.raises(ValueError):
        FrameConfig(ip=3)
    with pytest.raises(ValueError):
        FrameConfig(rate="2/3")
    with pytest.raises(ValueError):
        FrameConfig(lp=16, lh=10)  # preamble shorter than 2*lhr


def test_preamble_power_and_determinism():
    cfg = FrameConfig()
    powers = []
    for seed in range(40):
        p = make_preamble(cfg, numerics.make_rng(seed))
        assert p.time.shape == (cfg.lp,)
        powers.append(np.mean(np.abs(p.time) ** 2))
    assert np.mean(powers) == pytest.approx(2.0 / cfg.ld, rel=0.02)
    a = make_preamble(cfg, numerics.make_rng(3)).time
    b = make_preamble(cfg, numerics.make_rng(3)).time
    assert np.array_equal(a, b)


def test_preamble_autocorrelation():
    cfg = FrameConfig()
    acc = np.zeros(cfg.lp - 1, dtype=complex)
    p0 = 0.0
    n_draws = 200
    for seed in range(n_draws):
        t = make_preamble(cfg, numerics.make_rng(seed)).time
        full = np.correlate(t, t, mode="full")[cfg.lp :]
        acc += full
        p0 += np.sum(np.abs(t) ** 2)
    rho = np.abs(acc) / p0
    assert rho.max() < 0.05


def test_interleaver_identity_n1():
    iv = make_interleaver(1, numerics.make_rng(0))
    assert iv.permutation[0] == 0


def test_interleaver_round_trip(rng):
    iv = make_interleaver(64, rng)
    x = rng.standard_normal(64)
    assert np.array_equal(iv.invert(iv.apply(x)), x)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=300), st.integers(min_value=0, max_value=2**32 - 1))
def test_interleaver_bijectivity(n, seed):
    iv = make_interleaver(n, np.random.default_rng(seed))
    assert sorted(iv.permutation.tolist()) == list(range(n))
    assert np.array_equal(iv.permutation[iv.inverse], np.arange(n))


def test_interleaver_fixed_point_fraction():
    n = 4096
    counts = [
        np.sum(make_interleaver(n, numerics.make_rng(s)).permutation == np.arange(n))
        for s in range(100)
    ]
    assert np.mean(counts) == pytest.approx(1.0, abs=0.5)


def _basic_frame(cfg, seed=0):
    r = numerics.make_rng(seed)
    pre = make_preamble(cfg, r)
    syms = random_qpsk(r, cfg.ld)
    iv = make_interleaver(cfg.ld, r)
    return assemble_basic_frame(cfg, pre, syms, iv), pre, syms, iv


def test_basic_frame_layout():
    cfg = FrameConfig(buffer_len=0, lo=0, rate="1/2", ip=1)
    frame, _, _, _ = _basic_frame(cfg)
    assert frame.time_samples.shape == (4626,)
    # prefix equals the data-block tail
    prefix = frame.time_samples[cfg.lp : cfg.lp + cfg.lcp]
    tail = frame.time_samples[cfg.lp + cfg.ld :]
    assert np.array_equal(prefix, tail)


def test_basic_frame_impulse_block():
    cfg = FrameConfig(lp=64, lh=3, ld=256, buffer_len=0, lo=0, rate="1/2", ip=1)
    pre = make_preamble(cfg, numerics.make_rng(0))
    syms = np.zeros(cfg.ld, dtype=complex)
    syms[0] = 1 + 1j
    identity = Interleaver(permutation=np.arange(cfg.ld))
    frame = assemble_basic_frame(cfg, pre, syms, identity)
    block = frame.time_samples[cfg.lp + cfg.lcp :]
    assert np.allclose(block, (1 + 1j) / cfg.ld)


def test_enhanced_frame_sizes(toy_cfg):
    r = numerics.make_rng(1)
    pre = make_preamble(toy_cfg, r)
    data = random_qpsk(r, toy_cfg.ld2)
    post = random_qpsk(r, toy_cfg.lo)
    iv = make_interleaver(toy_cfg.ld2 + toy_cfg.lo, r)
    frame = assemble_enhanced_frame(toy_cfg, pre, data, post, iv)
    assert frame.time_samples.shape == (toy_cfg.frame_len,)
    pos = frame.postamble_positions
    assert len(pos) == toy_cfg.lo
    assert pos.min() >= toy_cfg.buffer_len
    assert pos.max() < toy_cfg.ld - toy_cfg.buffer_len


def test_enhanced_frame_size_check(toy_cfg):
    r = numerics.make_rng(1)
    pre = make_preamble(toy_cfg, r)
    iv = make_interleaver(toy_cfg.ld2 + toy_cfg.lo, r)
    with pytest.raises(ValueError):
        assemble_enhanced_frame(toy_cfg, pre, random_qpsk(r, toy_cfg.ld2 - 1),
                                random_qpsk(r, toy_cfg.lo), iv)


def test_power_balance_preamble_vs_data():
    cfg = FrameConfig(lp=64, lh=3, ld=256, buffer_len=0, lo=0, rate="1/2", ip=1)
    p_pre, p_data = [], []
    for seed in range(1000):
        frame, _, _, _ = _basic_frame(cfg, seed)
        t = frame.time_samples
        p_pre.append(np.mean(np.abs(t[: cfg.lp]) ** 2))
        p_data.append(np.mean(np.abs(t[cfg.lp + cfg.lcp :]) ** 2))
    assert np.mean(p_pre) == pytest.approx(np.mean(p_data), rel=0.05)


def test_cyclic_prefix_turns_convolution_into_product(rng):
    # channel span <= lcp+1: FFT of the steady-state window is H*S exactly
    cfg = FrameConfig(lp=64, lh=3, ld=256, buffer_len=0, lo=0, rate="1/2", ip=1)
    frame, pre, syms, iv = _basic_frame(cfg, seed=5)
    h = rng.standard_normal(cfg.lh) + 1j * rng.standard_normal(cfg.lh)
    r = numerics.linear_convolve(frame.time_samples, h)
    window = r[cfg.lp + cfg.lcp : cfg.lp + cfg.lcp + cfg.ld]
    R = numerics.fft(window, cfg.ld)
    H = numerics.fft(h, cfg.ld)
    assert np.max(np.abs(R - H * frame.freq_symbols)) < 1e-6


def test_deinterleave_restores_transmit_order(rng):
    cfg = FrameConfig(lp=64, lh=3, ld=256, buffer_len=0, lo=0, rate="1/2", ip=1)
    frame, pre, syms, iv = _basic_frame(cfg, seed=6)
    assert np.array_equal(iv.invert(frame.freq_symbols), syms)
