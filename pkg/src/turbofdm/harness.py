"""Monte Carlo campaign driver.

One frame simulation runs the full transmit -> channel -> receive -> decode
chain.  Campaigns sweep SNR (or preamble length) and aggregate bit errors,
erasures, outages and estimator errors per point, flushing results after
every point so long runs are resumable.

Frames are independent; the engine processes them in fixed-size batches with
the array dimensions carrying the batch, which is what makes desk-scale
campaigns (10^4 frames per point) run in minutes on one core.  Every frame
draws its randomness from its own counter-derived stream, so results do not
depend on batch boundaries being reached in any particular order, and
campaigns are bit-identical for any worker count.
"""

from __future__ import annotations

import csv
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analysis, channel, demod, framing, numerics, sync, turbo
from .analysis import FrameRecord
from .framing import FrameConfig

EXPERIMENTS = ("ber", "erasure_sweep", "cfo_rmse", "outage", "crb_curve")

# campaign-level random stream tags
_PREAMBLE, _DATA_IV, _TURBO_IV, _POSTAMBLE = 1, 2, 3, 4


@dataclass(frozen=True)
class CampaignConfig:
    frame: FrameConfig = field(default_factory=FrameConfig)
    snr_db: tuple = (8.0,)
    frames_per_point: int = 1000
    receiver_mode: str = "practical"    # or "ideal"
    experiment: str = "ber"
    seed: int = 0
    channel_mode: str = "independent"   # or "identical"
    fade_var: float = 0.5
    b1: int = 64
    b2: int = 64
    iterations: int = 8
    erased_policy: str = "half"         # "half": erased frames count 0.5*bits errors
    lp_sweep: tuple = ()                # erasure_sweep points; empty -> (frame.lp,)
    tau_par: float = sync.TAU_PAR       # coarse peak-to-average acceptance
    tau_post: float = demod.TAU_POST    # postamble peak acceptance
    batch_size: int = 64
    workers: int = 1
    output: str | None = None

    def __post_init__(self):
        if self.frames_per_point < 1:
            raise ValueError("frames_per_point must be >= 1")
        if not self.snr_db:
            raise ValueError("need at least one SNR point")
        if self.receiver_mode not in ("practical", "ideal"):
            raise ValueError(f"unknown receiver mode {self.receiver_mode!r}")
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.erased_policy not in ("half", "exclude"):
            raise ValueError(f"unknown erased-frame policy {self.erased_policy!r}")
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "lp_sweep", tuple(int(v) for v in self.lp_sweep))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_db"] = list(self.snr_db)
        d["lp_sweep"] = list(self.lp_sweep)
        return d


class CampaignContext:
    """Everything shared between transmitter and receiver for one campaign:
    preamble, interleavers, postamble, puncture mask and derived operators.
    All of it is regenerated deterministically from the campaign seed."""

    def __init__(self, config: CampaignConfig):
        self.config = config
        cfg = config.frame
        self.preamble = framing.make_preamble(
            cfg, numerics.stream_rng(config.seed, _PREAMBLE)
        )
        self.op = sync.preamble_operator(self.preamble, cfg)
        self.searcher = sync.CoarseSearch(
            self.preamble.time, config.b1, window=cfg.lp + cfg.lcp
        )
        inner = cfg.ld2 + cfg.lo if cfg.enhanced else cfg.ld
        self.data_iv = framing.make_interleaver(
            inner, numerics.stream_rng(config.seed, _DATA_IV)
        )
        self.turbo_iv = framing.make_interleaver(
            cfg.ld1, numerics.stream_rng(config.seed, _TURBO_IV)
        )
        self.postamble = framing.random_qpsk(
            numerics.stream_rng(config.seed, _POSTAMBLE), cfg.lo
        )
        self.mask = turbo.puncture_mask(cfg.rate, cfg.ld1)
        self.cap = analysis.min_snr_per_bit(cfg.rate, cfg.diversity)
        self.fine_table = sync.fine_bin_table(cfg.l2, config.b2)
        if cfg.enhanced:
            b = cfg.buffer_len
            perm = self.data_iv.permutation
            pos_rel = np.flatnonzero(perm >= cfg.ld2)
            self.postamble_positions = b + pos_rel
            # postamble symbols reordered to match the bins they landed in
            self.postamble_by_position = self.postamble[perm[pos_rel] - cfg.ld2]
            self.data_positions = b + np.flatnonzero(perm < cfg.ld2)
        else:
            self.postamble_positions = np.array([], dtype=np.intp)
            self.postamble_by_position = np.array([], dtype=complex)
            self.data_positions = np.arange(cfg.ld)

    def noise_var(self, snr_db: float) -> float:
        if np.isinf(snr_db):
            return 0.0
        return channel.snr_per_bit_to_noise_var(
            snr_db, self.cap.capacity, self.config.frame, self.config.fade_var
        )

    def assemble(self, syms: np.ndarray) -> framing.TxFrame:
        cfg = self.config.frame
        if cfg.enhanced:
            return framing.assemble_enhanced_frame(
                cfg, self.preamble, syms, self.postamble, self.data_iv
            )
        return framing.assemble_basic_frame(cfg, self.preamble, syms, self.data_iv)


def _transmit(ctx: CampaignContext, rngs: list) -> tuple[np.ndarray, list]:
    cfg = ctx.config.frame
    bits = np.stack([rng.integers(0, 2, cfg.ld1) for rng in rngs])
    syms = turbo.turbo_encode(bits, ctx.turbo_iv, ctx.mask)
    frames = [ctx.assemble(syms[i]) for i in range(len(rngs))]
    return bits, frames


def _through_channel(ctx, frames, rngs, noise_var, fixed_theta=None):
    cfg = ctx.config.frame
    chans, received, noises = [], [], []
    for fr, rng in zip(frames, rngs):
        ch = channel.draw_channel(
            cfg,
            ctx.config.fade_var,
            rng,
            ctx.config.channel_mode,
            noise_var=noise_var,
            fixed_theta=fixed_theta,
        )
        r, w = channel.apply_channel(fr.time_samples, ch, rng)
        chans.append(ch)
        received.append(r)
        noises.append(w)
    return chans, np.stack(received), np.stack(noises)


def _coarse_and_fine(ctx, r1: np.ndarray):
    """Arm-1 synchronization for one frame: detection, erasure decision,
    first channel fit, then the joint fine offset/timing refinement."""
    cfg = ctx.config.frame
    res = ctx.searcher.detect(r1)
    if sync.decide_erasure(res, cfg, ctx.config.tau_par):
        res.erased = True
        return res
    r1c = demod.compensate_cfo(r1, res.omega_coarse)
    h0 = sync.estimate_channel_ml(r1c, res.m_hat, ctx.op).taps_hat
    omega_total, m0_refined = sync.estimate_fine_cfo(
        r1, h0, ctx.preamble.time, res.omega_coarse, ctx.config.b2, res.m_hat,
        table=ctx.fine_table,
    )
    res.omega_fine = omega_total
    res.m_hat = m0_refined
    return res


def _estimate_all_arms(ctx, r_comp, m0):
    """Channel and noise-variance estimates for every frame and arm.

    r_comp is (B, N, L) offset-compensated; m0 the per-frame start estimate.
    Returns (h_hat (B,N,lhr), noise_var_hat (B,))."""
    op = ctx.op
    B, N = r_comp.shape[:2]
    m1 = np.asarray(m0) + op.lh - 1
    idx = m1[:, None, None] + np.arange(op.l1)[None, None, :]
    windows = np.take_along_axis(r_comp, idx, axis=2)
    h_hat = windows @ op.P.T
    resid = windows - h_hat @ op.S1.T
    per_arm = (resid.real**2 + resid.imag**2).sum(axis=-1) / (2.0 * op.l1)
    return h_hat, per_arm.mean(axis=1)


def _demodulate(ctx, r_arms, h_arms, res):
    """All-arm demodulation for one frame; the residual spectral shift is
    estimated once on arm 1 and shared."""
    cfg = ctx.config.frame
    outs = []
    shift = None
    for l in range(r_arms.shape[0]):
        if cfg.enhanced:
            out = demod.demodulate_enhanced(
                r_arms[l], h_arms[l], res, cfg, ctx.data_iv,
                ctx.postamble_by_position, ctx.postamble_positions,
                residual_shift=shift, tau_post=ctx.config.tau_post,
            )
            shift = out.residual_shift_hat
        else:
            out = demod.demodulate_basic(r_arms[l], h_arms[l], res, cfg, ctx.data_iv)
        outs.append(out)
    R = np.stack([o.R for o in outs])
    H = np.stack([o.H_hat for o in outs])
    return R, H, outs[0].residual_shift_hat


def _true_frame_snr(ctx, chans, noise_all):
    """(B, N) instantaneous SNR per bit from the model quantities."""
    cfg = ctx.config.frame
    taps = np.stack([ch.taps for ch in chans])
    H = np.fft.fft(taps, n=cfg.ld, axis=-1)[..., ctx.data_positions]
    m2 = cfg.lp + cfg.lcp
    W = np.fft.fft(noise_all[:, :, m2 : m2 + cfg.ld], axis=-1)[..., ctx.data_positions]
    S = np.full(H.shape[-1], 1.0 + 1.0j)
    return analysis.frame_snr_per_bit(H, S, W, ctx.cap.capacity)


def _embedded_truth(ctx, chans, m0):
    """True taps, phase-rotated and shifted the way the estimator sees them."""
    cfg = ctx.config.frame
    B = len(chans)
    N = chans[0].taps.shape[0]
    out = np.zeros((B, N, cfg.lhr), dtype=complex)
    for i, ch in enumerate(chans):
        lead = cfg.lh - 1 - int(m0[i])
        rot = ch.taps * np.exp(1j * ch.theta)[:, None]
        out[i, :, lead : lead + cfg.lh] = rot
    return out


def _simulate_ber_batch(ctx: CampaignContext, snr_db: float, indices) -> tuple:
    config = ctx.config
    cfg = config.frame
    nv = ctx.noise_var(snr_db)
    B = len(indices)
    N = cfg.diversity
    rngs = [numerics.frame_rng(config.seed, k) for k in indices]
    bits, frames = _transmit(ctx, rngs)
    chans, r_all, noise_all = _through_channel(ctx, frames, rngs, nv)

    erased = np.zeros(B, dtype=bool)
    m0 = np.full(B, cfg.lh - 1, dtype=np.intp)
    omega_hat = np.zeros(B)
    results = [None] * B

    n = np.arange(r_all.shape[-1])
    if config.receiver_mode == "ideal":
        for i, ch in enumerate(chans):
            omega_hat[i] = ch.omega
            results[i] = sync.SyncResult(
                m_hat=cfg.lh - 1, omega_coarse=ch.omega, omega_fine=ch.omega,
                peak_metric=float("inf"), peak_to_average=float("inf"),
            )
        r_comp = r_all * np.exp(-1j * omega_hat[:, None] * n)[:, None, :]
        h_hat = _embedded_truth(ctx, chans, m0)
        sigma_hat = np.full(B, max(nv, 1e-12))
    else:
        for i in range(B):
            res = _coarse_and_fine(ctx, r_all[i, 0])
            results[i] = res
            erased[i] = res.erased
            if not res.erased:
                m0[i] = res.m_hat
                omega_hat[i] = res.omega_fine
        r_comp = r_all * np.exp(-1j * omega_hat[:, None] * n)[:, None, :]
        h_hat, sigma_hat = _estimate_all_arms(ctx, r_comp, m0)
        sigma_hat = np.maximum(sigma_hat, 1e-12)

    stream_len = 2 * int(ctx.mask.sum())
    R = np.zeros((B, N, stream_len), dtype=complex)
    H = np.zeros((B, N, stream_len), dtype=complex)
    for i in range(B):
        if erased[i]:
            continue
        try:
            # the buffer is already offset-compensated; demodulate at omega 0
            res0 = replace(results[i], omega_fine=0.0)
            R[i], H[i], _ = _demodulate(ctx, r_comp[i], h_hat[i], res0)
        except demod.PostambleMiss:
            erased[i] = True

    errors = np.zeros(B)
    live = np.flatnonzero(~erased)
    if live.size:
        soft = turbo.SoftInput(
            R=R[live], H=H[live], noise_var_hat=sigma_hat[live],
            puncture_mask=ctx.mask, fft_len=cfg.ld,
        )
        bits_hat, _ = turbo.turbo_decode(soft, ctx.turbo_iv, config.iterations)
        errors[live] = (bits_hat != bits[live]).sum(axis=-1)

    snr_arms = _true_frame_snr(ctx, chans, noise_all)
    outage = np.all(
        10.0 * np.log10(np.maximum(snr_arms, 1e-300)) < ctx.cap.min_snr_per_bit_db,
        axis=1,
    )
    truth = _embedded_truth(ctx, chans, m0)
    mse = np.mean(np.abs(h_hat - truth) ** 2, axis=(1, 2))

    records = []
    for i in range(B):
        if erased[i]:
            bit_errors = 0.5 * cfg.ld1 if config.erased_policy == "half" else 0.0
            nbits = cfg.ld1 if config.erased_policy == "half" else 0
            cfo_err = float("nan")
            mse_i = float("nan")
        else:
            bit_errors = float(errors[i])
            nbits = cfg.ld1
            cfo_err = float(omega_hat[i] - chans[i].omega)
            mse_i = float(mse[i])
        records.append(FrameRecord(
            frame_index=int(indices[i]),
            bit_errors=bit_errors,
            bits=nbits,
            erased=bool(erased[i]),
            outage=bool(outage[i]),
            snr_bit_per_arm=snr_arms[i],
            cfo_error=cfo_err,
            channel_mse=mse_i,
        ))
    return records, {}


def _simulate_erasure_batch(ctx, snr_db, indices) -> tuple:
    config = ctx.config
    cfg = config.frame
    nv = ctx.noise_var(snr_db)
    rngs = [numerics.frame_rng(config.seed, k) for k in indices]
    _, frames = _transmit(ctx, rngs)
    chans, r_all, _ = _through_channel(ctx, frames, rngs, nv)
    records = []
    for i, k in enumerate(indices):
        res = ctx.searcher.detect(r_all[i, 0])
        records.append(FrameRecord(
            frame_index=int(k),
            erased=sync.decide_erasure(res, cfg, config.tau_par),
        ))
    return records, {}


def _simulate_cfo_batch(ctx, snr_db, indices) -> tuple:
    """Synchronization-only frames with zero carrier phase, tracking the
    coarse, fine and known-channel (coherent) estimator errors."""
    config = ctx.config
    cfg = config.frame
    nv = ctx.noise_var(snr_db)
    rngs = [numerics.frame_rng(config.seed, k) for k in indices]
    _, frames = _transmit(ctx, rngs)
    chans, r_all, _ = _through_channel(ctx, frames, rngs, nv, fixed_theta=0.0)
    records = []
    coarse_err, coho_err = [], []
    for i, k in enumerate(indices):
        res = _coarse_and_fine(ctx, r_all[i, 0])
        if res.erased:
            records.append(FrameRecord(frame_index=int(k), erased=True))
            continue
        omega = chans[i].omega
        y_true = numerics.linear_convolve(frames[i].time_samples, chans[i].taps[0])
        steady = slice(cfg.lh - 1, cfg.lp)
        # the oracle model counts time (and offset rotation) from the first
        # steady-state sample; remove the rotation accrued before it
        r_win = r_all[i, 0][steady] * np.exp(-1j * omega * (cfg.lh - 1))
        coho = sync.estimate_cfo_coherent(r_win, y_true[steady])
        records.append(FrameRecord(
            frame_index=int(k), cfo_error=float(res.omega_fine - omega),
        ))
        coarse_err.append(res.omega_coarse - omega)
        coho_err.append(coho - omega)
    extras = {
        "coarse_sq_sum": float(np.sum(np.square(coarse_err))),
        "coho_sq_sum": float(np.sum(np.square(coho_err))),
        "coho_n": len(coho_err),
    }
    return records, extras


def _simulate_outage_batch(ctx, snr_db, indices) -> tuple:
    """Channel-only Monte Carlo: outage needs no modem in the loop."""
    config = ctx.config
    cfg = config.frame
    nv = ctx.noise_var(snr_db)
    records = []
    for k in indices:
        rng = numerics.frame_rng(config.seed, k)
        ch = channel.draw_channel(
            cfg, config.fade_var, rng, config.channel_mode, noise_var=nv
        )
        H = np.fft.fft(ch.taps, n=cfg.ld, axis=-1)[:, ctx.data_positions]
        w = numerics.draw_complex_gaussian(rng, (cfg.diversity, cfg.ld), nv)
        W = np.fft.fft(w, axis=-1)[:, ctx.data_positions]
        S = np.full(H.shape[-1], 1.0 + 1.0j)
        snr_arms = analysis.frame_snr_per_bit(H, S, W, ctx.cap.capacity)
        records.append(FrameRecord(
            frame_index=int(k),
            outage=analysis.is_outage(snr_arms, ctx.cap.min_snr_per_bit_db),
            snr_bit_per_arm=snr_arms,
        ))
    return records, {}


_BATCH_FNS = {
    "ber": _simulate_ber_batch,
    "erasure_sweep": _simulate_erasure_batch,
    "cfo_rmse": _simulate_cfo_batch,
    "outage": _simulate_outage_batch,
}


def run_frame(
    config: CampaignConfig, snr_db: float, seed: int | None = None, frame_index: int = 0
) -> FrameRecord:
    """Simulate a single frame end to end; deterministic in (seed, index)."""
    if seed is not None and seed != config.seed:
        config = replace(config, seed=seed)
    ctx = CampaignContext(config)
    records, _ = _simulate_ber_batch(ctx, snr_db, [frame_index])
    return records[0]


# ---------------------------------------------------------------------------
# campaign orchestration


def _merge_records(agg: dict, records: list, extras: dict) -> None:
    for rec in records:
        agg["frames"] += 1
        agg["bits"] += rec.bits
        agg["errors"] += rec.bit_errors
        agg["erasures"] += int(rec.erased)
        agg["outages"] += int(rec.outage)
        if np.isfinite(rec.cfo_error):
            agg["cfo_sq_sum"] += rec.cfo_error**2
            agg["cfo_n"] += 1
        if np.isfinite(rec.channel_mse):
            agg["mse_sum"] += rec.channel_mse
            agg["mse_n"] += 1
    for key, val in extras.items():
        agg[key] = agg.get(key, 0) + val


def _new_agg() -> dict:
    return dict(
        frames=0, bits=0.0, errors=0.0, erasures=0, outages=0,
        cfo_sq_sum=0.0, cfo_n=0, mse_sum=0.0, mse_n=0,
    )


_WORKER_CTX: dict = {}


def _worker_batch(config_dict: dict, lp: int, snr_db: float, indices: list) -> dict:
    key = (json.dumps(config_dict, sort_keys=True), lp)
    if key not in _WORKER_CTX:
        _WORKER_CTX.clear()
        cfg_d = dict(config_dict)
        frame_d = dict(cfg_d.pop("frame"))
        frame_d["lp"] = lp
        config = CampaignConfig(frame=FrameConfig(**frame_d), **cfg_d)
        _WORKER_CTX[key] = CampaignContext(config)
    ctx = _WORKER_CTX[key]
    records, extras = _BATCH_FNS[ctx.config.experiment](ctx, snr_db, indices)
    agg = _new_agg()
    _merge_records(agg, records, extras)
    return agg


def _point_summary(config: CampaignConfig, lp: int, snr_db: float, agg: dict) -> dict:
    cfg = replace(config.frame, lp=lp)
    nv = float("nan")
    crb_rms = float("nan")
    if np.isfinite(snr_db):
        cap = analysis.min_snr_per_bit(cfg.rate, cfg.diversity)
        nv = channel.snr_per_bit_to_noise_var(snr_db, cap.capacity, cfg, config.fade_var)
        crb_var = sync.crb_frequency(
            cfg.lp - cfg.lh + 1, config.fade_var, 2.0 / cfg.ld, cfg.lh, nv
        )
        crb_rms = float(np.sqrt(crb_var))
    frames = agg["frames"]
    out = {
        "lp": lp,
        "snr_db": snr_db,
        "frames": frames,
        "ber": agg["errors"] / agg["bits"] if agg["bits"] else float("nan"),
        "erasure_rate": agg["erasures"] / frames if frames else float("nan"),
        "outage_rate": agg["outages"] / frames if frames else float("nan"),
        "rms_cfo_error": float(np.sqrt(agg["cfo_sq_sum"] / agg["cfo_n"]))
        if agg["cfo_n"] else float("nan"),
        "mean_channel_mse": agg["mse_sum"] / agg["mse_n"] if agg["mse_n"] else float("nan"),
        "crb_rms": crb_rms,
        "noise_var": nv,
    }
    if agg.get("coho_n"):
        out["rms_cfo_coarse"] = float(np.sqrt(agg["coarse_sq_sum"] / agg["coho_n"]))
        out["rms_cfo_coherent"] = float(np.sqrt(agg["coho_sq_sum"] / agg["coho_n"]))
    return out


@dataclass
class CampaignResult:
    config: CampaignConfig
    points: list
    csv_path: str | None = None
    json_path: str | None = None


CSV_COLUMNS = ("snr_db", "ber", "erasures", "outages", "rms_cfo", "crb")


def _csv_row(point: dict) -> dict:
    return {
        "snr_db": point["snr_db"],
        "ber": point["ber"],
        "erasures": point["erasure_rate"],
        "outages": point["outage_rate"],
        "rms_cfo": point["rms_cfo_error"],
        "crb": point["crb_rms"],
    }


def _flush(config: CampaignConfig, points: list, csv_path: str, json_path: str) -> None:
    columns = CSV_COLUMNS if config.experiment != "erasure_sweep" else ("lp",) + CSV_COLUMNS
    with open(csv_path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for point in points:
            row = _csv_row(point)
            if "lp" in columns:
                row["lp"] = point["lp"]
            writer.writerow(row)
    tmp = json_path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump({"config": config.to_dict(), "points": points}, fh, indent=2)
    os.replace(tmp, json_path)


def _point_grid(config: CampaignConfig) -> list:
    if config.experiment == "erasure_sweep":
        lps = config.lp_sweep or (config.frame.lp,)
        return [(lp, snr) for lp in lps for snr in config.snr_db]
    return [(config.frame.lp, snr) for snr in config.snr_db]


def run_campaign(config: CampaignConfig, resume: bool = False, verbose: bool = True) -> CampaignResult:
    """Sweep all points, aggregate, and persist CSV + JSON after each point."""
    csv_path = json_path = None
    done: dict = {}
    if config.output:
        base = config.output[:-4] if config.output.endswith(".csv") else config.output
        csv_path, json_path = base + ".csv", base + ".json"
        parent = os.path.dirname(os.path.abspath(csv_path))
        if not os.path.isdir(parent):
            raise IOError(f"output directory does not exist: {parent}")
        if resume and os.path.exists(json_path):
            with open(json_path) as fh:
                sidecar = json.load(fh)
            stored = dict(sidecar.get("config", {}))
            current = config.to_dict()
            for ignore in ("workers", "output"):
                stored.pop(ignore, None)
                current.pop(ignore, None)
            if stored == current:
                done = {(p["lp"], p["snr_db"]): p for p in sidecar["points"]}

    if config.experiment == "crb_curve":
        points = [
            _point_summary(config, lp, snr, _new_agg())
            for lp, snr in _point_grid(config)
        ]
        if csv_path:
            _flush(config, points, csv_path, json_path)
        return CampaignResult(config, points, csv_path, json_path)

    batches_of = max(1, config.batch_size)
    points = []
    pool = None
    if config.workers > 1:
        pool = ProcessPoolExecutor(max_workers=config.workers)
    try:
        for lp, snr in _point_grid(config):
            if (lp, snr) in done:
                points.append(done[(lp, snr)])
                continue
            t0 = time.monotonic()
            spans = [
                list(range(start, min(start + batches_of, config.frames_per_point)))
                for start in range(0, config.frames_per_point, batches_of)
            ]
            agg = _new_agg()
            cfg_dict = config.to_dict()
            if pool is None:
                partials = [
                    _worker_batch(cfg_dict, lp, snr, span) for span in spans
                ]
            else:
                futures = [
                    pool.submit(_worker_batch, cfg_dict, lp, snr, span)
                    for span in spans
                ]
                partials = [f.result() for f in futures]
            for part in partials:  # fixed merge order: batch index
                for key, val in part.items():
                    agg[key] = agg.get(key, 0) + val
            point = _point_summary(config, lp, snr, agg)
            point["wall_time"] = time.monotonic() - t0
            points.append(point)
            if verbose:
                print(
                    f"[{config.experiment}] lp={lp} snr={snr:+.2f} dB: "
                    f"ber={point['ber']:.3e} erasures={point['erasure_rate']:.3e} "
                    f"({point['wall_time']:.1f}s)",
                    flush=True,
                )
            if csv_path:
                _flush(config, points, csv_path, json_path)
    finally:
        if pool is not None:
            pool.shutdown()
    return CampaignResult(config, points, csv_path, json_path)
