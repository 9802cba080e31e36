"""Coherent turbo-coded OFDM baseband modem and Monte Carlo link simulator."""

from .analysis import CapacityPoint, FrameRecord, min_snr_per_bit
from .channel import ChannelRealization, apply_channel, draw_channel
from .framing import FrameConfig, Interleaver, TxFrame
from .harness import CampaignConfig, CampaignResult, run_campaign, run_frame
from .sync import ChannelEstimate, SyncResult
from .turbo import SoftInput, Trellis, turbo_decode, turbo_encode

__version__ = "0.1.0"

__all__ = [
    "CampaignConfig",
    "CampaignResult",
    "CapacityPoint",
    "ChannelEstimate",
    "ChannelRealization",
    "FrameConfig",
    "FrameRecord",
    "Interleaver",
    "SoftInput",
    "SyncResult",
    "Trellis",
    "TxFrame",
    "apply_channel",
    "draw_channel",
    "min_snr_per_bit",
    "run_campaign",
    "run_frame",
    "turbo_decode",
    "turbo_encode",
]
