"""Training-time error sources for the all-zero codeword."""

from __future__ import annotations

from ..channel import AwgnHardErrors, BscErrors, ChannelSpec


def error_source(n: int, channel):
    """Wrap a :class:`ChannelSpec` as an error source; pass sources through."""
    if hasattr(channel, "sample"):
        return channel
    if isinstance(channel, ChannelSpec):
        if channel.kind == "bsc":
            return BscErrors(n, channel.snr.bsc_p)
        return AwgnHardErrors(n, channel.snr)
    if isinstance(channel, float):
        return BscErrors(n, channel)
    raise TypeError(f"cannot draw training errors from {channel!r}")
