"""Cooling and state transfer on spin networks by alternating free evolution
with swaps between a controlled region and a memory register."""

__version__ = "0.1.0"
