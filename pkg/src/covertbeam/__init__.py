"""Covert beamforming design for IRS-assisted MISO links."""

__version__ = "0.1.0"
