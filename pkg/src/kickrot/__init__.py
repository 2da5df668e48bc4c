"""Kicked-rotator laboratory: classical maps, exact quantum evolution and a gate-level circuit."""

__version__ = "0.1.0"
