"""Ellipticity certificates and coercivity constants for time-harmonic Maxwell media."""

__version__ = "0.1.0"
