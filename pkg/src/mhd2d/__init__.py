"""Pseudo-spectral 2D MHD with fractional dissipation, plus the
Littlewood-Paley / inequality diagnostics used to monitor its estimates."""

__version__ = "0.1.0"
