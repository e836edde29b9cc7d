"""Spectral solver for Maxwell equations in Cole-Cole dispersive media."""
