"""Interpolation engine."""
